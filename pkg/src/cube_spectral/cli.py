"""Command line client for the cube-spectral service.

By default each command talks to an in-process copy of the app, so no
server needs to be running; --server switches to a remote instance.

Exit codes: 0 all checks passed, 1 a check failed, 2 bad usage,
3 numeric failure inside a computation.
"""

from __future__ import annotations

import json
import sys

import click

from .reports import RunManifest, format_float, reports_to_csv

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

_SUITE_CHOICES = ("core", "subordination", "kernel", "inequalities",
                  "counterexamples", "search", "all")


class _Client:
    """Minimal request wrapper: in-process ASGI by default, HTTP otherwise."""

    def __init__(self, server: str | None):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=600.0)
        else:
            from fastapi.testclient import TestClient

            from .service import app

            self._client = TestClient(app, raise_server_exceptions=False)

    def request(self, method: str, path: str, **kwargs) -> dict:
        resp = self._client.request(method, path, **kwargs)
        if resp.status_code == 422:
            raise click.UsageError(_detail(resp))
        if resp.status_code >= 400:
            body = _safe_json(resp)
            if isinstance(body, dict) and body.get("kind") == "numeric-failure":
                click.echo(f"numeric failure: {body.get('detail')}", err=True)
                sys.exit(EXIT_NUMERIC)
            click.echo(f"service error ({resp.status_code}): {_detail(resp)}", err=True)
            sys.exit(EXIT_NUMERIC)
        return resp.json()


def _safe_json(resp):
    try:
        return resp.json()
    except ValueError:
        return None


def _detail(resp) -> str:
    body = _safe_json(resp)
    if isinstance(body, dict) and "detail" in body:
        return str(body["detail"])
    return resp.text[:500]


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=not text.endswith("\n"))


def _csv(header: str, rows) -> str:
    lines = [header]
    for row in rows:
        lines.append(",".join(format_float(v) if isinstance(v, float) else str(v)
                              for v in row))
    return "\n".join(lines) + "\n"


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Base URL of a running service (default: run in process).")
@click.pass_context
def main(ctx, server):
    """Verification suites and computations on the Hamming cube."""
    ctx.obj = _Client(server)


@main.command()
@click.option("--suite", type=click.Choice(_SUITE_CHOICES), default="all",
              show_default=True)
@click.option("--n", type=int, default=None, help="Cube dimension.")
@click.option("--p", type=float, default=None, help="Lp exponent.")
@click.option("--gamma", type=float, default=None, help="Fractional power in (0, 1].")
@click.option("--t", type=float, default=None, help="Flow time.")
@click.option("--band", default=None, metavar="D1,D2,...",
              help="Comma separated degree band, e.g. 1,2.")
@click.option("--seed", type=int, default=None)
@click.option("--threads", type=int, default=None, envvar="CUBE_SPECTRAL_THREADS",
              help="Worker threads (env CUBE_SPECTRAL_THREADS; the flag wins).")
@click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
              show_default=True)
@click.pass_obj
def verify(client, suite, n, p, gamma, t, band, seed, threads, out, fmt):
    """Run a verification suite and report pass/fail per check."""
    body = {"suite": suite}
    for key, value in (("n", n), ("p", p), ("gamma", gamma), ("t", t),
                       ("seed", seed), ("threads", threads)):
        if value is not None:
            body[key] = value
    if band is not None:
        try:
            body["band"] = [int(b) for b in band.split(",") if b.strip()]
        except ValueError:
            raise click.UsageError(f"bad band {band!r}; expected integers like 1,2")
    result = client.request("POST", "/verify", json=body)

    manifest = RunManifest.from_dict({k: v for k, v in result.items()
                                      if k != "overall_pass"})
    if fmt == "csv":
        _emit(reports_to_csv(manifest.reports), out)
    else:
        _emit(manifest.to_json(), out)
    for r in manifest.reports:
        status = "PASS" if r.passed else "FAIL"
        click.echo(f"[{status}] {r.name}: measured={format_float(r.measured)} "
                   f"bound={format_float(r.bound)}", err=True)
    sys.exit(EXIT_OK if manifest.passed else EXIT_CHECK_FAILED)


@main.command()
@click.option("--gamma", type=float, required=True)
@click.option("--tau-min", type=float, default=0.01, show_default=True)
@click.option("--tau-max", type=float, default=100.0, show_default=True)
@click.option("--points", type=int, default=50, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="csv",
              show_default=True)
@click.pass_obj
def density(client, gamma, tau_min, tau_max, points, out, fmt):
    """Tabulate the one-sided stable density and its tail ratio."""
    result = client.request("GET", "/density", params={
        "gamma": gamma, "tau_min": tau_min, "tau_max": tau_max, "points": points})
    if fmt == "csv":
        _emit(_csv("tau,p_gamma,tail_ratio",
                   [(r["tau"], r["p_gamma"], r["tail_ratio"]) for r in result["rows"]]),
              out)
    else:
        _emit(json.dumps(result, indent=2), out)
    sys.exit(EXIT_OK)


@main.command()
@click.option("--gamma", type=float, required=True)
@click.option("--band", default="1,2", show_default=True, metavar="D1,D2,...")
@click.option("--n", type=int, default=12, show_default=True)
@click.option("--t", type=float, default=None,
              help="Flow time (default: the plan's full window t0).")
@click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
              show_default=True)
@click.pass_obj
def kernel(client, gamma, band, n, t, out, fmt):
    """Build the band-preserving kernel modification and check it."""
    try:
        band_list = [int(b) for b in band.split(",") if b.strip()]
    except ValueError:
        raise click.UsageError(f"bad band {band!r}; expected integers like 1,2")
    body = {"gamma": gamma, "band": band_list, "n": n}
    if t is not None:
        body["t"] = t
    result = client.request("POST", "/kernel", json=body)
    if fmt == "csv":
        _emit(_csv("gamma,kappa,t0,t,min_value,band_dev,l1_norm,bound,pass",
                   [(result["gamma"], result["kappa"], result["t0"], result["t"],
                     result["min_value"], result["band_dev"], result["l1_norm"],
                     result["bound"], result["pass"])]), out)
    else:
        _emit(json.dumps(result, indent=2), out)
    sys.exit(EXIT_OK if result["pass"] else EXIT_CHECK_FAILED)


@main.command()
@click.option("--which", type=click.Choice(["delta", "fractional", "gaussian"]),
              required=True)
@click.option("--n", type=int, default=2001, show_default=True)
@click.option("--t", type=float, default=1.0, show_default=True)
@click.option("--gamma", type=float, default=0.5, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
              show_default=True)
@click.pass_obj
def counterexample(client, which, n, t, gamma, out, fmt):
    """Evaluate one of the dimension-free spectral gap obstructions."""
    result = client.request("POST", "/counterexample", json={
        "which": which, "n": n, "t": t, "gamma": gamma})
    if fmt == "csv":
        _emit(_csv("n,t,gamma,value,bound",
                   [(r["n"], r["t"], r["gamma"], r["value"], r["bound"])
                    for r in result["rows"]]), out)
    else:
        _emit(json.dumps(result, indent=2), out)
    sys.exit(EXIT_OK)


@main.command()
@click.option("--n", type=int, default=4, show_default=True)
@click.option("--p", type=float, default=2.0, show_default=True)
@click.option("--gamma", type=float, default=1.0, show_default=True)
@click.option("--t", type=float, default=1.0, show_default=True)
@click.option("--iterations", type=int, default=300, show_default=True)
@click.option("--restarts", type=int, default=32, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--threads", type=int, default=None, envvar="CUBE_SPECTRAL_THREADS",
              help="Worker threads (env CUBE_SPECTRAL_THREADS; the flag wins).")
@click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
              show_default=True)
@click.pass_obj
def search(client, n, p, gamma, t, iterations, restarts, seed, threads, out, fmt):
    """Search for the worst-case Lp decay ratio of the fractional heat flow."""
    result = client.request("POST", "/search", json={
        "n": n, "p": p, "gamma": gamma, "t": t, "iterations": iterations,
        "restarts": restarts, "seed": seed, "threads": threads or 1})
    if fmt == "csv":
        _emit(_csv("p,gamma,t,n,ratio,rate,restarts",
                   [(result["p"], result["gamma"], result["t"], result["n"],
                     result["ratio"], result["rate"], result["restarts"])]), out)
    else:
        _emit(json.dumps(result, indent=2), out)
    sys.exit(EXIT_OK)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service under uvicorn."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
