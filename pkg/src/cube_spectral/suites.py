"""Named verification suites behind the service and CLI.

Each suite runs a bounded-time subset of its module's invariants and
returns structured reports; the manifest records parameters and seed so
a run can be reproduced byte for byte (timing fields aside).
"""

from __future__ import annotations

import math
import time

import numpy as np

from . import __version__
from .cube import (
    CubeFunction,
    apply_multiplier,
    dirichlet_form,
    expectation,
    fwht,
    gradient_sq,
    heat,
    ifwht,
    lp_norm,
    popcounts,
    Spectrum,
)
from .counterexamples import (
    almost1_bound,
    delta_pair,
    exact_heat_l1,
    fractional_l1_bound,
    gaussian_ou_flatness,
)
from .errors import CubeSpectralError, InvalidParameter
from .inequalities import (
    abp_gap,
    bonami_ratio,
    decay_rate,
    derivative_identity_check,
    heat_smoothing_l1,
    pth_dirichlet_functional,
    poincare_l1_functional,
    tilde_cp,
)
from .kernel import build_plan, group_convolve, modified_kernel, verify_modification
from .reports import RunManifest, VerificationReport
from .search import SearchConfig, constant_scan, worst_ratio_search
from .subordination import StableDensityEvaluator, verify_subordination

SUITES = ("core", "subordination", "kernel", "inequalities", "counterexamples", "search", "all")

_DEFAULTS = {
    "n": 10,
    "p": 2.0,
    "gamma": 0.5,
    "t": 1.0,
    "band": (1, 2),
    "seed": 7,
    "threads": 1,
}


def _params(overrides: dict | None) -> dict:
    params = dict(_DEFAULTS)
    for key, value in (overrides or {}).items():
        if value is not None:
            params[key] = value
    params["band"] = tuple(int(b) for b in params["band"])
    return params


def _report(name, params, measured, bound, tolerance, passed, extra=None):
    return VerificationReport(name=name, params=params, measured=float(measured),
                              bound=float(bound), tolerance=float(tolerance),
                              passed=bool(passed), extra=extra)


def random_band_function(n: int, degrees, rng: np.random.Generator) -> CubeFunction:
    """Rademacher coefficients on every mask of the given degrees."""
    degs = popcounts(n)
    coeffs = np.where(np.isin(degs, list(degrees)),
                      rng.choice([-1.0, 1.0], size=1 << n), 0.0)
    return ifwht(Spectrum(n, coeffs))


def suite_core(params: dict) -> list:
    n = min(int(params["n"]), 14)
    rng = np.random.default_rng(params["seed"])
    reports = []
    p = {"n": n, "seed": params["seed"]}

    worst_parseval = 0.0
    worst_round = 0.0
    for _ in range(100):
        f = CubeFunction(n, rng.standard_normal(1 << n))
        spec = fwht(f)
        lhs = float(np.mean(f.values**2))
        worst_parseval = max(worst_parseval, abs(float(np.sum(spec.coeffs**2)) - lhs) / lhs)
        worst_round = max(worst_round, float(np.max(np.abs(ifwht(spec).values - f.values))))
    reports.append(_report("parseval", p, worst_parseval, 1e-10, 1e-10,
                           worst_parseval <= 1e-10))
    reports.append(_report("fwht_round_trip", p, worst_round, 1e-12, 1e-12,
                           worst_round <= 1e-12))

    f = CubeFunction(n, rng.standard_normal(1 << n))
    gamma, t = params["gamma"], params["t"]
    twice = apply_multiplier(apply_multiplier(f, heat(t / 2, gamma)), heat(t / 2, gamma))
    once = apply_multiplier(f, heat(t, gamma))
    semigroup_err = float(np.max(np.abs(twice.values - once.values)))
    reports.append(_report("semigroup_law", {**p, "gamma": gamma, "t": t},
                           semigroup_err, 1e-10, 1e-10, semigroup_err <= 1e-10))

    worst_contract = -math.inf
    for q in (1.0, 2.0, math.inf):
        excess = lp_norm(once, q) - lp_norm(f, q)
        worst_contract = max(worst_contract, excess)
    reports.append(_report("heat_contraction", {**p, "gamma": gamma, "t": t},
                           worst_contract, 0.0, 1e-12, worst_contract <= 1e-12))

    var = float(np.mean((f.values - expectation(f)) ** 2))
    energy = expectation(gradient_sq(f))
    reports.append(_report("poincare_l2", p, var, energy, 1e-10, var <= energy + 1e-10))

    f0 = CubeFunction(n, f.values - expectation(f))
    lhs = lp_norm(apply_multiplier(f0, heat(t)), 2.0)
    rhs = math.exp(-t) * lp_norm(f0, 2.0)
    reports.append(_report("spectral_gap_l2", {**p, "t": t}, lhs, rhs, 1e-12,
                           lhs <= rhs + 1e-12))

    dirichlet_gap = abs(dirichlet_form(f, f)
                        - float(np.sum(fwht(f).coeffs**2 * fwht(f).degrees())))
    reports.append(_report("dirichlet_spectral_identity", p, dirichlet_gap, 1e-10,
                           1e-10, dirichlet_gap <= 1e-10))
    return reports


def suite_subordination(params: dict) -> list:
    gamma = params["gamma"]
    ev = StableDensityEvaluator(gamma)
    reports = [verify_subordination(ev, [0.0, 0.1, 1.0, 10.0, 50.0])]
    p = {"gamma": gamma}

    ratio_err = max(abs(ev.tail_ratio(tau) - 1.0) for tau in (1e3, 1e4, 1e5))
    reports.append(_report("tail_asymptotic", p, ratio_err, 0.02, 0.02, ratio_err <= 0.02))

    taus = np.geomspace(1e-2, 1e3, 40)
    min_density = min(ev.density(float(tau)) for tau in taus)
    reports.append(_report("density_nonnegative", p, min_density, -1e-9, 1e-9,
                           min_density >= -1e-9))

    reports.append(_report("r0_exceeds_10", p, ev.r0, 10.0, 0.0, ev.r0 > 10.0,
                           extra={"t0": ev.t0}))

    if abs(gamma - 0.5) < 1e-12:
        closed = lambda tau: tau**-1.5 * math.exp(-1.0 / (4.0 * tau)) / (2.0 * math.sqrt(math.pi))
        err = max(abs(ev.density(float(tau)) - closed(float(tau)))
                  for tau in np.geomspace(0.05, 100.0, 50))
        reports.append(_report("half_gamma_closed_form", p, err, 1e-7, 1e-7, err <= 1e-7))
        cross = abs(2.0 * math.sqrt(math.pi) - 1.0 / ev.tail_constant)
        reports.append(_report("half_gamma_tail_constant", p, cross, 1e-8, 1e-8,
                               cross <= 1e-8))
    return reports


def suite_kernel(params: dict) -> list:
    gamma = params["gamma"]
    band = params["band"]
    n = min(int(params["n"]), 12)
    plan = build_plan(gamma, band)
    reports = []
    for t in (plan.t0, plan.t0 / 2.0, plan.t0 / 4.0):
        reports.append(verify_modification(plan, n, t))

    rng = np.random.default_rng(params["seed"])
    f = random_band_function(n, band, rng)
    t = plan.t0 / 2.0
    via_kernel = group_convolve(modified_kernel(plan, n, t), f)
    via_heat = apply_multiplier(f, heat(t, gamma))
    dev = float(np.max(np.abs(via_kernel.values - via_heat.values)))
    reports.append(_report(
        "band_preserving_convolution",
        {"gamma": gamma, "band": list(band), "n": n, "t": t},
        dev, 1e-8, 1e-8, dev <= 1e-8))
    return reports


def suite_inequalities(params: dict) -> list:
    n = min(int(params["n"]), 10)
    seed = params["seed"]
    rng = np.random.default_rng(seed)
    reports = []

    cp2_err = abs(tilde_cp(2.0) - 1.0)
    reports.append(_report("tilde_cp_at_2", {}, cp2_err, 1e-9, 1e-9, cp2_err <= 1e-9))

    worst_gap = math.inf
    for p in np.geomspace(1.02, 64.0, 25):
        q = p / (p - 1.0)
        worst_gap = min(worst_gap, tilde_cp(float(p)) - 2.0 * min(1.0 / p, 1.0 / q))
    reports.append(_report("tilde_cp_lower_bound", {}, worst_gap, -1e-9, 1e-9,
                           worst_gap >= -1e-9))

    worst_abp = math.inf
    for _ in range(10_000):
        p = float(rng.uniform(1.01, 8.0))
        a, b = rng.standard_normal(2) * 3.0
        lhs, rhs = abp_gap(p, float(a), float(b))
        worst_abp = min(worst_abp, lhs - rhs)
    reports.append(_report("abp_gap", {"cases": 10_000, "seed": seed}, worst_abp,
                           -1e-12, 1e-12, worst_abp >= -1e-12))

    measured_mp = math.inf
    for p in (1.25, 1.5, 2.0, 3.0):
        for _ in range(50):
            v = rng.standard_normal(1 << n)
            f = CubeFunction(n, v - v.mean())
            lp_p = float(np.mean(np.abs(f.values) ** p))
            measured_mp = min(measured_mp, pth_dirichlet_functional(f, p) / lp_p)
    reports.append(_report("pth_dirichlet_positive", {"n": n, "seed": seed},
                           measured_mp, 0.0, 0.0, measured_mp > 0.0))

    gamma = params["gamma"]
    measured_b = math.inf
    for k in (1, 2, 3):
        for _ in range(30):
            f = random_band_function(n, range(1, k + 1), rng)
            rhs, l1, alpha_k = poincare_l1_functional(f, gamma)
            measured_b = min(measured_b, rhs / (alpha_k * l1))
    reports.append(_report("poincare_l1_positive", {"n": n, "gamma": gamma, "seed": seed},
                           measured_b, 0.0, 0.0, measured_b > 0.0))

    worst_bonami = -math.inf
    for _ in range(100):
        k = int(rng.integers(1, 5))
        f = random_band_function(n, range(1, k + 1), rng)
        ratio, k_measured = bonami_ratio(f)
        worst_bonami = max(worst_bonami, ratio - 3.0 ** (k_measured / 2.0))
    reports.append(_report("bonami", {"n": n, "cases": 100, "seed": seed},
                           worst_bonami, 1e-9, 1e-9, worst_bonami <= 1e-9))

    violations = 0
    for _ in range(50):
        k = int(rng.integers(1, 4))
        f = random_band_function(n, range(1, k + 1), rng)
        for factor in (3.0, 6.0):
            rep = heat_smoothing_l1(f, factor * k * math.log(3.0))
            if not rep.passed:
                violations += 1
    reports.append(_report("heat_smoothing", {"n": n, "cases": 100, "seed": seed},
                           violations, 0.0, 0.0, violations == 0))

    min_rate = math.inf
    for p in (1.5, 2.0, 4.0):
        v = rng.standard_normal(1 << n)
        _, rate = decay_rate(CubeFunction(n, v), p, gamma, [0.25, 1.0, 4.0])
        min_rate = min(min_rate, rate)
    f = random_band_function(n, (1, 2), rng)
    _, rate = decay_rate(f, 1.0, gamma, [0.25, 1.0, 4.0])
    min_rate = min(min_rate, rate)
    reports.append(_report("decay_rate_positive", {"n": n, "gamma": gamma, "seed": seed},
                           min_rate, 0.0, 0.0, min_rate > 0.0))

    worst_identity = 0.0
    done = 0
    attempt = 0
    while done < 10 and attempt < 200:
        attempt += 1
        v = rng.standard_normal(1 << min(n, 8))
        f = CubeFunction(min(n, 8), v)
        rep = derivative_identity_check(f, gamma, 0.7, 1e-4)
        if rep.extra["status"] == "inconclusive":
            continue
        done += 1
        worst_identity = max(worst_identity, rep.measured)
    reports.append(_report("derivative_identity", {"n": min(n, 8), "cases": done,
                                                   "gamma": gamma, "seed": seed},
                           worst_identity, 1e-6, 1e-6, worst_identity <= 1e-6))
    return reports


def suite_counterexamples(params: dict) -> list:
    reports = []
    n = min(int(params["n"]), 14)
    t = params["t"]

    brute = lp_norm(apply_multiplier(delta_pair(n), heat(t)), 1.0)
    closed = exact_heat_l1(n, t)
    rel = abs(brute - closed) / closed
    reports.append(_report("exact_heat_l1_vs_brute_force", {"n": n, "t": t},
                           rel, 1e-12, 1e-12, rel <= 1e-12))

    worst_margin = math.inf
    for n_odd in (51, 101, 201, 1001):
        for eps in (0.1, 0.3, 0.5):
            value = exact_heat_l1(n_odd, -math.log(eps))
            worst_margin = min(worst_margin, value - almost1_bound(n_odd, eps))
    reports.append(_report("almost1_lower_bound", {"n_grid": [51, 101, 201, 1001]},
                           worst_margin, 0.0, 0.0, worst_margin >= 0.0))

    values = [exact_heat_l1(201, tt) for tt in (0.1, 0.5, 1.0, 2.0, 5.0)]
    monotone = all(a >= b - 1e-15 for a, b in zip(values[:-1], values[1:]))
    reports.append(_report("exact_heat_l1_monotone_in_t", {"n": 201},
                           0.0 if monotone else 1.0, 0.0, 0.0, monotone))

    gamma = params["gamma"]
    ev = StableDensityEvaluator(gamma)
    small = fractional_l1_bound(1000, t, gamma, ev)
    large = fractional_l1_bound(2000, t, gamma, ev)
    reports.append(_report("fractional_bound_monotone_in_n",
                           {"gamma": gamma, "t": t}, small, large, 1e-9,
                           large >= small - 1e-9))

    first_variation, slope = gaussian_ou_flatness()
    reports.append(_report("gaussian_first_variation", {}, abs(first_variation),
                           1e-10, 1e-10, abs(first_variation) <= 1e-10))
    reports.append(_report("gaussian_defect_exponent", {}, slope, 1.9, 0.0,
                           slope >= 1.9))
    return reports


def suite_search(params: dict) -> list:
    seed = params["seed"]
    gamma, t = params["gamma"], params["t"]
    n = min(int(params["n"]), 6)
    threads = int(params["threads"])
    reports = []

    cfg = SearchConfig(n=n, p=2.0, gamma=gamma, t=t, seed=seed, restarts=8,
                       iterations=300, threads=threads)
    _, ratio = worst_ratio_search(cfg)
    err = abs(ratio - math.exp(-t))
    reports.append(_report("search_recovers_l2_gap", {"n": n, "t": t, "gamma": gamma,
                                                      "seed": seed},
                           err, 1e-6, 1e-6, err <= 1e-6))
    reports.append(_report("search_ratio_contractive", {"n": n}, ratio, 1.0,
                           1e-12, ratio <= 1.0 + 1e-12))

    scan = constant_scan([1.1, 1.5, 2.0], gamma, t, n, seed=seed, restarts=8,
                         iterations=300, threads=threads)
    trend_ok = all(scan[i][1] <= scan[i + 1][1] * 1.05 + 1e-12 for i in range(len(scan) - 1))
    reports.append(_report("rate_blowdown_trend", {"p_grid": [s[0] for s in scan]},
                           0.0 if trend_ok else 1.0, 0.0, 0.05, trend_ok,
                           extra={"rates": [s[1] for s in scan]}))
    return reports


_SUITE_FUNCS = {
    "core": suite_core,
    "subordination": suite_subordination,
    "kernel": suite_kernel,
    "inequalities": suite_inequalities,
    "counterexamples": suite_counterexamples,
    "search": suite_search,
}


def run_suite(suite: str, params: dict | None = None) -> RunManifest:
    """Execute one named suite (or "all") and wrap the results.

    Numeric failures inside a check become failing reports, never crashes.
    """
    if suite not in SUITES:
        raise InvalidParameter(f"unknown suite {suite!r}; choose from {SUITES}")
    merged = _params(params)
    names = [s for s in SUITES if s != "all"] if suite == "all" else [suite]
    start = time.perf_counter()
    reports = []
    for name in names:
        try:
            reports.extend(_SUITE_FUNCS[name](merged))
        except CubeSpectralError as exc:
            reports.append(_report(f"{name}_suite_error", {"error": str(exc)},
                                   math.nan, 0.0, 0.0, False))
    duration_ms = (time.perf_counter() - start) * 1000.0
    manifest_params = {k: (list(v) if isinstance(v, tuple) else v) for k, v in merged.items()}
    return RunManifest(command=f"verify --suite {suite}", params=manifest_params,
                       seed=int(merged["seed"]), version=__version__,
                       duration_ms=duration_ms, reports=reports)
