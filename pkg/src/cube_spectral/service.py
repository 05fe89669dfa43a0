"""HTTP service exposing the verification suites and core computations.

The CLI talks to this app in-process by default; `cube-spectral serve`
runs it under uvicorn for remote clients.
"""

from __future__ import annotations

import math
from typing import Literal

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

import numpy as np

from . import __version__
from .errors import InvalidInput, InvalidParameter, NumericFailure
from .kernel import build_plan, verify_modification
from .counterexamples import (
    almost1_bound,
    exact_heat_l1,
    fractional_l1_bound,
    gaussian_ou_flatness,
)
from .search import SearchConfig, worst_ratio_search
from .subordination import StableDensityEvaluator
from .suites import SUITES, run_suite

app = FastAPI(title="cube-spectral", version=__version__)


@app.exception_handler(InvalidParameter)
@app.exception_handler(InvalidInput)
async def _bad_request(request: Request, exc: Exception):
    return JSONResponse(status_code=422, content={"detail": str(exc), "kind": "invalid-input"})


@app.exception_handler(NumericFailure)
async def _numeric_failure(request: Request, exc: NumericFailure):
    return JSONResponse(status_code=500, content={
        "detail": str(exc), "kind": "numeric-failure",
        "achieved_error": exc.achieved_error,
    })


class HealthResponse(BaseModel):
    status: str
    version: str


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


class VerifyRequest(BaseModel):
    suite: Literal[SUITES] = "all"  # type: ignore[valid-type]
    n: int | None = Field(default=None, ge=1, le=24)
    p: float | None = Field(default=None, ge=1.0)
    gamma: float | None = Field(default=None, gt=0.0, le=1.0)
    t: float | None = Field(default=None, gt=0.0)
    band: list[int] | None = None
    seed: int | None = None
    threads: int | None = Field(default=None, ge=1)


class ReportModel(BaseModel):
    name: str
    params: dict
    measured: float
    bound: float
    tolerance: float
    passed: bool = Field(serialization_alias="pass")
    extra: dict | None = None


class ManifestModel(BaseModel):
    command: str
    params: dict
    seed: int
    version: str
    duration_ms: float
    reports: list[ReportModel]
    overall_pass: bool


@app.post("/verify", response_model=ManifestModel, response_model_by_alias=True)
def verify(req: VerifyRequest) -> ManifestModel:
    manifest = run_suite(req.suite, req.model_dump(exclude={"suite"}, exclude_none=True))
    return ManifestModel(
        command=manifest.command,
        params=manifest.params,
        seed=manifest.seed,
        version=manifest.version,
        duration_ms=manifest.duration_ms,
        reports=[ReportModel(**{**r.to_dict(), "passed": r.passed}) for r in manifest.reports],
        overall_pass=manifest.passed,
    )


class DensityRow(BaseModel):
    tau: float
    p_gamma: float
    tail_ratio: float


class DensityResponse(BaseModel):
    gamma: float
    rows: list[DensityRow]


@app.get("/density", response_model=DensityResponse)
def density(gamma: float, tau_min: float = 0.01, tau_max: float = 100.0,
            points: int = 50) -> DensityResponse:
    if not 0.0 < gamma < 1.0:
        raise InvalidParameter(f"gamma must be in (0, 1), got {gamma}")
    if not 0.0 < tau_min < tau_max or points < 2:
        raise InvalidParameter("need 0 < tau_min < tau_max and points >= 2")
    ev = StableDensityEvaluator(gamma)
    rows = []
    for tau in np.geomspace(tau_min, tau_max, points):
        p = ev.density(float(tau))
        ratio = float(tau) ** (1.0 + gamma) * p / ev.tail_constant
        rows.append(DensityRow(tau=float(tau), p_gamma=p, tail_ratio=ratio))
    return DensityResponse(gamma=gamma, rows=rows)


class KernelRequest(BaseModel):
    gamma: float = Field(gt=0.0, lt=1.0)
    band: list[int] = [1, 2]
    n: int = Field(default=12, ge=1, le=16)
    t: float | None = Field(default=None, gt=0.0)  # default: the full window t0


class KernelResponse(BaseModel):
    gamma: float
    band: list[int]
    kappa: float
    t0: float
    t: float
    min_value: float
    band_dev: float
    l1_norm: float
    bound: float
    passed: bool = Field(serialization_alias="pass")


@app.post("/kernel", response_model=KernelResponse, response_model_by_alias=True)
def kernel(req: KernelRequest) -> KernelResponse:
    plan = build_plan(req.gamma, req.band)
    t = req.t if req.t is not None else plan.t0
    report = verify_modification(plan, req.n, t)
    return KernelResponse(
        gamma=req.gamma, band=sorted(req.band), kappa=plan.kappa, t0=plan.t0, t=t,
        min_value=report.extra["min_value"], band_dev=report.extra["band_dev"],
        l1_norm=report.extra["l1_norm"], bound=report.bound, passed=report.passed,
    )


class CounterexampleRequest(BaseModel):
    which: Literal["delta", "fractional", "gaussian"]
    n: int = 2001
    t: float = 1.0
    gamma: float = Field(default=0.5, gt=0.0, lt=1.0)
    eps: float = Field(default=0.5, gt=0.0, le=0.5)


class CounterexampleRow(BaseModel):
    n: int
    t: float
    gamma: float
    value: float
    bound: float


class CounterexampleResponse(BaseModel):
    which: str
    rows: list[CounterexampleRow]


@app.post("/counterexample", response_model=CounterexampleResponse)
def counterexample(req: CounterexampleRequest) -> CounterexampleResponse:
    rows = []
    if req.which == "delta":
        n = req.n if req.n % 2 == 1 else req.n + 1  # the proved bound needs odd n
        eps = min(math.exp(-req.t), 0.5)
        rows.append(CounterexampleRow(n=n, t=req.t, gamma=1.0,
                                      value=exact_heat_l1(n, req.t),
                                      bound=almost1_bound(n, eps)))
    elif req.which == "fractional":
        value = fractional_l1_bound(req.n, req.t, req.gamma)
        rows.append(CounterexampleRow(n=req.n, t=req.t, gamma=req.gamma,
                                      value=value, bound=0.5))
    else:
        first_variation, slope = gaussian_ou_flatness()
        rows.append(CounterexampleRow(n=0, t=0.0, gamma=1.0,
                                      value=abs(first_variation), bound=1e-10))
        rows.append(CounterexampleRow(n=0, t=0.0, gamma=1.0, value=slope, bound=1.9))
    return CounterexampleResponse(which=req.which, rows=rows)


class SearchRequest(BaseModel):
    n: int = Field(default=4, ge=1, le=12)
    p: float = Field(default=2.0, ge=1.0)
    gamma: float = Field(default=1.0, gt=0.0, le=1.0)
    t: float = Field(default=1.0, gt=0.0)
    iterations: int = Field(default=300, ge=1)
    restarts: int = Field(default=32, ge=1)
    seed: int = 0
    threads: int = Field(default=1, ge=1)


class SearchResponse(BaseModel):
    p: float
    gamma: float
    t: float
    n: int
    ratio: float
    rate: float
    restarts: int


@app.post("/search", response_model=SearchResponse)
def search(req: SearchRequest) -> SearchResponse:
    cfg = SearchConfig(n=req.n, p=req.p, gamma=req.gamma, t=req.t,
                       iterations=req.iterations, restarts=req.restarts,
                       seed=req.seed, threads=req.threads)
    _, ratio = worst_ratio_search(cfg)
    return SearchResponse(p=req.p, gamma=req.gamma, t=req.t, n=req.n, ratio=ratio,
                          rate=-math.log(max(ratio, 1e-300)) / req.t,
                          restarts=req.restarts)
