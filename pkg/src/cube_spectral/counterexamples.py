"""The three obstructions to a dimension-free L1 spectral gap:
the two-point mass on the cube (exact binomial sums, any n), its
fractional-time version, and the Gaussian cubic with a flat L1 decay.

Large-n binomial sums are evaluated with exact integer binomials and
50+ digit floating powers; the k near n/2 terms cancel catastrophically
in double precision.
"""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np
from scipy.integrate import quad
from scipy.special import roots_genlaguerre

from .cube import CubeFunction
from .errors import InvalidParameter
from .subordination import StableDensityEvaluator, TAIL_SWITCH, _density_series

_WORKING_DPS = 60
MAX_MATERIALIZED_N = 20
MAX_SUM_N = 10_000


def delta_pair(n: int) -> CubeFunction:
    """Mass 2^(n-1) at the all-plus point, -2^(n-1) at the all-minus point.

    Mean zero and unit L1 norm for every n.
    """
    if not 1 <= n <= MAX_MATERIALIZED_N:
        raise InvalidParameter(f"n must be in [1, {MAX_MATERIALIZED_N}], got {n}")
    values = np.zeros(1 << n)
    values[0] = 2.0 ** (n - 1)
    values[(1 << n) - 1] = -(2.0 ** (n - 1))
    return CubeFunction(n, values)


def _binomial_sum(n: int, eps: mp.mpf) -> mp.mpf:
    """2^-n * sum_{0<=k<=n/2} C(n,k) [(1+e)^(n-k)(1-e)^k - (1-e)^(n-k)(1+e)^k]."""
    a = 1 + eps
    b = 1 - eps
    # iterative power tables keep this O(n) multiplications
    pa = [mp.mpf(1)]
    pb = [mp.mpf(1)]
    for _ in range(n):
        pa.append(pa[-1] * a)
        pb.append(pb[-1] * b)
    total = mp.mpf(0)
    for k in range(n // 2 + 1):
        if 2 * k == n:
            continue  # the symmetric term vanishes identically
        total += mp.mpf(math.comb(n, k)) * (pa[n - k] * pb[k] - pb[n - k] * pa[k])
    return total / mp.mpf(2) ** n


def exact_heat_l1_eps(n: int, eps: float) -> float:
    """The closed-form L1 norm as a function of the mode damping factor eps."""
    if not 1 <= n <= MAX_SUM_N:
        raise InvalidParameter(f"n must be in [1, {MAX_SUM_N}], got {n}")
    if not 0.0 <= eps <= 1.0:
        raise InvalidParameter(f"eps must be in [0, 1], got {eps}")
    with mp.workdps(_WORKING_DPS):
        return float(_binomial_sum(n, mp.mpf(eps)))


def exact_heat_l1(n: int, t: float) -> float:
    """||e^{t Laplacian} delta_pair(n)||_1 by the closed-form binomial sum."""
    if t <= 0:
        raise InvalidParameter(f"t must be positive, got {t}")
    with mp.workdps(_WORKING_DPS):
        return float(_binomial_sum(n, mp.e ** (-mp.mpf(t))))


def almost1_bound(n: int, eps: float, allow_even: bool = False) -> float:
    """Lower bound (1 - (1-eps^2)^(n/2))/2 for the binomial sum.

    Proved for odd n; even n is a heuristic variant (the symmetric
    middle term is dropped from both sides) and must be opted into.
    """
    if not 0.0 < eps <= 0.5:
        raise InvalidParameter(f"eps must be in (0, 1/2], got {eps}")
    if n % 2 == 0 and not allow_even:
        raise InvalidParameter("bound is proved for odd n; pass allow_even=True to override")
    return 0.5 * (1.0 - (1.0 - eps**2) ** (n / 2.0))


def _integrate_against_density(ev: StableDensityEvaluator, g, tau_end: float,
                               breakpoints) -> float:
    """int_0^tau_end g(tau) p_gamma(tau) dtau with interior breakpoints."""
    pts = [b for b in breakpoints if 0.0 < b < min(tau_end, TAIL_SWITCH)]
    val, _ = quad(lambda tau: g(tau) * ev.density(tau), 0.0, min(tau_end, TAIL_SWITCH),
                  epsabs=1e-8, epsrel=1e-8, limit=400, points=pts or None)
    if tau_end > TAIL_SWITCH:
        tail, _ = quad(lambda tau: g(tau) * _density_series(ev.gamma, tau, ev._series),
                       TAIL_SWITCH, tau_end, epsabs=1e-9, limit=200)
        val += tail
    return val


def fractional_l1_bound(n: int, t: float, gamma: float,
                        ev: StableDensityEvaluator | None = None) -> float:
    """(1/2) int_0^inf (1 - (1 - e^{-2 tau t^{1/gamma}})^{n/2}) p_gamma(tau) dtau."""
    if n < 1 or t <= 0:
        raise InvalidParameter("need n >= 1 and t > 0")
    if ev is None:
        ev = StableDensityEvaluator(gamma)
    rate = t ** (1.0 / gamma)

    def g(tau):
        # 1 - (1 - e^{-2 tau rate})^{n/2}, stable for huge n
        log_base = math.log1p(-math.exp(-2.0 * tau * rate)) if tau * rate > 1e-12 else -1e30
        return -math.expm1(0.5 * n * log_base)

    transition = math.log(max(n, 2)) / (2.0 * rate)
    tau_end = (math.log(max(n, 2)) + 40.0) / (2.0 * rate)
    return 0.5 * _integrate_against_density(
        ev, g, tau_end, [transition / 10.0, transition, 4.0 * transition])


def fractional_exact_l1(n: int, t: float, gamma: float,
                        ev: StableDensityEvaluator | None = None) -> float:
    """||e^{t L_gamma} delta_pair(n)||_1: the binomial sum integrated
    against the subordination density (practical for moderate n)."""
    if not 1 <= n <= 512:
        raise InvalidParameter(f"n must be in [1, 512] for the exact integral, got {n}")
    if ev is None:
        ev = StableDensityEvaluator(gamma)
    rate = t ** (1.0 / gamma)

    def g(tau):
        return exact_heat_l1_eps(n, math.exp(-tau * rate))

    transition = math.log(max(n, 2)) / (2.0 * rate)
    tau_end = (math.log(max(n, 2)) + 40.0) / (2.0 * rate)
    return _integrate_against_density(
        ev, g, tau_end, [transition / 10.0, transition, 4.0 * transition])


# ---------------------------------------------------------------------
# Gaussian Ornstein-Uhlenbeck counterexample


def _he(k: int, x: np.ndarray) -> np.ndarray:
    """Probabilists' Hermite polynomial He_k."""
    return np.polynomial.hermite_e.hermeval(x, [0.0] * k + [1.0])


class GaussianPolynomial:
    """Polynomial in the probabilists' Hermite basis under the weight
    exp(-x^2/2)/sqrt(2 pi); the OU generator acts as He_k -> -k He_k."""

    MAX_DEGREE = 16

    def __init__(self, hermite_coeffs):
        coeffs = np.asarray(hermite_coeffs, dtype=float)
        if coeffs.ndim != 1 or coeffs.size - 1 > self.MAX_DEGREE:
            raise InvalidParameter(f"degree must be <= {self.MAX_DEGREE}")
        self.hermite_coeffs = coeffs

    def __call__(self, x):
        return np.polynomial.hermite_e.hermeval(np.asarray(x, dtype=float),
                                                self.hermite_coeffs)

    def ou_flow(self, t: float) -> "GaussianPolynomial":
        """e^{t OU} acts diagonally: He_k coefficient scales by e^{-kt}."""
        k = np.arange(self.hermite_coeffs.size)
        return GaussianPolynomial(self.hermite_coeffs * np.exp(-k * t))

    def l1_norm(self) -> float:
        """E|f| under the standard Gaussian, splitting at the real roots."""
        mono = np.polynomial.hermite_e.herme2poly(self.hermite_coeffs)
        roots = np.roots(mono[::-1])
        real = sorted(float(r.real) for r in roots
                      if abs(r.imag) < 1e-10 and abs(r.real) < 12.0)
        cuts = [-np.inf] + real + [np.inf]
        weight = 1.0 / math.sqrt(2.0 * math.pi)
        total = 0.0
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            if hi - lo < 1e-14:
                continue
            seg, _ = quad(lambda x: abs(float(self(x))) * math.exp(-x * x / 2.0),
                          lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)
            total += seg
        return weight * total


def gaussian_ou_flatness() -> tuple:
    """Flatness of t -> ||e^{t OU} x^3||_1 at t = 0.

    Returns (first_variation, defect_exponent): the first variation
    integral int (-OU f) sgn(f) e^{-x^2/2} dx (zero analytically) via
    half-line Gauss-Laguerre, and the log-log slope of
    1 - ||e^{t OU} f||_1 / ||f||_1 over t in [1e-3, 1e-1].
    """
    # f = x^3 = He_3 + 3 He_1; -OU f = 3x^3 - 6x, odd, so sgn splits at 0
    nodes, weights = roots_genlaguerre(48, 0.0)

    def odd_part(u):
        # substitution u = x^2/2 turns int_0^inf h(x) e^{-x^2/2} dx with
        # odd h(x) = x*g(x^2) into int_0^inf g(2u) e^{-u} du
        x_sq = 2.0 * u
        return 3.0 * x_sq - 6.0

    first_variation = 2.0 * float(np.sum(weights * odd_part(nodes)))

    f = GaussianPolynomial([0.0, 3.0, 0.0, 1.0])  # 3 He_1 + He_3 = x^3
    base = f.l1_norm()
    ts = np.geomspace(1e-3, 1e-1, 9)
    defects = np.array([1.0 - f.ou_flow(float(t)).l1_norm() / base for t in ts])
    slope = float(np.polyfit(np.log(ts), np.log(defects), 1)[0])
    return first_variation, slope
