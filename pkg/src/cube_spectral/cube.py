"""Functions on the Hamming cube {-1,1}^n and their Walsh-Fourier calculus.

Point encoding: index m of the value array encodes the point x with
x_j = +1 if bit j of m is 0 and x_j = -1 if bit j of m is 1.  A subset
S of coordinates is encoded as the bitmask s with bit j set iff j+1 is
in S; the Walsh character x^S evaluated at point m is
(-1)**popcount(s & m).

All expectations are with respect to the uniform measure (divide by 2^n).
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InvalidInput, InvalidParameter

MAX_DIMENSION = 24  # 2^24 doubles = 128 MB, hard cap on materialized functions

_MAGIC = b"CUBE"
_FORMAT_VERSION = 1


def _check_dimension(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1 or n > MAX_DIMENSION:
        raise InvalidInput(f"dimension must be an integer in [1, {MAX_DIMENSION}], got {n!r}")


def _check_values(n: int, values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size != 1 << n:
        raise InvalidInput(f"expected {1 << n} values for n={n}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput("values must be finite")
    return arr


@lru_cache(maxsize=32)
def popcounts(n: int) -> np.ndarray:
    """Popcount of every mask in [0, 2^n), as an int array (cached)."""
    masks = np.arange(1 << n, dtype=np.uint32)
    counts = np.zeros(1 << n, dtype=np.int64)
    for j in range(n):
        counts += (masks >> j) & 1
    counts.flags.writeable = False
    return counts


@dataclass(frozen=True)
class CubeFunction:
    """Real-valued function on {-1,1}^n stored pointwise, indexed by bitmask."""

    n: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_dimension(self.n)
        arr = _check_values(self.n, self.values)
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    # -- serialization -------------------------------------------------

    def to_bytes(self) -> bytes:
        header = _MAGIC + struct.pack("<II", _FORMAT_VERSION, self.n)
        return header + self.values.astype("<f8").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "CubeFunction":
        n = _parse_binary_header(data)
        values = np.frombuffer(data, dtype="<f8", offset=12)
        return cls(n, values)

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "values": self.values.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "CubeFunction":
        obj = json.loads(text)
        return cls(obj["n"], obj["values"])


@dataclass(frozen=True)
class Spectrum:
    """Walsh-Fourier coefficients a_S indexed by subset bitmask."""

    n: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_dimension(self.n)
        arr = _check_values(self.n, self.coeffs)
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "coeffs", arr)

    def degrees(self) -> np.ndarray:
        """Degree |S| of every mask."""
        return popcounts(self.n)

    def max_degree(self, tol: float = 1e-12) -> int:
        """Largest degree carrying a coefficient above tol in absolute value."""
        live = np.abs(self.coeffs) > tol
        if not live.any():
            return 0
        return int(self.degrees()[live].max())

    # -- serialization -------------------------------------------------

    def to_bytes(self) -> bytes:
        header = _MAGIC + struct.pack("<II", _FORMAT_VERSION, self.n)
        return header + self.coeffs.astype("<f8").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "Spectrum":
        n = _parse_binary_header(data)
        coeffs = np.frombuffer(data, dtype="<f8", offset=12)
        return cls(n, coeffs)

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "coeffs": self.coeffs.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "Spectrum":
        obj = json.loads(text)
        return cls(obj["n"], obj["coeffs"])


def _parse_binary_header(data: bytes) -> int:
    if len(data) < 12 or data[:4] != _MAGIC:
        raise InvalidInput("bad magic in binary header")
    version, n = struct.unpack("<II", data[4:12])
    if version != _FORMAT_VERSION:
        raise InvalidInput(f"unsupported format version {version}")
    if len(data) != 12 + 8 * (1 << n):
        raise InvalidInput("payload length does not match dimension")
    return n


@dataclass(frozen=True)
class DegreeMultiplier:
    """Spectral multiplier that depends on the degree |S| only.

    kind is one of "laplacian", "fractional", "heat", "degree_projection".
    """

    kind: str
    gamma: float = 1.0
    t: float = 0.0
    degrees: frozenset = frozenset()

    def __post_init__(self):
        if self.kind not in ("laplacian", "fractional", "heat", "degree_projection"):
            raise InvalidParameter(f"unknown multiplier kind {self.kind!r}")
        if self.kind in ("fractional", "heat") and not 0.0 < self.gamma <= 1.0:
            raise InvalidParameter(f"gamma must be in (0, 1], got {self.gamma}")
        if self.kind == "heat" and self.t < 0.0:
            raise InvalidParameter(f"heat time must be >= 0, got {self.t}")

    def factors(self, n: int) -> np.ndarray:
        """Multiplier value at each degree d in {0, ..., n}."""
        d = np.arange(n + 1, dtype=np.float64)
        if self.kind == "laplacian":
            return -d
        if self.kind == "fractional":
            return -(d**self.gamma)
        if self.kind == "heat":
            return np.exp(-self.t * d**self.gamma)
        return np.isin(np.arange(n + 1), sorted(self.degrees)).astype(np.float64)


def laplacian() -> DegreeMultiplier:
    return DegreeMultiplier("laplacian")


def fractional(gamma: float) -> DegreeMultiplier:
    return DegreeMultiplier("fractional", gamma=gamma)


def heat(t: float, gamma: float = 1.0) -> DegreeMultiplier:
    return DegreeMultiplier("heat", gamma=gamma, t=t)


def degree_projection(degrees) -> DegreeMultiplier:
    return DegreeMultiplier("degree_projection", degrees=frozenset(int(d) for d in degrees))


# ---------------------------------------------------------------------
# transforms


def _butterfly(values: np.ndarray) -> np.ndarray:
    """In-place radix-2 Walsh-Hadamard butterfly (unnormalized)."""
    out = values.astype(np.float64, copy=True)
    size = out.size
    h = 1
    while h < size:
        block = out.reshape(-1, 2 * h)
        top = block[:, :h].copy()
        block[:, :h] = top + block[:, h:]
        block[:, h:] = top - block[:, h:]
        h *= 2
    return out


def fwht(f: CubeFunction) -> Spectrum:
    """Walsh-Fourier transform: coefficients a_S = E(f x^S), O(n 2^n)."""
    coeffs = _butterfly(f.values) / f.values.size
    return Spectrum(f.n, coeffs)


def ifwht(a: Spectrum) -> CubeFunction:
    """Inverse transform: synthesize f = sum_S a_S x^S from its spectrum."""
    return CubeFunction(a.n, _butterfly(a.coeffs))


def expectation(f: CubeFunction) -> float:
    """Mean of f under the uniform measure."""
    return float(np.mean(f.values))


def lp_norm(f: CubeFunction, p: float) -> float:
    """(E|f|^p)^(1/p) for p >= 1; max |f| for p = inf."""
    if p == math.inf:
        return float(np.max(np.abs(f.values)))
    if p < 1:
        raise InvalidParameter(f"p must be >= 1 or inf, got {p}")
    return float(np.mean(np.abs(f.values) ** p) ** (1.0 / p))


def partial_gradient(f: CubeFunction, j: int) -> CubeFunction:
    """Half-difference along coordinate j (1-based); output independent of x_j."""
    if not 1 <= j <= f.n:
        raise InvalidInput(f"coordinate j must be in [1, {f.n}], got {j}")
    bit = 1 << (j - 1)
    masks = np.arange(f.values.size)
    plus = np.where(masks & bit == 0, f.values, f.values[masks ^ bit])
    minus = np.where(masks & bit != 0, f.values, f.values[masks ^ bit])
    return CubeFunction(f.n, (plus - minus) / 2.0)


def gradient_sq(f: CubeFunction) -> CubeFunction:
    """Pointwise squared gradient length sum_j (grad_j f)^2."""
    total = np.zeros_like(f.values)
    for j in range(1, f.n + 1):
        total += partial_gradient(f, j).values ** 2
    return CubeFunction(f.n, total)


def apply_multiplier(f: CubeFunction, m: DegreeMultiplier) -> CubeFunction:
    """Apply a degree multiplier spectrally: transform, scale, synthesize."""
    spec = fwht(f)
    scaled = spec.coeffs * m.factors(f.n)[popcounts(f.n)]
    return ifwht(Spectrum(f.n, scaled))


def apply_multiplier_spectrum(a: Spectrum, m: DegreeMultiplier) -> Spectrum:
    """Multiplier action directly on a spectrum."""
    return Spectrum(a.n, a.coeffs * m.factors(a.n)[popcounts(a.n)])


def dirichlet_form(f: CubeFunction, g: CubeFunction) -> float:
    """E sum_j grad_j f * grad_j g; equals -E(f * Laplacian g)."""
    if f.n != g.n:
        raise InvalidInput(f"dimension mismatch: {f.n} vs {g.n}")
    total = 0.0
    for j in range(1, f.n + 1):
        total += float(np.mean(partial_gradient(f, j).values * partial_gradient(g, j).values))
    return total
