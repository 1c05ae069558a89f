"""Diagonal reproducing kernels on the unit disk.

A diagonal kernel is K(z, w) = sum_k a_k z^k conj(w)^k with a_k > 0, truncated
at order N.  In the orthonormal basis e_k(z) = sqrt(a_k) z^k the point
evaluation section is t(w) = (sqrt(a_k) w^k)_k, so ||t(w)||^2 = K(w, w).

Besides plain evaluation this module provides the boundary diagnostics used
to decide when two kernels admit no nonzero intertwiner (the diagonal ratio
K0(r,r)/K1(r,r) as r -> 1) and the construction of a "separator" kernel whose
diagonal grows strictly slower than two given kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvalidArgumentError, PrecisionError

TAIL_EPS = 1e-12


@dataclass(frozen=True)
class DiagonalKernel:
    """Truncated diagonal kernel: coefficients (a_0, ..., a_{N-1}), all > 0."""

    coefficients: np.ndarray
    label: str = ""

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=float)
        if coeffs.ndim != 1 or coeffs.size < 1:
            raise InvalidArgumentError("kernel needs at least one coefficient")
        if not np.all(coeffs > 0.0):
            raise InvalidArgumentError("kernel coefficients must be strictly positive")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def truncation(self) -> int:
        return self.coefficients.size

    def with_truncation(self, n: int) -> "DiagonalKernel":
        """Shrink to the first n coefficients (extension is not defined here)."""
        if n < 1 or n > self.truncation:
            raise InvalidArgumentError(f"cannot truncate to {n} from {self.truncation}")
        return DiagonalKernel(self.coefficients[:n], self.label)


@dataclass(frozen=True)
class SectionVector:
    """Point-evaluation section t(w): coordinate k is sqrt(a_k) w^k."""

    point: complex
    coordinates: np.ndarray = field(repr=False)

    @property
    def norm_squared(self) -> float:
        return float(np.vdot(self.coordinates, self.coordinates).real)


def bergman_kernel(n: int, truncation: int) -> DiagonalKernel:
    """Weighted Bergman kernel (1 - z conj(w))^(-n) truncated at `truncation`.

    Coefficient a_k = binomial(n+k-1, k), built by the multiplicative
    recurrence a_{k+1} = a_k (n+k)/(k+1) to avoid factorial overflow.
    """
    if n < 1:
        raise InvalidArgumentError("bergman weight n must be >= 1")
    if truncation < 1:
        raise InvalidArgumentError("truncation must be >= 1")
    coeffs = np.empty(truncation)
    coeffs[0] = 1.0
    for k in range(truncation - 1):
        coeffs[k + 1] = coeffs[k] * (n + k) / (k + 1)
    return DiagonalKernel(coeffs, label=f"bergman({n})")


def _check_disk(point: complex, name: str) -> complex:
    point = complex(point)
    if abs(point) >= 1.0:
        raise DomainError(f"{name}={point} is not strictly inside the unit disk")
    return point


def evaluate_kernel(kernel: DiagonalKernel, z: complex, w: complex) -> complex:
    """Truncated series value sum_k a_k z^k conj(w)^k, |z| < 1 and |w| < 1."""
    z = _check_disk(z, "z")
    w = _check_disk(w, "w")
    x = z * np.conj(w)
    # Horner evaluation of the ascending-coefficient polynomial in x.
    acc = 0.0 + 0.0j
    for a in kernel.coefficients[::-1]:
        acc = acc * x + a
    return complex(acc)


def section_vector(kernel: DiagonalKernel, w: complex) -> SectionVector:
    """Section t(w) in the orthonormal basis; ||t(w)||^2 = K(w, w)."""
    w = _check_disk(w, "w")
    powers = np.power(w, np.arange(kernel.truncation))
    return SectionVector(point=w, coordinates=np.sqrt(kernel.coefficients) * powers)


def required_truncation(radius: float, eps: float = TAIL_EPS) -> int:
    """Smallest N with radius^(2N) < eps (geometric tail criterion)."""
    if not 0.0 <= radius < 1.0:
        raise InvalidArgumentError("radius must lie in [0, 1)")
    if radius == 0.0:
        return 1
    return max(1, math.ceil(math.log(eps) / (2.0 * math.log(radius))))


@dataclass(frozen=True)
class RatioSample:
    radius: float
    k0: float
    k1: float
    ratio: float


def diagonal_ratio(k0: DiagonalKernel, k1: DiagonalKernel,
                   radii: list[float]) -> list[RatioSample]:
    """Boundary diagnostic K0(r,r)/K1(r,r) along strictly increasing radii.

    Truncation sufficiency is checked against the largest radius: the tail
    criterion r^(2N) < 1e-12 must hold for both kernels, otherwise a
    PrecisionError names the truncation that would suffice.
    """
    radii = [float(r) for r in radii]
    if not radii:
        raise InvalidArgumentError("radii must be nonempty")
    if any(r < 0.0 or r >= 1.0 for r in radii):
        raise InvalidArgumentError("radii must lie in [0, 1)")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise InvalidArgumentError("radii must be strictly increasing")
    r_max = radii[-1]
    needed = required_truncation(r_max)
    short = min(k0.truncation, k1.truncation)
    if short < needed:
        raise PrecisionError(
            f"truncation {short} insufficient for radius {r_max}; need N >= {needed}",
            required_truncation=needed,
        )
    out = []
    for r in radii:
        v0 = evaluate_kernel(k0, r, r).real
        v1 = evaluate_kernel(k1, r, r).real
        out.append(RatioSample(radius=r, k0=v0, k1=v1, ratio=v0 / v1))
    return out


def separator_kernel(k0: DiagonalKernel, k1: DiagonalKernel) -> DiagonalKernel:
    """Kernel with s_n = min(a_n, b_n)/(n+1), so s_n/a_n -> 0 and s_n/b_n -> 0.

    Both inputs must share one truncation; the harmonic damping keeps the
    coefficients positive while forcing the boundary ratios to vanish.
    """
    if k0.truncation != k1.truncation:
        raise InvalidArgumentError(
            f"mismatched truncations {k0.truncation} != {k1.truncation}")
    n = np.arange(k0.truncation)
    coeffs = np.minimum(k0.coefficients, k1.coefficients) / (n + 1)
    return DiagonalKernel(coeffs, label=f"separator[{k0.label},{k1.label}]")


def kernel_from_spec(spec: dict) -> DiagonalKernel:
    """Build a kernel from its JSON form.

    Accepted shapes: {"preset": "bergman", "n": 2, "N": 200} or
    {"coeffs": [1.0, 2.0, ...]}, optionally with a "label".
    """
    if "preset" in spec:
        if spec["preset"] != "bergman":
            raise InvalidArgumentError(f"unknown kernel preset {spec['preset']!r}")
        return bergman_kernel(int(spec["n"]), int(spec["N"]))
    if "coeffs" in spec:
        return DiagonalKernel(np.asarray(spec["coeffs"], dtype=float),
                              label=str(spec.get("label", "custom")))
    raise InvalidArgumentError("kernel spec needs either 'preset' or 'coeffs'")
