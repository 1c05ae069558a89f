"""Dense complex matrix models: shifts, block assembly, intertwiners, Mobius maps.

All operators live on a truncated space C^N.  The adjoint multiplication
operator of a diagonal kernel is the weighted backward shift with
superdiagonal sqrt(a_k/a_{k+1}); two of those plus a coupling X assemble into
the 2N x 2N upper-triangular block matrix

    T = [[T0, X T1 - T0 X], [0, T1]].

Residuals are Frobenius norms throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, NumericError, SingularResolventError
from .kernels import DiagonalKernel

SYLVESTER_TOL = 1e-10
RESOLVENT_COND_CAP = 1e12


def frobenius(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def ensure_finite(a: np.ndarray, context: str = "matrix") -> np.ndarray:
    if not (np.all(np.isfinite(a.real)) and np.all(np.isfinite(a.imag))):
        raise NumericError(f"{context} contains NaN or Inf entries")
    return a


def _as_square(a: np.ndarray, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgumentError(f"{name} must be a square matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class ModelOperator:
    """N x N matrix model of a rank-one-kernel operator.

    `kernel` is set when the operator was built from a diagonal kernel, which
    is what makes eigenframes and series metrics available downstream;
    `source` keeps a printable label either way.
    """

    matrix: np.ndarray = field(repr=False)
    source: str = ""
    kernel: DiagonalKernel | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "matrix", _as_square(self.matrix, "model operator"))

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class UpperTriangularModel:
    """Blocks (T0, T1, X) together with the assembled 2N x 2N matrix T."""

    t0: ModelOperator
    t1: ModelOperator
    x: np.ndarray = field(repr=False)
    t: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.t0.size

    @property
    def coupling_block(self) -> np.ndarray:
        """The (0,1) block X T1 - T0 X."""
        n = self.size
        return self.t[:n, n:]


@dataclass(frozen=True)
class IntertwinerSpace:
    """Orthonormal (Frobenius) basis of {X : A X = X B} and its worst residual."""

    basis: list[np.ndarray]
    residual: float

    @property
    def dimension(self) -> int:
        return len(self.basis)


def shift_from_kernel(kernel: DiagonalKernel) -> ModelOperator:
    """Weighted backward shift: entry (k, k+1) = sqrt(a_k / a_{k+1})."""
    n = kernel.truncation
    if n < 2:
        raise InvalidArgumentError("shift needs truncation >= 2")
    a = kernel.coefficients
    mat = np.zeros((n, n), dtype=complex)
    mat[np.arange(n - 1), np.arange(1, n)] = np.sqrt(a[:-1] / a[1:])
    return ModelOperator(mat, source=kernel.label, kernel=kernel)


def assemble_model(t0: ModelOperator | np.ndarray, t1: ModelOperator | np.ndarray,
                   x: np.ndarray) -> UpperTriangularModel:
    """Assemble T = [[T0, X T1 - T0 X], [0, T1]] from equal-size square blocks."""
    if not isinstance(t0, ModelOperator):
        t0 = ModelOperator(t0)
    if not isinstance(t1, ModelOperator):
        t1 = ModelOperator(t1)
    x = _as_square(x, "X")
    if not (t0.size == t1.size == x.shape[0]):
        raise InvalidArgumentError(
            f"block sizes differ: {t0.size}, {t1.size}, {x.shape[0]}")
    a, b = t0.matrix, t1.matrix
    top_right = x @ b - a @ x
    t = np.block([[a, top_right], [np.zeros_like(a), b]])
    return UpperTriangularModel(t0=t0, t1=t1, x=x, t=t)


def fb2_membership(t0: ModelOperator, t1: ModelOperator, x: np.ndarray,
                   tol: float) -> tuple[bool, float]:
    """Decide whether X T1^2 - 2 T0 X T1 + T0^2 X vanishes, scale-invariantly.

    Returns (verdict, residual).  The verdict compares the raw residual against
    tol * (1 + ||X|| ||T1||^2 + ||T0||^2 ||X||) so rescaling the triple does not
    flip it.
    """
    if tol <= 0:
        raise InvalidArgumentError("tol must be positive")
    a, b = t0.matrix, t1.matrix
    expr = x @ b @ b - 2.0 * (a @ x @ b) + a @ a @ x
    residual = frobenius(expr)
    scale = 1.0 + frobenius(x) * frobenius(b) ** 2 + frobenius(a) ** 2 * frobenius(x)
    return residual <= tol * scale, residual


def sylvester_kernel(a: np.ndarray, b: np.ndarray,
                     tol: float = SYLVESTER_TOL) -> IntertwinerSpace:
    """Numerical null space of X -> A X - X B by SVD thresholding.

    Singular values <= tol * sigma_max count as zero.  The returned basis is
    orthonormal in the Frobenius inner product; an empty basis means the only
    intertwiner is zero.
    """
    a = _as_square(a, "A")
    b = _as_square(b, "B")
    m, n = a.shape[0], b.shape[0]
    # Column-major vec: vec(AX - XB) = (I (x) A - B^T (x) I) vec(X).
    big = np.kron(np.eye(n), a) - np.kron(b.T, np.eye(m))
    _, svals, vh = np.linalg.svd(big)
    cutoff = tol * svals[0] if svals.size and svals[0] > 0 else 0.0
    # Rows of vh are conjugated right singular vectors; undo the conjugation.
    null_rows = vh[svals <= cutoff].conj() if svals.size else vh.conj()
    basis = [row.reshape((m, n), order="F").copy() for row in null_rows]
    residual = max((frobenius(a @ mat - mat @ b) for mat in basis), default=0.0)
    return IntertwinerSpace(basis=basis, residual=residual)


@dataclass(frozen=True)
class SimilaritySplit:
    """W T = (T0 (+) T1) W with the unipotent W = [[I, -X], [0, I]]."""

    w: np.ndarray = field(repr=False)
    w_inv: np.ndarray = field(repr=False)
    diagonal: np.ndarray = field(repr=False)
    residual: float = 0.0


def similarity_split(model: UpperTriangularModel) -> SimilaritySplit:
    """Split T off its coupling: W T W^{-1} = T0 (+) T1, algebraically exact."""
    n = model.size
    eye = np.eye(n, dtype=complex)
    zero = np.zeros((n, n), dtype=complex)
    w = np.block([[eye, -model.x], [zero, eye]])
    w_inv = np.block([[eye, model.x], [zero, eye]])
    diag = np.block([[model.t0.matrix, zero], [zero, model.t1.matrix]])
    residual = frobenius(w @ model.t - diag @ w)
    return SimilaritySplit(w=w, w_inv=w_inv, diagonal=diag, residual=residual)


def apply_mobius(a_mat: np.ndarray, a: complex, phase: float = 0.0,
                 cond_cap: float = RESOLVENT_COND_CAP) -> np.ndarray:
    """Disk automorphism in functional-calculus form:

        phi(A) = e^{i phase} (a I - A)(I - conj(a) A)^{-1},   |a| < 1.

    Fails loudly when the resolvent condition number exceeds `cond_cap`
    instead of returning an untrustworthy matrix.
    """
    a_mat = _as_square(a_mat, "A")
    a = complex(a)
    if abs(a) >= 1.0:
        raise InvalidArgumentError("mobius parameter must satisfy |a| < 1")
    n = a_mat.shape[0]
    eye = np.eye(n, dtype=complex)
    denom = eye - np.conj(a) * a_mat
    cond = np.linalg.cond(denom)
    if not np.isfinite(cond) or cond > cond_cap:
        raise SingularResolventError(
            f"resolvent I - conj(a) A has condition estimate {cond:.3e}",
            condition_estimate=float(cond))
    numer = a * eye - a_mat
    # Right division numer @ denom^{-1} without forming the inverse.
    result = np.linalg.solve(denom.T, numer.T).T
    result *= np.exp(1j * float(phase))
    return ensure_finite(result, "mobius image")


def random_operator(size: int, seed: int, norm: float = 0.5,
                    kind: str = "dense") -> np.ndarray:
    """Seeded random matrix scaled to a prescribed operator (2-)norm.

    kind "dense": complex Gaussian entries. kind "normal": random diagonal
    conjugated by a Haar-ish unitary, so the result commutes with its adjoint.
    """
    if size < 1:
        raise InvalidArgumentError("size must be >= 1")
    rng = np.random.default_rng(seed)
    if kind == "dense":
        mat = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
    elif kind == "normal":
        diag = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        q = random_unitary(size, rng)
        mat = q @ np.diag(diag) @ q.conj().T
    else:
        raise InvalidArgumentError(f"unknown random operator kind {kind!r}")
    top = np.linalg.norm(mat, 2)
    if top > 0:
        mat *= norm / top
    return mat


def random_unitary(size: int, rng: np.random.Generator) -> np.ndarray:
    """QR-based random unitary with the standard phase fix."""
    z = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))
