"""Constructive unitary-equivalence machinery for the coupled block models.

Given T = [[T0, X T1 - T0 X], [0, T1]] and Tt = [[Tt0, Y Tt1 - Tt0 Y],
[0, Tt1]], a block unitary U with U T = Tt U is pinned down by three
conditions: the corner intertwinings, the Gram identities
(1 + X X*)^{-1} = U10* U10 and (1 + X* X)^{-1} = U01* U01, and membership of
Y - U01 X* U10^{-1} in the intertwiner space of (Tt0, Tt1).  This module
builds such unitaries for normal X, verifies the conditions numerically,
extracts the associated intertwined triangular pair (F, Ft), recovers the
scalar phase in the X = I specialization, and checks matrix-kernel
transformations between frame fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (DegenerateInputError, DomainError, InvalidArgumentError,
                     NumericError, PreconditionError)
from .geometry import DiskGrid, FrameField, eigenframe
from .kernels import DiagonalKernel, section_vector
from .operators import (ModelOperator, UpperTriangularModel, assemble_model,
                        frobenius, shift_from_kernel, sylvester_kernel)
from .reporting import ConditionReport

UNITARITY_TOL = 1e-10
NORMALITY_TOL = 1e-10
ROOT_CONSISTENCY_TOL = 1e-10
MAINLEMMA_GATE_TOL = 1e-8
U10_COND_CAP = 1e12


@dataclass(frozen=True)
class BlockUnitary:
    """2N x 2N unitary split into N x N blocks; unitarity checked on build."""

    u00: np.ndarray = field(repr=False)
    u01: np.ndarray = field(repr=False)
    u10: np.ndarray = field(repr=False)
    u11: np.ndarray = field(repr=False)

    def __post_init__(self):
        u = self.matrix
        eye = np.eye(u.shape[0])
        err = max(frobenius(u @ u.conj().T - eye), frobenius(u.conj().T @ u - eye))
        if err > UNITARITY_TOL:
            raise NumericError(f"block matrix is not unitary: residual {err:.3e}")

    @property
    def matrix(self) -> np.ndarray:
        return np.block([[self.u00, self.u01], [self.u10, self.u11]])

    @classmethod
    def from_matrix(cls, u: np.ndarray) -> "BlockUnitary":
        u = np.asarray(u, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1] or u.shape[0] % 2:
            raise InvalidArgumentError("expected a square matrix of even size")
        n = u.shape[0] // 2
        return cls(u00=u[:n, :n], u01=u[:n, n:], u10=u[n:, :n], u11=u[n:, n:])


def _hermitian_root(mat: np.ndarray, power: float) -> np.ndarray:
    """mat^power for Hermitian positive definite mat, via eigendecomposition."""
    sym = 0.5 * (mat + mat.conj().T)
    evals, vecs = np.linalg.eigh(sym)
    if evals[0] <= 0:
        raise NumericError(f"matrix not positive definite (min eig {evals[0]:.3e})")
    return (vecs * evals ** power) @ vecs.conj().T


def build_unitary_from_x(t0: ModelOperator, t1: ModelOperator, x: np.ndarray
                         ) -> tuple[BlockUnitary, UpperTriangularModel]:
    """Explicit unitary intertwiner for a normal coupling X.

    Returns U = [[X* R, R], [R, -R X]] with R = (1 + X* X)^{-1/2}, together
    with the partner model whose diagonal is

        Tt0 = (1 + X* X)^{1/2} T1 (1 + X* X)^{-1/2}
        Tt1 = (1 + X X*)^{-1/2} T0 (1 + X* X)^{1/2}

    and whose coupling operator is Y = X*.  Then U T U* = Tt.
    """
    x = np.asarray(x, dtype=complex)
    n = x.shape[0]
    if x.shape != (n, n) or t0.size != n or t1.size != n:
        raise InvalidArgumentError("T0, T1, X must be square and equally sized")
    x_scale = frobenius(x) ** 2
    normality = frobenius(x @ x.conj().T - x.conj().T @ x)
    if normality > NORMALITY_TOL * max(x_scale, 1e-300):
        raise PreconditionError(
            f"X is not normal: ||XX* - X*X|| = {normality:.3e}",
            failed_condition="normal-coupling")
    gram_right = np.eye(n) + x.conj().T @ x
    gram_left = np.eye(n) + x @ x.conj().T
    root = _hermitian_root(gram_right, 0.5)
    root_inv = _hermitian_root(gram_right, -0.5)
    root_left_inv = _hermitian_root(gram_left, -0.5)
    # For normal X the two Gram operators agree; treat a gap as a bug.
    drift = frobenius(root_inv - root_left_inv)
    if drift > ROOT_CONSISTENCY_TOL:
        raise NumericError(
            f"(1+XX*)^(-1/2) and (1+X*X)^(-1/2) disagree by {drift:.3e}")
    unitary = BlockUnitary(u00=x.conj().T @ root_inv, u01=root_inv,
                           u10=root_inv, u11=-root_inv @ x)
    tt0 = root @ t1.matrix @ root_inv
    tt1 = root_left_inv @ t0.matrix @ root
    partner = assemble_model(ModelOperator(tt0, source="conjugated:" + t1.source),
                             ModelOperator(tt1, source="conjugated:" + t0.source),
                             x.conj().T)
    return unitary, partner


def verify_mainlemma(unitary: BlockUnitary, model: UpperTriangularModel,
                     partner: UpperTriangularModel, tol: float):
    """Check the three unitary-intertwining conditions plus the block identities.

    Conditions reported: (1) U10 T0 = Tt1 U10 and T1 U01* = U01* Tt0;
    (2) (1+XX*)^{-1} = U10* U10 and (1+X*X)^{-1} = U01* U01;
    (3) Y - U01 X* U10^{-1} lies in the intertwiner space of (Tt0, Tt1);
    plus U00 = U01 X* and U11 = -U10 X.  When U10 is numerically singular,
    condition (3) is reported indeterminate with the condition estimate.
    """
    t0, t1, x = model.t0.matrix, model.t1.matrix, model.x
    tt0, tt1, y = partner.t0.matrix, partner.t1.matrix, partner.x
    u00, u01, u10, u11 = unitary.u00, unitary.u01, unitary.u10, unitary.u11
    n = t0.shape[0]
    eye = np.eye(n)

    report = ConditionReport(name="mainlemma")
    report.add("corner-intertwine-u10", frobenius(u10 @ t0 - tt1 @ u10), tol)
    report.add("corner-intertwine-u01",
               frobenius(t1 @ u01.conj().T - u01.conj().T @ tt0), tol)
    report.add("gram-u10",
               frobenius(np.linalg.inv(eye + x @ x.conj().T)
                         - u10.conj().T @ u10), tol)
    report.add("gram-u01",
               frobenius(np.linalg.inv(eye + x.conj().T @ x)
                         - u01.conj().T @ u01), tol)
    report.add("block-u00", frobenius(u00 - u01 @ x.conj().T), tol)
    report.add("block-u11", frobenius(u11 + u10 @ x), tol)

    cond_u10 = np.linalg.cond(u10)
    if not np.isfinite(cond_u10) or cond_u10 > U10_COND_CAP:
        report.add_indeterminate(
            "defect-intertwines-partner", tol,
            detail=f"U10 condition estimate {cond_u10:.3e}; defect skipped")
    else:
        defect = y - u01 @ x.conj().T @ np.linalg.inv(u10)
        report.add("defect-intertwines-partner",
                   frobenius(tt0 @ defect - defect @ tt1), tol)
        report.info["defect_norm"] = frobenius(defect)
    report.info["u10_condition"] = float(cond_u10)
    report.add("end-to-end",
               frobenius(unitary.matrix @ model.t - partner.t @ unitary.matrix), tol)
    return report


@dataclass(frozen=True)
class Fb2Pair:
    """The intertwined triangular pair split off a unitary equivalence.

    F = [[Tt0, S0], [0, T0]] and Ft = [[T1, S1], [0, Tt1]] with
    S0 = Y U10 - U01 X*, S1 = U01* Y - X* U10*, and Z = U01* (+) U10
    satisfying Z F = Ft Z.
    """

    f: np.ndarray = field(repr=False)
    ft: np.ndarray = field(repr=False)
    s0: np.ndarray = field(repr=False)
    s1: np.ndarray = field(repr=False)
    z: np.ndarray = field(repr=False)
    residuals: dict = field(default_factory=dict)


def construct_fb2_pair(unitary: BlockUnitary, model: UpperTriangularModel,
                       partner: UpperTriangularModel) -> Fb2Pair:
    """Build (F, Ft, Z) and record the intertwining residuals.

    Refuses (PreconditionError) unless verify_mainlemma passes at 1e-8.
    """
    gate = verify_mainlemma(unitary, model, partner, MAINLEMMA_GATE_TOL)
    if not gate.overall:
        failing = [c.name for c in gate.conditions if not c.passed]
        raise PreconditionError(
            f"mainlemma conditions failed: {', '.join(failing)}",
            failed_condition=failing[0])
    t0, t1 = model.t0.matrix, model.t1.matrix
    tt0, tt1, y = partner.t0.matrix, partner.t1.matrix, partner.x
    x = model.x
    u01, u10 = unitary.u01, unitary.u10
    s0 = y @ u10 - u01 @ x.conj().T
    s1 = u01.conj().T @ y - x.conj().T @ u10.conj().T
    n = t0.shape[0]
    zero = np.zeros((n, n), dtype=complex)
    f = np.block([[tt0, s0], [zero, t0]])
    ft = np.block([[t1, s1], [zero, tt1]])
    z = np.block([[u01.conj().T, zero], [zero, u10]])
    residuals = {
        "f-membership": frobenius(tt0 @ s0 - s0 @ t0),
        "ft-membership": frobenius(t1 @ s1 - s1 @ tt1),
        "corner-link": frobenius(u01.conj().T @ s0 - s1 @ u10),
        "z-intertwine": frobenius(z @ f - ft @ z),
    }
    return Fb2Pair(f=f, ft=ft, s0=s0, s1=s1, z=z, residuals=residuals)


def theta_intertwiner_check(t0: ModelOperator, t1: ModelOperator,
                            y: np.ndarray, tol: float
                            ) -> tuple[float, BlockUnitary] | None:
    """Recover the phase in Y T0 - T1 Y = e^{i theta} (T0 - T1), if it exists.

    theta is the Frobenius least-squares phase; acceptance re-verifies the full
    relation at `tol`.  On success returns (theta, U) with the rotation-block
    unitary U whose blocks are sqrt(2)/2 e^{i theta_1} I, ... (theta_1 -
    theta_2 = theta), which intertwines [[T0, T1-T0],[0,T1]] with
    [[T1, Y T0 - T1 Y],[0,T0]].  Returns None when the relation fails.
    """
    a, b = t0.matrix, t1.matrix
    diff = a - b
    scale = frobenius(diff)
    if scale == 0.0:
        raise DegenerateInputError("T0 == T1: the phase is undefined")
    lhs = y @ a - b @ y
    pairing = np.vdot(diff, lhs)  # tr((T0-T1)^H (Y T0 - T1 Y))
    theta = float(np.angle(pairing)) if pairing != 0 else 0.0
    residual = frobenius(lhs - np.exp(1j * theta) * diff)
    if residual > tol:
        return None
    n = a.shape[0]
    eye = np.eye(n, dtype=complex)
    half = math.sqrt(2.0) / 2.0
    unitary = BlockUnitary(u00=half * np.exp(1j * theta) * eye,
                           u01=half * np.exp(1j * theta) * eye,
                           u10=half * eye,
                           u11=-half * eye)
    return theta % (2.0 * math.pi), unitary


@dataclass(frozen=True)
class AntidiagonalTransform:
    """Phi(z) = [[0, phi(z)], [psi(z), 0]] with polynomial phi and psi.

    Coefficients are ascending; constants are length-1 sequences.
    """

    phi: np.ndarray
    psi: np.ndarray

    @classmethod
    def constant(cls, phi: complex = 1.0, psi: complex = 1.0):
        return cls(phi=np.asarray([phi], dtype=complex),
                   psi=np.asarray([psi], dtype=complex))

    def __call__(self, z: complex) -> np.ndarray:
        phi = _polyval(self.phi, z)
        psi = _polyval(self.psi, z)
        return np.array([[0.0, phi], [psi, 0.0]], dtype=complex)


def _polyval(ascending: np.ndarray, z: complex) -> complex:
    acc = 0.0 + 0.0j
    for c in ascending[::-1]:
        acc = acc * z + c
    return complex(acc)


def frame_kernel_matrix(frame: FrameField, z: complex, w: complex) -> np.ndarray:
    """Matrix kernel K(z, w)[i, j] = <gamma_j(wbar), gamma_i(zbar)>.

    Frames are evaluated at the conjugated points, matching the convention in
    which the model acts as the adjoint multiplication operator.
    """
    if frame.evaluate is None:
        raise InvalidArgumentError("frame has no evaluator")
    vz = frame.evaluate(np.conj(z))
    vw = frame.evaluate(np.conj(w))
    return vz.conj() @ vw.T


def kernel_transform_check(frame_a: FrameField, frame_b: FrameField,
                           transform: AntidiagonalTransform,
                           sample_pairs) -> float:
    """max over samples of || Phi(z) K_A(z, w) Phi(w)^* - K_B(z, w) ||."""
    worst = 0.0
    for z, w in sample_pairs:
        if abs(z) >= 1.0 or abs(w) >= 1.0:
            raise DomainError(f"sample pair ({z}, {w}) leaves the unit disk")
        ka = frame_kernel_matrix(frame_a, z, w)
        kb = frame_kernel_matrix(frame_b, z, w)
        lhs = transform(z) @ ka @ transform(w).conj().T
        worst = max(worst, frobenius(lhs - kb))
    return worst


def main3_verifier(k0: DiagonalKernel, k1: DiagonalKernel, ks: DiagonalKernel,
                   x: np.ndarray, y: np.ndarray, grid: DiskGrid, tol: float,
                   sample_pairs=None):
    """Check the two section identities and the induced kernel transform.

    Hypotheses verified pointwise on the grid, for sections t_i of the kernels:

        (1)  X* t0(w) = 2 Y t1(w)
        (2)  ||t0(w)||^2 = 2 (||Y t1(w)||^2 + ||t1(w)||^2)

    with X an isometry.  On success the two coupled models through the slow
    kernel Ks are assembled, T = [[T0, X Ts - T0 X], [0, Ts]] and
    Tt = [[Ts, Y T1 - Ts Y], [0, T1]], their frames are compared through the
    antidiagonal transform with phi = psi = 1 (partner frame scaled by
    sqrt(2)), and the intertwiner-space dimensions between each diagonal
    operator and Ts are reported in both orders.
    """
    report = ConditionReport(name="main3")
    n = ks.truncation
    if k0.truncation != n or k1.truncation != n:
        raise InvalidArgumentError("all three kernels need one truncation")
    eye = np.eye(n)
    report.add("x-isometry", frobenius(x.conj().T @ x - eye), 1e-10)

    worst_section = 0.0
    worst_norm = 0.0
    worst_point = None
    for w in grid.points:
        t0w = section_vector(k0, w).coordinates
        t1w = section_vector(k1, w).coordinates
        r1 = float(np.linalg.norm(x.conj().T @ t0w - 2.0 * (y @ t1w)))
        r2 = abs(float(np.vdot(t0w, t0w).real)
                 - 2.0 * float(np.vdot(y @ t1w, y @ t1w).real
                               + np.vdot(t1w, t1w).real))
        if max(r1, r2) > max(worst_section, worst_norm):
            worst_point = complex(w)
        worst_section = max(worst_section, r1)
        worst_norm = max(worst_norm, r2)
    report.add("section-identity", worst_section, tol,
               detail=f"worst point {worst_point}")
    report.add("norm-identity", worst_norm, tol,
               detail=f"worst point {worst_point}")

    t0_op = shift_from_kernel(k0)
    t1_op = shift_from_kernel(k1)
    ts_op = shift_from_kernel(ks)
    model = assemble_model(t0_op, ts_op, x)
    partner = assemble_model(ts_op, t1_op, y)
    frame_a = eigenframe(model, grid)
    frame_b = eigenframe(partner, grid).with_constant_change(
        math.sqrt(2.0) * np.eye(2))
    if sample_pairs is None:
        pts = grid.points
        step = max(1, len(pts) // 8)
        chosen = pts[::step][:8]
        sample_pairs = [(z, w) for z in chosen for w in chosen]
    transform = AntidiagonalTransform.constant(1.0, 1.0)
    report.add("kernel-transform",
               kernel_transform_check(frame_a, frame_b, transform, sample_pairs),
               tol)

    for name, diag in (("t0", t0_op), ("t1", t1_op)):
        fwd = sylvester_kernel(diag.matrix, ts_op.matrix)
        back = sylvester_kernel(ts_op.matrix, diag.matrix)
        report.info[f"intertwiner_dim_{name}_ts"] = fwd.dimension
        report.info[f"intertwiner_dim_ts_{name}"] = back.dimension
    return report
