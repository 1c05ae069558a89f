import numpy as np
import pytest

from cdlab.errors import InvalidArgumentError, SingularResolventError
from cdlab.kernels import bergman_kernel, section_vector
from cdlab.operators import (ModelOperator, apply_mobius, assemble_model,
                             fb2_membership, frobenius, random_operator,
                             random_unitary, shift_from_kernel,
                             similarity_split, sylvester_kernel)

from oracles import sylvester_nullity_exact


def _rand(size, seed, norm=1.0):
    return random_operator(size, seed, norm=norm)


class TestShift:
    def test_flat_kernel_unweighted_shift(self):
        op = shift_from_kernel(bergman_kernel(1, 6))
        band = np.diag(op.matrix, 1)
        np.testing.assert_array_equal(band, np.ones(5))
        assert np.count_nonzero(op.matrix) == 5

    def test_weight_two_band(self):
        op = shift_from_kernel(bergman_kernel(2, 6))
        k = np.arange(5)
        np.testing.assert_allclose(np.diag(op.matrix, 1),
                                   np.sqrt((k + 1) / (k + 2)))

    def test_section_is_eigenvector_up_to_tail(self):
        k = bergman_kernel(2, 30)
        op = shift_from_kernel(k)
        w = 0.4 + 0.3j
        t = section_vector(k, w).coordinates
        resid = op.matrix @ t - w * t
        # all coordinates cancel except the last, which carries the tail term
        np.testing.assert_allclose(resid[:-1], 0, atol=1e-14)
        assert abs(resid[-1] + w * t[-1]) < 1e-14

    def test_norm_bound_flat(self):
        op = shift_from_kernel(bergman_kernel(1, 40))
        assert np.linalg.norm(op.matrix, 2) <= 1.0 + 1e-12

    def test_truncation_too_small(self):
        with pytest.raises(InvalidArgumentError):
            shift_from_kernel(bergman_kernel(1, 1))


class TestAssemble:
    def test_zero_coupling_is_block_diagonal(self):
        t0 = shift_from_kernel(bergman_kernel(1, 4))
        t1 = shift_from_kernel(bergman_kernel(2, 4))
        model = assemble_model(t0, t1, np.zeros((4, 4)))
        np.testing.assert_array_equal(model.coupling_block, np.zeros((4, 4)))

    def test_equal_blocks_identity_coupling_vanishes(self):
        a = _rand(4, 0)
        model = assemble_model(ModelOperator(a), ModelOperator(a), np.eye(4))
        np.testing.assert_allclose(model.coupling_block, 0, atol=1e-15)

    def test_coupling_block_formula(self):
        t0, t1, x = _rand(3, 1), _rand(3, 2), _rand(3, 3)
        model = assemble_model(ModelOperator(t0), ModelOperator(t1), x)
        np.testing.assert_allclose(model.coupling_block, x @ t1 - t0 @ x)
        np.testing.assert_array_equal(model.t[3:, :3], np.zeros((3, 3)))
        np.testing.assert_array_equal(model.t[:3, :3], t0)
        np.testing.assert_array_equal(model.t[3:, 3:], t1)

    def test_size_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            assemble_model(ModelOperator(np.eye(3)), ModelOperator(np.eye(4)),
                           np.eye(3))


class TestFb2Membership:
    def test_commuting_coupling_reduces_to_zero(self):
        a = _rand(4, 5)
        x = 1.7 * np.eye(4) + 0.3 * a  # commutes with a
        member, residual = fb2_membership(ModelOperator(a), ModelOperator(a),
                                          x, 1e-10)
        assert member and residual < 1e-13

    def test_zero_coupling(self):
        t0, t1 = ModelOperator(_rand(4, 6)), ModelOperator(_rand(4, 7))
        member, residual = fb2_membership(t0, t1, np.zeros((4, 4)), 1e-10)
        assert member and residual == 0.0

    def test_generic_triple_is_outside(self):
        t0, t1, x = (ModelOperator(_rand(4, 8)), ModelOperator(_rand(4, 9)),
                     _rand(4, 10))
        member, residual = fb2_membership(t0, t1, x, 1e-10)
        a, b = t0.matrix, t1.matrix
        direct = frobenius(x @ b @ b - 2 * a @ x @ b + a @ a @ x)
        assert not member
        assert residual == pytest.approx(direct)

    def test_scale_invariance_of_verdict(self):
        t0, t1, x = (ModelOperator(_rand(4, 8)), ModelOperator(_rand(4, 9)),
                     _rand(4, 10))
        verdict_small, _ = fb2_membership(t0, t1, 1e-8 * x, 1e-10)
        verdict_big, _ = fb2_membership(t0, t1, 1e8 * x, 1e-10)
        assert verdict_small == verdict_big


def _jordan(size, eig=0.0):
    mat = np.eye(size, dtype=complex) * eig
    mat[np.arange(size - 1), np.arange(1, size)] = 1.0
    return mat


class TestSylvesterKernel:
    @pytest.mark.parametrize("a,b", [
        (np.diag([1.0, 2.0, 3.0]), np.diag([1.0, 2.0, 3.0])),
        (np.diag([1.0, 1.0, 2.0]), np.diag([1.0, 1.0, 2.0])),
        (_jordan(3), _jordan(3)),
        (_jordan(2), _jordan(4)),
        (np.diag([1.0, 2.0]), np.diag([3.0, 4.0])),
        (np.diag([1.0j, -1.0j]), np.diag([1.0j, 2.0j])),
        (_jordan(2, 1.0), np.diag([1.0, 2.0])),
    ])
    def test_dimension_matches_exact_elimination_oracle(self, a, b):
        assert sylvester_kernel(a, b).dimension == sylvester_nullity_exact(a, b)

    def test_disjoint_spectra_trivial_kernel(self):
        space = sylvester_kernel(np.diag([1.0, 2.0]), np.diag([5.0, 6.0]))
        assert space.dimension == 0 and space.basis == []

    def test_basis_orthonormal_in_frobenius(self):
        space = sylvester_kernel(np.diag([1.0, 2.0, 3.0]),
                                 np.diag([1.0, 2.0, 3.0]))
        gram = np.array([[np.vdot(p, q) for q in space.basis]
                         for p in space.basis])
        np.testing.assert_allclose(gram, np.eye(space.dimension), atol=1e-12)

    def test_residual_bound(self):
        a, b = _rand(4, 11), _rand(4, 11)  # same seed: equal, big kernel
        space = sylvester_kernel(a, b, tol=1e-10)
        scale = np.linalg.norm(a, 2) + np.linalg.norm(b, 2)
        assert space.residual <= 10 * 1e-10 * scale
        recomputed = max((frobenius(a @ m - m @ b) for m in space.basis),
                         default=0.0)
        assert space.residual == pytest.approx(recomputed)

    @pytest.mark.parametrize("seed", range(5))
    def test_dimension_invariant_under_unitary_conjugation(self, seed):
        rng = np.random.default_rng(seed)
        a = np.diag([1.0, 1.0, 2.0])
        b = _jordan(3)
        base = sylvester_kernel(a, b).dimension
        q = random_unitary(3, rng)
        conj = sylvester_kernel(q @ a @ q.conj().T, q @ b @ q.conj().T).dimension
        assert conj == base


class TestSimilaritySplit:
    def test_zero_coupling_identity_transform(self):
        t0 = shift_from_kernel(bergman_kernel(1, 4))
        t1 = shift_from_kernel(bergman_kernel(2, 4))
        split = similarity_split(assemble_model(t0, t1, np.zeros((4, 4))))
        np.testing.assert_array_equal(split.w, np.eye(8))
        assert split.residual == 0.0

    def test_random_blocks_algebraic_identity(self):
        model = assemble_model(ModelOperator(_rand(4, 1)),
                               ModelOperator(_rand(4, 2)), _rand(4, 3))
        split = similarity_split(model)
        assert split.residual <= 1e-12 * frobenius(model.t)

    def test_inverse_is_exact(self):
        model = assemble_model(ModelOperator(_rand(5, 4)),
                               ModelOperator(_rand(5, 5)), _rand(5, 6))
        split = similarity_split(model)
        np.testing.assert_array_equal(split.w @ split.w_inv, np.eye(10))


class TestMobius:
    def test_zero_parameter_negates(self):
        a = _rand(4, 1)
        np.testing.assert_allclose(apply_mobius(a, 0.0), -a, atol=1e-15)

    def test_zero_matrix_maps_to_scalar(self):
        out = apply_mobius(np.zeros((3, 3)), 0.4 + 0.1j, phase=0.7)
        np.testing.assert_allclose(out, np.exp(0.7j) * (0.4 + 0.1j) * np.eye(3))

    @pytest.mark.parametrize("seed", range(4))
    def test_involution(self, seed):
        a = _rand(5, seed, norm=0.5)
        twice = apply_mobius(apply_mobius(a, 0.3 - 0.45j), 0.3 - 0.45j)
        assert frobenius(twice - a) < 1e-10

    def test_parameter_outside_disk(self):
        with pytest.raises(InvalidArgumentError):
            apply_mobius(np.eye(2), 1.0)

    def test_singular_resolvent_reports_condition(self):
        mat = np.diag([2.0, 0.1])  # 1 - 0.5*2 = 0 exactly
        with pytest.raises(SingularResolventError) as err:
            apply_mobius(mat, 0.5)
        assert err.value.condition_estimate > 1e12

    def test_result_always_finite(self):
        out = apply_mobius(_rand(6, 9, norm=0.9), 0.69)
        assert np.all(np.isfinite(out.real))


class TestRandomOperators:
    def test_norm_scaling(self):
        mat = random_operator(8, 3, norm=0.5)
        assert np.linalg.norm(mat, 2) == pytest.approx(0.5)

    def test_normal_kind_commutes_with_adjoint(self):
        mat = random_operator(8, 3, norm=1.0, kind="normal")
        assert frobenius(mat @ mat.conj().T - mat.conj().T @ mat) < 1e-13

    def test_seeded_determinism(self):
        np.testing.assert_array_equal(random_operator(6, 42),
                                      random_operator(6, 42))

    def test_unknown_kind(self):
        with pytest.raises(InvalidArgumentError):
            random_operator(4, 0, kind="sparse")

    def test_random_unitary_is_unitary(self):
        q = random_unitary(7, np.random.default_rng(0))
        np.testing.assert_allclose(q @ q.conj().T, np.eye(7), atol=1e-13)
