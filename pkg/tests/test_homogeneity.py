import math

import numpy as np
import pytest

from cdlab.equivalence import BlockUnitary
from cdlab.errors import InvalidArgumentError, NumericError
from cdlab.homogeneity import (MobiusMap, WitnessEntry,
                               homogeneity_condition_check,
                               mobius_block_identity_check, mobius_sample_set,
                               thm45_condition_check)
from cdlab.kernels import bergman_kernel
from cdlab.operators import (ModelOperator, apply_mobius, assemble_model,
                             frobenius, random_operator, shift_from_kernel)


def _random_model(size=6, seed=0, norm=0.5):
    return assemble_model(
        ModelOperator(random_operator(size, seed, norm=norm)),
        ModelOperator(random_operator(size, seed + 1, norm=norm)),
        random_operator(size, seed + 2, norm=norm))


def _paired_diagonal(mobius, seeds):
    entries = []
    for z in seeds:
        entries.extend([z, mobius.scalar(z)])
    return np.diag(np.asarray(entries, dtype=complex))


def _swap_pairs(size):
    perm = np.zeros((size, size), dtype=complex)
    for k in range(0, size, 2):
        perm[k, k + 1] = perm[k + 1, k] = 1.0
    return perm


class TestMobiusMap:
    def test_parameter_validation(self):
        with pytest.raises(InvalidArgumentError):
            MobiusMap(a=1.0)

    def test_sample_set_is_the_documented_twelve(self):
        maps = mobius_sample_set()
        assert len(maps) == 12
        radii = sorted({round(abs(m.a), 10) for m in maps})
        assert radii == [0.2, 0.5, 0.7]
        assert all(m.phase == 0.0 for m in maps)

    def test_scalar_involution(self):
        mob = MobiusMap(a=0.3 + 0.4j)
        z = 0.25 - 0.1j
        assert abs(mob.scalar(mob.scalar(z)) - z) < 1e-14


class TestBlockIdentity:
    def test_negation_map_exact(self):
        model = _random_model(seed=3)
        result = mobius_block_identity_check(model, MobiusMap(a=0.0))
        assert result.residual < 1e-13

    def test_zero_coupling_block_diagonal_calculus(self):
        t0 = shift_from_kernel(bergman_kernel(1, 6))
        t1 = shift_from_kernel(bergman_kernel(2, 6))
        model = assemble_model(t0, t1, np.zeros((6, 6)))
        mob = MobiusMap(a=0.3 + 0.2j)
        phi_t = mob.of(model.t)
        np.testing.assert_allclose(phi_t[:6, 6:], 0, atol=1e-12)
        np.testing.assert_allclose(phi_t[:6, :6], mob.of(t0.matrix), atol=1e-12)
        np.testing.assert_allclose(phi_t[6:, 6:], mob.of(t1.matrix), atol=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_random_contractive_blocks(self, seed):
        model = _random_model(size=4, seed=10 * seed)
        mob = MobiusMap(a=0.3 + 0.2j)
        result = mobius_block_identity_check(model, mob)
        assert result.residual <= 1e-10 * frobenius(model.t)
        assert max(result.power_residuals.values()) <= 1e-12

    def test_involution_on_assembled_matrix(self):
        model = _random_model(seed=21)
        for mob in mobius_sample_set():
            twice = apply_mobius(apply_mobius(model.t, mob.a, mob.phase),
                                 mob.a, mob.phase)
            assert frobenius(twice - model.t) <= 1e-9


class TestHomogeneityWitness:
    def _setup(self):
        mob = MobiusMap(a=0.4)
        diag = _paired_diagonal(mob, [0.2, -0.3, 0.1 + 0.2j])
        perm = _swap_pairs(6)
        x = np.eye(6, dtype=complex) + 0.5 * perm
        model = assemble_model(ModelOperator(diag), ModelOperator(diag), x)
        return mob, model, perm

    def test_engineered_witness_passes(self):
        mob, model, perm = self._setup()
        witness = [WitnessEntry(mobius=mob, u0=perm, u1=perm)]
        report = homogeneity_condition_check(model, witness, tol=1e-10)
        assert report.overall
        assert report.info["sampled_maps"] == 1

    def test_commutation_violation_detected(self):
        mob, model, perm = self._setup()
        # a witness pair that conjugates correctly but breaks U0 X = X U1
        phase = np.exp(0.3j)
        witness = [WitnessEntry(mobius=mob, u0=perm, u1=phase * perm)]
        report = homogeneity_condition_check(model, witness, tol=1e-10)
        assert report.condition("map0-conjugate-t0").passed
        assert report.condition("map0-conjugate-t1").passed
        assert not report.condition("map0-commutation").passed
        assert not report.overall

    def test_wrong_map_fails_conjugation(self):
        mob, model, perm = self._setup()
        other = MobiusMap(a=0.5)
        witness = [WitnessEntry(mobius=other, u0=perm, u1=perm)]
        report = homogeneity_condition_check(model, witness, tol=1e-10)
        assert not report.condition("map0-conjugate-t0").passed

    def test_non_unitary_witness_rejected(self):
        mob, _, perm = self._setup()
        with pytest.raises(NumericError):
            WitnessEntry(mobius=mob, u0=2.0 * perm, u1=perm)


def _corollary_unitary(size, theta=0.0):
    eye = np.eye(size, dtype=complex)
    half = math.sqrt(2) / 2
    return BlockUnitary(u00=half * np.exp(1j * theta) * eye,
                        u01=half * np.exp(1j * theta) * eye,
                        u10=half * eye, u11=-half * eye)


class TestThm45:
    def _engineered(self, theta=0.0, size=12, a=0.35 + 0.1j):
        mob = MobiusMap(a=a)
        t1 = shift_from_kernel(bergman_kernel(2, size))
        t0 = ModelOperator(mob.of(t1.matrix))
        model = assemble_model(t0, t1, np.eye(size, dtype=complex))
        return mob, model, _corollary_unitary(size, theta)

    def test_engineered_construction_passes(self):
        mob, model, unitary = self._engineered()
        report = thm45_condition_check(unitary, model, mob, tol=1e-10)
        assert report.overall
        assert report.condition("gram-u10").residual <= 1e-12
        assert report.condition("block-u00-xu10").residual <= 1e-12

    def test_phase_mismatch_breaks_block_relations(self):
        mob, model, unitary = self._engineered(theta=math.pi / 4)
        report = thm45_condition_check(unitary, model, mob, tol=1e-10)
        assert not report.condition("block-u00-xu10").passed
        assert not report.condition("end-to-end").passed

    def test_norm_consistency_bound(self):
        # the Gram relation forces ||U10|| ||(1+XX*)^(1/2)|| >= 1
        mob, model, unitary = self._engineered()
        x = model.x
        gram_root = np.linalg.cholesky(np.eye(12) + x @ x.conj().T)
        product = (np.linalg.norm(unitary.u10, 2)
                   * np.linalg.norm(gram_root, 2))
        assert product >= 1.0 - 1e-12

    def test_singular_u10_indeterminate(self):
        size = 4
        z = np.zeros((size, size))
        unitary = BlockUnitary(u00=np.eye(size), u01=z, u10=z, u11=np.eye(size))
        mob = MobiusMap(a=0.2)
        t1 = shift_from_kernel(bergman_kernel(1, size))
        model = assemble_model(ModelOperator(mob.of(t1.matrix)), t1,
                               np.eye(size, dtype=complex))
        report = thm45_condition_check(unitary, model, mob, tol=1e-10)
        assert report.condition("corner-intertwine-u10").status == "indeterminate"
        assert not report.overall
