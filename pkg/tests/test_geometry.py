import numpy as np
import pytest

from cdlab.errors import (DegenerateFrameError, DomainError,
                          InvalidArgumentError, PrecisionError)
from cdlab.geometry import (DiskGrid, FrameField, MetricField,
                            covariant_derivative, curvature,
                            curvature_isometry_check, eigenframe, gram_metric,
                            kernel_frame, polar_grid, radial_grid)
from cdlab.kernels import bergman_kernel
from cdlab.operators import (ModelOperator, assemble_model, frobenius,
                             random_operator, random_unitary,
                             shift_from_kernel)

from oracles import bergman_curvature, bergman_curvature_derivative


def _model(n0=1, n1=2, size=24, x_seed=5, x_norm=0.5):
    t0 = shift_from_kernel(bergman_kernel(n0, size))
    t1 = shift_from_kernel(bergman_kernel(n1, size))
    x = random_operator(size, x_seed, norm=x_norm)
    return assemble_model(t0, t1, x)


def _curvature_with_derivatives(frame, grid, keys=((1, 0), (0, 1))):
    metric = gram_metric(frame)
    fld = curvature(metric, grid, method="series")
    for key in keys:
        covariant_derivative(fld, metric, *key)
    return fld, metric


class TestGrids:
    def test_polar_default_shape(self):
        grid = polar_grid()
        assert len(grid) == 6 * 16
        assert np.max(np.abs(grid.points)) == pytest.approx(0.6)

    def test_radial(self):
        grid = radial_grid([0.1, 0.5])
        np.testing.assert_array_equal(grid.points, [0.1, 0.5])

    def test_stencil_margin_enforced(self):
        with pytest.raises(InvalidArgumentError):
            DiskGrid(points=np.array([0.9995 + 0j]), fd_step=1e-3)

    def test_empty_grid_rejected(self):
        with pytest.raises(InvalidArgumentError):
            DiskGrid(points=np.array([]))


class TestEigenframe:
    def test_zero_coupling_origin_frame(self):
        t0 = shift_from_kernel(bergman_kernel(1, 6))
        t1 = shift_from_kernel(bergman_kernel(2, 6))
        model = assemble_model(t0, t1, np.zeros((6, 6)))
        grid = DiskGrid(points=np.array([0.0 + 0j]))
        frame = eigenframe(model, grid)
        e0 = np.zeros(12)
        e0[0] = 1.0
        e6 = np.zeros(12)
        e6[6] = 1.0
        np.testing.assert_array_equal(frame.vectors[0][0], e0)
        np.testing.assert_array_equal(frame.vectors[0][1], e6)

    def test_residual_tail_bound(self):
        size = 40
        model = _model(size=size)
        x_norm = np.linalg.norm(model.x, 2)
        grid = polar_grid(radii=[0.4, 0.8], n_angles=8)
        frame = eigenframe(model, grid)
        a_last = max(bergman_kernel(1, size).coefficients[-1],
                     bergman_kernel(2, size).coefficients[-1])
        bound = (1 + x_norm) * np.sqrt(a_last) * 0.8 ** size
        assert float(np.max(frame.eigen_residuals)) <= bound * (1 + 1e-10)

    def test_rank_one_residual_is_single_tail_term(self):
        k = bergman_kernel(1, 30)
        w = 0.5 + 0.3j
        grid = DiskGrid(points=np.array([w]))
        frame = kernel_frame(k, grid)
        assert frame.eigen_residuals[0][0] == pytest.approx(abs(w) ** 30)

    def test_kernelless_blocks_rejected(self):
        model = assemble_model(ModelOperator(np.eye(4)),
                               ModelOperator(np.eye(4)), np.zeros((4, 4)))
        with pytest.raises(InvalidArgumentError):
            eigenframe(model, polar_grid(radii=[0.2], n_angles=2))

    def test_tail_tolerance_violation_names_point(self):
        model = _model(size=12)
        grid = polar_grid(radii=[0.8], n_angles=4)
        with pytest.raises(PrecisionError) as err:
            eigenframe(model, grid, tail_tol=1e-12)
        assert err.value.point is not None
        assert err.value.required_truncation > 12

    def test_residual_decay_with_truncation_rank_one(self):
        # doubling N scales the single tail term by exactly |w|^N
        values = {}
        grid = DiskGrid(points=np.array([0.8 + 0j]))
        for size in (40, 80, 160):
            frame = kernel_frame(bergman_kernel(1, size), grid)
            values[size] = float(frame.eigen_residuals[0][0])
        assert values[80] == pytest.approx(values[40] * 0.8 ** 40, rel=1e-6)
        assert values[160] == pytest.approx(values[80] * 0.8 ** 80, rel=1e-3)

    def test_residual_decay_with_truncation_rank_two(self):
        worst = {}
        grid = polar_grid(radii=[0.8], n_angles=4)
        for size in (40, 80):
            model = _model(size=size, x_seed=7)
            worst[size] = float(np.max(eigenframe(model, grid).eigen_residuals))
        # geometric decay, up to the slowly growing weight-two coefficient
        assert worst[80] <= worst[40] * 0.8 ** 40 * 4.0


class TestGramMetric:
    def test_orthonormal_frame_gives_identity(self):
        t0 = shift_from_kernel(bergman_kernel(1, 6))
        t1 = shift_from_kernel(bergman_kernel(2, 6))
        model = assemble_model(t0, t1, np.zeros((6, 6)))
        grid = DiskGrid(points=np.array([0.0 + 0j]))
        metric = gram_metric(eigenframe(model, grid))
        np.testing.assert_allclose(metric.values[0], np.eye(2), atol=1e-15)

    def test_rank_one_flat_kernel_scalar(self):
        grid = DiskGrid(points=np.array([0.5 + 0j]))
        metric = gram_metric(kernel_frame(bergman_kernel(1, 200), grid))
        assert metric.values[0][0, 0].real == pytest.approx(1 / (1 - 0.25),
                                                            rel=1e-12)

    def test_constant_scaling_scales_metric(self):
        grid = polar_grid(radii=[0.3], n_angles=4)
        frame = kernel_frame(bergman_kernel(2, 40), grid)
        scaled = frame.with_constant_change(np.array([[2.0 - 1.0j]]))
        base = gram_metric(frame)
        big = gram_metric(scaled)
        np.testing.assert_allclose(big.values, base.values * abs(2 - 1j) ** 2,
                                   rtol=1e-13)

    def test_degenerate_frame_rejected(self):
        grid = DiskGrid(points=np.array([0.1 + 0j]))
        vec = np.array([1.0, 0.5, 0.0, 0.0], dtype=complex)
        frame = FrameField(grid=grid, rank=2, vectors=[np.vstack([vec, vec])])
        with pytest.raises(DegenerateFrameError):
            gram_metric(frame)


class TestCurvature:
    def test_flat_kernel_origin_value(self):
        grid = DiskGrid(points=np.array([0.0 + 0j]))
        metric = gram_metric(kernel_frame(bergman_kernel(1, 40), grid))
        fld = curvature(metric, grid, method="series")
        assert fld.values[0][0, 0] == pytest.approx(-1.0)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_series_matches_symbolic_oracle(self, n):
        grid = polar_grid(radii=[0.25, 0.5], n_angles=4)
        metric = gram_metric(kernel_frame(bergman_kernel(n, 80), grid))
        fld = curvature(metric, grid, method="series")
        for w, mat in zip(grid.points, fld.values):
            oracle = bergman_curvature(n, complex(w))
            assert abs(mat[0, 0] - oracle) <= 1e-12 * abs(oracle)

    def test_half_radius_closed_form(self):
        # -n/(1-1/4)^2 = -16n/9 at |w| = 1/2
        grid = DiskGrid(points=np.array([0.5 + 0j]))
        for n in (1, 2, 3):
            metric = gram_metric(kernel_frame(bergman_kernel(n, 80), grid))
            fld = curvature(metric, grid, method="series")
            assert fld.values[0][0, 0].real == pytest.approx(-16 * n / 9,
                                                             rel=1e-6)

    def test_constant_metric_zero_curvature(self):
        grid = polar_grid(radii=[0.3], n_angles=4)
        h0 = np.array([[2.0, 0.3 + 0.1j], [0.3 - 0.1j, 1.0]])
        metric = MetricField(grid=grid, rank=2,
                             values=np.array([h0] * len(grid)),
                             evaluate=lambda w: h0)
        fld = curvature(metric, grid, method="fd")
        assert frobenius(np.asarray(fld.values)) < 1e-10

    def test_series_vs_fd_agreement(self):
        grid = polar_grid(radii=[0.2, 0.4, 0.6], n_angles=8, fd_step=1e-3)
        metric = gram_metric(kernel_frame(bergman_kernel(2, 80), grid))
        series = np.array([m[0, 0] for m in
                           curvature(metric, grid, "series").values])
        fd = np.array([m[0, 0] for m in curvature(metric, grid, "fd").values])
        assert np.max(np.abs(series - fd) / np.abs(series)) <= 1e-4

    def test_rank_two_series_vs_fd(self):
        model = _model(size=20)
        grid = polar_grid(radii=[0.3, 0.5], n_angles=4)
        metric = gram_metric(eigenframe(model, grid))
        series = np.asarray(curvature(metric, grid, "series").values)
        fd = np.asarray(curvature(metric, grid, "fd").values)
        assert frobenius(series - fd) / frobenius(series) <= 1e-4

    def test_rank_one_negative_real(self):
        grid = polar_grid()
        metric = gram_metric(kernel_frame(bergman_kernel(2, 80), grid))
        for mat in curvature(metric, grid, "series").values:
            assert abs(mat[0, 0].imag) < 1e-10
            assert mat[0, 0].real < 0

    def test_fd_stencil_leaving_disk(self):
        grid = DiskGrid(points=np.array([0.995 + 0j]), fd_step=1e-3)
        metric = gram_metric(kernel_frame(bergman_kernel(1, 400), grid))
        with pytest.raises(DomainError):
            curvature(metric, grid, method="fd")

    def test_series_needs_polynomial(self):
        grid = polar_grid(radii=[0.3], n_angles=2)
        metric = MetricField(grid=grid, rank=1,
                             values=np.ones((len(grid), 1, 1)),
                             evaluate=lambda w: np.eye(1))
        with pytest.raises(InvalidArgumentError):
            curvature(metric, grid, method="series")


class TestCovariantDerivatives:
    def test_order_zero_returns_curvature(self):
        grid = DiskGrid(points=np.array([0.2 + 0j]))
        metric = gram_metric(kernel_frame(bergman_kernel(1, 40), grid))
        fld = curvature(metric, grid, "series")
        np.testing.assert_array_equal(
            covariant_derivative(fld, metric, 0, 0), fld.values)

    def test_rank_one_commutator_vanishes(self):
        # for scalars the w-step is a plain derivative; compare to the oracle
        grid = DiskGrid(points=np.array([0.3 + 0.2j]))
        metric = gram_metric(kernel_frame(bergman_kernel(2, 60), grid))
        fld = curvature(metric, grid, "series")
        for (i, j) in ((1, 0), (0, 1), (1, 1)):
            value = covariant_derivative(fld, metric, i, j)[0][0, 0]
            oracle = bergman_curvature_derivative(2, i, j, 0.3 + 0.2j)
            assert abs(value - oracle) <= 1e-9 * max(1.0, abs(oracle))

    def test_mixed_second_derivative_at_origin(self):
        # independent symbolic oracle gives -2 for the flat kernel
        grid = DiskGrid(points=np.array([0.0 + 0j]))
        metric = gram_metric(kernel_frame(bergman_kernel(1, 40), grid))
        fld = curvature(metric, grid, "series")
        value = covariant_derivative(fld, metric, 1, 1)[0][0, 0]
        assert value == pytest.approx(
            bergman_curvature_derivative(1, 1, 1, 0.0))
        assert value == pytest.approx(-2.0)

    def test_fd_route_matches_series(self):
        model = _model(size=16)
        grid = DiskGrid(points=np.array([0.25 + 0.1j]), fd_step=1e-3)
        metric = gram_metric(eigenframe(model, grid))
        f_series = curvature(metric, grid, "series")
        f_fd = curvature(metric, grid, "fd")
        for key in ((1, 0), (0, 1)):
            a = covariant_derivative(f_series, metric, *key)[0]
            b = covariant_derivative(f_fd, metric, *key)[0]
            assert frobenius(a - b) / frobenius(a) < 1e-3

    def test_order_cap(self):
        grid = DiskGrid(points=np.array([0.1 + 0j]))
        metric = gram_metric(kernel_frame(bergman_kernel(1, 20), grid))
        fld = curvature(metric, grid, "series")
        with pytest.raises(PrecisionError):
            covariant_derivative(fld, metric, 2, 1)
        # raising the cap makes the same request legal
        covariant_derivative(fld, metric, 2, 1, max_order=3)


class TestFrameChangeInvariance:
    def test_unitary_change_preserves_eigenvalues(self):
        model = _model(size=20)
        grid = polar_grid(radii=[0.3, 0.5], n_angles=4)
        frame = eigenframe(model, grid)
        g = random_unitary(2, np.random.default_rng(3))
        base = curvature(gram_metric(frame), grid, "series")
        changed = curvature(gram_metric(frame.with_constant_change(g)),
                            grid, "series")
        for mat_a, mat_b in zip(base.values, changed.values):
            eig_a = np.sort_complex(np.linalg.eigvals(mat_a))
            eig_b = np.sort_complex(np.linalg.eigvals(mat_b))
            np.testing.assert_allclose(eig_a, eig_b, atol=1e-10)

    def test_constant_scalar_scaling_leaves_curvature(self):
        grid = polar_grid(radii=[0.4], n_angles=4)
        frame = kernel_frame(bergman_kernel(1, 60), grid)
        base = curvature(gram_metric(frame), grid, "series")
        scaled = curvature(
            gram_metric(frame.with_constant_change(np.array([[3.0 + 1j]]))),
            grid, "series")
        np.testing.assert_allclose(np.asarray(base.values),
                                   np.asarray(scaled.values), rtol=1e-12)


class TestIsometryCheck:
    def test_field_against_itself(self):
        model = _model(size=16)
        grid = polar_grid(radii=[0.3, 0.5], n_angles=4)
        fld, _ = _curvature_with_derivatives(eigenframe(model, grid), grid)
        results = curvature_isometry_check(fld, fld, tol=1e-12)
        for res in results:
            assert res.found and res.residual <= 1e-12
            np.testing.assert_allclose(
                res.unitary @ res.unitary.conj().T, np.eye(2), atol=1e-10)

    def test_constant_unitary_frame_change_found(self):
        model = _model(size=16)
        grid = polar_grid(radii=[0.3, 0.5], n_angles=4)
        frame = eigenframe(model, grid)
        g = random_unitary(2, np.random.default_rng(11))
        fld_a, _ = _curvature_with_derivatives(frame, grid)
        fld_b, _ = _curvature_with_derivatives(frame.with_constant_change(g),
                                               grid)
        results = curvature_isometry_check(fld_a, fld_b, tol=1e-8)
        assert all(r.found for r in results)
        assert max(r.residual for r in results) <= 1e-8

    def test_independent_models_rejected_with_certificate(self):
        grid = polar_grid(radii=[0.3, 0.5], n_angles=4)
        fld_a, _ = _curvature_with_derivatives(
            eigenframe(_model(1, 2, 16, x_seed=5), grid), grid)
        fld_b, _ = _curvature_with_derivatives(
            eigenframe(_model(2, 3, 16, x_seed=9), grid), grid)
        results = curvature_isometry_check(fld_a, fld_b, tol=1e-8)
        assert all(not r.found for r in results)
        assert all(r.certified_mismatch for r in results)

    def test_requires_matching_grids(self):
        model = _model(size=12)
        grid_a = polar_grid(radii=[0.3], n_angles=4)
        grid_b = polar_grid(radii=[0.4], n_angles=4)
        fld_a, _ = _curvature_with_derivatives(eigenframe(model, grid_a), grid_a)
        fld_b, _ = _curvature_with_derivatives(eigenframe(model, grid_b), grid_b)
        with pytest.raises(InvalidArgumentError):
            curvature_isometry_check(fld_a, fld_b, tol=1e-8)

    def test_requires_derivatives(self):
        model = _model(size=12)
        grid = polar_grid(radii=[0.3], n_angles=4)
        metric = gram_metric(eigenframe(model, grid))
        fld = curvature(metric, grid, "series")
        with pytest.raises(InvalidArgumentError):
            curvature_isometry_check(fld, fld, tol=1e-8)

    def test_optional_second_order_tuple(self):
        model = _model(size=12)
        grid = polar_grid(radii=[0.3], n_angles=4)
        keys = ((1, 0), (0, 1), (1, 1))
        fld, _ = _curvature_with_derivatives(eigenframe(model, grid), grid,
                                             keys=keys)
        results = curvature_isometry_check(fld, fld, tol=1e-10,
                                           include_second=True)
        assert all(r.found for r in results)

    def test_degenerate_eigenvalues_take_dense_search(self):
        # equal kernels with zero coupling give scalar curvature matrices,
        # so the Hermitian-part eigenvalues coincide at every point and the
        # sampled-rotation fallback must still find a unitary
        size = 16
        t = shift_from_kernel(bergman_kernel(1, size))
        model = assemble_model(t, t, np.zeros((size, size)))
        grid = DiskGrid(points=np.array([0.3 + 0.2j]))
        frame = eigenframe(model, grid)
        fld_a, _ = _curvature_with_derivatives(frame, grid)
        g = random_unitary(2, np.random.default_rng(4))
        fld_b, _ = _curvature_with_derivatives(frame.with_constant_change(g),
                                               grid)
        gap = np.linalg.eigvalsh(
            0.5 * (fld_a.values[0] + fld_a.values[0].conj().T))
        assert gap[1] - gap[0] < 1e-8
        (result,) = curvature_isometry_check(fld_a, fld_b, tol=1e-8)
        assert result.found and result.residual <= 1e-8
