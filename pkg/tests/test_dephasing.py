import numpy as np
import pytest

from decotherm.dephasing import (
    SIGMA_Z,
    TabulatedGenerator,
    TimeGrid,
    analytic_state,
    analytic_trajectory,
    exact_generator,
    integrate_tcl,
)
from decotherm.errors import IntegrationDriftError, ValidationError
from decotherm.liouville import (
    LindbladTerm,
    build_superoperator,
    dephasing_coefficients,
    effective_hamiltonian,
)
from decotherm.spectral import decoherence_eta, rate_gamma

FIG1_STATE = np.array([[0.25, 0.25], [0.25, 0.75]], dtype=complex)


class TestTimeGrid:
    def test_times(self):
        grid = TimeGrid(1.0, 0.25)
        assert np.allclose(grid.times, [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_step_must_divide(self):
        with pytest.raises(ValidationError):
            TimeGrid(1.0, 0.3)

    def test_positive(self):
        with pytest.raises(ValidationError):
            TimeGrid(-1.0, 0.1)


class TestAnalyticState:
    def test_diagonal_state_frozen(self, fig1_params):
        rho = np.diag([0.4, 0.6]).astype(complex)
        for t in (0.0, 1.0, 7.0):
            assert np.max(np.abs(analytic_state(fig1_params, rho, t) - rho)) <= 1e-14

    def test_zero_time_identity(self, fig1_params):
        out = analytic_state(fig1_params, FIG1_STATE, 0.0)
        assert np.max(np.abs(out - FIG1_STATE)) <= 1e-14

    def test_coherence_decay_magnitude(self, fig1_params):
        eta = decoherence_eta(fig1_params.density, fig1_params.temperature, 1.0)
        out = analytic_state(fig1_params, FIG1_STATE, 1.0)
        assert abs(abs(out[0, 1]) - 0.25 * np.exp(-eta)) <= 1e-12

    def test_populations_exact(self, fig1_params):
        out = analytic_state(fig1_params, FIG1_STATE, 3.3)
        assert abs(out[0, 0] - 0.25) <= 1e-14
        assert abs(out[1, 1] - 0.75) <= 1e-14

    def test_trajectory_matches_pointwise(self, fig1_params):
        grid = TimeGrid(2.0, 0.25)
        traj = analytic_trajectory(fig1_params, FIG1_STATE, grid)
        for t, rho in traj:
            ref = analytic_state(fig1_params, FIG1_STATE, t)
            assert np.max(np.abs(rho - ref)) <= 1e-12


class TestExactGenerator:
    def test_zero_time_pure_commutator(self, fig1_params):
        coeffs = dephasing_coefficients(exact_generator(fig1_params, 0.0))
        assert abs(coeffs.gamma[0, 1] - 1j * fig1_params.omega0) <= 1e-12

    def test_gamma_coefficient(self, fig1_params):
        t = 0.8
        rate = rate_gamma(fig1_params.density, fig1_params.temperature, t)
        coeffs = dephasing_coefficients(exact_generator(fig1_params, t))
        assert abs(coeffs.gamma[0, 1] - (1j * 1.0 - 2 * rate)) <= 1e-12

    def test_effective_hamiltonian_is_bare(self, fig1_params):
        k = effective_hamiltonian(exact_generator(fig1_params, 1.5))
        assert np.max(np.abs(k - 0.5 * SIGMA_Z)) <= 1e-12


class TestTabulatedGenerator:
    def test_interpolation_against_direct_quadrature(self, fig1_params):
        grid = TimeGrid(5.0, 0.01)
        gen = TabulatedGenerator(fig1_params, grid)
        rng = np.random.default_rng(3)
        ts = rng.uniform(0.0, 5.0, size=12)
        direct = rate_gamma(fig1_params.density, fig1_params.temperature, ts)
        interp = np.array([gen.rate(float(t)) for t in ts])
        assert np.max(np.abs(direct - interp)) <= 1e-9

    def test_matches_exact_generator_on_grid(self, fig1_params):
        grid = TimeGrid(2.0, 0.5)
        gen = TabulatedGenerator(fig1_params, grid)
        for t in grid.times:
            ref = exact_generator(fig1_params, float(t))
            assert np.max(np.abs(gen(float(t)).matrix - ref.matrix)) <= 1e-10

    def test_out_of_range(self, fig1_params):
        gen = TabulatedGenerator(fig1_params, TimeGrid(1.0, 0.5))
        with pytest.raises(ValidationError):
            gen.rate(2.0)


class TestIntegrateTcl:
    def test_zero_generator_constant(self):
        zero = build_superoperator(np.zeros((2, 2)))
        traj = integrate_tcl(lambda t: zero, FIG1_STATE, TimeGrid(1.0, 0.01))
        for _, rho in traj:
            assert np.max(np.abs(rho - FIG1_STATE)) <= 1e-13

    def test_pure_commutator_preserves_coherence_magnitude(self):
        ham = build_superoperator(0.5 * SIGMA_Z)
        traj = integrate_tcl(lambda t: ham, FIG1_STATE, TimeGrid(4.0, 1e-3))
        for _, rho in traj:
            assert abs(abs(rho[0, 1]) - 0.25) <= 1e-10

    def test_phase_advances_with_bare_frequency(self, fig1_params):
        grid = TimeGrid(3.0, 1e-3)
        gen = TabulatedGenerator(fig1_params, grid)
        traj = integrate_tcl(gen, FIG1_STATE, grid)
        for t, rho in traj[:: len(traj) // 10]:
            expected = np.angle(FIG1_STATE[0, 1]) + fig1_params.omega0 * t
            delta = np.angle(rho[0, 1]) - expected
            delta = (delta + np.pi) % (2 * np.pi) - np.pi
            assert abs(delta) <= 1e-8

    def test_populations_trace_hermiticity(self, fig1_params):
        grid = TimeGrid(3.0, 1e-3)
        gen = TabulatedGenerator(fig1_params, grid)
        traj = integrate_tcl(gen, FIG1_STATE, grid)
        for _, rho in traj:
            assert abs(rho[0, 0].real - 0.25) <= 1e-10
            assert abs(np.trace(rho) - 1.0) <= 1e-10
            assert np.max(np.abs(rho - rho.conj().T)) <= 1e-10

    def test_agrees_with_analytic_solution(self, fig1_params):
        grid = TimeGrid(2.0, 1e-3)
        gen = TabulatedGenerator(fig1_params, grid)
        traj = integrate_tcl(gen, FIG1_STATE, grid)
        reference = analytic_trajectory(fig1_params, FIG1_STATE, grid)
        dev = max(
            np.max(np.abs(a[1] - b[1])) for a, b in zip(traj, reference)
        )
        assert dev <= 1e-8

    def test_positivity_violation_raises(self):
        # a negative-rate dissipator amplifies the coherence past positivity
        amplifier = build_superoperator(
            0.5 * SIGMA_Z, [LindbladTerm(-2.0, SIGMA_Z)]
        )
        with pytest.raises(IntegrationDriftError, match="smaller step"):
            integrate_tcl(lambda t: amplifier, FIG1_STATE, TimeGrid(1.0, 0.01))
