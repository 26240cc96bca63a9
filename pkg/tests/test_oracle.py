import numpy as np
import pytest

from decotherm.errors import ConsistencyError, ValidationError
from decotherm.linops import relative_entropy, von_neumann_entropy
from decotherm.oracle import (
    FiniteBathEvolution,
    FiniteBathSpec,
    analytic_finite_bath,
    discretize_spectral_density,
    finite_bath_evolve,
    global_quantities_from_joint,
    joint_coherence_factor,
    mode_decoherence_sum,
    mode_interaction_energy,
    product_state_relative_entropy,
)
from decotherm.spectral import SpectralDensity, Temperature, decoherence_eta

FIG1_STATE = np.array([[0.25, 0.25], [0.25, 0.75]], dtype=complex)
OHMIC = SpectralDensity.ohmic(1.0, 1.0)


def default_spec(n_max=8, beta=2.0, n_modes=2, omega_max=30.0):
    modes = discretize_spectral_density(OHMIC, n_modes, omega_max)
    return FiniteBathSpec(modes=tuple(modes), n_max=n_max, beta=beta)


class TestFiniteBathSpec:
    def test_modes_sorted_by_frequency(self):
        spec = FiniteBathSpec(
            modes=((3.0, 0.1), (1.5, 0.2)), n_max=8, beta=2.0
        )
        freqs = [m.frequency for m in spec.modes]
        assert freqs == sorted(freqs)

    def test_thermal_tail_refusal(self):
        with pytest.raises(ValidationError, match="thermal tail"):
            FiniteBathSpec(modes=((1.0, 0.1),), n_max=2, beta=0.2)

    def test_minimum_truncation(self):
        with pytest.raises(ValidationError):
            FiniteBathSpec(modes=((10.0, 0.1),), n_max=1, beta=2.0)

    def test_dimension_guard(self):
        spec = FiniteBathSpec(
            modes=tuple((10.0 + k, 0.05) for k in range(4)), n_max=8, beta=2.0
        )
        assert spec.joint_dimension == 8192
        with pytest.raises(ValidationError, match="guard"):
            finite_bath_evolve(spec, FIG1_STATE, 1.0)


class TestDiscretization:
    def test_single_mode_is_midpoint_rule(self):
        modes = discretize_spectral_density(OHMIC, 1, 10.0)
        assert modes[0].frequency == pytest.approx(5.0, abs=1e-12)
        assert modes[0].weight == pytest.approx(
            float(OHMIC(5.0)) * 10.0, rel=1e-12
        )

    def test_zeroth_moment(self):
        # sum |g_k|^2 -> int J = alpha cutoff^2
        modes = discretize_spectral_density(OHMIC, 64, 30.0)
        assert sum(m.weight for m in modes) == pytest.approx(1.0, abs=1e-9)

    def test_mode_sum_converges_to_integral(self):
        eta_ref = decoherence_eta(OHMIC, Temperature.finite(1.0), 1.0)
        modes = discretize_spectral_density(OHMIC, 64, 30.0)
        eta_64 = mode_decoherence_sum(modes, 1.0, 1.0)
        assert abs(eta_64 - eta_ref) / eta_ref <= 1e-4
        modes_2 = discretize_spectral_density(OHMIC, 2, 30.0)
        eta_2 = mode_decoherence_sum(modes_2, 1.0, 1.0)
        assert abs(eta_2 - eta_ref) > abs(eta_64 - eta_ref)


class TestModeSums:
    def test_zero_time(self):
        spec = FiniteBathSpec(modes=((1.0, 0.5),), n_max=10, beta=2.0)
        eta, h_int = analytic_finite_bath(spec, 0.0)
        assert eta == 0.0 and h_int == 0.0

    def test_single_mode_hand_values(self):
        # omega = 1, g = 0.5, beta = 2, t = pi: (1 - cos pi) = 2
        spec = FiniteBathSpec(modes=((1.0, 0.5),), n_max=10, beta=2.0)
        eta, h_int = analytic_finite_bath(spec, np.pi)
        assert eta == pytest.approx(1.0 / np.tanh(1.0), abs=1e-14)
        assert h_int == pytest.approx(-1.0, abs=1e-14)

    def test_complex_coupling_uses_magnitude(self):
        g = 0.5 * np.exp(0.7j)
        spec = FiniteBathSpec(modes=((1.0, g),), n_max=10, beta=2.0)
        eta, _ = analytic_finite_bath(spec, np.pi)
        assert eta == pytest.approx(1.0 / np.tanh(1.0), abs=1e-14)


class TestJointEvolution:
    def test_zero_time_is_product_state(self):
        spec = default_spec()
        ev = FiniteBathEvolution(spec, FIG1_STATE, omega0=1.0)
        expected = np.kron(FIG1_STATE, ev.operators.env_state)
        assert np.max(np.abs(ev.state(0.0) - expected)) <= 1e-12

    def test_diagonal_system_state_frozen(self):
        spec = default_spec()
        rho_diag = np.diag([0.3, 0.7]).astype(complex)
        ev = FiniteBathEvolution(spec, rho_diag, omega0=1.0)
        for t in (0.5, 2.0, 11.0):
            reduced = ev.reduced_state(t)
            assert np.max(np.abs(reduced - rho_diag)) <= 1e-10

    def test_coherence_matches_characteristic_function(self):
        spec = default_spec()
        ev = FiniteBathEvolution(spec, FIG1_STATE, omega0=1.0)
        ts = np.linspace(0.0, 20.0, 41)
        coh = np.array([abs(ev.reduced_state(t)[0, 1]) for t in ts])
        predicted = 0.25 * joint_coherence_factor(spec, ts)
        assert np.max(np.abs(coh - predicted)) <= 1e-6

    def test_purity_and_populations_constant(self):
        spec = default_spec()
        ev = FiniteBathEvolution(spec, FIG1_STATE, omega0=1.0)
        purity0 = float(np.trace(ev.state(0.0) @ ev.state(0.0)).real)
        for t in (1.0, 7.0):
            state = ev.state(t)
            assert abs(float(np.trace(state @ state).real) - purity0) <= 1e-10
            reduced = ev.reduced_state(t)
            assert abs(reduced[0, 0].real - 0.25) <= 1e-10
            assert abs(reduced[1, 1].real - 0.75) <= 1e-10

    def test_truncation_stability(self):
        ts = np.linspace(0.0, 10.0, 11)
        coh = {}
        for n_max in (8, 10):
            spec = default_spec(n_max=n_max)
            ev = FiniteBathEvolution(spec, FIG1_STATE, omega0=1.0)
            coh[n_max] = np.array([abs(ev.reduced_state(t)[0, 1]) for t in ts])
        assert np.max(np.abs(coh[8] - coh[10])) <= 1e-7


@pytest.fixture(scope="module")
def run():
    spec = default_spec()
    ev = FiniteBathEvolution(spec, FIG1_STATE, omega0=1.0)
    ts = np.linspace(0.0, 20.0, 41)
    traj = [(t, ev.state(t)) for t in ts]
    thermo = global_quantities_from_joint(traj, spec, ev.operators)
    return spec, ev, ts, thermo


class TestGlobalQuantitiesFromJoint:

    def test_zero_time_rows_vanish(self, run):
        _, _, _, thermo = run
        assert thermo.q_gl[0] == 0.0
        assert abs(thermo.sigma_gl[0]) <= 1e-12
        assert abs(thermo.sigma_gl_relent[0]) <= 1e-12

    def test_heat_equals_interaction_change(self, run):
        _, _, _, thermo = run
        delta_hint = thermo.interaction - thermo.interaction[0]
        assert np.max(np.abs(thermo.q_gl - delta_hint)) <= 1e-9

    def test_interaction_matches_mode_sum(self, run):
        spec, _, ts, thermo = run
        predicted = mode_interaction_energy(spec.modes, ts)
        assert np.max(np.abs(thermo.interaction - predicted)) <= 1e-6

    def test_entropy_production_routes_agree(self, run):
        _, _, _, thermo = run
        assert np.max(np.abs(thermo.sigma_gl - thermo.sigma_gl_relent)) <= 1e-6

    def test_relative_entropy_nonnegative(self, run):
        _, _, _, thermo = run
        assert np.min(thermo.sigma_gl_relent) >= 0.0

    def test_inconsistent_temperature_detected(self, run):
        spec, ev, ts, _ = run
        wrong = FiniteBathSpec(modes=spec.modes, n_max=spec.n_max, beta=5.0)
        traj = [(t, ev.state(t)) for t in ts[:9]]
        with pytest.raises(ConsistencyError):
            global_quantities_from_joint(traj, wrong, ev.operators)


class TestProductStateRelativeEntropy:
    def test_matches_generic_on_mild_bath(self):
        # eigenvalues of the product state stay well above round-off here,
        # so the generic eigendecomposition route is trustworthy
        spec = FiniteBathSpec(modes=((1.0, 0.3),), n_max=19, beta=1.0)
        ev = FiniteBathEvolution(spec, FIG1_STATE, omega0=0.7)
        for t in (0.0, 0.9, 2.3):
            state = ev.state(t)
            reduced = ev.reduced_state(t)
            generic = relative_entropy(state, np.kron(reduced, ev.operators.env_state))
            fast = product_state_relative_entropy(state, reduced, ev.operators)
            assert abs(generic - fast) <= 1e-9

    def test_equals_entropy_bookkeeping(self):
        spec = default_spec()
        ev = FiniteBathEvolution(spec, FIG1_STATE, omega0=1.0)
        state = ev.state(1.7)
        reduced = ev.reduced_state(1.7)
        d = product_state_relative_entropy(state, reduced, ev.operators)
        # unitarity: S(rho_SE(t)) = S(rho_S(0)) + S(rho_E_eq)
        s_joint = von_neumann_entropy(state)
        s_env = float(
            -(np.exp(ev.operators.env_log_probs) * ev.operators.env_log_probs).sum()
        )
        env_energy = float(np.trace(ev.operators.environment @ state).real)
        env_energy0 = float(
            np.trace(ev.operators.environment @ ev.state(0.0)).real
        )
        clausius = (
            von_neumann_entropy(reduced)
            - von_neumann_entropy(FIG1_STATE)
            - spec.beta * (env_energy0 - env_energy)
        )
        assert abs(d - clausius) <= 1e-9
        assert abs(s_joint - (von_neumann_entropy(FIG1_STATE) + s_env)) <= 1e-9
