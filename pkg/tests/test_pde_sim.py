import numpy as np
import pytest

from intreg.errors import ConfigError
from intreg.fundamental_solutions import integrate_phi, integrate_psi
from intreg.gain_design import GainCertificate, GainChoice, build_rank_report
from intreg.model_core import DisturbanceScenario, LyapunovWeight
from intreg.pde_sim import (Trajectory, compute_equilibrium,
                            equilibrium_residuals, evaluate_V, evaluate_Ve,
                            forwarding_kernel, simulate, simulate_open_loop)

from conftest import random_hyperbolic


def with_gain(cert, ki):
    return GainCertificate(
        Ki=cert.Ki, ki=ki, ki_star=cert.ki_star, ki_certifiable=cert.ki_certifiable,
        p=cert.p, p_max=cert.p_max, mu_e=cert.mu_e, rank_report=cert.rank_report,
        iss=cert.iss, psi_bar=cert.psi_bar, m_norm=cert.m_norm)


def scalar_weight(mu=1.0, p=1.0, sign=1.0, grid_points=201):
    s = np.linspace(0.0, 1.0, grid_points)
    samples = p * np.exp(-sign * mu * s)[:, None]
    return LyapunovWeight(samples=samples, s_grid=s, mu=mu,
                          P_lower=float(samples.min()), P_upper=float(samples.max()),
                          S_margin=1.0, param={"p": [p], "signs": [sign]})


class TestEquilibrium:
    def test_homogeneous_case_is_zero(self, transport, transport_cert):
        scen = DisturbanceScenario.quiescent(transport)
        eq = compute_equilibrium(transport, transport_cert, scen)
        assert np.max(np.abs(eq.phi_inf)) == 0.0
        assert np.max(np.abs(eq.z_inf)) == 0.0

    def test_transport_reference_tracking(self, transport, transport_cert):
        scen = DisturbanceScenario.quiescent(transport, y_ref=[1.0])
        eq = compute_equilibrium(transport, GainChoice(ki=0.3, Ki=transport_cert.Ki),
                                 scen)
        np.testing.assert_allclose(eq.phi_inf, 1.0, atol=1e-12)
        np.testing.assert_allclose(eq.u_inf, [1.0], atol=1e-12)
        np.testing.assert_allclose(eq.z_inf, [-10.0 / 3.0], rtol=1e-12)

    def test_residuals_on_random_systems(self):
        count = 0
        attempt = 0
        while count < 10 and attempt < 60:
            attempt += 1
            rng = np.random.default_rng(3000 + attempt)
            sys = random_hyperbolic(rng)
            rr = build_rank_report(sys, integrate_phi(sys, steps=200),
                                   integrate_psi(sys, steps=200))
            if not (rr.passes_A3 and rr.passes_A4):
                continue
            if max(rr.cond_t1, rr.cond_t2) > 1e6:
                continue
            Ki = np.linalg.inv(rr.t2)
            scen = DisturbanceScenario(
                w_b=rng.uniform(-1, 1, sys.n), w_y=rng.uniform(-1, 1, sys.m),
                y_ref=rng.uniform(-1, 1, sys.m))
            eq = compute_equilibrium(sys, GainChoice(ki=0.4, Ki=Ki), scen,
                                     n_nodes=257)
            bc, out = equilibrium_residuals(sys, eq, scen)
            assert bc <= 1e-9 and out <= 1e-9
            count += 1
        assert count == 10

    def test_requires_positive_gain(self, transport, transport_cert):
        scen = DisturbanceScenario.quiescent(transport)
        with pytest.raises(ValueError):
            compute_equilibrium(transport, GainChoice(ki=0.0, Ki=transport_cert.Ki),
                                scen)


class TestLyapunovFunctionals:
    def test_zero_field(self):
        w = scalar_weight()
        s = np.linspace(0, 1, 101)
        assert evaluate_V(w, np.zeros((1, 101)), s) == 0.0

    def test_unit_weight_unit_field(self):
        w = scalar_weight(mu=0.0)
        s = np.linspace(0, 1, 101)
        assert evaluate_V(w, np.ones((1, 101)), s) == pytest.approx(1.0, abs=1e-12)

    def test_exponential_weight_closed_form(self):
        w = scalar_weight(mu=1.0)
        s = np.linspace(0, 1, 201)
        V = evaluate_V(w, np.ones((1, 201)), s)
        assert V == pytest.approx(1.0 - np.exp(-1.0), abs=1e-5)

    def test_ve_reduces_to_v_on_manifold(self):
        w = scalar_weight(mu=1.0)
        s = np.linspace(0, 1, 201)
        kernel = np.broadcast_to(np.array([[1.0]]), (201, 1, 1))
        phi = np.ones((1, 201))
        z = np.trapezoid(np.ones(201), s) * np.ones(1)  # z = forwarding image
        V = evaluate_V(w, phi, s)
        Ve = evaluate_Ve(w, kernel, p=0.7, phi=phi, z=z, s_grid=s)
        assert Ve == pytest.approx(V, rel=1e-14)

    def test_zero_field_gives_pz2(self):
        w = scalar_weight()
        s = np.linspace(0, 1, 101)
        Ve = evaluate_Ve(w, np.array([[1.0]]), p=0.7, phi=np.zeros((1, 101)),
                         z=np.array([2.0]), s_grid=s)
        assert Ve == pytest.approx(0.7 * 4.0, rel=1e-14)

    def test_transport_forwarding_value_hand_integral(self, transport, transport_cert):
        # M = -1, Psi = 1, phi = 1: forwarding image is -1, so
        # Ve = V + p |z + 1|^2.
        psi = integrate_psi(transport, steps=200)
        kernel = forwarding_kernel(transport_cert.rank_report.m_matrix, psi.samples)
        w = transport_cert.iss.weight
        s = psi.s_values
        phi = np.ones((1, 201))
        z = np.array([0.5])
        Ve = evaluate_Ve(w, kernel, p=0.3, phi=phi, z=z, s_grid=s)
        expected = evaluate_V(w, phi, s) + 0.3 * (0.5 + 1.0) ** 2
        assert Ve == pytest.approx(expected, rel=1e-12)


class TestClosedLoopSimulation:
    def test_transport_regulates_reference(self, transport, transport_cert):
        scen = DisturbanceScenario.quiescent(transport, y_ref=[1.0])
        traj = simulate(transport, with_gain(transport_cert, 0.3), scen,
                        T=60.0, cfl=0.9, n_cells=200, store_states=False)
        assert abs(traj.outputs[-1][0] - 1.0) <= 1e-2

    @pytest.mark.parametrize("case", ["transport", "transport-disturbed", "saintvenant"])
    def test_equilibrium_is_preserved(self, case, transport, transport_cert,
                                      saint_venant, saint_venant_cert):
        if case.startswith("transport"):
            system, cert = transport, with_gain(transport_cert, 0.3)
            if case == "transport-disturbed":
                scen = DisturbanceScenario(w_b=[0.2], w_y=[-0.1], y_ref=[1.0])
            else:
                scen = DisturbanceScenario.quiescent(system, y_ref=[1.0])
        else:
            system, cert = saint_venant, saint_venant_cert
            scen = DisturbanceScenario.quiescent(system, y_ref=[0.5, -0.25])
        eq = compute_equilibrium(system, cert, scen, n_nodes=201)
        traj = simulate(system, cert, scen, T=10.0, phi0=eq.phi_inf, z0=eq.z_inf,
                        cfl=0.9, n_cells=200)
        drift = max(np.max(np.abs(frame)) for frame in traj.states)
        assert drift <= 1e-8
        assert np.max(np.abs(traj.z - eq.z_inf)) <= 1e-8

    def test_saint_venant_error_decays_exponentially(self, saint_venant,
                                                     saint_venant_cert):
        scen = DisturbanceScenario.quiescent(saint_venant, y_ref=[1.0, 0.5])
        rng = np.random.default_rng(4)
        phi0 = rng.standard_normal((2, 201)) * 0.3
        traj = simulate(saint_venant, saint_venant_cert, scen, T=20.0, phi0=phi0,
                        cfl=0.9, n_cells=200, record_every=5, store_states=False)
        t, Ve = traj.times, traj.Ve
        half = t >= 10.0
        slope = np.polyfit(t[half], np.log(np.maximum(Ve[half], 1e-300)), 1)[0]
        assert -slope > 0

    def test_open_loop_iss_bound(self, transport, transport_cert):
        w = transport_cert.iss.weight
        u0 = np.array([1.0])
        traj = simulate_open_loop(transport, u0, w, T=20.0, cfl=0.9, n_cells=200)
        bound = transport_cert.c / w.mu * float(u0 @ u0)
        tail = traj.V[len(traj.V) // 2:]
        assert np.max(tail) <= bound * 1.05

    def test_cfl_validation(self, transport, transport_cert):
        scen = DisturbanceScenario.quiescent(transport)
        for cfl in (0.0, 1.5, -0.1):
            with pytest.raises(ConfigError):
                simulate(transport, transport_cert, scen, T=1.0, cfl=cfl, n_cells=50)

    def test_distributed_disturbance_rejected(self, transport, transport_cert):
        scen = DisturbanceScenario(w_b=[0.0], w_y=[0.0], y_ref=[0.0],
                                   w_dist=np.zeros(10))
        with pytest.raises(ConfigError):
            simulate(transport, transport_cert, scen, T=1.0, n_cells=50)

    def test_gain_warning_flag(self, transport, transport_cert):
        scen = DisturbanceScenario.quiescent(transport)
        traj = simulate(transport, with_gain(transport_cert, 2.0), scen,
                        T=1.0, n_cells=50, store_states=False)
        assert traj.metadata["gain_warning"]

    def test_cfl_number_recorded_below_request(self, transport, transport_cert):
        scen = DisturbanceScenario.quiescent(transport)
        traj = simulate(transport, transport_cert, scen, T=1.0, cfl=0.7,
                        n_cells=50, store_states=False)
        assert traj.metadata["cfl"] <= 0.7 + 1e-12


class TestTrajectoryInvariants:
    def test_frame_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            Trajectory(times=np.array([0.0, 1.0]), z=np.zeros((1, 1)),
                       outputs=np.zeros((2, 1)), norm_phi=np.zeros(2),
                       V=np.zeros(2), Ve=np.zeros(2))

    def test_nonmonotone_times_rejected(self):
        with pytest.raises(ValueError):
            Trajectory(times=np.array([0.0, 0.0]), z=np.zeros((2, 1)),
                       outputs=np.zeros((2, 1)), norm_phi=np.zeros(2),
                       V=np.zeros(2), Ve=np.zeros(2))

    def test_cfl_above_one_rejected(self):
        with pytest.raises(ValueError):
            Trajectory(times=np.array([0.0]), z=np.zeros((1, 1)),
                       outputs=np.zeros((1, 1)), norm_phi=np.zeros(1),
                       V=np.zeros(1), Ve=np.zeros(1), metadata={"cfl": 1.2})
