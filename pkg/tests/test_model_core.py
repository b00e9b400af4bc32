import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from intreg.model_core import (AbstractLinearSystem, DisturbanceScenario,
                               HyperbolicSystem, eval_coefficients,
                               saint_venant_system, system_from_dict,
                               system_to_dict, transport_system,
                               validate_hyperbolic)

from conftest import random_hyperbolic


class TestValidation:
    def test_transport_is_clean(self):
        assert validate_hyperbolic(transport_system()) == []

    def test_saint_venant_is_clean(self):
        assert validate_hyperbolic(saint_venant_system()) == []

    def test_zero_speed_sample_names_sign_pattern(self):
        sys = transport_system(grid_points=11)
        samples = sys.lambda0_samples.copy()
        samples[4, 0] = 0.0
        broken = HyperbolicSystem(
            n=1, ell=1, m=1, lambda0_samples=samples,
            lambda1_samples=sys.lambda1_samples, K=sys.K, B=sys.B,
            L1=sys.L1, L2=sys.L2, grid_points=11)
        report = validate_hyperbolic(broken)
        assert len(report) == 1
        assert "sign pattern" in report[0]
        assert "grid index 4" in report[0]

    def test_wrong_ell_flags_every_negative_component(self):
        sys = saint_venant_system()
        flipped = HyperbolicSystem(
            n=2, ell=2, m=2, lambda0_samples=sys.lambda0_samples,
            lambda1_samples=sys.lambda1_samples, K=sys.K, B=sys.B,
            L1=sys.L1, L2=sys.L2)
        report = validate_hyperbolic(flipped)
        assert any("lambda_2" in line for line in report)

    def test_nonfinite_coefficients_reported(self):
        sys = transport_system(grid_points=11)
        samples = sys.lambda0_samples.copy()
        samples[3, 0] = np.nan
        broken = HyperbolicSystem(
            n=1, ell=1, m=1, lambda0_samples=samples,
            lambda1_samples=sys.lambda1_samples, K=sys.K, B=sys.B,
            L1=sys.L1, L2=sys.L2, grid_points=11)
        assert any("non-finite" in line for line in validate_hyperbolic(broken))

    def test_validation_is_pure(self):
        sys = saint_venant_system()
        assert validate_hyperbolic(sys) == validate_hyperbolic(sys)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_random_valid_systems_pass(self, seed):
        sys = random_hyperbolic(np.random.default_rng(seed))
        assert validate_hyperbolic(sys) == []


class TestEvalCoefficients:
    def test_constant_coefficients(self):
        sys = HyperbolicSystem.from_constant(
            lambda0=[1.0, -1.0], lambda1=np.zeros((2, 2)),
            K=np.zeros((2, 2)), B=np.eye(2), L1=np.zeros((2, 2)),
            L2=np.eye(2), ell=1)
        lam0, lam1, dlam0 = eval_coefficients(sys, 0.37)
        np.testing.assert_allclose(lam0, np.diag([1.0, -1.0]))
        np.testing.assert_allclose(lam1, np.zeros((2, 2)))
        assert np.max(np.abs(dlam0)) <= 1e-12

    def test_affine_coefficient_derivative(self):
        sys = HyperbolicSystem.from_callables(
            n=1, ell=1, m=1, lambda0=lambda s: [1.0 + s], lambda1=np.zeros((1, 1)),
            K=[[0.0]], B=[[1.0]], L1=[[0.0]], L2=[[1.0]])
        _, _, dlam0 = eval_coefficients(sys, 0.5)
        np.testing.assert_allclose(dlam0[0, 0], 1.0, atol=1e-10)

    def test_endpoint_one_sided(self):
        sys = HyperbolicSystem.from_callables(
            n=1, ell=1, m=1, lambda0=lambda s: [1.0 + s], lambda1=np.zeros((1, 1)),
            K=[[0.0]], B=[[1.0]], L1=[[0.0]], L2=[[1.0]])
        lam0, _, dlam0 = eval_coefficients(sys, 1.0)
        np.testing.assert_allclose(lam0[0, 0], 2.0)
        np.testing.assert_allclose(dlam0[0, 0], 1.0, atol=1e-10)

    @pytest.mark.parametrize("s", [-0.1, 1.0000001, 2.0])
    def test_domain_error(self, s):
        with pytest.raises(ValueError):
            eval_coefficients(transport_system(), s)

    @pytest.mark.parametrize("grid_points", [11, 51, 201])
    def test_constant_derivative_vanishes_at_any_grid(self, grid_points):
        sys = saint_venant_system(grid_points=grid_points)
        for s in (0.0, 0.123, 0.5, 1.0):
            _, _, dlam0 = eval_coefficients(sys, s)
            assert np.max(np.abs(dlam0)) <= 1e-12

    def test_interpolation_refinement_converges(self):
        f = lambda s: [1.5 + 0.4 * np.sin(3.0 * s)]
        mk = lambda G: HyperbolicSystem.from_callables(
            n=1, ell=1, m=1, lambda0=f, lambda1=np.zeros((1, 1)),
            K=[[0.0]], B=[[1.0]], L1=[[0.0]], L2=[[1.0]], grid_points=G)
        coarse, fine = mk(101), mk(201)
        pts = np.linspace(0.003, 0.997, 17)
        err = lambda sys: max(
            abs(eval_coefficients(sys, s)[0][0, 0] - f(s)[0]) for s in pts)
        e_c, e_f = err(coarse), err(fine)
        assert e_f <= 0.6 * e_c  # at least linear in the grid spacing

    def test_analytic_derivative_hook(self):
        sys = HyperbolicSystem.from_callables(
            n=1, ell=1, m=1, lambda0=lambda s: [np.exp(s)], lambda1=np.zeros((1, 1)),
            K=[[0.0]], B=[[1.0]], L1=[[0.0]], L2=[[1.0]],
            lambda0_prime=lambda s: [np.exp(s)])
        _, _, dlam0 = eval_coefficients(sys, 0.25)
        np.testing.assert_allclose(dlam0[0, 0], np.exp(0.25), rtol=1e-9)


class TestJsonInterface:
    def test_round_trip(self):
        sys = saint_venant_system(c=1.3, d=0.7, k0=0.2, k1=-0.4, b0=1.5, b1=-0.8)
        scen = DisturbanceScenario(w_b=[0.1, -0.2], w_y=[0.0, 0.3], y_ref=[1.0, 2.0])
        back, scen_back = system_from_dict(system_to_dict(sys, scen))
        np.testing.assert_allclose(back.lambda0_samples, sys.lambda0_samples)
        np.testing.assert_allclose(back.lambda1_samples, sys.lambda1_samples)
        np.testing.assert_allclose(back.K, sys.K)
        np.testing.assert_allclose(back.L2, sys.L2)
        np.testing.assert_allclose(scen_back.y_ref, [1.0, 2.0])
        np.testing.assert_allclose(scen_back.w_b, [0.1, -0.2])

    def test_constant_spec(self):
        doc = {
            "n": 1, "ell": 1, "m": 1,
            "lambda0": {"constant": [2.0]},
            "lambda1": {"constant": [[0.5]]},
            "K": [[0.0]], "B": [[1.0]], "L1": [[0.0]], "L2": [[1.0]],
        }
        sys, scen = system_from_dict(doc)
        assert scen is None
        assert np.all(sys.lambda0_samples == 2.0)
        assert np.all(sys.lambda1_samples == 0.5)

    def test_sampled_spec_resampled_onto_grid(self):
        doc = {
            "n": 1, "ell": 1, "m": 1, "grid_points": 11,
            "lambda0": {"samples": [[0.0, 1.0], [1.0, 3.0]]},
            "lambda1": {"constant": [[0.0]]},
            "K": [[0.0]], "B": [[1.0]], "L1": [[0.0]], "L2": [[1.0]],
        }
        sys, _ = system_from_dict(doc)
        np.testing.assert_allclose(sys.lambda0_samples[:, 0], np.linspace(1.0, 3.0, 11))

    def test_missing_key_raises(self):
        with pytest.raises(ValueError):
            system_from_dict({"n": 1})

    def test_scenario_dimension_check(self):
        sys = transport_system()
        scen = DisturbanceScenario(w_b=[0.0, 0.0], w_y=[0.0], y_ref=[1.0])
        errs = scen.check(sys)
        assert len(errs) == 1 and "w_b" in errs[0]


class TestAbstractLinearSystem:
    def test_vector_inputs_promoted(self):
        sys = AbstractLinearSystem(A=[[-1.0, 0.0], [0.0, -2.0]],
                                   B=[1.0, 1.0], C=[1.0, 0.0])
        assert sys.B.shape == (2, 1)
        assert sys.C.shape == (1, 2)
        assert sys.N == 2 and sys.m == 1

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            AbstractLinearSystem(A=np.eye(2), B=np.ones((3, 1)), C=np.ones((1, 2)))
        with pytest.raises(ValueError):
            AbstractLinearSystem(A=np.ones((2, 3)), B=np.ones((2, 1)),
                                 C=np.ones((1, 2)))
