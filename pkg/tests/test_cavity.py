import numpy as np
import pytest

from nmcontrol.cavity import (CavityParams, CavityState, assemble_density,
                              cavity_rhs, concurrence_cavity,
                              integrate_cavity, single_atom_analytic)
from nmcontrol.linalg import concurrence_wootters, validate_density_matrix
from nmcontrol.pulses import StepField


def random_params(rng, lam=None):
    return CavityParams(
        gamma0=rng.uniform(0.5, 3.0),
        lam=rng.uniform(0.2, 2.0) if lam is None else lam,
        alpha1=rng.uniform(0.05, 0.7),
        alpha2=rng.uniform(0.01, 0.2),
    )


class TestRhs:
    def test_lambda_zero_freezes_amplitudes(self):
        p = CavityParams(gamma0=1.0, lam=0.0, alpha1=0.5, alpha2=0.1)
        s = CavityState(c1=0.6, c2=0.8j, d1=0.0j, d2=0.0j)
        d = cavity_rhs(s, 0.3, p, eps1=2.0, eps2=-1.0)
        # with d = 0 and lam = 0 everything except the phase is static
        assert d.c1 == 0 and d.c2 == 0 and d.d1 == 0 and d.d2 == 0
        assert d.v1_minus_v2 == 3.0

    def test_lambda_zero_pure_rotation_of_derivatives(self):
        p = CavityParams(gamma0=1.0, lam=0.0, alpha1=0.4, alpha2=0.0)
        s = CavityState(c1=1.0, c2=0.0j, d1=0.2 + 0.1j, d2=0.05j)
        d = cavity_rhs(s, 0.0, p, eps1=1.5, eps2=0.7)
        assert abs(d.d1 - 1j * 1.5 * s.d1) < 1e-15
        assert abs(d.d2 - 1j * 0.7 * s.d2) < 1e-15

    def test_decoupled_single_mode(self):
        p = CavityParams(gamma0=2.0, lam=0.8, alpha1=0.5, alpha2=0.0)
        s = CavityState(c1=0.7, c2=0.3, d1=0.1 + 0.0j, d2=0.2 + 0.0j)
        d = cavity_rhs(s, 0.0, p, eps1=0.0, eps2=0.0)
        p0 = 0.5 * 2.0 * 0.8
        assert abs(d.d1 - (-0.8 * s.d1 - 0.25 * p0 * s.c1)) < 1e-14
        assert abs(d.d2 - (-0.8 * s.d2)) < 1e-14

    def test_equal_drives_freeze_phase(self):
        p = CavityParams()
        s = CavityState(c1=1.0, c2=0.0j)
        d = cavity_rhs(s, 0.0, p, eps1=1.3, eps2=1.3)
        assert d.v1_minus_v2 == 0.0


class TestSingleAtomAnalytic:
    def test_initial_value(self):
        p = CavityParams(alpha1=0.5, alpha2=0.0)
        assert abs(single_atom_analytic(p, 0.0) - 1.0) < 1e-14

    def test_lambda_zero_constant(self):
        p = CavityParams(lam=0.0, alpha1=0.5, alpha2=0.0)
        t = np.linspace(0, 10, 7)
        assert np.allclose(single_atom_analytic(p, t), 1.0, atol=1e-14)

    def test_degenerate_root_continuity(self):
        # critical damping at alpha1^2 = lam / (2 gamma0)
        lam = 0.05
        a_crit = np.sqrt(lam / 2.0)
        t = np.linspace(0, 4, 9)
        at_crit = single_atom_analytic(
            CavityParams(lam=lam, alpha1=a_crit, alpha2=0.0), t)
        nearby = single_atom_analytic(
            CavityParams(lam=lam, alpha1=a_crit * (1 + 1e-7), alpha2=0.0), t)
        assert np.max(np.abs(at_crit - nearby)) < 1e-6

    def test_requires_alpha2_zero(self):
        with pytest.raises(ValueError):
            single_atom_analytic(CavityParams(alpha2=0.1), 1.0)


class TestIntegrator:
    def test_matches_analytic_oracle(self):
        for a1 in (0.1, 0.5, 0.7):
            p = CavityParams(gamma0=1.0, lam=0.05, alpha1=a1, alpha2=0.0)
            traj = integrate_cavity(p, None, None, 4.0, 2000)
            exact = single_atom_analytic(p, traj.times)
            assert np.max(np.abs(np.abs(traj.c1) - np.abs(exact))) < 1e-6

    def test_step_halving_converged(self):
        p = CavityParams(gamma0=1.0, lam=0.05, alpha1=0.5, alpha2=0.1)
        c_a = integrate_cavity(p, None, None, 4.0, 2000).c1[-1]
        c_b = integrate_cavity(p, None, None, 4.0, 4000).c1[-1]
        assert abs(abs(c_a) - abs(c_b)) < 1e-8

    def test_rk4_order_against_oracle(self):
        # halving the step should shrink the error roughly 16x
        p = CavityParams(gamma0=2.0, lam=1.5, alpha1=0.6, alpha2=0.0)
        errs = []
        for steps in (200, 400):
            traj = integrate_cavity(p, None, None, 4.0, steps)
            exact = single_atom_analytic(p, traj.times)
            errs.append(np.max(np.abs(traj.c1 - exact)))
        ratio = errs[0] / errs[1]
        assert 10.0 < ratio < 25.0

    def test_lambda_zero_frozen(self):
        p = CavityParams(lam=0.0, alpha1=0.5, alpha2=0.1)
        traj = integrate_cavity(p, 1.0, -2.0, 3.0, 500, 0.6, 0.8)
        assert np.max(np.abs(traj.c1 - 0.6)) < 1e-12
        assert np.max(np.abs(traj.c2 - 0.8)) < 1e-12
        assert np.max(np.abs(traj.concurrence_series()
                             - traj.concurrence_series()[0])) < 1e-12

    def test_norm_never_exceeds_one(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            p = random_params(rng)
            f1 = StepField(rng.uniform(-5, 5, 8), 2.0)
            f2 = StepField(rng.uniform(-5, 5, 8), 2.0)
            traj = integrate_cavity(p, f1, f2, 2.0, 1000)
            norm = np.abs(traj.c1) ** 2 + np.abs(traj.c2) ** 2
            assert norm.max() <= 1.0 + 1e-8

    def test_engines_agree(self):
        rng = np.random.default_rng(12)
        p = random_params(rng)
        f1 = StepField(rng.uniform(-3, 3, 10), 1.5)
        a = integrate_cavity(p, f1, None, 1.5, 500, engine="numba")
        b = integrate_cavity(p, f1, None, 1.5, 500, engine="python")
        assert np.max(np.abs(a.c1 - b.c1)) < 1e-12
        assert np.max(np.abs(a.c2 - b.c2)) < 1e-12
        assert np.max(np.abs(a.phase - b.phase)) < 1e-12

    def test_global_drive_keeps_phase_zero(self):
        rng = np.random.default_rng(13)
        p = random_params(rng)
        f = StepField(rng.uniform(-4, 4, 16), 1.0)
        traj = integrate_cavity(p, f, f, 1.0, 800)
        assert np.max(np.abs(traj.phase)) == 0.0

    def test_input_validation(self):
        p = CavityParams()
        with pytest.raises(ValueError):
            integrate_cavity(p, None, None, 1.0, 50)  # too few steps
        with pytest.raises(ValueError):
            integrate_cavity(p, None, None, 1.0, 200, 1.0, 1.0)  # bad norm
        with pytest.raises(ValueError):
            integrate_cavity(p, lambda t: np.inf, None, 1.0, 200)


class TestDensityAssembly:
    def test_excited_atom_one(self):
        rho = assemble_density(CavityState(c1=1.0, c2=0.0j))
        expect = np.zeros((4, 4))
        expect[2, 2] = 1.0
        assert np.allclose(rho, expect)

    def test_balanced_superposition_is_maximally_entangled(self):
        s = CavityState(c1=1 / np.sqrt(2), c2=1 / np.sqrt(2))
        rho = assemble_density(s)
        assert abs(concurrence_wootters(rho) - 1.0) < 1e-12

    def test_random_states_are_valid_densities(self):
        rng = np.random.default_rng(14)
        for _ in range(20):
            c = rng.normal(size=2) + 1j * rng.normal(size=2)
            c *= rng.uniform(0, 1) / np.linalg.norm(c)
            rho = assemble_density((c[0], c[1]))
            validate_density_matrix(rho)

    def test_norm_violation_rejected(self):
        with pytest.raises(ValueError):
            assemble_density((1.0, 0.5))

    def test_matches_wootters_on_trajectory(self):
        rng = np.random.default_rng(15)
        p = random_params(rng)
        f1 = StepField(rng.uniform(-4, 4, 8), 2.0)
        traj = integrate_cavity(p, f1, None, 2.0, 600)
        for i in range(0, len(traj), 60):
            s = traj.state(i)
            assert abs(concurrence_cavity(s)
                       - concurrence_wootters(assemble_density(s))) < 1e-8


class TestConcurrenceCavity:
    def test_no_entanglement_for_single_amplitude(self):
        assert concurrence_cavity((1.0, 0.0)) == 0.0

    def test_known_value(self):
        assert abs(concurrence_cavity((0.6, 0.3j)) - 0.36) < 1e-14


class TestParams:
    def test_p0(self):
        assert CavityParams(gamma0=2.0, lam=0.3).p0 == 0.3

    def test_validation(self):
        with pytest.raises(ValueError):
            CavityParams(gamma0=0.0)
        with pytest.raises(ValueError):
            CavityParams(lam=-1.0)
        with pytest.raises(ValueError):
            CavityParams(alpha1=-0.1)
