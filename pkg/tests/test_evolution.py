import numpy as np
import pytest
from scipy.linalg import expm

from gaussbath.errors import NumericalOverflowError, NumericalQualityError, StepSizeError, ValidationError
from gaussbath.evolution import (
    IntegrationGrid,
    evolve_state,
    integrate,
    project_symplectic,
    rk4_step,
    symplectic_defect,
)
from gaussbath.gaussian import QuadraticHamiltonian, entropy, symplectic_form
from gaussbath.models import CavityModelSpec, ChainModelSpec, DrivenHamiltonian, SwitchingProfile, initial_joint_state


def small_cavity(coupling=0.2):
    return CavityModelSpec(3, 1.0, 2.5, coupling, 0.5, 1.0, SwitchingProfile(1.0, 4.0))


class TestGrid:
    def test_uniform(self):
        g = IntegrationGrid.uniform(0, 1, 0.01, 4)
        assert g.n_steps == 100
        assert list(g.sample_steps) == [0, 25, 50, 75, 100]

    def test_rejects_off_grid(self):
        with pytest.raises(ValidationError):
            IntegrationGrid(0, 1, 0.3)
        with pytest.raises(ValidationError):
            IntegrationGrid(0, 1, 0.01, (0.0, 0.505))
        with pytest.raises(ValidationError):
            IntegrationGrid(0, 1, -0.1)


class TestIntegrate:
    def test_free_mode_is_rotation(self):
        w = 1.3

        def H(t):
            return QuadraticHamiltonian(0.5 * w * np.eye(2))

        (p,) = integrate(H, IntegrationGrid(0, 2.0, 1e-3, (2.0,)))
        c, s = np.cos(w * 2.0), np.sin(w * 2.0)
        assert np.allclose(p.S, [[c, s], [-s, c]], atol=1e-10)

    def test_constant_matches_expm(self):
        rng = np.random.default_rng(0)
        M = rng.normal(size=(4, 4))
        F = np.eye(4) * 2 + 0.2 * (M + M.T)
        om = symplectic_form(2)
        props = integrate(lambda t: QuadraticHamiltonian(F), IntegrationGrid.uniform(0, 1.0, 1e-3, 4))
        for p in props:
            assert np.allclose(p.S, expm(om @ (F + F.T) * p.t), atol=1e-9)
            assert p.defect < 1e-10

    def test_fast_path_matches_generic(self):
        H = small_cavity().driven_hamiltonian()
        grid = IntegrationGrid.uniform(0, 4.0, 2e-3, 8)
        fast = integrate(H, grid)
        slow = integrate(lambda t: H(t), grid)
        for a, b in zip(fast, slow):
            assert a.t == b.t
            assert np.max(np.abs(a.S - b.S)) < 1e-11

    def test_no_coupling_stays_block_diagonal(self):
        H = small_cavity(coupling=0.0).driven_hamiltonian()
        (p,) = integrate(H, IntegrationGrid(0, 4.0, 1e-3, (4.0,)))
        for i in range(4):
            for j in range(4):
                if i != j:
                    assert np.allclose(p.S[2 * i : 2 * i + 2, 2 * j : 2 * j + 2], 0)

    def test_step_matches_manual_rk4(self):
        H = small_cavity().driven_hamiltonian()
        om = symplectic_form(4)
        S = np.eye(8)
        for k in range(250):
            S = rk4_step(lambda t: om @ H(t).F_s, k * 2e-3, 2e-3, S)
        (p,) = integrate(H, IntegrationGrid(0, 0.5, 2e-3, (0.5,)))
        assert np.max(np.abs(p.S - S)) < 1e-12

    def test_coarse_step_aborts(self):
        H = small_cavity().driven_hamiltonian()
        with pytest.raises(StepSizeError, match="reduce dt"):
            integrate(H, IntegrationGrid.uniform(0, 4.0, 0.1, 4))

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_overflow_detected(self):
        def H(t):
            return QuadraticHamiltonian(np.diag([-1.0, 1.0]) * 400)

        with pytest.raises(NumericalOverflowError):
            integrate(H, IntegrationGrid(0, 10.0, 0.01, (10.0,)), defect_limit=np.inf)

    def test_chain_defect_small(self):
        spec = ChainModelSpec(5, 4.0, 0.15, 0.15, 1.0, 10.0, SwitchingProfile(2.0, 10.0))
        props = integrate(spec.driven_hamiltonian(), IntegrationGrid.uniform(0, 10.0, 1e-3, 10))
        assert max(p.defect for p in props) < 1e-10


class TestProjection:
    def test_projection_reduces_defect(self):
        rng = np.random.default_rng(1)
        S = expm(symplectic_form(2) @ np.diag([1.0, 2.0, 0.5, 1.5])) + 1e-7 * rng.normal(size=(4, 4))
        assert symplectic_defect(project_symplectic(S)) < 1e-3 * symplectic_defect(S)

    def test_optional_projection_path(self):
        H = small_cavity().driven_hamiltonian()
        grid = IntegrationGrid.uniform(0, 4.0, 2e-3, 2)
        plain = integrate(H, grid)
        projected = integrate(H, grid, project=True)
        assert projected[-1].defect <= plain[-1].defect + 1e-15
        assert np.allclose(plain[-1].S, projected[-1].S, atol=1e-9)


class TestEvolveState:
    def test_identity(self):
        sigma = initial_joint_state(small_cavity())
        assert np.array_equal(evolve_state(sigma, np.eye(8)), sigma)

    def test_vacuum_rotation_invariant(self):
        c, s = np.cos(0.7), np.sin(0.7)
        R = np.array([[c, s], [-s, c]])
        assert np.allclose(evolve_state(np.eye(2), R), np.eye(2))

    def test_entropy_conserved(self):
        spec = small_cavity()
        sigma0 = initial_joint_state(spec)
        props = integrate(spec.driven_hamiltonian(), IntegrationGrid.uniform(0, 4.0, 1e-3, 4))
        for p in props:
            assert abs(entropy(evolve_state(sigma0, p)) - entropy(sigma0)) < 1e-9

    def test_rejects_unphysical_result(self):
        with pytest.raises(NumericalQualityError):
            evolve_state(np.eye(2), 0.9 * np.eye(2))

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ValidationError):
            evolve_state(np.eye(4), np.eye(2))


def test_driven_hamiltonian_callable():
    H = DrivenHamiltonian(np.eye(2), np.zeros((2, 2)), lambda t: 1.0)
    assert H.n_modes == 1
    assert np.array_equal(H(0.3).F, np.eye(2))
