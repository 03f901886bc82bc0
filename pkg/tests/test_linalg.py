import numpy as np
import pytest

from nmcontrol.linalg import (bell_phi_plus, concurrence_wootters,
                              hermitian_expm, partial_trace, pauli_on_site,
                              state_fidelity, trace_distance,
                              validate_density_matrix)


def random_density(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_pure(rng, dim):
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)


def brute_force_partial_trace(rho, keep, n):
    """Independent oracle: explicit index contraction over bit strings."""
    rest = [q for q in range(n) if q not in keep]
    dk = 2 ** len(keep)
    out = np.zeros((dk, dk), dtype=complex)

    def full_index(keep_bits, rest_bits):
        bits = [0] * n
        for q, b in zip(keep, keep_bits):
            bits[q] = b
        for q, b in zip(rest, rest_bits):
            bits[q] = b
        return int("".join(map(str, bits)), 2)

    def unpack(i, width):
        return [(i >> (width - 1 - k)) & 1 for k in range(width)]

    for i in range(dk):
        for j in range(dk):
            for r in range(2 ** len(rest)):
                rb = unpack(r, len(rest))
                out[i, j] += rho[full_index(unpack(i, len(keep)), rb),
                                 full_index(unpack(j, len(keep)), rb)]
    return out


class TestPartialTrace:
    def test_product_state_factorizes(self):
        rng = np.random.default_rng(0)
        rho_a = random_density(rng, 2)
        rho_b = random_density(rng, 4)
        rho = np.kron(rho_a, rho_b)
        assert np.allclose(partial_trace(rho, [0]), rho_a, atol=1e-12)
        assert np.allclose(partial_trace(rho, [1, 2]), rho_b, atol=1e-12)

    def test_bell_marginal_is_maximally_mixed(self):
        rho = np.outer(bell_phi_plus(), bell_phi_plus().conj())
        assert np.allclose(partial_trace(rho, [0]), np.eye(2) / 2, atol=1e-12)

    def test_keep_everything_returns_input(self):
        rng = np.random.default_rng(1)
        rho = random_density(rng, 8)
        assert np.allclose(partial_trace(rho, [0, 1, 2]), rho, atol=1e-14)

    def test_against_brute_force_oracle(self):
        rng = np.random.default_rng(2)
        rho = random_density(rng, 8)
        for keep in ([0, 1], [2], [1, 2], [2, 0]):
            expected = brute_force_partial_trace(rho, keep, 3)
            assert np.allclose(partial_trace(rho, keep), expected, atol=1e-12)

    def test_trace_and_psd_preserved(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            rho = random_density(rng, 8)
            red = partial_trace(rho, [0, 2])
            assert abs(np.trace(red).real - 1.0) < 1e-12
            assert np.linalg.eigvalsh(red).min() > -1e-12

    def test_errors(self):
        rho = np.eye(4, dtype=complex) / 4
        with pytest.raises(ValueError):
            partial_trace(rho, [0, 0])
        with pytest.raises(ValueError):
            partial_trace(rho, [2])


class TestTraceDistance:
    def test_identical_states(self):
        rng = np.random.default_rng(4)
        rho = random_density(rng, 4)
        assert trace_distance(rho, rho) == 0.0

    def test_orthogonal_pure_states(self):
        e10 = np.zeros(4, dtype=complex)
        e10[2] = 1
        e01 = np.zeros(4, dtype=complex)
        e01[1] = 1
        d = trace_distance(np.outer(e10, e10.conj()), np.outer(e01, e01.conj()))
        assert abs(d - 1.0) < 1e-14

    def test_diagonal_states(self):
        for p, q in [(0.3, 0.8), (0.0, 1.0), (0.55, 0.54)]:
            d = trace_distance(np.diag([p, 1 - p]).astype(complex),
                               np.diag([q, 1 - q]).astype(complex))
            assert abs(d - abs(p - q)) < 1e-14

    def test_symmetry_and_triangle_inequality(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            a, b, c = (random_density(rng, 4) for _ in range(3))
            assert abs(trace_distance(a, b) - trace_distance(b, a)) < 1e-14
            assert trace_distance(a, c) <= (
                trace_distance(a, b) + trace_distance(b, c) + 1e-10
            )

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            trace_distance(np.eye(2) / 2, np.eye(4) / 4)


class TestConcurrence:
    def test_bell_state(self):
        rho = np.outer(bell_phi_plus(), bell_phi_plus().conj())
        assert abs(concurrence_wootters(rho) - 1.0) < 1e-12

    def test_product_state(self):
        rho = np.zeros((4, 4), dtype=complex)
        rho[0, 0] = 1.0
        assert concurrence_wootters(rho) == 0.0

    def test_single_excitation_matrix_maximal(self):
        # populations 1/2, 1/2 with full coherence in the middle block
        rho = np.zeros((4, 4), dtype=complex)
        rho[1, 1] = rho[2, 2] = 0.5
        rho[1, 2] = rho[2, 1] = 0.5
        assert abs(concurrence_wootters(rho) - 1.0) < 1e-12

    def test_local_unitary_invariance(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            rho = random_density(rng, 4)
            c0 = concurrence_wootters(rho)
            ha = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            hb = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            ua = hermitian_expm(ha + ha.conj().T, 0.7)
            ub = hermitian_expm(hb + hb.conj().T, 1.3)
            u = np.kron(ua, ub)
            c1 = concurrence_wootters(u @ rho @ u.conj().T)
            assert abs(c0 - c1) < 1e-8

    def test_input_validation(self):
        bad = np.eye(4, dtype=complex) / 4
        bad[0, 1] = 1.0
        with pytest.raises(ValueError):
            concurrence_wootters(bad)
        with pytest.raises(ValueError):
            concurrence_wootters(np.eye(4, dtype=complex))


class TestFidelity:
    def test_pure_state_match(self):
        rng = np.random.default_rng(7)
        psi = random_pure(rng, 4)
        assert abs(state_fidelity(np.outer(psi, psi.conj()), psi) - 1.0) < 1e-12

    def test_maximally_mixed_vs_bell(self):
        f = state_fidelity(np.eye(4, dtype=complex) / 4, bell_phi_plus())
        assert abs(f - 0.25) < 1e-14

    def test_ground_vs_bell(self):
        rho = np.zeros((4, 4), dtype=complex)
        rho[0, 0] = 1.0
        assert abs(state_fidelity(rho, bell_phi_plus()) - 0.5) < 1e-14

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            state_fidelity(np.eye(4) / 4, np.array([1.0, 0.0]))


class TestHermitianExpm:
    def test_zero_generator(self):
        assert np.allclose(hermitian_expm(np.zeros((3, 3)), 2.0), np.eye(3))

    def test_sigma_z_pi(self):
        u = hermitian_expm(np.diag([1.0, -1.0]).astype(complex), np.pi)
        assert np.allclose(u, -np.eye(2), atol=1e-12)

    def test_unitarity(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
            u = hermitian_expm(a + a.conj().T, rng.uniform(0.1, 3.0))
            assert np.max(np.abs(u.conj().T @ u - np.eye(6))) < 1e-10

    def test_group_property(self):
        rng = np.random.default_rng(9)
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        h = a + a.conj().T
        u = hermitian_expm(h, 0.4) @ hermitian_expm(h, 0.9)
        assert np.max(np.abs(u - hermitian_expm(h, 1.3))) < 1e-9

    def test_non_hermitian_rejected(self):
        with pytest.raises(ValueError):
            hermitian_expm(np.array([[0.0, 1.0], [0.0, 0.0]]), 1.0)


class TestPauliOnSite:
    def test_single_qubit(self):
        assert np.allclose(pauli_on_site("z", 0, 1), np.diag([1.0, -1.0]))

    def test_tensor_placement(self):
        expect = np.kron(np.eye(2), np.array([[0, 1], [1, 0]]))
        assert np.allclose(pauli_on_site("x", 1, 2), expect)

    def test_involutory_hermitian_traceless(self):
        for axis in "xyz":
            for site in range(3):
                op = pauli_on_site(axis, site, 3)
                assert np.allclose(op @ op, np.eye(8), atol=1e-14)
                assert np.allclose(op, op.conj().T, atol=1e-14)
                assert abs(np.trace(op)) < 1e-14

    def test_site_out_of_range(self):
        with pytest.raises(ValueError):
            pauli_on_site("x", 2, 2)
        with pytest.raises(ValueError):
            pauli_on_site("w", 0, 1)


class TestValidation:
    def test_accepts_valid_density(self):
        rng = np.random.default_rng(10)
        validate_density_matrix(random_density(rng, 4))

    def test_rejects_bad_trace(self):
        with pytest.raises(ValueError):
            validate_density_matrix(np.eye(4, dtype=complex))
