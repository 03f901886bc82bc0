"""Exact unitary dynamics of a driven spin star.

Two non-interacting central spins (sites 0 and 1) are uniformly Heisenberg
coupled to N-2 environmental spins (sites 2..N-1); piecewise-constant
sigma_y controls act on the central spins only.  The full 2^N state is
propagated segment by segment with the exact propagator
``U_k = exp(-i (H0 + e1 sy1 + e2 sy2) dt)`` obtained by Hermitian
eigendecomposition, and the central pair is read out by partial trace.

Because couplings are uniform and the initial states used here are
symmetric under permutations of the environmental spins, the dynamics stays
in the sector spanned by the central pair times the symmetric (Dicke)
environment states, of dimension 4 (N-1).  The :class:`SymmetricSector`
engine exploits this exactly; it is verified against the full-space
propagation in the test suite and is used in the optimization hot loop.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.special import jv

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

from .linalg import PAULI, hermitian_expm, pauli_on_site, validate_pure_state

N_MIN = 2
N_MAX = 8


@dataclass(frozen=True)
class SpinStarParams:
    """Spin count N (central spins included), uniform coupling A, splitting."""

    n_total: int
    coupling: float
    omega0: float = 1.0

    def __post_init__(self):
        if not N_MIN <= self.n_total <= N_MAX:
            raise ValueError(f"n_total must be in [{N_MIN}, {N_MAX}], got {self.n_total}")
        if self.coupling < 0:
            raise ValueError(f"coupling must be nonnegative, got {self.coupling}")


@dataclass(frozen=True)
class SpinStarOperators:
    """Free Hamiltonian and the two central-spin control operators (2^N dim)."""

    n_total: int
    h0: np.ndarray
    hc1: np.ndarray
    hc2: np.ndarray


@dataclass(frozen=True)
class SpinStarTrajectory:
    """Reduced two-qubit states of the central pair on the slice grid."""

    times: np.ndarray
    reduced: np.ndarray  # (n_slices + 1, 4, 4)
    norms: np.ndarray    # full-state norm at each boundary

    def __len__(self):
        return self.times.size


def build_operators(params):
    """Dense H0, sy(site 0) and sy(site 1) for the full register.

    H0 = omega0/2 (sz1 + sz2) + A sum_k (sigma1 . sigma_k) + A sum_k
    (sigma2 . sigma_k); the central spins do not couple to each other.
    """
    n = params.n_total
    h0 = 0.5 * params.omega0 * (
        pauli_on_site("z", 0, n) + pauli_on_site("z", 1, n)
    )
    for central in (0, 1):
        for k in range(2, n):
            for ax in ("x", "y", "z"):
                h0 = h0 + params.coupling * (
                    pauli_on_site(ax, central, n) @ pauli_on_site(ax, k, n)
                )
    return SpinStarOperators(
        n_total=n,
        h0=h0,
        hc1=pauli_on_site("y", 0, n),
        hc2=pauli_on_site("y", 1, n),
    )


def reduced_from_pure(psi, n_total):
    """Reduced density matrix of the central pair from a pure full state."""
    m = np.asarray(psi, dtype=complex).reshape(4, -1)
    return m @ m.conj().T


def propagate_spinstar(ops, eps1, eps2, T, initial, slices=None):
    """Propagate the full spin-star state under piecewise-constant controls.

    Parameters
    ----------
    ops : SpinStarOperators
    eps1, eps2 : per-segment control amplitudes (equal lengths)
    T : total evolution time
    initial : normalized full-register state vector
    slices : number of time slices; defaults to the segment count and must
        be an integer multiple of it.

    Returns
    -------
    SpinStarTrajectory with the reduced central-pair state recorded at every
    slice boundary.
    """
    eps1 = np.asarray(eps1, dtype=float)
    eps2 = np.asarray(eps2, dtype=float)
    if eps1.shape != eps2.shape or eps1.ndim != 1:
        raise ValueError("eps1 and eps2 must be 1-d arrays of equal length")
    if not (np.all(np.isfinite(eps1)) and np.all(np.isfinite(eps2))):
        raise ValueError("control amplitudes must be finite")
    n_seg = eps1.size
    if slices is None:
        slices = n_seg
    slices = int(slices)
    if slices < n_seg or slices % n_seg != 0:
        raise ValueError(
            f"slices={slices} must be a positive integer multiple of the "
            f"segment count {n_seg}"
        )
    psi = validate_pure_state(initial, tol=1e-9)
    dim = ops.h0.shape[0]
    if psi.size != dim:
        raise ValueError(f"initial state has length {psi.size}, operators are {dim}-dim")

    per_seg = slices // n_seg
    dt = T / slices
    reduced = np.empty((slices + 1, 4, 4), dtype=complex)
    norms = np.empty(slices + 1)
    reduced[0] = reduced_from_pure(psi, ops.n_total)
    norms[0] = np.linalg.norm(psi)
    u = None
    prev = None
    for j in range(slices):
        seg = j // per_seg
        pair = (eps1[seg], eps2[seg])
        if pair != prev:
            h = ops.h0 + pair[0] * ops.hc1 + pair[1] * ops.hc2
            u = hermitian_expm(h, dt)
            prev = pair
        psi = u @ psi
        reduced[j + 1] = reduced_from_pure(psi, ops.n_total)
        norms[j + 1] = np.linalg.norm(psi)
    times = dt * np.arange(slices + 1)
    return SpinStarTrajectory(times=times, reduced=reduced, norms=norms)


def concurrence_trajectory(reduced):
    """Pointwise Wootters concurrence along a reduced-state trajectory."""
    from .linalg import concurrence_wootters

    return np.array([concurrence_wootters(r) for r in np.asarray(reduced)])


# ---------------------------------------------------------------------------
# Symmetric (Dicke) sector engine
# ---------------------------------------------------------------------------

_CHEB_TOL = 1e-15
_CHEB_KMAX = 160


def _central_ops():
    i2 = np.eye(2, dtype=complex)
    return {
        "z1": np.kron(PAULI["z"], i2),
        "z2": np.kron(i2, PAULI["z"]),
        "y1": np.kron(PAULI["y"], i2),
        "y2": np.kron(i2, PAULI["y"]),
        # flip operators in the |0>/|1> convention: minus flips, plus unflips
        "p1": np.kron(np.array([[0, 1], [0, 0]], dtype=complex), i2),
        "m1": np.kron(np.array([[0, 0], [1, 0]], dtype=complex), i2),
        "p2": np.kron(i2, np.array([[0, 1], [0, 0]], dtype=complex)),
        "m2": np.kron(i2, np.array([[0, 0], [1, 0]], dtype=complex)),
    }


class SymmetricSector:
    """Spin-star operators restricted to the permutation-symmetric sector.

    Basis states are |central i> x |m>, i in 0..3 (two-qubit index of the
    central pair) and m the number of flipped environmental spins (Dicke
    ladder of M = N-2 spins).  All Hamiltonian terms and the initial states
    used by the package are invariant under environment permutations, so
    this restriction is exact.
    """

    def __init__(self, params):
        self.params = params
        m_env = params.n_total - 2
        self.m_env = m_env
        self.n_dicke = m_env + 1
        self.dim = 4 * self.n_dicke

        c = _central_ops()
        i_env = np.eye(self.n_dicke, dtype=complex)
        # collective flip ladder: f_minus flips one more spin to |1>
        f_minus = np.zeros((self.n_dicke, self.n_dicke), dtype=complex)
        for m in range(m_env):
            f_minus[m + 1, m] = np.sqrt((m + 1.0) * (m_env - m))
        f_plus = f_minus.conj().T
        z_env = np.diag(m_env - 2.0 * np.arange(self.n_dicke)).astype(complex)

        h0 = 0.5 * params.omega0 * (
            np.kron(c["z1"] + c["z2"], i_env)
        )
        a = params.coupling
        for pl, mi, zz in (("p1", "m1", "z1"), ("p2", "m2", "z2")):
            h0 = h0 + a * (
                2.0 * (np.kron(c[pl], f_minus) + np.kron(c[mi], f_plus))
                + np.kron(c[zz], z_env)
            )
        self.h0 = h0
        self.y1 = np.kron(c["y1"], i_env)
        self.y2 = np.kron(c["y2"], i_env)
        self.h0_norm = float(np.abs(np.linalg.eigvalsh(self.h0)).max())

    def basis_state(self, central_index, m_flips=0):
        psi = np.zeros(self.dim, dtype=complex)
        psi[central_index * self.n_dicke + m_flips] = 1.0
        return psi

    def reduced(self, psi):
        """Central-pair density matrix; Dicke states are orthonormal."""
        m = psi.reshape(4, self.n_dicke)
        return m @ m.conj().T

    def embedding(self):
        """Isometry from the symmetric sector into the full 2^N space."""
        n = self.params.n_total
        m_env = self.m_env
        denv = 2**m_env if m_env > 0 else 1
        emb_env = np.zeros((denv, self.n_dicke), dtype=complex)
        if m_env == 0:
            emb_env[0, 0] = 1.0
        else:
            for m in range(self.n_dicke):
                for flipped in combinations(range(m_env), m):
                    idx = sum(2 ** (m_env - 1 - q) for q in flipped)
                    emb_env[idx, m] = 1.0
                emb_env[:, m] /= np.linalg.norm(emb_env[:, m])
        return np.kron(np.eye(4, dtype=complex), emb_env)

    def propagate(self, eps1, eps2, T, psi0, slices=None):
        """Exact sector propagation; mirrors :func:`propagate_spinstar`."""
        eps1 = np.asarray(eps1, dtype=float)
        eps2 = np.asarray(eps2, dtype=float)
        n_seg = eps1.size
        if slices is None:
            slices = n_seg
        per_seg = slices // n_seg
        dt = T / slices
        psis = np.empty((slices + 1, self.dim), dtype=complex)
        psis[0] = psi0
        u = None
        prev = None
        psi = np.asarray(psi0, dtype=complex)
        for j in range(slices):
            seg = j // per_seg
            pair = (eps1[seg], eps2[seg])
            if pair != prev:
                h = self.h0 + pair[0] * self.y1 + pair[1] * self.y2
                u = hermitian_expm(h, dt)
                prev = pair
            psi = u @ psi
            psis[j + 1] = psi
        return dt * np.arange(slices + 1), psis

    def chebyshev_plan(self, dt, amp_bound):
        """Coefficients for machine-precision Chebyshev propagation across
        one slice, valid for |eps| up to ``amp_bound`` per channel."""
        radius = self.h0_norm + 2.0 * abs(amp_bound) + 1e-9
        theta = radius * dt
        ks = np.arange(_CHEB_KMAX + 1)
        bessel = jv(ks, theta)
        small = np.abs(bessel) < _CHEB_TOL
        order = _CHEB_KMAX
        for k in range(2, _CHEB_KMAX - 1):
            if small[k] and small[k + 1] and small[k + 2] and k > theta:
                order = k + 2
                break
        coeffs = 2.0 * (-1j) ** ks[: order + 1] * bessel[: order + 1]
        coeffs[0] *= 0.5
        return radius, coeffs.astype(complex)

    def propagate_final_fast(self, eps1, eps2, dt, psi0, radius, coeffs, amp_bound):
        """Final state after all segments via the Chebyshev kernel."""
        eps1 = np.asarray(eps1, dtype=float)
        eps2 = np.asarray(eps2, dtype=float)
        if max(np.abs(eps1).max(), np.abs(eps2).max(), 0.0) > abs(amp_bound) + 1e-9:
            raise ValueError("amplitude exceeds the bound the Chebyshev plan was built for")
        if _HAVE_NUMBA:
            return _cheb_kernel(self.h0, self.y1, self.y2, eps1, eps2,
                                np.asarray(psi0, dtype=complex), radius, coeffs)
        return _cheb_python(self.h0, self.y1, self.y2, eps1, eps2,
                            np.asarray(psi0, dtype=complex), radius, coeffs)


def _cheb_python(h0, y1, y2, eps1, eps2, psi, radius, coeffs):
    for k in range(eps1.size):
        h = h0 + eps1[k] * y1 + eps2[k] * y2
        t0 = psi
        t1 = (h @ psi) / radius
        acc = coeffs[0] * t0 + coeffs[1] * t1
        for a in coeffs[2:]:
            t2 = 2.0 / radius * (h @ t1) - t0
            acc = acc + a * t2
            t0, t1 = t1, t2
        psi = acc
    return psi


if _HAVE_NUMBA:

    @numba.njit(cache=True)
    def _cheb_kernel(h0, y1, y2, eps1, eps2, psi, radius, coeffs):
        nseg = eps1.shape[0]
        ncoef = coeffs.shape[0]
        for k in range(nseg):
            h = h0 + eps1[k] * y1 + eps2[k] * y2
            t0 = psi
            t1 = (h @ psi) / radius
            acc = coeffs[0] * t0 + coeffs[1] * t1
            for j in range(2, ncoef):
                t2 = (2.0 / radius) * (h @ t1) - t0
                acc = acc + coeffs[j] * t2
                t0 = t1
                t1 = t2
            psi = acc
        return psi
