"""Dense complex linear algebra for few-qubit states and operators.

Conventions used throughout the package:

* Qubit 0 is the leftmost tensor factor, i.e. the most significant bit of
  the basis index: ``|q0 q1 ... q_{n-1}>`` has index ``sum(q_i * 2**(n-1-i))``.
* ``|0>`` is the +1 eigenstate of ``sigma_z``; ``|1>`` denotes the excited
  (flipped) state.
* States and operators are plain ``numpy`` arrays of ``complex128``.
"""

from __future__ import annotations

import numpy as np

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
NORM_TOL = 1e-12

PAULI = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


def validate_density_matrix(rho, tol=HERMITICITY_TOL):
    """Check that ``rho`` is a valid density matrix.

    Raises ``ValueError`` if ``rho`` is not square, not Hermitian, not unit
    trace or has an eigenvalue below ``-tol``.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density matrix is not Hermitian within tolerance")
    if abs(np.trace(rho).real - 1.0) > TRACE_TOL or abs(np.trace(rho).imag) > TRACE_TOL:
        raise ValueError(f"density matrix trace {np.trace(rho)} is not 1")
    if np.linalg.eigvalsh(rho).min() < -PSD_TOL:
        raise ValueError("density matrix has a negative eigenvalue beyond tolerance")
    return rho


def validate_pure_state(psi, tol=NORM_TOL):
    """Check that ``psi`` is a normalized state vector."""
    psi = np.asarray(psi, dtype=complex).ravel()
    norm2 = float(np.vdot(psi, psi).real)
    if abs(norm2 - 1.0) > tol:
        raise ValueError(f"state vector squared norm {norm2} is not 1")
    return psi


def _n_qubits(dim):
    n = int(round(np.log2(dim)))
    if 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of 2")
    return n


def partial_trace(rho, keep):
    """Reduced density matrix of an n-qubit state on the qubits in ``keep``.

    Parameters
    ----------
    rho : (2**n, 2**n) array
        Density matrix of the full register.
    keep : sequence of int
        Qubit indices to retain, in the order they should appear in the
        reduced state.  The remaining qubits are traced out.

    Returns
    -------
    (2**len(keep), 2**len(keep)) array
    """
    rho = np.asarray(rho, dtype=complex)
    n = _n_qubits(rho.shape[0])
    keep = list(keep)
    if len(set(keep)) != len(keep):
        raise ValueError(f"duplicate qubit index in keep={keep}")
    for q in keep:
        if not 0 <= q < n:
            raise ValueError(f"qubit index {q} out of range for {n} qubits")
    rest = [q for q in range(n) if q not in keep]
    perm = keep + rest
    t = rho.reshape([2] * (2 * n))
    t = t.transpose(perm + [n + p for p in perm])
    dk = 2 ** len(keep)
    dr = 2 ** len(rest)
    t = t.reshape(dk, dr, dk, dr)
    return np.einsum("ajbj->ab", t)


def trace_distance(rho1, rho2):
    """Trace distance D = 0.5 * tr|rho1 - rho2| between two density matrices.

    The trace norm is evaluated through the eigenvalues of the Hermitian
    difference, which is exact and avoids a general SVD.
    """
    rho1 = np.asarray(rho1, dtype=complex)
    rho2 = np.asarray(rho2, dtype=complex)
    if rho1.shape != rho2.shape:
        raise ValueError(f"dimension mismatch: {rho1.shape} vs {rho2.shape}")
    eigs = np.linalg.eigvalsh(rho1 - rho2)
    return 0.5 * float(np.sum(np.abs(eigs)))


def concurrence_wootters(rho):
    """Wootters concurrence of a two-qubit density matrix.

    Computes the eigenvalues of ``R = rho (sy x sy) rho* (sy x sy)``, sorts
    them in descending order and returns
    ``max(0, sqrt(l1) - sqrt(l2) - sqrt(l3) - sqrt(l4))`` clamped to [0, 1].
    Small negative eigenvalues (above -1e-10) are treated as numerical noise
    and clamped to zero.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"concurrence requires a 4x4 matrix, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > HERMITICITY_TOL:
        raise ValueError("concurrence requires a Hermitian input")
    if abs(np.trace(rho) - 1.0) > 1e-8:
        raise ValueError("concurrence requires a unit-trace input")
    sysy = np.kron(PAULI["y"], PAULI["y"])
    r = rho @ sysy @ rho.conj() @ sysy
    lam = np.linalg.eigvals(r).real
    lam[(lam < 0) & (lam > -PSD_TOL)] = 0.0
    lam = np.clip(lam, 0.0, None)
    lam = np.sort(lam)[::-1]
    roots = np.sqrt(lam)
    c = roots[0] - roots[1] - roots[2] - roots[3]
    return float(min(max(c, 0.0), 1.0))


def state_fidelity(rho, target):
    """Fidelity <target|rho|target> of a density matrix against a pure state."""
    rho = np.asarray(rho, dtype=complex)
    target = np.asarray(target, dtype=complex).ravel()
    if rho.shape != (target.size, target.size):
        raise ValueError(
            f"dimension mismatch: rho {rho.shape} vs target length {target.size}"
        )
    return float(np.vdot(target, rho @ target).real)


def hermitian_expm(h, dt):
    """Unitary propagator exp(-i h dt) of a Hermitian generator.

    Computed by eigendecomposition; the result is unitary to machine
    precision.  Raises ``ValueError`` for a non-Hermitian input.
    """
    h = np.asarray(h, dtype=complex)
    if np.max(np.abs(h - h.conj().T)) > HERMITICITY_TOL:
        raise ValueError("hermitian_expm requires a Hermitian matrix")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * dt)) @ v.conj().T


def pauli_on_site(axis, site, n_qubits):
    """Pauli operator on one site of an n-qubit register.

    Returns ``I x ... x sigma_axis x ... x I`` with the Pauli matrix at
    position ``site`` (site 0 is the leftmost factor).
    """
    if axis not in PAULI:
        raise ValueError(f"axis must be one of 'x', 'y', 'z', got {axis!r}")
    if not 0 <= site < n_qubits:
        raise ValueError(f"site {site} out of range for {n_qubits} qubits")
    op = np.ones((1, 1), dtype=complex)
    for q in range(n_qubits):
        op = np.kron(op, PAULI[axis] if q == site else np.eye(2, dtype=complex))
    return op


def bell_phi_plus():
    """The target Bell state (|00> + |11>) / sqrt(2)."""
    psi = np.zeros(4, dtype=complex)
    psi[0] = psi[3] = 1.0 / np.sqrt(2.0)
    return psi
