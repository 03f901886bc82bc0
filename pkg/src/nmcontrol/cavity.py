"""Exact reduced dynamics of two driven atoms in a zero-temperature leaky cavity.

The excitation amplitudes C1, C2 obey two coupled second-order ODEs with a
relative-phase factor exp(+-i(v1-v2)) in the cross terms, where
v1 - v2 = integral of (eps1 - eps2).  The system is integrated as a
first-order complex system (c1, c2, d1, d2, phase) with d_l = dC_l/dt and
fixed-step RK4 on a uniform grid.  Control fields are evaluated at the RK4
substage times; piecewise-constant fields are taken right-continuous, with
t = T belonging to the last segment.

Single-excitation sector: ``|c1|^2 + |c2|^2 <= 1`` at all times, the deficit
being the population lost to the bath.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

MIN_STEPS = 100
NORM_SLACK = 1e-8


@dataclass(frozen=True)
class CavityParams:
    """Physical constants of the leaky-cavity model.

    gamma0 : system-bath coupling rate (sets the time unit).
    lam    : spectral width of the Lorentzian bath.
    omega0 : bare level splitting; it cancels from the reduced equations
             (only the drives eps_i survive) and is kept for bookkeeping.
    alpha1, alpha2 : dimensionless couplings of atoms 1 and 2.
    """

    gamma0: float = 1.0
    lam: float = 0.05
    omega0: float = 1.0
    alpha1: float = 0.5
    alpha2: float = 0.1

    def __post_init__(self):
        if self.gamma0 <= 0:
            raise ValueError(f"gamma0 must be positive, got {self.gamma0}")
        if self.lam < 0:
            raise ValueError(f"lam must be nonnegative, got {self.lam}")
        if self.alpha1 < 0 or self.alpha2 < 0:
            raise ValueError("couplings alpha1, alpha2 must be nonnegative")

    @property
    def p0(self):
        """Bath correlation amplitude gamma0 * lam / 2."""
        return 0.5 * self.gamma0 * self.lam


@dataclass(frozen=True)
class CavityState:
    """State of the reduced cavity system at one instant.

    c1, c2 are the excitation amplitudes, d1, d2 their time derivatives and
    v1_minus_v2 the accumulated relative phase of the two drive channels.
    Also used as the derivative container returned by :func:`cavity_rhs`.
    """

    c1: complex
    c2: complex
    d1: complex = 0.0j
    d2: complex = 0.0j
    v1_minus_v2: float = 0.0

    def norm2(self):
        return abs(self.c1) ** 2 + abs(self.c2) ** 2


@dataclass(frozen=True)
class CavityTrajectory:
    """Uniform-grid trajectory of the cavity amplitudes over [0, T]."""

    times: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    phase: np.ndarray = field(repr=False)

    def __len__(self):
        return self.times.size

    def state(self, i):
        return CavityState(
            c1=complex(self.c1[i]),
            c2=complex(self.c2[i]),
            d1=complex(self.d1[i]),
            d2=complex(self.d2[i]),
            v1_minus_v2=float(self.phase[i]),
        )

    def populations(self):
        return np.abs(self.c1) ** 2, np.abs(self.c2) ** 2

    def concurrence_series(self):
        return 2.0 * np.abs(self.c1 * np.conj(self.c2))


def cavity_rhs(state, t, params, eps1, eps2):
    """Right-hand side of the first-order cavity system.

    ``eps1``, ``eps2`` are the instantaneous drive amplitudes; ``t`` only
    labels the instant.  Returns the derivative packed in a
    :class:`CavityState`.
    """
    p0 = params.p0
    f = cmath.exp(1j * state.v1_minus_v2)
    dd1 = -(params.lam - 1j * eps1) * state.d1 - params.alpha1 * p0 * (
        params.alpha1 * state.c1 + params.alpha2 * f * state.c2
    )
    dd2 = -(params.lam - 1j * eps2) * state.d2 - params.alpha2 * p0 * (
        params.alpha2 * state.c2 + params.alpha1 * state.c1 / f
    )
    return CavityState(
        c1=state.d1, c2=state.d2, d1=dd1, d2=dd2, v1_minus_v2=eps1 - eps2
    )


if _HAVE_NUMBA:

    @numba.njit(cache=True)
    def _rk4_kernel(c1, c2, lam, p0, a1, a2, e1s, e2s, h, nsteps, oc1, oc2, od1, od2, oph):
        """Fixed-step RK4 over ``nsteps`` intervals; fields sampled at the
        2*nsteps+1 substage times.  Fills the output arrays in place."""
        d1 = 0.0 + 0.0j
        d2 = 0.0 + 0.0j
        ph = 0.0
        oc1[0] = c1
        oc2[0] = c2
        od1[0] = d1
        od2[0] = d2
        oph[0] = ph
        for k in range(nsteps):
            e1a = e1s[2 * k]
            e2a = e2s[2 * k]
            e1b = e1s[2 * k + 1]
            e2b = e2s[2 * k + 1]
            e1c = e1s[2 * k + 2]
            e2c = e2s[2 * k + 2]

            f = np.exp(1j * ph)
            k1c1 = d1
            k1c2 = d2
            k1d1 = -(lam - 1j * e1a) * d1 - a1 * p0 * (a1 * c1 + a2 * f * c2)
            k1d2 = -(lam - 1j * e2a) * d2 - a2 * p0 * (a2 * c2 + a1 * np.conj(f) * c1)
            k1p = e1a - e2a

            c1t = c1 + 0.5 * h * k1c1
            c2t = c2 + 0.5 * h * k1c2
            d1t = d1 + 0.5 * h * k1d1
            d2t = d2 + 0.5 * h * k1d2
            f = np.exp(1j * (ph + 0.5 * h * k1p))
            k2c1 = d1t
            k2c2 = d2t
            k2d1 = -(lam - 1j * e1b) * d1t - a1 * p0 * (a1 * c1t + a2 * f * c2t)
            k2d2 = -(lam - 1j * e2b) * d2t - a2 * p0 * (a2 * c2t + a1 * np.conj(f) * c1t)
            k2p = e1b - e2b

            c1t = c1 + 0.5 * h * k2c1
            c2t = c2 + 0.5 * h * k2c2
            d1t = d1 + 0.5 * h * k2d1
            d2t = d2 + 0.5 * h * k2d2
            f = np.exp(1j * (ph + 0.5 * h * k2p))
            k3c1 = d1t
            k3c2 = d2t
            k3d1 = -(lam - 1j * e1b) * d1t - a1 * p0 * (a1 * c1t + a2 * f * c2t)
            k3d2 = -(lam - 1j * e2b) * d2t - a2 * p0 * (a2 * c2t + a1 * np.conj(f) * c1t)
            k3p = e1b - e2b

            c1t = c1 + h * k3c1
            c2t = c2 + h * k3c2
            d1t = d1 + h * k3d1
            d2t = d2 + h * k3d2
            f = np.exp(1j * (ph + h * k3p))
            k4c1 = d1t
            k4c2 = d2t
            k4d1 = -(lam - 1j * e1c) * d1t - a1 * p0 * (a1 * c1t + a2 * f * c2t)
            k4d2 = -(lam - 1j * e2c) * d2t - a2 * p0 * (a2 * c2t + a1 * np.conj(f) * c1t)
            k4p = e1c - e2c

            c1 = c1 + h / 6.0 * (k1c1 + 2.0 * k2c1 + 2.0 * k3c1 + k4c1)
            c2 = c2 + h / 6.0 * (k1c2 + 2.0 * k2c2 + 2.0 * k3c2 + k4c2)
            d1 = d1 + h / 6.0 * (k1d1 + 2.0 * k2d1 + 2.0 * k3d1 + k4d1)
            d2 = d2 + h / 6.0 * (k1d2 + 2.0 * k2d2 + 2.0 * k3d2 + k4d2)
            ph = ph + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
            oc1[k + 1] = c1
            oc2[k + 1] = c2
            od1[k + 1] = d1
            od2[k + 1] = d2
            oph[k + 1] = ph
        return


def sample_field(eps, times):
    """Evaluate a control field at the given times.

    ``eps`` may be None (zero field), a scalar, an array already sampled at
    exactly these times, or a callable of time.
    """
    times = np.asarray(times, dtype=float)
    if eps is None:
        return np.zeros_like(times)
    if isinstance(eps, np.ndarray):
        if eps.shape != times.shape:
            raise ValueError(
                f"pre-sampled field has length {eps.size}, expected {times.size}"
            )
        return np.asarray(eps, dtype=float)
    if np.isscalar(eps):
        return np.full_like(times, float(eps))
    try:
        vals = np.asarray(eps(times), dtype=float)
        if vals.shape != times.shape:
            raise ValueError
    except (TypeError, ValueError):
        vals = np.array([float(eps(t)) for t in times])
    return vals


def integrate_cavity(params, eps1, eps2, T, steps, c1_0=1.0, c2_0=0.0, engine="auto"):
    """Integrate the driven two-atom cavity system over [0, T].

    Parameters
    ----------
    params : CavityParams
    eps1, eps2 : control fields for atoms 1 and 2 (see :func:`sample_field`).
    T : float
        Horizon; the grid has ``steps`` uniform intervals.
    steps : int
        Number of RK4 steps (at least 100).
    c1_0, c2_0 : complex
        Initial amplitudes with ``|c1|^2 + |c2|^2 = 1``; the derivatives
        start at zero (vacuum bath).
    engine : "auto" | "numba" | "python"

    Returns
    -------
    CavityTrajectory
    """
    steps = int(steps)
    if steps < MIN_STEPS:
        raise ValueError(f"steps={steps} too small, need at least {MIN_STEPS}")
    if T <= 0:
        raise ValueError(f"horizon T must be positive, got {T}")
    norm2 = abs(c1_0) ** 2 + abs(c2_0) ** 2
    if abs(norm2 - 1.0) > 1e-9:
        raise ValueError(f"initial amplitudes must satisfy |c1|^2+|c2|^2=1, got {norm2}")

    h = T / steps
    sub_times = 0.5 * h * np.arange(2 * steps + 1)
    e1s = sample_field(eps1, sub_times)
    e2s = sample_field(eps2, sub_times)
    if not (np.all(np.isfinite(e1s)) and np.all(np.isfinite(e2s))):
        raise ValueError("control fields produced non-finite values")

    times = h * np.arange(steps + 1)
    oc1 = np.empty(steps + 1, dtype=complex)
    oc2 = np.empty(steps + 1, dtype=complex)
    od1 = np.empty(steps + 1, dtype=complex)
    od2 = np.empty(steps + 1, dtype=complex)
    oph = np.empty(steps + 1, dtype=float)

    use_numba = _HAVE_NUMBA and engine in ("auto", "numba")
    if engine == "numba" and not _HAVE_NUMBA:
        raise RuntimeError("numba engine requested but numba is not available")
    if use_numba:
        _rk4_kernel(
            complex(c1_0), complex(c2_0), params.lam, params.p0,
            params.alpha1, params.alpha2, e1s, e2s, h, steps,
            oc1, oc2, od1, od2, oph,
        )
    else:
        _rk4_python(params, complex(c1_0), complex(c2_0), e1s, e2s, h, steps,
                    oc1, oc2, od1, od2, oph)
    return CavityTrajectory(times=times, c1=oc1, c2=oc2, d1=od1, d2=od2, phase=oph)


def _rk4_python(params, c1, c2, e1s, e2s, h, nsteps, oc1, oc2, od1, od2, oph):
    """Reference integrator built on :func:`cavity_rhs`; same stepping as the
    numba kernel, used for cross-checks and as fallback."""
    state = CavityState(c1=c1, c2=c2)
    oc1[0], oc2[0], od1[0], od2[0], oph[0] = c1, c2, 0.0j, 0.0j, 0.0

    def add(s, k, w):
        return CavityState(
            c1=s.c1 + w * k.c1,
            c2=s.c2 + w * k.c2,
            d1=s.d1 + w * k.d1,
            d2=s.d2 + w * k.d2,
            v1_minus_v2=s.v1_minus_v2 + w * k.v1_minus_v2,
        )

    for k in range(nsteps):
        t = k * h
        k1 = cavity_rhs(state, t, params, e1s[2 * k], e2s[2 * k])
        k2 = cavity_rhs(add(state, k1, 0.5 * h), t + 0.5 * h, params,
                        e1s[2 * k + 1], e2s[2 * k + 1])
        k3 = cavity_rhs(add(state, k2, 0.5 * h), t + 0.5 * h, params,
                        e1s[2 * k + 1], e2s[2 * k + 1])
        k4 = cavity_rhs(add(state, k3, h), t + h, params,
                        e1s[2 * k + 2], e2s[2 * k + 2])
        state = CavityState(
            c1=state.c1 + h / 6.0 * (k1.c1 + 2 * k2.c1 + 2 * k3.c1 + k4.c1),
            c2=state.c2 + h / 6.0 * (k1.c2 + 2 * k2.c2 + 2 * k3.c2 + k4.c2),
            d1=state.d1 + h / 6.0 * (k1.d1 + 2 * k2.d1 + 2 * k3.d1 + k4.d1),
            d2=state.d2 + h / 6.0 * (k1.d2 + 2 * k2.d2 + 2 * k3.d2 + k4.d2),
            v1_minus_v2=state.v1_minus_v2
            + h / 6.0 * (k1.v1_minus_v2 + 2 * k2.v1_minus_v2
                         + 2 * k3.v1_minus_v2 + k4.v1_minus_v2),
        )
        oc1[k + 1], oc2[k + 1] = state.c1, state.c2
        od1[k + 1], od2[k + 1] = state.d1, state.d2
        oph[k + 1] = state.v1_minus_v2


def single_atom_analytic(params, t):
    """Closed-form undriven single-atom amplitude C(t) for ``alpha2 = 0``.

    Solves ``C'' + lam C' + alpha1^2 gamma0 lam / 2 C = 0`` with C(0) = 1,
    C'(0) = 0 through the characteristic roots; the degenerate-root case
    falls back to the confluent solution (1 - r t) exp(r t).
    """
    if params.alpha2 != 0.0:
        raise ValueError("analytic single-atom solution requires alpha2 = 0")
    t = np.asarray(t, dtype=float)
    lam = params.lam
    w2 = params.alpha1**2 * params.p0
    disc = cmath.sqrt(lam * lam - 4.0 * w2)
    rp = 0.5 * (-lam + disc)
    rm = 0.5 * (-lam - disc)
    if abs(rp - rm) < 1e-12 * max(1.0, abs(rp)):
        r = 0.5 * (rp + rm)
        return (1.0 - r * t) * np.exp(r * t)
    return (rp * np.exp(rm * t) - rm * np.exp(rp * t)) / (rp - rm)


def assemble_density(state):
    """Two-qubit density matrix of the reduced atom pair.

    Basis order |00>, |01>, |10>, |11> with qubit 0 (atom 1) as the most
    significant bit; only the single-excitation block and the ground
    population are non-zero.
    """
    c1, c2 = _amplitudes(state)
    p1 = abs(c1) ** 2
    p2 = abs(c2) ** 2
    ground = 1.0 - p1 - p2
    if ground < -NORM_SLACK:
        raise ValueError(f"amplitude norm exceeds 1 beyond tolerance: |c|^2 = {p1 + p2}")
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = max(ground, 0.0)
    rho[2, 2] = p1
    rho[1, 1] = p2
    rho[2, 1] = c1 * np.conj(c2)
    rho[1, 2] = np.conj(c1) * c2
    return rho


def concurrence_cavity(state):
    """Concurrence 2 |C1 C2*| of the single-excitation reduced state."""
    c1, c2 = _amplitudes(state)
    return 2.0 * abs(c1 * np.conj(c2))


def _amplitudes(state):
    if isinstance(state, CavityState):
        return state.c1, state.c2
    c1, c2 = state
    return complex(c1), complex(c2)
