"""Control objectives and the deterministic multi-start optimizer.

The cavity objective is the final-time concurrence 2 |C1(T) C2*(T)|; the
spin-star objective is the Bell fidelity <Phi+| rho_S(T) |Phi+> of the
reduced central pair.  Both are deterministic pure functions of the flat
amplitude vector.

Optimization runs a bounded Nelder-Mead per random start (restarting with a
fresh simplex when it collapses before the evaluation budget is spent) and
keeps the best result.  Start 0 is always the zero pulse, so the optimized
value can never fall below the uncontrolled baseline.  A finite-difference
L-BFGS-B fallback is selectable via ``method="lbfgs"``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import Bounds, minimize

from . import cavity as _cavity
from .linalg import bell_phi_plus
from .pulses import AddressingMode, PulseSequence
from .spinstar import SymmetricSector

DEFAULT_SEEDS = 10
DEFAULT_MAX_EVALS = 5000
DEFAULT_XATOL = 1e-6
BOUND_SCALE = 5.0
MAX_RESTARTS = 5


class CavityControlProblem:
    """Entangling control of the two-atom cavity model.

    The amplitude bound defaults to 5 gamma0 per channel.  ``steps`` is
    rounded up to a multiple of ``n_segments`` so RK4 substages align with
    segment boundaries.
    """

    def __init__(self, params, mode, T, n_segments=16, steps=2000, bound=None,
                 c1_0=1.0, c2_0=0.0):
        self.params = params
        self.mode = AddressingMode(mode)
        self.T = float(T)
        self.n_segments = int(n_segments)
        steps = int(steps)
        self.steps = max(steps, _cavity.MIN_STEPS)
        if self.steps % self.n_segments:
            self.steps += self.n_segments - self.steps % self.n_segments
        self.bound = BOUND_SCALE * params.gamma0 if bound is None else float(bound)
        self.c1_0 = complex(c1_0)
        self.c2_0 = complex(c2_0)
        j = np.arange(2 * self.steps + 1)
        self._idx = np.minimum(
            j * self.n_segments // (2 * self.steps), self.n_segments - 1
        )
        self._zero = np.zeros(2 * self.steps + 1)

    @property
    def n_params(self):
        return self.mode.channels * self.n_segments

    @property
    def bounds(self):
        return (-self.bound, self.bound)

    def pulse_from_flat(self, vec):
        return PulseSequence.from_flat(vec, self.T, self.n_segments,
                                       self.mode.channels)

    def _substage_fields(self, vec):
        vec = np.asarray(vec, dtype=float)
        if self.mode is AddressingMode.DA:
            e1 = vec[: self.n_segments][self._idx]
            e2 = vec[self.n_segments:][self._idx]
        elif self.mode is AddressingMode.SA:
            e1 = vec[self._idx]
            e2 = self._zero
        else:  # GA
            e1 = vec[self._idx]
            e2 = e1
        return e1, e2

    def integrate(self, vec):
        e1, e2 = self._substage_fields(vec)
        return _cavity.integrate_cavity(
            self.params, e1, e2, self.T, self.steps, self.c1_0, self.c2_0
        )

    def objective(self, vec):
        """Final-time concurrence C(T) = 2 |C1 C2*|."""
        traj = self.integrate(vec)
        return 2.0 * abs(traj.c1[-1] * np.conj(traj.c2[-1]))

    def final_state(self, vec):
        traj = self.integrate(vec)
        return traj.state(len(traj) - 1)


class SpinStarControlProblem:
    """Bell-state preparation on the spin-star central pair.

    Maximizes the state fidelity toward |Phi+>; the entanglement actually
    reported downstream is the concurrence of the optimal final state.  The
    amplitude bound defaults to 5 omega0 per channel.  Propagation runs in
    the exact symmetric sector with a machine-precision Chebyshev kernel.
    """

    def __init__(self, params, mode, T, n_segments=250, bound=None):
        self.params = params
        self.mode = AddressingMode(mode)
        self.T = float(T)
        self.n_segments = int(n_segments)
        self.bound = BOUND_SCALE * params.omega0 if bound is None else float(bound)
        self.sector = SymmetricSector(params)
        self.dt = self.T / self.n_segments
        self._radius, self._coeffs = self.sector.chebyshev_plan(self.dt, self.bound)
        self._psi0 = self.sector.basis_state(0)  # central |00>, environment |0..0>
        self._target = bell_phi_plus()

    @property
    def n_params(self):
        return self.mode.channels * self.n_segments

    @property
    def bounds(self):
        return (-self.bound, self.bound)

    def pulse_from_flat(self, vec):
        return PulseSequence.from_flat(vec, self.T, self.n_segments,
                                       self.mode.channels)

    def _channel_amplitudes(self, vec):
        vec = np.asarray(vec, dtype=float)
        if self.mode is AddressingMode.DA:
            return vec[: self.n_segments], vec[self.n_segments:]
        if self.mode is AddressingMode.SA:
            return vec, np.zeros(self.n_segments)
        return vec, vec

    def final_state(self, vec):
        """Final symmetric-sector state vector."""
        e1, e2 = self._channel_amplitudes(vec)
        return self.sector.propagate_final_fast(
            e1, e2, self.dt, self._psi0, self._radius, self._coeffs, self.bound
        )

    def final_reduced(self, vec):
        return self.sector.reduced(self.final_state(vec))

    def objective(self, vec):
        """State fidelity of the reduced central pair against |Phi+>."""
        psi = self.final_state(vec).reshape(4, -1)
        overlap = (psi[0] + psi[3]) / np.sqrt(2.0)
        return float(np.sum(np.abs(overlap) ** 2))


@dataclass(frozen=True)
class OptimizationOutcome:
    """Best result over all starts; per-seed values keep the full picture."""

    best_x: np.ndarray
    best_value: float
    per_seed_values: tuple
    evaluations: int
    best_seed: int
    best_pulse: PulseSequence | None = None


class _CountedObjective:
    def __init__(self, fn):
        self.fn = fn
        self.count = 0

    def __call__(self, x):
        self.count += 1
        val = self.fn(x)
        if not np.isfinite(val):
            raise ValueError(
                f"objective returned non-finite value {val} at amplitudes {x!r}"
            )
        return -val  # scipy minimizes


def _local_optimize(neg, x0, lo, hi, budget, xatol, method):
    """One bounded local run with restart-on-collapse, within ``budget``
    objective evaluations.  Returns the best point found."""
    bounds = Bounds(np.full_like(x0, lo), np.full_like(x0, hi))
    best_x = np.clip(np.asarray(x0, dtype=float), lo, hi)
    best_f = neg(best_x)
    used = 1
    restarts = 0
    while used < budget and restarts <= MAX_RESTARTS:
        remaining = budget - used
        if method == "lbfgs":
            res = minimize(neg, best_x, method="L-BFGS-B", bounds=bounds,
                           options={"maxfun": remaining, "ftol": 1e-14,
                                    "gtol": 1e-10})
        else:
            res = minimize(neg, best_x, method="Nelder-Mead", bounds=bounds,
                           options={"maxfev": remaining, "xatol": xatol,
                                    "fatol": 1e-12, "adaptive": False})
        used += res.nfev
        improved = res.fun < best_f - 1e-12
        if res.fun < best_f:
            best_f = res.fun
            best_x = np.clip(res.x, lo, hi)
        if not res.success or not improved:
            break
        # converged with budget left: restart with a fresh simplex around
        # the collapsed optimum and keep going only while it pays off
        restarts += 1
    return best_x, best_f, used


def optimize_multistart(objective, n_params, seeds=DEFAULT_SEEDS, rng_seed=0,
                        bounds=(-BOUND_SCALE, BOUND_SCALE),
                        method="nelder-mead", max_evals=DEFAULT_MAX_EVALS,
                        xatol=DEFAULT_XATOL, pulse_factory=None):
    """Deterministic multi-start maximization of ``objective``.

    Start 0 is the zero vector; starts 1..seeds-1 draw uniformly within
    ``bounds`` from per-seed RNG streams derived from ``rng_seed``.  Each
    start gets its own ``max_evals`` budget.  The outcome is bit-identical
    for identical arguments.
    """
    if seeds < 1:
        raise ValueError(f"need at least one seed, got {seeds}")
    lo, hi = float(bounds[0]), float(bounds[1])
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise ValueError(f"bounds must be finite with lo < hi, got {bounds}")
    if method not in ("nelder-mead", "lbfgs"):
        raise ValueError(f"unknown method {method!r}")

    neg = _CountedObjective(objective)
    per_seed = []
    best_x = None
    best_val = -np.inf
    best_seed = 0
    for k in range(seeds):
        if k == 0:
            x0 = np.zeros(n_params)
        else:
            rng = np.random.default_rng([rng_seed, k])
            x0 = rng.uniform(lo, hi, n_params)
        x, f, _ = _local_optimize(neg, x0, lo, hi, max_evals, xatol, method)
        val = -f
        per_seed.append(val)
        if val > best_val:
            best_val = val
            best_x = x
            best_seed = k
    return OptimizationOutcome(
        best_x=best_x,
        best_value=float(best_val),
        per_seed_values=tuple(per_seed),
        evaluations=neg.count,
        best_seed=best_seed,
        best_pulse=pulse_factory(best_x) if pulse_factory else None,
    )


def optimize_problem(problem, seeds=DEFAULT_SEEDS, rng_seed=0,
                     method="nelder-mead", max_evals=DEFAULT_MAX_EVALS,
                     xatol=DEFAULT_XATOL):
    """Run the multistart optimizer on a control problem."""
    return optimize_multistart(
        problem.objective, problem.n_params, seeds=seeds, rng_seed=rng_seed,
        bounds=problem.bounds, method=method, max_evals=max_evals, xatol=xatol,
        pulse_factory=problem.pulse_from_flat,
    )
