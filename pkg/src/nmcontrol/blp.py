"""BLP information-backflow quantifier for the free (uncontrolled) dynamics.

The fixed orthogonal initial pair is |10><10| vs |01><01| on the reduced
two-qubit system (for the spin star, the central pair with the same
environment state).  The measure is the sum of positive increments of the
trace-distance series over [0, T], evaluated on a uniform grid, and is
always computed on free dynamics; a value below 1e-6 classifies the point
as Markovian.

The supremum over initial pairs in the original definition is deliberately
not searched: the canonical orthogonal pair is fixed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import cavity as _cavity
from . import spinstar as _spinstar
from .linalg import trace_distance

MARKOVIAN_THRESHOLD = 1e-6
CAVITY_GRID = 2000
CAVITY_GRID_MIN = 500
SPINSTAR_GRID = 250
SPINSTAR_GRID_MIN = 250


@dataclass(frozen=True)
class DistanceTrajectory:
    """Trace distance D(t) between the evolving pair on a uniform grid."""

    times: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class NmResult:
    value: float
    trajectory: DistanceTrajectory
    regime: str  # "Markovian" | "NonMarkovian"


def distance_trajectory(model, params, T, grid_points=None):
    """Trace-distance series of the canonical pair under free dynamics.

    For the cavity the runs start from (c1, c2) = (1, 0) and (0, 1); for the
    spin star the central pair starts in |10> / |01> with the environment in
    |0...0>.  The distance is evaluated between the reduced two-qubit states
    at every grid point.
    """
    if model == "cavity":
        grid = CAVITY_GRID if grid_points is None else int(grid_points)
        if grid < CAVITY_GRID_MIN:
            raise ValueError(f"cavity grid_points must be >= {CAVITY_GRID_MIN}")
        run1 = _cavity.integrate_cavity(params, None, None, T, grid, 1.0, 0.0)
        run2 = _cavity.integrate_cavity(params, None, None, T, grid, 0.0, 1.0)
        values = np.array([
            trace_distance(
                _cavity.assemble_density(run1.state(i)),
                _cavity.assemble_density(run2.state(i)),
            )
            for i in range(len(run1))
        ])
        return DistanceTrajectory(times=run1.times, values=values)
    if model == "spinstar":
        grid = SPINSTAR_GRID if grid_points is None else int(grid_points)
        if grid < SPINSTAR_GRID_MIN:
            raise ValueError(f"spinstar grid_points must be >= {SPINSTAR_GRID_MIN}")
        ops = _spinstar.build_operators(params)
        dim = 2**params.n_total
        psi1 = np.zeros(dim, dtype=complex)
        psi1[2 ** (params.n_total - 1)] = 1.0  # central |10>, environment |0..0>
        psi2 = np.zeros(dim, dtype=complex)
        psi2[2 ** (params.n_total - 2)] = 1.0  # central |01>
        zero = np.zeros(grid)
        t1 = _spinstar.propagate_spinstar(ops, zero, zero, T, psi1)
        t2 = _spinstar.propagate_spinstar(ops, zero, zero, T, psi2)
        values = np.array([
            trace_distance(a, b) for a, b in zip(t1.reduced, t2.reduced)
        ])
        return DistanceTrajectory(times=t1.times, values=values)
    raise ValueError(f"unknown model {model!r}")


def single_atom_distance_trajectory(params, T, grid_points):
    """Distance series for one undriven atom in the cavity (alpha2 = 0).

    The orthogonal pair |1><1| vs |0><0| of a single atom gives
    D(t) = |C(t)|^2 because the ground state is stationary at zero
    temperature.  The two-qubit pair degenerates (D = 1 identically) in the
    alpha2 -> 0 limit, so the regime boundary is probed with this series.
    """
    if params.alpha2 != 0.0:
        raise ValueError("single-atom distance requires alpha2 = 0")
    run = _cavity.integrate_cavity(params, None, None, T, int(grid_points), 1.0, 0.0)
    return DistanceTrajectory(times=run.times, values=np.abs(run.c1) ** 2)


def blp_measure(trajectory):
    """Sum of positive trace-distance increments, with regime label."""
    times = np.asarray(trajectory.times, dtype=float)
    values = np.asarray(trajectory.values, dtype=float)
    if times.size == 0 or values.size != times.size:
        raise ValueError("empty or inconsistent distance trajectory")
    if times.size > 1 and np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be strictly increasing")
    increments = np.diff(values)
    value = float(np.sum(increments[increments > 0.0]))
    regime = "Markovian" if value < MARKOVIAN_THRESHOLD else "NonMarkovian"
    return NmResult(value=value, trajectory=trajectory, regime=regime)
