"""Piecewise-constant control pulses and the three addressing topologies.

A pulse holds one amplitude per segment and channel over a horizon T.  As a
function of time it is right-continuous: ``t`` in ``[k dt, (k+1) dt)`` uses
segment k, and ``t = T`` belongs to the last segment.  Addressing modes map
optimizer channels onto the two physical drive lines: SA drives subsystem 1
and leaves subsystem 2 idle, DA drives both independently, GA feeds one
shared field to both (which freezes the relative phase v1 - v2 at zero).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class AddressingMode(Enum):
    SA = "SA"
    DA = "DA"
    GA = "GA"

    @property
    def channels(self):
        return 2 if self is AddressingMode.DA else 1


@dataclass(frozen=True)
class StepField:
    """Right-continuous step function on [0, T] with uniform segments."""

    amplitudes: np.ndarray
    horizon: float

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=float)
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_segments(self):
        return self.amplitudes.size

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.clip(
            (t * self.n_segments / self.horizon).astype(int), 0, self.n_segments - 1
        )
        out = self.amplitudes[idx]
        return float(out) if out.ndim == 0 else out

    def substage_samples(self, steps):
        """Samples at the 2*steps+1 RK4 substage times of a uniform grid.

        The segment lookup is done in integer arithmetic so boundary points
        land in the correct segment regardless of rounding.
        """
        j = np.arange(2 * steps + 1)
        idx = np.minimum(j * self.n_segments // (2 * steps), self.n_segments - 1)
        return self.amplitudes[idx]


@dataclass(frozen=True)
class PulseSequence:
    """Amplitudes of shape (channels, n_segments) over a horizon T > 0."""

    horizon: float
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.atleast_2d(np.asarray(self.amplitudes, dtype=float))
        if self.horizon <= 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if amps.ndim != 2 or amps.shape[0] not in (1, 2):
            raise ValueError(f"amplitudes must be (1|2, n_segments), got {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("pulse amplitudes must be finite")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def channels(self):
        return self.amplitudes.shape[0]

    @property
    def n_segments(self):
        return self.amplitudes.shape[1]

    @classmethod
    def from_flat(cls, vec, horizon, n_segments, channels):
        """Build from a flat optimizer vector, channel-major order."""
        vec = np.asarray(vec, dtype=float)
        if vec.size != channels * n_segments:
            raise ValueError(
                f"flat vector length {vec.size} != channels*segments "
                f"{channels * n_segments}"
            )
        return cls(horizon=horizon, amplitudes=vec.reshape(channels, n_segments))

    def flat(self):
        return self.amplitudes.ravel().copy()

    def channel(self, i):
        return StepField(self.amplitudes[i], self.horizon)


def expand_addressing(pulse, mode):
    """Physical drive fields (eps1, eps2) for a pulse under an addressing mode.

    SA -> (p, 0); DA -> (p1, p2); GA -> (p, p).  Raises ``ValueError`` when
    the pulse channel count does not match the mode.
    """
    mode = AddressingMode(mode)
    if pulse.channels != mode.channels:
        raise ValueError(
            f"{mode.value} addressing needs {mode.channels} channel(s), "
            f"pulse has {pulse.channels}"
        )
    if mode is AddressingMode.SA:
        zero = StepField(np.zeros(pulse.n_segments), pulse.horizon)
        return pulse.channel(0), zero
    if mode is AddressingMode.GA:
        shared = pulse.channel(0)
        return shared, shared
    return pulse.channel(0), pulse.channel(1)
