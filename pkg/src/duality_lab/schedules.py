"""Piecewise-constant coupling schedules.

A schedule holds the single-qubit field h0(t) and the pair coupling v(t)
as a list of segments.  The value at a breakpoint belongs to the segment
that starts there (right-continuous).  Piecewise-constant couplings make
the time-ordered propagator an exact product of segment propagators.
"""

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .pauli import InvalidInput, pair_interaction_norm_bound, pauli_vector


class OutOfRange(ValueError):
    """Raised when a time falls outside a schedule or grid."""


@dataclass(frozen=True)
class Segment:
    t_start: float
    h0: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class ScheduleBounds:
    v_m: float      # sup_t 4|v(t)|, an upper bound on sup_t tr|V(t)|
    v_star: float   # sup_{mu,t} |v_mu(t)|
    h0_m: float     # sup_t tr|H0(t)| = sup 2|h0(t)|


class Schedule:
    """Ordered piecewise-constant segments on [0, horizon]."""

    def __init__(self, segments: Sequence, horizon: float):
        segs = []
        for seg in segments:
            if isinstance(seg, Segment):
                t0, h0, v = seg.t_start, seg.h0, seg.v
            else:
                t0, h0, v = seg
            segs.append(Segment(float(t0), pauli_vector(h0), pauli_vector(v)))
        if not segs:
            raise InvalidInput("schedule needs at least one segment")
        if segs[0].t_start != 0.0:
            raise InvalidInput("first segment must start at t=0")
        starts = [s.t_start for s in segs]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise InvalidInput(f"segment starts must strictly increase: {starts}")
        horizon = float(horizon)
        if not np.isfinite(horizon) or horizon < starts[-1]:
            raise InvalidInput(f"horizon {horizon} precedes last segment start {starts[-1]}")
        self.segments = tuple(segs)
        self.horizon = horizon

    @classmethod
    def constant(cls, h0, v, horizon: float) -> "Schedule":
        return cls([(0.0, h0, v)], horizon)

    def __repr__(self):
        return f"Schedule({len(self.segments)} segments, horizon={self.horizon})"

    def with_horizon(self, horizon: float) -> "Schedule":
        return Schedule(self.segments, horizon)

    def segment_index(self, t: float) -> int:
        if not 0 <= t <= self.horizon:
            raise OutOfRange(f"t={t} outside schedule range [0, {self.horizon}]")
        starts = [s.t_start for s in self.segments]
        return int(np.searchsorted(starts, t, side="right")) - 1

    def sample(self, t: float):
        """(h0, v) in force at time t."""
        seg = self.segments[self.segment_index(t)]
        return seg.h0, seg.v

    def pieces(self, t_a: float, t_b: float) -> Iterator:
        """Yield (start, stop, h0, v) for the constant pieces covering [t_a, t_b]."""
        if t_b < t_a:
            raise OutOfRange(f"cannot propagate backwards from {t_a} to {t_b}")
        if t_b == t_a:
            return
        i = self.segment_index(t_a)
        self.segment_index(t_b)
        while True:
            seg = self.segments[i]
            end = self.segments[i + 1].t_start if i + 1 < len(self.segments) else np.inf
            stop = min(end, t_b)
            if stop > t_a:
                yield t_a, stop, seg.h0, seg.v
            if stop >= t_b:
                return
            t_a = stop
            i += 1

    def bounds(self) -> ScheduleBounds:
        # 4|v| bounds tr|V| from above (equal for single-axis couplings), so
        # it can only loosen the error bounds built on v_m
        v_m = max(pair_interaction_norm_bound(s.v) for s in self.segments)
        v_star = max(float(np.abs(s.v).max()) for s in self.segments)
        h0_m = max(2.0 * float(np.linalg.norm(s.h0)) for s in self.segments)
        return ScheduleBounds(v_m=v_m, v_star=v_star, h0_m=h0_m)

    def is_time_independent(self) -> bool:
        first = self.segments[0]
        return all(np.array_equal(s.h0, first.h0) and np.array_equal(s.v, first.v)
                   for s in self.segments)

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "segments": [
                {"t_start": s.t_start, "h0": s.h0.tolist(), "v": s.v.tolist()}
                for s in self.segments
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Schedule":
        try:
            segs = [(s["t_start"], s["h0"], s["v"]) for s in d["segments"]]
            return cls(segs, d["horizon"])
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed schedule: {exc}") from exc


def random_schedule(rng: np.random.Generator, horizon: float, n_segments: int = 3,
                    scale: float = 1.0) -> Schedule:
    """Schedule with uniform(-scale, scale) couplings and random breakpoints."""
    cuts = np.sort(rng.uniform(0, horizon, n_segments - 1))
    starts = np.concatenate([[0.0], cuts])
    segs = [(t0, rng.uniform(-scale, scale, 3), rng.uniform(-scale, scale, 3)) for t0 in starts]
    return Schedule(segs, horizon)


def default_dt(bounds: ScheduleBounds) -> float:
    """Fixed RK4 step, well below the fastest single-qubit precession period."""
    return 1e-3 / max(1.0, bounds.v_m + 4.0 * bounds.h0_m)
