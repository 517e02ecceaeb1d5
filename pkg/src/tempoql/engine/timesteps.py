"""Timestep frame generation.

A timestep frame is the per-trajectory list of index times an aggregation is
computed at: a regular grid, the times of an anchor event series, an
explicit timestamp list, or a single synthetic timestep per trajectory at
its last observation (the whole-trajectory form).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import EvalError
from ..series import composite_key


@dataclass
class TimestepFrame:
    traj: np.ndarray
    times: np.ndarray
    whole_trajectory: bool = False
    provenance: str = ""
    diagnostics: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.traj)


def regular_frame(starts, ends, valid, period_ms: int, provenance: str) -> TimestepFrame:
    """Timesteps t = start, start+p, ... while t <= end, per trajectory."""
    if period_ms <= 0:
        raise EvalError("timestep period must be positive")
    starts = np.asarray(starts, np.int64)
    ends = np.asarray(ends, np.int64)
    valid = np.asarray(valid, bool)
    diags = []
    n_missing = int((~valid).sum())
    if n_missing:
        diags.append(f"{n_missing} trajectory(ies) lack timestep bounds; no timesteps generated")
    counts = np.zeros(len(starts), dtype=np.int64)
    ok = valid & (ends >= starts)
    inverted = valid & (ends < starts)
    if inverted.any():
        diags.append(f"{int(inverted.sum())} trajectory(ies) have start after end; "
                     "no timesteps generated")
    counts[ok] = (ends[ok] - starts[ok]) // period_ms + 1
    total = int(counts.sum())
    traj = np.repeat(np.arange(len(starts), dtype=np.int64), counts)
    offsets = np.repeat(np.cumsum(counts) - counts, counts)
    steps = np.arange(total, dtype=np.int64) - offsets
    times = np.repeat(starts, counts) + steps * period_ms
    return TimestepFrame(traj, times, provenance=provenance, diagnostics=diags)


def at_every_frame(ev_traj, ev_times, clip, provenance: str) -> TimestepFrame:
    """One timestep per anchor event, deduplicated to unique (trajectory,
    time); ``clip`` is an optional (starts, ends, valid) triple of closed
    per-trajectory bounds."""
    traj = np.asarray(ev_traj, np.int64)
    times = np.asarray(ev_times, np.int64)
    diags = []
    if clip is not None:
        starts, ends, valid = clip
        keep = valid[traj] & (times >= starts[traj]) & (times <= ends[traj])
        traj, times = traj[keep], times[keep]
    key = composite_key(traj, times)
    uniq, first = np.unique(key, return_index=True)
    if len(uniq) != len(key):
        diags.append(
            f"collapsed {len(key) - len(uniq)} duplicate anchor time(s) to unique timesteps")
    first.sort()
    return TimestepFrame(traj[first], times[first], provenance=provenance,
                         diagnostics=diags)


def at_list_frame(n_traj: int, times_ms: list, provenance: str) -> TimestepFrame:
    times_ms = sorted(set(times_ms))
    k = len(times_ms)
    traj = np.repeat(np.arange(n_traj, dtype=np.int64), k)
    times = np.tile(np.array(times_ms, np.int64), n_traj)
    return TimestepFrame(traj, times, provenance=provenance)


def whole_trajectory_frame(maxtime, observed, provenance: str) -> TimestepFrame:
    codes = np.flatnonzero(np.asarray(observed, bool))
    times = np.asarray(maxtime, np.int64)[codes]
    return TimestepFrame(codes.astype(np.int64), times, whole_trajectory=True,
                         provenance=provenance)
