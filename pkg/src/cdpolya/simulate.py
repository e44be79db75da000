"""Exact event-driven simulation of the continuous-time urn.

Each ball carries an independent mean-1 exponential alarm clock; at a ring
the replacement rule fires instantly and every ball (old and new) again waits
an independent exponential time. By superposition this collapses to O(1) work
per epoch: from a state with n balls the next ring arrives after an Exp(n)
wait, and it belongs to a white ball with probability white/n, independently
of the wait.

Reproducibility contract: the uniform stream is numpy's PCG64 seeded with
``SeedSequence(seed, spawn_key=(stream_id,))``, waits are produced by inverse
transform ``-log1p(-U)/rate``, and every epoch consumes exactly two uniforms
(wait, then color). A (seed, stream_id) pair therefore pins a trajectory bit
for bit, across platforms and regardless of whether the accelerated or the
pure-Python inner loop runs.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _engine
from .model import (
    BLUE,
    WHITE,
    ModelParams,
    UrnState,
    initial_state,
    total_balls,
    validate,
)


class EmptyUrn(RuntimeError):
    """No ball can ring; unreachable when delta >= 1, kept as a guard."""


class OverflowAbort(OverflowError):
    """Counts reached the 64-bit campaign cap; results before this are exact."""


class OutOfHorizon(ValueError):
    """Queried a trajectory beyond the time span it was simulated for."""


@dataclass(frozen=True)
class RandomSource:
    """A named position in the global stream space: (seed, stream_id).

    Each pair owns a private PCG64 generator; trajectories drawn from
    distinct stream_ids under one seed are independent.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class EpochEvent:
    epoch_time: float
    color: str
    state_after: UrnState


@dataclass(frozen=True)
class Trajectory:
    """Full event record of one path on [0, horizon]."""

    params: ModelParams
    initial: UrnState
    events: tuple[EpochEvent, ...]
    horizon: float


def next_epoch(state: UrnState, gen: np.random.Generator) -> tuple[float, str]:
    """Draw the next (wait, color) pair from the current state.

    The wait is Exp(total) by the superposition rule and the color is white
    with probability white/total, independent of the wait. Consumes two
    uniforms, in that order.
    """
    n = total_balls(state)
    if n < 1:
        raise EmptyUrn(f"no balls to draw from in state {state}")
    rate = float(state.white) + float(state.blue)
    wait = -math.log1p(-gen.random()) / rate
    color = WHITE if gen.random() < state.white / rate else BLUE
    return wait, color


def simulate_until(params: ModelParams, t_end: float, source: RandomSource) -> Trajectory:
    """Simulate [0, t_end] and record every epoch.

    The recording loop below and the segment engine used by the snapshot and
    sampling paths consume the uniform stream identically, so a Trajectory
    and a snapshot run from the same source agree state for state.
    """
    validate(params)
    if t_end <= 0.0:
        raise ValueError(f"t_end must be > 0, got {t_end}")
    gen = source.generator()
    state = initial_state(params)
    events: list[EpochEvent] = []
    while True:
        wait, color = next_epoch(state, gen)
        te = state.time + wait
        if te > t_end:
            break
        if color == BLUE and state.blue > _engine.COUNT_CAP - params.a:
            raise OverflowAbort(
                f"blue count {state.blue} would exceed the campaign cap "
                f"{_engine.COUNT_CAP}; results so far are exact"
            )
        w = state.white - params.a if color == WHITE else state.white + params.a
        b = state.blue - params.a if color == WHITE else state.blue + params.a
        state = UrnState(w, b, te)
        events.append(EpochEvent(te, color, state))
    return Trajectory(params, initial_state(params), tuple(events), t_end)


def state_at(traj: Trajectory, t: float) -> UrnState:
    """State after the last epoch at or before t (paths are piecewise constant)."""
    if t < 0.0 or t > traj.horizon:
        raise OutOfHorizon(f"t={t} outside the simulated span [0, {traj.horizon}]")
    idx = bisect_right(traj.events, t, key=lambda e: e.epoch_time)
    if idx == 0:
        return UrnState(traj.initial.white, traj.initial.blue, t)
    st = traj.events[idx - 1].state_after
    return UrnState(st.white, st.blue, t)


def simulate_discrete(params: ModelParams, n_draws: int, source: RandomSource) -> list[UrnState]:
    """The embedded discrete-time chain: n_draws draw-and-replace steps, no clock.

    Returns the n_draws + 1 visited states (initial first); the time field
    stays 0.0 throughout.
    """
    validate(params)
    if n_draws < 0:
        raise ValueError(f"n_draws must be >= 0, got {n_draws}")
    gen = source.generator()
    a = params.a
    w, b = params.w0, params.b0
    states = [UrnState(w, b, 0.0)]
    for _ in range(n_draws):
        rate = float(w) + float(b)
        if gen.random() < w / rate:
            w -= a
            b -= a
        else:
            if b > _engine.COUNT_CAP - a:
                raise OverflowAbort(f"blue count {b} would exceed {_engine.COUNT_CAP}")
            w += a
            b += a
        states.append(UrnState(w, b, 0.0))
    return states


class _Cursor:
    """Mutable wrapper over the segment engine: one trajectory, advanced in steps."""

    __slots__ = ("params", "gen", "w", "b", "t_now", "pend_t", "pend_white")

    def __init__(self, params: ModelParams, source: RandomSource):
        self.params = params
        self.gen = source.generator()
        self.w = params.w0
        self.b = params.b0
        self.t_now = 0.0
        self.pend_t = 0.0
        self.pend_white = -1

    def advance_to(self, horizon: float) -> None:
        if horizon < self.t_now:
            raise ValueError(f"cannot advance backwards: {horizon} < {self.t_now}")
        out = _engine.advance(
            self.gen,
            self.w,
            self.b,
            self.t_now,
            self.pend_t,
            self.pend_white,
            self.params.a,
            self.params.delta,
            horizon,
        )
        self.w, self.b, self.t_now, self.pend_t, self.pend_white, violations, status = (
            int(out[0]),
            int(out[1]),
            float(out[2]),
            float(out[3]),
            int(out[4]),
            int(out[5]),
            int(out[6]),
        )
        if status == _engine.STATUS_OVERFLOW:
            raise OverflowAbort(
                f"blue count {self.b} would exceed the campaign cap {_engine.COUNT_CAP}"
            )
        if violations:
            raise RuntimeError(
                f"{violations} invariant violations inside the engine (simulator bug)"
            )

    def state(self, t: float) -> UrnState:
        return UrnState(self.w, self.b, t)


def simulate_snapshots(
    params: ModelParams, times: list[float], source: RandomSource
) -> list[UrnState]:
    """States of one trajectory at the given nondecreasing times.

    Memory use is O(len(times)) however many epochs fire, which is what makes
    large campaigns affordable; the visited states are identical to
    ``state_at`` of a full recording from the same source.
    """
    validate(params)
    if any(t < 0.0 for t in times):
        raise ValueError("snapshot times must be >= 0")
    if any(t2 < t1 for t1, t2 in zip(times, times[1:])):
        raise ValueError("snapshot times must be nondecreasing")
    cur = _Cursor(params, source)
    out = []
    for t in times:
        cur.advance_to(t)
        out.append(cur.state(t))
    return out


def sample_states(
    params: ModelParams,
    times: list[float],
    trials: int,
    seed: int,
    stream_base: int = 0,
    parallelism: int = 1,
) -> np.ndarray:
    """(white, blue) counts of many independent trajectories at the given times.

    Trial i uses RandomSource(seed, stream_base + i). Returns an int64 array
    of shape (trials, len(times), 2). The result depends only on the seeds,
    not on the parallelism degree: workers fill disjoint slices.
    """
    validate(params)
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    out = np.empty((trials, len(times), 2), dtype=np.int64)

    def fill(lo: int, hi: int) -> None:
        for i in range(lo, hi):
            states = simulate_snapshots(params, times, RandomSource(seed, stream_base + i))
            for j, st in enumerate(states):
                out[i, j, 0] = st.white
                out[i, j, 1] = st.blue

    workers = max(1, min(parallelism, trials))
    if workers == 1:
        fill(0, trials)
    else:
        step = -(-trials // workers)
        bounds = [(k * step, min((k + 1) * step, trials)) for k in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for fut in [pool.submit(fill, lo, hi) for lo, hi in bounds if lo < hi]:
                fut.result()
    return out


# ---------------------------------------------------------------------------
# trajectory and snapshot export


def write_trajectories_csv(path, items, meta: dict | None = None) -> None:
    """CSV with columns (trial, epoch_time, color, white, blue), one row per epoch."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        _write_meta(f, meta)
        f.write("trial,epoch_time,color,white,blue\n")
        for trial, traj in items:
            for ev in traj.events:
                f.write(
                    f"{trial},{ev.epoch_time!r},{ev.color},"
                    f"{ev.state_after.white},{ev.state_after.blue}\n"
                )


def write_snapshots_csv(path, items, meta: dict | None = None) -> None:
    """CSV with columns (trial, t, white, blue, total), one row per snapshot."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        _write_meta(f, meta)
        f.write("trial,t,white,blue,total\n")
        for trial, t, st in items:
            f.write(f"{trial},{t!r},{st.white},{st.blue},{st.white + st.blue}\n")


def trajectories_json_payload(items, meta: dict | None = None) -> dict:
    rows = [
        {
            "trial": trial,
            "epoch_time": ev.epoch_time,
            "color": ev.color,
            "white": ev.state_after.white,
            "blue": ev.state_after.blue,
        }
        for trial, traj in items
        for ev in traj.events
    ]
    return {"meta": meta or {}, "events": rows}


def snapshots_json_payload(items, meta: dict | None = None) -> dict:
    rows = [
        {"trial": trial, "t": t, "white": st.white, "blue": st.blue, "total": st.white + st.blue}
        for trial, t, st in items
    ]
    return {"meta": meta or {}, "snapshots": rows}


def _write_meta(f, meta: dict | None) -> None:
    if meta:
        for key, value in meta.items():
            f.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")
