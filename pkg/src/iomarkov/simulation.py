"""Monte-Carlo random walks on absorbing chains.

An independent check of the fundamental-matrix results: walks are simulated
step by step from the transition matrix alone, and their empirical averages
are compared with the analytic values.

Walks are split into a fixed number of partitions. Partition ``k`` draws
from a PCG64 stream seeded by ``SeedSequence(seed).spawn(partitions)[k]``,
so results depend only on ``(seed, partitions)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .absorbing_chain import AbsorptionSplit, ChainAnalysis, absorption_analysis
from .errors import InputError, NotTransientStart
from .io_table import AugmentedChain
from .matrix_core import as_matrix

logger = logging.getLogger(__name__)

DEFAULT_STEP_CAP = 1_000_000
DEFAULT_PARTITIONS = 4
Z_LIMIT = 3.0


@dataclass(frozen=True)
class WalkStats:
    start_state: int
    n_walks: int
    mean_steps: float
    stderr_steps: float
    transient_states: tuple[int, ...]
    mean_visits: np.ndarray
    stderr_visits: np.ndarray
    absorbing_states: tuple[int, ...]
    absorb_freq: np.ndarray
    seed: int
    partitions: int
    censored: int = 0
    orientation: Optional[str] = None
    labels: tuple[str, ...] = field(default=())

    @property
    def warning(self) -> Optional[str]:
        if self.censored:
            return f"{self.censored} walks hit the step cap before absorption"
        return None


def _walk_batch(cum: np.ndarray, absorbing: np.ndarray, start: int, count: int,
                rng: np.random.Generator, step_cap: int):
    n_states = cum.shape[0]
    visits = np.zeros((count, n_states), dtype=np.int64)
    steps = np.zeros(count, dtype=np.int64)
    state = np.full(count, start)
    active = np.arange(count)
    landed = np.full(count, -1)
    for _ in range(step_cap):
        if active.size == 0:
            break
        cur = state[active]
        visits[active, cur] += 1
        steps[active] += 1
        u = rng.random(active.size)
        nxt = (u[:, None] >= cum[cur]).sum(axis=1)
        nxt = np.minimum(nxt, n_states - 1)
        state[active] = nxt
        done = absorbing[nxt]
        landed[active[done]] = nxt[done]
        active = active[~done]
    return visits, steps, landed, active.size


def simulate(chain, start: int, n_walks: int = 100_000, seed: int = 0,
             step_cap: int = DEFAULT_STEP_CAP, partitions: int = DEFAULT_PARTITIONS) -> WalkStats:
    """Run ``n_walks`` walks from transient state ``start`` until absorption.

    A walk's step count is its number of transitions until it lands on an
    absorbing state, which equals its number of transient visits (the start
    included).
    """
    if isinstance(chain, AugmentedChain):
        p, orientation, labels = chain.transition, chain.orientation, chain.labels
    else:
        p, orientation, labels = as_matrix(chain, square=True), None, ()
    for name, value in (("n_walks", n_walks), ("step_cap", step_cap), ("partitions", partitions)):
        if value < 1:
            raise InputError(f"{name} must be positive, got {value}")
    split = absorption_analysis(p)
    if start not in split.transient:
        raise NotTransientStart(f"start state {start} is not transient")

    n_states = p.shape[0]
    cum = np.cumsum(p, axis=1)
    cum[:, -1] = np.inf  # guards against rows summing to 1 - eps
    is_abs = np.zeros(n_states, dtype=bool)
    is_abs[list(split.absorbing)] = True

    sizes = [n_walks // partitions + (k < n_walks % partitions) for k in range(partitions)]
    streams = np.random.SeedSequence(seed).spawn(partitions)
    tr = list(split.transient)
    v_sum = np.zeros(len(tr))
    v_sq = np.zeros(len(tr))
    s_sum = s_sq = 0.0
    landed_counts = np.zeros(n_states, dtype=np.int64)
    censored = 0
    for size, ss in zip(sizes, streams):
        if size == 0:
            continue
        v, s, landed, c = _walk_batch(cum, is_abs, start, size, np.random.default_rng(ss), step_cap)
        v = v[:, tr].astype(float)
        v_sum += v.sum(axis=0)
        v_sq += (v * v).sum(axis=0)
        s_sum += float(s.sum())
        s_sq += float((s.astype(float) ** 2).sum())
        landed_counts += np.bincount(landed[landed >= 0], minlength=n_states)
        censored += c
    if censored:
        logger.warning("%d of %d walks censored at %d steps", censored, n_walks, step_cap)

    def mean_se(total, total_sq):
        mean = total / n_walks
        if n_walks < 2:
            return mean, np.zeros_like(mean)
        var = np.maximum(total_sq - n_walks * mean * mean, 0.0) / (n_walks - 1)
        return mean, np.sqrt(var / n_walks)

    steps_mean, steps_se = mean_se(np.array(s_sum), np.array(s_sq))
    visits_mean, visits_se = mean_se(v_sum, v_sq)
    freq = landed_counts[list(split.absorbing)].astype(float)
    freq = freq / freq.sum() if freq.sum() else freq
    return WalkStats(
        start_state=start,
        n_walks=n_walks,
        mean_steps=float(steps_mean),
        stderr_steps=float(steps_se),
        transient_states=split.transient,
        mean_visits=visits_mean,
        stderr_visits=visits_se,
        absorbing_states=split.absorbing,
        absorb_freq=freq,
        seed=seed,
        partitions=partitions,
        censored=censored,
        orientation=orientation,
        labels=tuple(labels),
    )


@dataclass(frozen=True)
class ZEntry:
    quantity: str
    empirical: float
    analytic: float
    stderr: float
    z: float


@dataclass(frozen=True)
class ZReport:
    entries: list[ZEntry]
    certified: bool

    @property
    def flagged(self) -> list[ZEntry]:
        return [e for e in self.entries if abs(e.z) > Z_LIMIT]

    @property
    def ok(self) -> bool:
        return self.certified and not self.flagged


def _z(empirical: float, analytic: float, stderr: float) -> float:
    diff = empirical - analytic
    if stderr > 0:
        return diff / stderr
    return 0.0 if abs(diff) <= 1e-12 * max(1.0, abs(analytic)) else float(np.copysign(np.inf, diff))


def compare(stats: WalkStats, analysis, split: Optional[AbsorptionSplit] = None) -> ZReport:
    """z-scores of the simulated quantities against their analytic values.

    ``analysis`` is a :class:`ChainAnalysis` (its ``N`` is used for indirect
    walks, ``Q`` for direct ones) or a bare fundamental matrix indexed like
    the simulated transient states. Censored runs are never certified.
    """
    if isinstance(analysis, ChainAnalysis):
        fund = analysis.q if stats.orientation == "direct" else analysis.n_mat
        t = analysis.t if stats.orientation != "direct" else fund.sum(axis=1)
    else:
        fund = np.asarray(analysis, dtype=float)
        t = fund.sum(axis=1)
    row = stats.transient_states.index(stats.start_state)
    name = (lambda k: stats.labels[k]) if stats.labels else str
    entries = [ZEntry("t", stats.mean_steps, float(t[row]), stats.stderr_steps,
                      _z(stats.mean_steps, float(t[row]), stats.stderr_steps))]
    for col, state in enumerate(stats.transient_states):
        emp, ana, se = float(stats.mean_visits[col]), float(fund[row, col]), float(stats.stderr_visits[col])
        entries.append(ZEntry(f"visits[{name(state)}]", emp, ana, se, _z(emp, ana, se)))
    if split is not None:
        for col, state in enumerate(stats.absorbing_states):
            p = float(split.absorb_probs[row, col])
            emp = float(stats.absorb_freq[col])
            se = float(np.sqrt(p * (1 - p) / stats.n_walks))
            entries.append(ZEntry(f"absorbed[{name(state)}]", emp, p, se, _z(emp, p, se)))
    return ZReport(entries, certified=stats.censored == 0)
