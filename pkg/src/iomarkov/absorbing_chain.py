"""Fundamental-matrix analytics of the augmented chains.

Each fundamental matrix doubles as a sensitivity table. ``O = (I - theta)^-1``
holds ``dX_i/dY_j`` while ``N = (I - A)^-1`` holds ``dX_j/dW_i``. The money
matrix ``Q = (I - G)^-1`` is ``O.T`` and holds ``dM_j/dY_i``. Row sums of
``N`` are the expected numbers of steps before a unit of output reaches
final demand.

Infinite bounds are ``inf``; an undefined duration ratio is ``nan``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np

from .errors import IndexOutOfRange, NoAbsorbingState, NonProductive
from .graph_topology import adjacency_from_matrix, classify_states
from .io_table import AugmentedChain, CoefficientSet
from .matrix_core import as_matrix, lu_invert, perron_root

PRODUCTIVE_MARGIN = 1e-9

SensitivityKind = Literal["output_wrt_final_demand", "output_wrt_value_added", "money_wrt_final_demand"]


def fundamental(sub) -> np.ndarray:
    """``(I - sub)^-1`` for a nonnegative block with spectral radius below one."""
    b = as_matrix(sub, square=True)
    # cheap Perron upper bound before iterating
    bound = min(b.sum(axis=1).max(), b.sum(axis=0).max())
    if bound > 1.0 - PRODUCTIVE_MARGIN:
        rho = perron_root(b).root
        if rho >= 1.0 - PRODUCTIVE_MARGIN:
            raise NonProductive(f"spectral radius {rho:.12g} is not below 1: final demand never absorbs output")
    return lu_invert(np.eye(b.shape[0]) - b)


def absorption_times(n_mat) -> np.ndarray:
    return as_matrix(n_mat, square=True).sum(axis=1)


class TimeBounds(NamedTuple):
    upper: np.ndarray
    lower: np.ndarray
    transformation_pole: int
    outlet_pole: int


def _bound(one_minus_y: np.ndarray, anchor_rate: float, anchor: int) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        b = 1.0 + one_minus_y / anchor_rate
        b = np.where(one_minus_y == 0.0, 1.0, b)
        b[anchor] = 1.0 / anchor_rate if anchor_rate > 0 else np.inf
    return b


def absorption_time_bounds(y_rates) -> TimeBounds:
    """Extreme absorption times reachable with the given final-demand rates.

    The upper bound routes each pole's whole intermediate output to the
    transformation pole (lowest rate, autarkic); the lower bound routes it
    to the outlet pole (highest rate).
    """
    y = np.asarray(y_rates, dtype=float)
    i_hi = int(np.argmin(y))
    i_lo = int(np.argmax(y))
    return TimeBounds(_bound(1.0 - y, y[i_hi], i_hi), _bound(1.0 - y, y[i_lo], i_lo), i_hi, i_lo)


def relative_duration(t, t_upper, t_lower) -> np.ndarray:
    """``(t - t_lower) / (t_upper - t_lower)``; ``nan`` where the bounds coincide or are infinite."""
    t, hi, lo = (np.asarray(v, dtype=float) for v in (t, t_upper, t_lower))
    span = hi - lo
    ok = np.isfinite(hi) & (span > 0)
    out = np.full(t.shape, np.nan)
    out[ok] = (t[ok] - lo[ok]) / span[ok]
    return out


@dataclass(frozen=True)
class ChainAnalysis:
    poles: tuple[str, ...]
    o: np.ndarray
    n_mat: np.ndarray
    q: np.ndarray
    t: np.ndarray
    t_upper: np.ndarray
    t_lower: np.ndarray
    dt_ratio: np.ndarray

    def matrix(self, kind: SensitivityKind) -> np.ndarray:
        try:
            return {"output_wrt_final_demand": self.o, "output_wrt_value_added": self.n_mat,
                    "money_wrt_final_demand": self.q}[kind]
        except KeyError:
            raise ValueError(f"unknown sensitivity kind {kind!r}") from None


def analyze_chain(c: CoefficientSet) -> ChainAnalysis:
    o = fundamental(c.theta)
    n_mat = fundamental(c.alpha)
    q = o.T.copy()  # G = theta.T, so (I - G)^-1 is O transposed
    t = absorption_times(n_mat)
    bounds = absorption_time_bounds(c.y_rates)
    dt = relative_duration(t, bounds.upper, bounds.lower)
    return ChainAnalysis(c.poles, o, n_mat, q, t, bounds.upper, bounds.lower, dt)


def sensitivity(analysis: ChainAnalysis, kind: SensitivityKind, i: int, j: int) -> float:
    m = analysis.matrix(kind)
    n = m.shape[0]
    if not (0 <= i < n and 0 <= j < n):
        raise IndexOutOfRange(f"index ({i}, {j}) outside a {n}-pole table")
    return float(m[i, j])


class Effect(NamedTuple):
    value: float
    origin: str
    target: str


def extreme_effects(analysis: ChainAnalysis, kind: SensitivityKind = "output_wrt_final_demand",
                    k: int = 5, largest: bool = True) -> list[Effect]:
    """Top (or bottom) ``k`` entries; entry ``(i, j)`` is reported as origin ``j``, target ``i``."""
    m = analysis.matrix(kind)
    flat = m.ravel()
    order = np.argsort(-flat if largest else flat, kind="stable")[:k]
    n = m.shape[1]
    return [Effect(float(flat[f]), analysis.poles[f % n], analysis.poles[f // n]) for f in order]


@dataclass(frozen=True)
class MarginalEnvelope:
    """Theoretical range of ``dX_i/dY_j``.

    The floor is the identity pattern (1 on the diagonal, 0 elsewhere). The
    ceiling is ``1/y_i`` on the diagonal (pole ``i`` autarkic) and
    ``(1 - y_i)/y_j`` off it (pole ``i`` feeding an autarkic pole ``j``).
    """

    min_self: float
    min_cross: float
    max_self: np.ndarray
    max_cross: np.ndarray

    @property
    def max_self_overall(self) -> float:
        return float(self.max_self.max())

    @property
    def max_cross_overall(self) -> float:
        off = self.max_cross[~np.eye(len(self.max_self), dtype=bool)]
        return float(off.max()) if off.size else 0.0


def marginal_extremes(y_rates) -> MarginalEnvelope:
    y = np.asarray(y_rates, dtype=float)
    with np.errstate(divide="ignore"):
        max_self = 1.0 / y
        cross = (1.0 - y)[:, None] / y[None, :]
    np.fill_diagonal(cross, 0.0)
    return MarginalEnvelope(1.0, 0.0, max_self, cross)


@dataclass(frozen=True)
class AbsorptionSplit:
    transient: tuple[int, ...]
    absorbing: tuple[int, ...]
    transient_block: np.ndarray
    absorption_block: np.ndarray
    fundamental: np.ndarray
    absorb_probs: np.ndarray


def absorption_analysis(chain) -> AbsorptionSplit:
    """Canonical-form split of an absorbing chain and its absorption probabilities ``N R``.

    ``chain`` is an :class:`AugmentedChain` or any row-stochastic matrix.
    """
    p = chain.transition if isinstance(chain, AugmentedChain) else as_matrix(chain, square=True)
    states = classify_states(adjacency_from_matrix(p))
    absorbing = states.indices("absorbing")
    if not absorbing:
        raise NoAbsorbingState("the chain has no absorbing state")
    if states.indices("recurrent") != absorbing:
        raise NoAbsorbingState("the chain has recurrent classes that are not absorbing states")
    transient = states.indices("transient")
    b = p[np.ix_(transient, transient)]
    r = p[np.ix_(transient, absorbing)]
    n_mat = fundamental(b) if transient else np.zeros((0, 0))
    probs = n_mat @ r if transient else np.zeros((0, len(absorbing)))
    return AbsorptionSplit(tuple(transient), tuple(absorbing), b, r, n_mat, probs)
