"""Flow tables and the absorbing chains built from their coefficients.

A flow table lists inter-industry flows ``x[i, j]`` (supplier row ``i``, user
column ``j``), final demand ``Y`` per supplier and, optionally, value added
``W`` per user. Outputs follow from the row identity ``X = x.sum(1) + Y``
and value added from the column identity ``W = X - x.sum(0)``.

CSV layout::

    pole,P1,P2,Y
    P1,0.1,0.4,0.5
    P2,0.2,0.8,1.0
    W,0.7,0.8

The ``W`` row is optional; when present it is checked against the derived
value rather than trusted.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .errors import ParseError, ValidationError, ZeroOutputPole
from .matrix_core import classify_stochasticity, clamp_near_zero, lu_invert

logger = logging.getLogger(__name__)

Orientation = Literal["direct", "indirect"]

IDENTITY_RTOL = 1e-6
CLAMP_RTOL = 1e-9
ABSORBING_LABELS = {"indirect": "FE", "direct": "VA"}


@dataclass(frozen=True)
class FlowTable:
    poles: tuple[str, ...]
    flows: np.ndarray
    final_demand: np.ndarray
    value_added: np.ndarray
    output: np.ndarray
    diagnostics: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return len(self.poles)


def build_table(
    poles: Sequence[str],
    flows,
    final_demand,
    value_added=None,
    *,
    drop_zero_output: bool = False,
    diagnostics: Sequence[str] = (),
) -> FlowTable:
    """Validate raw arrays and derive outputs and value added."""
    notes = list(diagnostics)
    poles = tuple(str(p) for p in poles)
    if len(set(poles)) != len(poles):
        dupes = sorted({p for p in poles if poles.count(p) > 1})
        raise ValidationError(f"duplicate pole codes: {dupes}")
    x = np.array(flows, dtype=float).reshape(len(poles), len(poles))
    y = np.array(final_demand, dtype=float).reshape(len(poles))
    w_given = None if value_added is None else np.array(value_added, dtype=float).reshape(len(poles))

    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValidationError("flows and final demand must be finite")
    scale = max(float(np.abs(x).max(initial=0.0)), float(np.abs(y).max(initial=0.0)), 1.0)
    x, n1 = clamp_near_zero(x, CLAMP_RTOL * scale, "flows")
    y2, n2 = clamp_near_zero(y[None, :], CLAMP_RTOL * scale, "final_demand")
    y = y2[0]
    notes += n1 + n2
    if np.any(x < 0):
        i, j = np.argwhere(x < 0)[0]
        raise ValidationError(f"negative flow {x[i, j]} from {poles[i]} to {poles[j]}")
    if np.any(y < 0):
        i = int(np.flatnonzero(y < 0)[0])
        raise ValidationError(f"negative final demand {y[i]} for pole {poles[i]}")

    out = x.sum(axis=1) + y
    zero = np.flatnonzero(out <= 0)
    if zero.size:
        names = [poles[i] for i in zero]
        if not drop_zero_output:
            raise ZeroOutputPole(f"poles with zero output: {names}")
        msg = f"dropped zero-output poles {names}"
        logger.warning(msg)
        notes.append(msg)
        keep = np.setdiff1d(np.arange(len(poles)), zero)
        if x[np.ix_(keep, zero)].sum() > 0:
            raise ValidationError(f"zero-output poles {names} still purchase intermediate inputs")
        poles = tuple(poles[i] for i in keep)
        x = x[np.ix_(keep, keep)]
        y = y[keep]
        out = out[keep]
        if w_given is not None:
            w_given = w_given[keep]

    w = out - x.sum(axis=0)
    w, n3 = clamp_near_zero(w[None, :], CLAMP_RTOL * scale, "value_added")
    w = w[0]
    notes += n3
    if np.any(w < 0):
        j = int(np.flatnonzero(w < 0)[0])
        raise ValidationError(f"column identity gives negative value added {w[j]} for pole {poles[j]}")
    if w_given is not None:
        bad = np.flatnonzero(np.abs(w_given - w) > IDENTITY_RTOL * np.maximum(np.abs(out), 1e-300))
        if bad.size:
            j = int(bad[0])
            raise ValidationError(
                f"value added for {poles[j]} is {w_given[j]} but the column identity gives {w[j]}"
            )
    if abs(y.sum() - w.sum()) > IDENTITY_RTOL * max(abs(y.sum()), 1e-300):
        raise ValidationError(f"total final demand {y.sum()} differs from total value added {w.sum()}")
    return FlowTable(poles, x, y, w, out, tuple(notes))


def _number(cell: str, row: int, col: int) -> float:
    try:
        return float(cell)
    except ValueError:
        raise ParseError(f"non-numeric cell {cell!r} at row {row}, column {col}") from None


def parse_flow_table(source, *, transpose: bool = False, drop_zero_output: bool = False) -> FlowTable:
    """Parse the CSV layout described in the module docstring.

    ``source`` is a path or an open text stream. ``transpose`` swaps the flow
    matrix for sources laid out user-row/supplier-column.
    """
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source.read()
    rows = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)]
    if not rows:
        raise ParseError("empty input")
    header = [c.strip() for c in rows[0]]
    if len(header) < 3 or header[0].lower() != "pole" or header[-1] != "Y":
        raise ParseError("header must read 'pole,<code_1>,...,<code_n>,Y'")
    poles = header[1:-1]
    n = len(poles)

    body = rows[1:]
    w_row = None
    if body and body[-1][0].strip() == "W":
        w_row = body.pop()
    if len(body) != n:
        raise ParseError(f"expected {n} data rows, found {len(body)}")

    flows = np.empty((n, n))
    y = np.empty(n)
    for i, r in enumerate(body, start=2):
        cells = [c.strip() for c in r]
        if len(cells) != n + 2:
            raise ParseError(f"row {i} has {len(cells)} cells, expected {n + 2}")
        if cells[0] != poles[i - 2]:
            raise ParseError(f"row {i} is labelled {cells[0]!r}, expected {poles[i - 2]!r}")
        for j in range(n):
            flows[i - 2, j] = _number(cells[j + 1], i, j + 2)
        y[i - 2] = _number(cells[-1], i, n + 2)

    w = None
    if w_row is not None:
        cells = [c.strip() for c in w_row]
        if len(cells) not in (n + 1, n + 2) or (len(cells) == n + 2 and cells[-1]):
            raise ParseError("W row must hold one value per pole and an empty Y cell")
        w = np.array([_number(cells[j + 1], len(rows), j + 2) for j in range(n)])

    if transpose:
        flows = flows.T.copy()
    return build_table(poles, flows, y, w, drop_zero_output=drop_zero_output)


def format_flow_table(t: FlowTable, *, include_w: bool = True) -> str:
    """Inverse of :func:`parse_flow_table`."""
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["pole", *t.poles, "Y"])
    for i, p in enumerate(t.poles):
        wr.writerow([p, *map(repr, t.flows[i].tolist()), repr(float(t.final_demand[i]))])
    if include_w:
        wr.writerow(["W", *map(repr, t.value_added.tolist()), ""])
    return buf.getvalue()


@dataclass(frozen=True)
class CoefficientSet:
    poles: tuple[str, ...]
    theta: np.ndarray
    alpha: np.ndarray
    w_rates: np.ndarray
    y_rates: np.ndarray
    g: np.ndarray
    output: np.ndarray
    diagnostics: tuple[str, ...] = field(default=())

    @property
    def n(self) -> int:
        return len(self.poles)


def coefficients(t: FlowTable) -> CoefficientSet:
    """Technical (``x/X_j``) and trade (``x/X_i``) coefficients, rate vectors and ``G = theta.T``."""
    X = t.output
    theta = t.flows / X[None, :]
    alpha = t.flows / X[:, None]
    w_rates = t.value_added / X
    y_rates = t.final_demand / X
    for name, m, axis in (("theta", theta, "cols"), ("alpha", alpha, "rows"), ("G", theta.T, "rows")):
        if not classify_stochasticity(m, axis=axis).is_substochastic:
            raise ValidationError(f"{name} is not substochastic")
    return CoefficientSet(t.poles, theta, alpha, w_rates, y_rates, theta.T.copy(), X.copy(), t.diagnostics)


@dataclass(frozen=True)
class AugmentedChain:
    """Row-stochastic ``(n+1) x (n+1)`` transition matrix; the last state absorbs."""

    transition: np.ndarray
    orientation: Orientation
    labels: tuple[str, ...]

    @property
    def absorbing_index(self) -> int:
        return self.transition.shape[0] - 1

    @property
    def n(self) -> int:
        return self.transition.shape[0] - 1


def augment(c: CoefficientSet, orientation: Orientation = "indirect") -> AugmentedChain:
    """``[[A, y], [0, 1]]`` (indirect) or ``[[theta.T, w], [0, 1]]`` (direct)."""
    if orientation == "indirect":
        block, exit_rates = c.alpha, c.y_rates
    elif orientation == "direct":
        block, exit_rates = c.g, c.w_rates
    else:
        raise ValueError(f"unknown orientation {orientation!r}")
    n = c.n
    p = np.zeros((n + 1, n + 1))
    p[:n, :n] = block
    p[:n, n] = exit_rates
    p[n, n] = 1.0
    drift = np.abs(p.sum(axis=1) - 1.0).max()
    if drift > 1e-9:
        raise ValidationError(f"augmented matrix rows deviate from 1 by {drift:.3e}")
    return AugmentedChain(p, orientation, (*c.poles, ABSORBING_LABELS[orientation]))


def table_from_trade_matrix(alpha, value_added, poles: Sequence[str] | None = None) -> FlowTable:
    """Flow table realising a given trade matrix.

    Outputs solve ``X.T = W.T (I - alpha)^-1``, so the table reproduces
    ``alpha`` exactly with the requested value added.
    """
    a = np.asarray(alpha, dtype=float)
    w = np.asarray(value_added, dtype=float)
    n = a.shape[0]
    X = w @ lu_invert(np.eye(n) - a)
    flows = a * X[:, None]
    y = X - flows.sum(axis=1)
    y = np.where(np.abs(y) <= 1e-12 * X, 0.0, y)
    if poles is None:
        poles = [f"P{i + 1}" for i in range(n)]
    return build_table(poles, flows, y)
