"""Cross-country panels and their correlation study.

The p-values come from a two-sided Student t test with ``n - 2`` degrees of
freedom on ``t = r sqrt((n - 2) / (1 - r^2))``. The Student CDF is evaluated
through the regularized incomplete beta function, computed here by its
continued fraction (modified Lentz).
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, fields
from typing import Iterable, Sequence

import numpy as np

from .errors import ConstantSeries, InputError, LengthMismatch, TooFewPoints

_CF_EPS = 1e-16
_CF_TINY = 1e-300
_CF_MAX_ITER = 10_000


def _beta_cf(a: float, b: float, x: float) -> float:
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > _CF_TINY else _CF_TINY)
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _CF_TINY else _CF_TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _CF_TINY else _CF_TINY
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _CF_TINY else _CF_TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _CF_TINY else _CF_TINY
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc_regularized(a: float, b: float, x: float) -> float:
    """``I_x(a, b)`` for ``a, b > 0`` and ``0 <= x <= 1``."""
    if not (a > 0 and b > 0):
        raise InputError("betainc requires a, b > 0")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    # the fraction converges fast only on this side of the mean
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def student_t_cdf(t: float, df: float) -> float:
    if df <= 0:
        raise InputError("degrees of freedom must be positive")
    if t == 0.0:
        return 0.5
    t2 = t * t
    if t2 < df:
        # near the centre df/(df+t^2) rounds to 1; use the complementary argument
        centre = 0.5 * betainc_regularized(0.5, 0.5 * df, t2 / (df + t2))
        return 0.5 + centre if t > 0 else 0.5 - centre
    tail = 0.5 * betainc_regularized(0.5 * df, 0.5, df / (df + t2))
    return 1.0 - tail if t > 0 else tail


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"series lengths differ: {x.shape} vs {y.shape}")
    if x.size < 3:
        raise TooFewPoints(f"need at least 3 points, got {x.size}")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = math.sqrt(float(dx @ dx))
    sy = math.sqrt(float(dy @ dy))
    if sx == 0.0 or sy == 0.0:
        raise ConstantSeries("correlation is undefined for a constant series")
    return max(-1.0, min(1.0, float(dx @ dy) / (sx * sy)))


EXACT_ATOL = 1e-12


def t_test_p(r: float, n: int) -> float:
    """Two-sided p-value of the correlation t test; ``0.0`` when ``|r| = 1``."""
    if n < 3:
        raise TooFewPoints(f"need at least 3 points, got {n}")
    if abs(r) >= 1.0 - EXACT_ATOL:
        return 0.0
    df = n - 2
    t = abs(r) * math.sqrt(df / (1.0 - r * r))
    if t == 0.0:
        return 1.0
    return betainc_regularized(0.5 * df, 0.5, df / (df + t * t))


@dataclass(frozen=True)
class PanelRow:
    country: str
    growth_rate: float
    lambda_star: float
    t_rel: float
    node_max: float
    node_mean: float
    node_min: float
    f_value: float
    max_t: float
    argmax_t: str
    min_t: float
    argmin_t: str


PANEL_FIELDS = tuple(f.name for f in fields(PanelRow))
NUMERIC_FIELDS = tuple(f.name for f in fields(PanelRow) if f.type in ("float", float))


def read_panel_rows(path) -> list[PanelRow]:
    """Summary rows from a CSV whose header names the :class:`PanelRow` fields."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(PANEL_FIELDS) - set(reader.fieldnames or ())
        if missing:
            raise InputError(f"summary file lacks columns {sorted(missing)}")
        rows = []
        for rec in reader:
            kw = {}
            for name in PANEL_FIELDS:
                raw = rec[name].strip()
                if name in NUMERIC_FIELDS:
                    try:
                        kw[name] = float(raw.replace(",", ".")) if raw else math.nan
                    except ValueError:
                        raise InputError(f"bad {name} value {raw!r} for {rec['country']}") from None
                else:
                    kw[name] = raw
            rows.append(PanelRow(**kw))
    return rows


def write_panel_rows(rows: Iterable[PanelRow], fh) -> None:
    wr = csv.DictWriter(fh, fieldnames=PANEL_FIELDS, lineterminator="\n")
    wr.writeheader()
    for row in rows:
        wr.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in asdict(row).items()})


@dataclass(frozen=True)
class CorrelationCell:
    r: float
    p_value: float
    n: int
    exact: bool = False


@dataclass(frozen=True)
class CorrelationMatrix:
    fields: tuple[str, ...]
    countries: tuple[str, ...]
    cells: tuple[tuple[CorrelationCell, ...], ...]

    def cell(self, a: str, b: str) -> CorrelationCell:
        return self.cells[self.fields.index(a)][self.fields.index(b)]


def panel_correlate(rows: Sequence[PanelRow], fields: Sequence[str] = ("growth_rate", "lambda_star", "max_t"),
                    exclude: Iterable[str] = ()) -> CorrelationMatrix:
    excluded = set(exclude)
    kept = [r for r in rows if r.country not in excluded]
    if len(kept) < 3:
        raise TooFewPoints(f"{len(kept)} rows remain after exclusion, need at least 3")
    for f in fields:
        if f not in NUMERIC_FIELDS:
            raise InputError(f"{f!r} is not a numeric panel field")
    series = {f: [getattr(r, f) for r in kept] for f in fields}
    n = len(kept)
    cells = [[None] * len(fields) for _ in fields]
    for i, fa in enumerate(fields):
        for j in range(i, len(fields)):
            r = pearson(series[fa], series[fields[j]])
            exact = abs(r) >= 1.0 - EXACT_ATOL
            if exact:
                r = math.copysign(1.0, r)
            cell = CorrelationCell(r, t_test_p(r, n), n, exact)
            cells[i][j] = cells[j][i] = cell
    return CorrelationMatrix(tuple(fields), tuple(r.country for r in kept), tuple(tuple(c) for c in cells))
