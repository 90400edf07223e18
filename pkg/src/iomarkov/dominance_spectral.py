"""Global dominance diagnostics.

The Perron root ``lambda*`` of the trade matrix measures spillover; its
relaxation time ``1/(1 - lambda*)`` is the decay scale of a demand shock.
The dominance measure ``f`` places ``lambda*`` on the economy's own scale.
It is the quadratic sending ``min(1-y)`` to 0 and ``max(1-y)`` to 1, with
``mean(1-y)`` landing on 1/2. Values below 1/2 lean towards a pyramid and
values above it towards an autarkic loop.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .errors import DegenerateNodes, InvalidRates
from .io_table import CoefficientSet, coefficients, table_from_trade_matrix
from .matrix_core import perron_root

Structure = Literal["almost_pyramidal", "fair_division", "almost_loop"]

DEFAULT_BAND = 0.01
NODE_ATOL = 1e-12


def f_measure(x: float, nodes: tuple[float, float, float]) -> float:
    b, c, a = nodes
    if min(abs(c - b), abs(a - c), abs(a - b)) <= NODE_ATOL:
        raise DegenerateNodes(f"interpolation nodes {nodes} are not distinct")
    return 0.5 * (x - b) * (x - a) / ((c - b) * (c - a)) + (x - b) * (x - c) / ((a - b) * (a - c))


def classify_structure(f_value: float, band: float = DEFAULT_BAND) -> Structure:
    if abs(f_value - 0.5) <= band:
        return "fair_division"
    return "almost_pyramidal" if f_value < 0.5 else "almost_loop"


@dataclass(frozen=True)
class SpectralSummary:
    lambda_star: float
    gap: float
    t_rel: float
    nodes: tuple[float, float, float]
    f_value: Optional[float]
    structure: Optional[Structure]


def spectral_summary(c: CoefficientSet, band: float = DEFAULT_BAND) -> SpectralSummary:
    """Perron root of the trade matrix with its derived measures.

    ``f_value`` and ``structure`` are ``None`` when all poles share one
    final-demand rate, since the interpolation nodes then coincide.
    """
    lam = perron_root(c.alpha).root
    gap = 1.0 - lam
    t_rel = 1.0 / gap if gap > 0 else np.inf
    one_minus_y = 1.0 - c.y_rates
    nodes = (float(one_minus_y.min()), float(one_minus_y.mean()), float(one_minus_y.max()))
    try:
        f = f_measure(lam, nodes)
    except DegenerateNodes:
        f, structure = None, None
    else:
        structure = classify_structure(f, band)
    return SpectralSummary(lam, gap, t_rel, nodes, f, structure)


def structure_matrix(kind: Structure, y_rates, spread: float = 0.0) -> np.ndarray:
    """Canonical trade matrix of each limiting structure.

    * ``fair_division``: ``A[i, j] = (1 - y_i) / n``.
    * ``almost_loop``: the pole with the lowest final-demand rate keeps its
      whole intermediate output; every other pole sends a share ``spread``
      of its intermediate output evenly to the remaining poles and the rest
      to that pivot.
    * ``almost_pyramidal``: the pole with the highest final-demand rate (the
      outlet) keeps its own intermediate output; every other pole circulates
      at most ``spread * lambda*`` among the non-outlet poles and routes the
      surplus to the outlet.

    ``spread`` in ``[0, 1)`` keeps the off-pivot block's spectral radius
    strictly below the pivot's, so the pivot's rate sets ``lambda*``.
    """
    y = np.asarray(y_rates, dtype=float)
    n = y.size
    if n < 1 or np.any(y <= 0) or np.any(y > 1):
        raise InvalidRates("final-demand rates must lie in (0, 1]")
    if not 0.0 <= spread < 1.0:
        raise InvalidRates("spread must lie in [0, 1)")
    out = 1.0 - y
    if kind == "fair_division":
        return np.repeat(out[:, None] / n, n, axis=1)
    if kind == "almost_loop":
        pivot = int(np.argmax(out))
    elif kind == "almost_pyramidal":
        pivot = int(np.argmin(out))
    else:
        raise ValueError(f"unknown structure {kind!r}")
    a = np.zeros((n, n))
    others = [i for i in range(n) if i != pivot]
    a[pivot, pivot] = out[pivot]
    for i in others:
        # pyramid: peers get at most spread * lambda*, the surplus goes to the outlet
        kept = spread * (out[i] if kind == "almost_loop" else min(out[i], out[pivot]))
        peers = [j for j in others if j != i]
        if peers:
            a[i, peers] = kept / len(peers)
        else:
            kept = 0.0
        a[i, pivot] = out[i] - kept
    return a


def synthesize_structure(kind: Structure, y_rates, spread: float = 0.0, value_added=None) -> CoefficientSet:
    """Coefficient set of a flow table whose trade matrix is :func:`structure_matrix`.

    Value added defaults to one unit per pole; outputs follow from it.
    """
    a = structure_matrix(kind, y_rates, spread)
    w = np.ones(a.shape[0]) if value_added is None else np.asarray(value_added, dtype=float)
    return coefficients(table_from_trade_matrix(a, w))
