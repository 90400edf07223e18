"""Input-output tables read as absorbing Markov chains."""

__version__ = "0.1.0"

from .absorbing_chain import (
    AbsorptionSplit,
    ChainAnalysis,
    absorption_analysis,
    absorption_time_bounds,
    absorption_times,
    analyze_chain,
    extreme_effects,
    fundamental,
    marginal_extremes,
    relative_duration,
    sensitivity,
)
from .benchmark_stats import PanelRow, panel_correlate, pearson, student_t_cdf, t_test_p
from .dominance_spectral import (
    SpectralSummary,
    classify_structure,
    f_measure,
    spectral_summary,
    structure_matrix,
    synthesize_structure,
)
from .graph_topology import (
    Digraph,
    accessibility,
    adjacency_from_matrix,
    classify_states,
    essential_flows,
    strong_components,
)
from .io_table import AugmentedChain, CoefficientSet, FlowTable, augment, coefficients, parse_flow_table
from .matrix_core import classify_stochasticity, hadamard, lu_invert, neumann_partial_sum, perron_root
from .simulation import WalkStats, compare, simulate
