"""Toolkit for incomplete pairwise comparison matrices."""

from .core import (
    ComparisonGraph,
    Gauge,
    IncompletePcm,
    InconsistencyReport,
    Scale,
    TriadProfile,
    associated_graph,
    consistency_index,
    dominant_eigenvalue,
    is_connected,
    parse_pcm,
    pcm_document,
    serialize_pcm,
    triad_profile,
    triad_ti,
)
from .errors import PcmError
from .inconsistency import (
    BUILTIN_RI,
    MissingPatternPolicy,
    RiQueryPolicy,
    RiTable,
    cr_incomplete,
    ri_approx,
    ri_lookup,
    simulate_ri,
)
from .lexico import (
    LexStageRecord,
    lex_completion,
    lex_completion_independent,
    solve_minmax_lp,
)
from .structures import (
    Adjustment,
    BwmBoundsReport,
    CdagSpec,
    EnumerationMode,
    OrdinalViolationReport,
    bwm_enumerate_violations,
    bwm_guarantee,
    bwm_llsm_weights,
    bwm_matrix,
    cdag_matrix,
    head_to_head_ingest,
    ordinal_violations,
)
from .elicitation import (
    QuestionPolicy,
    Session,
    create_session,
    pattern_experiment,
    session_report,
    submit_answer,
)
from .weighting import (
    CompletionMethod,
    CompletionResult,
    WeightVector,
    em_completion,
    em_weights,
    harker_matrix,
    harker_weights,
    llsm_completion,
    llsm_weights,
    make_weights,
    spanning_tree_count,
    spanning_tree_gm_weights,
)

__version__ = "0.1.0"
