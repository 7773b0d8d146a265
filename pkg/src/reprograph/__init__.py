"""Study graphs for empirical AI publications.

The package models a publication's empirical content as a validated graph
of hypotheses, experiments, and interpretations; extracts such graphs from
publication text through a pluggable completion client; measures extraction
quality against human-corrected graphs (edit distances, per-category error
proportions, Likert summaries); scores reproduction attempts; and hosts the
review sessions that produce the corrected dataset.
"""

from .canonical import (
    ATTEMPT_SUFFIX,
    FORMAT_VERSION,
    STUDY_SUFFIX,
    ParseFailure,
    canonical_dumps,
    canonical_loads,
    graph_doc,
    parse_graph,
    serialize_graph,
)
from .coverage import (
    CoverageError,
    CoverageScore,
    ExperimentOutcome,
    InconsistentAttemptError,
    ReproductionAttempt,
    ScoreExplanation,
    UnknownIdError,
    explain_score,
    parse_attempt,
    score_reproduction,
    serialize_attempt,
)
from .extraction import (
    API_KEY_ENV,
    ENDPOINT_ENV,
    CompletionClient,
    DocumentSource,
    ExtractionConfig,
    ExtractionExhausted,
    ExtractionLog,
    HttpCompletionClient,
    MockCompletionClient,
    PromptBundle,
    TransportError,
    build_prompt,
    default_bundle,
    extract_study,
    load_bundle,
)
from .metrics import (
    RATING_CATEGORIES,
    RATING_SCALES,
    AlignmentError,
    CorrectionSet,
    DegenerateInputError,
    DetailCategory,
    DetailEdit,
    ElementKind,
    EmptyPopulationError,
    ErrorReport,
    LikertDistribution,
    LikertRating,
    LinkEdit,
    LinkField,
    MetricsError,
    MixedScaleError,
    Populations,
    ReportRow,
    ResultEdit,
    StatementEdit,
    Supplement,
    aggregate_reports,
    apply_correction_set,
    compare_graphs,
    correction_set_doc,
    levenshtein,
    likert_summary,
    likert_to_table,
    populations_for,
    relative_edit_fraction,
    relative_edit_pct,
)
from .model import (
    AssessmentTest,
    Experiment,
    Hypothesis,
    HypothesisKind,
    Interpretation,
    MetricSpec,
    ResultRecord,
    ResultValue,
    StudyGraph,
    StudyMetadata,
    TestKind,
    ValidationReport,
    ValueKind,
    Verdict,
    Violation,
    ViolationCode,
    fresh_element_id,
    validate_graph,
)
from .session import (
    CorrectionAccumulator,
    EventKind,
    FinalizeOutcome,
    IncompleteReviewError,
    InvalidEventError,
    InvalidGraphError,
    ReviewSession,
    SessionError,
    SessionEvent,
    SessionFinalizedError,
    SessionService,
    SessionState,
    SessionStore,
    UnknownSessionError,
    ValidationRejectedError,
    apply_graph_event,
    replay_session,
)

__version__ = "0.1.0"
