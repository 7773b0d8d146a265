"""Study-graph data model and structural validation.

A study graph captures one empirical study as three layers of elements:
hypotheses, experiments, and interpretations. Experiments link to the
hypotheses they test; interpretations link to the hypotheses they judge and
the experiments they are based on. All values are immutable after
construction, so graphs can be shared freely between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Union


class HypothesisKind(str, Enum):
    STATED = "stated"
    POST_HOC = "post_hoc"


class TestKind(str, Enum):
    STATISTICAL = "statistical"
    DIRECT_COMPARISON = "direct_comparison"
    VISUAL = "visual"


class Verdict(str, Enum):
    SUPPORTS = "supports"
    REPUDIATES = "repudiates"
    INCONCLUSIVE = "inconclusive"


class ValueKind(str, Enum):
    SCALAR = "scalar"
    INTERVAL = "interval"
    CATEGORICAL = "categorical"
    MISSING = "missing"


Extras = tuple[tuple[str, str], ...]
"""Unknown fields preserved by the lenient parser: (key, canonical JSON text)."""


def _ids(values: Iterable[str]) -> tuple[str, ...]:
    """Normalize a link set: deduplicate and sort for canonical order."""
    return tuple(sorted(set(values)))


@dataclass(frozen=True)
class ResultValue:
    """Tagged union for the value of one result record.

    Exactly one payload shape is populated, selected by ``kind``:
    scalar (value + optional uncertainty), interval (low/high),
    categorical (text), or missing (no payload at all).
    """

    kind: ValueKind
    value: Optional[float] = None
    uncertainty: Optional[float] = None
    low: Optional[float] = None
    high: Optional[float] = None
    text: Optional[str] = None

    def __post_init__(self) -> None:
        k = self.kind
        numeric = [self.value, self.uncertainty, self.low, self.high]
        if k is ValueKind.SCALAR:
            if self.value is None:
                raise ValueError("scalar result requires a value")
            if not math.isfinite(self.value):
                raise ValueError("scalar result value must be finite")
            if self.uncertainty is not None and not math.isfinite(self.uncertainty):
                raise ValueError("scalar uncertainty must be finite")
            if self.low is not None or self.high is not None or self.text is not None:
                raise ValueError("scalar result carries only value and uncertainty")
        elif k is ValueKind.INTERVAL:
            if self.low is None or self.high is None:
                raise ValueError("interval result requires low and high")
            if not (math.isfinite(self.low) and math.isfinite(self.high)):
                raise ValueError("interval bounds must be finite")
            if self.low > self.high:
                raise ValueError("interval bounds out of order")
            if self.value is not None or self.uncertainty is not None or self.text is not None:
                raise ValueError("interval result carries only low and high")
        elif k is ValueKind.CATEGORICAL:
            if self.text is None:
                raise ValueError("categorical result requires text")
            if any(v is not None for v in numeric):
                raise ValueError("categorical result carries no numeric payload")
        elif k is ValueKind.MISSING:
            if any(v is not None for v in numeric) or self.text is not None:
                raise ValueError("missing result carries no payload")

    @classmethod
    def scalar(cls, value: float, uncertainty: Optional[float] = None) -> "ResultValue":
        return cls(ValueKind.SCALAR, value=value, uncertainty=uncertainty)

    @classmethod
    def interval(cls, low: float, high: float) -> "ResultValue":
        return cls(ValueKind.INTERVAL, low=low, high=high)

    @classmethod
    def categorical(cls, text: str) -> "ResultValue":
        return cls(ValueKind.CATEGORICAL, text=text)

    @classmethod
    def missing(cls) -> "ResultValue":
        return cls(ValueKind.MISSING)


@dataclass(frozen=True)
class ResultRecord:
    """One extracted outcome value for a metric under a given condition."""

    metric_name: str
    context: str
    value: ResultValue
    locator: str = ""
    unmatched: bool = False

    def key(self) -> tuple[str, str]:
        """Identity of the record within an experiment."""
        return (self.metric_name, self.context)


@dataclass(frozen=True)
class MetricSpec:
    name: str
    description: Optional[str] = None
    unit: Optional[str] = None


@dataclass(frozen=True)
class AssessmentTest:
    kind: TestKind
    description: str = ""


@dataclass(frozen=True)
class StudyMetadata:
    source_id: str
    title: str = ""
    token_count: Optional[int] = None
    extras: Extras = ()


@dataclass(frozen=True)
class Hypothesis:
    id: str
    statement: str
    kind: HypothesisKind = HypothesisKind.STATED
    extras: Extras = ()


@dataclass(frozen=True)
class Experiment:
    id: str
    description: str
    hypothesis_ids: tuple[str, ...]
    metrics: tuple[MetricSpec, ...] = ()
    statistics: tuple[str, ...] = ()
    strategy: str = ""
    tests: tuple[AssessmentTest, ...] = ()
    results: tuple[ResultRecord, ...] = ()
    extras: Extras = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "hypothesis_ids", _ids(self.hypothesis_ids))
        object.__setattr__(self, "metrics", tuple(self.metrics))
        object.__setattr__(self, "statistics", tuple(self.statistics))
        object.__setattr__(self, "tests", tuple(self.tests))
        object.__setattr__(self, "results", tuple(self.results))

    def metric_names(self) -> set[str]:
        return {m.name for m in self.metrics}


@dataclass(frozen=True)
class Interpretation:
    id: str
    statement: str
    hypothesis_ids: tuple[str, ...]
    experiment_ids: tuple[str, ...]
    verdict: Verdict = Verdict.SUPPORTS
    extras: Extras = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "hypothesis_ids", _ids(self.hypothesis_ids))
        object.__setattr__(self, "experiment_ids", _ids(self.experiment_ids))


Element = Union[Hypothesis, Experiment, Interpretation]


@dataclass(frozen=True)
class StudyGraph:
    metadata: StudyMetadata
    hypotheses: tuple[Hypothesis, ...] = ()
    experiments: tuple[Experiment, ...] = ()
    interpretations: tuple[Interpretation, ...] = ()
    extras: Extras = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "hypotheses", tuple(self.hypotheses))
        object.__setattr__(self, "experiments", tuple(self.experiments))
        object.__setattr__(self, "interpretations", tuple(self.interpretations))

    @property
    def study_id(self) -> str:
        return self.metadata.source_id

    def elements(self) -> tuple[Element, ...]:
        """All elements in layer order: hypotheses, experiments, interpretations."""
        return self.hypotheses + self.experiments + self.interpretations

    def element_by_id(self, element_id: str) -> Optional[Element]:
        for el in self.elements():
            if el.id == element_id:
                return el
        return None

    def hypothesis_ids(self) -> set[str]:
        return {h.id for h in self.hypotheses}

    def experiment_ids(self) -> set[str]:
        return {e.id for e in self.experiments}

    def interpretation_ids(self) -> set[str]:
        return {i.id for i in self.interpretations}


# --------------------------------------------------------------------------
# Validation
# --------------------------------------------------------------------------


class ViolationCode(str, Enum):
    NO_HYPOTHESES = "no_hypotheses"
    DUPLICATE_ID = "duplicate_id"
    DANGLING_REFERENCE = "dangling_reference"
    MISSING_LINK = "missing_link"
    EMPTY_STATEMENT = "empty_statement"
    EMPTY_FIELD = "empty_field"
    DUPLICATE_METRIC = "duplicate_metric"
    UNMATCHED_RESULT = "unmatched_result"
    # warning-level codes
    NO_METRICS = "no_metrics"
    UNRELATED_EXPERIMENT = "unrelated_experiment"


@dataclass(frozen=True)
class Violation:
    code: ViolationCode
    element_id: Optional[str]
    message: str


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of validate_graph.

    ``violations`` are invariant breaches (error level); ``warnings`` are
    advisory findings on graphs that are still valid. An empty ``violations``
    tuple means the graph satisfies every structural invariant.
    """

    violations: tuple[Violation, ...] = ()
    warnings: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> list[ViolationCode]:
        return [v.code for v in self.violations]


def _blank(text: str) -> bool:
    return not text.strip()


def validate_graph(graph: StudyGraph) -> ValidationReport:
    """Check every structural invariant of a study graph.

    Violations are reported in deterministic order: graph-level findings
    first, then per element in layer order (hypotheses, experiments,
    interpretations), with ties broken by code. Validation never raises;
    findings are data.
    """
    violations: list[tuple[int, str, Violation]] = []
    warnings: list[tuple[int, str, Violation]] = []

    def err(pos: int, code: ViolationCode, element_id: Optional[str], message: str) -> None:
        violations.append((pos, code.value, Violation(code, element_id, message)))

    def warn(pos: int, code: ViolationCode, element_id: Optional[str], message: str) -> None:
        warnings.append((pos, code.value, Violation(code, element_id, message)))

    if _blank(graph.metadata.source_id):
        err(-1, ViolationCode.EMPTY_FIELD, None, "metadata.source_id is empty")
    if graph.metadata.token_count is not None and graph.metadata.token_count <= 0:
        err(-1, ViolationCode.EMPTY_FIELD, None,
            f"metadata.token_count must be positive, got {graph.metadata.token_count}")
    if not graph.hypotheses:
        err(-1, ViolationCode.NO_HYPOTHESES, None, "graph contains no hypotheses")

    elements = graph.elements()
    seen: dict[str, int] = {}
    for pos, el in enumerate(elements):
        if el.id in seen:
            err(pos, ViolationCode.DUPLICATE_ID, el.id,
                f"identifier {el.id!r} already used by element #{seen[el.id]}")
        else:
            seen[el.id] = pos

    hyp_ids = graph.hypothesis_ids()
    exp_ids = graph.experiment_ids()

    for pos, hyp in enumerate(graph.hypotheses):
        if _blank(hyp.statement):
            err(pos, ViolationCode.EMPTY_STATEMENT, hyp.id, "hypothesis statement is empty")

    offset = len(graph.hypotheses)
    for i, exp in enumerate(graph.experiments):
        pos = offset + i
        if _blank(exp.description):
            err(pos, ViolationCode.EMPTY_STATEMENT, exp.id, "experiment description is empty")
        if not exp.hypothesis_ids:
            err(pos, ViolationCode.MISSING_LINK, exp.id,
                "experiment links to no hypothesis")
        for ref in exp.hypothesis_ids:
            if ref not in hyp_ids:
                err(pos, ViolationCode.DANGLING_REFERENCE, exp.id,
                    f"hypothesis link {ref!r} does not resolve to a hypothesis")
        names: set[str] = set()
        for metric in exp.metrics:
            if _blank(metric.name):
                err(pos, ViolationCode.EMPTY_FIELD, exp.id, "metric with empty name")
            elif metric.name in names:
                err(pos, ViolationCode.DUPLICATE_METRIC, exp.id,
                    f"metric {metric.name!r} defined twice")
            else:
                names.add(metric.name)
        for record in exp.results:
            if record.metric_name not in names and not record.unmatched:
                err(pos, ViolationCode.UNMATCHED_RESULT, exp.id,
                    f"result for unknown metric {record.metric_name!r} "
                    f"(context {record.context!r}) not flagged unmatched")
        if not exp.metrics:
            warn(pos, ViolationCode.NO_METRICS, exp.id, "experiment declares no metrics")

    offset = len(graph.hypotheses) + len(graph.experiments)
    exp_by_id = {e.id: e for e in graph.experiments}
    for i, interp in enumerate(graph.interpretations):
        pos = offset + i
        if _blank(interp.statement):
            err(pos, ViolationCode.EMPTY_STATEMENT, interp.id,
                "interpretation statement is empty")
        if not interp.hypothesis_ids:
            err(pos, ViolationCode.MISSING_LINK, interp.id,
                "interpretation links to no hypothesis")
        if not interp.experiment_ids:
            err(pos, ViolationCode.MISSING_LINK, interp.id,
                "interpretation links to no experiment")
        for ref in interp.hypothesis_ids:
            if ref not in hyp_ids:
                err(pos, ViolationCode.DANGLING_REFERENCE, interp.id,
                    f"hypothesis link {ref!r} does not resolve to a hypothesis")
        for ref in interp.experiment_ids:
            if ref not in exp_ids:
                err(pos, ViolationCode.DANGLING_REFERENCE, interp.id,
                    f"experiment link {ref!r} does not resolve to an experiment")
            else:
                linked = exp_by_id[ref].hypothesis_ids
                if not (set(linked) & set(interp.hypothesis_ids)):
                    warn(pos, ViolationCode.UNRELATED_EXPERIMENT, interp.id,
                         f"experiment {ref!r} is not linked to any hypothesis "
                         "of this interpretation")

    violations.sort(key=lambda item: (item[0], item[1]))
    warnings.sort(key=lambda item: (item[0], item[1]))
    return ValidationReport(
        violations=tuple(v for _, _, v in violations),
        warnings=tuple(w for _, _, w in warnings),
    )


def next_id(prefix: str, taken: Iterable[str]) -> str:
    """Smallest unused human-readable id of the form <prefix><n>, n >= 1."""
    used = set(taken)
    n = 1
    while f"{prefix}{n}" in used:
        n += 1
    return f"{prefix}{n}"


def fresh_element_id(graph: StudyGraph, kind: str) -> str:
    """Fresh id for a supplemented element: H* for hypotheses, E* for
    experiments, I* for interpretations."""
    prefix = {"hypothesis": "H", "experiment": "E", "interpretation": "I"}[kind]
    return next_id(prefix, (el.id for el in graph.elements()))
