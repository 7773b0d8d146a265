"""Extraction-quality metrics.

Diffs an extracted study graph against its human-corrected counterpart into
a CorrectionSet, and aggregates correction sets into the standard error
report: per-category error counts and proportions, plus mean edit distances
over corrected statements. Percentages are rounded half-to-even at two
decimals; edit-distance averages are rounded up to whole characters. All
rounding is done in exact rational arithmetic so the formatted output is
reproducible to the byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .model import (
    Element,
    ResultRecord,
    ResultValue,
    StudyGraph,
    ValueKind,
)


class MetricsError(ValueError):
    """Base class for metric computation failures."""


class DegenerateInputError(MetricsError):
    """Relative edit percentage against an empty corrected string."""


class AlignmentError(MetricsError):
    """Extracted and corrected graphs cannot be aligned by element id."""


class EmptyPopulationError(MetricsError):
    """A report category was given a population of zero."""


class MixedScaleError(MetricsError):
    """One rating category mixes 5-point and 7-point ratings."""


# --------------------------------------------------------------------------
# Edit distance
# --------------------------------------------------------------------------


def levenshtein(a: str, b: str) -> int:
    """Unit-cost insert/delete/substitute distance over Unicode scalar values."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        current = [i]
        append = current.append
        for j, cb in enumerate(b, 1):
            append(min(previous[j] + 1,
                       current[j - 1] + 1,
                       previous[j - 1] + (ca != cb)))
        previous = current
    return previous[-1]


def relative_edit_fraction(original: str, corrected: str) -> Fraction:
    """Edit distance as an exact fraction of the corrected statement length,
    in percent."""
    if not corrected:
        raise DegenerateInputError(
            "relative edit percentage is undefined for an empty corrected string")
    return Fraction(100 * levenshtein(original, corrected), len(corrected))


def relative_edit_pct(original: str, corrected: str) -> float:
    """100 * levenshtein(original, corrected) / len(corrected)."""
    return float(relative_edit_fraction(original, corrected))


def round_pct_hundredths(value: Fraction) -> int:
    """Percentage rounded half-to-even at 2 decimals, in integer hundredths."""
    return round(value * 100)


def fmt_hundredths(hundredths: int) -> str:
    return f"{hundredths // 100}.{hundredths % 100:02d}"


# --------------------------------------------------------------------------
# Correction sets
# --------------------------------------------------------------------------


class ElementKind(str, Enum):
    HYPOTHESIS = "hypothesis"
    EXPERIMENT = "experiment"
    INTERPRETATION = "interpretation"


class LinkField(str, Enum):
    EXP_HYP = "exp_hyp"
    INT_HYP = "int_hyp"
    INT_EXP = "int_exp"


class DetailCategory(str, Enum):
    METRICS = "metrics"
    STATISTICS = "statistics"
    STRATEGY = "strategy"


@dataclass(frozen=True)
class StatementEdit:
    """Text correction of one statement (for experiments: the description)."""

    element_id: str
    kind: ElementKind
    original: str
    corrected: str

    @property
    def distance(self) -> int:
        return levenshtein(self.original, self.corrected)


@dataclass(frozen=True)
class LinkEdit:
    element_id: str
    link_field: LinkField
    added: tuple[str, ...] = ()
    removed: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "added", tuple(sorted(set(self.added))))
        object.__setattr__(self, "removed", tuple(sorted(set(self.removed))))


@dataclass(frozen=True)
class DetailEdit:
    element_id: str
    category: DetailCategory
    changed: bool = True


@dataclass(frozen=True)
class ResultEdit:
    """Result-record corrections for one experiment.

    ``added`` holds records present only after correction (values the
    extraction missed), ``changed`` pairs an extracted record with its
    corrected form, ``removed`` holds extracted records the reviewer deleted.
    The error count treats missing values and incorrect values alike; a
    changed pair counts as incorrect only when the value itself differs.
    """

    element_id: str
    added: tuple[ResultRecord, ...] = ()
    changed: tuple[tuple[ResultRecord, ResultRecord], ...] = ()
    removed: tuple[ResultRecord, ...] = ()

    @property
    def missing_count(self) -> int:
        return len(self.added)

    @property
    def incorrect_count(self) -> int:
        wrong = sum(1 for old, new in self.changed if old.value != new.value)
        return wrong + len(self.removed)

    @property
    def error_count(self) -> int:
        return self.missing_count + self.incorrect_count


@dataclass(frozen=True)
class Supplement:
    """An element the extraction missed entirely, added by the reviewer."""

    kind: ElementKind
    element: Element


@dataclass(frozen=True)
class CorrectionSet:
    study_id: str
    statement_edits: tuple[StatementEdit, ...] = ()
    link_edits: tuple[LinkEdit, ...] = ()
    detail_edits: tuple[DetailEdit, ...] = ()
    result_edits: tuple[ResultEdit, ...] = ()
    supplements: tuple[Supplement, ...] = ()

    def is_empty(self) -> bool:
        return not (self.statement_edits or self.link_edits or self.detail_edits
                    or self.result_edits or self.supplements)

    def statement_edits_for(self, kind: ElementKind) -> tuple[StatementEdit, ...]:
        return tuple(e for e in self.statement_edits if e.kind is kind)

    def elements_with_link_edits(self, field_: LinkField) -> set[str]:
        return {e.element_id for e in self.link_edits if e.link_field is field_}

    def elements_with_detail_edits(self, category: DetailCategory) -> set[str]:
        return {e.element_id for e in self.detail_edits
                if e.category is category and e.changed}

    def result_error_count(self) -> int:
        return sum(e.error_count for e in self.result_edits)


def _values_equal(a: ResultValue, b: ResultValue, tolerance: float) -> bool:
    if a.kind is not b.kind:
        return False
    if tolerance <= 0:
        return a == b

    def close(x: Optional[float], y: Optional[float]) -> bool:
        if x is None or y is None:
            return x is y or x == y
        return abs(x - y) <= tolerance

    if a.kind is ValueKind.SCALAR:
        return close(a.value, b.value) and close(a.uncertainty, b.uncertainty)
    if a.kind is ValueKind.INTERVAL:
        return close(a.low, b.low) and close(a.high, b.high)
    return a == b


def compare_graphs(extracted: StudyGraph, corrected: StudyGraph,
                   value_tolerance: float = 0.0) -> CorrectionSet:
    """Diff an extracted graph against its corrected counterpart.

    Elements are aligned by id: every extracted element must appear in the
    corrected graph under the same id and kind (corrections preserve ids;
    reviewer additions carry fresh ids and come back as supplements).
    Raises AlignmentError when that alignment is impossible.
    """
    statement_edits: list[StatementEdit] = []
    link_edits: list[LinkEdit] = []
    detail_edits: list[DetailEdit] = []
    result_edits: list[ResultEdit] = []
    supplements: list[Supplement] = []

    def aligned(kind: ElementKind, olds: Sequence[Element],
                news: Sequence[Element]) -> list[tuple[Element, Element]]:
        by_id = {el.id: el for el in news}
        pairs = []
        for old in olds:
            new = by_id.get(old.id)
            if new is None:
                raise AlignmentError(
                    f"{kind.value} {old.id!r} from the extracted graph is "
                    "missing in the corrected graph")
            pairs.append((old, new))
        old_ids = {el.id for el in olds}
        for new in news:
            if new.id not in old_ids:
                supplements.append(Supplement(kind, new))
        return pairs

    for old, new in aligned(ElementKind.HYPOTHESIS,
                            extracted.hypotheses, corrected.hypotheses):
        if old.statement != new.statement:
            statement_edits.append(StatementEdit(
                old.id, ElementKind.HYPOTHESIS, old.statement, new.statement))

    for old, new in aligned(ElementKind.EXPERIMENT,
                            extracted.experiments, corrected.experiments):
        if old.description != new.description:
            statement_edits.append(StatementEdit(
                old.id, ElementKind.EXPERIMENT, old.description, new.description))
        if set(old.hypothesis_ids) != set(new.hypothesis_ids):
            link_edits.append(LinkEdit(
                old.id, LinkField.EXP_HYP,
                added=tuple(set(new.hypothesis_ids) - set(old.hypothesis_ids)),
                removed=tuple(set(old.hypothesis_ids) - set(new.hypothesis_ids))))
        if old.metrics != new.metrics:
            detail_edits.append(DetailEdit(old.id, DetailCategory.METRICS))
        if old.statistics != new.statistics:
            detail_edits.append(DetailEdit(old.id, DetailCategory.STATISTICS))
        if old.strategy != new.strategy:
            detail_edits.append(DetailEdit(old.id, DetailCategory.STRATEGY))

        old_records = {r.key(): r for r in old.results}
        new_records = {r.key(): r for r in new.results}
        added = tuple(r for r in new.results if r.key() not in old_records)
        removed = tuple(r for r in old.results if r.key() not in new_records)
        changed = tuple(
            (r, new_records[r.key()]) for r in old.results
            if r.key() in new_records and (
                not _values_equal(r.value, new_records[r.key()].value,
                                  value_tolerance)
                # Non-value fields (locator, unmatched flag) compare exactly;
                # aligning the values first keeps tolerance in charge of them.
                or replace(r, value=new_records[r.key()].value)
                != new_records[r.key()]))
        if added or removed or changed:
            result_edits.append(ResultEdit(old.id, added=added,
                                           changed=changed, removed=removed))

    for old, new in aligned(ElementKind.INTERPRETATION,
                            extracted.interpretations, corrected.interpretations):
        if old.statement != new.statement:
            statement_edits.append(StatementEdit(
                old.id, ElementKind.INTERPRETATION, old.statement, new.statement))
        if set(old.hypothesis_ids) != set(new.hypothesis_ids):
            link_edits.append(LinkEdit(
                old.id, LinkField.INT_HYP,
                added=tuple(set(new.hypothesis_ids) - set(old.hypothesis_ids)),
                removed=tuple(set(old.hypothesis_ids) - set(new.hypothesis_ids))))
        if set(old.experiment_ids) != set(new.experiment_ids):
            link_edits.append(LinkEdit(
                old.id, LinkField.INT_EXP,
                added=tuple(set(new.experiment_ids) - set(old.experiment_ids)),
                removed=tuple(set(old.experiment_ids) - set(new.experiment_ids))))

    return CorrectionSet(
        study_id=extracted.study_id,
        statement_edits=tuple(statement_edits),
        link_edits=tuple(link_edits),
        detail_edits=tuple(detail_edits),
        result_edits=tuple(result_edits),
        supplements=tuple(supplements),
    )


def apply_correction_set(graph: StudyGraph, corrections: CorrectionSet) -> StudyGraph:
    """Apply a correction set's statement, link, and result edits (plus
    supplements) to a graph.

    Detail edits are boolean flags and carry no replacement payload, so
    detail fields are left untouched. Result reconstruction preserves the
    extracted record order, with reviewer-added records appended; this
    matches how review sessions mutate their working copy.
    """
    statements = {(e.kind, e.element_id): e.corrected
                  for e in corrections.statement_edits}
    links: dict[tuple[str, LinkField], LinkEdit] = {
        (e.element_id, e.link_field): e for e in corrections.link_edits}
    results = {e.element_id: e for e in corrections.result_edits}

    def fix_links(current: Iterable[str], element_id: str,
                  field_: LinkField) -> tuple[str, ...]:
        edit = links.get((element_id, field_))
        if edit is None:
            return tuple(current)
        return tuple((set(current) - set(edit.removed)) | set(edit.added))

    hypotheses = [
        replace(h, statement=statements.get((ElementKind.HYPOTHESIS, h.id),
                                            h.statement))
        for h in graph.hypotheses
    ]

    experiments = []
    for exp in graph.experiments:
        edit = results.get(exp.id)
        records = exp.results
        if edit is not None:
            removed_keys = {r.key() for r in edit.removed}
            changed_by_key = {old.key(): new for old, new in edit.changed}
            kept = [changed_by_key.get(r.key(), r) for r in exp.results
                    if r.key() not in removed_keys]
            records = tuple(kept) + edit.added
        experiments.append(replace(
            exp,
            description=statements.get((ElementKind.EXPERIMENT, exp.id),
                                       exp.description),
            hypothesis_ids=fix_links(exp.hypothesis_ids, exp.id, LinkField.EXP_HYP),
            results=records,
        ))

    interpretations = [
        replace(
            i,
            statement=statements.get((ElementKind.INTERPRETATION, i.id),
                                     i.statement),
            hypothesis_ids=fix_links(i.hypothesis_ids, i.id, LinkField.INT_HYP),
            experiment_ids=fix_links(i.experiment_ids, i.id, LinkField.INT_EXP),
        )
        for i in graph.interpretations
    ]

    for supplement in corrections.supplements:
        if supplement.kind is ElementKind.HYPOTHESIS:
            hypotheses.append(supplement.element)
        elif supplement.kind is ElementKind.EXPERIMENT:
            experiments.append(supplement.element)
        else:
            interpretations.append(supplement.element)

    return replace(graph, hypotheses=tuple(hypotheses),
                   experiments=tuple(experiments),
                   interpretations=tuple(interpretations))


# --------------------------------------------------------------------------
# Aggregated error report
# --------------------------------------------------------------------------

HYPOTHESIS_STATEMENTS = "hypothesis_statements"
HYPOTHESIS_EDIT_DISTANCE = "hypothesis_edit_distance"
INTERPRETATION_STATEMENTS = "interpretation_statements"
INTERPRETATION_EDIT_DISTANCE = "interpretation_edit_distance"
EXPERIMENT_HYPOTHESIS_LINKS = "experiment_hypothesis_links"
INTERPRETATION_HYPOTHESIS_LINKS = "interpretation_hypothesis_links"
INTERPRETATION_EXPERIMENT_LINKS = "interpretation_experiment_links"
EXPERIMENT_METRICS = "experiment_metrics"
EXPERIMENT_STATISTICS = "experiment_statistics"
EXPERIMENT_STRATEGY = "experiment_strategy"
EXPERIMENT_RESULTS = "experiment_results"

REPORT_CATEGORIES = (
    HYPOTHESIS_STATEMENTS,
    HYPOTHESIS_EDIT_DISTANCE,
    INTERPRETATION_STATEMENTS,
    INTERPRETATION_EDIT_DISTANCE,
    EXPERIMENT_HYPOTHESIS_LINKS,
    INTERPRETATION_HYPOTHESIS_LINKS,
    INTERPRETATION_EXPERIMENT_LINKS,
    EXPERIMENT_METRICS,
    EXPERIMENT_STATISTICS,
    EXPERIMENT_STRATEGY,
    EXPERIMENT_RESULTS,
)


@dataclass(frozen=True)
class ReportRow:
    """One error-report row.

    For count categories, ``count`` is the number of errors and
    ``population`` the category total. For the edit-distance rows, ``count``
    is the ceiling-rounded mean edit distance over corrected statements,
    ``population`` is None, and the percentage is the mean relative edit.
    """

    category: str
    count: int
    population: Optional[int]
    pct_hundredths: int

    @property
    def proportion_pct(self) -> float:
        return self.pct_hundredths / 100

    @property
    def proportion_str(self) -> str:
        return fmt_hundredths(self.pct_hundredths)


@dataclass(frozen=True)
class Populations:
    """Per-category denominators for the error report."""

    hypotheses: int
    experiments: int
    interpretations: int
    result_values: int

    def __post_init__(self) -> None:
        for name in ("hypotheses", "experiments", "interpretations",
                     "result_values"):
            if getattr(self, name) <= 0:
                raise EmptyPopulationError(f"population {name!r} must be positive")


def populations_for(graphs: Sequence[StudyGraph]) -> Populations:
    """Category denominators counted over ground-truth graphs."""
    return Populations(
        hypotheses=sum(len(g.hypotheses) for g in graphs),
        experiments=sum(len(g.experiments) for g in graphs),
        interpretations=sum(len(g.interpretations) for g in graphs),
        result_values=sum(len(e.results) for g in graphs for e in g.experiments),
    )


@dataclass(frozen=True)
class ErrorReport:
    rows: tuple[ReportRow, ...]

    def row(self, category: str) -> ReportRow:
        for row in self.rows:
            if row.category == category:
                return row
        raise KeyError(category)

    def to_table(self, delimiter: str = "\t") -> str:
        """Delimiter-separated table: category, errors, proportion."""
        lines = [delimiter.join(("category", "errors", "proportion_pct"))]
        for row in self.rows:
            lines.append(delimiter.join(
                (row.category, str(row.count), row.proportion_str)))
        return "\n".join(lines) + "\n"


def _edit_stats(edits: Sequence[StatementEdit]) -> tuple[int, int]:
    """(ceil of mean edit distance, mean relative edit in hundredths) over
    the given edits; (0, 0) when there are none."""
    if not edits:
        return 0, 0
    distances = [e.distance for e in edits]
    mean_distance = math.ceil(Fraction(sum(distances), len(distances)))
    relative = [relative_edit_fraction(e.original, e.corrected) for e in edits]
    mean_relative = Fraction(sum(relative), len(relative))
    return mean_distance, round_pct_hundredths(mean_relative)


def aggregate_reports(sets: Sequence[CorrectionSet],
                      populations: Populations) -> ErrorReport:
    """Fold correction sets into the standard error report.

    Statement and link errors count affected elements; detail errors count
    affected experiments per category; result errors count missing plus
    incorrect values. Proportions are half-to-even at 2 decimals against the
    given populations; edit-distance averages are computed over corrected
    statements only and rounded up.
    """
    counts = {
        HYPOTHESIS_STATEMENTS: 0,
        INTERPRETATION_STATEMENTS: 0,
        EXPERIMENT_HYPOTHESIS_LINKS: 0,
        INTERPRETATION_HYPOTHESIS_LINKS: 0,
        INTERPRETATION_EXPERIMENT_LINKS: 0,
        EXPERIMENT_METRICS: 0,
        EXPERIMENT_STATISTICS: 0,
        EXPERIMENT_STRATEGY: 0,
        EXPERIMENT_RESULTS: 0,
    }
    hypothesis_edits: list[StatementEdit] = []
    interpretation_edits: list[StatementEdit] = []

    for cs in sets:
        hyp = cs.statement_edits_for(ElementKind.HYPOTHESIS)
        interp = cs.statement_edits_for(ElementKind.INTERPRETATION)
        hypothesis_edits.extend(hyp)
        interpretation_edits.extend(interp)
        counts[HYPOTHESIS_STATEMENTS] += len(hyp)
        counts[INTERPRETATION_STATEMENTS] += len(interp)
        counts[EXPERIMENT_HYPOTHESIS_LINKS] += len(
            cs.elements_with_link_edits(LinkField.EXP_HYP))
        counts[INTERPRETATION_HYPOTHESIS_LINKS] += len(
            cs.elements_with_link_edits(LinkField.INT_HYP))
        counts[INTERPRETATION_EXPERIMENT_LINKS] += len(
            cs.elements_with_link_edits(LinkField.INT_EXP))
        counts[EXPERIMENT_METRICS] += len(
            cs.elements_with_detail_edits(DetailCategory.METRICS))
        counts[EXPERIMENT_STATISTICS] += len(
            cs.elements_with_detail_edits(DetailCategory.STATISTICS))
        counts[EXPERIMENT_STRATEGY] += len(
            cs.elements_with_detail_edits(DetailCategory.STRATEGY))
        counts[EXPERIMENT_RESULTS] += cs.result_error_count()

    population_of = {
        HYPOTHESIS_STATEMENTS: populations.hypotheses,
        INTERPRETATION_STATEMENTS: populations.interpretations,
        EXPERIMENT_HYPOTHESIS_LINKS: populations.experiments,
        INTERPRETATION_HYPOTHESIS_LINKS: populations.interpretations,
        INTERPRETATION_EXPERIMENT_LINKS: populations.interpretations,
        EXPERIMENT_METRICS: populations.experiments,
        EXPERIMENT_STATISTICS: populations.experiments,
        EXPERIMENT_STRATEGY: populations.experiments,
        EXPERIMENT_RESULTS: populations.result_values,
    }
    for category, count in counts.items():
        if count > population_of[category]:
            raise MetricsError(
                f"{category}: error count {count} exceeds population "
                f"{population_of[category]}")

    def count_row(category: str) -> ReportRow:
        population = population_of[category]
        pct = round_pct_hundredths(Fraction(100 * counts[category], population))
        return ReportRow(category, counts[category], population, pct)

    hyp_mean, hyp_rel = _edit_stats(hypothesis_edits)
    int_mean, int_rel = _edit_stats(interpretation_edits)

    rows = (
        count_row(HYPOTHESIS_STATEMENTS),
        ReportRow(HYPOTHESIS_EDIT_DISTANCE, hyp_mean, None, hyp_rel),
        count_row(INTERPRETATION_STATEMENTS),
        ReportRow(INTERPRETATION_EDIT_DISTANCE, int_mean, None, int_rel),
        count_row(EXPERIMENT_HYPOTHESIS_LINKS),
        count_row(INTERPRETATION_HYPOTHESIS_LINKS),
        count_row(INTERPRETATION_EXPERIMENT_LINKS),
        count_row(EXPERIMENT_METRICS),
        count_row(EXPERIMENT_STATISTICS),
        count_row(EXPERIMENT_STRATEGY),
        count_row(EXPERIMENT_RESULTS),
    )
    return ErrorReport(rows=rows)


# --------------------------------------------------------------------------
# Likert ratings
# --------------------------------------------------------------------------

RATING_HYPOTHESIS = "hypothesis"
RATING_EXPERIMENT_DESCRIPTION = "experiment_description"
RATING_EXPERIMENT_DETAILS = "experiment_details"
RATING_INTERPRETATION = "interpretation"

RATING_CATEGORIES = (
    RATING_HYPOTHESIS,
    RATING_EXPERIMENT_DESCRIPTION,
    RATING_EXPERIMENT_DETAILS,
    RATING_INTERPRETATION,
)

# Hypotheses are rated on the wider scale; everything else on five points.
RATING_SCALES = {
    RATING_HYPOTHESIS: 7,
    RATING_EXPERIMENT_DESCRIPTION: 5,
    RATING_EXPERIMENT_DETAILS: 5,
    RATING_INTERPRETATION: 5,
}


@dataclass(frozen=True)
class LikertRating:
    category: str
    scale: int
    value: int
    element_id: str = ""

    def __post_init__(self) -> None:
        if self.scale not in (5, 7):
            raise ValueError(f"scale must be 5 or 7, got {self.scale}")
        if not 1 <= self.value <= self.scale:
            raise ValueError(
                f"rating {self.value} outside 1..{self.scale} for "
                f"category {self.category!r}")
        expected = RATING_SCALES.get(self.category)
        if expected is not None and self.scale != expected:
            raise ValueError(
                f"category {self.category!r} uses the {expected}-point scale, "
                f"got {self.scale}")


@dataclass(frozen=True)
class LikertDistribution:
    """Counts per scale point for one category, plus the diverging split
    around the scale midpoint used by stacked-bar layouts."""

    category: str
    scale: int
    counts: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.counts)

    def count(self, point: int) -> int:
        return self.counts[point - 1]

    def pct_hundredths(self, point: int) -> int:
        if self.total == 0:
            return 0
        return round_pct_hundredths(Fraction(100 * self.count(point), self.total))

    def diverging(self) -> tuple[float, float, float]:
        """(negative, neutral, positive) percentages around the midpoint."""
        if self.total == 0:
            return (0.0, 0.0, 0.0)
        mid = (self.scale + 1) // 2
        neg = sum(self.counts[: mid - 1])
        neu = self.counts[mid - 1]
        pos = sum(self.counts[mid:])
        return tuple(
            round_pct_hundredths(Fraction(100 * n, self.total)) / 100
            for n in (neg, neu, pos))


def likert_summary(ratings: Sequence[LikertRating]) -> dict[str, LikertDistribution]:
    """Count ratings per scale point per category.

    Raises MixedScaleError when one category mixes scales. Categories are
    returned in first-seen order; an empty input yields an empty mapping.
    """
    scales: dict[str, int] = {}
    tallies: dict[str, list[int]] = {}
    for rating in ratings:
        seen = scales.get(rating.category)
        if seen is None:
            scales[rating.category] = rating.scale
            tallies[rating.category] = [0] * rating.scale
        elif seen != rating.scale:
            raise MixedScaleError(
                f"category {rating.category!r} mixes {seen}- and "
                f"{rating.scale}-point ratings")
        tallies[rating.category][rating.value - 1] += 1
    return {
        category: LikertDistribution(category, scales[category], tuple(counts))
        for category, counts in tallies.items()
    }


def likert_to_table(summary: Mapping[str, LikertDistribution],
                    delimiter: str = "\t") -> str:
    """Plot-ready long-format table: one row per category and scale point."""
    lines = [delimiter.join(("category", "scale", "point", "count", "pct"))]
    for dist in summary.values():
        for point in range(1, dist.scale + 1):
            lines.append(delimiter.join((
                dist.category, str(dist.scale), str(point),
                str(dist.count(point)),
                fmt_hundredths(dist.pct_hundredths(point)))))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Wire format for correction sets
# --------------------------------------------------------------------------


def correction_set_doc(corrections: CorrectionSet) -> dict:
    """JSON-ready document for a correction set (service responses, CLI)."""
    from .canonical import element_doc, record_doc  # deferred: canonical imports model only

    return {
        "study_id": corrections.study_id,
        "statement_edits": [
            {"element_id": e.element_id, "kind": e.kind.value,
             "original": e.original, "corrected": e.corrected,
             "levenshtein": e.distance}
            for e in corrections.statement_edits],
        "link_edits": [
            {"element_id": e.element_id, "link_field": e.link_field.value,
             "added": list(e.added), "removed": list(e.removed)}
            for e in corrections.link_edits],
        "detail_edits": [
            {"element_id": e.element_id, "category": e.category.value,
             "changed": e.changed}
            for e in corrections.detail_edits],
        "result_edits": [
            {"element_id": e.element_id,
             "missing_count": e.missing_count,
             "incorrect_count": e.incorrect_count,
             "added": [record_doc(r) for r in e.added],
             "changed": [{"extracted": record_doc(old),
                          "corrected": record_doc(new)}
                         for old, new in e.changed],
             "removed": [record_doc(r) for r in e.removed]}
            for e in corrections.result_edits],
        "supplements": [
            {"kind": s.kind.value, "element": element_doc(s.element)}
            for s in corrections.supplements],
    }
