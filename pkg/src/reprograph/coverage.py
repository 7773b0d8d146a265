"""Reproduction coverage scoring.

A reproduction attempt declares, per experiment, whether it was reproduced
(and whether the original assessment test passed), and per interpretation,
whether the interpretation was upheld. Scoring turns that record into
coverage fractions over the study graph: interpretations upheld,
experiments reproduced, and hypotheses supported.

A hypothesis counts as supported only when it has at least one supporting
interpretation and every supporting interpretation that links to it was
upheld. Repudiating and inconclusive interpretations never contribute
support; partial credit shows up in the interpretation fraction instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Optional

from .canonical import (
    FORMAT_VERSION,
    ParseFailure,
    _Reader,
    canonical_dumps,
    canonical_loads,
    parse_record,
    record_doc,
)
from .model import ResultRecord, StudyGraph, Verdict


class CoverageError(ValueError):
    """Base class for scoring failures."""


class UnknownIdError(CoverageError):
    """The attempt references an element id absent from the graph."""


class InconsistentAttemptError(CoverageError):
    """An interpretation is marked upheld although a linked experiment was
    not reproduced."""


@dataclass(frozen=True)
class ExperimentOutcome:
    reproduced: bool
    test_passed: Optional[bool] = None
    reproduced_results: tuple[ResultRecord, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "reproduced_results",
                           tuple(self.reproduced_results))


@dataclass(frozen=True)
class ReproductionAttempt:
    study_id: str
    experiment_outcomes: Mapping[str, ExperimentOutcome] = field(
        default_factory=dict)
    interpretation_verdicts: Mapping[str, bool] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "experiment_outcomes",
                           dict(self.experiment_outcomes))
        object.__setattr__(self, "interpretation_verdicts",
                           dict(self.interpretation_verdicts))

    def reproduced(self, experiment_id: str) -> bool:
        outcome = self.experiment_outcomes.get(experiment_id)
        return outcome is not None and outcome.reproduced

    def upheld(self, interpretation_id: str) -> bool:
        return bool(self.interpretation_verdicts.get(interpretation_id, False))


@dataclass(frozen=True)
class CoverageScore:
    interpretations_upheld: float
    hypotheses_supported: float
    experiments_reproduced: float
    per_hypothesis: Mapping[str, bool]

    def __post_init__(self) -> None:
        object.__setattr__(self, "per_hypothesis", dict(self.per_hypothesis))


def _check_attempt(graph: StudyGraph, attempt: ReproductionAttempt) -> None:
    exp_ids = graph.experiment_ids()
    int_ids = graph.interpretation_ids()
    for eid in attempt.experiment_outcomes:
        if eid not in exp_ids:
            raise UnknownIdError(f"experiment {eid!r} is not in the graph")
    for iid in attempt.interpretation_verdicts:
        if iid not in int_ids:
            raise UnknownIdError(f"interpretation {iid!r} is not in the graph")
    for interp in graph.interpretations:
        if not attempt.upheld(interp.id):
            continue
        for eid in interp.experiment_ids:
            if not attempt.reproduced(eid):
                raise InconsistentAttemptError(
                    f"interpretation {interp.id!r} is marked upheld but its "
                    f"linked experiment {eid!r} was not reproduced")


def score_reproduction(graph: StudyGraph,
                       attempt: ReproductionAttempt) -> CoverageScore:
    """Coverage fractions of a reproduction attempt over a study graph.

    Fractions use the graph's element counts as denominators; elements
    absent from the attempt count as not reproduced / not upheld. Element
    order in the graph never affects the result.
    """
    _check_attempt(graph, attempt)

    n_interp = len(graph.interpretations)
    n_exp = len(graph.experiments)
    n_hyp = len(graph.hypotheses)

    upheld = sum(1 for i in graph.interpretations if attempt.upheld(i.id))
    reproduced = sum(1 for e in graph.experiments if attempt.reproduced(e.id))

    per_hypothesis: dict[str, bool] = {}
    for hyp in graph.hypotheses:
        supporting = [i for i in graph.interpretations
                      if hyp.id in i.hypothesis_ids
                      and i.verdict is Verdict.SUPPORTS]
        per_hypothesis[hyp.id] = bool(supporting) and all(
            attempt.upheld(i.id) for i in supporting)
    supported = sum(1 for ok in per_hypothesis.values() if ok)

    def fraction(numerator: int, denominator: int) -> float:
        return float(Fraction(numerator, denominator)) if denominator else 0.0

    return CoverageScore(
        interpretations_upheld=fraction(upheld, n_interp),
        hypotheses_supported=fraction(supported, n_hyp),
        experiments_reproduced=fraction(reproduced, n_exp),
        per_hypothesis=per_hypothesis,
    )


@dataclass(frozen=True)
class ScoreExplanation:
    element_id: str
    status: str
    reason: str


def explain_score(graph: StudyGraph,
                  attempt: ReproductionAttempt) -> list[ScoreExplanation]:
    """One entry per element, in layer order, naming the minimal cause of
    its status."""
    _check_attempt(graph, attempt)
    entries: list[ScoreExplanation] = []

    score = score_reproduction(graph, attempt)
    for hyp in graph.hypotheses:
        supporting = [i for i in graph.interpretations
                      if hyp.id in i.hypothesis_ids
                      and i.verdict is Verdict.SUPPORTS]
        if not supporting:
            entries.append(ScoreExplanation(
                hyp.id, "unsupported", "no supporting interpretation"))
        elif score.per_hypothesis[hyp.id]:
            entries.append(ScoreExplanation(
                hyp.id, "supported",
                f"all {len(supporting)} supporting interpretation(s) upheld"))
        else:
            failed = sorted(i.id for i in supporting if not attempt.upheld(i.id))
            entries.append(ScoreExplanation(
                hyp.id, "unsupported",
                f"interpretation(s) not upheld: {', '.join(failed)}"))

    for exp in graph.experiments:
        outcome = attempt.experiment_outcomes.get(exp.id)
        if outcome is None:
            entries.append(ScoreExplanation(
                exp.id, "not_reproduced", "no reproduction recorded"))
        elif outcome.reproduced:
            detail = "reproduced"
            if outcome.test_passed is True:
                detail += ", assessment test passed"
            elif outcome.test_passed is False:
                detail += ", assessment test failed"
            entries.append(ScoreExplanation(exp.id, "reproduced", detail))
        else:
            entries.append(ScoreExplanation(
                exp.id, "not_reproduced", "reproduction attempted and failed"))

    for interp in graph.interpretations:
        if attempt.upheld(interp.id):
            entries.append(ScoreExplanation(interp.id, "upheld",
                                            "declared upheld by the attempt"))
        else:
            blockers = sorted(eid for eid in interp.experiment_ids
                              if not attempt.reproduced(eid))
            if blockers:
                entries.append(ScoreExplanation(
                    interp.id, "blocked",
                    f"linked experiment(s) not reproduced: {', '.join(blockers)}"))
            else:
                entries.append(ScoreExplanation(
                    interp.id, "not_upheld",
                    "experiments reproduced but the interpretation was not "
                    "declared upheld"))

    return entries


# --------------------------------------------------------------------------
# Canonical .attempt format
# --------------------------------------------------------------------------


def attempt_doc(attempt: ReproductionAttempt) -> dict[str, Any]:
    outcomes: dict[str, Any] = {}
    for eid in sorted(attempt.experiment_outcomes):
        outcome = attempt.experiment_outcomes[eid]
        doc: dict[str, Any] = {"reproduced": outcome.reproduced}
        if outcome.test_passed is not None:
            doc["test_passed"] = outcome.test_passed
        if outcome.reproduced_results:
            doc["reproduced_results"] = [record_doc(r)
                                         for r in outcome.reproduced_results]
        outcomes[eid] = doc
    return {
        "format_version": FORMAT_VERSION,
        "study_id": attempt.study_id,
        "experiment_outcomes": outcomes,
        "interpretation_verdicts": {
            iid: attempt.interpretation_verdicts[iid]
            for iid in sorted(attempt.interpretation_verdicts)},
    }


def serialize_attempt(attempt: ReproductionAttempt) -> str:
    """Canonical ``.attempt`` document. Byte-deterministic."""
    return canonical_dumps(attempt_doc(attempt))


def parse_attempt(text: str, strict: bool = True) -> ReproductionAttempt:
    """Parse a canonical ``.attempt`` document."""
    root = canonical_loads(text)
    reader = _Reader(root, "$", strict)
    version = reader.take("format_version", str)
    if version != FORMAT_VERSION:
        raise ParseFailure(f"unsupported format_version {version!r} "
                           f"(expected {FORMAT_VERSION!r})",
                           location="$.format_version")
    study_id = reader.take("study_id", str)

    outcomes: dict[str, ExperimentOutcome] = {}
    raw_outcomes = reader.take("experiment_outcomes", dict, required=False,
                               default={})
    for eid, raw in raw_outcomes.items():
        sub = _Reader(raw, f"$.experiment_outcomes.{eid}", strict)
        outcomes[eid] = ExperimentOutcome(
            reproduced=sub.take("reproduced", bool),
            test_passed=sub.take("test_passed", bool, required=False),
            reproduced_results=tuple(
                parse_record(r, strict)
                for r in sub.take_list("reproduced_results")),
        )
        sub.finish()

    verdicts: dict[str, bool] = {}
    raw_verdicts = reader.take("interpretation_verdicts", dict, required=False,
                               default={})
    for iid, value in raw_verdicts.items():
        if not isinstance(value, bool):
            raise ParseFailure(
                f"verdict for {iid!r} must be a boolean",
                location=f"$.interpretation_verdicts.{iid}")
        verdicts[iid] = value

    reader.finish()
    return ReproductionAttempt(study_id=study_id, experiment_outcomes=outcomes,
                               interpretation_verdicts=verdicts)
