"""Shared test machinery: an independent edit-distance oracle, randomized
graph and event generators, and the engineered fixtures behind the frozen
error-report expectations."""

from __future__ import annotations

import random
from functools import lru_cache
from pathlib import Path

from reprograph.canonical import record_doc, serialize_graph
from reprograph.model import (
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
    Verdict,
    fresh_element_id,
    validate_graph,
)
from reprograph.session import (
    EXTRACTED_FILE,
    CORRECTED_FILE,
    EventKind,
    InvalidEventError,
    apply_graph_event,
)


def oracle_levenshtein(a: str, b: str) -> int:
    """Reference edit distance: plain memoized recursion over suffixes.

    Deliberately a different algorithm from the library's two-row DP so the
    two implementations can only agree by both being right.
    """
    @lru_cache(maxsize=None)
    def go(i: int, j: int) -> int:
        if i == len(a):
            return len(b) - j
        if j == len(b):
            return len(a) - i
        if a[i] == b[j]:
            return go(i + 1, j + 1)
        return 1 + min(go(i + 1, j), go(i, j + 1), go(i + 1, j + 1))

    return go(0, 0)


# --------------------------------------------------------------------------
# Randomized graphs
# --------------------------------------------------------------------------

_WORDS = (
    "model", "baseline", "latency", "accuracy", "training", "dataset",
    "seeds", "pruning", "cache", "tokens", "reward", "search", "ablation",
    "improves", "degrades", "matches", "under", "with", "without", "the",
)


def _sentence(rng: random.Random, n_min: int = 3, n_max: int = 9) -> str:
    n = rng.randint(n_min, n_max)
    words = [rng.choice(_WORDS) for _ in range(n)]
    return (" ".join(words)).capitalize() + "."


def _random_value(rng: random.Random) -> ResultValue:
    roll = rng.random()
    if roll < 0.6:
        uncertainty = round(rng.random(), 3) if rng.random() < 0.3 else None
        return ResultValue.scalar(round(rng.uniform(-50, 150), 4), uncertainty)
    if roll < 0.75:
        low = round(rng.uniform(0, 10), 3)
        return ResultValue.interval(low, low + round(rng.random(), 3))
    if roll < 0.9:
        return ResultValue.categorical(rng.choice(_WORDS))
    return ResultValue.missing()


def _subset(rng: random.Random, ids: list[str], n_min: int = 1) -> tuple[str, ...]:
    n = rng.randint(n_min, len(ids))
    return tuple(rng.sample(ids, n))


def random_graph(rng: random.Random, study_id: str = "",
                 ensure_support: bool = False) -> StudyGraph:
    """A small random graph that always satisfies every invariant.

    With ``ensure_support`` every hypothesis gets at least one supporting
    interpretation (needed for full-coverage bound checks).
    """
    n_hyp = rng.randint(1, 4)
    hypotheses = [
        Hypothesis(
            f"H{i + 1}",
            _sentence(rng),
            kind=rng.choice((HypothesisKind.STATED, HypothesisKind.POST_HOC)),
        )
        for i in range(n_hyp)
    ]
    hyp_ids = [h.id for h in hypotheses]

    n_exp = rng.randint(1 if ensure_support else 0, 4)
    experiments = []
    for i in range(n_exp):
        metric_names = [f"m{k + 1}" for k in range(rng.randint(0, 3))]
        metrics = tuple(
            MetricSpec(name,
                       description=_sentence(rng) if rng.random() < 0.3 else None,
                       unit=rng.choice(("%", "ms", None)))
            for name in metric_names)
        results = []
        for k in range(rng.randint(0, 4)):
            if metric_names and rng.random() < 0.85:
                name, unmatched = rng.choice(metric_names), False
            else:
                name, unmatched = f"stray{k}", True
            results.append(ResultRecord(
                name, f"run{k}", _random_value(rng),
                locator=f"tab{k}" if rng.random() < 0.3 else "",
                unmatched=unmatched))
        experiments.append(Experiment(
            f"E{i + 1}",
            _sentence(rng, 4, 12),
            hypothesis_ids=_subset(rng, hyp_ids),
            metrics=metrics,
            statistics=tuple(_sentence(rng, 2, 4)
                             for _ in range(rng.randint(0, 2))),
            strategy=_sentence(rng) if rng.random() < 0.5 else "",
            tests=tuple(
                AssessmentTest(rng.choice(tuple(TestKind)), _sentence(rng, 2, 4))
                for _ in range(rng.randint(0, 2))),
            results=tuple(results)))
    exp_ids = [e.id for e in experiments]

    interpretations = []
    if exp_ids:
        for i in range(rng.randint(0, 4)):
            interpretations.append(Interpretation(
                f"I{i + 1}",
                _sentence(rng, 4, 10),
                hypothesis_ids=_subset(rng, hyp_ids),
                experiment_ids=_subset(rng, exp_ids),
                verdict=rng.choice(tuple(Verdict))))
        if ensure_support:
            covered = {hid for interp in interpretations
                       if interp.verdict is Verdict.SUPPORTS
                       for hid in interp.hypothesis_ids}
            next_no = len(interpretations) + 1
            for hid in hyp_ids:
                if hid not in covered:
                    interpretations.append(Interpretation(
                        f"I{next_no}", _sentence(rng, 4, 10),
                        hypothesis_ids=(hid,),
                        experiment_ids=_subset(rng, exp_ids),
                        verdict=Verdict.SUPPORTS))
                    next_no += 1

    graph = StudyGraph(
        metadata=StudyMetadata(
            source_id=study_id or f"study-{rng.randrange(10 ** 8):08d}",
            title=_sentence(rng) if rng.random() < 0.5 else "",
            token_count=rng.randint(1000, 90000) if rng.random() < 0.5 else None),
        hypotheses=tuple(hypotheses),
        experiments=tuple(experiments),
        interpretations=tuple(interpretations))
    report = validate_graph(graph)
    assert report.ok, report.violations
    return graph


# --------------------------------------------------------------------------
# Randomized review-event sequences
# --------------------------------------------------------------------------


def _propose_event(rng: random.Random, current: StudyGraph,
                   baseline: StudyGraph) -> tuple[EventKind, dict]:
    """One candidate event against the current working graph. May propose
    something invalid; the caller rejection-samples with validation."""
    elements = current.elements()
    kind = rng.choice((
        EventKind.EDIT_STATEMENT, EventKind.EDIT_STATEMENT,
        EventKind.EDIT_LINKS, EventKind.EDIT_DETAILS,
        EventKind.EDIT_RESULT, EventKind.EDIT_RESULT,
        EventKind.SUPPLEMENT, EventKind.RATE,
    ))

    if kind is EventKind.RATE:
        category, scale = rng.choice((("hypothesis", 7),
                                      ("experiment_description", 5),
                                      ("experiment_details", 5),
                                      ("interpretation", 5)))
        return kind, {"category": category, "scale": scale,
                      "value": rng.randint(1, scale),
                      "element_id": rng.choice(elements).id}

    if kind is EventKind.SUPPLEMENT:
        roll = rng.random()
        if roll < 0.4 or not current.experiments:
            element_kind = "hypothesis"
            doc = {"id": fresh_element_id(current, element_kind),
                   "statement": _sentence(rng)}
        elif roll < 0.7:
            element_kind = "experiment"
            doc = {"id": fresh_element_id(current, element_kind),
                   "description": _sentence(rng, 4, 12),
                   "hypothesis_ids": sorted(
                       _subset(rng, [h.id for h in current.hypotheses]))}
        else:
            element_kind = "interpretation"
            doc = {"id": fresh_element_id(current, element_kind),
                   "statement": _sentence(rng, 4, 10),
                   "hypothesis_ids": sorted(
                       _subset(rng, [h.id for h in current.hypotheses])),
                   "experiment_ids": sorted(
                       _subset(rng, [e.id for e in current.experiments])),
                   "verdict": rng.choice(tuple(Verdict)).value}
        return kind, {"kind": element_kind, "element": doc}

    if kind is EventKind.EDIT_STATEMENT:
        element = rng.choice(elements)
        original = baseline.element_by_id(element.id)
        if original is not None and rng.random() < 0.25:
            # revert to the extracted text; must drop out of the corrections
            text = (original.description if isinstance(original, Experiment)
                    else original.statement)
        else:
            text = _sentence(rng, 4, 12)
        return kind, {"element_id": element.id, "text": text}

    if kind is EventKind.EDIT_LINKS:
        candidates = list(current.experiments) + list(current.interpretations)
        if not candidates:
            return EventKind.EDIT_STATEMENT, {
                "element_id": rng.choice(elements).id,
                "text": _sentence(rng)}
        element = rng.choice(candidates)
        if isinstance(element, Experiment):
            field, pool = "exp_hyp", [h.id for h in current.hypotheses]
            have = set(element.hypothesis_ids)
        elif rng.random() < 0.5:
            field, pool = "int_hyp", [h.id for h in current.hypotheses]
            have = set(element.hypothesis_ids)
        else:
            field, pool = "int_exp", [e.id for e in current.experiments]
            have = set(element.experiment_ids)
        target = set(_subset(rng, pool))
        return kind, {"element_id": element.id, "link_field": field,
                      "add": sorted(target - have),
                      "remove": sorted(have - target)}

    if not current.experiments:
        return EventKind.EDIT_STATEMENT, {
            "element_id": rng.choice(elements).id, "text": _sentence(rng)}
    experiment = rng.choice(current.experiments)

    if kind is EventKind.EDIT_DETAILS:
        category = rng.choice(("metrics", "statistics", "strategy"))
        original = baseline.element_by_id(experiment.id)
        revert = original is not None and rng.random() < 0.25
        if category == "metrics":
            if revert:
                value = [
                    {k: v for k, v in
                     (("name", m.name), ("description", m.description),
                      ("unit", m.unit)) if v is not None}
                    for m in original.metrics]
            else:
                value = [{"name": f"m{k + 1}", "unit": rng.choice(("%", "ms"))}
                         for k in range(rng.randint(0, 3))]
        elif category == "statistics":
            value = (list(original.statistics) if revert
                     else [_sentence(rng, 2, 4)
                           for _ in range(rng.randint(0, 2))])
        else:
            value = original.strategy if revert else _sentence(rng)
        return kind, {"element_id": experiment.id, "category": category,
                      "value": value}

    # edit_result
    original = baseline.element_by_id(experiment.id)
    roll = rng.random()
    if roll < 0.3 and experiment.results:
        victim = rng.choice(experiment.results)
        return kind, {"element_id": experiment.id, "action": "remove",
                      "record": {"metric_name": victim.metric_name,
                                 "context": victim.context,
                                 "value": {"kind": "missing"}}}
    if (roll < 0.55 and original is not None and original.results
            and rng.random() < 0.8):
        # restore an extracted record verbatim (possible revert)
        record = rng.choice(original.results)
        return kind, {"element_id": experiment.id, "action": "set",
                      "record": record_doc(record)}
    known = sorted(experiment.metric_names())
    name, unmatched = ((rng.choice(known), False) if known and rng.random() < 0.8
                       else (f"extra{rng.randrange(100)}", True))
    record = ResultRecord(name, f"ctx{rng.randrange(8)}", _random_value(rng),
                          unmatched=unmatched)
    return kind, {"element_id": experiment.id, "action": "set",
                  "record": record_doc(record)}


def random_session_events(rng: random.Random, extracted: StudyGraph,
                          n_events: int) -> tuple[StudyGraph, list[tuple[EventKind, dict]]]:
    """A random sequence of individually valid events, folded as the session
    layer would fold them, plus the resulting corrected graph."""
    current = extracted
    events: list[tuple[EventKind, dict]] = []
    for _ in range(n_events):
        for _attempt in range(25):
            kind, payload = _propose_event(rng, current, extracted)
            try:
                candidate = apply_graph_event(current, kind, payload)
            except InvalidEventError:
                continue
            if validate_graph(candidate).ok:
                current = candidate
                events.append((kind, payload))
                break
    return current, events


# --------------------------------------------------------------------------
# Engineered statement-edit fixtures
#
# The pairs are (edit distance, corrected length). Means were chosen with
# exact rational arithmetic and frozen: hypothesis edits average 814/19
# (ceiling 43) with mean relative edit 14.896617% (rounds to 14.90);
# interpretation edits average 312/9 (ceiling 35) with 4.788235% (4.79).
# Both means are non-integers, so the ceiling rule is actually exercised.
# --------------------------------------------------------------------------

HYP_EDIT_PAIRS: tuple[tuple[int, int], ...] = ((43, 288),) * 18 + ((40, 280),)
INT_EDIT_PAIRS: tuple[tuple[int, int], ...] = ((35, 731),) * 8 + ((32, 668),)


def sized_statement(tag: str, length: int) -> str:
    """Deterministic prose of exactly ``length`` characters."""
    filler = ("the corrected wording of this statement as a reviewer would "
              "leave it after reading the publication carefully ")
    text = f"{tag}: "
    while len(text) < length:
        text += filler
    return text[:length]


def engineered_edit(tag: str, distance: int, length: int) -> tuple[str, str]:
    """(original, corrected) whose edit distance is exactly ``distance``:
    the original is the corrected text with its last ``distance`` characters
    missing, so the length gap forces the distance from below while suffix
    deletion achieves it from above."""
    corrected = sized_statement(tag, length)
    return corrected[:length - distance], corrected


# --------------------------------------------------------------------------
# Synthetic 20-study dataset with planted error counts
# --------------------------------------------------------------------------

PLANTED = {
    "hypothesis_statements": 19,
    "interpretation_statements": 9,
    "experiment_hypothesis_links": 6,
    "interpretation_hypothesis_links": 0,
    "interpretation_experiment_links": 2,
    "experiment_metrics": 15,
    "experiment_statistics": 9,
    "experiment_strategy": 10,
    "experiment_results": 1103,
}

POPULATION_TOTALS = {"hypotheses": 29, "experiments": 32,
                     "interpretations": 37, "result_values": 1584}


def _study_shape(i: int) -> tuple[int, int, int]:
    """Element counts of synthetic study ``i``; totals 29/32/37 over 20."""
    return (2 if i < 9 else 1, 2 if i < 12 else 1, 2 if i < 17 else 1)


def build_synthetic_dataset(root: Path) -> int:
    """Write 20 extracted/corrected study pairs under ``root`` whose
    aggregate error report is known exactly (the PLANTED counts, with the
    engineered statement-edit averages). Returns the number of studies."""
    hyp_edits = iter(enumerate(HYP_EDIT_PAIRS))
    int_edits = iter(enumerate(INT_EDIT_PAIRS))
    hyp_no = exp_no = int_no = 0

    n_records = lambda exp_index: 50 if exp_index < 16 else 49
    n_damaged = lambda exp_index: 35 if exp_index < 15 else 34

    for study_index in range(20):
        n_hyp, n_exp, n_int = _study_shape(study_index)
        corrected_h, extracted_h = [], []
        for _ in range(n_hyp):
            hid = f"H{len(corrected_h) + 1}"
            tag = f"Hypothesis {hyp_no:02d}"
            edit = next(hyp_edits, None) if hyp_no < 19 else None
            if edit is not None:
                _, (distance, length) = edit
                original, corrected = engineered_edit(tag, distance, length)
            else:
                original = corrected = sized_statement(tag, 120)
            corrected_h.append(Hypothesis(hid, corrected))
            extracted_h.append(Hypothesis(hid, original))
            hyp_no += 1
        hyp_ids = tuple(h.id for h in corrected_h)

        corrected_e, extracted_e = [], []
        for _ in range(n_exp):
            eid = f"E{len(corrected_e) + 1}"
            total = n_records(exp_no)
            damaged = n_damaged(exp_no)
            metrics = tuple(MetricSpec(f"m{k + 1}", unit="%") for k in range(5))
            corrected_records, extracted_records = [], []
            for k in range(total):
                record = ResultRecord(f"m{k % 5 + 1}", f"c{k:02d}",
                                      ResultValue.scalar(float(100 + k)))
                corrected_records.append(record)
                if k >= damaged:
                    extracted_records.append(record)
                elif k % 2 == 1:  # incorrect value; even k: missing entirely
                    extracted_records.append(ResultRecord(
                        record.metric_name, record.context,
                        ResultValue.scalar(record.value.value + 1.0)))

            # per-category damage windows over the global experiment index
            bad_links = exp_no < 6 and len(hyp_ids) > 1
            bad_metrics = exp_no < 15
            bad_statistics = 5 <= exp_no < 14
            bad_strategy = 10 <= exp_no < 20

            description = sized_statement(f"Experiment {exp_no:02d}", 140)
            statistics = ("mean over 5 seeds", "standard deviation")
            strategy = "grid search over learning rates"
            corrected_e.append(Experiment(
                eid, description, hyp_ids, metrics=metrics,
                statistics=statistics, strategy=strategy,
                results=tuple(corrected_records)))
            extracted_e.append(Experiment(
                eid, description,
                hyp_ids[:-1] if bad_links else hyp_ids,
                metrics=(tuple(MetricSpec(m.name, unit=None) for m in metrics)
                         if bad_metrics else metrics),
                statistics=statistics[:-1] if bad_statistics else statistics,
                strategy="grid search" if bad_strategy else strategy,
                results=tuple(extracted_records)))
            exp_no += 1
        exp_ids = tuple(e.id for e in corrected_e)

        corrected_i, extracted_i = [], []
        for _ in range(n_int):
            iid = f"I{len(corrected_i) + 1}"
            tag = f"Interpretation {int_no:02d}"
            edit = next(int_edits, None) if int_no < 9 else None
            if edit is not None:
                _, (distance, length) = edit
                original, corrected = engineered_edit(tag, distance, length)
            else:
                original = corrected = sized_statement(tag, 150)
            bad_exp_links = int_no in (0, 3) and len(exp_ids) > 1
            corrected_i.append(Interpretation(iid, corrected, hyp_ids, exp_ids))
            extracted_i.append(Interpretation(
                iid, original, hyp_ids,
                exp_ids[:-1] if bad_exp_links else exp_ids))
            int_no += 1

        study_id = f"synthetic-{study_index:02d}"
        corrected = StudyGraph(StudyMetadata(source_id=study_id),
                               tuple(corrected_h), tuple(corrected_e),
                               tuple(corrected_i))
        extracted = StudyGraph(StudyMetadata(source_id=study_id),
                               tuple(extracted_h), tuple(extracted_e),
                               tuple(extracted_i))
        assert validate_graph(corrected).ok
        assert validate_graph(extracted).ok

        study_dir = root / "studies" / study_id
        study_dir.mkdir(parents=True)
        (study_dir / EXTRACTED_FILE).write_text(serialize_graph(extracted),
                                                encoding="utf-8")
        (study_dir / CORRECTED_FILE).write_text(serialize_graph(corrected),
                                                encoding="utf-8")

    assert hyp_no == 29 and exp_no == 32 and int_no == 37
    return 20
