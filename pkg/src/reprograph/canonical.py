"""Canonical text format for study graphs (``.study`` files).

The format is UTF-8 JSON with a fixed layout: keys in schema order, element
lists in document order, link sets sorted, numbers in their shortest decimal
form, two-space indentation, trailing newline. Serialization is
byte-deterministic, so two equal graphs always produce identical files and
``parse_graph(serialize_graph(g)) == g``.

Strict parsing rejects unknown fields; lenient parsing preserves them as
opaque annotations that survive a round trip.
"""

from __future__ import annotations

import json
from typing import Any, Optional

from .model import (
    AssessmentTest,
    Experiment,
    Extras,
    Hypothesis,
    HypothesisKind,
    Interpretation,
    MetricSpec,
    ResultRecord,
    ResultValue,
    StudyGraph,
    StudyMetadata,
    TestKind,
    ValueKind,
    Verdict,
)

FORMAT_VERSION = "1"
STUDY_SUFFIX = ".study"
ATTEMPT_SUFFIX = ".attempt"


class ParseFailure(ValueError):
    """Raised when a canonical document cannot be parsed.

    ``offset`` is the byte offset of the syntax error in the UTF-8 encoding
    of the input, when the failure is syntactic; ``location`` is a dotted
    path to the offending field, when the failure is semantic.
    """

    def __init__(self, reason: str, offset: Optional[int] = None,
                 location: Optional[str] = None):
        self.reason = reason
        self.offset = offset
        self.location = location
        where = ""
        if offset is not None:
            where = f" at byte {offset}"
        elif location:
            where = f" at {location}"
        super().__init__(f"{reason}{where}")


def canonical_dumps(doc: Any) -> str:
    """Serialize an already-ordered document tree to canonical bytes."""
    return json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def canonical_loads(text: str) -> Any:
    """Parse JSON, rejecting NaN/Infinity and duplicate object keys."""

    def pairs_hook(pairs: list[tuple[str, Any]]) -> dict:
        out: dict[str, Any] = {}
        for key, value in pairs:
            if key in out:
                raise ParseFailure(f"duplicate key {key!r} in object")
            out[key] = value
        return out

    def reject_constant(token: str) -> None:
        raise ParseFailure(f"non-finite number {token!r} is not allowed")

    try:
        return json.loads(text, object_pairs_hook=pairs_hook,
                          parse_constant=reject_constant)
    except json.JSONDecodeError as exc:
        byte_offset = len(text[: exc.pos].encode("utf-8"))
        raise ParseFailure(exc.msg, offset=byte_offset) from exc


# --------------------------------------------------------------------------
# Serialization
# --------------------------------------------------------------------------


def _extras_fields(extras: Extras) -> dict[str, Any]:
    return {key: json.loads(raw) for key, raw in sorted(extras)}


def _value_doc(value: ResultValue) -> dict[str, Any]:
    doc: dict[str, Any] = {"kind": value.kind.value}
    if value.kind is ValueKind.SCALAR:
        doc["value"] = value.value
        if value.uncertainty is not None:
            doc["uncertainty"] = value.uncertainty
    elif value.kind is ValueKind.INTERVAL:
        doc["low"] = value.low
        doc["high"] = value.high
    elif value.kind is ValueKind.CATEGORICAL:
        doc["text"] = value.text
    return doc


def _record_doc(record: ResultRecord) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "metric_name": record.metric_name,
        "context": record.context,
        "value": _value_doc(record.value),
    }
    if record.locator:
        doc["locator"] = record.locator
    if record.unmatched:
        doc["unmatched"] = True
    return doc


def _metric_doc(metric: MetricSpec) -> dict[str, Any]:
    doc: dict[str, Any] = {"name": metric.name}
    if metric.description is not None:
        doc["description"] = metric.description
    if metric.unit is not None:
        doc["unit"] = metric.unit
    return doc


def _test_doc(test: AssessmentTest) -> dict[str, Any]:
    doc: dict[str, Any] = {"kind": test.kind.value}
    if test.description:
        doc["description"] = test.description
    return doc


def _hypothesis_doc(hyp: Hypothesis) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "id": hyp.id,
        "statement": hyp.statement,
        "kind": hyp.kind.value,
    }
    doc.update(_extras_fields(hyp.extras))
    return doc


def _experiment_doc(exp: Experiment) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "id": exp.id,
        "description": exp.description,
        "hypothesis_ids": list(exp.hypothesis_ids),
        "metrics": [_metric_doc(m) for m in exp.metrics],
        "statistics": list(exp.statistics),
    }
    if exp.strategy:
        doc["strategy"] = exp.strategy
    doc["tests"] = [_test_doc(t) for t in exp.tests]
    doc["results"] = [_record_doc(r) for r in exp.results]
    doc.update(_extras_fields(exp.extras))
    return doc


def _interpretation_doc(interp: Interpretation) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "id": interp.id,
        "statement": interp.statement,
        "hypothesis_ids": list(interp.hypothesis_ids),
        "experiment_ids": list(interp.experiment_ids),
        "verdict": interp.verdict.value,
    }
    doc.update(_extras_fields(interp.extras))
    return doc


def graph_doc(graph: StudyGraph) -> dict[str, Any]:
    """Document tree for a graph, with every key in canonical order."""
    meta: dict[str, Any] = {"source_id": graph.metadata.source_id}
    if graph.metadata.title:
        meta["title"] = graph.metadata.title
    if graph.metadata.token_count is not None:
        meta["token_count"] = graph.metadata.token_count
    meta.update(_extras_fields(graph.metadata.extras))

    doc: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "metadata": meta,
        "hypotheses": [_hypothesis_doc(h) for h in graph.hypotheses],
        "experiments": [_experiment_doc(e) for e in graph.experiments],
        "interpretations": [_interpretation_doc(i) for i in graph.interpretations],
    }
    doc.update(_extras_fields(graph.extras))
    return doc


def serialize_graph(graph: StudyGraph) -> str:
    """Canonical document for a graph. Byte-deterministic."""
    return canonical_dumps(graph_doc(graph))


def element_doc(element) -> dict[str, Any]:
    """Document tree for a single element of any kind."""
    if isinstance(element, Hypothesis):
        return _hypothesis_doc(element)
    if isinstance(element, Experiment):
        return _experiment_doc(element)
    if isinstance(element, Interpretation):
        return _interpretation_doc(element)
    raise TypeError(f"not a graph element: {type(element).__name__}")


def record_doc(record: ResultRecord) -> dict[str, Any]:
    """Document tree for a single result record."""
    return _record_doc(record)


def parse_element(kind: str, obj: Any, strict: bool = True):
    """Parse a lone element document of the given kind
    ("hypothesis", "experiment", or "interpretation")."""
    parser = {
        "hypothesis": _parse_hypothesis,
        "experiment": _parse_experiment,
        "interpretation": _parse_interpretation,
    }.get(kind)
    if parser is None:
        raise ParseFailure(f"unknown element kind {kind!r}")
    return parser(obj, f"$.{kind}", strict)


def parse_record(obj: Any, strict: bool = True) -> ResultRecord:
    """Parse a lone result-record document."""
    return _parse_record(obj, "$.result", strict)


def parse_metric(obj: Any, strict: bool = True) -> MetricSpec:
    """Parse a lone metric document."""
    return _parse_metric(obj, "$.metric", strict)


# --------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------


class _Reader:
    """Consumes known fields from a parsed JSON object, tracking leftovers."""

    def __init__(self, obj: Any, path: str, strict: bool):
        if not isinstance(obj, dict):
            raise ParseFailure(f"expected an object, got {type(obj).__name__}",
                               location=path)
        self.obj = dict(obj)
        self.path = path
        self.strict = strict

    def take(self, key: str, kind: type, required: bool = True,
             default: Any = None) -> Any:
        if key not in self.obj:
            if required:
                raise ParseFailure(f"missing required field {key!r}",
                                   location=self.path)
            return default
        value = self.obj.pop(key)
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            return value
        if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
            raise ParseFailure(
                f"field {key!r} must be {kind.__name__}, got {type(value).__name__}",
                location=f"{self.path}.{key}")
        return value

    def take_enum(self, key: str, enum_cls: type, required: bool = True,
                  default: Any = None) -> Any:
        raw = self.take(key, str, required=required,
                        default=default.value if default is not None else None)
        if raw is None:
            return None
        try:
            return enum_cls(raw)
        except ValueError:
            allowed = ", ".join(repr(m.value) for m in enum_cls)
            raise ParseFailure(
                f"invalid literal {raw!r} for {key!r} (allowed: {allowed})",
                location=f"{self.path}.{key}") from None

    def take_list(self, key: str) -> list[Any]:
        value = self.obj.pop(key, [])
        if not isinstance(value, list):
            raise ParseFailure(f"field {key!r} must be a list",
                               location=f"{self.path}.{key}")
        return value

    def take_str_list(self, key: str) -> list[str]:
        items = self.take_list(key)
        for i, item in enumerate(items):
            if not isinstance(item, str):
                raise ParseFailure(f"field {key!r} must hold strings",
                                   location=f"{self.path}.{key}[{i}]")
        return items

    def finish(self) -> Extras:
        """Reject or preserve unconsumed fields, per mode."""
        if not self.obj:
            return ()
        if self.strict:
            names = ", ".join(sorted(self.obj))
            raise ParseFailure(f"unknown field(s): {names}", location=self.path)
        return tuple(sorted(
            (key, json.dumps(value, ensure_ascii=False, sort_keys=True))
            for key, value in self.obj.items()
        ))


def _parse_value(obj: Any, path: str, strict: bool) -> ResultValue:
    reader = _Reader(obj, path, strict)
    kind = reader.take_enum("kind", ValueKind)
    try:
        if kind is ValueKind.SCALAR:
            value = ResultValue.scalar(
                reader.take("value", float),
                reader.take("uncertainty", float, required=False))
        elif kind is ValueKind.INTERVAL:
            value = ResultValue.interval(reader.take("low", float),
                                         reader.take("high", float))
        elif kind is ValueKind.CATEGORICAL:
            value = ResultValue.categorical(reader.take("text", str))
        else:
            value = ResultValue.missing()
    except ValueError as exc:
        raise ParseFailure(str(exc), location=path) from exc
    extras = reader.finish()
    if extras:
        raise ParseFailure(
            f"result value carries unknown field(s): "
            f"{', '.join(key for key, _ in extras)}", location=path)
    return value


def _parse_record(obj: Any, path: str, strict: bool) -> ResultRecord:
    reader = _Reader(obj, path, strict)
    record = ResultRecord(
        metric_name=reader.take("metric_name", str),
        context=reader.take("context", str, required=False, default=""),
        value=_parse_value(reader.take("value", dict), f"{path}.value", strict),
        locator=reader.take("locator", str, required=False, default=""),
        unmatched=reader.take("unmatched", bool, required=False, default=False),
    )
    reader.finish()
    return record


def _parse_metric(obj: Any, path: str, strict: bool) -> MetricSpec:
    reader = _Reader(obj, path, strict)
    metric = MetricSpec(
        name=reader.take("name", str),
        description=reader.take("description", str, required=False),
        unit=reader.take("unit", str, required=False),
    )
    reader.finish()
    return metric


def _parse_test(obj: Any, path: str, strict: bool) -> AssessmentTest:
    reader = _Reader(obj, path, strict)
    test = AssessmentTest(
        kind=reader.take_enum("kind", TestKind),
        description=reader.take("description", str, required=False, default=""),
    )
    reader.finish()
    return test


def _parse_hypothesis(obj: Any, path: str, strict: bool) -> Hypothesis:
    reader = _Reader(obj, path, strict)
    return Hypothesis(
        id=reader.take("id", str),
        statement=reader.take("statement", str),
        kind=reader.take_enum("kind", HypothesisKind, required=False,
                              default=HypothesisKind.STATED),
        extras=reader.finish(),
    )


def _parse_experiment(obj: Any, path: str, strict: bool) -> Experiment:
    reader = _Reader(obj, path, strict)
    return Experiment(
        id=reader.take("id", str),
        description=reader.take("description", str),
        hypothesis_ids=tuple(reader.take_str_list("hypothesis_ids")),
        metrics=tuple(_parse_metric(m, f"{path}.metrics[{i}]", strict)
                      for i, m in enumerate(reader.take_list("metrics"))),
        statistics=tuple(reader.take_str_list("statistics")),
        strategy=reader.take("strategy", str, required=False, default=""),
        tests=tuple(_parse_test(t, f"{path}.tests[{i}]", strict)
                    for i, t in enumerate(reader.take_list("tests"))),
        results=tuple(_parse_record(r, f"{path}.results[{i}]", strict)
                      for i, r in enumerate(reader.take_list("results"))),
        extras=reader.finish(),
    )


def _parse_interpretation(obj: Any, path: str, strict: bool) -> Interpretation:
    reader = _Reader(obj, path, strict)
    return Interpretation(
        id=reader.take("id", str),
        statement=reader.take("statement", str),
        hypothesis_ids=tuple(reader.take_str_list("hypothesis_ids")),
        experiment_ids=tuple(reader.take_str_list("experiment_ids")),
        verdict=reader.take_enum("verdict", Verdict),
        extras=reader.finish(),
    )


def _parse_metadata(obj: Any, path: str, strict: bool) -> StudyMetadata:
    reader = _Reader(obj, path, strict)
    return StudyMetadata(
        source_id=reader.take("source_id", str),
        title=reader.take("title", str, required=False, default=""),
        token_count=reader.take("token_count", int, required=False),
        extras=reader.finish(),
    )


def parse_graph(text: str, strict: bool = True) -> StudyGraph:
    """Parse a canonical study document.

    Raises ParseFailure on malformed syntax, on unknown fields in strict
    mode, and on invalid enum literals. The returned graph re-serializes
    to a canonically equal document.
    """
    root = canonical_loads(text)
    reader = _Reader(root, "$", strict)
    version = reader.take("format_version", str)
    if version != FORMAT_VERSION:
        raise ParseFailure(f"unsupported format_version {version!r} "
                           f"(expected {FORMAT_VERSION!r})",
                           location="$.format_version")
    metadata = _parse_metadata(reader.take("metadata", dict), "$.metadata", strict)
    hypotheses = tuple(
        _parse_hypothesis(h, f"$.hypotheses[{i}]", strict)
        for i, h in enumerate(reader.take_list("hypotheses")))
    experiments = tuple(
        _parse_experiment(e, f"$.experiments[{i}]", strict)
        for i, e in enumerate(reader.take_list("experiments")))
    interpretations = tuple(
        _parse_interpretation(p, f"$.interpretations[{i}]", strict)
        for i, p in enumerate(reader.take_list("interpretations")))
    extras = reader.finish()
    return StudyGraph(metadata=metadata, hypotheses=hypotheses,
                      experiments=experiments, interpretations=interpretations,
                      extras=extras)
