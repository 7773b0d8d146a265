"""Event-sourced review sessions over extracted study graphs.

A session starts from an extracted graph and records reviewer actions as an
append-only event log. The working copy is always the fold of that log over
the extracted graph, so replaying a persisted log (after a crash, or in a
test) reproduces the session exactly. Corrections accumulate event by event
in a :class:`CorrectionAccumulator`; at finalization the accumulated set
must equal what :func:`~reprograph.metrics.compare_graphs` computes from the
extracted and corrected graphs, and both graphs plus the corrections and
ratings are written to the dataset store.

Event payloads (JSON objects):

- ``edit_statement``: ``{"element_id", "text"}`` replaces a hypothesis or
  interpretation statement, or an experiment description.
- ``edit_links``: ``{"element_id", "link_field", "add": [...],
  "remove": [...]}`` applies set algebra ``(links - remove) | add``.
- ``edit_details``: ``{"element_id", "category", "value"}`` replaces an
  experiment's metrics (list of metric documents), statistics (list of
  strings), or strategy (string).
- ``edit_result``: ``{"element_id", "action": "set" | "remove", "record"}``
  upserts or deletes one result record, keyed by metric name and context.
- ``supplement``: ``{"kind", "element"}`` appends a whole element the
  extraction missed; a blank id is replaced with a fresh one.
- ``rate``: ``{"category", "value", "scale"?, "element_id"?}`` records a
  Likert rating; the scale defaults to the category's standard scale.
- ``finalize``: written by :meth:`SessionService.finalize_session`; it is
  not accepted through ``apply_event``.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Iterator, Optional, Sequence

from .canonical import (
    STUDY_SUFFIX,
    ParseFailure,
    parse_element,
    parse_graph,
    parse_metric,
    parse_record,
    serialize_graph,
)
from .metrics import (
    RATING_EXPERIMENT_DESCRIPTION,
    RATING_EXPERIMENT_DETAILS,
    RATING_HYPOTHESIS,
    RATING_INTERPRETATION,
    RATING_SCALES,
    CorrectionSet,
    DetailCategory,
    DetailEdit,
    ElementKind,
    LikertRating,
    LinkEdit,
    LinkField,
    ResultEdit,
    StatementEdit,
    Supplement,
    compare_graphs,
    levenshtein,
    relative_edit_pct,
)
from .model import (
    Element,
    Experiment,
    Hypothesis,
    Interpretation,
    ResultRecord,
    StudyGraph,
    fresh_element_id,
    validate_graph,
)


class SessionError(Exception):
    """Base class for review-session failures."""


class UnknownSessionError(SessionError):
    pass


class InvalidGraphError(SessionError):
    """The graph offered to create_session does not validate."""


class SessionFinalizedError(SessionError):
    """A mutation was attempted on a finalized session."""


class InvalidEventError(SessionError):
    """The event payload is malformed or out of bounds."""


class ValidationRejectedError(SessionError):
    """Applying the event would break a graph invariant."""


class IncompleteReviewError(SessionError):
    """Finalization was requested before all required rating categories
    received at least one rating."""


class EventKind(str, Enum):
    EDIT_STATEMENT = "edit_statement"
    EDIT_LINKS = "edit_links"
    EDIT_DETAILS = "edit_details"
    EDIT_RESULT = "edit_result"
    SUPPLEMENT = "supplement"
    RATE = "rate"
    FINALIZE = "finalize"


class SessionState(str, Enum):
    OPEN = "open"
    FINALIZED = "finalized"


@dataclass(frozen=True)
class SessionEvent:
    sequence_no: int
    recorded_at: str
    kind: EventKind
    payload: dict

    def to_doc(self) -> dict:
        return {
            "sequence_no": self.sequence_no,
            "recorded_at": self.recorded_at,
            "kind": self.kind.value,
            "payload": self.payload,
        }


def event_from_doc(doc: dict) -> SessionEvent:
    try:
        return SessionEvent(
            sequence_no=int(doc["sequence_no"]),
            recorded_at=str(doc["recorded_at"]),
            kind=EventKind(doc["kind"]),
            payload=dict(doc.get("payload") or {}),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidEventError(f"malformed event document: {exc}") from exc


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


# --------------------------------------------------------------------------
# Payload parsing
# --------------------------------------------------------------------------


def _need(payload: dict, key: str, typ: type) -> Any:
    if key not in payload:
        raise InvalidEventError(f"payload is missing {key!r}")
    value = payload[key]
    if not isinstance(value, typ):
        raise InvalidEventError(
            f"payload field {key!r} must be {typ.__name__}, "
            f"got {type(value).__name__}")
    return value


def _id_list(payload: dict, key: str) -> tuple[str, ...]:
    raw = payload.get(key, [])
    if not isinstance(raw, list) or not all(isinstance(x, str) for x in raw):
        raise InvalidEventError(f"payload field {key!r} must be a list of ids")
    return tuple(raw)


def parse_rating(payload: dict) -> LikertRating:
    """Build a LikertRating from a ``rate`` payload, defaulting the scale
    from the category's standard scale."""
    category = _need(payload, "category", str)
    value = _need(payload, "value", int)
    scale = payload.get("scale", RATING_SCALES.get(category))
    if scale is None:
        raise InvalidEventError(
            f"unknown rating category {category!r} needs an explicit scale")
    if not isinstance(scale, int):
        raise InvalidEventError("payload field 'scale' must be an integer")
    element_id = payload.get("element_id", "")
    if not isinstance(element_id, str):
        raise InvalidEventError("payload field 'element_id' must be a string")
    try:
        return LikertRating(category=category, scale=scale, value=value,
                            element_id=element_id)
    except ValueError as exc:
        raise InvalidEventError(str(exc)) from exc


def _parse_details_value(category: DetailCategory, value: Any):
    if category is DetailCategory.METRICS:
        if not isinstance(value, list):
            raise InvalidEventError("metrics value must be a list of metric "
                                    "documents")
        try:
            return tuple(parse_metric(doc) for doc in value)
        except (ParseFailure, ValueError) as exc:
            raise InvalidEventError(f"bad metric document: {exc}") from exc
    if category is DetailCategory.STATISTICS:
        if (not isinstance(value, list)
                or not all(isinstance(x, str) for x in value)):
            raise InvalidEventError("statistics value must be a list of "
                                    "strings")
        return tuple(value)
    if not isinstance(value, str):
        raise InvalidEventError("strategy value must be a string")
    return value


def _record_key(payload: dict) -> tuple[str, str]:
    record = _need(payload, "record", dict)
    try:
        return (str(record["metric_name"]), str(record.get("context", "")))
    except KeyError as exc:
        raise InvalidEventError("result record needs a metric_name") from exc


def _parse_result_record(payload: dict) -> ResultRecord:
    record = _need(payload, "record", dict)
    try:
        return parse_record(record)
    except (ParseFailure, ValueError) as exc:
        raise InvalidEventError(f"bad result record: {exc}") from exc


def _upsert_records(records: Sequence[ResultRecord],
                    record: ResultRecord) -> tuple[ResultRecord, ...]:
    """Replace the record with the same key in place, or append."""
    out = list(records)
    for i, existing in enumerate(out):
        if existing.key() == record.key():
            out[i] = record
            return tuple(out)
    out.append(record)
    return tuple(out)


def _drop_record(records: Sequence[ResultRecord],
                 key: tuple[str, str]) -> tuple[ResultRecord, ...]:
    out = tuple(r for r in records if r.key() != key)
    if len(out) == len(records):
        raise InvalidEventError(
            f"no result record for metric {key[0]!r}, context {key[1]!r}")
    return out


_LINK_FIELDS_BY_KIND = {
    Experiment: (LinkField.EXP_HYP,),
    Interpretation: (LinkField.INT_HYP, LinkField.INT_EXP),
}


def _edit_element_links(element: Element, field_: LinkField,
                        add: tuple[str, ...],
                        remove: tuple[str, ...]) -> Element:
    allowed = _LINK_FIELDS_BY_KIND.get(type(element), ())
    if field_ not in allowed:
        raise InvalidEventError(
            f"element {element.id!r} has no {field_.value!r} links")
    attr = ("hypothesis_ids" if field_ in (LinkField.EXP_HYP, LinkField.INT_HYP)
            else "experiment_ids")
    current = set(getattr(element, attr))
    updated = (current - set(remove)) | set(add)
    return replace(element, **{attr: tuple(sorted(updated))})


# --------------------------------------------------------------------------
# The pure event fold
# --------------------------------------------------------------------------


def apply_graph_event(graph: StudyGraph, kind: EventKind,
                      payload: dict) -> StudyGraph:
    """Apply one event to a graph and return the updated graph.

    Pure function: ``rate`` events return the graph unchanged, ``finalize``
    is rejected here. Raises InvalidEventError for malformed payloads and
    references to unknown elements; it does not check graph invariants (the
    session layer validates the result before committing).
    """
    if kind is EventKind.RATE:
        parse_rating(payload)
        return graph
    if kind is EventKind.SUPPLEMENT:
        kind_name = _need(payload, "kind", str)
        if kind_name not in ("hypothesis", "experiment", "interpretation"):
            raise InvalidEventError(f"unknown element kind {kind_name!r}")
        doc = dict(_need(payload, "element", dict))
        if not doc.get("id"):
            doc["id"] = fresh_element_id(graph, kind_name)
        try:
            element = parse_element(kind_name, doc)
        except (ParseFailure, ValueError) as exc:
            raise InvalidEventError(f"bad element document: {exc}") from exc
        if kind_name == "hypothesis":
            return replace(graph, hypotheses=graph.hypotheses + (element,))
        if kind_name == "experiment":
            return replace(graph, experiments=graph.experiments + (element,))
        return replace(graph,
                       interpretations=graph.interpretations + (element,))
    if kind is EventKind.FINALIZE:
        raise InvalidEventError(
            "finalize is not applied through apply_event; call "
            "finalize_session")

    element_id = _need(payload, "element_id", str)
    element = graph.element_by_id(element_id)
    if element is None:
        raise InvalidEventError(f"unknown element {element_id!r}")

    if kind is EventKind.EDIT_STATEMENT:
        text = _need(payload, "text", str)
        attr = "description" if isinstance(element, Experiment) else "statement"
        updated = replace(element, **{attr: text})
    elif kind is EventKind.EDIT_LINKS:
        try:
            field_ = LinkField(_need(payload, "link_field", str))
        except ValueError as exc:
            raise InvalidEventError(str(exc)) from exc
        updated = _edit_element_links(element, field_,
                                      _id_list(payload, "add"),
                                      _id_list(payload, "remove"))
    elif kind is EventKind.EDIT_DETAILS:
        if not isinstance(element, Experiment):
            raise InvalidEventError(
                f"element {element_id!r} is not an experiment")
        try:
            category = DetailCategory(_need(payload, "category", str))
        except ValueError as exc:
            raise InvalidEventError(str(exc)) from exc
        value = _parse_details_value(category, payload.get("value"))
        updated = replace(element, **{category.value: value})
    elif kind is EventKind.EDIT_RESULT:
        if not isinstance(element, Experiment):
            raise InvalidEventError(
                f"element {element_id!r} is not an experiment")
        action = _need(payload, "action", str)
        if action == "set":
            record = _parse_result_record(payload)
            updated = replace(element,
                              results=_upsert_records(element.results, record))
        elif action == "remove":
            updated = replace(element,
                              results=_drop_record(element.results,
                                                   _record_key(payload)))
        else:
            raise InvalidEventError(f"unknown result action {action!r}")
    else:  # pragma: no cover - all kinds handled above
        raise InvalidEventError(f"unknown event kind {kind!r}")

    return _swap_element(graph, updated)


def _swap_element(graph: StudyGraph, element: Element) -> StudyGraph:
    """Replace the same-id element, preserving document order."""
    def swap(items):
        return tuple(element if el.id == element.id else el for el in items)

    if isinstance(element, Hypothesis):
        return replace(graph, hypotheses=swap(graph.hypotheses))
    if isinstance(element, Experiment):
        return replace(graph, experiments=swap(graph.experiments))
    return replace(graph, interpretations=swap(graph.interpretations))


# --------------------------------------------------------------------------
# Correction accumulation (the event-driven route)
# --------------------------------------------------------------------------


_KIND_OF = {
    Hypothesis: ElementKind.HYPOTHESIS,
    Experiment: ElementKind.EXPERIMENT,
    Interpretation: ElementKind.INTERPRETATION,
}


class CorrectionAccumulator:
    """Builds the session's CorrectionSet from the event stream alone.

    The accumulator seeds per-concern state (statement texts, link sets,
    detail values, result records) from the extracted baseline, updates that
    state as events arrive, and diffs it against the baseline on demand. It
    never looks at the working graph, so it is an independent derivation of
    the corrections that finalization cross-checks against compare_graphs.
    """

    def __init__(self, baseline: StudyGraph):
        self._study_id = baseline.study_id
        self._kinds: dict[str, ElementKind] = {}
        self._base_text: dict[str, str] = {}
        self._text: dict[str, str] = {}
        self._base_links: dict[tuple[str, LinkField], frozenset] = {}
        self._links: dict[tuple[str, LinkField], frozenset] = {}
        self._base_details: dict[tuple[str, DetailCategory], Any] = {}
        self._details: dict[tuple[str, DetailCategory], Any] = {}
        self._base_records: dict[str, dict[tuple[str, str], ResultRecord]] = {}
        self._records: dict[str, dict[tuple[str, str], ResultRecord]] = {}
        self._supplements: dict[str, Element] = {}

        for hyp in baseline.hypotheses:
            self._kinds[hyp.id] = ElementKind.HYPOTHESIS
            self._base_text[hyp.id] = hyp.statement
        for exp in baseline.experiments:
            self._kinds[exp.id] = ElementKind.EXPERIMENT
            self._base_text[exp.id] = exp.description
        for interp in baseline.interpretations:
            self._kinds[interp.id] = ElementKind.INTERPRETATION
            self._base_text[interp.id] = interp.statement
        self._text = dict(self._base_text)

        for exp in baseline.experiments:
            self._base_links[(exp.id, LinkField.EXP_HYP)] = frozenset(
                exp.hypothesis_ids)
        for interp in baseline.interpretations:
            self._base_links[(interp.id, LinkField.INT_HYP)] = frozenset(
                interp.hypothesis_ids)
            self._base_links[(interp.id, LinkField.INT_EXP)] = frozenset(
                interp.experiment_ids)
        self._links = dict(self._base_links)

        for exp in baseline.experiments:
            self._base_details[(exp.id, DetailCategory.METRICS)] = exp.metrics
            self._base_details[(exp.id, DetailCategory.STATISTICS)] = \
                exp.statistics
            self._base_details[(exp.id, DetailCategory.STRATEGY)] = exp.strategy
            self._base_records[exp.id] = {r.key(): r for r in exp.results}
            self._records[exp.id] = dict(self._base_records[exp.id])
        self._details = dict(self._base_details)

    # -- live metrics support ------------------------------------------------

    def original_text_for(self, element_id: str) -> Optional[str]:
        """The baseline text the live edit distance is measured against.

        For supplemented elements (no extracted baseline) this is the
        element's current text, so a fresh element reads as distance zero.
        """
        if element_id in self._base_text:
            return self._base_text[element_id]
        element = self._supplements.get(element_id)
        if element is None:
            return None
        return (element.description if isinstance(element, Experiment)
                else element.statement)

    # -- event intake --------------------------------------------------------

    def apply(self, kind: EventKind, payload: dict) -> None:
        """Fold one validated event into the accumulator state."""
        if kind in (EventKind.RATE, EventKind.FINALIZE):
            return
        if kind is EventKind.SUPPLEMENT:
            element = parse_element(payload["kind"], payload["element"])
            self._supplements[element.id] = element
            return

        element_id = payload["element_id"]
        if kind is EventKind.EDIT_STATEMENT:
            text = payload["text"]
            if element_id in self._text:
                self._text[element_id] = text
            else:
                self._patch_supplement(element_id, _text=text)
        elif kind is EventKind.EDIT_LINKS:
            field_ = LinkField(payload["link_field"])
            add = frozenset(payload.get("add", ()))
            remove = frozenset(payload.get("remove", ()))
            key = (element_id, field_)
            if key in self._links:
                self._links[key] = (self._links[key] - remove) | add
            else:
                self._patch_supplement(element_id, _links=(field_, add, remove))
        elif kind is EventKind.EDIT_DETAILS:
            category = DetailCategory(payload["category"])
            value = _parse_details_value(category, payload["value"])
            key = (element_id, category)
            if key in self._details:
                self._details[key] = value
            else:
                self._patch_supplement(element_id, _details=(category, value))
        elif kind is EventKind.EDIT_RESULT:
            action = payload["action"]
            if element_id in self._records:
                records = self._records[element_id]
                if action == "set":
                    record = _parse_result_record(payload)
                    records[record.key()] = record
                else:
                    key = _record_key(payload)
                    if key not in records:
                        raise InvalidEventError(
                            f"no result record for metric {key[0]!r}, "
                            f"context {key[1]!r}")
                    del records[key]
            else:
                self._patch_supplement(element_id, _result=(action, payload))

    def _patch_supplement(self, element_id: str, _text=None, _links=None,
                          _details=None, _result=None) -> None:
        element = self._supplements.get(element_id)
        if element is None:
            raise InvalidEventError(f"unknown element {element_id!r}")
        if _text is not None:
            attr = ("description" if isinstance(element, Experiment)
                    else "statement")
            element = replace(element, **{attr: _text})
        elif _links is not None:
            field_, add, remove = _links
            element = _edit_element_links(element, field_, tuple(add),
                                          tuple(remove))
        elif _details is not None:
            category, value = _details
            element = replace(element, **{category.value: value})
        elif _result is not None:
            action, payload = _result
            if action == "set":
                record = _parse_result_record(payload)
                element = replace(element,
                                  results=_upsert_records(element.results,
                                                          record))
            else:
                element = replace(element,
                                  results=_drop_record(element.results,
                                                       _record_key(payload)))
        self._supplements[element_id] = element

    # -- output ----------------------------------------------------------

    def build(self) -> CorrectionSet:
        """Materialize the accumulated corrections.

        Edits that restored the baseline value drop out here, because the
        current state is diffed against the baseline rather than replayed
        as a change log.
        """
        statement_edits = tuple(
            StatementEdit(eid, self._kinds[eid], base, self._text[eid])
            for eid, base in self._base_text.items()
            if self._text[eid] != base)
        link_edits = tuple(
            LinkEdit(eid, field_,
                     added=tuple(self._links[(eid, field_)] - base),
                     removed=tuple(base - self._links[(eid, field_)]))
            for (eid, field_), base in self._base_links.items()
            if self._links[(eid, field_)] != base)
        detail_edits = tuple(
            DetailEdit(eid, category)
            for (eid, category), base in self._base_details.items()
            if self._details[(eid, category)] != base)

        result_edits = []
        for exp_id, base in self._base_records.items():
            current = self._records[exp_id]
            added = tuple(r for key, r in current.items() if key not in base)
            removed = tuple(r for key, r in base.items() if key not in current)
            changed = tuple((r, current[key]) for key, r in base.items()
                            if key in current and current[key] != r)
            if added or removed or changed:
                result_edits.append(ResultEdit(exp_id, added=added,
                                               changed=changed,
                                               removed=removed))

        supplements = tuple(
            Supplement(kind, element)
            for kind in (ElementKind.HYPOTHESIS, ElementKind.EXPERIMENT,
                         ElementKind.INTERPRETATION)
            for element in self._supplements.values()
            if _KIND_OF[type(element)] is kind)

        return CorrectionSet(
            study_id=self._study_id,
            statement_edits=statement_edits,
            link_edits=link_edits,
            detail_edits=detail_edits,
            result_edits=tuple(result_edits),
            supplements=supplements,
        )


# --------------------------------------------------------------------------
# Sessions and persistence
# --------------------------------------------------------------------------


@dataclass
class ReviewSession:
    session_id: str
    study_id: str
    extracted: StudyGraph
    working_copy: StudyGraph
    accumulator: CorrectionAccumulator
    ratings: list[LikertRating] = field(default_factory=list)
    events: list[SessionEvent] = field(default_factory=list)
    state: SessionState = SessionState.OPEN
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def corrections(self) -> CorrectionSet:
        return self.accumulator.build()

    @property
    def next_sequence_no(self) -> int:
        return len(self.events) + 1


@dataclass(frozen=True)
class FinalizeOutcome:
    corrected: StudyGraph
    corrections: CorrectionSet
    ratings: tuple[LikertRating, ...]
    study_dir: Path


EXTRACTED_FILE = "extracted" + STUDY_SUFFIX
CORRECTED_FILE = "corrected" + STUDY_SUFFIX
CORRECTIONS_FILE = "corrections.events"
RATINGS_FILE = "ratings.table"
SESSIONS_DIR = "sessions"
EVENTS_SUFFIX = ".events"


def _safe_name(study_id: str) -> str:
    cleaned = re.sub(r"[^A-Za-z0-9._-]+", "_", study_id).strip("._")
    return cleaned[:60] or "study"


_RATINGS_HEADER = ("element_id", "category", "scale", "value")


def ratings_table(ratings: Sequence[LikertRating]) -> str:
    """Tab-separated rating rows in submission order."""
    lines = ["\t".join(_RATINGS_HEADER)]
    for r in ratings:
        lines.append("\t".join((r.element_id, r.category, str(r.scale),
                                str(r.value))))
    return "\n".join(lines) + "\n"


def parse_ratings_table(text: str) -> list[LikertRating]:
    """Inverse of :func:`ratings_table`."""
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines or tuple(lines[0].split("\t")) != _RATINGS_HEADER:
        raise ValueError("not a ratings table")
    ratings = []
    for line in lines[1:]:
        element_id, category, scale, value = line.split("\t")
        ratings.append(LikertRating(category=category, scale=int(scale),
                                    value=int(value), element_id=element_id))
    return ratings


class SessionStore:
    """Filesystem layout for sessions and finalized datasets.

    Each study gets one directory named from its id plus a short digest of
    the extracted graph's canonical bytes, so re-extractions of the same
    source never collide. Event logs are JSON lines, appended and flushed
    before an event is acknowledged.
    """

    def __init__(self, root: Path):
        self.root = Path(root)
        self.studies_root = self.root / "studies"

    def study_dir_for(self, graph: StudyGraph) -> Path:
        text = serialize_graph(graph)
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()[:10]
        return self.studies_root / f"{_safe_name(graph.study_id)}-{digest}"

    def ensure_study(self, graph: StudyGraph) -> Path:
        study_dir = self.study_dir_for(graph)
        (study_dir / SESSIONS_DIR).mkdir(parents=True, exist_ok=True)
        extracted = study_dir / EXTRACTED_FILE
        if not extracted.exists():
            extracted.write_text(serialize_graph(graph), encoding="utf-8")
        return study_dir

    def session_path(self, study_dir: Path, session_id: str) -> Path:
        return study_dir / SESSIONS_DIR / (session_id + EVENTS_SUFFIX)

    def append_event(self, path: Path, event: SessionEvent) -> None:
        line = json.dumps(event.to_doc(), ensure_ascii=False, sort_keys=True)
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
            fh.flush()

    def read_events(self, path: Path) -> list[SessionEvent]:
        events = []
        for line in path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                events.append(event_from_doc(json.loads(line)))
        return events

    def iter_study_dirs(self) -> Iterator[Path]:
        if not self.studies_root.is_dir():
            return
        for study_dir in sorted(self.studies_root.iterdir()):
            if (study_dir / EXTRACTED_FILE).is_file():
                yield study_dir

    def iter_session_paths(self) -> Iterator[tuple[Path, Path]]:
        for study_dir in self.iter_study_dirs():
            sessions = study_dir / SESSIONS_DIR
            if sessions.is_dir():
                for path in sorted(sessions.glob("*" + EVENTS_SUFFIX)):
                    yield study_dir, path

    def load_graph(self, path: Path) -> StudyGraph:
        return parse_graph(path.read_text(encoding="utf-8"))

    def finalized_pairs(self) -> list[tuple[StudyGraph, StudyGraph]]:
        """(extracted, corrected) graph pairs for every finalized study."""
        pairs = []
        for study_dir in self.iter_study_dirs():
            corrected = study_dir / CORRECTED_FILE
            if corrected.is_file():
                pairs.append((self.load_graph(study_dir / EXTRACTED_FILE),
                              self.load_graph(corrected)))
        return pairs

    def finalized_ratings(self) -> list[LikertRating]:
        """Ratings from every finalized study in the dataset."""
        ratings: list[LikertRating] = []
        for study_dir in self.iter_study_dirs():
            path = study_dir / RATINGS_FILE
            if path.is_file():
                ratings.extend(
                    parse_ratings_table(path.read_text(encoding="utf-8")))
        return ratings


def replay_session(session_id: str, extracted: StudyGraph,
                   events: Sequence[SessionEvent]) -> ReviewSession:
    """Rebuild a session by folding its event log over the extracted graph."""
    session = ReviewSession(
        session_id=session_id,
        study_id=extracted.study_id,
        extracted=extracted,
        working_copy=extracted,
        accumulator=CorrectionAccumulator(extracted),
    )
    for event in events:
        if event.kind is EventKind.FINALIZE:
            session.state = SessionState.FINALIZED
        elif event.kind is EventKind.RATE:
            session.ratings.append(parse_rating(event.payload))
        else:
            session.working_copy = apply_graph_event(
                session.working_copy, event.kind, event.payload)
            session.accumulator.apply(event.kind, event.payload)
        session.events.append(event)
    return session


def default_required_ratings(graph: StudyGraph) -> tuple[str, ...]:
    """Rating categories a finalized review must cover, given the graph:
    every standard category whose layer is populated."""
    required = [RATING_HYPOTHESIS]
    if graph.experiments:
        required += [RATING_EXPERIMENT_DESCRIPTION, RATING_EXPERIMENT_DETAILS]
    if graph.interpretations:
        required.append(RATING_INTERPRETATION)
    return tuple(required)


class SessionService:
    """Hosts review sessions over a dataset directory.

    One writer per session: mutations take the session's lock, are persisted
    to the append-only log, and only then change in-memory state. Distinct
    sessions proceed in parallel. On construction, existing event logs under
    ``data_dir`` are replayed so a restart resumes every session exactly
    where it stopped.
    """

    def __init__(self, data_dir: Path | str,
                 required_ratings: Optional[Sequence[str]] = None):
        self.store = SessionStore(Path(data_dir))
        self._required = (tuple(required_ratings)
                          if required_ratings is not None else None)
        self._sessions: dict[str, ReviewSession] = {}
        self._session_paths: dict[str, Path] = {}
        self._study_dirs: dict[str, Path] = {}
        self._registry_lock = threading.Lock()
        self._load_existing()

    # -- lifecycle ---------------------------------------------------------

    def _load_existing(self) -> None:
        for study_dir, path in self.store.iter_session_paths():
            extracted = self.store.load_graph(study_dir / EXTRACTED_FILE)
            session_id = path.name[:-len(EVENTS_SUFFIX)]
            events = self.store.read_events(path)
            session = replay_session(session_id, extracted, events)
            self._sessions[session_id] = session
            self._session_paths[session_id] = path
            self._study_dirs[session_id] = study_dir

    def create_session(self, graph: StudyGraph) -> ReviewSession:
        report = validate_graph(graph)
        if not report.ok:
            raise InvalidGraphError(
                f"graph does not validate: {report.violations[0].message}")
        study_dir = self.store.ensure_study(graph)
        session_id = uuid.uuid4().hex
        path = self.store.session_path(study_dir, session_id)
        path.touch()
        session = ReviewSession(
            session_id=session_id,
            study_id=graph.study_id,
            extracted=graph,
            working_copy=graph,
            accumulator=CorrectionAccumulator(graph),
        )
        with self._registry_lock:
            self._sessions[session_id] = session
            self._session_paths[session_id] = path
            self._study_dirs[session_id] = study_dir
        return session

    def get_session(self, session_id: str) -> ReviewSession:
        with self._registry_lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSessionError(f"no session {session_id!r}")
        return session

    def session_ids(self) -> list[str]:
        with self._registry_lock:
            return sorted(self._sessions)

    # -- mutations -----------------------------------------------------------

    def apply_event(self, session_id: str, kind: str | EventKind,
                    payload: dict) -> dict:
        """Validate, persist, and apply one event.

        Returns an acknowledgment with the assigned sequence number and,
        for statement edits, the live metrics (edit distance and relative
        edit percentage against the element's extracted text).
        """
        session = self.get_session(session_id)
        try:
            event_kind = EventKind(kind)
        except ValueError as exc:
            raise InvalidEventError(f"unknown event kind {kind!r}") from exc
        if event_kind is EventKind.FINALIZE:
            raise InvalidEventError("post to finalize, not to events")

        with session.lock:
            if session.state is not SessionState.OPEN:
                raise SessionFinalizedError(
                    f"session {session_id} is finalized")

            payload = _normalized_payload(session.working_copy, event_kind,
                                          payload)
            rating: Optional[LikertRating] = None
            candidate = session.working_copy
            if event_kind is EventKind.RATE:
                rating = parse_rating(payload)
            else:
                candidate = apply_graph_event(session.working_copy,
                                              event_kind, payload)
                report = validate_graph(candidate)
                if not report.ok:
                    raise ValidationRejectedError(
                        f"edit rejected: {report.violations[0].message}")

            metrics = {}
            if event_kind is EventKind.EDIT_STATEMENT:
                original = session.accumulator.original_text_for(
                    payload["element_id"])
                if original is not None:
                    metrics = {
                        "levenshtein": levenshtein(original, payload["text"]),
                        "relative_edit_pct": relative_edit_pct(
                            original, payload["text"]),
                    }

            event = SessionEvent(session.next_sequence_no, _now(),
                                 event_kind, payload)
            self.store.append_event(self._session_paths[session_id], event)

            session.events.append(event)
            if rating is not None:
                session.ratings.append(rating)
            else:
                session.working_copy = candidate
                session.accumulator.apply(event_kind, payload)

        return {"sequence_no": event.sequence_no, "kind": event_kind.value,
                "metrics": metrics}

    def finalize_session(self, session_id: str) -> FinalizeOutcome:
        """Close the session and write the dataset files.

        Requires at least one rating in every required category (by default,
        each standard category whose layer is populated in the final graph).
        The accumulated corrections are cross-checked against compare_graphs
        before anything is written.
        """
        session = self.get_session(session_id)
        with session.lock:
            if session.state is not SessionState.OPEN:
                raise SessionFinalizedError(
                    f"session {session_id} is finalized")

            required = (self._required if self._required is not None
                        else default_required_ratings(session.working_copy))
            rated = {r.category for r in session.ratings}
            missing = [c for c in required if c not in rated]
            if missing:
                raise IncompleteReviewError(
                    "missing ratings for: " + ", ".join(missing))

            corrections = session.accumulator.build()
            recomputed = compare_graphs(session.extracted,
                                        session.working_copy)
            if corrections != recomputed:
                raise SessionError(
                    "internal error: accumulated corrections disagree with "
                    "the graph diff")

            event = SessionEvent(session.next_sequence_no, _now(),
                                 EventKind.FINALIZE, {})
            path = self._session_paths[session_id]
            self.store.append_event(path, event)
            session.events.append(event)
            session.state = SessionState.FINALIZED

            study_dir = self._study_dirs[session_id]
            (study_dir / CORRECTED_FILE).write_text(
                serialize_graph(session.working_copy), encoding="utf-8")
            (study_dir / CORRECTIONS_FILE).write_text(
                path.read_text(encoding="utf-8"), encoding="utf-8")
            (study_dir / RATINGS_FILE).write_text(
                ratings_table(session.ratings), encoding="utf-8")

        return FinalizeOutcome(
            corrected=session.working_copy,
            corrections=corrections,
            ratings=tuple(session.ratings),
            study_dir=study_dir,
        )

    # -- dataset queries -----------------------------------------------------

    def list_studies(self) -> list[dict]:
        """One entry per study directory, with finalization status."""
        with self._registry_lock:
            by_dir: dict[Path, list[ReviewSession]] = {}
            for sid, session in self._sessions.items():
                by_dir.setdefault(self._study_dirs[sid], []).append(session)
        entries = []
        for study_dir in self.store.iter_study_dirs():
            extracted = self.store.load_graph(study_dir / EXTRACTED_FILE)
            sessions = sorted(by_dir.get(study_dir, ()),
                              key=lambda s: s.session_id)
            entries.append({
                "study_id": extracted.study_id,
                "directory": study_dir.name,
                "finalized": (study_dir / CORRECTED_FILE).is_file(),
                "sessions": [
                    {"session_id": s.session_id, "state": s.state.value}
                    for s in sessions
                ],
            })
        return entries

    def finalized_pairs(self) -> list[tuple[StudyGraph, StudyGraph]]:
        """(extracted, corrected) graph pairs for every finalized study."""
        return self.store.finalized_pairs()

    def finalized_ratings(self) -> list[LikertRating]:
        """Ratings from every finalized study in the dataset store."""
        return self.store.finalized_ratings()


def _normalized_payload(graph: StudyGraph, kind: EventKind,
                        payload: dict) -> dict:
    """Make the payload self-contained before it is persisted.

    Supplements with a blank id get the fresh id written into the stored
    payload, so a replayed log assigns the same id regardless of context.
    """
    if not isinstance(payload, dict):
        raise InvalidEventError("event payload must be an object")
    try:
        payload = json.loads(json.dumps(payload))
    except (TypeError, ValueError) as exc:
        raise InvalidEventError(
            f"payload is not JSON-serializable: {exc}") from exc
    if kind is EventKind.SUPPLEMENT:
        kind_name = _need(payload, "kind", str)
        if kind_name not in ("hypothesis", "experiment", "interpretation"):
            raise InvalidEventError(f"unknown element kind {kind_name!r}")
        doc = dict(_need(payload, "element", dict))
        if not doc.get("id"):
            doc["id"] = fresh_element_id(graph, kind_name)
        payload["element"] = doc
    return payload
