"""LLM extraction pipeline: prompt assembly, response parsing, repair loop.

The pipeline is provider-agnostic. A CompletionClient turns a prompt into a
completion; everything else — building the few-shot prompt, locating the
study document inside the model's response, validating it, and re-prompting
with the parse error on failure — is deterministic, so a scripted mock
client reproduces a run byte for byte.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Optional, Protocol, Sequence

import httpx

from .canonical import ParseFailure, canonical_loads, parse_graph
from .model import StudyGraph, validate_graph

ENDPOINT_ENV = "REPRO_LLM_ENDPOINT"
API_KEY_ENV = "REPRO_LLM_API_KEY"


class TransportError(RuntimeError):
    """The completion provider could not be reached or answered abnormally."""


class ExtractionExhausted(RuntimeError):
    """All repair attempts failed to produce a valid study graph."""

    def __init__(self, log: "ExtractionLog"):
        self.log = log
        last = log.attempts[-1].outcome if log.attempts else "no attempts"
        super().__init__(
            f"extraction failed after {len(log.attempts)} attempt(s); "
            f"last failure: {last}")


@dataclass(frozen=True)
class DocumentSource:
    """Pre-converted plain text of one publication."""

    source_id: str
    body: str
    token_count: Optional[int] = None

    def __post_init__(self) -> None:
        if not self.body.strip():
            raise ValueError("document body is empty")


@dataclass(frozen=True)
class PromptBundle:
    """Prompt material, treated as versioned data rather than code."""

    instructions: str
    few_shot_examples: tuple[tuple[str, str], ...] = ()
    section_hints: tuple[str, ...] = ()
    keyword_hints: tuple[str, ...] = ()
    few_shot: bool = True
    name: str = "unnamed"
    version: str = "0"

    def __post_init__(self) -> None:
        object.__setattr__(self, "few_shot_examples",
                           tuple(tuple(pair) for pair in self.few_shot_examples))
        object.__setattr__(self, "section_hints", tuple(self.section_hints))
        object.__setattr__(self, "keyword_hints", tuple(self.keyword_hints))
        if self.few_shot and not self.few_shot_examples:
            raise ValueError("few-shot mode requires at least one example")


@dataclass(frozen=True)
class ExtractionConfig:
    model_name: str = "default-model"
    temperature: float = 0.0
    max_repair_attempts: int = 2
    strict_parse: bool = True

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_repair_attempts < 0:
            raise ValueError("max_repair_attempts must be >= 0")


class CompletionClient(Protocol):
    """Provider seam. Implementations must be safe to call concurrently and
    deterministic whenever the backing service is."""

    def complete(self, prompt: str, config: ExtractionConfig) -> str:
        """Return the raw completion text; raise TransportError on failure."""
        ...


class MockCompletionClient:
    """Scripted client for tests and offline runs: returns canned responses
    in order and records every prompt it was given."""

    def __init__(self, responses: Sequence[str]):
        self._responses = list(responses)
        self.prompts: list[str] = []

    def complete(self, prompt: str, config: ExtractionConfig) -> str:
        self.prompts.append(prompt)
        if not self._responses:
            raise TransportError("mock response script exhausted")
        return self._responses.pop(0)

    @property
    def call_count(self) -> int:
        return len(self.prompts)


class HttpCompletionClient:
    """Minimal HTTP provider client.

    POSTs ``{"model", "prompt", "temperature"}`` to the endpoint and expects
    a JSON body with a ``completion`` field. Endpoint and credential default
    to the REPRO_LLM_ENDPOINT / REPRO_LLM_API_KEY environment variables.
    """

    def __init__(self, endpoint: Optional[str] = None,
                 api_key: Optional[str] = None, timeout: float = 300.0):
        self.endpoint = endpoint or os.environ.get(ENDPOINT_ENV, "")
        self.api_key = api_key if api_key is not None else os.environ.get(
            API_KEY_ENV, "")
        self.timeout = timeout
        if not self.endpoint:
            raise TransportError(
                f"no completion endpoint configured (set {ENDPOINT_ENV})")

    def complete(self, prompt: str, config: ExtractionConfig) -> str:
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            response = httpx.post(
                self.endpoint,
                json={"model": config.model_name, "prompt": prompt,
                      "temperature": config.temperature},
                headers=headers, timeout=self.timeout)
        except httpx.HTTPError as exc:
            raise TransportError(f"completion request failed: {exc}") from exc
        if response.status_code != 200:
            raise TransportError(
                f"completion endpoint returned {response.status_code}: "
                f"{response.text[:300]}")
        try:
            completion = response.json()["completion"]
        except (ValueError, KeyError) as exc:
            raise TransportError(
                f"malformed completion response: {response.text[:300]}") from exc
        if not isinstance(completion, str):
            raise TransportError("completion field is not text")
        return completion


# --------------------------------------------------------------------------
# Prompt assembly
# --------------------------------------------------------------------------


def build_prompt(doc: DocumentSource, bundle: PromptBundle) -> str:
    """Assemble the extraction prompt: instructions, few-shot examples,
    hints, then the full document body, in that order."""
    parts = [bundle.instructions.rstrip()]

    if bundle.few_shot:
        for i, (example_in, example_out) in enumerate(bundle.few_shot_examples, 1):
            parts.append(f"## Example {i} input\n{example_in.rstrip()}")
            parts.append(f"## Example {i} output\n{example_out.rstrip()}")

    hint_lines = []
    if bundle.section_hints:
        hint_lines.append("Sections likely to contain the target information: "
                          + ", ".join(bundle.section_hints))
    if bundle.keyword_hints:
        hint_lines.append("Keywords that may signal essential information: "
                          + ", ".join(bundle.keyword_hints))
    if hint_lines:
        parts.append("## Where to look\n" + "\n".join(hint_lines))

    parts.append(f"## Publication\n{doc.body}")
    return "\n\n".join(parts)


def _repair_prompt(base_prompt: str, error: str) -> str:
    return (f"{base_prompt}\n\n## Previous attempt rejected\n"
            f"The previous response could not be accepted:\n{error}\n"
            "Return one corrected JSON document and nothing else.")


# --------------------------------------------------------------------------
# Response parsing
# --------------------------------------------------------------------------


def find_document_block(text: str) -> Optional[str]:
    """Locate the first complete JSON object carrying a format_version field.

    The model may wrap the document in prose or code fences; this scans each
    '{' and returns the first well-formed candidate block verbatim.
    """
    decoder = json.JSONDecoder()
    index = text.find("{")
    while index != -1:
        try:
            obj, end = decoder.raw_decode(text, index)
        except json.JSONDecodeError:
            index = text.find("{", index + 1)
            continue
        if isinstance(obj, dict) and "format_version" in obj:
            return text[index:end]
        index = text.find("{", end)
    return None


def parse_model_response(text: str, strict: bool = True) -> StudyGraph:
    """Parse a model completion into a validated study graph.

    Tolerates surrounding prose by locating the first well-formed document
    block; the parsed graph must validate with zero error-level violations.
    """
    block = find_document_block(text)
    if block is None:
        raise ParseFailure("no study document block found in the response")
    graph = parse_graph(block, strict=strict)
    report = validate_graph(graph)
    if not report.ok:
        first = report.violations[0]
        raise ParseFailure(
            f"document violates graph invariants: [{first.code.value}] "
            f"{first.message}"
            + (f" (element {first.element_id})" if first.element_id else ""))
    return graph


# --------------------------------------------------------------------------
# Extraction loop
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ExtractionAttempt:
    attempt_no: int
    prompt: str
    response: str
    outcome: str
    succeeded: bool


@dataclass(frozen=True)
class ExtractionLog:
    source_id: str
    model_name: str
    attempts: tuple[ExtractionAttempt, ...] = ()

    @property
    def call_count(self) -> int:
        return len(self.attempts)

    def to_doc(self) -> dict:
        return {
            "source_id": self.source_id,
            "model_name": self.model_name,
            "attempts": [
                {"attempt_no": a.attempt_no, "prompt": a.prompt,
                 "response": a.response, "outcome": a.outcome,
                 "succeeded": a.succeeded}
                for a in self.attempts],
        }


def _persist_attempt(run_dir: Path, attempt_no: int, prompt: str,
                     response: str) -> None:
    run_dir.mkdir(parents=True, exist_ok=True)
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S%fZ")
    (run_dir / f"{stamp}_attempt{attempt_no}_prompt.txt").write_text(
        prompt, encoding="utf-8")
    (run_dir / f"{stamp}_attempt{attempt_no}_response.txt").write_text(
        response, encoding="utf-8")


def extract_study(doc: DocumentSource, bundle: PromptBundle,
                  config: ExtractionConfig, client: CompletionClient,
                  run_dir: Optional[Path] = None,
                  ) -> tuple[StudyGraph, ExtractionLog]:
    """Run the prompt → parse loop against a completion client.

    On a parse failure the failure message is appended to a follow-up prompt,
    up to ``config.max_repair_attempts`` repairs. The returned graph always
    validates cleanly; the log records every prompt, raw response, and parse
    outcome. Raises ExtractionExhausted when every attempt fails and lets
    TransportError pass through untouched.
    """
    base_prompt = build_prompt(doc, bundle)
    attempts: list[ExtractionAttempt] = []
    prompt = base_prompt

    for attempt_no in range(1, config.max_repair_attempts + 2):
        response = client.complete(prompt, config)
        if run_dir is not None:
            _persist_attempt(Path(run_dir), attempt_no, prompt, response)
        try:
            graph = parse_model_response(response, strict=config.strict_parse)
        except ParseFailure as failure:
            attempts.append(ExtractionAttempt(
                attempt_no, prompt, response, f"parse_failure: {failure}", False))
            prompt = _repair_prompt(base_prompt, str(failure))
            continue
        attempts.append(ExtractionAttempt(
            attempt_no, prompt, response, "parsed", True))
        log = ExtractionLog(doc.source_id, config.model_name, tuple(attempts))
        return graph, log

    raise ExtractionExhausted(
        ExtractionLog(doc.source_id, config.model_name, tuple(attempts)))


# --------------------------------------------------------------------------
# Bundle loading
# --------------------------------------------------------------------------


def bundle_from_doc(doc: dict) -> PromptBundle:
    examples = tuple(
        (ex["input"], ex["output"]) for ex in doc.get("few_shot_examples", []))
    return PromptBundle(
        instructions=doc["instructions"],
        few_shot_examples=examples,
        section_hints=tuple(doc.get("section_hints", ())),
        keyword_hints=tuple(doc.get("keyword_hints", ())),
        few_shot=bool(examples),
        name=doc.get("name", "unnamed"),
        version=doc.get("version", "0"),
    )


def load_bundle(path: Path) -> PromptBundle:
    """Load a prompt bundle from a JSON file."""
    return bundle_from_doc(canonical_loads(Path(path).read_text(encoding="utf-8")))


def default_bundle() -> PromptBundle:
    """The bundle shipped with the package (a generic starting point, not a
    tuned production prompt)."""
    raw = resources.files("reprograph.data").joinpath(
        "prompt_default.json").read_text(encoding="utf-8")
    return bundle_from_doc(canonical_loads(raw))
