import json

import pytest

from reprograph.canonical import ParseFailure, serialize_graph
from reprograph.extraction import (
    DocumentSource,
    ExtractionConfig,
    ExtractionExhausted,
    HttpCompletionClient,
    MockCompletionClient,
    PromptBundle,
    TransportError,
    build_prompt,
    bundle_from_doc,
    default_bundle,
    extract_study,
    find_document_block,
    load_bundle,
    parse_model_response,
)

DOC = DocumentSource(source_id="paper-17",
                     body="We test whether X helps Y. Results: X helps.",
                     token_count=120)

BUNDLE = PromptBundle(
    instructions="Extract hypotheses, experiments, and interpretations "
                 "as one JSON document.",
    few_shot_examples=(("toy input", '{"format_version": "1"}'),),
    section_hints=("Results", "Appendix"),
    keyword_hints=("significant", "ablation"),
)

CONFIG = ExtractionConfig(model_name="scripted", max_repair_attempts=2)


def good_response(minimal_graph, wrap=""):
    text = serialize_graph(minimal_graph)
    if wrap:
        return wrap.format(doc=text)
    return text


class TestPromptAssembly:
    def test_prompt_contains_all_sections_in_order(self):
        prompt = build_prompt(DOC, BUNDLE)
        order = [prompt.index(BUNDLE.instructions),
                 prompt.index("## Example 1 input"),
                 prompt.index("## Example 1 output"),
                 prompt.index("## Where to look"),
                 prompt.index("## Publication")]
        assert order == sorted(order)
        assert DOC.body in prompt
        assert "Results, Appendix" in prompt
        assert "significant, ablation" in prompt

    def test_zero_shot_omits_examples(self):
        bundle = PromptBundle(instructions="Extract.", few_shot=False)
        prompt = build_prompt(DOC, bundle)
        assert "## Example" not in prompt

    def test_few_shot_requires_examples(self):
        with pytest.raises(ValueError):
            PromptBundle(instructions="Extract.", few_shot=True)

    def test_prompt_is_deterministic(self):
        assert build_prompt(DOC, BUNDLE) == build_prompt(DOC, BUNDLE)

    def test_empty_document_rejected(self):
        with pytest.raises(ValueError):
            DocumentSource(source_id="x", body="   ")


class TestResponseParsing:
    def test_bare_document(self, minimal_graph):
        graph = parse_model_response(good_response(minimal_graph))
        assert graph == minimal_graph

    def test_document_wrapped_in_prose_and_fences(self, minimal_graph):
        response = ("Sure! Here is the extraction:\n```json\n"
                    + serialize_graph(minimal_graph)
                    + "```\nLet me know if you need anything else.")
        assert parse_model_response(response) == minimal_graph

    def test_decoy_object_before_document(self, minimal_graph):
        response = ('First, some metadata: {"note": "not the document"}\n'
                    + serialize_graph(minimal_graph))
        assert parse_model_response(response) == minimal_graph

    def test_no_block_found(self):
        with pytest.raises(ParseFailure):
            parse_model_response("I could not find any hypotheses.")

    def test_unbalanced_braces_skipped(self, minimal_graph):
        response = "{broken " + serialize_graph(minimal_graph)
        assert parse_model_response(response) == minimal_graph

    def test_invalid_graph_rejected_with_violation_code(self, minimal_graph):
        doc = json.loads(serialize_graph(minimal_graph))
        doc["hypotheses"] = []
        doc["experiments"] = []
        doc["interpretations"] = []
        with pytest.raises(ParseFailure) as err:
            parse_model_response(json.dumps(doc))
        assert "no_hypotheses" in str(err.value)

    def test_find_block_returns_verbatim_text(self, minimal_graph):
        text = serialize_graph(minimal_graph)
        assert find_document_block("prefix " + text + " suffix") == text.rstrip()


class TestExtractionLoop:
    def test_happy_path_single_call(self, minimal_graph):
        client = MockCompletionClient([good_response(minimal_graph)])
        graph, log = extract_study(DOC, BUNDLE, CONFIG, client)
        assert graph == minimal_graph
        assert client.call_count == 1
        assert log.call_count == 1
        assert log.attempts[0].succeeded
        assert log.attempts[0].outcome == "parsed"

    def test_repair_after_malformed_response(self, minimal_graph):
        client = MockCompletionClient(
            ["not json at all", good_response(minimal_graph)])
        graph, log = extract_study(DOC, BUNDLE, CONFIG, client)
        assert graph == minimal_graph
        assert log.call_count == 2
        assert not log.attempts[0].succeeded
        # The second prompt carries the failure back to the model verbatim.
        repair = client.prompts[1]
        assert "## Previous attempt rejected" in repair
        assert log.attempts[0].outcome.removeprefix("parse_failure: ") in repair

    def test_repair_prompt_builds_on_base_not_previous_repair(self, minimal_graph):
        client = MockCompletionClient(
            ["bad one", "bad two", good_response(minimal_graph)])
        _, log = extract_study(DOC, BUNDLE, CONFIG, client)
        assert log.call_count == 3
        assert client.prompts[2].count("## Previous attempt rejected") == 1

    def test_exhaustion_after_all_attempts(self):
        client = MockCompletionClient(["bad"] * 3)
        with pytest.raises(ExtractionExhausted) as err:
            extract_study(DOC, BUNDLE, CONFIG, client)
        assert client.call_count == 1 + CONFIG.max_repair_attempts
        assert err.value.log.call_count == 3
        assert not any(a.succeeded for a in err.value.log.attempts)

    def test_zero_repairs_means_one_call(self):
        config = ExtractionConfig(max_repair_attempts=0)
        client = MockCompletionClient(["bad", "never used"])
        with pytest.raises(ExtractionExhausted):
            extract_study(DOC, BUNDLE, config, client)
        assert client.call_count == 1

    def test_transport_error_passes_through(self):
        client = MockCompletionClient([])
        with pytest.raises(TransportError):
            extract_study(DOC, BUNDLE, CONFIG, client)

    def test_log_is_deterministic(self, minimal_graph):
        script = ["garbage", good_response(minimal_graph)]
        _, log1 = extract_study(DOC, BUNDLE, CONFIG,
                                MockCompletionClient(list(script)))
        _, log2 = extract_study(DOC, BUNDLE, CONFIG,
                                MockCompletionClient(list(script)))
        assert log1 == log2
        assert json.dumps(log1.to_doc()) == json.dumps(log2.to_doc())

    def test_run_dir_persists_transcripts(self, tmp_path, minimal_graph):
        run_dir = tmp_path / "run"
        client = MockCompletionClient(
            ["oops", good_response(minimal_graph)])
        extract_study(DOC, BUNDLE, CONFIG, client, run_dir=run_dir)
        names = sorted(p.name for p in run_dir.iterdir())
        assert len(names) == 4
        assert sum("prompt" in n for n in names) == 2
        assert sum("response" in n for n in names) == 2

    def test_invalid_config_rejected(self):
        with pytest.raises(ValueError):
            ExtractionConfig(temperature=-0.1)
        with pytest.raises(ValueError):
            ExtractionConfig(max_repair_attempts=-1)


class TestBundleLoading:
    def test_bundle_from_doc_roundtrip(self):
        doc = {
            "name": "tuned", "version": "3",
            "instructions": "Extract the study.",
            "few_shot_examples": [{"input": "in", "output": "out"}],
            "section_hints": ["Results"],
            "keyword_hints": ["p-value"],
        }
        bundle = bundle_from_doc(doc)
        assert bundle.name == "tuned"
        assert bundle.few_shot_examples == (("in", "out"),)
        assert bundle.few_shot

    def test_doc_without_examples_is_zero_shot(self):
        bundle = bundle_from_doc({"instructions": "Extract."})
        assert not bundle.few_shot

    def test_load_bundle_from_file(self, tmp_path):
        path = tmp_path / "bundle.json"
        path.write_text(json.dumps({"instructions": "Extract.",
                                    "name": "from-file"}), encoding="utf-8")
        assert load_bundle(path).name == "from-file"

    def test_default_bundle_is_usable(self):
        bundle = default_bundle()
        assert bundle.instructions
        prompt = build_prompt(DOC, bundle)
        assert DOC.body in prompt


class TestHttpClient:
    def test_missing_endpoint_rejected(self, monkeypatch):
        monkeypatch.delenv("REPRO_LLM_ENDPOINT", raising=False)
        with pytest.raises(TransportError):
            HttpCompletionClient()

    def test_env_configuration(self, monkeypatch):
        monkeypatch.setenv("REPRO_LLM_ENDPOINT", "http://example.test/v1")
        monkeypatch.setenv("REPRO_LLM_API_KEY", "secret")
        client = HttpCompletionClient()
        assert client.endpoint == "http://example.test/v1"
        assert client.api_key == "secret"

    def test_explicit_arguments_win(self, monkeypatch):
        monkeypatch.setenv("REPRO_LLM_ENDPOINT", "http://env.test")
        client = HttpCompletionClient(endpoint="http://arg.test", api_key="")
        assert client.endpoint == "http://arg.test"
        assert client.api_key == ""
