import pytest

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
)


@pytest.fixture
def minimal_graph() -> StudyGraph:
    """Smallest legal graph: one element per layer, fully linked."""
    return StudyGraph(
        metadata=StudyMetadata(source_id="minimal-01"),
        hypotheses=(Hypothesis("H1", "Smaller batches converge faster."),),
        experiments=(Experiment("E1", "Sweep batch sizes on the benchmark.",
                                ("H1",)),),
        interpretations=(Interpretation("I1", "Small batches won.",
                                        ("H1",), ("E1",)),),
    )


@pytest.fixture
def rich_graph() -> StudyGraph:
    """A graph that touches every field: metrics, statistics, strategy,
    tests, result values of all kinds, multiple links."""
    return StudyGraph(
        metadata=StudyMetadata(source_id="rich-01", title="A fuller study",
                               token_count=52340),
        hypotheses=(
            Hypothesis("H1", "Retrieval improves factual accuracy."),
            Hypothesis("H2", "Retrieval slows generation.",
                       kind=HypothesisKind.POST_HOC),
        ),
        experiments=(
            Experiment(
                "E1", "Compare accuracy with and without retrieval.",
                ("H1",),
                metrics=(MetricSpec("accuracy", description="exact match",
                                    unit="%"),
                         MetricSpec("f1")),
                statistics=("mean over 3 seeds", "95% CI"),
                strategy="paired runs on a fixed question set",
                tests=(AssessmentTest(TestKind.STATISTICAL, "paired t-test"),),
                results=(
                    ResultRecord("accuracy", "with", ResultValue.scalar(71.4)),
                    ResultRecord("accuracy", "without",
                                 ResultValue.scalar(63.0, 1.2)),
                    ResultRecord("f1", "with",
                                 ResultValue.interval(0.61, 0.67)),
                ),
            ),
            Experiment(
                "E2", "Measure latency impact of the retriever.",
                ("H1", "H2"),
                metrics=(MetricSpec("latency", unit="ms"),),
                results=(
                    ResultRecord("latency", "with", ResultValue.scalar(212.0)),
                    ResultRecord("latency", "without",
                                 ResultValue.categorical("not reported")),
                    ResultRecord("throughput", "with", ResultValue.missing(),
                                 unmatched=True),
                ),
            ),
        ),
        interpretations=(
            Interpretation("I1", "Retrieval helped accuracy substantially.",
                           ("H1",), ("E1",), verdict=Verdict.SUPPORTS),
            Interpretation("I2", "The latency cost is real but modest.",
                           ("H2",), ("E2",), verdict=Verdict.SUPPORTS),
            Interpretation("I3", "No effect on fluency was found.",
                           ("H1",), ("E1", "E2"),
                           verdict=Verdict.INCONCLUSIVE),
        ),
    )
