"""Scoring a reproduction attempt against a study graph.

A reproduction attempt records which experiments were re-run (and whether
they reproduced) plus a verdict per interpretation. Scoring rolls that up
into three coverage fractions and a per-hypothesis support map, and the
explain call shows why each element landed where it did.

Run: python3 demos/score_reproduction.py
"""

from reprograph import (
    ExperimentOutcome,
    ReproductionAttempt,
    explain_score,
    parse_attempt,
    score_reproduction,
    serialize_attempt,
)
from reprograph.model import (
    Experiment,
    Hypothesis,
    Interpretation,
    MetricSpec,
    ResultRecord,
    ResultValue,
    StudyGraph,
    StudyMetadata,
    Verdict,
)

# %% A two-hypothesis study: H1 rests on two interpretations, H2 on one.

graph = StudyGraph(
    metadata=StudyMetadata(source_id="demo-study-07"),
    hypotheses=(
        Hypothesis("H1", "Dropout reduces overfitting on small corpora."),
        Hypothesis("H2", "The effect persists at 10x data."),
    ),
    experiments=(
        Experiment("E1", "Train with and without dropout on 1k examples.",
                   ("H1",), metrics=(MetricSpec("val_loss"),)),
        Experiment("E2", "Repeat the sweep on 10k examples.",
                   ("H1", "H2"), metrics=(MetricSpec("val_loss"),)),
    ),
    interpretations=(
        Interpretation("I1", "Dropout lowered validation loss at 1k.",
                       ("H1",), ("E1",), verdict=Verdict.SUPPORTS),
        Interpretation("I2", "The gap narrowed but held at 10k.",
                       ("H1", "H2"), ("E2",), verdict=Verdict.SUPPORTS),
    ),
)

# %% The attempt reproduced E1 cleanly but E2 failed to reproduce, so the
# verdict on I2 cannot be upheld.

attempt = ReproductionAttempt(
    study_id="demo-study-07",
    experiment_outcomes={
        "E1": ExperimentOutcome(
            reproduced=True,
            test_passed=True,
            reproduced_results=(
                ResultRecord("val_loss", "dropout", ResultValue.scalar(1.92)),
            ),
        ),
        "E2": ExperimentOutcome(reproduced=False),
    },
    interpretation_verdicts={"I1": True, "I2": False},
)

score = score_reproduction(graph, attempt)
print(f"interpretations upheld:   {score.interpretations_upheld:.4f}")
print(f"hypotheses supported:     {score.hypotheses_supported:.4f}")
print(f"experiments reproduced:   {score.experiments_reproduced:.4f}")
for hyp_id, supported in sorted(score.per_hypothesis.items()):
    print(f"  {hyp_id}: {'supported' if supported else 'not supported'}")

# %% Explanations walk the graph in layer order and name the evidence.

print()
for line in explain_score(graph, attempt):
    print(f"{line.element_id}\t{line.status}\t{line.reason}")

# %% Attempts serialize to the same canonical JSON dialect as studies, so
# they survive a disk round trip byte for byte.

text = serialize_attempt(attempt)
assert parse_attempt(text) == attempt
print()
print(f"serialized attempt: {len(text)} bytes, round-trips intact")
