"""From corrected graphs to the extraction-quality report.

Given pairs of (extracted, corrected) study graphs, the library diffs each
pair into a correction set, then folds the sets into a per-category error
table: how many statements needed editing (and how heavily), how many link
sets and detail fields were wrong, and how many result values were missing
or incorrect.

Run: python3 demos/error_report.py
"""

from dataclasses import replace

from reprograph import (
    LikertRating,
    aggregate_reports,
    compare_graphs,
    likert_summary,
    likert_to_table,
    populations_for,
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

# %% What the model produced for one study.

extracted = StudyGraph(
    metadata=StudyMetadata(source_id="demo-study-03"),
    hypotheses=(
        Hypothesis("H1", "Larger models calibrate better."),
        Hypothesis("H2", "Calibration transfers across domains"),
    ),
    experiments=(
        Experiment("E1", "Measure calibration error across model sizes.",
                   ("H1",),
                   metrics=(MetricSpec("ece"),),
                   results=(ResultRecord("ece", "small",
                                         ResultValue.scalar(0.08)),
                            ResultRecord("ece", "large",
                                         ResultValue.scalar(0.031)),)),
    ),
    interpretations=(
        Interpretation("I1", "Calibration improved with scale.",
                       ("H1",), ("E1",), verdict=Verdict.SUPPORTS),
    ),
)

# %% What a reviewer turned it into: a sharpened statement, a fixed unit,
# a corrected value, and one record the extraction missed.

corrected = replace(
    extracted,
    hypotheses=(
        extracted.hypotheses[0],
        replace(extracted.hypotheses[1],
                statement="Calibration transfers across text domains."),
    ),
    experiments=(
        replace(extracted.experiments[0],
                metrics=(MetricSpec("ece", description="expected calibration "
                                                       "error"),),
                results=(ResultRecord("ece", "small",
                                      ResultValue.scalar(0.08)),
                         ResultRecord("ece", "large",
                                      ResultValue.scalar(0.03)),
                         ResultRecord("ece", "medium",
                                      ResultValue.scalar(0.05)),)),
    ),
)

corrections = compare_graphs(extracted, corrected)
for edit in corrections.statement_edits:
    print(f"statement edit on {edit.element_id}: distance {edit.distance}")
for edit in corrections.result_edits:
    print(f"result errors on {edit.element_id}: "
          f"{edit.missing_count} missing, {edit.incorrect_count} incorrect")

# %% The report divides error counts by the corrected-corpus populations.
# With one study the table is small; the same call scales to a full corpus.

populations = populations_for([corrected])
report = aggregate_reports([corrections], populations)
print()
print(report.to_table())

# %% Reviewer confidence ratings aggregate separately: 7 points for
# hypotheses, 5 for everything else.

ratings = [
    LikertRating("hypothesis", 7, 6, element_id="H1"),
    LikertRating("hypothesis", 7, 5, element_id="H2"),
    LikertRating("experiment_description", 5, 4, element_id="E1"),
    LikertRating("interpretation", 5, 4, element_id="I1"),
]
print(likert_to_table(likert_summary(ratings)))
