"""A full review session, from extracted graph to finalized corrections.

The session service owns a data directory. Creating a session freezes the
extracted graph to disk; each accepted event is appended to a log and folded
into a working copy; finalizing cross-checks the event-folded corrections
against a fresh graph diff and writes the corrected study, the correction
set, and the ratings table next to the extracted file.

Run: python3 demos/review_session.py
"""

import tempfile
from pathlib import Path

from reprograph import IncompleteReviewError, SessionService
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

extracted = StudyGraph(
    metadata=StudyMetadata(source_id="demo-study-11"),
    hypotheses=(
        Hypothesis("H1", "Curriculum ordering speeds convergence"),
    ),
    experiments=(
        Experiment("E1", "Compare curricula on a shared budget.",
                   ("H1",),
                   metrics=(MetricSpec("steps_to_target"),),
                   results=(ResultRecord("steps_to_target", "easy-first",
                                         ResultValue.scalar(4100.0)),)),
    ),
    interpretations=(
        Interpretation("I1", "Easy-first converged fastest.",
                       ("H1",), ("E1",), verdict=Verdict.SUPPORTS),
    ),
)

# %% Open a session. The service persists everything under data_dir, keyed
# by a content hash of the extracted graph.

data_dir = Path(tempfile.mkdtemp()) / "review-data"
service = SessionService(data_dir)
session = service.create_session(extracted)
print(f"session {session.session_id} reviews study {session.study_id}")

# %% Statement edits come back with live metrics against the extracted text.

ack = service.apply_event(session.session_id, "edit_statement", {
    "element_id": "H1",
    "text": "Curriculum ordering speeds convergence on small models.",
})
print(f"edit #{ack['sequence_no']}: distance {ack['metrics']['levenshtein']},"
      f" {ack['metrics']['relative_edit_pct']:.2f}% of the corrected"
      " statement")

service.apply_event(session.session_id, "edit_result", {
    "element_id": "E1",
    "action": "set",
    "record": {"metric_name": "steps_to_target", "context": "easy-first",
               "value": {"kind": "scalar", "value": 3900.0}},
})

# %% Finalizing before every element is rated is refused, by design.

try:
    service.finalize_session(session.session_id)
except IncompleteReviewError as exc:
    print(f"finalize refused: {exc}")

for category, element_id, value in [
    ("hypothesis", "H1", 6),
    ("experiment_description", "E1", 4),
    ("experiment_details", "E1", 4),
    ("interpretation", "I1", 5),
]:
    service.apply_event(session.session_id, "rate", {
        "category": category, "element_id": element_id, "value": value,
    })

outcome = service.finalize_session(session.session_id)
print(f"finalized with {len(outcome.corrections.statement_edits)} statement "
      f"edit(s) and {len(outcome.corrections.result_edits)} result edit(s)")

# %% The study directory now holds the whole audit trail.

for path in sorted(outcome.study_dir.rglob("*")):
    if path.is_file():
        print(f"  {path.relative_to(data_dir)}")

# %% A restarted service replays the logs and sees the same finalized state.

resumed = SessionService(data_dir).get_session(session.session_id)
print(f"after restart: state={resumed.state.value}, "
      f"working copy intact={resumed.working_copy == outcome.corrected}")
