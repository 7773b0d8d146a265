// Wire shapes for the review service. These mirror the canonical study
// document and the session endpoints; optional fields are omitted by the
// server when empty, never sent as null.

export type ElementKind = "hypothesis" | "experiment" | "interpretation";

export interface MetricSpecDoc {
  name: string;
  description?: string;
  unit?: string;
}

export interface ResultValueDoc {
  kind: "scalar" | "interval" | "categorical" | "missing";
  value?: number;
  low?: number;
  high?: number;
  text?: string;
}

export interface ResultRecordDoc {
  metric_name: string;
  context: string;
  value: ResultValueDoc;
  locator?: string;
  unmatched?: boolean;
}

export interface AssessmentTestDoc {
  kind: string;
  description: string;
}

export interface HypothesisDoc {
  id: string;
  statement: string;
  kind?: "stated" | "post_hoc";
}

export interface ExperimentDoc {
  id: string;
  description: string;
  hypothesis_ids: string[];
  metrics?: MetricSpecDoc[];
  statistics?: string[];
  strategy?: string;
  tests?: AssessmentTestDoc[];
  results?: ResultRecordDoc[];
}

export interface InterpretationDoc {
  id: string;
  statement: string;
  hypothesis_ids: string[];
  experiment_ids: string[];
  verdict: "supports" | "repudiates" | "inconclusive";
}

export interface StudyGraphDoc {
  format_version: string;
  metadata: { source_id: string; title?: string; token_count?: number };
  hypotheses: HypothesisDoc[];
  experiments: ExperimentDoc[];
  interpretations: InterpretationDoc[];
}

export interface RatingDoc {
  element_id: string;
  category: string;
  scale: number;
  value: number;
}

export interface StatementEditDoc {
  element_id: string;
  kind: ElementKind;
  original: string;
  corrected: string;
  levenshtein: number;
}

// Only the statement-edit entries are consumed by the UI (to restore
// distance readouts after a reload); the rest of the correction set is
// passed through untyped.
export interface CorrectionSetDoc {
  statement_edits: StatementEditDoc[];
  [key: string]: unknown;
}

export type SessionState = "open" | "finalized";

export interface SessionSummary {
  session_id: string;
  study_id: string;
  state: SessionState;
  event_count: number;
}

export interface SessionView extends SessionSummary {
  extracted: StudyGraphDoc;
  working_copy: StudyGraphDoc;
  corrections: CorrectionSetDoc;
  ratings: RatingDoc[];
  required_ratings: string[];
}

export interface EventAck {
  sequence_no: number;
  kind: string;
  metrics: { levenshtein?: number; relative_edit_pct?: number };
}

export interface FinalizeResponse {
  study_id: string;
  directory: string;
  corrected: StudyGraphDoc;
  corrections: CorrectionSetDoc;
  ratings: RatingDoc[];
}

export interface StudyEntry {
  study_id: string;
  directory: string;
  finalized: boolean;
  sessions: { session_id: string; state: SessionState }[];
}

export type LinkField = "exp_hyp" | "int_hyp" | "int_exp";

export type EventKind =
  | "edit_statement"
  | "edit_links"
  | "edit_details"
  | "edit_result"
  | "supplement"
  | "rate";
