// View-model construction: flattening a session into the ordered review
// walkthrough. Pure functions over the wire documents; no DOM, no fetch.

import type {
  ElementKind,
  LinkField,
  RatingDoc,
  SessionView,
  StudyGraphDoc,
} from "./types.js";

export interface LinkGroup {
  field: LinkField;
  label: string;
  /** Currently linked element ids, in document order. */
  ids: string[];
  /** Every id this field may point at (the working copy's layer). */
  candidates: string[];
}

export interface RatingRequirement {
  category: string;
  scale: number;
}

export interface ElementView {
  kind: ElementKind;
  id: string;
  /** Extracted text, or null when the element was supplemented in review. */
  originalText: string | null;
  workingText: string;
  badges: string[];
  /** Read-only context line (experiment metrics, results, verdicts). */
  detail: string | null;
  links: LinkGroup[];
  ratings: RatingRequirement[];
  /** Server-reported edit distance for this element's statement, if any. */
  distance: number | null;
}

/** Hypotheses are rated on 7 points, every other category on 5. */
export function ratingScaleFor(category: string): number {
  return category === "hypothesis" ? 7 : 5;
}

function ratingsFor(kind: ElementKind): RatingRequirement[] {
  if (kind === "hypothesis") {
    return [{ category: "hypothesis", scale: 7 }];
  }
  if (kind === "experiment") {
    return [
      { category: "experiment_description", scale: 5 },
      { category: "experiment_details", scale: 5 },
    ];
  }
  return [{ category: "interpretation", scale: 5 }];
}

function extractedTexts(graph: StudyGraphDoc): Map<string, string> {
  const texts = new Map<string, string>();
  for (const h of graph.hypotheses) texts.set(h.id, h.statement);
  for (const e of graph.experiments) texts.set(e.id, e.description);
  for (const i of graph.interpretations) texts.set(i.id, i.statement);
  return texts;
}

function experimentDetail(e: {
  metrics?: { name: string }[];
  statistics?: string[];
  strategy?: string;
  results?: unknown[];
}): string {
  const parts: string[] = [];
  if (e.metrics?.length) {
    parts.push(`metrics: ${e.metrics.map((m) => m.name).join(", ")}`);
  }
  if (e.statistics?.length) parts.push(`statistics: ${e.statistics.join(", ")}`);
  if (e.strategy) parts.push(`strategy: ${e.strategy}`);
  parts.push(`${e.results?.length ?? 0} result value(s)`);
  return parts.join(" · ");
}

/** The review order: hypotheses, then experiments, then interpretations,
    each layer in document order. Every element appears exactly once. */
export function buildWalkthrough(view: SessionView): ElementView[] {
  const working = view.working_copy;
  const original = extractedTexts(view.extracted);
  const distances = new Map<string, number>();
  for (const edit of view.corrections.statement_edits) {
    distances.set(edit.element_id, edit.levenshtein);
  }
  const hypothesisIds = working.hypotheses.map((h) => h.id);
  const experimentIds = working.experiments.map((e) => e.id);

  const views: ElementView[] = [];
  for (const h of working.hypotheses) {
    views.push({
      kind: "hypothesis",
      id: h.id,
      originalText: original.get(h.id) ?? null,
      workingText: h.statement,
      badges: h.kind === "post_hoc" ? ["post-hoc"] : [],
      detail: null,
      links: [],
      ratings: ratingsFor("hypothesis"),
      distance: distances.get(h.id) ?? null,
    });
  }
  for (const e of working.experiments) {
    views.push({
      kind: "experiment",
      id: e.id,
      originalText: original.get(e.id) ?? null,
      workingText: e.description,
      badges: [],
      detail: experimentDetail(e),
      links: [
        {
          field: "exp_hyp",
          label: "hypotheses",
          ids: [...e.hypothesis_ids],
          candidates: hypothesisIds,
        },
      ],
      ratings: ratingsFor("experiment"),
      distance: distances.get(e.id) ?? null,
    });
  }
  for (const i of working.interpretations) {
    views.push({
      kind: "interpretation",
      id: i.id,
      originalText: original.get(i.id) ?? null,
      workingText: i.statement,
      badges: [i.verdict],
      detail: null,
      links: [
        {
          field: "int_hyp",
          label: "hypotheses",
          ids: [...i.hypothesis_ids],
          candidates: hypothesisIds,
        },
        {
          field: "int_exp",
          label: "experiments",
          ids: [...i.experiment_ids],
          candidates: experimentIds,
        },
      ],
      ratings: ratingsFor("interpretation"),
      distance: distances.get(i.id) ?? null,
    });
  }
  return views;
}

/** An element counts as rated once every category it carries has a rating
    recorded against its id. */
export function isRated(
  element: ElementView,
  ratings: readonly RatingDoc[],
): boolean {
  return element.ratings.every((requirement) =>
    ratings.some(
      (r) =>
        r.element_id === element.id && r.category === requirement.category,
    ),
  );
}

export function progressOf(
  elements: readonly ElementView[],
  ratings: readonly RatingDoc[],
): { rated: number; total: number } {
  let rated = 0;
  for (const element of elements) {
    if (isRated(element, ratings)) rated++;
  }
  return { rated, total: elements.length };
}
