// Character-level diff between the extracted and the working text.
//
// The script is a minimal-cost Levenshtein alignment (unit-cost insert,
// delete, substitute), so the amount of highlighted text always matches
// the edit distance the server reports for the same pair of strings. The
// UI never shows a distance computed here; the script is display-only.

export type OpKind = "equal" | "delete" | "insert" | "replace";

export interface DiffOp {
  kind: OpKind;
  /** Source text consumed by this run ("" for pure insertions). */
  before: string;
  /** Target text produced by this run ("" for pure deletions). */
  after: string;
}

const enum Move {
  Diagonal = 0,
  Up = 1, // deletion from `before`
  Left = 2, // insertion from `after`
}

/** Minimal unit-cost edit script turning `before` into `after`.

    Operates on Unicode code points, matching how the service measures
    statement edits. Runs of the same operation are merged, so the result
    is compact: concatenating the `before` parts reproduces `before`, the
    `after` parts reproduce `after`. */
export function editScript(before: string, after: string): DiffOp[] {
  const a = Array.from(before);
  const b = Array.from(after);
  const n = a.length;
  const m = b.length;

  // cost[i][j] = distance between a[:i] and b[:j]; moves kept for backtrace.
  const width = m + 1;
  const cost = new Uint32Array((n + 1) * width);
  const move = new Uint8Array((n + 1) * width);
  for (let j = 1; j <= m; j++) {
    cost[j] = j;
    move[j] = Move.Left;
  }
  for (let i = 1; i <= n; i++) {
    cost[i * width] = i;
    move[i * width] = Move.Up;
    for (let j = 1; j <= m; j++) {
      const diagonal =
        cost[(i - 1) * width + (j - 1)]! + (a[i - 1] === b[j - 1] ? 0 : 1);
      const up = cost[(i - 1) * width + j]! + 1;
      const left = cost[i * width + (j - 1)]! + 1;
      // On ties, prefer plain inserts/deletes over the diagonal: matching
      // a character inside inserted text (think the "e" of "scale" against
      // the "e" of "well") splits what reads as one contiguous change.
      let best = up;
      let via = Move.Up;
      if (left < best) {
        best = left;
        via = Move.Left;
      }
      if (diagonal < best) {
        best = diagonal;
        via = Move.Diagonal;
      }
      cost[i * width + j] = best;
      move[i * width + j] = via;
    }
  }

  // Walk back from the corner, emitting per-character ops in reverse.
  const raw: { kind: OpKind; before: string; after: string }[] = [];
  let i = n;
  let j = m;
  while (i > 0 || j > 0) {
    const via = move[i * width + j];
    if (via === Move.Diagonal) {
      const same = a[i - 1] === b[j - 1];
      raw.push({
        kind: same ? "equal" : "replace",
        before: a[i - 1]!,
        after: b[j - 1]!,
      });
      i--;
      j--;
    } else if (via === Move.Up) {
      raw.push({ kind: "delete", before: a[i - 1]!, after: "" });
      i--;
    } else {
      raw.push({ kind: "insert", before: "", after: b[j - 1]! });
      j--;
    }
  }
  raw.reverse();

  const ops: DiffOp[] = [];
  for (const op of raw) {
    const last = ops[ops.length - 1];
    if (last !== undefined && last.kind === op.kind) {
      last.before += op.before;
      last.after += op.after;
    } else {
      ops.push({ ...op });
    }
  }
  return ops;
}

/** Unit cost of a script; equals the Levenshtein distance of the pair the
    script was built from. Exposed for tests, not for display. */
export function editCost(ops: readonly DiffOp[]): number {
  let total = 0;
  for (const op of ops) {
    if (op.kind === "equal") continue;
    // Replacements pair characters one-to-one, so either side's length is
    // the number of substitutions.
    total += op.kind === "insert"
      ? Array.from(op.after).length
      : Array.from(op.before).length;
  }
  return total;
}

/** Render a script as highlight spans: deletions struck through, insertions
    marked, unchanged text left bare. */
export function diffFragment(
  ops: readonly DiffOp[],
  doc: Document,
): DocumentFragment {
  const fragment = doc.createDocumentFragment();
  const span = (className: string, text: string) => {
    const node = doc.createElement("span");
    node.className = className;
    node.textContent = text;
    fragment.append(node);
  };
  for (const op of ops) {
    if (op.kind === "equal") {
      fragment.append(doc.createTextNode(op.before));
    } else {
      if (op.before !== "") span("diff-del", op.before);
      if (op.after !== "") span("diff-ins", op.after);
    }
  }
  return fragment;
}
