// The review walkthrough: one card per element, edits and ratings posted
// to the service one event at a time.
//
// The server owns all state. Every accepted mutation is followed by a
// re-fetch of the session view, so a reload lands on exactly the state the
// event log produces, and every displayed edit distance is a number the
// server sent (either in an event acknowledgment or in the session's
// correction set) - the client never computes one itself.

import { ServiceError, SessionApi } from "./api.js";
import { diffFragment, editScript } from "./diff.js";
import type {
  ElementView,
  LinkGroup,
  RatingRequirement,
} from "./views.js";
import { buildWalkthrough, progressOf } from "./views.js";
import type {
  EventKind,
  RatingDoc,
  SessionView,
  StudyEntry,
} from "./types.js";

const KIND_LABELS = {
  hypothesis: "Hypothesis",
  experiment: "Experiment",
  interpretation: "Interpretation",
} as const;

function latestRating(
  ratings: readonly RatingDoc[],
  elementId: string,
  category: string,
): RatingDoc | undefined {
  for (let i = ratings.length - 1; i >= 0; i--) {
    const rating = ratings[i]!;
    if (rating.element_id === elementId && rating.category === category) {
      return rating;
    }
  }
  return undefined;
}

export class ReviewApp {
  private sessionId: string | null = null;
  private view: SessionView | null = null;
  // Mutations run strictly one after another; the chain never rejects
  // (handlers render their own errors), so awaiting idle() is always safe.
  private pending: Promise<void> = Promise.resolve();

  constructor(
    private readonly root: HTMLElement,
    private readonly api: SessionApi,
  ) {}

  private get doc(): Document {
    return this.root.ownerDocument;
  }

  /** Resolves once every queued submission has been acknowledged. */
  async idle(): Promise<void> {
    await this.pending;
  }

  async openSession(sessionId: string): Promise<void> {
    this.sessionId = sessionId;
    try {
      this.view = await this.api.getSession(sessionId);
    } catch (error) {
      if (error instanceof ServiceError && error.status === 404) {
        this.renderNotFound(sessionId);
        return;
      }
      throw error;
    }
    this.render();
  }

  async showHome(): Promise<void> {
    this.sessionId = null;
    this.view = null;
    const studies = await this.api.listStudies();
    this.renderHome(studies);
  }

  // ---- event submission ------------------------------------------------

  private enqueue(run: () => Promise<void>): void {
    this.pending = this.pending.then(run);
  }

  /** Post exactly one event; on success re-fetch the session view. */
  private submit(
    kind: EventKind,
    payload: Record<string, unknown>,
    card: HTMLElement | null,
  ): void {
    this.enqueue(async () => {
      if (this.sessionId === null) return;
      try {
        const ack = await this.api.postEvent(this.sessionId, kind, payload);
        this.view = await this.api.getSession(this.sessionId);
        this.render();
        this.setStatus(ackMessage(kind, ack.sequence_no, ack.metrics));
      } catch (error) {
        this.showError(error, card?.dataset.elementId ?? null);
      }
    });
  }

  private finalize(): void {
    this.enqueue(async () => {
      if (this.sessionId === null) return;
      try {
        await this.api.finalize(this.sessionId);
        this.view = await this.api.getSession(this.sessionId);
        this.render();
        this.setStatus("session finalized");
      } catch (error) {
        this.showError(error, null);
      }
    });
  }

  // ---- rendering ---------------------------------------------------------

  private render(): void {
    const view = this.view;
    if (view === null) return;
    const readOnly = view.state === "finalized";
    const elements = buildWalkthrough(view);
    const doc = this.doc;

    this.root.textContent = "";
    const banner = doc.createElement("header");
    banner.className = "session-banner";
    banner.textContent = `Study ${view.study_id} · session ${view.session_id}`;
    if (readOnly) {
      const chip = doc.createElement("span");
      chip.className = "state-chip finalized";
      chip.textContent = "finalized (read-only)";
      banner.append(" ", chip);
    }
    this.root.append(banner);

    const status = doc.createElement("p");
    status.className = "status";
    this.root.append(status);

    const list = doc.createElement("main");
    list.className = "walkthrough";
    for (const element of elements) {
      list.append(this.renderCard(element, view, readOnly));
    }
    this.root.append(list);

    const footer = doc.createElement("footer");
    const { rated, total } = progressOf(elements, view.ratings);
    const progress = doc.createElement("span");
    progress.className = "progress";
    progress.dataset.rated = String(rated);
    progress.dataset.total = String(total);
    progress.textContent = `rated ${rated} / ${total}`;
    footer.append(progress);
    if (!readOnly) {
      const finalize = doc.createElement("button");
      finalize.className = "finalize";
      finalize.textContent = "Finalize review";
      finalize.addEventListener("click", () => this.finalize());
      footer.append(finalize);
    }
    const footerError = doc.createElement("p");
    footerError.className = "footer-error";
    footer.append(footerError);
    this.root.append(footer);
  }

  private renderCard(
    element: ElementView,
    view: SessionView,
    readOnly: boolean,
  ): HTMLElement {
    const doc = this.doc;
    const card = doc.createElement("section");
    card.className = "review-card";
    card.dataset.kind = element.kind;
    card.dataset.elementId = element.id;

    const heading = doc.createElement("h2");
    heading.textContent = `${KIND_LABELS[element.kind]} ${element.id}`;
    for (const badge of element.badges) {
      const chip = doc.createElement("span");
      chip.className = "badge";
      chip.textContent = badge;
      heading.append(" ", chip);
    }
    if (element.originalText === null) {
      const chip = doc.createElement("span");
      chip.className = "badge supplement";
      chip.textContent = "added in review";
      heading.append(" ", chip);
    }
    card.append(heading);

    if (element.originalText !== null) {
      const original = doc.createElement("p");
      original.className = "card-original";
      original.append(
        diffFragment(editScript(element.originalText, element.workingText), doc),
      );
      card.append(original);
    }

    if (element.detail !== null) {
      const detail = doc.createElement("p");
      detail.className = "card-detail";
      detail.textContent = element.detail;
      card.append(detail);
    }

    card.append(this.renderStatementEditor(element, readOnly, card));
    for (const group of element.links) {
      card.append(this.renderLinkGroup(element, group, readOnly, card));
    }
    for (const requirement of element.ratings) {
      card.append(
        this.renderRatingWidget(element, requirement, view, readOnly, card),
      );
    }

    const error = doc.createElement("p");
    error.className = "card-error";
    card.append(error);
    return card;
  }

  private renderStatementEditor(
    element: ElementView,
    readOnly: boolean,
    card: HTMLElement,
  ): HTMLElement {
    const doc = this.doc;
    const editor = doc.createElement("div");
    editor.className = "statement-editor";

    const readout = doc.createElement("span");
    readout.className = "distance-readout";
    if (element.distance !== null) {
      readout.dataset.distance = String(element.distance);
      readout.textContent = `edit distance ${element.distance}`;
    }

    if (readOnly) {
      const text = doc.createElement("p");
      text.className = "working-text-final";
      text.textContent = element.workingText;
      editor.append(text, readout);
      return editor;
    }

    const textarea = doc.createElement("textarea");
    textarea.className = "working-text";
    textarea.value = element.workingText;
    const save = doc.createElement("button");
    save.className = "save-statement";
    save.textContent = "Save text";
    // Invariant: working text is never submitted empty.
    const sync = () => {
      save.disabled = textarea.value.trim() === "";
    };
    textarea.addEventListener("input", sync);
    sync();
    save.addEventListener("click", () => {
      if (textarea.value.trim() === "") return;
      this.submit(
        "edit_statement",
        { element_id: element.id, text: textarea.value },
        card,
      );
    });
    editor.append(textarea, save, readout);
    return editor;
  }

  private renderLinkGroup(
    element: ElementView,
    group: LinkGroup,
    readOnly: boolean,
    card: HTMLElement,
  ): HTMLElement {
    const doc = this.doc;
    const container = doc.createElement("div");
    container.className = "link-group";
    container.dataset.field = group.field;

    const label = doc.createElement("span");
    label.className = "link-label";
    label.textContent = `${group.label}:`;
    container.append(label);

    for (const id of group.ids) {
      const chip = doc.createElement("span");
      chip.className = "link-chip";
      chip.dataset.id = id;
      chip.textContent = id;
      if (!readOnly) {
        const remove = doc.createElement("button");
        remove.className = "chip-remove";
        remove.textContent = "×";
        remove.title = `unlink ${id}`;
        remove.addEventListener("click", () => {
          this.submit(
            "edit_links",
            { element_id: element.id, link_field: group.field, remove: [id] },
            card,
          );
        });
        chip.append(remove);
      }
      container.append(chip);
    }

    const addable = group.candidates.filter((id) => !group.ids.includes(id));
    if (!readOnly && addable.length > 0) {
      const select = doc.createElement("select");
      select.className = "link-add-select";
      for (const id of addable) {
        const option = doc.createElement("option");
        option.value = id;
        option.textContent = id;
        select.append(option);
      }
      const add = doc.createElement("button");
      add.className = "link-add";
      add.textContent = "Link";
      add.addEventListener("click", () => {
        if (select.value === "") return;
        this.submit(
          "edit_links",
          {
            element_id: element.id,
            link_field: group.field,
            add: [select.value],
          },
          card,
        );
      });
      container.append(select, add);
    }
    return container;
  }

  private renderRatingWidget(
    element: ElementView,
    requirement: RatingRequirement,
    view: SessionView,
    readOnly: boolean,
    card: HTMLElement,
  ): HTMLElement {
    const doc = this.doc;
    const group = doc.createElement("div");
    group.className = "rating-group";
    group.dataset.category = requirement.category;
    group.dataset.scale = String(requirement.scale);

    const label = doc.createElement("span");
    label.className = "rating-label";
    label.textContent = `${requirement.category.replaceAll("_", " ")} (1-${requirement.scale})`;
    group.append(label);

    const current = latestRating(
      view.ratings,
      element.id,
      requirement.category,
    );
    if (readOnly) {
      const value = doc.createElement("span");
      value.className = "rating-final";
      value.textContent =
        current === undefined
          ? "not rated"
          : `${current.value} / ${requirement.scale}`;
      group.append(value);
      return group;
    }

    for (let point = 1; point <= requirement.scale; point++) {
      const wrapper = doc.createElement("label");
      wrapper.className = "rating-point";
      const input = doc.createElement("input");
      input.type = "radio";
      input.name = `rate-${element.id}-${requirement.category}`;
      input.value = String(point);
      input.checked = current?.value === point;
      input.addEventListener("change", () => {
        this.submit(
          "rate",
          {
            category: requirement.category,
            element_id: element.id,
            scale: requirement.scale,
            value: point,
          },
          card,
        );
      });
      wrapper.append(input, doc.createTextNode(String(point)));
      group.append(wrapper);
    }
    return group;
  }

  private renderNotFound(sessionId: string): void {
    const doc = this.doc;
    this.root.textContent = "";
    const screen = doc.createElement("div");
    screen.className = "not-found";
    const heading = doc.createElement("h2");
    heading.textContent = "Session not found";
    const body = doc.createElement("p");
    body.textContent = `No review session named ${sessionId} exists on this server.`;
    screen.append(heading, body);
    this.root.append(screen);
  }

  private renderHome(studies: StudyEntry[]): void {
    const doc = this.doc;
    this.root.textContent = "";
    const heading = doc.createElement("h2");
    heading.textContent = "Review sessions";
    this.root.append(heading);

    const list = doc.createElement("ul");
    list.className = "study-list";
    for (const study of studies) {
      const item = doc.createElement("li");
      item.textContent = `${study.study_id} (${
        study.finalized ? "finalized" : "in review"
      }) `;
      for (const session of study.sessions) {
        const link = doc.createElement("a");
        link.href = `#/sessions/${session.session_id}`;
        link.textContent = `${session.session_id.slice(0, 8)}… [${session.state}]`;
        item.append(link, " ");
      }
      list.append(item);
    }
    this.root.append(list);

    const form = doc.createElement("div");
    form.className = "create-form";
    const textarea = doc.createElement("textarea");
    textarea.className = "study-input";
    textarea.placeholder = "Paste a study document to start a review";
    const start = doc.createElement("button");
    start.className = "start-review";
    start.textContent = "Start review";
    const error = doc.createElement("p");
    error.className = "footer-error";
    start.addEventListener("click", () => {
      this.enqueue(async () => {
        try {
          const summary = await this.api.createSession(textarea.value);
          await this.openSession(summary.session_id);
        } catch (err) {
          error.textContent = errorText(err);
        }
      });
    });
    form.append(textarea, start, error);
    this.root.append(form);
  }

  // ---- feedback ----------------------------------------------------------

  private setStatus(message: string): void {
    const status = this.root.querySelector(".status");
    if (status !== null) status.textContent = message;
  }

  /** Rejections surface inline on the card that caused them; the server
      state is unchanged, so nothing else re-renders. */
  private showError(error: unknown, elementId: string | null): void {
    const message = errorText(error);
    if (elementId !== null) {
      const slot = this.root.querySelector(
        `.review-card[data-element-id="${elementId}"] .card-error`,
      );
      if (slot !== null) {
        slot.textContent = message;
        return;
      }
    }
    const footer = this.root.querySelector(".footer-error");
    if (footer !== null) footer.textContent = message;
  }
}

function errorText(error: unknown): string {
  if (error instanceof ServiceError) return `${error.code}: ${error.message}`;
  return error instanceof Error ? error.message : String(error);
}

function ackMessage(
  kind: EventKind,
  sequenceNo: number,
  metrics: { levenshtein?: number; relative_edit_pct?: number },
): string {
  let message = `event ${sequenceNo} (${kind}) accepted`;
  if (metrics.levenshtein !== undefined) {
    message += `: edit distance ${metrics.levenshtein}`;
    if (metrics.relative_edit_pct !== undefined) {
      message += ` (${metrics.relative_edit_pct.toFixed(2)}% of corrected text)`;
    }
  }
  return message;
}
