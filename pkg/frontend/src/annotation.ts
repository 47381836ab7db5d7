// Annotator workflow: fetch the next assignment, render the task template,
// collect one label per aspect (per candidate panel when paired), submit.
//
// Panel order and content come exclusively from the server payload, which
// never identifies which candidate is the gold text.

import { ApiClient, ApiError } from "./api.js";
import { clear, el } from "./dom.js";
import type { Assignment, LabelSelection } from "./types.js";

const PANEL_NAMES = ["A", "B"];

export function panelLabel(index: number, paired: boolean): string {
  return paired ? `Candidate ${PANEL_NAMES[index] ?? index + 1}` : "Candidate";
}

function prettyFieldName(name: string): string {
  return name.replace(/_/g, " ");
}

function radioRow(
  assignment: Assignment,
  aspect: string,
  panel: number,
  label: string,
): HTMLElement {
  const name = `${assignment.assignment_id}:${aspect}:${panel}`;
  const options = assignment.task.scheme.category_labels.map((category, index) =>
    el(
      "label",
      { className: "likert-option" },
      el("input", {
        type: "radio",
        name,
        value: String(index),
        "data-aspect": aspect,
        "data-panel": String(panel),
      }),
      el("span", {}, category),
    ),
  );
  return el(
    "div",
    { className: "likert-row", "data-aspect": aspect, "data-panel": String(panel) },
    el("span", { className: "likert-target" }, label),
    el("div", { className: "likert-options" }, ...options),
  );
}

export function renderAssignmentView(
  assignment: Assignment,
  onSubmit: (selection: LabelSelection) => void,
): HTMLElement {
  const task = assignment.task;
  const panels = assignment.candidates.length;

  const inputPanels = Object.entries(assignment.inputs).map(([field, text]) =>
    el(
      "section",
      { className: "panel input-panel", "data-field": field },
      el("h3", {}, prettyFieldName(field)),
      el("p", {}, text),
    ),
  );

  const candidatePanels = assignment.candidates.map((text, index) =>
    el(
      "section",
      { className: "panel candidate-panel", "data-panel": String(index) },
      el("h3", {}, panelLabel(index, task.paired)),
      el("p", {}, text),
    ),
  );

  const aspectBlocks = task.aspects.map((aspect) => {
    const rows =
      panels === 1
        ? [radioRow(assignment, aspect.name, 0, "")]
        : assignment.candidates.map((_, index) =>
            radioRow(assignment, aspect.name, index, panelLabel(index, task.paired)),
          );
    return el(
      "fieldset",
      { className: "aspect-block", "data-aspect": aspect.name },
      el("legend", {}, aspect.question || aspect.name),
      ...rows,
    );
  });

  const error = el("p", { className: "form-error", hidden: true });

  const view = el(
    "div",
    { className: "annotation-view", "data-assignment": assignment.assignment_id },
    el("h2", {}, task.name),
    el("p", { className: "instructions" }, task.instructions),
    ...inputPanels,
    ...candidatePanels,
    el("form", { className: "responses" }, ...aspectBlocks, error),
    el("button", {
      className: "submit-label",
      type: "button",
      onClick: () => {
        const selection = collectSelection(view, assignment);
        if (selection === null) {
          error.hidden = false;
          error.textContent = "Please answer every question before submitting.";
          return;
        }
        error.hidden = true;
        onSubmit(selection);
      },
    }),
  );
  const button = view.querySelector("button.submit-label")!;
  button.textContent = "Submit";
  return view;
}

/** All selections, or null if any required control is unanswered. */
export function collectSelection(
  view: HTMLElement,
  assignment: Assignment,
): LabelSelection | null {
  const panels = assignment.candidates.length;
  const selection: LabelSelection = {};
  for (const aspect of assignment.task.aspects) {
    const values: number[] = [];
    for (let panel = 0; panel < panels; panel++) {
      const name = `${assignment.assignment_id}:${aspect.name}:${panel}`;
      const checked = view.querySelector<HTMLInputElement>(
        `input[name="${CSS.escape(name)}"]:checked`,
      );
      if (!checked) return null;
      values.push(Number(checked.value));
    }
    selection[aspect.name] = values;
  }
  return selection;
}

export class AnnotationSession {
  private submitting = false;

  constructor(
    private api: ApiClient,
    private annotatorId: string,
    private root: Element,
  ) {}

  async showNext(): Promise<void> {
    clear(this.root);
    let response;
    try {
      response = await this.api.nextAssignment(this.annotatorId);
    } catch (err) {
      if (err instanceof ApiError && err.status === 403) {
        this.root.appendChild(
          el(
            "div",
            { className: "notice eligibility" },
            el("h2", {}, "Not eligible"),
            el("p", {}, err.detail),
          ),
        );
        return;
      }
      throw err;
    }
    if (response.done || !response.assignment) {
      this.root.appendChild(
        el(
          "div",
          { className: "notice done" },
          el("h2", {}, "All done"),
          el("p", {}, "No assignments are waiting for you right now."),
        ),
      );
      return;
    }
    const assignment = response.assignment;
    this.submitting = false;
    const view = renderAssignmentView(assignment, (selection) =>
      this.submit(assignment, selection, view),
    );
    this.root.appendChild(view);
  }

  private async submit(
    assignment: Assignment,
    selection: LabelSelection,
    view: HTMLElement,
  ): Promise<void> {
    if (this.submitting) return; // double-click guard; the server is idempotent too
    this.submitting = true;
    const button = view.querySelector<HTMLButtonElement>("button.submit-label")!;
    button.disabled = true;
    try {
      await this.api.submitLabel(
        assignment.assignment_id,
        this.annotatorId,
        selection,
      );
    } catch (err) {
      this.submitting = false;
      button.disabled = false;
      if (err instanceof ApiError && err.status === 409) {
        clear(this.root);
        this.root.appendChild(
          el(
            "div",
            { className: "notice stale" },
            el("h2", {}, "Assignment expired"),
            el("p", {}, "This assignment went back to the queue. Load the next one."),
            el("button", { className: "reload", onClick: () => void this.showNext() }, "Next"),
          ),
        );
        return;
      }
      throw err; // network failures: safe to retry, server stores one record
    }
    await this.showNext();
  }
}
