// Ranked leaderboard table: human scores with asymmetric CI whiskers,
// automatic metric columns, best value per column highlighted. Every number
// shown is the API's display value; nothing is recomputed client-side.

import { el } from "./dom.js";
import type { HumanScore, LeaderboardEntry, LeaderboardResponse } from "./types.js";

const WHISKER_WIDTH = 120; // px
const WHISKER_SCALE = 10; // px per display point, CI arms rarely exceed +-6

export function whisker(score: HumanScore): HTMLElement {
  const { plus, minus } = score.display;
  const left = WHISKER_WIDTH / 2 - minus * WHISKER_SCALE;
  const right = WHISKER_WIDTH / 2 + plus * WHISKER_SCALE;
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("class", "ci-whisker");
  svg.setAttribute("width", String(WHISKER_WIDTH));
  svg.setAttribute("height", "14");
  svg.setAttribute("data-minus", String(minus));
  svg.setAttribute("data-plus", String(plus));
  if (right > left) {
    const bar = document.createElementNS("http://www.w3.org/2000/svg", "line");
    bar.setAttribute("x1", String(left));
    bar.setAttribute("x2", String(right));
    bar.setAttribute("y1", "7");
    bar.setAttribute("y2", "7");
    bar.setAttribute("class", "ci-bar");
    svg.appendChild(bar);
    for (const x of [left, right]) {
      const cap = document.createElementNS("http://www.w3.org/2000/svg", "line");
      cap.setAttribute("x1", String(x));
      cap.setAttribute("x2", String(x));
      cap.setAttribute("y1", "3");
      cap.setAttribute("y2", "11");
      cap.setAttribute("class", "ci-cap");
      svg.appendChild(cap);
    }
  }
  const dot = document.createElementNS("http://www.w3.org/2000/svg", "circle");
  dot.setAttribute("cx", String(WHISKER_WIDTH / 2));
  dot.setAttribute("cy", "7");
  dot.setAttribute("r", "3");
  dot.setAttribute("class", "ci-mean");
  svg.appendChild(dot);
  return svg as unknown as HTMLElement;
}

function humanCell(score: HumanScore | undefined, best: boolean): HTMLElement {
  if (!score) return el("td", { className: "human-cell empty" }, "-");
  const d = score.display;
  return el(
    "td",
    { className: best ? "human-cell best" : "human-cell" },
    el(
      "span",
      { className: "score" },
      `${d.mean.toFixed(1)} +${d.plus.toFixed(1)}/-${d.minus.toFixed(1)}`,
    ),
    whisker(score),
  );
}

function metricCell(value: number | undefined, best: boolean): HTMLElement {
  if (value === undefined) return el("td", { className: "metric-cell empty" }, "-");
  return el(
    "td",
    { className: best ? "metric-cell best" : "metric-cell" },
    value.toFixed(1),
  );
}

function columnMax(values: Array<number | undefined>): number {
  return Math.max(...values.filter((v): v is number => v !== undefined));
}

export function renderLeaderboard(board: LeaderboardResponse): HTMLElement {
  const entries = board.entries;
  const aspects = unionKeys(entries.map((e) => e.human));
  const metrics = unionKeys(entries.map((e) => e.metrics));

  const aspectMax = new Map(
    aspects.map((a) => [a, columnMax(entries.map((e) => e.human[a]?.display.mean))]),
  );
  const metricMax = new Map(
    metrics.map((m) => [m, columnMax(entries.map((e) => e.metrics[m]?.corpus_score))]),
  );

  const header = el(
    "tr",
    {},
    el("th", {}, "#"),
    el("th", {}, "System"),
    ...aspects.map((a) => el("th", { "data-aspect": a }, `Human: ${a}`)),
    ...metrics.map((m) => el("th", { "data-metric": m }, m)),
  );

  const rows = entries.map((entry, rank) =>
    el(
      "tr",
      { "data-submission": entry.submission_id },
      el("td", { className: "rank" }, String(rank + 1)),
      el("td", { className: "system" }, entry.submitter),
      ...aspects.map((a) =>
        humanCell(entry.human[a], entry.human[a]?.display.mean === aspectMax.get(a)),
      ),
      ...metrics.map((m) =>
        metricCell(
          entry.metrics[m]?.corpus_score,
          entry.metrics[m]?.corpus_score === metricMax.get(m),
        ),
      ),
    ),
  );

  const pending = board.unscored.length
    ? el(
        "p",
        { className: "pending-note" },
        `${board.unscored.length} submission(s) awaiting human evaluation ` +
          "(automatic metrics only).",
      )
    : null;

  if (!entries.length && !board.unscored.length) {
    return el(
      "div",
      { className: "leaderboard empty-state" },
      el("p", {}, "No submissions yet for this task."),
    );
  }

  return el(
    "div",
    { className: "leaderboard" },
    el(
      "table",
      { className: "leaderboard-table", "data-sort-aspect": board.sort_aspect },
      el("thead", {}, header),
      el("tbody", {}, ...rows),
    ),
    pending,
  );
}

function unionKeys(records: Array<Record<string, unknown>>): string[] {
  const keys = new Set<string>();
  for (const record of records) for (const key of Object.keys(record)) keys.add(key);
  return [...keys];
}

export type { LeaderboardEntry };
