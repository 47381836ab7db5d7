import { describe, expect, it } from "vitest";

import { renderLeaderboard, whisker } from "../src/leaderboard.js";
import { ASYMMETRIC_BOARD, POINT_BOARD, WMT_BOARD } from "./fixtures.js";

describe("leaderboard table", () => {
  it("keeps the server's ranked order", () => {
    const view = renderLeaderboard(WMT_BOARD);
    const systems = [...view.querySelectorAll("td.system")].map((n) => n.textContent);
    expect(systems).toEqual(["FairSeq-large", "FAIR", "JHU", "FairSeq-base"]);
  });

  it("highlights the human column maximum", () => {
    const view = renderLeaderboard(WMT_BOARD);
    const rows = [...view.querySelectorAll("tbody tr")];
    const bestRows = rows.filter((r) => r.querySelector("td.human-cell.best"));
    expect(bestRows.length).toBe(1);
    expect(bestRows[0]!.querySelector("td.system")!.textContent).toBe("FairSeq-large");
  });

  it("highlights each metric column maximum", () => {
    const view = renderLeaderboard(WMT_BOARD);
    const headers = [...view.querySelectorAll("th[data-metric]")].map(
      (n) => n.getAttribute("data-metric")!,
    );
    const expectBest: Record<string, string> = {
      bertscore: "FAIR",
      rouge: "FairSeq-large",
      meteor: "FAIR",
      sacrebleu: "FAIR",
      bleurt: "FAIR",
    };
    const rows = [...view.querySelectorAll("tbody tr")];
    for (const [index, metric] of headers.entries()) {
      const bestSystems = rows
        .filter((r) => {
          const cells = r.querySelectorAll("td.metric-cell");
          return cells[index]?.classList.contains("best");
        })
        .map((r) => r.querySelector("td.system")!.textContent);
      expect(bestSystems, metric).toEqual([expectBest[metric]]);
    }
  });

  it("shows display values verbatim (no client-side recomputation)", () => {
    const view = renderLeaderboard(ASYMMETRIC_BOARD);
    const first = view.querySelector("td.human-cell .score")!;
    expect(first.textContent).toBe("66.0 +2.6/-2.5");
  });

  it("renders an empty state for an empty task", () => {
    const view = renderLeaderboard({
      task_id: "anlg",
      sort_aspect: "plausibility",
      entries: [],
      unscored: [],
    });
    expect(view.className).toContain("empty-state");
  });

  it("notes unscored submissions separately", () => {
    const board = {
      ...WMT_BOARD,
      unscored: [
        { ...WMT_BOARD.entries[0]!, submission_id: "sub-x", status: "annotating", human: {} },
      ],
    };
    const view = renderLeaderboard(board);
    expect(view.querySelector(".pending-note")!.textContent).toContain("1 submission");
  });
});

describe("confidence whiskers", () => {
  it("draws asymmetric arms from the fixture CI", () => {
    const score = ASYMMETRIC_BOARD.entries[0]!.human["satisfaction"]!;
    const svg = whisker(score);
    expect(svg.getAttribute("data-plus")).toBe("2.6");
    expect(svg.getAttribute("data-minus")).toBe("2.5");
    const bar = svg.querySelector(".ci-bar")!;
    const center = 60;
    const left = Number(bar.getAttribute("x1"));
    const right = Number(bar.getAttribute("x2"));
    expect(center - left).toBeCloseTo(25); // 2.5 points * 10 px
    expect(right - center).toBeCloseTo(26); // 2.6 points * 10 px
    expect(right - center).not.toBeCloseTo(center - left);
  });

  it("renders a bare point for a zero-width CI", () => {
    const score = POINT_BOARD.entries[0]!.human["satisfaction"]!;
    const svg = whisker(score);
    expect(svg.querySelector(".ci-bar")).toBeNull();
    expect(svg.querySelector(".ci-mean")).not.toBeNull();
  });
});
