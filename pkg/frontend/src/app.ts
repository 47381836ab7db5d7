// Entry point: hash routing between the observer (leaderboard) and
// annotator views, all state served by the crowdboard HTTP API.

import { AnnotationSession } from "./annotation.js";
import { ApiClient, ApiError } from "./api.js";
import { clear, el } from "./dom.js";
import { renderLeaderboard } from "./leaderboard.js";

const api = new ApiClient("");

type Route =
  | { page: "home" }
  | { page: "leaderboard"; taskId: string }
  | { page: "annotate"; annotatorId: string };

function parseRoute(): Route {
  const hash = location.hash.replace(/^#\/?/, "");
  const [head, ...rest] = hash.split("/");
  if (head === "leaderboard" && rest[0]) return { page: "leaderboard", taskId: rest[0] };
  if (head === "annotate" && rest[0]) return { page: "annotate", annotatorId: rest[0] };
  return { page: "home" };
}

async function renderHome(root: Element): Promise<void> {
  const tasks = await api.listTasks();
  root.appendChild(
    el(
      "div",
      { className: "home" },
      el("h1", {}, "Evaluation leaderboards"),
      el(
        "ul",
        { className: "task-list" },
        ...tasks.map((task) =>
          el(
            "li",
            {},
            el("a", { href: `#/leaderboard/${task.task_id}` }, task.name),
            el(
              "span",
              { className: "task-meta" },
              ` ${task.aspects.length} aspect(s), n=${task.eval_sample_size}`,
            ),
          ),
        ),
      ),
      el(
        "p",
        { className: "annotate-hint" },
        "Annotators: open #/annotate/<your-id> to start working.",
      ),
    ),
  );
}

async function renderBoard(root: Element, taskId: string): Promise<void> {
  const board = await api.leaderboard(taskId);
  root.appendChild(el("h1", {}, `Leaderboard: ${taskId}`));
  root.appendChild(renderLeaderboard(board));
}

async function route(): Promise<void> {
  const root = document.querySelector("#app");
  if (!root) return;
  clear(root);
  const current = parseRoute();
  try {
    if (current.page === "home") await renderHome(root);
    else if (current.page === "leaderboard") await renderBoard(root, current.taskId);
    else {
      const session = new AnnotationSession(api, current.annotatorId, root);
      await session.showNext();
    }
  } catch (err) {
    clear(root);
    const message = err instanceof ApiError ? err.detail : String(err);
    root.appendChild(el("div", { className: "notice error" }, message));
  }
}

window.addEventListener("hashchange", () => void route());
window.addEventListener("DOMContentLoaded", () => void route());
