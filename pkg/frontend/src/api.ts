import type {
  LabelAck,
  LabelSelection,
  LeaderboardResponse,
  NextAssignmentResponse,
  TaskInfo,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function asJson<T>(res: Response): Promise<T> {
  if (!res.ok) {
    let detail = res.statusText;
    try {
      const body = await res.json();
      detail = body.detail ?? detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(res.status, detail);
  }
  return res.json() as Promise<T>;
}

export class ApiClient {
  constructor(private base: string = "") {}

  async listTasks(): Promise<TaskInfo[]> {
    const body = await asJson<{ tasks: TaskInfo[] }>(
      await fetch(`${this.base}/tasks`),
    );
    return body.tasks;
  }

  async getTask(taskId: string): Promise<TaskInfo> {
    return asJson(await fetch(`${this.base}/tasks/${taskId}`));
  }

  async nextAssignment(annotatorId: string): Promise<NextAssignmentResponse> {
    return asJson(
      await fetch(`${this.base}/annotators/${encodeURIComponent(annotatorId)}/next`),
    );
  }

  /** Idempotent on the server: retrying the same assignment stores nothing new. */
  async submitLabel(
    assignmentId: string,
    annotatorId: string,
    labels: LabelSelection,
  ): Promise<LabelAck> {
    return asJson(
      await fetch(`${this.base}/assignments/${encodeURIComponent(assignmentId)}/label`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ annotator_id: annotatorId, labels }),
      }),
    );
  }

  async leaderboard(
    taskId: string,
    sortAspect?: string,
  ): Promise<LeaderboardResponse> {
    const query = sortAspect ? `?sort_aspect=${encodeURIComponent(sortAspect)}` : "";
    return asJson(await fetch(`${this.base}/tasks/${taskId}/leaderboard${query}`));
  }
}
