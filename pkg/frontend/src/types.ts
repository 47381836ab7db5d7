// Wire types mirroring the service's JSON responses.

export interface SchemeInfo {
  kind: "likert5" | "binary";
  category_labels: string[];
}

export interface AspectInfo {
  name: string;
  question: string;
}

export interface TaskInfo {
  task_id: string;
  name: string;
  elicitation: SchemeInfo;
  aspects: AspectInfo[];
  eval_sample_size: number;
  per_instance_cost: number;
  paired_with_gold: boolean;
  blind_permutation: boolean;
  instructions: string;
  prompt_template: string;
}

export interface AssignmentTask {
  task_id: string;
  name: string;
  instructions: string;
  scheme: SchemeInfo;
  aspects: AspectInfo[];
  paired: boolean;
}

export interface Assignment {
  assignment_id: string;
  instance_id: string;
  prompt: string;
  candidates: string[];
  inputs: Record<string, string>;
  batch_id: string;
  lease_expires_at: string;
  task: AssignmentTask;
}

export interface NextAssignmentResponse {
  done: boolean;
  assignment?: Assignment;
}

export interface DisplayScore {
  mean: number;
  plus: number;
  minus: number;
}

export interface HumanScore {
  mean: number;
  n: number;
  ci_low: number;
  ci_high: number;
  level: number;
  method: string;
  seed: number | null;
  display: DisplayScore;
}

export interface MetricCell {
  metric_name: string;
  corpus_score: number;
  config_fingerprint: string;
}

export interface LeaderboardEntry {
  submission_id: string;
  submitter: string;
  task_id: string;
  created_at: string;
  status: string;
  human: Record<string, HumanScore>;
  metrics: Record<string, MetricCell>;
  window: [string, string] | null;
}

export interface LeaderboardResponse {
  task_id: string;
  sort_aspect: string;
  entries: LeaderboardEntry[];
  unscored: LeaderboardEntry[];
}

// aspect -> selected category index (one per candidate panel)
export type LabelSelection = Record<string, number[]>;

export interface LabelAck {
  recorded: number;
  assignment_id: string;
}
