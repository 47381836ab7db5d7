// Fixtures mirroring the service's JSON payloads (tasks config, assignment
// payloads, leaderboard responses).

import type {
  Assignment,
  HumanScore,
  LeaderboardEntry,
  LeaderboardResponse,
  TaskInfo,
} from "../src/types.js";

const LIKERT = {
  kind: "likert5" as const,
  category_labels: ["strongly-disagree", "disagree", "neutral", "agree", "strongly-agree"],
};

export const TASKS: Record<string, TaskInfo> = {
  arc_da: {
    task_id: "arc_da",
    name: "ARC-DA (Question Answering)",
    elicitation: LIKERT,
    aspects: [{ name: "satisfaction", question: "I am satisfied with this answer." }],
    eval_sample_size: 800,
    per_instance_cost: 0.1,
    paired_with_gold: false,
    blind_permutation: false,
    instructions: "Rate how satisfied you are with the candidate answer.",
    prompt_template: "Question: {question}\n\nAnswer: {candidate}\n",
  },
  anlg: {
    task_id: "anlg",
    name: "aNLG (Commonsense Reasoning)",
    elicitation: LIKERT,
    aspects: [{ name: "plausibility", question: "The explanation is plausible." }],
    eval_sample_size: 800,
    per_instance_cost: 0.1,
    paired_with_gold: false,
    blind_permutation: false,
    instructions: "Rate how plausible the explanation is.",
    prompt_template:
      "Observation 1: {observation_1}\nObservation 2: {observation_2}\n\nExplanation: {candidate}\n",
  },
  wmt19_de_en: {
    task_id: "wmt19_de_en",
    name: "WMT19 DE-EN (Machine Translation)",
    elicitation: LIKERT,
    aspects: [{ name: "adequacy", question: "The translation is adequate." }],
    eval_sample_size: 800,
    per_instance_cost: 0.1,
    paired_with_gold: false,
    blind_permutation: false,
    instructions: "Rate translation adequacy against the reference.",
    prompt_template:
      "Source (German): {source}\nReference translation: {reference}\n\nCandidate translation: {candidate}\n",
  },
  xsum: {
    task_id: "xsum",
    name: "XSUM (Summarization)",
    elicitation: LIKERT,
    aspects: [
      { name: "overall", question: "Overall, this is a good summary." },
      { name: "conciseness", question: "The summary is concise." },
      { name: "fluency", question: "The summary is fluent." },
      { name: "no-hallucination", question: "No hallucinated content." },
      { name: "informativeness", question: "The summary is informative." },
    ],
    eval_sample_size: 300,
    per_instance_cost: 0.3,
    paired_with_gold: true,
    blind_permutation: true,
    instructions: "Rate each of the two summaries on every aspect.",
    prompt_template: "Article: {article}\n\nSummary A: {candidate_a}\nSummary B: {candidate_b}\n",
  },
};

const TASK_INPUTS: Record<string, Record<string, string>> = {
  arc_da: { question: "Why does ice float on water?" },
  anlg: {
    observation_1: "The driveway was empty in the morning.",
    observation_2: "By noon a moving truck blocked it.",
  },
  wmt19_de_en: {
    source: "Der Fluss ist heute ruhig.",
    reference: "The river is calm today.",
  },
  xsum: { article: "A long news article about a reservoir reopening after repairs." },
};

export function makeAssignment(taskId: string, candidates: string[]): Assignment {
  const task = TASKS[taskId]!;
  return {
    assignment_id: `sub-000001:${taskId}-t00000:0`,
    instance_id: `${taskId}-t00000`,
    prompt: "rendered prompt text",
    candidates,
    inputs: TASK_INPUTS[taskId]!,
    batch_id: "sub-000001:b0000",
    lease_expires_at: "2021-03-01T19:00:00+00:00",
    task: {
      task_id: task.task_id,
      name: task.name,
      instructions: task.instructions,
      scheme: task.elicitation,
      aspects: task.aspects,
      paired: task.paired_with_gold,
    },
  };
}

function human(mean: number, plus: number, minus: number, n = 800): HumanScore {
  return {
    mean: mean / 100,
    n,
    ci_low: (mean - minus) / 100,
    ci_high: (mean + plus) / 100,
    level: 0.95,
    method: "percentile_bootstrap",
    seed: null,
    display: { mean, plus, minus },
  };
}

function entry(
  submitter: string,
  aspect: string,
  score: HumanScore,
  metrics: Record<string, number>,
): LeaderboardEntry {
  return {
    submission_id: `fixture-${submitter}`,
    submitter,
    task_id: "wmt19_de_en",
    created_at: "2021-01-04T18:00:00+00:00",
    status: "scored",
    human: { [aspect]: score },
    metrics: Object.fromEntries(
      Object.entries(metrics).map(([name, corpus_score]) => [
        name,
        { metric_name: name, corpus_score, config_fingerprint: "fixture" },
      ]),
    ),
    window: null,
  };
}

export const WMT_BOARD: LeaderboardResponse = {
  task_id: "wmt19_de_en",
  sort_aspect: "adequacy",
  entries: [
    entry("FairSeq-large", "adequacy", human(70.6, 2.1, 2.1), {
      bertscore: 95.1, rouge: 66.3, meteor: 63.1, sacrebleu: 40.7, bleurt: 26.3,
    }),
    entry("FAIR", "adequacy", human(69.8, 2.2, 2.2), {
      bertscore: 95.3, rouge: 66.0, meteor: 63.4, sacrebleu: 40.8, bleurt: 32.2,
    }),
    entry("JHU", "adequacy", human(66.0, 2.2, 2.2), {
      bertscore: 95.0, rouge: 64.5, meteor: 61.5, sacrebleu: 38.1, bleurt: 25.7,
    }),
    entry("FairSeq-base", "adequacy", human(65.0, 2.3, 2.3), {
      bertscore: 94.7, rouge: 64.9, meteor: 61.3, sacrebleu: 38.6, bleurt: 16.8,
    }),
  ],
  unscored: [],
};

export const ASYMMETRIC_BOARD: LeaderboardResponse = {
  task_id: "arc_da",
  sort_aspect: "satisfaction",
  entries: [
    entry("T5-11B", "satisfaction", human(66.0, 2.6, 2.5), { bertscore: 92.4 }),
    entry("T5-3B", "satisfaction", human(60.9, 2.9, 3.0), { bertscore: 91.9 }),
  ],
  unscored: [],
};

export const POINT_BOARD: LeaderboardResponse = {
  task_id: "arc_da",
  sort_aspect: "satisfaction",
  entries: [entry("constant", "satisfaction", human(75.0, 0.0, 0.0), {})],
  unscored: [],
};
