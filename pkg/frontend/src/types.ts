export type Difficulty = "Beginner" | "Intermediate" | "Advanced" | "Expert";

export const DIFFICULTY_LEVELS: Difficulty[] = [
  "Beginner",
  "Intermediate",
  "Advanced",
  "Expert",
];

export interface AnswerOption {
  text: string;
  correct: boolean;
  explanation: string;
}

export interface QuizQuestion {
  question: string;
  answers: AnswerOption[];
}

export interface Quiz {
  quiz_id: string;
  section_id: string;
  difficulty: Difficulty;
  questions: QuizQuestion[];
}

export interface QuizEnvelope {
  quiz: Quiz;
  source: "cache" | "generated";
}

export interface SubmitResponse {
  result: {
    quiz_id: string;
    correctness: boolean[];
    score: number;
    passed: boolean;
    timestamp: string;
    explanations: string[];
  };
  progress: ProgressSnapshot;
}

export interface ProgressSnapshot {
  chapter_progress: Record<string, number>;
  streak_days: number;
  passing_attempts: number;
  badge_count: number;
  heatmap: Record<string, number>;
}

export interface ExplainResponse {
  explanation: string;
  sources: string[];
  provider_id: string;
  difficulty: Difficulty;
}

export interface GraphDocument {
  nodes: Array<{
    id: string;
    kind: "chapter" | "section";
    title: string;
    engaged?: boolean;
    best_score?: number | null;
    pass_count?: number;
  }>;
  edges: Array<{ from: string; to: string }>;
}
