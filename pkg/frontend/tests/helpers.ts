import { ProgressSnapshot, Quiz } from "../src/types";

export interface RecordedRequest {
  path: string;
  method: string;
  body: any;
}

export interface MockService {
  fetchImpl(input: string, init?: RequestInit): Promise<Response>;
  requests: RecordedRequest[];
  failAll: boolean;
}

export function fixtureQuiz(sectionId = "ch:s000"): Quiz {
  const answers = (correct: number) =>
    [0, 1, 2].map((i) => ({
      text: `Option ${i + 1}`,
      correct: i === correct,
      explanation: `Because option ${i + 1} ${i === correct ? "is" : "is not"} the definition.`,
    }));
  return {
    quiz_id: "quiz-fixture-1",
    section_id: sectionId,
    difficulty: "Beginner",
    questions: [
      { question: "First question?", answers: answers(0) },
      { question: "Second question?", answers: answers(1) },
      { question: "Third question?", answers: answers(2) },
    ],
  };
}

export function fixtureSnapshot(overrides: Partial<ProgressSnapshot> = {}): ProgressSnapshot {
  return {
    chapter_progress: { "ch-a": 0.5, "ch-b": 1.0 },
    streak_days: 3,
    passing_attempts: 7,
    badge_count: 2,
    heatmap: { "2026-03-01": 1, "2026-03-02": 5, "2026-02-27": 3 },
    ...overrides,
  };
}

/** In-memory stand-in for the studykit service, recording every request. */
export function mockService(): MockService {
  const service: MockService = {
    requests: [],
    failAll: false,
    async fetchImpl(input: string, init?: RequestInit): Promise<Response> {
      if (service.failAll) {
        throw new TypeError("fetch failed: connection refused");
      }
      const url = new URL(input, "http://service.test");
      const body = init?.body ? JSON.parse(String(init.body)) : null;
      service.requests.push({
        path: url.pathname,
        method: init?.method ?? "GET",
        body,
      });
      const respond = (payload: unknown, status = 200) =>
        new Response(JSON.stringify(payload), {
          status,
          headers: { "Content-Type": "application/json" },
        });

      if (url.pathname === "/quiz") {
        return respond({ quiz: fixtureQuiz(body.section_id), source: "generated" });
      }
      if (url.pathname === "/submit") {
        const quiz = fixtureQuiz();
        const correctness = (body.responses as number[]).map(
          (choice, q) => choice === quiz.questions[q].answers.findIndex((a) => a.correct),
        );
        const score = correctness.filter(Boolean).length / 3;
        return respond({
          result: {
            quiz_id: body.quiz_id,
            correctness,
            score,
            passed: score >= 2 / 3,
            timestamp: "2026-03-02T10:00:00+00:00",
            explanations: quiz.questions.map(
              (q, i) => q.answers[body.responses[i]].explanation,
            ),
          },
          progress: fixtureSnapshot({ passing_attempts: 8, badge_count: 2 }),
        });
      }
      if (url.pathname === "/feedback") {
        return respond({ quiz_id: body.quiz_id, vote: body.vote });
      }
      if (url.pathname === "/explain") {
        return respond({
          explanation: `About: ${body.highlight}`,
          sources: ["ch:s000:p000"],
          provider_id: "stub",
          difficulty: body.difficulty,
        });
      }
      if (url.pathname.startsWith("/progress/")) {
        return respond(fixtureSnapshot());
      }
      if (url.pathname.startsWith("/graph/")) {
        return respond({
          nodes: [
            { id: "ch", kind: "chapter", title: "Chapter" },
            { id: "ch:s000", kind: "section", title: "Intro", engaged: true, best_score: 1, pass_count: 1 },
          ],
          edges: [{ from: "ch", to: "ch:s000" }],
        });
      }
      return respond({ error: { code: "not-found", message: url.pathname } }, 404);
    },
  };
  return service;
}

export function fixturePage(): HTMLElement {
  document.body.innerHTML = `
    <article id="content">
      <h1>Efficient AI</h1>
      <p>Numeric precision trades accuracy for throughput.</p>
      <h2>Quantization</h2>
      <p>Post-training quantization rounds weights.</p>
      <h2>Pruning</h2>
      <p>Structured pruning removes whole channels.</p>
    </article>`;
  return document.getElementById("content") as HTMLElement;
}

export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
