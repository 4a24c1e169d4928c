import {
  ExplainResponse,
  GraphDocument,
  ProgressSnapshot,
  QuizEnvelope,
  SubmitResponse,
} from "./types";
import { WidgetSession } from "./session";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  constructor(
    message: string,
    readonly code: string = "service-unreachable",
    readonly status?: number,
  ) {
    super(message);
  }
}

/** Thin JSON client over the documented service endpoints. */
export class ServiceClient {
  constructor(
    private session: WidgetSession,
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.session.serviceUrl}${path}`, init);
    } catch (err) {
      throw new ServiceError(`service unreachable: ${String(err)}`);
    }
    let body: any = null;
    try {
      body = await response.json();
    } catch {
      // fall through; handled below by status
    }
    if (!response.ok) {
      const code = body?.error?.code ?? "service-error";
      const message = body?.error?.message ?? `HTTP ${response.status}`;
      throw new ServiceError(message, code, response.status);
    }
    return body as T;
  }

  explain(highlight: string): Promise<ExplainResponse> {
    return this.post("/explain", {
      highlight,
      chapter_id: this.session.chapterId,
      difficulty: this.session.difficulty,
      learner_id: this.session.learnerId,
    });
  }

  quiz(sectionId: string): Promise<QuizEnvelope> {
    return this.post("/quiz", {
      section_id: sectionId,
      learner_id: this.session.learnerId,
      difficulty: this.session.difficulty,
    });
  }

  submit(quizId: string, responses: number[]): Promise<SubmitResponse> {
    return this.post("/submit", {
      quiz_id: quizId,
      responses,
      learner_id: this.session.learnerId,
    });
  }

  feedback(quizId: string, vote: "Up" | "Down"): Promise<void> {
    return this.post("/feedback", { quiz_id: quizId, vote });
  }

  progress(): Promise<ProgressSnapshot> {
    return this.request(`/progress/${encodeURIComponent(this.session.learnerId)}`);
  }

  graph(): Promise<GraphDocument> {
    return this.request(`/graph/${encodeURIComponent(this.session.learnerId)}`);
  }
}
