import { Difficulty, DIFFICULTY_LEVELS } from "./types";

const LEARNER_KEY = "studykit.learner_id";
const DIFFICULTY_KEY = "studykit.difficulty";

/**
 * Local-first session state. The learner id is a random UUID generated on
 * first mount and kept in browser storage; no cookies, nothing identifying.
 */
export class WidgetSession {
  readonly serviceUrl: string;
  readonly chapterId: string;
  private storage: Storage;

  constructor(serviceUrl: string, chapterId: string, storage: Storage) {
    this.serviceUrl = serviceUrl.replace(/\/+$/, "");
    this.chapterId = chapterId;
    this.storage = storage;
  }

  get learnerId(): string {
    let id = this.storage.getItem(LEARNER_KEY);
    if (!id) {
      id = generateId();
      this.storage.setItem(LEARNER_KEY, id);
    }
    return id;
  }

  get difficulty(): Difficulty {
    const stored = this.storage.getItem(DIFFICULTY_KEY);
    return DIFFICULTY_LEVELS.includes(stored as Difficulty)
      ? (stored as Difficulty)
      : "Beginner";
  }

  set difficulty(level: Difficulty) {
    this.storage.setItem(DIFFICULTY_KEY, level);
  }
}

function generateId(): string {
  const cryptoApi = globalThis.crypto;
  if (cryptoApi?.randomUUID) {
    return cryptoApi.randomUUID();
  }
  // Fallback for older environments: random hex, UUID-shaped.
  const hex = () => Math.floor(Math.random() * 16).toString(16);
  return "xxxxxxxx-xxxx-4xxx-yxxx-xxxxxxxxxxxx".replace(/[xy]/g, (c) =>
    c === "x" ? hex() : ((Math.floor(Math.random() * 4) + 8).toString(16)),
  );
}
