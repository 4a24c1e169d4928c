import { ServiceClient, ServiceError, FetchLike } from "./client";
import { renderDashboard } from "./dashboard";
import { renderQuiz } from "./quizView";
import { WidgetSession } from "./session";
import { Difficulty, DIFFICULTY_LEVELS } from "./types";

const TRIGGER_ATTR = "data-sk-trigger";
const MOUNT_ATTR = "data-sk-mounted";

const PANEL_CSS = `
:host { all: initial; }
.sk-panel {
  position: fixed; right: 16px; bottom: 16px; width: 340px; max-height: 70vh;
  overflow-y: auto; background: #ffffff; color: #1c1c1c; border: 1px solid #c9c9c9;
  border-radius: 8px; padding: 12px; font: 14px/1.45 system-ui, sans-serif;
  box-shadow: 0 4px 14px rgba(0,0,0,.18); z-index: 2147483000;
}
.sk-banner { background: #fff3cd; border: 1px solid #ffe69c; padding: 6px 8px;
  border-radius: 4px; margin-bottom: 8px; }
.sk-pass { color: #1a7f37; font-weight: 600; }
.sk-fail { color: #b54708; font-weight: 600; }
.sk-heatmap-cell { display: inline-block; width: 10px; height: 10px; margin: 1px;
  background: #216e39; border-radius: 2px; }
.sk-progress-track { background: #eee; height: 8px; border-radius: 4px; }
.sk-progress-fill { background: #2f7d32; height: 8px; border-radius: 4px; }
.sk-badge { font-size: 18px; color: #b8860b; margin-right: 2px; }
.sk-question { border: 1px solid #e2e2e2; border-radius: 6px; margin: 8px 0; }
.sk-answer { display: block; margin: 2px 0; }
`;

export interface MountOptions {
  serviceUrl: string;
  chapterId: string;
  root?: HTMLElement;
  storage?: Storage;
  fetchImpl?: FetchLike;
}

export interface WidgetHandle {
  session: WidgetSession;
  client: ServiceClient;
  panel: HTMLElement;
  shadowRoot: ShadowRoot;
  triggers: HTMLButtonElement[];
  refreshDashboard(): Promise<void>;
  unmount(): void;
}

/**
 * Mounts the companion into a host page: one quiz trigger after each
 * heading-delimited section, a text-selection explain flow, and a panel
 * (slider, quiz area, dashboard) rendered inside an isolated shadow root so
 * host styles and widget styles never interact. Mounting twice is a no-op
 * for triggers; the page stays readable even when the service is down.
 */
export function mount(options: MountOptions): WidgetHandle {
  const root = options.root ?? document.body;
  const doc = root.ownerDocument;
  const storage = options.storage ?? doc.defaultView!.localStorage;
  const session = new WidgetSession(options.serviceUrl, options.chapterId, storage);
  const client = new ServiceClient(session, options.fetchImpl);

  const host = doc.createElement("div");
  host.setAttribute("data-sk-panel-host", "");
  const shadowRoot = host.attachShadow({ mode: "open" });
  const style = doc.createElement("style");
  style.textContent = PANEL_CSS;
  shadowRoot.appendChild(style);

  const panel = doc.createElement("div");
  panel.className = "sk-panel";
  shadowRoot.appendChild(panel);

  const banner = doc.createElement("div");
  banner.className = "sk-banner";
  banner.hidden = true;
  panel.appendChild(banner);

  panel.appendChild(buildSlider(doc, session));

  const explainArea = doc.createElement("div");
  explainArea.className = "sk-explain";
  panel.appendChild(explainArea);

  const quizArea = doc.createElement("div");
  quizArea.className = "sk-quiz-area";
  panel.appendChild(quizArea);

  const dashboardArea = doc.createElement("div");
  dashboardArea.className = "sk-dashboard";
  panel.appendChild(dashboardArea);

  function showBanner(message: string): void {
    banner.textContent = message;
    banner.hidden = false;
  }

  function serviceFailed(err: unknown): void {
    const message =
      err instanceof ServiceError && err.code !== "service-unreachable"
        ? `Companion error: ${err.message}`
        : "Learning companion can't reach its service; the page stays readable.";
    showBanner(message);
  }

  const hooks = {
    async submit(quizId: string, responses: number[]) {
      const graded = await client.submit(quizId, responses);
      renderDashboard(dashboardArea, graded.progress);
      return graded;
    },
    feedback: (quizId: string, vote: "Up" | "Down") => client.feedback(quizId, vote),
    regenerate: (sectionId: string) => requestQuiz(sectionId),
  };

  const pending = new Set<string>();

  async function requestQuiz(sectionId: string): Promise<void> {
    if (pending.has(sectionId)) {
      return; // at most one in-flight generation per section
    }
    pending.add(sectionId);
    const trigger = triggers.find((t) => t.dataset.sectionId === sectionId);
    if (trigger) trigger.disabled = true;
    try {
      banner.hidden = true;
      const envelope = await client.quiz(sectionId);
      renderQuiz(quizArea, envelope.quiz, hooks);
    } catch (err) {
      serviceFailed(err);
    } finally {
      pending.delete(sectionId);
      if (trigger) trigger.disabled = false;
    }
  }

  // One trigger per heading-delimited section, positioned after the section
  // content (before the next heading), matching the indexed section order.
  const triggers: HTMLButtonElement[] = [];
  const headings = Array.from(
    root.querySelectorAll<HTMLElement>("h1, h2, h3, h4, h5, h6"),
  ).filter((h) => !h.hasAttribute(TRIGGER_ATTR));
  const alreadyMounted = root.hasAttribute(MOUNT_ATTR);
  if (alreadyMounted) {
    triggers.push(...root.querySelectorAll<HTMLButtonElement>(`[${TRIGGER_ATTR}]`));
  }
  if (!alreadyMounted) {
    root.setAttribute(MOUNT_ATTR, "");
    const targets = headings.length > 0 ? headings : [null];
    targets.forEach((heading, index) => {
      const sectionId = `${options.chapterId}:s${String(index).padStart(3, "0")}`;
      const button = doc.createElement("button");
      button.setAttribute(TRIGGER_ATTR, "");
      button.type = "button";
      button.dataset.sectionId = sectionId;
      button.textContent = heading
        ? `Quiz me on "${heading.textContent ?? sectionId}"`
        : "Quiz me on this page";
      button.addEventListener("click", () => void requestQuiz(sectionId));
      const next = heading ? nextHeading(heading) : null;
      if (next && next.parentNode) {
        next.parentNode.insertBefore(button, next);
      } else {
        root.appendChild(button);
      }
      triggers.push(button);
    });

    doc.addEventListener("mouseup", onSelection);
    doc.body.appendChild(host);
  }

  function nextHeading(from: HTMLElement): HTMLElement | null {
    const all = Array.from(root.querySelectorAll<HTMLElement>("h1, h2, h3, h4, h5, h6"));
    const index = all.indexOf(from);
    return index >= 0 && index + 1 < all.length ? all[index + 1] : null;
  }

  function onSelection(): void {
    const selection = doc.getSelection?.();
    const text = selection?.toString().trim();
    if (!text || text.length < 3) {
      return;
    }
    explainArea.textContent = "";
    const ask = doc.createElement("button");
    ask.type = "button";
    ask.className = "sk-explain-ask";
    ask.textContent = `Explain "${text.slice(0, 40)}${text.length > 40 ? "…" : ""}"`;
    ask.addEventListener("click", async () => {
      ask.disabled = true;
      try {
        const reply = await client.explain(text);
        const out = doc.createElement("div");
        const body = doc.createElement("p");
        body.textContent = reply.explanation;
        out.appendChild(body);
        if (reply.sources.length > 0) {
          const cite = doc.createElement("p");
          cite.className = "sk-sources";
          cite.textContent = `Sources: ${reply.sources.join(", ")}`;
          out.appendChild(cite);
        }
        explainArea.textContent = "";
        explainArea.appendChild(out);
      } catch (err) {
        serviceFailed(err);
      } finally {
        ask.disabled = false;
      }
    });
    explainArea.appendChild(ask);
  }

  async function refreshDashboard(): Promise<void> {
    try {
      renderDashboard(dashboardArea, await client.progress());
    } catch (err) {
      serviceFailed(err);
    }
  }

  function unmount(): void {
    triggers.forEach((t) => t.remove());
    doc.removeEventListener("mouseup", onSelection);
    host.remove();
    root.removeAttribute(MOUNT_ATTR);
  }

  return { session, client, panel, shadowRoot, triggers, refreshDashboard, unmount };
}

function buildSlider(doc: Document, session: WidgetSession): HTMLElement {
  const wrap = doc.createElement("label");
  wrap.className = "sk-slider";
  const caption = doc.createElement("span");
  caption.textContent = `Level: ${session.difficulty}`;
  const slider = doc.createElement("input");
  slider.type = "range";
  slider.min = "0";
  slider.max = String(DIFFICULTY_LEVELS.length - 1);
  slider.step = "1";
  slider.value = String(DIFFICULTY_LEVELS.indexOf(session.difficulty));
  slider.addEventListener("input", () => {
    const level = DIFFICULTY_LEVELS[Number(slider.value)] as Difficulty;
    session.difficulty = level;
    caption.textContent = `Level: ${level}`;
  });
  wrap.appendChild(caption);
  wrap.appendChild(slider);
  return wrap;
}
