import { GraphDocument, ProgressSnapshot } from "./types";

/**
 * Progress dashboard: per-chapter progress bars, streak counter, badge
 * gallery, and a contribution-style heatmap whose cell intensity grows
 * monotonically with the day's activity count.
 */
export function renderDashboard(container: HTMLElement, snapshot: ProgressSnapshot): void {
  const doc = container.ownerDocument;
  container.textContent = "";

  const bars = doc.createElement("div");
  bars.className = "sk-progress-bars";
  const chapters = Object.keys(snapshot.chapter_progress).sort();
  if (chapters.length === 0) {
    const empty = doc.createElement("p");
    empty.className = "sk-empty";
    empty.textContent = "No chapters tracked yet.";
    bars.appendChild(empty);
  }
  for (const chapter of chapters) {
    const value = snapshot.chapter_progress[chapter];
    const row = doc.createElement("div");
    row.className = "sk-progress-row";
    const label = doc.createElement("span");
    label.textContent = chapter;
    const track = doc.createElement("div");
    track.className = "sk-progress-track";
    const fill = doc.createElement("div");
    fill.className = "sk-progress-fill";
    fill.style.width = `${Math.round(value * 100)}%`;
    fill.dataset.value = value.toFixed(3);
    track.appendChild(fill);
    row.appendChild(label);
    row.appendChild(track);
    bars.appendChild(row);
  }
  container.appendChild(bars);

  const streak = doc.createElement("p");
  streak.className = "sk-streak";
  streak.dataset.days = String(snapshot.streak_days);
  streak.textContent =
    snapshot.streak_days === 1
      ? "1 day streak"
      : `${snapshot.streak_days} day streak`;
  container.appendChild(streak);

  const badges = doc.createElement("div");
  badges.className = "sk-badges";
  for (let i = 0; i < snapshot.badge_count; i++) {
    const badge = doc.createElement("span");
    badge.className = "sk-badge";
    badge.title = `Badge ${i + 1}`;
    badge.textContent = "★";
    badges.appendChild(badge);
  }
  container.appendChild(badges);

  container.appendChild(renderHeatmap(doc, snapshot.heatmap));
}

function renderHeatmap(doc: Document, heatmap: Record<string, number>): HTMLElement {
  const grid = doc.createElement("div");
  grid.className = "sk-heatmap";
  const days = Object.keys(heatmap).sort();
  const max = Math.max(1, ...days.map((d) => heatmap[d]));
  for (const day of days) {
    const count = heatmap[day];
    const cell = doc.createElement("span");
    cell.className = "sk-heatmap-cell";
    cell.dataset.date = day;
    cell.dataset.count = String(count);
    // Intensity strictly monotone in count: darker squares, more activity.
    const intensity = count / max;
    cell.style.opacity = (0.25 + 0.75 * intensity).toFixed(4);
    cell.title = `${day}: ${count}`;
    grid.appendChild(cell);
  }
  if (days.length === 0) {
    const empty = doc.createElement("span");
    empty.className = "sk-empty";
    empty.textContent = "No activity yet.";
    grid.appendChild(empty);
  }
  return grid;
}

/** Collapsible chapter -> section tree annotated with learner progress. */
export function renderGraph(container: HTMLElement, graph: GraphDocument): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  const byChapter = new Map<string, string[]>();
  for (const edge of graph.edges) {
    const list = byChapter.get(edge.from) ?? [];
    list.push(edge.to);
    byChapter.set(edge.from, list);
  }
  const titles = new Map(graph.nodes.map((n) => [n.id, n] as const));
  for (const node of graph.nodes.filter((n) => n.kind === "chapter")) {
    const details = doc.createElement("details");
    details.className = "sk-graph-chapter";
    const summary = doc.createElement("summary");
    summary.textContent = node.title;
    details.appendChild(summary);
    const list = doc.createElement("ul");
    for (const sectionId of byChapter.get(node.id) ?? []) {
      const section = titles.get(sectionId);
      const item = doc.createElement("li");
      item.dataset.engaged = String(section?.engaged ?? false);
      const score = section?.best_score;
      item.textContent =
        section?.title + (score != null ? ` (best ${Math.round(score * 100)}%)` : "");
      list.appendChild(item);
    }
    details.appendChild(list);
    container.appendChild(details);
  }
}
