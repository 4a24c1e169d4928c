"""Per-learner state: knowledge graph, quiz history, engagement features.

State is reconstructed by replaying an append-only JSON-lines journal per
learner, so a snapshot taken after replay is identical to one maintained
live. Learners are keyed by an opaque client-chosen id; no other personal
data exists. Dates are computed in the configured deployment time zone
(default UTC) so streaks and heatmaps are deterministic.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from pathlib import Path
from zoneinfo import ZoneInfo

from .errors import UnknownChapterError, UnknownSectionError
from .indexer import SectionIndex
from .quiz import DifficultyLevel, QuizResult

DEFAULT_BADGE_INTERVAL = 5
DEFAULT_REQUIRED_SECTIONS = 4
MISSED_QUESTION_CAP = 100


@dataclass
class KnowledgeNode:
    section_id: str
    chapter_id: str
    engaged: bool = False
    best_score: float = 0.0
    pass_count: int = 0
    attempt_count: int = 0
    missed_question_texts: list[str] = field(default_factory=list)


@dataclass
class LearnerState:
    learner_id: str
    difficulty_preference: DifficultyLevel = DifficultyLevel.BEGINNER
    nodes: dict[str, KnowledgeNode] = field(default_factory=dict)
    attempts: list[dict] = field(default_factory=list)
    daily_activity: dict[str, int] = field(default_factory=dict)  # ISO date -> count


@dataclass(frozen=True)
class GamificationSnapshot:
    chapter_progress: dict[str, float]
    streak_days: int
    passing_attempts: int
    badge_count: int
    heatmap: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "chapter_progress": dict(sorted(self.chapter_progress.items())),
            "streak_days": self.streak_days,
            "passing_attempts": self.passing_attempts,
            "badge_count": self.badge_count,
            "heatmap": dict(sorted(self.heatmap.items())),
        }


def attempt_date(timestamp: str, tz: str = "UTC") -> date:
    moment = datetime.fromisoformat(timestamp)
    if moment.tzinfo is not None:
        moment = moment.astimezone(ZoneInfo(tz))
    return moment.date()


def record_attempt(
    state: LearnerState,
    section_id: str,
    chapter_id: str,
    result: QuizResult,
    missed: list[str],
    tz: str = "UTC",
) -> None:
    """Fold one graded quiz into the knowledge graph and activity counts."""
    node = state.nodes.get(section_id)
    if node is None:
        node = KnowledgeNode(section_id=section_id, chapter_id=chapter_id)
        state.nodes[section_id] = node
    node.engaged = True
    node.attempt_count += 1
    node.best_score = max(node.best_score, result.score)
    if result.passed:
        node.pass_count += 1
    node.missed_question_texts.extend(missed)
    del node.missed_question_texts[:-MISSED_QUESTION_CAP]

    state.attempts.append(
        {"section_id": section_id, "chapter_id": chapter_id, **result.to_dict()}
    )
    day = attempt_date(result.timestamp, tz).isoformat()
    state.daily_activity[day] = state.daily_activity.get(day, 0) + 1


def compute_streak(daily_activity: dict[str, int], today: date) -> int:
    """Consecutive active days ending at today, or at yesterday as grace.

    A streak anchored at yesterday survives until midnight even when today
    has no activity yet.
    """
    active = {d for d, count in daily_activity.items() if count >= 1}
    anchor = today.isoformat()
    if anchor not in active:
        anchor = (today - timedelta(days=1)).isoformat()
        if anchor not in active:
            return 0
    streak = 0
    day = date.fromisoformat(anchor)
    while day.isoformat() in active:
        streak += 1
        day -= timedelta(days=1)
    return streak


def award_badges(passing_attempts: int, c: int = DEFAULT_BADGE_INTERVAL) -> int:
    """One badge per ``c`` passing attempts."""
    if c < 1:
        raise ValueError("badge interval c must be >= 1")
    if passing_attempts < 0:
        raise ValueError("passing_attempts must be nonnegative")
    return passing_attempts // c


def chapter_progress(
    state: LearnerState,
    chapter_id: str,
    required_sections: int,
    pass_threshold: float,
    known_chapters: set[str] | None = None,
) -> float:
    """Fraction of the required sections passed in a chapter, capped at 1."""
    if required_sections < 1:
        raise ValueError("required_sections must be positive")
    if known_chapters is not None and chapter_id not in known_chapters:
        raise UnknownChapterError(f"chapter {chapter_id!r} is not in the corpus")
    passed = sum(
        1
        for node in state.nodes.values()
        if node.chapter_id == chapter_id and node.best_score >= pass_threshold
    )
    return min(1.0, passed / required_sections)


def gamification_snapshot(
    state: LearnerState,
    corpus: list[SectionIndex],
    today: date,
    required_sections: int = DEFAULT_REQUIRED_SECTIONS,
    pass_threshold: float = 2 / 3,
    badge_interval: int = DEFAULT_BADGE_INTERVAL,
) -> GamificationSnapshot:
    passing = sum(1 for a in state.attempts if a["passed"])
    progress = {
        index.chapter_id: chapter_progress(
            state, index.chapter_id, required_sections, pass_threshold
        )
        for index in corpus
    }
    return GamificationSnapshot(
        chapter_progress=progress,
        streak_days=compute_streak(state.daily_activity, today),
        passing_attempts=passing,
        badge_count=award_badges(passing, badge_interval),
        heatmap=dict(state.daily_activity),
    )


def graph_snapshot(state: LearnerState, corpus: list[SectionIndex]) -> dict:
    """Chapter/section graph annotated with the learner's progress."""
    nodes = []
    edges = []
    for index in corpus:
        nodes.append(
            {"id": index.chapter_id, "kind": "chapter", "title": index.chapter_title}
        )
        for section in index.sections:
            annotation = state.nodes.get(section.section_id)
            nodes.append(
                {
                    "id": section.section_id,
                    "kind": "section",
                    "title": section.title,
                    "engaged": annotation.engaged if annotation else False,
                    "best_score": annotation.best_score if annotation else None,
                    "pass_count": annotation.pass_count if annotation else 0,
                }
            )
            edges.append({"from": index.chapter_id, "to": section.section_id})
    return {"nodes": nodes, "edges": edges}


def _journal_name(learner_id: str) -> str:
    slug = re.sub(r"[^A-Za-z0-9._-]+", "_", learner_id)[:48]
    digest = hashlib.sha1(learner_id.encode("utf-8")).hexdigest()[:8]
    return f"{slug}-{digest}.jsonl"


class LearnerStore:
    """Journal-backed learner states; single writer per learner id."""

    def __init__(self, data_dir: str | Path, corpus: list[SectionIndex], tz: str = "UTC"):
        self.dir = Path(data_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.corpus = corpus
        self.tz = tz
        self._sections = {
            s.section_id: index.chapter_id
            for index in corpus
            for s in index.sections
        }
        self._states: dict[str, LearnerState] = {}

    def chapter_of(self, section_id: str) -> str:
        if section_id not in self._sections:
            raise UnknownSectionError(f"section {section_id!r} is not in the corpus")
        return self._sections[section_id]

    def state(self, learner_id: str) -> LearnerState:
        if learner_id not in self._states:
            self._states[learner_id] = self._replay(learner_id)
        return self._states[learner_id]

    def _journal_path(self, learner_id: str) -> Path:
        return self.dir / _journal_name(learner_id)

    def _replay(self, learner_id: str) -> LearnerState:
        state = LearnerState(learner_id=learner_id)
        path = self._journal_path(learner_id)
        if not path.exists():
            return state
        with path.open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    self._apply(state, json.loads(line))
        return state

    def _apply(self, state: LearnerState, event: dict) -> None:
        if event["event"] == "attempt":
            result = QuizResult(
                quiz_id=event["result"]["quiz_id"],
                correctness=tuple(event["result"]["correctness"]),
                score=event["result"]["score"],
                passed=event["result"]["passed"],
                timestamp=event["result"]["timestamp"],
            )
            record_attempt(
                state,
                event["section_id"],
                event["chapter_id"],
                result,
                event["missed"],
                tz=self.tz,
            )
        elif event["event"] == "preference":
            state.difficulty_preference = DifficultyLevel(event["difficulty"])

    def _append(self, learner_id: str, event: dict) -> None:
        with self._journal_path(learner_id).open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True, separators=(",", ":")) + "\n")

    def record_attempt(
        self, learner_id: str, section_id: str, result: QuizResult, missed: list[str]
    ) -> LearnerState:
        chapter_id = self.chapter_of(section_id)
        state = self.state(learner_id)
        record_attempt(state, section_id, chapter_id, result, missed, tz=self.tz)
        self._append(
            learner_id,
            {
                "event": "attempt",
                "section_id": section_id,
                "chapter_id": chapter_id,
                "result": result.to_dict(),
                "missed": missed,
            },
        )
        return state

    def set_preference(self, learner_id: str, difficulty: DifficultyLevel) -> None:
        state = self.state(learner_id)
        state.difficulty_preference = difficulty
        self._append(
            learner_id, {"event": "preference", "difficulty": difficulty.value}
        )
