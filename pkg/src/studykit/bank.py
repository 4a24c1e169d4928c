"""Per-section quiz repositories with the cache-and-reuse serving policy.

A section starts in Generate mode. Once ten quizzes have ever been generated
for it, serving mixes cached and fresh quizzes 50/50; once the stored pool
reaches the configured threshold n, serving is cache-only (least recently
served first). Downvotes discard quizzes; upvotes mark them eligible for the
shared pool. Every mutation is appended to a JSON-lines journal per section
and replayed at startup.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import DuplicateQuizIdError, UnknownQuizIdError
from .quiz import Quiz

MIX_TRIGGER_QUIZZES = 10
MIXED_CACHE_PROBABILITY = 0.5
DEFAULT_CACHE_THRESHOLD = 30


class ServeMode(Enum):
    GENERATE = "Generate"
    MIXED = "Mixed"
    CACHED_ONLY = "CachedOnly"


class Vote(Enum):
    UP = "Up"
    DOWN = "Down"


@dataclass
class StoredQuiz:
    quiz: Quiz
    upvotes: int = 0
    served_count: int = 0
    last_served_seq: int = -1  # -1 = never served
    order: int = 0


@dataclass(frozen=True)
class SourceDecision:
    mode: ServeMode
    serve_from_cache_probability: float
    serve_from_cache: bool
    quiz_id: str | None = None


@dataclass
class SectionRepository:
    section_id: str
    stored: dict[str, StoredQuiz] = field(default_factory=dict)
    generation_count: int = 0
    serve_seq: int = 0

    @property
    def size(self) -> int:
        return len(self.stored)

    def mode(self, n: int) -> ServeMode:
        if self.generation_count < MIX_TRIGGER_QUIZZES:
            return ServeMode.GENERATE
        if self.size >= n:
            return ServeMode.CACHED_ONLY
        if self.size >= MIX_TRIGGER_QUIZZES:
            return ServeMode.MIXED
        # Downvotes drained the pool below the mix trigger: generate again.
        return ServeMode.GENERATE

    def least_recently_served(self) -> StoredQuiz:
        return min(self.stored.values(), key=lambda s: (s.last_served_seq, s.order))


def next_quiz(repo: SectionRepository, n: int, rng: random.Random) -> SourceDecision:
    """Decide whether the next request is served from cache or generated.

    In CachedOnly (and Mixed-serving-cache) the chosen quiz is marked served.
    ``n`` must exceed the ten-quiz mix trigger.
    """
    if n <= MIX_TRIGGER_QUIZZES:
        raise ValueError(f"cache threshold n must be > {MIX_TRIGGER_QUIZZES}")
    mode = repo.mode(n)
    if mode is ServeMode.GENERATE:
        return SourceDecision(mode, 0.0, serve_from_cache=False)
    if mode is ServeMode.CACHED_ONLY:
        chosen = repo.least_recently_served()
        _mark_served(repo, chosen)
        return SourceDecision(mode, 1.0, serve_from_cache=True, quiz_id=chosen.quiz.quiz_id)
    if rng.random() < MIXED_CACHE_PROBABILITY:
        chosen = repo.least_recently_served()
        _mark_served(repo, chosen)
        return SourceDecision(
            mode, MIXED_CACHE_PROBABILITY, serve_from_cache=True, quiz_id=chosen.quiz.quiz_id
        )
    return SourceDecision(mode, MIXED_CACHE_PROBABILITY, serve_from_cache=False)


def _mark_served(repo: SectionRepository, stored: StoredQuiz) -> None:
    repo.serve_seq += 1
    stored.last_served_seq = repo.serve_seq
    stored.served_count += 1


def store_quiz(repo: SectionRepository, quiz: Quiz) -> None:
    if quiz.quiz_id in repo.stored:
        raise DuplicateQuizIdError(f"quiz {quiz.quiz_id!r} already stored")
    repo.stored[quiz.quiz_id] = StoredQuiz(quiz=quiz, order=repo.generation_count)
    repo.generation_count += 1


def record_feedback(repo: SectionRepository, quiz_id: str, vote: Vote) -> None:
    """Down discards the quiz; Up makes it shared-pool eligible."""
    if quiz_id not in repo.stored:
        raise UnknownQuizIdError(f"quiz {quiz_id!r} not in section {repo.section_id!r}")
    if vote is Vote.DOWN:
        del repo.stored[quiz_id]
    else:
        repo.stored[quiz_id].upvotes += 1


def shared_pool_eligible(repo: SectionRepository) -> list[Quiz]:
    """Upvoted quizzes, in storage order."""
    return [
        s.quiz
        for s in sorted(repo.stored.values(), key=lambda s: s.order)
        if s.upvotes > 0
    ]


def _journal_name(section_id: str) -> str:
    slug = re.sub(r"[^A-Za-z0-9._-]+", "_", section_id)
    digest = hashlib.sha1(section_id.encode("utf-8")).hexdigest()[:8]
    return f"{slug}-{digest}.jsonl"


class QuestionBank:
    """All section repositories for a deployment, journal-backed.

    Single writer per section; the journal is append-only and replayed on
    first access, so a crash never loses committed events.
    """

    def __init__(self, data_dir: str | Path):
        self.dir = Path(data_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self._repos: dict[str, SectionRepository] = {}

    def repo(self, section_id: str) -> SectionRepository:
        if section_id not in self._repos:
            self._repos[section_id] = self._replay(section_id)
        return self._repos[section_id]

    def _journal_path(self, section_id: str) -> Path:
        return self.dir / _journal_name(section_id)

    def _replay(self, section_id: str) -> SectionRepository:
        repo = SectionRepository(section_id=section_id)
        path = self._journal_path(section_id)
        if not path.exists():
            return repo
        with path.open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                event = json.loads(line)
                kind = event["event"]
                if kind == "store":
                    store_quiz(repo, Quiz.from_dict(event["quiz"]))
                elif kind == "feedback":
                    record_feedback(repo, event["quiz_id"], Vote(event["vote"]))
                elif kind == "served":
                    _mark_served(repo, repo.stored[event["quiz_id"]])
        return repo

    def _append(self, section_id: str, event: dict) -> None:
        with self._journal_path(section_id).open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True, separators=(",", ":")) + "\n")

    def store(self, section_id: str, quiz: Quiz) -> None:
        store_quiz(self.repo(section_id), quiz)
        self._append(section_id, {"event": "store", "quiz": quiz.to_dict()})

    def decide(self, section_id: str, n: int, rng: random.Random) -> SourceDecision:
        decision = next_quiz(self.repo(section_id), n, rng)
        if decision.serve_from_cache:
            self._append(section_id, {"event": "served", "quiz_id": decision.quiz_id})
        return decision

    def feedback(self, section_id: str, quiz_id: str, vote: Vote) -> None:
        record_feedback(self.repo(section_id), quiz_id, vote)
        self._append(section_id, {"event": "feedback", "quiz_id": quiz_id, "vote": vote.value})

    def find_quiz(self, quiz_id: str) -> tuple[str, Quiz] | None:
        """Locate a stored quiz across loaded sections."""
        for section_id, repo in self._repos.items():
            if quiz_id in repo.stored:
                return section_id, repo.stored[quiz_id].quiz
        return None

    def load_all(self) -> None:
        """Replay every journal in the data directory."""
        for path in sorted(self.dir.glob("*.jsonl")):
            with path.open(encoding="utf-8") as fh:
                first = fh.readline().strip()
            if not first:
                continue
            event = json.loads(first)
            section_id = (
                event["quiz"]["section_id"] if event["event"] == "store" else None
            )
            if section_id:
                self.repo(section_id)
