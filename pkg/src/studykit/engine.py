"""Request orchestration: wires the indexes, bank, gateway, and learner store.

All randomness (cache mixing, quiz and report ids) flows from injectable
sources, and the clock is injectable too, so a seeded engine run is
byte-reproducible. Explanation requests are stateless by design: nothing
about them is journaled anywhere.
"""

from __future__ import annotations

import json
import random
import uuid
from datetime import datetime, timezone
from pathlib import Path

from . import attest, bank, gateway, learner, matcher, quiz
from .config import EngineConfig
from .context import ContextBudget, select_context
from .errors import (
    CorpusNotLoadedError,
    EmptyIndexError,
    EmptyQueryError,
    GenerationFailedError,
    UnknownQuizError,
    UnknownSectionError,
    ValidationError,
)
from .errors import QuizParseError
from .indexer import SectionIndex, index_document
from .quiz import DifficultyLevel

GENERATION_RETRIES = 2  # regenerations after the first failed parse


def ingest_corpus(corpus_dir: str | Path, out_dir: str | Path) -> list[str]:
    """Index every HTML/Markdown chapter file and persist canonical JSON."""
    corpus_dir = Path(corpus_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    paths = sorted(
        p
        for p in corpus_dir.iterdir()
        if p.suffix.lower() in (".md", ".markdown", ".html", ".htm")
    )
    for path in paths:
        fmt = "markdown" if path.suffix.lower() in (".md", ".markdown") else "html"
        index = index_document(
            path.read_text(encoding="utf-8"), chapter_id=path.stem, fmt=fmt, title=path.stem
        )
        target = out_dir / f"{path.stem}.json"
        target.write_text(index.to_json(), encoding="utf-8")
        written.append(str(target))
    return written


def load_corpus(index_dir: str | Path) -> list[SectionIndex]:
    index_dir = Path(index_dir)
    if not index_dir.is_dir():
        return []
    return [
        SectionIndex.from_json(path.read_text(encoding="utf-8"))
        for path in sorted(index_dir.glob("*.json"))
    ]


class Engine:
    def __init__(
        self,
        config: EngineConfig,
        corpus: list[SectionIndex],
        profiles: list[gateway.ProviderProfile],
        transport,
        clock=None,
        rng: random.Random | None = None,
        uuid_source=None,
    ):
        self.config = config
        self.corpus = corpus
        self.chapters = {index.chapter_id: index for index in corpus}
        self.sections = {
            s.section_id: (index, s) for index in corpus for s in index.sections
        }
        self.profiles = profiles
        self.transport = transport
        self.ledger = gateway.UsageLedger(profiles)
        self.clock = clock or (lambda: datetime.now(timezone.utc))
        self.rng = rng or random.Random(config.rng_seed)
        self.uuid_source = uuid_source or self._seeded_uuid

        data_dir = Path(config.data_dir)
        self.bank = bank.QuestionBank(data_dir / "sections")
        self.learners = learner.LearnerStore(
            data_dir / "learners", corpus, tz=config.time_zone
        )
        self.hash_store = attest.HashStore(data_dir / "reports" / "hashes.json")
        self.bank.load_all()

    def _seeded_uuid(self) -> str:
        return str(uuid.UUID(int=self.rng.getrandbits(128), version=4))

    def _now_iso(self) -> str:
        return self.clock().isoformat()

    def _now_ts(self) -> float:
        return self.clock().timestamp()

    # --- explain ---

    def explain(
        self,
        highlight: str,
        chapter_id: str,
        difficulty: str | DifficultyLevel | None = None,
        learner_id: str | None = None,
        include_graph: bool = False,
    ) -> dict:
        """Bounded explanation for highlighted text. Writes nothing."""
        if not isinstance(highlight, str) or not highlight.strip():
            raise ValidationError("highlight must be nonempty text")
        index = self.chapters.get(chapter_id)
        if index is None:
            raise CorpusNotLoadedError(f"chapter {chapter_id!r} is not indexed")
        level = self._difficulty(difficulty, learner_id)

        try:
            matches = matcher.match_top_k(
                highlight, index, k=self.config.match_k, window=self.config.match_window
            )
        except (EmptyQueryError, EmptyIndexError):
            matches = []
        matched_texts = [index.paragraph(m.paragraph_id).raw_text for m in matches]
        if include_graph and learner_id:
            state = self.learners.state(learner_id)
            graph = learner.graph_snapshot(state, self.corpus)
            matched_texts.append(
                "LEARNER KNOWLEDGE GRAPH:\n" + json.dumps(graph, sort_keys=True)
            )
        prompt = quiz.build_explanation_prompt(
            highlight, matched_texts, level, index.chapter_title
        )
        completion = gateway.invoke(
            prompt,
            self.profiles,
            self.ledger,
            self.transport,
            now=self._now_ts(),
            max_completion_tokens=self.config.max_completion_tokens,
        )
        return {
            "explanation": completion.text,
            "sources": [m.paragraph_id for m in matches],
            "provider_id": completion.provider_id,
            "difficulty": level.value,
        }

    # --- quiz ---

    def _difficulty(
        self, difficulty: str | DifficultyLevel | None, learner_id: str | None
    ) -> DifficultyLevel:
        if isinstance(difficulty, DifficultyLevel):
            return difficulty
        if difficulty:
            try:
                return DifficultyLevel.parse(difficulty)
            except ValueError as exc:
                raise ValidationError(str(exc)) from exc
        if learner_id:
            return self.learners.state(learner_id).difficulty_preference
        return DifficultyLevel.BEGINNER

    def quiz(
        self,
        section_id: str,
        learner_id: str | None = None,
        difficulty: str | DifficultyLevel | None = None,
    ) -> dict:
        """Serve a quiz: from the cache when policy allows, else generated."""
        if section_id not in self.sections:
            raise UnknownSectionError(f"section {section_id!r} is not indexed")
        index, section = self.sections[section_id]
        decision = self.bank.decide(section_id, self.config.cache_threshold, self.rng)
        if decision.serve_from_cache:
            repo = self.bank.repo(section_id)
            stored = repo.stored[decision.quiz_id]
            return {"quiz": stored.quiz.to_dict(), "source": "cache"}

        level = self._difficulty(difficulty, learner_id)
        budget = ContextBudget(
            limit_tokens=self.config.token_budget,
            reserved_tokens=self.config.reserved_tokens,
        )
        context = select_context(section, budget, k_init=self.config.k_init)
        section_number = f"§{list(index.sections).index(section) + 1}"
        prompt = quiz.build_quiz_prompt(context, section.title, section_number, level)

        last_error = None
        for _ in range(1 + GENERATION_RETRIES):
            completion = gateway.invoke(
                prompt,
                self.profiles,
                self.ledger,
                self.transport,
                now=self._now_ts(),
                max_completion_tokens=self.config.max_completion_tokens,
            )
            try:
                parsed = quiz.parse_quiz_response(
                    completion.text,
                    quiz_id=self.uuid_source(),
                    section_id=section_id,
                    difficulty=level,
                )
            except QuizParseError as exc:
                last_error = exc
                continue
            self.bank.store(section_id, parsed)
            return {"quiz": parsed.to_dict(), "source": "generated"}
        raise GenerationFailedError(
            f"model output failed validation {1 + GENERATION_RETRIES} times: {last_error}"
        )

    # --- submit ---

    def submit(self, quiz_id: str, responses: list, learner_id: str) -> dict:
        if not isinstance(learner_id, str) or not learner_id:
            raise ValidationError("learner_id must be a nonempty string")
        if not isinstance(responses, list):
            raise ValidationError("responses must be a list of answer indices")
        found = self.bank.find_quiz(quiz_id)
        if found is None:
            raise UnknownQuizError(f"quiz {quiz_id!r} is unknown")
        section_id, stored_quiz = found
        result = quiz.grade_quiz(
            stored_quiz,
            responses,
            pass_threshold=self.config.pass_threshold,
            timestamp=self._now_iso(),
        )
        missed = [
            q.question_text
            for q, ok in zip(stored_quiz.questions, result.correctness)
            if not ok
        ]
        self.learners.record_attempt(learner_id, section_id, result, missed)
        snapshot = self._snapshot(learner_id)
        return {
            "result": {
                **result.to_dict(),
                "explanations": list(result.explanations),
            },
            "progress": snapshot.to_dict(),
        }

    # --- feedback ---

    def feedback(self, quiz_id: str, vote: str) -> dict:
        found = self.bank.find_quiz(quiz_id)
        if found is None:
            raise UnknownQuizError(f"quiz {quiz_id!r} is unknown")
        section_id, _ = found
        try:
            parsed_vote = bank.Vote(vote.capitalize()) if isinstance(vote, str) else None
        except ValueError:
            parsed_vote = None
        if parsed_vote is None:
            raise ValidationError("vote must be 'Up' or 'Down'")
        self.bank.feedback(section_id, quiz_id, parsed_vote)
        return {"quiz_id": quiz_id, "vote": parsed_vote.value}

    # --- progress, graph, reports ---

    def _snapshot(self, learner_id: str) -> learner.GamificationSnapshot:
        state = self.learners.state(learner_id)
        today = self.clock().date()
        return learner.gamification_snapshot(
            state,
            self.corpus,
            today,
            required_sections=self.config.required_sections,
            pass_threshold=self.config.pass_threshold,
            badge_interval=self.config.badge_interval,
        )

    def progress(self, learner_id: str) -> dict:
        return self._snapshot(learner_id).to_dict()

    def graph(self, learner_id: str) -> dict:
        state = self.learners.state(learner_id)
        return learner.graph_snapshot(state, self.corpus)

    def export_report(self, learner_id: str) -> attest.AttestedReport:
        snapshot = self._snapshot(learner_id)
        return attest.generate_report(
            snapshot,
            learner_id,
            secret=self.config.secret,
            issued_at=self._now_iso(),
            report_id=self.uuid_source(),
            store=self.hash_store,
        )

    def verify_report(self, report_file: bytes) -> attest.VerificationResult:
        return attest.verify_report(report_file, self.config.secret, self.hash_store)

    def health(self) -> dict:
        return {"status": "ok", "chapters": len(self.corpus)}
