"""Difficulty-conditioned prompt building, quiz validation, and grading.

Model output is treated as hostile input: the parser tolerates syntactic
wrappers (code fences, surrounding prose) but rejects semantic defects
(wrong question count, zero or multiple correct answers, empty explanations)
with structured errors that tell the caller to regenerate. Anything that
parses becomes a quiz satisfying every schema invariant.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

from .errors import (
    AmbiguousCorrectAnswerError,
    EmptyContextError,
    NoJsonFoundError,
    ResponseIndexError,
    SchemaViolationError,
    WrongQuestionCountError,
    WrongResponseCountError,
)

QUESTIONS_PER_QUIZ = 3
MIN_ANSWER_OPTIONS = 3
MAX_ANSWER_OPTIONS = 5

# Two of three questions correct passes by default.
DEFAULT_PASS_THRESHOLD = 2 / 3


class DifficultyLevel(Enum):
    BEGINNER = "Beginner"
    INTERMEDIATE = "Intermediate"
    ADVANCED = "Advanced"
    EXPERT = "Expert"

    @property
    def system_prompt(self) -> str:
        return _SYSTEM_PROMPTS[self]

    @classmethod
    def parse(cls, value: str) -> "DifficultyLevel":
        try:
            return cls(value.strip().capitalize())
        except (ValueError, AttributeError):
            raise ValueError(f"unknown difficulty level: {value!r}") from None


_SYSTEM_PROMPTS = {
    DifficultyLevel.BEGINNER: (
        "You are conversing with a Beginner learner: Focus on foundational "
        "concepts, definitions, and straightforward applications in machine "
        "learning systems, suitable for learners with little to no prior "
        "knowledge."
    ),
    DifficultyLevel.INTERMEDIATE: (
        "You are conversing with an Intermediate learner: Emphasize "
        "problem-solving, system design, and practical implementations, "
        "targeting learners with a basic understanding of machine learning "
        "principles."
    ),
    DifficultyLevel.ADVANCED: (
        "You are conversing with an Advanced learner: Challenge learners to "
        "analyze, innovate, and optimize complex machine learning systems, "
        "requiring deep expertise and a holistic grasp of advanced techniques."
    ),
    DifficultyLevel.EXPERT: (
        "You are an expert ML teacher using Bloom's Taxonomy: Create responses "
        "that progress through Bloom's levels: remember, understand, apply, "
        "analyze, evaluate, and create. Guide my learning."
    ),
}

QUIZ_PROMPT_TEMPLATE = """Create a quiz from a CHAPTER SECTION.
The quiz should have 3 questions in JSON format:
- Q1 & Q2: Directly related to the quote's content.
- Q3: Requires deeper understanding.
Use this JSON template, modifying it as needed:
{{"questions": [
    {{"question": "Q1 here?",
      "answers": [
        {{"text": "A1", "correct": true/false,
        "explanation": "explanation"}},
        {{"text": "A2", "correct": false,
        "explanation": "explanation"}},
        {{"text": "A3", "correct": false,
        "explanation": "explanation"}},
      ]}},
    {{"question": "Q2 here?", "answers": [/* options */]}},
    {{"question": "Q3 here?", "answers": [/* options */]}}
  ]}}
QUOTE: {quote}
CHAPTER SECTION {section_name} {section_number}"""


@dataclass(frozen=True)
class AnswerOption:
    text: str
    correct: bool
    explanation: str


@dataclass(frozen=True)
class Question:
    question_text: str
    answers: tuple[AnswerOption, ...]

    @property
    def correct_index(self) -> int:
        return next(i for i, a in enumerate(self.answers) if a.correct)


@dataclass(frozen=True)
class Quiz:
    quiz_id: str
    section_id: str
    difficulty: DifficultyLevel
    questions: tuple[Question, ...]

    def to_dict(self) -> dict:
        return {
            "quiz_id": self.quiz_id,
            "section_id": self.section_id,
            "difficulty": self.difficulty.value,
            "questions": [
                {
                    "question": q.question_text,
                    "answers": [
                        {
                            "text": a.text,
                            "correct": a.correct,
                            "explanation": a.explanation,
                        }
                        for a in q.answers
                    ],
                }
                for q in self.questions
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Quiz":
        return cls(
            quiz_id=doc["quiz_id"],
            section_id=doc["section_id"],
            difficulty=DifficultyLevel(doc["difficulty"]),
            questions=tuple(
                Question(
                    question_text=q["question"],
                    answers=tuple(
                        AnswerOption(
                            text=a["text"],
                            correct=a["correct"],
                            explanation=a["explanation"],
                        )
                        for a in q["answers"]
                    ),
                )
                for q in doc["questions"]
            ),
        )


@dataclass(frozen=True)
class QuizResult:
    quiz_id: str
    correctness: tuple[bool, ...]
    score: float
    passed: bool
    timestamp: str
    explanations: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "quiz_id": self.quiz_id,
            "correctness": list(self.correctness),
            "score": self.score,
            "passed": self.passed,
            "timestamp": self.timestamp,
        }


def build_quiz_prompt(
    context: str,
    section_name: str,
    section_number: str,
    difficulty: DifficultyLevel,
) -> str:
    """Difficulty system prompt followed by the quiz template, slots filled."""
    if not context.strip():
        raise EmptyContextError("quiz context is empty")
    body = QUIZ_PROMPT_TEMPLATE.format(
        quote=context, section_name=section_name, section_number=section_number
    )
    return f"{difficulty.system_prompt}\n\n{body}"


def build_explanation_prompt(
    highlight: str,
    matched_texts: list[str],
    difficulty: DifficultyLevel,
    chapter_title: str,
) -> str:
    """Prompt binding the model to the matched source passages.

    With no matches the prompt says so and scopes the answer to the chapter
    title instead, so the model never invents citations.
    """
    lines = [difficulty.system_prompt, ""]
    if matched_texts:
        lines.append(
            "Answer primarily from the following source passages taken from "
            "the course material. Stay within what they state; you may add "
            "brief general background only where the passages are silent."
        )
        for i, text in enumerate(matched_texts, start=1):
            lines.append(f"\nSOURCE PASSAGE {i}:\n{text}")
    else:
        lines.append(
            "No source context found for this request. Keep the answer within "
            f'the scope of the chapter "{chapter_title}" and say so when the '
            "material does not cover something."
        )
    lines.append(f"\nThe learner highlighted this text and asks for an explanation:\n{highlight}")
    return "\n".join(lines)


def _extract_first_json(raw: str) -> dict:
    """First decodable JSON object in ``raw``, fences and prose tolerated."""
    if not isinstance(raw, str):
        raise NoJsonFoundError("model output is not text")
    decoder = json.JSONDecoder()
    pos = raw.find("{")
    while pos != -1:
        try:
            obj, _ = decoder.raw_decode(raw, pos)
        except json.JSONDecodeError:
            pos = raw.find("{", pos + 1)
            continue
        if isinstance(obj, dict):
            return obj
        pos = raw.find("{", pos + 1)
    raise NoJsonFoundError("no JSON object found in model output")


def _require_str(value, path: str) -> str:
    if not isinstance(value, str) or not value.strip():
        raise SchemaViolationError(f"{path} must be a nonempty string", path=path)
    return value.strip()


def _parse_question(doc, path: str) -> Question:
    if not isinstance(doc, dict):
        raise SchemaViolationError(f"{path} must be an object", path=path)
    text = _require_str(doc.get("question"), f"{path}.question")
    answers_doc = doc.get("answers")
    if not isinstance(answers_doc, list):
        raise SchemaViolationError(f"{path}.answers must be a list", path=f"{path}.answers")
    if not MIN_ANSWER_OPTIONS <= len(answers_doc) <= MAX_ANSWER_OPTIONS:
        raise SchemaViolationError(
            f"{path}.answers must have {MIN_ANSWER_OPTIONS}-{MAX_ANSWER_OPTIONS} options",
            path=f"{path}.answers",
        )
    answers = []
    for i, adoc in enumerate(answers_doc):
        apath = f"{path}.answers[{i}]"
        if not isinstance(adoc, dict):
            raise SchemaViolationError(f"{apath} must be an object", path=apath)
        correct = adoc.get("correct")
        if not isinstance(correct, bool):
            raise SchemaViolationError(f"{apath}.correct must be a boolean", path=f"{apath}.correct")
        answers.append(
            AnswerOption(
                text=_require_str(adoc.get("text"), f"{apath}.text"),
                correct=correct,
                explanation=_require_str(adoc.get("explanation"), f"{apath}.explanation"),
            )
        )
    n_correct = sum(a.correct for a in answers)
    if n_correct != 1:
        raise AmbiguousCorrectAnswerError(
            f"{path} marks {n_correct} answers correct; exactly one required"
        )
    return Question(question_text=text, answers=tuple(answers))


def parse_quiz_response(
    raw: str,
    quiz_id: str,
    section_id: str,
    difficulty: DifficultyLevel,
) -> Quiz:
    """Validate raw model output into a Quiz, or raise a structured error.

    More than three questions are trimmed to the first three; fewer are
    rejected. Semantic defects are never repaired silently.
    """
    doc = _extract_first_json(raw)
    questions_doc = doc.get("questions")
    if not isinstance(questions_doc, list):
        raise SchemaViolationError("questions must be a list", path="questions")
    if len(questions_doc) < QUESTIONS_PER_QUIZ:
        raise WrongQuestionCountError(
            f"expected {QUESTIONS_PER_QUIZ} questions, got {len(questions_doc)}"
        )
    questions = tuple(
        _parse_question(qdoc, f"questions[{i}]")
        for i, qdoc in enumerate(questions_doc[:QUESTIONS_PER_QUIZ])
    )
    return Quiz(
        quiz_id=quiz_id,
        section_id=section_id,
        difficulty=difficulty,
        questions=questions,
    )


def grade_quiz(
    quiz: Quiz,
    responses: list[int],
    pass_threshold: float = DEFAULT_PASS_THRESHOLD,
    timestamp: str = "",
) -> QuizResult:
    """Score the selected answer indices and attach per-answer explanations."""
    if len(responses) != len(quiz.questions):
        raise WrongResponseCountError(
            f"expected {len(quiz.questions)} responses, got {len(responses)}"
        )
    correctness = []
    explanations = []
    for question, choice in zip(quiz.questions, responses):
        if not isinstance(choice, int) or isinstance(choice, bool) or not (
            0 <= choice < len(question.answers)
        ):
            raise ResponseIndexError(
                f"answer index {choice!r} out of range for {len(question.answers)} options"
            )
        correctness.append(choice == question.correct_index)
        explanations.append(question.answers[choice].explanation)
    score = sum(correctness) / len(quiz.questions)
    return QuizResult(
        quiz_id=quiz.quiz_id,
        correctness=tuple(correctness),
        score=score,
        passed=score >= pass_threshold,
        timestamp=timestamp,
        explanations=tuple(explanations),
    )
