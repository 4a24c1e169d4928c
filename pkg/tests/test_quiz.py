"""Prompt building, quiz parsing/repair, grading."""

from __future__ import annotations

import json
import random

import pytest

from studykit.errors import (
    AmbiguousCorrectAnswerError,
    EmptyContextError,
    NoJsonFoundError,
    QuizParseError,
    ResponseIndexError,
    SchemaViolationError,
    WrongQuestionCountError,
    WrongResponseCountError,
)
from studykit.indexer import count_tokens
from studykit.quiz import (
    DifficultyLevel,
    Quiz,
    build_explanation_prompt,
    build_quiz_prompt,
    grade_quiz,
    parse_quiz_response,
)

from conftest import quiz_payload_text, valid_quiz_payload


def parsed(raw: str) -> Quiz:
    return parse_quiz_response(
        raw, quiz_id="q-1", section_id="ch:s000", difficulty=DifficultyLevel.BEGINNER
    )


# --- difficulty prompts ---

def test_four_levels_with_fixed_prompts():
    assert len(DifficultyLevel) == 4
    assert DifficultyLevel.BEGINNER.system_prompt.startswith(
        "You are conversing with a Beginner learner"
    )
    assert "progress through Bloom's levels" in DifficultyLevel.EXPERT.system_prompt
    assert DifficultyLevel.parse("advanced") is DifficultyLevel.ADVANCED
    with pytest.raises(ValueError):
        DifficultyLevel.parse("impossible")


# --- build_quiz_prompt ---

def test_quiz_prompt_contains_template_and_difficulty():
    prompt = build_quiz_prompt(
        "Caches exploit locality.", "Model Optimizations", "§9", DifficultyLevel.BEGINNER
    )
    assert "Create a quiz from a CHAPTER SECTION." in prompt
    assert prompt.startswith(DifficultyLevel.BEGINNER.system_prompt)
    assert "QUOTE: Caches exploit locality." in prompt
    assert "CHAPTER SECTION Model Optimizations §9" in prompt


def test_quiz_prompt_deterministic():
    args = ("Some context.", "Name", "§2", DifficultyLevel.ADVANCED)
    assert build_quiz_prompt(*args) == build_quiz_prompt(*args)


def test_quiz_prompt_token_overhead_within_reserve():
    context = "word " * 800
    prompt = build_quiz_prompt(context, "Section Name", "§12", DifficultyLevel.EXPERT)
    assert count_tokens(prompt) <= count_tokens(context) + 600


def test_quiz_prompt_rejects_empty_context():
    with pytest.raises(EmptyContextError):
        build_quiz_prompt("   ", "Name", "§1", DifficultyLevel.BEGINNER)


# --- build_explanation_prompt ---

def test_explanation_prompt_includes_sources_verbatim():
    sources = ["Tiling improves reuse.", "Tensor cores batch multiplies."]
    prompt = build_explanation_prompt(
        "tensor cores", sources, DifficultyLevel.INTERMEDIATE, "AI Acceleration"
    )
    for text in sources:
        assert text in prompt
    assert prompt.startswith(DifficultyLevel.INTERMEDIATE.system_prompt)


def test_explanation_prompt_expert_anchor():
    prompt = build_explanation_prompt("x", ["src"], DifficultyLevel.EXPERT, "Ch")
    assert "progress through Bloom's levels" in prompt


def test_explanation_prompt_no_matches_disclaimer():
    prompt = build_explanation_prompt("puzzling text", [], DifficultyLevel.BEGINNER, "Robust AI")
    assert "No source context found" in prompt
    assert "Robust AI" in prompt


# --- parse_quiz_response ---

def test_parse_well_formed_payload():
    quiz = parsed(quiz_payload_text())
    assert len(quiz.questions) == 3
    for question in quiz.questions:
        assert sum(a.correct for a in question.answers) == 1
        assert all(a.explanation for a in question.answers)


def test_parse_tolerates_code_fence_and_prose():
    quiz = parsed(quiz_payload_text(fenced=True))
    assert len(quiz.questions) == 3


def test_parse_two_questions_rejected():
    payload = valid_quiz_payload(n_questions=2)
    with pytest.raises(WrongQuestionCountError):
        parsed(json.dumps(payload))


def test_parse_trims_to_three_questions():
    payload = valid_quiz_payload(n_questions=5)
    quiz = parsed(json.dumps(payload))
    assert len(quiz.questions) == 3
    assert quiz.questions[0].question_text == payload["questions"][0]["question"]


def test_parse_rejects_multiple_correct():
    payload = valid_quiz_payload()
    for answer in payload["questions"][1]["answers"]:
        answer["correct"] = True
    with pytest.raises(AmbiguousCorrectAnswerError):
        parsed(json.dumps(payload))


def test_parse_rejects_zero_correct():
    payload = valid_quiz_payload()
    for answer in payload["questions"][0]["answers"]:
        answer["correct"] = False
    with pytest.raises(AmbiguousCorrectAnswerError):
        parsed(json.dumps(payload))


def test_parse_rejects_empty_explanation_with_path():
    payload = valid_quiz_payload()
    payload["questions"][2]["answers"][1]["explanation"] = ""
    with pytest.raises(SchemaViolationError) as excinfo:
        parsed(json.dumps(payload))
    assert "questions[2].answers[1].explanation" in excinfo.value.path


def test_parse_no_json():
    with pytest.raises(NoJsonFoundError):
        parsed("Sorry, I cannot produce a quiz right now.")
    with pytest.raises(NoJsonFoundError):
        parsed("")


def test_parse_fuzzed_payloads_never_crash_never_admit_invalid():
    """10k mutations: every outcome is a valid Quiz or a structured error."""
    rng = random.Random(1234)
    base = quiz_payload_text()
    outcomes = {"quiz": 0, "error": 0}
    for _ in range(10_000):
        raw = _mutate(rng, base)
        try:
            quiz = parsed(raw)
        except QuizParseError:
            outcomes["error"] += 1
            continue
        outcomes["quiz"] += 1
        assert len(quiz.questions) == 3
        for question in quiz.questions:
            assert sum(a.correct for a in question.answers) == 1
            assert 3 <= len(question.answers) <= 5
            assert question.question_text.strip()
            assert all(a.explanation.strip() for a in question.answers)
            assert all(a.text.strip() for a in question.answers)
    # The harness must actually exercise both outcomes.
    assert outcomes["quiz"] > 100
    assert outcomes["error"] > 100


def _mutate(rng: random.Random, base: str) -> str:
    raw = base
    for _ in range(rng.randint(1, 3)):
        op = rng.randrange(8)
        if op == 0 and raw:  # delete a slice
            i = rng.randrange(len(raw))
            raw = raw[:i] + raw[i + rng.randint(1, 5):]
        elif op == 1:  # insert noise
            i = rng.randrange(len(raw) + 1)
            raw = raw[:i] + rng.choice(['"', "{", "}", "[", "]", ",", "true", "null", "xx"]) + raw[i:]
        elif op == 2:  # wrap in a fence with prose
            raw = f"Of course! Here you go:\n```json\n{raw}\n```"
        elif op == 3:  # flip a correct flag
            raw = raw.replace('"correct": true', '"correct": false', 1)
        elif op == 4:
            raw = raw.replace('"correct": false', '"correct": true', 1)
        elif op == 5:  # drop a field name
            raw = raw.replace('"explanation"', '"explanatio"', 1)
        elif op == 6:  # truncate
            raw = raw[: rng.randrange(max(1, len(raw)))]
        elif op == 7:  # type confusion
            raw = raw.replace('"questions"', rng.choice(['"questions"', '"question"', '"items"']), 1)
    return raw


# --- grade_quiz ---

@pytest.fixture
def quiz3() -> Quiz:
    return parsed(quiz_payload_text())


def correct_indices(quiz: Quiz) -> list[int]:
    return [q.correct_index for q in quiz.questions]


def test_grade_all_correct(quiz3):
    result = grade_quiz(quiz3, correct_indices(quiz3), pass_threshold=0.7, timestamp="t")
    assert result.score == 1.0
    assert result.passed
    assert result.correctness == (True, True, True)


def test_grade_two_of_three_thresholds(quiz3):
    answers = correct_indices(quiz3)
    answers[2] = (answers[2] + 1) % 3
    strict = grade_quiz(quiz3, answers, pass_threshold=0.7, timestamp="t")
    assert strict.score == pytest.approx(2 / 3)
    assert not strict.passed
    lenient = grade_quiz(quiz3, answers, pass_threshold=0.6, timestamp="t")
    assert lenient.passed


def test_grade_default_threshold_passes_two_of_three(quiz3):
    answers = correct_indices(quiz3)
    answers[0] = (answers[0] + 1) % 3
    assert grade_quiz(quiz3, answers, timestamp="t").passed


def test_grade_attaches_chosen_explanations(quiz3):
    answers = correct_indices(quiz3)
    result = grade_quiz(quiz3, answers, timestamp="t")
    assert result.explanations == tuple(
        q.answers[i].explanation for q, i in zip(quiz3.questions, answers)
    )


def test_grade_score_domain(quiz3):
    rng = random.Random(2)
    for _ in range(200):
        answers = [rng.randrange(3) for _ in range(3)]
        result = grade_quiz(quiz3, answers, timestamp="t")
        assert result.score in (0.0, pytest.approx(1 / 3), pytest.approx(2 / 3), 1.0)


def test_grade_wrong_count(quiz3):
    with pytest.raises(WrongResponseCountError):
        grade_quiz(quiz3, [0, 1], timestamp="t")


def test_grade_index_out_of_range(quiz3):
    with pytest.raises(ResponseIndexError):
        grade_quiz(quiz3, [0, 1, 9], timestamp="t")
    with pytest.raises(ResponseIndexError):
        grade_quiz(quiz3, [0, 1, True], timestamp="t")


def test_quiz_dict_round_trip(quiz3):
    doc = quiz3.to_dict()
    again = Quiz.from_dict(doc)
    assert again == quiz3
    assert doc["difficulty"] == "Beginner"
    assert set(doc["questions"][0]["answers"][0]) == {"text", "correct", "explanation"}
