"""Shared fixtures: synthetic corpus builders, scripted transports, clocks."""

from __future__ import annotations

import json
import random
from datetime import datetime, timedelta, timezone

import pytest

from studykit.config import EngineConfig
from studykit.engine import Engine
from studykit.gateway import ProviderProfile, StubTransport, Tier
from studykit.indexer import SectionIndex, index_document

WORD_BANK = [
    "gradient", "descent", "tensor", "kernel", "cache", "memory", "latency",
    "throughput", "quantization", "pruning", "batch", "epoch", "weight",
    "activation", "inference", "training", "pipeline", "accelerator", "compiler",
    "scheduler", "bandwidth", "precision", "optimizer", "layer", "convolution",
    "pooling", "softmax", "embedding", "attention", "transformer", "dataset",
    "sampling", "regularization", "dropout", "checkpoint", "deployment", "edge",
    "cloud", "profile", "benchmark", "hardware", "architecture", "register",
    "vector", "matrix", "sparsity", "compression", "distillation", "federated",
    "privacy", "monitoring", "drift", "serving", "container", "runtime",
]


def make_sentence(rng: random.Random, numeric_density: float = 0.0) -> str:
    n = rng.randint(6, 14)
    words = [rng.choice(WORD_BANK) for _ in range(n)]
    for i in range(len(words)):
        if rng.random() < numeric_density:
            words[i] = str(rng.randint(1, 99999))
    return " ".join(words).capitalize() + rng.choice([".", ".", ".", "!", "?"])


def make_paragraph(rng: random.Random, n_sentences: int | None = None) -> str:
    numeric_density = rng.choice([0.0, 0.0, 0.1, 0.2, 0.35])
    count = n_sentences if n_sentences is not None else rng.randint(2, 5)
    return " ".join(make_sentence(rng, numeric_density) for _ in range(count))


def make_chapter_markdown(
    rng: random.Random, chapter_title: str, n_sections: int, paragraphs_per_section: int
) -> str:
    lines = [f"# {chapter_title}", ""]
    for s in range(n_sections):
        if s > 0:
            lines.append(f"## {chapter_title} part {s}")
            lines.append("")
        for _ in range(paragraphs_per_section):
            lines.append(make_paragraph(rng))
            lines.append("")
    return "\n".join(lines)


def make_sized_markdown(rng: random.Random, title: str, target_chars: int) -> str:
    """One-section chapter whose body is exactly ``target_chars`` characters."""
    header = f"# {title}\n\n"
    blocks: list[str] = []
    total = 0
    while total < target_chars + 400:
        para = make_paragraph(rng, n_sentences=rng.randint(3, 7))
        blocks.append(para)
        total += len(para) + 2
    body = "\n\n".join(blocks)
    # Trim paragraph text so the concatenated-paragraph length is exact.
    while len(body) > target_chars:
        overshoot = len(body) - target_chars
        if len(blocks[-1]) > overshoot:
            blocks[-1] = blocks[-1][: len(blocks[-1]) - overshoot].rstrip() or "End."
        else:
            blocks.pop()
        body = "\n\n".join(blocks)
    if len(body) < target_chars:
        blocks[-1] = blocks[-1] + "x" * (target_chars - len(body))
        body = "\n\n".join(blocks)
    return header + body + "\n"


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20260808)


@pytest.fixture
def small_index(rng) -> SectionIndex:
    doc = make_chapter_markdown(rng, "Model Optimizations", n_sections=3, paragraphs_per_section=4)
    return index_document(doc, "model-optimizations", fmt="markdown")


@pytest.fixture
def corpus_200(rng) -> SectionIndex:
    doc = make_chapter_markdown(rng, "AI Acceleration", n_sections=10, paragraphs_per_section=20)
    index = index_document(doc, "ai-acceleration", fmt="markdown")
    assert len(index.fingerprint_map) == 200
    return index


def valid_quiz_payload(rng: random.Random | None = None, n_questions: int = 3) -> dict:
    rng = rng or random.Random(7)
    questions = []
    for q in range(n_questions):
        correct = rng.randrange(3)
        questions.append(
            {
                "question": f"What does concept {q + 1} describe?",
                "answers": [
                    {
                        "text": f"Answer {i + 1} for question {q + 1}",
                        "correct": i == correct,
                        "explanation": f"Option {i + 1} is {'right' if i == correct else 'wrong'} because of its definition.",
                    }
                    for i in range(3)
                ],
            }
        )
    return {"questions": questions}


def quiz_payload_text(rng: random.Random | None = None, fenced: bool = False) -> str:
    payload = json.dumps(valid_quiz_payload(rng), indent=1)
    if fenced:
        return f"Here is your quiz!\n```json\n{payload}\n```\nEnjoy."
    return payload


def substitute_letters(rng: random.Random, text: str, rate: float = 0.05) -> str:
    """Typo model: replace up to ``rate`` of the letter positions."""
    letters = [i for i, ch in enumerate(text) if ch.isalpha()]
    n_subs = max(1, int(rate * len(text)))
    chars = list(text)
    for i in rng.sample(letters, min(n_subs, len(letters))):
        chars[i] = rng.choice("abcdefghijklmnopqrstuvwxyz")
    return "".join(chars)


class FixedClock:
    """Deterministic clock advancing a fixed step per call."""

    def __init__(self, start: str = "2026-03-02T10:00:00+00:00", step_seconds: float = 1.0):
        self.current = datetime.fromisoformat(start)
        self.step = timedelta(seconds=step_seconds)

    def __call__(self) -> datetime:
        value = self.current
        self.current = self.current + self.step
        return value


def free_profile(pid: str = "primary", priority: int = 0, **limits) -> ProviderProfile:
    return ProviderProfile(
        provider_id=pid, model_name=f"{pid}-model", tier=Tier.FREE, priority=priority, **limits
    )


def quiz_generating_transport() -> StubTransport:
    """Stub whose quiz payload is a deterministic function of the prompt."""

    def generate(profile, prompt: str) -> str:
        seed = sum(ord(c) for c in prompt[:512])
        return json.dumps(valid_quiz_payload(random.Random(seed)))

    return StubTransport(generate=generate)


def build_engine(
    tmp_path,
    corpus: list[SectionIndex],
    transport=None,
    seed: int = 11,
    clock=None,
    secret: str = "test-secret",
    monkeypatch=None,
    **config_overrides,
) -> Engine:
    config = EngineConfig(
        corpus_dir=str(tmp_path / "corpus"),
        data_dir=str(tmp_path / "data"),
        rng_seed=seed,
        **config_overrides,
    )
    if monkeypatch is not None:
        monkeypatch.setenv(config.secret_env, secret)
    profiles = [free_profile()]
    return Engine(
        config,
        corpus,
        profiles,
        transport or quiz_generating_transport(),
        clock=clock or FixedClock(),
        rng=random.Random(seed),
    )
