"""Content indexing: normalization, fingerprints, section partitioning."""

from __future__ import annotations

import json
import random
import string

import pytest

from studykit.errors import EmptyDocumentError, EmptyTextError, MarkupError
from studykit.indexer import (
    SectionIndex,
    count_tokens,
    fingerprint,
    index_document,
    normalize,
)

from conftest import make_chapter_markdown, make_paragraph

HTML_DOC = """
<html><body>
<h1>Systems Overview</h1>
<p>First paragraph, about caches.</p>
<p>Second paragraph; about memory!</p>
<h2>Details</h2>
<p>Third paragraph.</p>
<img src="arch.png" alt="architecture diagram">
<h2>More Details</h2>
<p>Fourth paragraph.</p>
<p>Fifth paragraph.</p>
</body></html>
"""


# --- normalize ---

def test_normalize_removes_punctuation_and_case():
    assert normalize("Hello, World!") == "hello world"


def test_normalize_empty():
    assert normalize("") == ""


def test_normalize_collapses_whitespace():
    assert normalize("a  b") == "a b"
    assert normalize("a\n\tb   c ") == "a b c"


def test_normalize_idempotent():
    rng = random.Random(3)
    alphabet = string.ascii_letters + string.digits + string.punctuation + " \t\n"
    for _ in range(500):
        text = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 80)))
        once = normalize(text)
        assert normalize(once) == once


def test_normalize_strips_all_ascii_punctuation():
    assert normalize(string.punctuation) == ""


# --- fingerprint ---

def test_fingerprint_examples():
    assert fingerprint("aa") == 97.0
    assert fingerprint("ab") == 97.5


def test_fingerprint_empty_raises():
    with pytest.raises(EmptyTextError):
        fingerprint("")


def test_fingerprint_invariant_under_casing_and_punctuation():
    base = "Tensor cores accelerate, matrix multiplication!"
    variant = "TENSOR CORES ACCELERATE; matrix multiplication?!"
    assert fingerprint(normalize(base)) == fingerprint(normalize(variant))


def test_fingerprint_range_for_printable_ascii():
    rng = random.Random(9)
    printable = [chr(c) for c in range(32, 127)]
    for _ in range(300):
        text = normalize("".join(rng.choice(printable) for _ in range(rng.randint(1, 60))))
        if text:
            assert 32.0 <= fingerprint(text) <= 126.0


# --- count_tokens ---

def test_count_tokens_examples():
    assert count_tokens("") == 0
    assert count_tokens("x" * 20000) == 5000
    assert count_tokens("abc") == 1
    assert count_tokens("abcd") == 1
    assert count_tokens("abcde") == 2


def test_count_tokens_monotone_under_concatenation():
    rng = random.Random(5)
    for _ in range(200):
        a = "a" * rng.randint(0, 50)
        b = "b" * rng.randint(0, 50)
        assert count_tokens(a + b) >= max(count_tokens(a), count_tokens(b))


# --- index_document ---

def test_html_heading_partition():
    index = index_document(HTML_DOC, "ch-html", fmt="html")
    assert [s.heading_level for s in index.sections] == [1, 2, 2]
    assert [len(s.paragraphs) for s in index.sections] == [2, 1, 2]
    assert index.chapter_title == "Systems Overview"
    assert index.sections[1].figure_anchors == ("architecture diagram",)


def test_markdown_heading_partition():
    doc = "# Top\n\npara a.\n\n## Sub\n\npara b.\n\npara c.\n"
    index = index_document(doc, "ch-md", fmt="markdown")
    assert [s.title for s in index.sections] == ["Top", "Sub"]
    assert [len(s.paragraphs) for s in index.sections] == [1, 2]


def test_paragraph_multiset_preserved(rng):
    doc = make_chapter_markdown(rng, "Partition", n_sections=4, paragraphs_per_section=5)
    expected = [
        block.strip()
        for block in doc.split("\n\n")
        if block.strip() and not block.strip().startswith("#")
    ]
    index = index_document(doc, "partition", fmt="markdown")
    got = [p.raw_text for s in index.sections for p in s.paragraphs]
    assert sorted(got) == sorted(expected)


def test_zero_heading_document_gets_implicit_section(rng):
    paragraphs = [make_paragraph(rng) for _ in range(4)]
    doc = "\n\n".join(paragraphs)
    index = index_document(doc, "plain", fmt="markdown", title="plain.md")
    assert len(index.sections) == 1
    assert index.sections[0].title == "plain.md"
    assert sorted(p.raw_text for p in index.sections[0].paragraphs) == sorted(paragraphs)


def test_reindex_is_deterministic(rng):
    doc = make_chapter_markdown(rng, "Stable", n_sections=3, paragraphs_per_section=3)
    first = index_document(doc, "stable", fmt="markdown")
    second = index_document(doc, "stable", fmt="markdown")
    assert first.to_json() == second.to_json()
    assert [p.fingerprint for s in first.sections for p in s.paragraphs] == [
        p.fingerprint for s in second.sections for p in s.paragraphs
    ]


def test_empty_document_raises():
    with pytest.raises(EmptyDocumentError):
        index_document("", "empty", fmt="markdown")
    with pytest.raises(EmptyDocumentError):
        index_document("<html><body></body></html>", "empty", fmt="html")


def test_malformed_html_reports_position():
    with pytest.raises(MarkupError) as excinfo:
        index_document("<h1>Title</h1>\n<p>unterminated paragraph", "bad", fmt="html")
    assert excinfo.value.line == 2
    assert excinfo.value.code == "malformed-markup"


def test_fingerprint_map_sorted_one_entry_per_nonempty_paragraph(rng):
    doc = make_chapter_markdown(rng, "Sorted", n_sections=5, paragraphs_per_section=6)
    index = index_document(doc, "sorted", fmt="markdown")
    values = [e.fingerprint for e in index.fingerprint_map]
    assert values == sorted(values)
    nonempty = [p for s in index.sections for p in s.paragraphs if p.normalized_text]
    assert len(index.fingerprint_map) == len(nonempty)
    assert {e.paragraph_id for e in index.fingerprint_map} == {p.paragraph_id for p in nonempty}


def test_empty_normalized_paragraph_excluded_from_map():
    doc = "# T\n\n!!! ??? ...\n\nreal words here.\n"
    index = index_document(doc, "punct", fmt="markdown")
    paragraphs = index.sections[0].paragraphs
    assert len(paragraphs) == 2
    assert paragraphs[0].fingerprint is None
    assert len(index.fingerprint_map) == 1


def test_token_count_matches_estimator_on_joined_text(small_index):
    for section in small_index.sections:
        assert section.token_count == count_tokens(section.text)


def test_json_round_trip_preserves_structure(small_index):
    payload = small_index.to_json()
    loaded = SectionIndex.from_json(payload)
    assert loaded.to_json() == payload
    assert loaded.chapter_id == small_index.chapter_id
    assert len(loaded.fingerprint_map) == len(small_index.fingerprint_map)
    doc = json.loads(payload)
    assert list(doc.keys()) == sorted(doc.keys())


def test_fingerprints_serialized_to_six_decimals(small_index):
    doc = json.loads(small_index.to_json())
    for section in doc["sections"]:
        for para in section["paragraphs"]:
            if para["fingerprint"] is not None:
                assert para["fingerprint"] == round(para["fingerprint"], 6)
