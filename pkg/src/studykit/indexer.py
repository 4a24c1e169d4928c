"""Chapter indexing: headings to sections, paragraphs to fingerprints.

A chapter document (HTML or Markdown) is split into flat sections at every
heading. Each paragraph gets a normalized form and a scalar fingerprint (the
mean character code of the normalized text), and every chapter index carries
a fingerprint map sorted ascending so lookups can binary-search it.

Token counts use a fixed estimator, ceil(chars / 4), so budgets are
reproducible across deployments regardless of the models in the roster.
"""

from __future__ import annotations

import json
import re
import string
from dataclasses import dataclass, field
from html.parser import HTMLParser

from .errors import EmptyDocumentError, EmptyTextError, MarkupError

_PUNCT_TABLE = str.maketrans("", "", string.punctuation)
_WS_RUN = re.compile(r"\s+")

# Block-level HTML elements treated as one paragraph each.
_PARAGRAPH_TAGS = {"p", "li", "blockquote", "pre", "td"}
_HEADING_TAGS = {"h1", "h2", "h3", "h4", "h5", "h6"}
_FIGURE_TAGS = {"img", "figure"}

_MD_HEADING = re.compile(r"^(#{1,6})\s+(.*?)\s*#*\s*$")
_MD_IMAGE = re.compile(r"!\[([^\]]*)\]\([^)]*\)")


def normalize(text: str) -> str:
    """Lowercase, strip ASCII punctuation, and collapse whitespace runs."""
    text = text.lower().translate(_PUNCT_TABLE)
    return _WS_RUN.sub(" ", text).strip()


def fingerprint(text: str) -> float:
    """Mean code point of ``text``; raises :class:`EmptyTextError` on empty.

    Callers are expected to pass normalized text and to skip paragraphs whose
    normalized form is empty.
    """
    if not text:
        raise EmptyTextError("cannot fingerprint empty text")
    return sum(map(ord, text)) / len(text)


def count_tokens(text: str) -> int:
    """Deterministic token estimate: ceil(character count / 4)."""
    return (len(text) + 3) // 4


@dataclass(frozen=True)
class Paragraph:
    paragraph_id: str
    raw_text: str
    normalized_text: str
    fingerprint: float | None  # None when normalized_text is empty


@dataclass(frozen=True)
class Section:
    section_id: str
    chapter_id: str
    heading_level: int
    title: str
    paragraphs: tuple[Paragraph, ...]
    figure_anchors: tuple[str, ...] = ()

    @property
    def text(self) -> str:
        """Paragraphs joined in document order; basis of ``token_count``."""
        return "\n\n".join(p.raw_text for p in self.paragraphs)

    @property
    def token_count(self) -> int:
        return count_tokens(self.text)


@dataclass(frozen=True)
class FingerprintEntry:
    fingerprint: float
    paragraph_id: str
    normalized_text: str


@dataclass
class SectionIndex:
    """Immutable after construction; safe to share across threads."""

    chapter_id: str
    chapter_title: str
    sections: tuple[Section, ...]
    fingerprint_map: tuple[FingerprintEntry, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.fingerprint_map:
            entries = [
                FingerprintEntry(p.fingerprint, p.paragraph_id, p.normalized_text)
                for s in self.sections
                for p in s.paragraphs
                if p.fingerprint is not None
            ]
            entries.sort(key=lambda e: (e.fingerprint, e.paragraph_id))
            self.fingerprint_map = tuple(entries)
        self.fingerprint_values = tuple(e.fingerprint for e in self.fingerprint_map)
        self._paragraphs = {
            p.paragraph_id: p for s in self.sections for p in s.paragraphs
        }
        self._sections = {s.section_id: s for s in self.sections}

    def paragraph(self, paragraph_id: str) -> Paragraph:
        return self._paragraphs[paragraph_id]

    def section(self, section_id: str) -> Section:
        return self._sections[section_id]

    def to_json(self) -> str:
        """Canonical JSON: stable key order, fingerprints at 6 decimals."""
        doc = {
            "chapter_id": self.chapter_id,
            "chapter_title": self.chapter_title,
            "sections": [
                {
                    "section_id": s.section_id,
                    "heading_level": s.heading_level,
                    "title": s.title,
                    "token_count": s.token_count,
                    "figure_anchors": list(s.figure_anchors),
                    "paragraphs": [
                        {
                            "paragraph_id": p.paragraph_id,
                            "raw_text": p.raw_text,
                            "normalized_text": p.normalized_text,
                            "fingerprint": (
                                None
                                if p.fingerprint is None
                                else round(p.fingerprint, 6)
                            ),
                        }
                        for p in s.paragraphs
                    ],
                }
                for s in self.sections
            ],
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, payload: str) -> "SectionIndex":
        doc = json.loads(payload)
        sections = tuple(
            Section(
                section_id=s["section_id"],
                chapter_id=doc["chapter_id"],
                heading_level=s["heading_level"],
                title=s["title"],
                figure_anchors=tuple(s.get("figure_anchors", [])),
                paragraphs=tuple(
                    Paragraph(
                        paragraph_id=p["paragraph_id"],
                        raw_text=p["raw_text"],
                        normalized_text=p["normalized_text"],
                        fingerprint=p["fingerprint"],
                    )
                    for p in s["paragraphs"]
                ),
            )
            for s in doc["sections"]
        )
        return cls(
            chapter_id=doc["chapter_id"],
            chapter_title=doc["chapter_title"],
            sections=sections,
        )


class _HtmlOutline(HTMLParser):
    """Collects (kind, level, text) blocks from heading/paragraph elements."""

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.blocks: list[tuple[str, int, str]] = []  # (kind, level, text)
        self._stack: list[tuple[str, tuple[int, int]]] = []
        self._buf: list[str] = []
        self._capturing: str | None = None  # tag currently buffered

    def handle_starttag(self, tag, attrs):
        if tag in _HEADING_TAGS or tag in _PARAGRAPH_TAGS:
            if self._capturing is None:
                self._capturing = tag
                self._buf = []
                self._stack.append((tag, self.getpos()))
        elif tag in _FIGURE_TAGS:
            attrmap = dict(attrs)
            anchor = attrmap.get("alt") or attrmap.get("src") or tag
            self.blocks.append(("figure", 0, anchor))

    def handle_endtag(self, tag):
        if self._capturing == tag:
            text = "".join(self._buf).strip()
            self._capturing = None
            self._stack.pop()
            if tag in _HEADING_TAGS:
                self.blocks.append(("heading", int(tag[1]), text))
            elif text:
                self.blocks.append(("paragraph", 0, text))

    def handle_data(self, data):
        if self._capturing is not None:
            self._buf.append(data)

    def unclosed(self) -> tuple[str, tuple[int, int]] | None:
        return self._stack[-1] if self._stack else None


def _parse_html(text: str) -> list[tuple[str, int, str]]:
    parser = _HtmlOutline()
    parser.feed(text)
    parser.close()
    open_tag = parser.unclosed()
    if open_tag is not None:
        tag, (line, col) = open_tag
        raise MarkupError(f"unclosed <{tag}> element", line=line, column=col)
    return parser.blocks


def _parse_markdown(text: str) -> list[tuple[str, int, str]]:
    blocks: list[tuple[str, int, str]] = []
    para_lines: list[str] = []
    in_fence = False

    def flush():
        if para_lines:
            body = "\n".join(para_lines).strip()
            if body:
                blocks.append(("paragraph", 0, body))
            para_lines.clear()

    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("```"):
            in_fence = not in_fence
            if not in_fence:
                flush()
            continue
        if in_fence:
            para_lines.append(line)
            continue
        heading = _MD_HEADING.match(stripped)
        if heading:
            flush()
            blocks.append(("heading", len(heading.group(1)), heading.group(2)))
            continue
        img = _MD_IMAGE.match(stripped)
        if img and _MD_IMAGE.sub("", stripped).strip() == "":
            flush()
            blocks.append(("figure", 0, img.group(1) or "figure"))
            continue
        if not stripped:
            flush()
            continue
        para_lines.append(line)
    flush()
    return blocks


def _looks_like_html(text: str) -> bool:
    head = text.lstrip()[:512].lower()
    return head.startswith("<") or "<p>" in head or "<h1" in head or "<html" in head


def index_document(
    doc: str, chapter_id: str, fmt: str = "auto", title: str | None = None
) -> SectionIndex:
    """Split a chapter document into sections at every heading.

    Every heading (any level) opens a new flat section; paragraph blocks
    belong to the most recent heading. Documents without headings produce one
    implicit section titled ``title`` (default: the chapter id). Identifiers
    are positional, so re-indexing the same document reproduces them.
    """
    if fmt not in ("auto", "html", "markdown"):
        raise ValueError(f"unknown format: {fmt!r}")
    if fmt == "auto":
        fmt = "html" if _looks_like_html(doc) else "markdown"
    blocks = _parse_html(doc) if fmt == "html" else _parse_markdown(doc)

    if not any(kind in ("heading", "paragraph") for kind, _, _ in blocks):
        raise EmptyDocumentError(f"document {chapter_id!r} has no indexable content")

    default_title = title if title is not None else chapter_id
    chapter_title = next(
        (text for kind, level, text in blocks if kind == "heading" and level == 1),
        default_title,
    )

    sections: list[Section] = []
    current_title = default_title
    current_level = 1
    paragraphs: list[Paragraph] = []
    anchors: list[str] = []
    started = False  # an implicit section exists only if content precedes a heading

    def close_section():
        ordinal = len(sections)
        section_id = f"{chapter_id}:s{ordinal:03d}"
        named = [
            Paragraph(
                paragraph_id=f"{section_id}:p{i:03d}",
                raw_text=p.raw_text,
                normalized_text=p.normalized_text,
                fingerprint=p.fingerprint,
            )
            for i, p in enumerate(paragraphs)
        ]
        sections.append(
            Section(
                section_id=section_id,
                chapter_id=chapter_id,
                heading_level=current_level,
                title=current_title,
                paragraphs=tuple(named),
                figure_anchors=tuple(anchors),
            )
        )
        paragraphs.clear()
        anchors.clear()

    for kind, level, text in blocks:
        if kind == "heading":
            if started:
                close_section()
            current_title = text or default_title
            current_level = level
            started = True
        elif kind == "figure":
            anchors.append(text)
            started = True
        else:
            norm = normalize(text)
            paragraphs.append(
                Paragraph(
                    paragraph_id="",  # assigned on close
                    raw_text=text,
                    normalized_text=norm,
                    fingerprint=fingerprint(norm) if norm else None,
                )
            )
            started = True
    close_section()

    return SectionIndex(
        chapter_id=chapter_id, chapter_title=chapter_title, sections=tuple(sections)
    )
