"""Tamper-evident progress reports bound to a server-held secret.

A report is a canonical JSON body followed by a blank line and a single
trailer line carrying the attestation code. The code is derived from the body
digest and the secret via HMAC, and a second digest of body-plus-code is
retained server-side, keyed by the report id. Verification recomputes both:
a report is accepted only if the stored digest matches and the trailer code
can be re-derived from the body and the secret.

Comparing the presented digest against one recomputed from the same bytes
alone would only catch transport corruption, not forgery, so the code
re-derivation is a required part of verification: the secret, never present
in the report, is what makes the trailer unforgeable.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import DuplicateReportIdError, MissingSecretError
from .learner import GamificationSnapshot

TRAILER_PREFIX = "ATTEST-CODE: "
_TRAILER_RE = re.compile(rb"^ATTEST-CODE: ([0-9a-f]{64})$")


class Verdict(Enum):
    VERIFIED = "Verified"
    NOT_VERIFIED = "NotVerified"


@dataclass(frozen=True)
class VerificationResult:
    verdict: Verdict
    diagnostic: str | None = None

    @property
    def verified(self) -> bool:
        return self.verdict is Verdict.VERIFIED


@dataclass(frozen=True)
class AttestedReport:
    report_id: str
    body: bytes
    code_k: str
    stored_hash: str

    @property
    def file_bytes(self) -> bytes:
        return self.body + b"\n\n" + TRAILER_PREFIX.encode() + self.code_k.encode() + b"\n"


def canonical_serialize(
    stats: GamificationSnapshot, learner_id: str, issued_at: str, report_id: str
) -> bytes:
    """Deterministic UTF-8 JSON: sorted keys, no insignificant whitespace."""
    doc = {
        "learner_id": learner_id,
        "issued_at": issued_at,
        "report_id": report_id,
        "stats": stats.to_dict(),
        "summary": (
            f"learner {learner_id}: {stats.passing_attempts} passing attempts, "
            f"{stats.badge_count} badges, {stats.streak_days}-day streak"
        ),
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _derive_code(body: bytes, report_id: str, secret: str) -> str:
    digest = hashlib.sha256(body + report_id.encode("utf-8")).digest()
    return hmac.new(secret.encode("utf-8"), digest, hashlib.sha256).hexdigest()


def _body_hash(body: bytes, code: str) -> str:
    return hashlib.sha256(body + code.encode("ascii")).hexdigest()


class HashStore:
    """Server-side report-id to digest map, persisted as one JSON file."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        if self.path.exists():
            self._hashes: dict[str, str] = json.loads(self.path.read_text(encoding="utf-8"))
        else:
            self._hashes = {}

    def put(self, report_id: str, digest: str) -> None:
        if report_id in self._hashes:
            raise DuplicateReportIdError(f"report {report_id!r} already attested")
        self._hashes[report_id] = digest
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(
            json.dumps(self._hashes, sort_keys=True, indent=1), encoding="utf-8"
        )

    def get(self, report_id: str) -> str | None:
        return self._hashes.get(report_id)


def generate_report(
    stats: GamificationSnapshot,
    learner_id: str,
    secret: str,
    issued_at: str,
    report_id: str,
    store: HashStore | None = None,
) -> AttestedReport:
    """Build an attested report and retain its digest server-side."""
    if not secret:
        raise MissingSecretError("attestation secret is empty or unset")
    body = canonical_serialize(stats, learner_id, issued_at, report_id)
    code = _derive_code(body, report_id, secret)
    stored = _body_hash(body, code)
    if store is not None:
        store.put(report_id, stored)
    return AttestedReport(
        report_id=report_id, body=body, code_k=code, stored_hash=stored
    )


def split_report(report_file: bytes) -> tuple[bytes, str]:
    """Split report bytes into (body, trailer code); raises ValueError."""
    if not report_file.endswith(b"\n"):
        raise ValueError("report does not end with a newline")
    lines = report_file[:-1].split(b"\n")
    trailer_hits = [i for i, line in enumerate(lines) if line.startswith(b"ATTEST-CODE:")]
    if len(trailer_hits) != 1:
        raise ValueError(f"expected exactly one trailer line, found {len(trailer_hits)}")
    if trailer_hits[0] != len(lines) - 1:
        raise ValueError("trailer is not the final line")
    match = _TRAILER_RE.match(lines[-1])
    if not match:
        raise ValueError("trailer code is not a 64-char lowercase hex digest")
    if len(lines) < 2 or lines[-2] != b"":
        raise ValueError("trailer is not separated from the body by a blank line")
    body = b"\n".join(lines[:-2])
    return body, match.group(1).decode("ascii")


def verify_report(
    report_file: bytes, secret: str, store: HashStore
) -> VerificationResult:
    """Check a presented report against the secret and the stored digest.

    Never raises on malformed input; every failure is a NotVerified result
    with a diagnostic.
    """
    if not secret:
        raise MissingSecretError("attestation secret is empty or unset")
    try:
        body, code = split_report(report_file)
    except ValueError as exc:
        return VerificationResult(Verdict.NOT_VERIFIED, diagnostic=f"malformed report: {exc}")

    try:
        doc = json.loads(body.decode("utf-8"))
        report_id = doc["report_id"]
    except (ValueError, KeyError, TypeError):
        return VerificationResult(
            Verdict.NOT_VERIFIED, diagnostic="body is not canonical JSON with a report_id"
        )

    stored = store.get(report_id)
    if stored is None:
        return VerificationResult(Verdict.NOT_VERIFIED, diagnostic="unknown report id")

    presented = _body_hash(body, code)
    if not hmac.compare_digest(presented, stored):
        return VerificationResult(
            Verdict.NOT_VERIFIED, diagnostic="content digest mismatch"
        )

    expected_code = _derive_code(body, report_id, secret)
    if not hmac.compare_digest(expected_code, code):
        return VerificationResult(
            Verdict.NOT_VERIFIED, diagnostic="attestation code mismatch"
        )
    return VerificationResult(Verdict.VERIFIED)
