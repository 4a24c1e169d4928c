"""JSON endpoint dispatch over the engine, plus a stdlib HTTP adapter.

The dispatcher is a pure mapping from (method, path, body bytes) to
(status, payload) so every endpoint can be exercised in-process. It is total:
arbitrary input produces a structured JSON error, never an exception. The
HTTP server is a thin threading wrapper around it.
"""

from __future__ import annotations

import base64
import json
import logging
import re
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .engine import Engine
from .errors import (
    AllProvidersFailedError,
    CorpusNotLoadedError,
    ExhaustedError,
    GenerationFailedError,
    GradingError,
    MissingSecretError,
    StudykitError,
    UnknownChapterError,
    UnknownQuizError,
    UnknownQuizIdError,
    UnknownSectionError,
    ValidationError,
)

logger = logging.getLogger(__name__)

_STATUS_BY_ERROR = {
    ValidationError: 400,
    GradingError: 400,
    UnknownSectionError: 404,
    UnknownChapterError: 404,
    UnknownQuizError: 404,
    UnknownQuizIdError: 404,
    CorpusNotLoadedError: 404,
    ExhaustedError: 503,
    AllProvidersFailedError: 502,
    GenerationFailedError: 502,
    MissingSecretError: 500,
}

_GRAPH_PATH = re.compile(r"^/graph/([^/]+)$")
_PROGRESS_PATH = re.compile(r"^/progress/([^/]+)$")


def _error(status: int, code: str, message: str, **details) -> tuple[int, dict]:
    payload = {"code": code, "message": message}
    if details:
        payload["details"] = {k: v for k, v in details.items() if v is not None}
    return status, {"error": payload}


class Api:
    def __init__(self, engine: Engine):
        self.engine = engine

    def dispatch(self, method: str, path: str, body: bytes = b"") -> tuple[int, dict]:
        try:
            return self._route(method.upper(), path, body)
        except StudykitError as exc:
            status = 500
            for kind, mapped in _STATUS_BY_ERROR.items():
                if isinstance(exc, kind):
                    status = mapped
                    break
            extra = {}
            if isinstance(exc, ExhaustedError):
                extra["retry_after"] = exc.retry_after
            return _error(status, exc.code, exc.message, **extra)
        except Exception:
            logger.exception("unhandled error for %s %s", method, path)
            return _error(500, "internal-error", "unexpected failure")

    def _route(self, method: str, path: str, body: bytes) -> tuple[int, dict]:
        if method == "GET":
            if path == "/healthz":
                return 200, self.engine.health()
            match = _GRAPH_PATH.match(path)
            if match:
                return 200, self.engine.graph(match.group(1))
            match = _PROGRESS_PATH.match(path)
            if match:
                return 200, self.engine.progress(match.group(1))
            return _error(404, "not-found", f"no such endpoint: GET {path}")

        if method != "POST":
            return _error(405, "method-not-allowed", f"{method} not supported")

        try:
            doc = json.loads(body.decode("utf-8")) if body.strip() else {}
        except (ValueError, UnicodeDecodeError):
            return _error(400, "invalid-json", "request body is not valid JSON")
        if not isinstance(doc, dict):
            return _error(400, "invalid-json", "request body must be a JSON object")

        if path == "/explain":
            return 200, self.engine.explain(
                highlight=self._text(doc, "highlight"),
                chapter_id=self._text(doc, "chapter_id"),
                difficulty=doc.get("difficulty"),
                learner_id=doc.get("learner_id"),
                include_graph=bool(doc.get("include_graph", False)),
            )
        if path == "/quiz":
            return 200, self.engine.quiz(
                section_id=self._text(doc, "section_id"),
                learner_id=doc.get("learner_id"),
                difficulty=doc.get("difficulty"),
            )
        if path == "/submit":
            return 200, self.engine.submit(
                quiz_id=self._text(doc, "quiz_id"),
                responses=doc.get("responses"),
                learner_id=doc.get("learner_id"),
            )
        if path == "/feedback":
            return 200, self.engine.feedback(
                quiz_id=self._text(doc, "quiz_id"),
                vote=doc.get("vote"),
            )
        if path == "/report":
            report = self.engine.export_report(self._text(doc, "learner_id"))
            return 200, {
                "report_id": report.report_id,
                "report": report.file_bytes.decode("utf-8"),
            }
        if path == "/report/verify":
            raw = doc.get("report")
            if isinstance(raw, str):
                payload = raw.encode("utf-8")
            elif isinstance(raw, dict) and isinstance(raw.get("base64"), str):
                try:
                    payload = base64.b64decode(raw["base64"], validate=True)
                except ValueError:
                    return _error(400, "validation-error", "report.base64 is not valid base64")
            else:
                return _error(400, "validation-error", "report must be text or {base64: ...}")
            result = self.engine.verify_report(payload)
            out = {"verdict": result.verdict.value}
            if result.diagnostic:
                out["diagnostic"] = result.diagnostic
            return 200, out
        return _error(404, "not-found", f"no such endpoint: POST {path}")

    @staticmethod
    def _text(doc: dict, key: str) -> str:
        value = doc.get(key)
        if not isinstance(value, str) or not value:
            raise ValidationError(f"{key} must be a nonempty string")
        return value


def make_server(api: Api, host: str = "127.0.0.1", port: int = 8080) -> ThreadingHTTPServer:
    class Handler(BaseHTTPRequestHandler):
        def _respond(self):
            length = int(self.headers.get("Content-Length") or 0)
            body = self.rfile.read(length) if length else b""
            status, payload = api.dispatch(self.command, self.path, body)
            encoded = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(encoded)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(encoded)

        do_GET = _respond
        do_POST = _respond

        def do_OPTIONS(self):  # CORS preflight for the embedded widget
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.end_headers()

        def log_message(self, fmt, *args):
            logger.info("%s - %s", self.address_string(), fmt % args)

    return ThreadingHTTPServer((host, port), Handler)
