"""Exception hierarchy shared across the engine.

Every error carries a stable machine-readable ``code`` so the service layer
can map failures to structured JSON responses without string matching.
"""

from __future__ import annotations


class StudykitError(Exception):
    """Base class for all engine errors."""

    code = "error"

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> dict:
        payload = {"code": self.code, "message": self.message}
        if self.details:
            payload["details"] = self.details
        return payload


# --- content indexing ---

class MarkupError(StudykitError):
    """Document markup could not be parsed; carries line/position."""

    code = "malformed-markup"

    def __init__(self, message: str, line: int, column: int):
        super().__init__(message, line=line, column=column)
        self.line = line
        self.column = column


class EmptyDocumentError(StudykitError):
    code = "empty-document"


class EmptyTextError(StudykitError):
    """Raised by fingerprint() on empty text; callers skip the paragraph."""

    code = "empty-text"


# --- fuzzy matching ---

class EmptyIndexError(StudykitError):
    code = "empty-index"


class EmptyQueryError(StudykitError):
    code = "empty-query"


class BothEmptyError(StudykitError):
    """similarity() is undefined when both strings are empty."""

    code = "both-empty"


# --- context selection ---

class BudgetTooSmallError(StudykitError):
    code = "budget-too-small"


# --- quiz engine ---

class QuizParseError(StudykitError):
    """Base for structured model-output defects; signals regeneration."""

    code = "quiz-parse-error"


class NoJsonFoundError(QuizParseError):
    code = "no-json-found"


class SchemaViolationError(QuizParseError):
    code = "schema-violation"

    def __init__(self, message: str, path: str):
        super().__init__(message, path=path)
        self.path = path


class WrongQuestionCountError(QuizParseError):
    code = "wrong-question-count"


class AmbiguousCorrectAnswerError(QuizParseError):
    code = "ambiguous-correct-answer"


class EmptyContextError(StudykitError):
    code = "empty-context"


class GradingError(StudykitError):
    code = "grading-error"


class WrongResponseCountError(GradingError):
    code = "wrong-response-count"


class ResponseIndexError(GradingError):
    code = "index-out-of-range"


# --- question bank ---

class UnknownQuizIdError(StudykitError):
    code = "unknown-quiz-id"


class DuplicateQuizIdError(StudykitError):
    code = "duplicate-quiz-id"


# --- gateway ---

class UnknownProviderError(StudykitError):
    code = "unknown-provider"


class ExhaustedError(StudykitError):
    """All providers over quota; ``retry_after`` hints seconds until headroom."""

    code = "exhausted"

    def __init__(self, message: str, retry_after: float | None = None):
        super().__init__(message, retry_after=retry_after)
        self.retry_after = retry_after


class TransportError(StudykitError):
    """A provider call failed at the transport level (network, bad payload)."""

    code = "transport-error"


class AllProvidersFailedError(StudykitError):
    code = "all-providers-failed"

    def __init__(self, message: str, causes: dict[str, str]):
        super().__init__(message, causes=causes)
        self.causes = causes


# --- learner model ---

class UnknownSectionError(StudykitError):
    code = "unknown-section"


class UnknownChapterError(StudykitError):
    code = "unknown-chapter"


# --- attestation ---

class MissingSecretError(StudykitError):
    code = "missing-secret"


class DuplicateReportIdError(StudykitError):
    code = "duplicate-report-id"


# --- service ---

class UnknownQuizError(StudykitError):
    code = "unknown-quiz"


class CorpusNotLoadedError(StudykitError):
    code = "corpus-not-loaded"


class ValidationError(StudykitError):
    code = "validation-error"


class GenerationFailedError(StudykitError):
    code = "generation-failed"


class ConfigError(StudykitError):
    code = "config-error"
