"""studykit: a self-hostable adaptive learning companion engine."""

from .config import EngineConfig, load_config
from .engine import Engine, ingest_corpus, load_corpus
from .indexer import SectionIndex, count_tokens, fingerprint, index_document, normalize
from .matcher import MatchResult, levenshtein, match_top_k, similarity
from .quiz import DifficultyLevel, Quiz, QuizResult, grade_quiz, parse_quiz_response

__all__ = [
    "Engine",
    "EngineConfig",
    "DifficultyLevel",
    "MatchResult",
    "Quiz",
    "QuizResult",
    "SectionIndex",
    "count_tokens",
    "fingerprint",
    "grade_quiz",
    "index_document",
    "ingest_corpus",
    "levenshtein",
    "load_config",
    "load_corpus",
    "match_top_k",
    "normalize",
    "parse_quiz_response",
    "similarity",
]

__version__ = "0.1.0"
