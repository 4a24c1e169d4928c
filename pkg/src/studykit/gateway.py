"""Multi-provider model gateway: quota-aware routing, fallback, cost.

Each provider carries four quota classes (requests and tokens, per minute and
per day) tracked in sliding windows. Routing walks free-tier providers before
paid ones, in priority order, and atomically reserves quota headroom at
decision time so concurrent admissions can never overshoot a window. Failed
transports fall through to the next admissible provider.

The deployment-cost calculator reproduces the classroom scenario arithmetic:
total calls = students x calls/day x days/week x weeks, priced per call.
"""

from __future__ import annotations

import json
import os
import threading
import urllib.request
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import (
    AllProvidersFailedError,
    ConfigError,
    ExhaustedError,
    TransportError,
    UnknownProviderError,
)
from .indexer import count_tokens

MINUTE = 60.0
DAY = 86400.0

DEFAULT_MAX_COMPLETION_TOKENS = 1024


class Tier(Enum):
    FREE = "Free"
    PAID = "Paid"


class RouteReason(Enum):
    PREFERRED = "Preferred"
    QUOTA_FALLBACK = "QuotaFallback"
    FAILURE_FALLBACK = "FailureFallback"


@dataclass(frozen=True)
class ProviderProfile:
    provider_id: str
    model_name: str
    requests_per_minute: int | None = None  # None = unlimited
    requests_per_day: int | None = None
    tokens_per_minute: int | None = None
    tokens_per_day: int | None = None
    price_in: float = 0.0  # currency per input token
    price_out: float = 0.0
    tier: Tier = Tier.FREE
    priority: int = 0
    endpoint: str | None = None
    key_env: str | None = None

    def __post_init__(self):
        for name in ("requests_per_minute", "requests_per_day", "tokens_per_minute", "tokens_per_day"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ConfigError(f"{self.provider_id}: {name} must be positive when bounded")
        if self.price_in < 0 or self.price_out < 0:
            raise ConfigError(f"{self.provider_id}: prices must be nonnegative")


def load_roster(path: str | Path) -> list[ProviderProfile]:
    """Read the provider roster JSON file. Secrets stay in env variables."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    profiles = []
    for entry in doc:
        profiles.append(
            ProviderProfile(
                provider_id=entry["provider_id"],
                model_name=entry["model_name"],
                requests_per_minute=entry.get("requests_per_minute"),
                requests_per_day=entry.get("requests_per_day"),
                tokens_per_minute=entry.get("tokens_per_minute"),
                tokens_per_day=entry.get("tokens_per_day"),
                price_in=entry.get("price_in", 0.0),
                price_out=entry.get("price_out", 0.0),
                tier=Tier(entry.get("tier", "Free")),
                priority=entry.get("priority", 0),
                endpoint=entry.get("endpoint"),
                key_env=entry.get("key_env"),
            )
        )
    if not profiles:
        raise ConfigError(f"provider roster {path} is empty")
    return profiles


def routing_order(profiles: list[ProviderProfile]) -> list[ProviderProfile]:
    """Free tiers first, then paid, each by ascending priority."""
    return sorted(profiles, key=lambda p: (p.tier is Tier.PAID, p.priority, p.provider_id))


@dataclass
class _ProviderUsage:
    events: deque = field(default_factory=deque)  # (timestamp, tokens)
    tokens_in: int = 0
    tokens_out: int = 0
    requests: int = 0
    cost: float = 0.0
    lock: threading.Lock = field(default_factory=threading.Lock)


@dataclass(frozen=True)
class Reservation:
    provider_id: str
    timestamp: float
    tokens: int


@dataclass(frozen=True)
class RouteDecision:
    provider_id: str
    reason: RouteReason
    reservation: Reservation


class UsageLedger:
    """Sliding-window usage counters and cumulative cost, per provider.

    Admission is a reserve: the estimated tokens are counted the moment a
    request is admitted, and reconciled to actual usage on completion. That
    makes the quota check sound under concurrent callers.
    """

    def __init__(self, profiles: list[ProviderProfile]):
        self.profiles = {p.provider_id: p for p in profiles}
        self._usage = {p.provider_id: _ProviderUsage() for p in profiles}

    def _require(self, provider_id: str) -> _ProviderUsage:
        if provider_id not in self._usage:
            raise UnknownProviderError(f"unknown provider {provider_id!r}")
        return self._usage[provider_id]

    @staticmethod
    def _prune(usage: _ProviderUsage, now: float) -> None:
        horizon = now - DAY
        while usage.events and usage.events[0][0] <= horizon:
            usage.events.popleft()

    @staticmethod
    def _window_counts(usage: _ProviderUsage, now: float) -> tuple[int, int, int, int]:
        req_min = tok_min = req_day = tok_day = 0
        minute_edge = now - MINUTE
        for ts, tokens in usage.events:
            req_day += 1
            tok_day += tokens
            if ts > minute_edge:
                req_min += 1
                tok_min += tokens
        return req_min, req_day, tok_min, tok_day

    def headroom(self, provider_id: str, tokens: int, now: float) -> bool:
        """Would one request of ``tokens`` fit all four windows right now?"""
        usage = self._require(provider_id)
        profile = self.profiles[provider_id]
        with usage.lock:
            self._prune(usage, now)
            req_min, req_day, tok_min, tok_day = self._window_counts(usage, now)
        return self._admits(profile, req_min, req_day, tok_min, tok_day, tokens)

    @staticmethod
    def _admits(profile, req_min, req_day, tok_min, tok_day, tokens) -> bool:
        checks = (
            (profile.requests_per_minute, req_min + 1),
            (profile.requests_per_day, req_day + 1),
            (profile.tokens_per_minute, tok_min + tokens),
            (profile.tokens_per_day, tok_day + tokens),
        )
        return all(limit is None or used <= limit for limit, used in checks)

    def reserve(self, provider_id: str, tokens: int, now: float) -> Reservation | None:
        """Atomically admit-and-count one request, or return None."""
        usage = self._require(provider_id)
        profile = self.profiles[provider_id]
        with usage.lock:
            self._prune(usage, now)
            req_min, req_day, tok_min, tok_day = self._window_counts(usage, now)
            if not self._admits(profile, req_min, req_day, tok_min, tok_day, tokens):
                return None
            usage.events.append([now, tokens])
            return Reservation(provider_id=provider_id, timestamp=now, tokens=tokens)

    def finalize(
        self,
        reservation: Reservation,
        tokens_in: int,
        tokens_out: int,
    ) -> None:
        """Reconcile a reservation to actual token usage and accrue cost."""
        profile = self.profiles[reservation.provider_id]
        usage = self._require(reservation.provider_id)
        actual = tokens_in + tokens_out
        with usage.lock:
            for event in reversed(usage.events):
                if event[0] == reservation.timestamp and event[1] == reservation.tokens:
                    event[1] = actual
                    break
            usage.requests += 1
            usage.tokens_in += tokens_in
            usage.tokens_out += tokens_out
            usage.cost += tokens_in * profile.price_in + tokens_out * profile.price_out

    def record_usage(
        self, provider_id: str, tokens_in: int, tokens_out: int, now: float
    ) -> None:
        """Count one completed call directly (no prior reservation)."""
        profile = self.profiles.get(provider_id)
        if profile is None:
            raise UnknownProviderError(f"unknown provider {provider_id!r}")
        usage = self._require(provider_id)
        with usage.lock:
            self._prune(usage, now)
            usage.events.append([now, tokens_in + tokens_out])
            usage.requests += 1
            usage.tokens_in += tokens_in
            usage.tokens_out += tokens_out
            usage.cost += tokens_in * profile.price_in + tokens_out * profile.price_out

    def retry_after(self, provider_id: str, now: float) -> float:
        """Seconds until the provider's oldest minute-window event expires."""
        usage = self._require(provider_id)
        with usage.lock:
            for ts, _ in usage.events:
                if ts > now - MINUTE:
                    return max(0.0, ts + MINUTE - now)
            if usage.events:
                return max(0.0, usage.events[0][0] + DAY - now)
        return 0.0

    def snapshot(self) -> dict:
        out = {}
        for pid, usage in self._usage.items():
            with usage.lock:
                out[pid] = {
                    "requests": usage.requests,
                    "tokens_in": usage.tokens_in,
                    "tokens_out": usage.tokens_out,
                    "cost": usage.cost,
                }
        return out

    @property
    def total_cost(self) -> float:
        return sum(u["cost"] for u in self.snapshot().values())


def route(
    estimated_tokens: int,
    ledger: UsageLedger,
    profiles: list[ProviderProfile],
    now: float,
) -> RouteDecision:
    """Pick the first provider (free tiers first) with quota headroom.

    The chosen provider's quota is reserved as part of the decision.
    """
    if not profiles:
        raise ConfigError("no providers configured")
    rejected = False
    for profile in routing_order(profiles):
        reservation = ledger.reserve(profile.provider_id, estimated_tokens, now)
        if reservation is not None:
            reason = RouteReason.QUOTA_FALLBACK if rejected else RouteReason.PREFERRED
            return RouteDecision(profile.provider_id, reason, reservation)
        rejected = True
    retry = min(ledger.retry_after(p.provider_id, now) for p in profiles)
    raise ExhaustedError("all providers over quota", retry_after=retry)


@dataclass(frozen=True)
class Completion:
    text: str
    provider_id: str
    model_name: str
    tokens_in: int
    tokens_out: int
    reason: RouteReason


def invoke(
    prompt: str,
    profiles: list[ProviderProfile],
    ledger: UsageLedger,
    transport,
    now: float,
    max_completion_tokens: int = DEFAULT_MAX_COMPLETION_TOKENS,
) -> Completion:
    """Route, call, and record one completion, falling back on failure.

    One attempt per provider per request. Failed attempts keep their quota
    reservation (the upstream call was made) and the next admissible provider
    is tried with reason FailureFallback.
    """
    estimated = count_tokens(prompt) + max_completion_tokens
    causes: dict[str, str] = {}
    failed = False
    remaining = list(routing_order(profiles))
    while remaining:
        try:
            decision = route(estimated, ledger, remaining, now)
        except ExhaustedError:
            if causes:
                raise AllProvidersFailedError(
                    "every admissible provider failed", causes=causes
                ) from None
            raise
        profile = ledger.profiles[decision.provider_id]
        try:
            text, tokens_in, tokens_out = transport.complete(profile, prompt)
        except TransportError as exc:
            causes[profile.provider_id] = str(exc)
            ledger.finalize(decision.reservation, count_tokens(prompt), 0)
            remaining = [p for p in remaining if p.provider_id != profile.provider_id]
            failed = True
            continue
        ledger.finalize(decision.reservation, tokens_in, tokens_out)
        reason = RouteReason.FAILURE_FALLBACK if failed else decision.reason
        return Completion(
            text=text,
            provider_id=profile.provider_id,
            model_name=profile.model_name,
            tokens_in=tokens_in,
            tokens_out=tokens_out,
            reason=reason,
        )
    raise AllProvidersFailedError("every provider failed", causes=causes)


# --- transports ---


class StubTransport:
    """Deterministic scripted transport for tests and offline runs.

    ``script`` entries are either completion strings or exceptions; a callable
    ``generate(profile, prompt)`` handles calls beyond the script.
    """

    def __init__(self, script: list | None = None, generate=None):
        self.script = list(script or [])
        self.generate = generate
        self.calls: list[tuple[str, str]] = []

    def complete(self, profile: ProviderProfile, prompt: str) -> tuple[str, int, int]:
        self.calls.append((profile.provider_id, prompt))
        if self.script:
            item = self.script.pop(0)
            if isinstance(item, Exception):
                raise item
            text = item
        elif self.generate is not None:
            text = self.generate(profile, prompt)
        else:
            raise TransportError(f"stub has no response for {profile.provider_id}")
        return text, count_tokens(prompt), count_tokens(text)


class HttpJsonTransport:
    """Generic JSON-over-HTTP transport driven entirely by the roster entry.

    The request body is a JSON template with ``{model}`` and ``{prompt}``
    placeholders; the completion text is pulled from the response by a dotted
    path (list indices allowed), defaulting to OpenAI-style
    ``choices.0.message.content``.
    """

    def __init__(
        self,
        body_template: str = '{{"model": {model}, "messages": [{{"role": "user", "content": {prompt}}}]}}',
        text_path: str = "choices.0.message.content",
        timeout: float = 60.0,
    ):
        self.body_template = body_template
        self.text_path = text_path
        self.timeout = timeout

    def complete(self, profile: ProviderProfile, prompt: str) -> tuple[str, int, int]:
        if not profile.endpoint:
            raise TransportError(f"provider {profile.provider_id!r} has no endpoint")
        body = self.body_template.format(
            model=json.dumps(profile.model_name), prompt=json.dumps(prompt)
        )
        headers = {"Content-Type": "application/json"}
        if profile.key_env:
            key = os.environ.get(profile.key_env, "")
            if not key:
                raise TransportError(
                    f"provider {profile.provider_id!r}: env var {profile.key_env} not set"
                )
            headers["Authorization"] = f"Bearer {key}"
        request = urllib.request.Request(
            profile.endpoint, data=body.encode("utf-8"), headers=headers, method="POST"
        )
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                payload = json.loads(response.read().decode("utf-8"))
        except Exception as exc:  # network and decode failures alike
            raise TransportError(f"{profile.provider_id}: {exc}") from exc
        node = payload
        try:
            for part in self.text_path.split("."):
                node = node[int(part)] if part.isdigit() else node[part]
        except (KeyError, IndexError, TypeError):
            raise TransportError(
                f"{profile.provider_id}: response missing {self.text_path!r}"
            ) from None
        if not isinstance(node, str):
            raise TransportError(f"{profile.provider_id}: completion is not text")
        usage = payload.get("usage", {}) if isinstance(payload, dict) else {}
        tokens_in = usage.get("prompt_tokens", count_tokens(prompt))
        tokens_out = usage.get("completion_tokens", count_tokens(node))
        return node, tokens_in, tokens_out


# --- deployment cost calculator ---


@dataclass(frozen=True)
class CostBreakdown:
    total_calls: int
    in_cost: float
    out_cost: float

    @property
    def total_cost(self) -> float:
        return self.in_cost + self.out_cost


def estimate_cost(
    students: int,
    calls_per_day: int,
    days_per_week: int,
    weeks: int,
    price_in_per_call: float,
    price_out_per_call: float,
    total_calls: int | None = None,
) -> CostBreakdown:
    """Classroom deployment cost; ``total_calls`` may be overridden."""
    for name, value in (
        ("students", students),
        ("calls_per_day", calls_per_day),
        ("days_per_week", days_per_week),
        ("weeks", weeks),
    ):
        if value <= 0:
            raise ValueError(f"{name} must be positive")
    if total_calls is None:
        total_calls = students * calls_per_day * days_per_week * weeks
    return CostBreakdown(
        total_calls=total_calls,
        in_cost=total_calls * price_in_per_call,
        out_cost=total_calls * price_out_per_call,
    )
