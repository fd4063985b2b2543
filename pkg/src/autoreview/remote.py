"""Client for a remote text-completion model, plus backends built on it.

The built-in deterministic parsers do all the work by default; these
backends exist so a hosted model can slot into extraction, alternative
selection, and transcript correction through one documented envelope:

    request:  {"model": ..., "prompt": ..., "max_tokens": ...}
    response: {"completion": "{\"Output\": <value>}"}

The completion must itself parse as JSON with an "Output" key; anything
else counts as malformed and triggers the deterministic fallback after
bounded retries.
"""
from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Optional, Sequence

import httpx

from .core import FieldSpec, NOT_PROVIDED
from .extraction import BuiltinExtractionBackend, normalize_lenient


class RemoteBackendError(RuntimeError):
    pass


def load_template(name: str) -> str:
    return resources.files("autoreview").joinpath(f"templates/{name}.txt").read_text("utf-8")


class TokenBucket:
    """Shared rate limiter: concurrent callers block until a token frees up."""

    def __init__(
        self,
        rate_per_second: float,
        burst: int = 4,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if rate_per_second <= 0:
            raise ValueError("rate_per_second must be positive")
        self.rate = rate_per_second
        self.capacity = float(burst)
        self._tokens = float(burst)
        self._updated = clock()
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._clock()
                self._tokens = min(self.capacity, self._tokens + (now - self._updated) * self.rate)
                self._updated = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.rate
            self._sleep(wait)


@dataclass
class RemoteModelClient:
    endpoint: str
    model: str = "default"
    auth_token: Optional[str] = None
    timeout: float = 10.0
    max_attempts: int = 3
    transport: Optional[httpx.BaseTransport] = None
    # shared across all backends built on this client
    rate_limiter: Optional[TokenBucket] = None
    max_in_flight: int = 8
    _in_flight: threading.Semaphore = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._in_flight = threading.Semaphore(max(1, self.max_in_flight))

    def complete(self, prompt: str) -> str:
        headers = {}
        if self.auth_token:
            headers["Authorization"] = f"Bearer {self.auth_token}"
        last_error: Optional[Exception] = None
        for _ in range(self.max_attempts):
            if self.rate_limiter is not None:
                self.rate_limiter.acquire()
            with self._in_flight:
                try:
                    with httpx.Client(transport=self.transport, timeout=self.timeout) as client:
                        response = client.post(
                            self.endpoint,
                            json={"model": self.model, "prompt": prompt, "max_tokens": 256},
                            headers=headers,
                        )
                    response.raise_for_status()
                    return response.json()["completion"]
                except (httpx.HTTPError, KeyError, ValueError) as err:
                    last_error = err
        raise RemoteBackendError(f"remote model failed after {self.max_attempts} attempts: {last_error}")


def parse_output_envelope(completion: str) -> Optional[str]:
    """The documented output envelope: a JSON object with an "Output" key."""
    try:
        data = json.loads(completion)
    except json.JSONDecodeError:
        return None
    if not isinstance(data, dict) or "Output" not in data:
        return None
    value = data["Output"]
    return value if isinstance(value, str) else None


class RemoteExtractionBackend:
    """Prompted extraction with deterministic fallback on failure."""

    def __init__(self, client: RemoteModelClient):
        self.client = client
        self.fallback = BuiltinExtractionBackend()

    def extract(self, texts: Sequence[str], spec: FieldSpec) -> str:
        template = load_template("extract_field")
        prompt = template.format(
            field_id=spec.field_id,
            transcript="\n".join(texts),
        )
        try:
            completion = self.client.complete(prompt)
        except RemoteBackendError:
            return self.fallback.extract(texts, spec)
        value = parse_output_envelope(completion)
        if value is None:
            return self.fallback.extract(texts, spec)
        if not value or value.lower() in ("not provided", "none", "n/a"):
            return NOT_PROVIDED
        return normalize_lenient(value, spec)


class RemoteSelectionBackend:
    """Prompted best-alternative selection for pseudo-labeling."""

    def __init__(self, client: RemoteModelClient):
        self.client = client

    def select(self, alternatives: Sequence[str], gold: str) -> Optional[int]:
        template = load_template("select_alternative")
        prompt = template.format(
            alternatives=" # ".join(alternatives),
            value=gold,
        )
        try:
            completion = self.client.complete(prompt)
        except RemoteBackendError:
            return None
        value = parse_output_envelope(completion)
        if value is None:
            return None
        for i, alternative in enumerate(alternatives):
            if alternative == value:
                return i
        return None


class RemoteCorrectionBackend:
    """Prompted transcript correction for pseudo-labeling."""

    def __init__(self, client: RemoteModelClient):
        self.client = client

    def correct(self, best_text: str, gold: str) -> Optional[str]:
        template = load_template("correct_transcript")
        prompt = template.format(transcript=best_text, value=gold)
        try:
            completion = self.client.complete(prompt)
        except RemoteBackendError:
            return None
        return parse_output_envelope(completion)


class RemoteFusionBackend:
    """Prompted n-best fusion mirroring the built-in corrector's interface."""

    def __init__(self, client: RemoteModelClient):
        self.client = client

    def fuse(self, alternatives: Sequence[str]) -> Optional[str]:
        template = load_template("fuse_alternatives")
        prompt = template.format(alternatives=" # ".join(alternatives))
        try:
            completion = self.client.complete(prompt)
        except RemoteBackendError:
            return None
        return parse_output_envelope(completion)
