"""Chat-completion client with live, replay and record transports.

Replay fixtures are JSON arrays of
``{"prompt_hash", "response_text", "input_tokens", "output_tokens"}`` keyed by
the sha256 of the system prompt followed by the user prompt.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from collections import defaultdict, deque
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Protocol

import httpx

DEFAULT_MODEL = "gpt-4o-mini"
EMPTY_MARK = "—"


class TransportError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(f"{kind}: {message}")
        self.kind = kind  # "auth" | "network" | "http" | "protocol" | "config"


class FixtureMiss(LookupError):
    pass


@dataclass(frozen=True)
class CompletionRequest:
    system_prompt: str
    user_prompt: str
    max_output_tokens: int = 4096
    temperature: float = 0.0

    def __post_init__(self):
        if not self.system_prompt.strip() or not self.user_prompt.strip():
            raise ValueError("prompts must be non-empty")

    @property
    def prompt_hash(self) -> str:
        return prompt_hash(self.system_prompt, self.user_prompt)


def prompt_hash(system_prompt: str, user_prompt: str) -> str:
    return hashlib.sha256((system_prompt + user_prompt).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class UsageRecord:
    input_tokens: int
    output_tokens: int
    request_id: str = ""

    def __post_init__(self):
        if self.input_tokens < 0 or self.output_tokens < 0:
            raise ValueError("token counts must be non-negative")

    @property
    def total(self) -> int:
        return self.input_tokens + self.output_tokens


class Transport(Protocol):
    def send(self, req: CompletionRequest) -> tuple[str, UsageRecord]: ...


class ReplayTransport:
    """Serves recorded responses; repeated hashes are replayed in recorded order."""

    def __init__(self, *paths: str | Path):
        """Paths may be fixture files or directories of ``*.json`` fixtures."""
        self._queues: dict[str, deque] = defaultdict(deque)
        self._lock = threading.Lock()
        files = []
        for p in map(Path, paths):
            files += sorted(p.glob("*.json")) if p.is_dir() else [p]
        for path in files:
            for entry in load_fixture(path):
                self._queues[entry["prompt_hash"]].append(entry)

    def send(self, req: CompletionRequest) -> tuple[str, UsageRecord]:
        h = req.prompt_hash
        with self._lock:
            queue = self._queues.get(h)
            if not queue:
                raise FixtureMiss(f"no recorded response for prompt hash {h}")
            entry = queue.popleft()
        return entry["response_text"], UsageRecord(entry["input_tokens"], entry["output_tokens"], f"replay:{h[:12]}")


def load_fixture(path: str | Path) -> list[dict]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, list):
        raise ValueError(f"{path}: fixture must be a JSON array")
    for i, e in enumerate(data):
        missing = {"prompt_hash", "response_text", "input_tokens", "output_tokens"} - set(e)
        if missing:
            raise ValueError(f"{path}[{i}]: missing {sorted(missing)}")
    return data


class LiveTransport:
    """One POST per request to a chat-completions style endpoint."""

    def __init__(self, endpoint: str, api_key: Optional[str], model: str = DEFAULT_MODEL,
                 timeout: float = 120.0, client: Optional[httpx.Client] = None):
        self.endpoint = endpoint
        self.api_key = api_key
        self.model = model
        self._client = client or httpx.Client(timeout=timeout)
        self._lock = threading.Lock()

    def send(self, req: CompletionRequest) -> tuple[str, UsageRecord]:
        if not self.api_key:
            raise TransportError("auth", "no API key configured (SYMTEE_LLM_API_KEY)")
        body = {
            "model": self.model,
            "messages": [{"role": "system", "content": req.system_prompt},
                         {"role": "user", "content": req.user_prompt}],
            "max_tokens": req.max_output_tokens,
            "temperature": req.temperature,
        }
        headers = {"Authorization": f"Bearer {self.api_key}"}
        with self._lock:
            try:
                resp = self._client.post(self.endpoint, json=body, headers=headers)
            except httpx.HTTPError as e:
                raise TransportError("network", str(e)) from e
        if resp.status_code in (401, 403):
            raise TransportError("auth", f"endpoint rejected credentials (HTTP {resp.status_code})")
        if resp.status_code >= 400:
            raise TransportError("http", f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            data = resp.json()
            text = data["choices"][0]["message"]["content"]
            usage = data.get("usage", {})
            return text, UsageRecord(int(usage.get("prompt_tokens", 0)), int(usage.get("completion_tokens", 0)),
                                     str(data.get("id", "")))
        except (ValueError, KeyError, IndexError, TypeError) as e:
            raise TransportError("protocol", f"unexpected response shape: {e}") from e


class RecordTransport:
    """Live calls whose exchanges are appended to a fixture file."""

    def __init__(self, live: Transport, fixture_path: str | Path):
        self.live = live
        self.path = Path(fixture_path)
        self._lock = threading.Lock()

    def send(self, req: CompletionRequest) -> tuple[str, UsageRecord]:
        text, usage = self.live.send(req)
        with self._lock:
            entries = load_fixture(self.path) if self.path.exists() else []
            entries.append({"prompt_hash": req.prompt_hash, "response_text": text,
                            "input_tokens": usage.input_tokens, "output_tokens": usage.output_tokens})
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text(json.dumps(entries, indent=2) + "\n", encoding="utf-8")
        return text, usage


class LlmClient:
    def __init__(self, transport: Transport):
        self.transport = transport

    def complete(self, req: CompletionRequest) -> tuple[str, UsageRecord]:
        return complete(req, self.transport)


def complete(req: CompletionRequest, transport: Transport) -> tuple[str, UsageRecord]:
    return transport.send(req)


def client_from_env(replay: Optional[list[str | Path]] = None, record: Optional[str | Path] = None,
                    environ=None) -> LlmClient:
    """Replay when fixture paths are given, otherwise live (optionally recording)."""
    if replay:
        return LlmClient(ReplayTransport(*replay))
    env = os.environ if environ is None else environ
    endpoint = env.get("SYMTEE_LLM_ENDPOINT")
    if not endpoint:
        raise TransportError("config", "SYMTEE_LLM_ENDPOINT is not set and no replay fixtures were given")
    live = LiveTransport(endpoint, env.get("SYMTEE_LLM_API_KEY"), env.get("SYMTEE_LLM_MODEL") or DEFAULT_MODEL)
    return LlmClient(RecordTransport(live, record) if record else live)


# ---- accounting -----------------------------------------------------------

@dataclass(frozen=True)
class UsageReport:
    per_case: tuple[tuple[str, int], ...]
    average_tokens: Optional[Fraction]
    estimated_cost: Fraction
    total_tokens: int

    def average_text(self) -> str:
        if self.average_tokens is None:
            return EMPTY_MARK
        return f"{round(self.average_tokens):,}"

    def average_cost_text(self) -> str:
        if not self.per_case:
            return EMPTY_MARK
        avg = self.estimated_cost / len(self.per_case)
        return f"${float(avg):.2f}" if avg >= Fraction(1, 100) or avg == 0 else f"${float(avg):.4f}"

    def render_text(self) -> str:
        lines = [f"{case:<32} {total:>10,}" for case, total in self.per_case]
        lines.append(f"{'average tokens':<32} {self.average_text():>10}")
        lines.append(f"{'average cost':<32} {self.average_cost_text():>10}")
        return "\n".join(lines) + "\n"


def usage_summary(records: list[tuple[str, list[UsageRecord]]], price_per_token=Fraction(0)) -> UsageReport:
    price = Fraction(str(price_per_token)) if isinstance(price_per_token, float) else Fraction(price_per_token)
    per_case = tuple((case, sum(r.total for r in recs)) for case, recs in records)
    total = sum(t for _, t in per_case)
    avg = Fraction(total, len(per_case)) if per_case else None
    return UsageReport(per_case, avg, total * price, total)


def sum_usage(records: list[UsageRecord]) -> UsageRecord:
    return UsageRecord(sum(r.input_tokens for r in records), sum(r.output_tokens for r in records),
                       "+".join(r.request_id for r in records if r.request_id))
