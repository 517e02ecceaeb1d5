"""Provider abstraction for the authoring assistant.

The wire contract is a minimal chat-completion shape: a ``messages`` array
of ``{role, content, tool_calls?, tool_call_id?}`` plus ``tools``
definitions; the provider returns one assistant message that may carry
``tool_calls``. ``HttpProvider`` adapts any endpoint speaking that shape;
``MockProvider`` replays a script for tests and demos. API keys come from
an environment variable and are never logged or persisted.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from ..errors import ProviderError


@dataclass
class ToolCall:
    id: str
    name: str
    arguments: dict

    def to_dict(self) -> dict:
        return {"id": self.id, "type": "function",
                "function": {"name": self.name,
                             "arguments": json.dumps(self.arguments)}}


@dataclass
class ChatTurn:
    role: str                      # system | user | assistant | tool
    content: str = ""
    tool_calls: list = field(default_factory=list)   # ToolCall list
    tool_call_id: str | None = None

    def to_dict(self) -> dict:
        out = {"role": self.role, "content": self.content}
        if self.tool_calls:
            out["tool_calls"] = [tc.to_dict() for tc in self.tool_calls]
        if self.tool_call_id:
            out["tool_call_id"] = self.tool_call_id
        return out


@dataclass
class ProviderConfig:
    endpoint: str = ""
    model: str = ""
    api_key_env: str = "TEMPOQL_API_KEY"
    max_tool_iterations: int = 6
    timeout: float = 60.0

    @staticmethod
    def from_file(path) -> "ProviderConfig | MockProvider":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        if raw.get("type") == "mock":
            return MockProvider.from_script(raw.get("script", []))
        return ProviderConfig(
            endpoint=raw.get("endpoint", ""),
            model=raw.get("model", ""),
            api_key_env=raw.get("api_key_env", "TEMPOQL_API_KEY"),
            max_tool_iterations=int(raw.get("max_tool_iterations", 6)),
            timeout=float(raw.get("timeout", 60.0)),
        )


class HttpProvider:
    """POSTs the conversation to a chat-completion endpoint."""

    def __init__(self, config: ProviderConfig):
        self.config = config
        self.max_tool_iterations = config.max_tool_iterations

    def send(self, messages: list[ChatTurn], tools: list[dict]) -> ChatTurn:
        import httpx

        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.config.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        payload = {
            "model": self.config.model,
            "messages": [m.to_dict() for m in messages],
        }
        if tools:
            payload["tools"] = tools
        last_exc = None
        for _ in range(2):  # one retry on transport failure
            try:
                resp = httpx.post(self.config.endpoint, json=payload,
                                  headers=headers, timeout=self.config.timeout)
                resp.raise_for_status()
                return _parse_completion(resp.json())
            except httpx.TransportError as exc:
                last_exc = exc
                continue
            except httpx.HTTPStatusError as exc:
                raise ProviderError(
                    f"provider returned {exc.response.status_code}") from exc
        raise ProviderError(f"provider unreachable: {last_exc}") from last_exc


def _parse_completion(body: dict) -> ChatTurn:
    try:
        msg = body["choices"][0]["message"]
    except (KeyError, IndexError, TypeError) as exc:
        raise ProviderError("malformed provider response") from exc
    calls = []
    for tc in msg.get("tool_calls") or []:
        fn = tc.get("function", {})
        try:
            args = json.loads(fn.get("arguments") or "{}")
        except json.JSONDecodeError:
            args = {}
        calls.append(ToolCall(id=tc.get("id", ""), name=fn.get("name", ""),
                              arguments=args))
    return ChatTurn(role="assistant", content=msg.get("content") or "",
                    tool_calls=calls)


class MockProvider:
    """Replays a fixed list of assistant turns; deterministic by design."""

    def __init__(self, turns: list[ChatTurn], max_tool_iterations: int = 6):
        self.turns = list(turns)
        self.pos = 0
        self.max_tool_iterations = max_tool_iterations
        self.requests: list[list[ChatTurn]] = []

    @staticmethod
    def from_script(script: list[dict]) -> "MockProvider":
        turns = []
        for step in script:
            calls = [ToolCall(id=c.get("id", f"call_{i}"), name=c["name"],
                              arguments=c.get("arguments", {}))
                     for i, c in enumerate(step.get("tool_calls", []))]
            turns.append(ChatTurn(role="assistant",
                                  content=step.get("content", ""),
                                  tool_calls=calls))
        return MockProvider(turns)

    def send(self, messages: list[ChatTurn], tools: list[dict]) -> ChatTurn:
        self.requests.append(list(messages))
        if self.pos >= len(self.turns):
            return ChatTurn(role="assistant", content="")
        turn = self.turns[self.pos]
        self.pos += 1
        return turn
