"""The generate / explain / fix flows and the concept-search tool loop.

The model never sees row data: its context is the dataset specification
rendering (tables, fields, scopes, comments) and whatever concept metadata
it requests through the ``search_concepts`` tool. Responses are mined for
``tempoql`` code fences, each parse-validated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from ..dataset.catalog import search_concepts
from ..errors import ParseError
from ..lang import parse
from .providers import ChatTurn, ToolCall

SEARCH_CONCEPTS_TOOL = {
    "type": "function",
    "function": {
        "name": "search_concepts",
        "description": ("Search for concepts that match a given query. "
                        "Returns a list of up to 100 concept names that match "
                        "the query."),
        "parameters": {
            "type": "object",
            "properties": {
                "query": {"type": "string",
                          "description": "Substring or /regex/ to search concept names for"},
                "scope": {"type": "string",
                          "description": "Restrict the search to one scope"},
            },
            "required": ["query"],
        },
    },
}


@dataclass
class CandidateQuery:
    text: str
    valid: bool
    error: str | None = None


@dataclass
class AssistantOutcome:
    queries: list = field(default_factory=list)     # CandidateQuery list
    prose: str = ""
    transcript: list = field(default_factory=list)  # ChatTurn list
    tool_call_count: int = 0
    diagnostics: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "queries": [vars(q) for q in self.queries],
            "prose": self.prose,
            "transcript": [t.to_dict() for t in self.transcript],
            "tool_call_count": self.tool_call_count,
            "diagnostics": self.diagnostics,
        }


def _prompt(name: str) -> str:
    return resources.files("tempoql.assistant.prompts").joinpath(name).read_text(
        encoding="utf-8")


def build_dataset_info(spec) -> str:
    """Schema-level rendering of the specification: tables, fields, scopes,
    attribute names, comments. Never any row data."""
    lines = []
    for t in spec.tables:
        kind = {"attribute-map": "attributes", "event": "events",
                "interval": "intervals"}[t.kind]
        lines.append(f"Table {t.source} (scope: {t.scope}, provides {kind})")
        if t.kind == "attribute-map":
            names = ", ".join(t.attributes.keys())
            lines.append(f"  attributes: {names}")
        else:
            fields_desc = []
            if t.time_field:
                fields_desc.append(f"time: {t.time_field}")
            if t.start_time_field:
                fields_desc.append(f"start: {t.start_time_field}, end: {t.end_time_field}")
            if t.concept_id_field:
                fields_desc.append(f"concepts via column {t.concept_id_field}")
            if t.type_field:
                fields_desc.append(f"element types from column {t.type_field}")
            if t.default_value_field:
                fields_desc.append(f"default value column {t.default_value_field}")
            if fields_desc:
                lines.append("  " + "; ".join(fields_desc))
        if t.comment:
            lines.append(f"  note: {' '.join(t.comment.split())}")
    for v in spec.vocabularies:
        scopes = ", ".join(v.scope_list())
        lines.append(f"Vocabulary {v.source} maps concept ids to names for "
                     f"scope(s): {scopes}")
    return "\n".join(lines)


def build_system_prompt(spec) -> str:
    return _prompt("base_prompt.txt").replace("<DATASET_INFO>", build_dataset_info(spec))


def _flow_prompt(flow: str, payload) -> str:
    if flow == "generate":
        return _prompt("generate_suffix.txt").replace("<INSTRUCTION>", str(payload))
    if flow == "explain":
        return _prompt("explain_suffix.txt").replace("<QUERY>", str(payload))
    if flow == "fix":
        query_text, error_text = payload
        return (_prompt("fix_suffix.txt")
                .replace("<QUERY>", str(query_text))
                .replace("<ERROR>", str(error_text)))
    raise ValueError(f"unknown flow {flow!r}")


def run_tool_loop(flow: str, payload, provider, spec, catalog) -> AssistantOutcome:
    """Drive the conversation until the model stops calling tools (or the
    iteration cap is reached), then mine and validate code fences."""
    transcript = [
        ChatTurn(role="system", content=build_system_prompt(spec)),
        ChatTurn(role="user", content=_flow_prompt(flow, payload)),
    ]
    outcome = AssistantOutcome()
    cap = getattr(provider, "max_tool_iterations", 6)
    final = None
    for _ in range(cap):
        reply = provider.send(transcript, [SEARCH_CONCEPTS_TOOL])
        transcript.append(reply)
        if not reply.tool_calls:
            final = reply
            break
        for call in reply.tool_calls:
            outcome.tool_call_count += 1
            transcript.append(_run_tool(call, catalog))
    else:
        outcome.diagnostics.append(
            f"stopped after {cap} tool iterations without a final answer")
    outcome.transcript = transcript
    if final is not None:
        outcome.prose = final.content
        for block in extract_code_blocks(final.content):
            try:
                parse(block)
                outcome.queries.append(CandidateQuery(text=block, valid=True))
            except ParseError as exc:
                outcome.queries.append(CandidateQuery(
                    text=block, valid=False, error=str(exc)))
    return outcome


def _run_tool(call: ToolCall, catalog) -> ChatTurn:
    if call.name != "search_concepts":
        return ChatTurn(role="tool", tool_call_id=call.id,
                        content=json.dumps({"error": f"unknown tool {call.name!r}"}))
    query = str(call.arguments.get("query", ""))
    scope = call.arguments.get("scope")
    try:
        result = search_concepts(catalog, query, scope)
        body = {
            "concepts": [e.to_dict() for e in result.entries],
            "truncated": result.truncated,
        }
    except Exception as exc:
        body = {"error": str(exc)}
    return ChatTurn(role="tool", tool_call_id=call.id,
                    content=json.dumps(body, ensure_ascii=False))


def extract_code_blocks(response: str) -> list[str]:
    """All fenced blocks tagged ``tempoql``, in order; other fences are
    ignored. Inner backticks are preserved verbatim."""
    out = []
    lines = (response or "").split("\n")
    i = 0
    while i < len(lines):
        stripped = lines[i].strip()
        if stripped.startswith("```"):
            lang = stripped[3:].strip().lower()
            body = []
            i += 1
            while i < len(lines) and not lines[i].strip().startswith("```"):
                body.append(lines[i])
                i += 1
            if lang == "tempoql":
                out.append("\n".join(body).strip())
        i += 1
    return out
