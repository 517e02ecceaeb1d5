"""Lexer for query text.

Produces a flat token list with spans. Two regions get special treatment:

* ``{...}`` element queries are scanned with a criterion sub-lexer, because
  their interior follows different rules (bare multi-word names, ``;``
  separators, slashes inside concept names). The whole query becomes a
  single ``element`` token carrying parsed criteria.
* ``/pattern/flags`` regex literals are single tokens. A ``/`` starts a
  regex only where a value could not have just ended, so ``5 / 9`` stays a
  division.

Keywords are case-insensitive; identifiers keep their case.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import ParseError
from .nodes import ElementCriterion, Pattern
from .regexes import PatternSyntaxError, validate_flags, validate_pattern

UNIT_WORDS = {
    "s": "seconds", "sec": "seconds", "secs": "seconds",
    "second": "seconds", "seconds": "seconds",
    "min": "minutes", "mins": "minutes", "minute": "minutes", "minutes": "minutes",
    "h": "hours", "hr": "hours", "hrs": "hours", "hour": "hours", "hours": "hours",
    "d": "days", "day": "days", "days": "days",
    "week": "weeks", "weeks": "weeks",
    "year": "years", "years": "years",
}

MONTH_WORDS = {"month", "months", "mo"}

AGG_WORDS = {
    "sum", "mean", "median", "min", "max", "first", "last",
    "any", "all", "exists", "count", "integral",
}

KEYWORDS = {
    "and", "or", "not", "case", "when", "then", "else", "end",
    "where", "impute", "carry", "cut", "bins", "named", "with", "as",
    "between", "in", "from", "to", "every", "at", "before", "after",
    "distinct", "nonnull", "rate", "amount", "true", "false",
    "contains", "matches", "startswith", "endswith",
}

MARKERS = {"now", "mintime", "maxtime", "value"}

_PUNCT = ("<=", ">=", "!=", "+", "-", "*", "/", "^", "=", "<", ">", "(", ")", "[", "]", ",")

_NUMBER_RE = re.compile(r"\d+(\.\d+)?([eE][+-]?\d+)?")
_WORD_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass
class Token:
    kind: str          # number|string|regex|ident|unit|marker|element|aggfn|keyword|op|eof
    text: str
    span: tuple
    value: object = None   # parsed payload (float, str, Pattern, criteria list, ...)
    norm: str = field(default="")

    def __post_init__(self):
        if not self.norm:
            self.norm = self.text.lower()


def tokenize(text: str) -> list[Token]:
    """Tokenize query text; raises ParseError on malformed lexemes."""
    toks: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c == "{":
            tok, i = _scan_element(text, i)
            toks.append(tok)
            continue
        if c in "'\"":
            s, j = _scan_string(text, i)
            toks.append(Token("string", text[i:j], (i, j), value=s))
            i = j
            continue
        if c == "/" and _regex_position(toks):
            pat, flags, j = _scan_regex(text, i)
            toks.append(Token("regex", text[i:j], (i, j), value=Pattern("regex", pat, flags)))
            i = j
            continue
        if c == "#":
            m = _WORD_RE.match(text, i + 1)
            word = m.group(0).lower() if m else ""
            if word not in MARKERS:
                raise ParseError(f"unknown marker '#{word}'", (i, (m.end() if m else i + 1)),
                                 ["#now", "#mintime", "#maxtime", "#value"])
            toks.append(Token("marker", text[i:m.end()], (i, m.end()), value=word))
            i = m.end()
            continue
        if c.isdigit():
            m = _NUMBER_RE.match(text, i)
            toks.append(Token("number", m.group(0), (i, m.end()), value=float(m.group(0))))
            i = m.end()
            continue
        m = _WORD_RE.match(text, i)
        if m:
            word = m.group(0)
            low = word.lower()
            span = (i, m.end())
            if low in MONTH_WORDS:
                raise ParseError(
                    "'months' is not a duration unit (month lengths are ambiguous)",
                    span, hint="use days instead, e.g. '30 days'")
            if low in UNIT_WORDS and not (
                    low == "min" and (not toks or toks[-1].kind != "number")):
                # "min" doubles as an aggregation function; it is the
                # minutes unit only straight after a number ("30 min").
                toks.append(Token("unit", word, span, value=UNIT_WORDS[low]))
            elif low in AGG_WORDS:
                toks.append(Token("aggfn", word, span, value=low))
            elif low in KEYWORDS:
                toks.append(Token("keyword", word, span, value=low))
            else:
                toks.append(Token("ident", word, span, value=word))
            i = m.end()
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append(Token("op", p, (i, i + len(p))))
                i += len(p)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", (i, i + 1))
    toks.append(Token("eof", "", (n, n)))
    return toks


def _regex_position(toks: list[Token]) -> bool:
    """A '/' begins a regex unless the previous token could end a value."""
    if not toks:
        return True
    prev = toks[-1]
    if prev.kind in ("number", "string", "ident", "unit", "marker", "element", "regex"):
        return False
    if prev.kind == "op" and prev.text in (")", "]"):
        return False
    if prev.kind == "keyword" and prev.value in ("true", "false", "end"):
        return False
    return True


def _scan_string(text: str, i: int) -> tuple[str, int]:
    quote = text[i]
    j = i + 1
    out: list[str] = []
    while j < len(text):
        c = text[j]
        if c == "\\" and j + 1 < len(text):
            nxt = text[j + 1]
            out.append({"n": "\n", "t": "\t"}.get(nxt, nxt))
            j += 2
            continue
        if c == quote:
            return "".join(out), j + 1
        out.append(c)
        j += 1
    raise ParseError("unterminated string", (i, len(text)))


def _scan_regex(text: str, i: int) -> tuple[str, str, int]:
    j = i + 1
    while j < len(text):
        c = text[j]
        if c == "\\" and j + 1 < len(text):
            j += 2
            continue
        if c == "/":
            pat = text[i + 1:j]
            j += 1
            k = j
            while k < len(text) and text[k].isalpha():
                k += 1
            flags = text[j:k]
            try:
                flags = validate_flags(flags)
                validate_pattern(pat)
            except PatternSyntaxError as exc:
                raise ParseError(f"unsupported regex: {exc}", (i, k)) from exc
            return pat, flags, k
        j += 1
    raise ParseError("unterminated regex literal", (i, len(text)))


# --- element query sub-lexer -------------------------------------------------

_FIELD_RE = re.compile(
    r"\s*(name|id|scope|type|value)\s*(=|in\b|contains\b|matches\b|startswith\b|endswith\b)",
    re.IGNORECASE,
)

_EQ_RELATION_FIELDS = {"scope", "type", "value"}
_TYPE_WORDS = {
    "attribute": "attribute", "attributes": "attribute",
    "event": "event", "events": "event",
    "interval": "interval", "intervals": "interval",
}


def _scan_element(text: str, i: int) -> tuple[Token, int]:
    """Scan a `{...}` element query into a single token with parsed criteria."""
    j = i + 1
    chunks: list[tuple[int, int]] = []
    chunk_start = j
    last_word = ""
    while j < len(text):
        c = text[j]
        if c in "'\"":
            _, j = _scan_string(text, j)
            last_word = "\0"
            continue
        if c == "/" and last_word.lower() in ("contains", "matches", "startswith", "endswith"):
            _, _, j = _scan_regex(text, j)
            last_word = "\0"
            continue
        if c == ";":
            chunks.append((chunk_start, j))
            chunk_start = j + 1
            j += 1
            last_word = ""
            continue
        if c == "}":
            chunks.append((chunk_start, j))
            live = [(s, e) for s, e in chunks if text[s:e].strip()]
            criteria = [
                _parse_criterion(text, s, e, first=(k == 0))
                for k, (s, e) in enumerate(live)
            ]
            if not criteria:
                raise ParseError("empty element query", (i, j + 1))
            shorthand = (criteria[0].field == "name"
                         and criteria[0].relation == "equals"
                         and not _FIELD_RE.match(text[live[0][0]:live[0][1]]))
            tok = Token("element", text[i:j + 1], (i, j + 1),
                        value=(criteria, shorthand))
            return tok, j + 1
        m = _WORD_RE.match(text, j)
        if m:
            last_word = m.group(0)
            j = m.end()
            continue
        if not c.isspace():
            last_word = "\0"
        j += 1
    raise ParseError("unterminated element query (missing '}')", (i, len(text)))


def _parse_criterion(text: str, s: int, e: int, first: bool) -> ElementCriterion:
    chunk = text[s:e]
    m = _FIELD_RE.match(chunk)
    if not m:
        name = chunk.strip()
        if not first:
            raise ParseError(
                "expected 'field relation value' (shorthand names are only "
                "allowed as the first component)", (s, e))
        lo = s + len(chunk) - len(chunk.lstrip())
        return ElementCriterion("name", "equals", name, span=(lo, lo + len(name)))
    fieldname = m.group(1).lower()
    relation = m.group(2).lower()
    relation = "equals" if relation == "=" else relation
    rest = chunk[m.end():]
    rest_off = s + m.end()
    if relation == "in":
        if fieldname not in ("name", "id"):
            raise ParseError(f"'in' is only valid for name/id, not {fieldname}", (s, e))
        operand = _parse_in_list(text, rest, rest_off)
    elif relation == "equals":
        operand = _parse_scalar_operand(rest, rest_off)
        if fieldname == "type":
            if operand.lower() not in _TYPE_WORDS:
                raise ParseError(
                    f"unknown element type {operand!r}; expected attribute, event, or interval",
                    (rest_off, e))
            operand = _TYPE_WORDS[operand.lower()]
    else:  # pattern relation
        if fieldname not in ("name", "id"):
            raise ParseError(
                f"pattern relations are only valid for name/id, not {fieldname}", (s, e))
        operand = _parse_pattern_operand(rest, rest_off)
    if fieldname in _EQ_RELATION_FIELDS and relation != "equals":
        raise ParseError(f"{fieldname} only supports '='", (s, e))
    return ElementCriterion(fieldname, relation, operand, span=(s, e))


def _parse_scalar_operand(rest: str, off: int) -> str:
    rest = rest.strip()
    if not rest:
        raise ParseError("missing value after '='", (off, off + 1))
    if rest[0] in "'\"":
        val, j = _scan_string(rest, 0)
        if rest[j:].strip():
            raise ParseError("unexpected text after quoted value", (off + j, off + len(rest)))
        return val
    return rest


def _parse_in_list(text: str, rest: str, off: int) -> list[str]:
    stripped = rest.strip()
    lead = len(rest) - len(rest.lstrip())
    if not stripped.startswith("("):
        raise ParseError("expected '(' after 'in'", (off + lead, off + lead + 1))
    body = stripped[1:]
    if not body.rstrip().endswith(")"):
        raise ParseError("expected ')' to close the list", (off, off + len(rest)))
    body = body.rstrip()[:-1]
    items: list[str] = []
    i = 0
    while i < len(body):
        c = body[i]
        if c.isspace() or c == ",":
            i += 1
            continue
        if c in "'\"":
            val, j = _scan_string(body, i)
            items.append(val)
            i = j
        else:
            j = i
            while j < len(body) and body[j] != ",":
                j += 1
            item = body[i:j].strip()
            if item:
                items.append(_canonical_bare(item))
            i = j
    if not items:
        raise ParseError("empty 'in' list", (off, off + len(rest)))
    return items


def _canonical_bare(item: str) -> str:
    # bare numbers in id lists normalize to their integer text
    try:
        f = float(item)
        if f.is_integer():
            return str(int(f))
    except ValueError:
        pass
    return item


def _parse_pattern_operand(rest: str, off: int) -> Pattern:
    stripped = rest.strip()
    lead = len(rest) - len(rest.lstrip())
    if not stripped:
        raise ParseError("missing pattern", (off, off + 1))
    if stripped[0] == "/":
        pat, flags, j = _scan_regex(stripped, 0)
        if stripped[j:].strip():
            raise ParseError("unexpected text after pattern", (off + lead + j, off + len(rest)))
        return Pattern("regex", pat, flags)
    if stripped[0] in "'\"":
        val, j = _scan_string(stripped, 0)
        if stripped[j:].strip():
            raise ParseError("unexpected text after pattern", (off + lead + j, off + len(rest)))
        return Pattern("text", val)
    raise ParseError("pattern must be a /regex/ or quoted string", (off + lead, off + len(rest)))
