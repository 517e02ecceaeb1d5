"""Cursor-position completion for the query editor.

Outside braces, suggestions come from the parser's expected-token set at the
cursor; inside an open ``{...}`` element query they come from the concept
catalog (prefix match on names and scopes, capped at 50).
"""

from __future__ import annotations

from ..errors import ParseError
from .nodes import AGG_FUNCTIONS
from .parser import parse
from .tokens import KEYWORDS, UNIT_WORDS

MAX_SUGGESTIONS = 50

# valid ways to continue a query that already parses
_CONTINUATIONS = [
    "where", "impute", "carry", "cut", "with", "and", "or", "as",
    "between", "in", "contains", "matches", "startswith", "endswith",
    "from", "before", "after", "at", "every",
]

_WORDY = sorted(
    set(KEYWORDS) | set(UNIT_WORDS) | {f.split()[0] for f in AGG_FUNCTIONS} | {"inf"}
)


def complete(text: str, cursor: int, catalog=None) -> list[str]:
    """Ranked suggestions for the token being typed at ``cursor``.

    ``catalog`` may be anything with an ``entries`` iterable of objects
    carrying ``name`` and ``scope`` attributes (see dataset.catalog).
    """
    cursor = max(0, min(cursor, len(text)))
    prefix_text = text[:cursor]

    brace_fragment = _open_element_fragment(prefix_text)
    if brace_fragment is not None:
        return _catalog_suggestions(brace_fragment, catalog)

    partial = _partial_word(prefix_text)

    try:
        parse(prefix_text)
        words = list(_CONTINUATIONS)
    except ParseError as exc:
        words = [w for w in exc.expected if _is_word(w)]
        if not words:
            words = list(_CONTINUATIONS)

    low = partial.lower()
    out = sorted({w for w in words if w.lower().startswith(low)})
    if not partial and "{" not in out:
        out = sorted(set(out) | {"{", "case"})
    return out[:MAX_SUGGESTIONS]


def _is_word(w: str) -> bool:
    return bool(w) and (w[0].isalpha() or w in ("{", "#now", "#mintime", "#maxtime", "#value"))


def _partial_word(text: str) -> str:
    i = len(text)
    while i > 0 and (text[i - 1].isalnum() or text[i - 1] == "_"):
        i -= 1
    return text[i:]


def _open_element_fragment(text: str):
    """If the cursor sits inside an unclosed `{...}`, return the fragment
    being typed (text after the last `{`, `;`, or relation)."""
    depth_start = None
    i = 0
    while i < len(text):
        c = text[i]
        if c in "'\"":
            j = i + 1
            while j < len(text) and text[j] != c:
                j += 2 if text[j] == "\\" else 1
            i = j + 1
            continue
        if c == "{":
            depth_start = i
        elif c == "}":
            depth_start = None
        i += 1
    if depth_start is None:
        return None
    fragment = text[depth_start + 1:]
    for sep in (";", "=", "("):
        if sep in fragment:
            fragment = fragment.rsplit(sep, 1)[1]
    return fragment.lstrip()


def _catalog_suggestions(fragment: str, catalog) -> list[str]:
    if catalog is None:
        return []
    entries = getattr(catalog, "entries", catalog)
    low = fragment.lower()
    names, scopes = [], set()
    for e in entries:
        scopes.add(e.scope)
        if e.name.lower().startswith(low):
            names.append((-(getattr(e, "occurrence_count", 0) or 0), e.name))
    out: list[str] = []
    for _, name in sorted(names):
        if name not in out:
            out.append(name)
    for scope in sorted(s for s in scopes if s.lower().startswith(low)):
        if scope not in out:
            out.append(scope)
    return out[:MAX_SUGGESTIONS]
