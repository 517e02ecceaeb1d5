"""Validation for the portable regex subset accepted in queries.

The accepted dialect: literal characters and escapes, ``.``, character
classes with ranges and negation, ``\\w \\d \\s`` (and upper-case
complements), ``\\b \\B`` word boundaries, anchors ``^ $``, alternation,
greedy/lazy quantifiers (``* + ? {m} {m,} {m,n}``), and capturing or
non-capturing groups. The only flag is ``i`` (case-insensitive).

Everything else — backreferences, lookaround, named groups, inline flags —
is rejected up front so patterns behave identically across engines.
"""

from __future__ import annotations

import re

_CLASS_ESCAPES = set("wWdDsS")
_CHAR_ESCAPES = set("\\/.^$|?*+()[]{}-ntrfb0")


class PatternSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(message)
        self.pos = pos


def validate_pattern(pattern: str) -> None:
    """Raise PatternSyntaxError if ``pattern`` falls outside the subset."""
    _Validator(pattern).run()


def validate_flags(flags: str) -> str:
    """Normalize flags; only ``i`` (any case) is accepted."""
    norm = flags.lower()
    if norm not in ("", "i"):
        raise PatternSyntaxError(f"unsupported regex flags {flags!r}", 0)
    return norm


def compile_pattern(pattern: str, flags: str = "") -> re.Pattern:
    validate_pattern(pattern)
    return re.compile(pattern, re.IGNORECASE if validate_flags(flags) == "i" else 0)


class _Validator:
    def __init__(self, pattern: str):
        self.p = pattern
        self.i = 0

    def run(self) -> None:
        self._alternation(depth=0)
        if self.i != len(self.p):
            raise PatternSyntaxError("unbalanced ')'", self.i)

    def _alternation(self, depth: int) -> None:
        self._sequence(depth)
        while self._peek() == "|":
            self.i += 1
            self._sequence(depth)

    def _sequence(self, depth: int) -> None:
        while True:
            c = self._peek()
            if c is None or c == "|":
                return
            if c == ")":
                if depth == 0:
                    raise PatternSyntaxError("unbalanced ')'", self.i)
                return
            self._term(depth)

    def _term(self, depth: int) -> None:
        start = self.i
        c = self.p[self.i]
        if c == "(":
            self.i += 1
            if self._peek() == "?":
                if self.p[self.i:self.i + 2] == "?:":
                    self.i += 2
                else:
                    raise PatternSyntaxError(
                        "only plain or (?: ) groups are supported", self.i)
            self._alternation(depth + 1)
            if self._peek() != ")":
                raise PatternSyntaxError("unterminated group", start)
            self.i += 1
        elif c == "[":
            self._char_class()
        elif c == "\\":
            self._escape(in_class=False)
        elif c in ")":
            raise PatternSyntaxError("unbalanced ')'", self.i)
        elif c in "*+?":
            raise PatternSyntaxError(f"quantifier {c!r} has nothing to repeat", self.i)
        elif c == "{":
            if self._try_bounded_quantifier(probe=True):
                raise PatternSyntaxError("quantifier has nothing to repeat", self.i)
            self.i += 1  # literal brace
        else:
            self.i += 1  # literal, '.', '^', '$'
        self._quantifier()

    def _quantifier(self) -> None:
        c = self._peek()
        if c in ("*", "+", "?"):
            self.i += 1
        elif c == "{":
            if not self._try_bounded_quantifier(probe=False):
                return
        else:
            return
        if self._peek() == "?":  # lazy
            self.i += 1
        if self._peek() == "+":
            raise PatternSyntaxError("possessive quantifiers are not supported", self.i)

    def _try_bounded_quantifier(self, probe: bool) -> bool:
        m = re.match(r"\{(\d+)(,(\d*)?)?\}", self.p[self.i:])
        if not m:
            return False
        if m.group(3):
            lo, hi = int(m.group(1)), int(m.group(3))
            if hi < lo:
                raise PatternSyntaxError("quantifier range is reversed", self.i)
        if not probe:
            self.i += m.end()
        return True

    def _char_class(self) -> None:
        start = self.i
        self.i += 1  # '['
        if self._peek() == "^":
            self.i += 1
        if self._peek() == "]":  # leading ']' is a literal
            self.i += 1
        while True:
            c = self._peek()
            if c is None:
                raise PatternSyntaxError("unterminated character class", start)
            if c == "]":
                self.i += 1
                return
            if c == "\\":
                self._escape(in_class=True)
            else:
                self.i += 1

    def _escape(self, in_class: bool) -> None:
        start = self.i
        self.i += 1
        c = self._peek()
        if c is None:
            raise PatternSyntaxError("dangling backslash", start)
        if c in _CLASS_ESCAPES or c in _CHAR_ESCAPES or c == "B":
            self.i += 1
            return
        if c.isdigit():
            raise PatternSyntaxError("backreferences are not supported", start)
        if c.isalpha():
            raise PatternSyntaxError(f"unsupported escape \\{c}", start)
        self.i += 1  # escaped punctuation

    def _peek(self):
        return self.p[self.i] if self.i < len(self.p) else None
