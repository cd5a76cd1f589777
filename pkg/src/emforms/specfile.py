"""Parser for polynomial field expressions and custom-scenario spec files.

Expressions use the variables ``x, y, z, t``, real literals, ``+ - * ^`` and
parentheses. Exponents are integer literals from 0 to 4. Expressions are
parsed by a small recursive-descent parser into :class:`Polynomial` objects;
nothing is ever handed to a host-language evaluator.

A spec file has ``[fields]``, ``[motion]``, ``[chain]`` and ``[controls]``
sections of ``key = value`` lines; ``#`` starts a comment.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .errors import ParseError
from .polynomials import Polynomial

VARIABLES = ("x", "y", "z", "t")
MAX_EXPONENT = 4

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*^()]))"
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    column: int


def _tokenize(text: str, line: int, col0: int) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[bad]!r}", line, col0 + bad)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append(_Token(kind, m.group(kind), col0 + start))
        pos = m.end()
    tokens.append(_Token("end", "", col0 + len(text)))
    return tokens


class _ExpressionParser:
    """expr := term (('+'|'-') term)* ; term := unary ('*' unary)* ;
    unary := '-' unary | '+' unary | power ; power := atom ('^' INT)?"""

    def __init__(self, text: str, line: int, col0: int):
        self.tokens = _tokenize(text, line, col0)
        self.pos = 0
        self.line = line

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str, tok: _Token | None = None) -> ParseError:
        tok = self.peek() if tok is None else tok
        return ParseError(message, self.line, tok.column)

    def parse(self) -> Polynomial:
        if self.peek().kind == "end":
            raise self.error("empty expression")
        result = self.expr()
        if self.peek().kind != "end":
            raise self.error(f"unexpected {self.peek().text!r}")
        return result

    def expr(self) -> Polynomial:
        value = self.term()
        while self.peek().text in ("+", "-") and self.peek().kind == "op":
            op = self.take().text
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> Polynomial:
        value = self.unary()
        while self.peek().kind == "op" and self.peek().text == "*":
            self.take()
            value = value * self.unary()
        return value

    def unary(self) -> Polynomial:
        tok = self.peek()
        if tok.kind == "op" and tok.text in ("-", "+"):
            self.take()
            inner = self.unary()
            return -inner if tok.text == "-" else inner
        return self.power()

    def power(self) -> Polynomial:
        base = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.take()
            tok = self.take()
            if tok.kind != "num" or not tok.text.isdigit():
                raise self.error("exponent must be an integer literal", tok)
            exponent = int(tok.text)
            if exponent > MAX_EXPONENT:
                raise self.error(f"exponent {exponent} exceeds {MAX_EXPONENT}", tok)
            if self.peek().kind == "op" and self.peek().text == "^":
                raise self.error("chained exponents are not allowed")
            return base ** exponent
        return base

    def atom(self) -> Polynomial:
        tok = self.take()
        if tok.kind == "num":
            value = float(tok.text)
            if not math.isfinite(value):
                raise self.error("non-finite literal", tok)
            return Polynomial.constant(4, value)
        if tok.kind == "name":
            if tok.text not in VARIABLES:
                raise self.error(f"unknown variable {tok.text!r}", tok)
            return Polynomial.variable(4, VARIABLES.index(tok.text))
        if tok.kind == "op" and tok.text == "(":
            inner = self.expr()
            close = self.take()
            if close.kind != "op" or close.text != ")":
                raise self.error("expected ')'", close)
            return inner
        if tok.kind == "end":
            raise self.error("unexpected end of expression", tok)
        raise self.error(f"unexpected {tok.text!r}", tok)


def parse_polynomial(text: str, line: int = 1, column: int = 1) -> Polynomial:
    """Parse one expression into a polynomial in ``(x, y, z, t)``."""
    poly = _ExpressionParser(text, line, column).parse()
    if poly.max_exponent() > MAX_EXPONENT:
        raise ParseError(f"expanded exponent exceeds {MAX_EXPONENT}", line, column)
    return poly


def parse_numbers(text: str, line: int = 1, column: int = 1) -> list[float]:
    """Comma-separated real literals (a leading minus is allowed)."""
    values = []
    offset = 0
    for part in text.split(","):
        stripped = part.strip()
        col = column + offset + (len(part) - len(part.lstrip()))
        try:
            value = float(stripped)
        except ValueError:
            raise ParseError(f"expected a number, got {stripped!r}", line, col) from None
        if not math.isfinite(value):
            raise ParseError("non-finite number", line, col)
        values.append(value)
        offset += len(part) + 1
    return values


# ---------------------------------------------------------------------------
# spec files
# ---------------------------------------------------------------------------

SECTIONS = ("fields", "motion", "chain", "controls")

# vector proxies with components .x/.y/.z and scalar fields
VECTOR_FIELDS = ("E", "B", "H", "D", "J", "F", "v")
SCALAR_FIELDS = ("rho", "V")
SECTION_KEYS = {
    "motion": ("type", "velocity", "center", "omega", "rate"),
    "chain": ("surface", "window"),
    "controls": ("depth", "tolerance", "quad_order", "t", "boost"),
}


@dataclass
class Entry:
    value: str
    line: int
    column: int


@dataclass
class SpecFile:
    fields: dict[str, Polynomial] = field(default_factory=dict)
    motion: dict[str, Entry] = field(default_factory=dict)
    chain: dict[str, Entry] = field(default_factory=dict)
    controls: dict[str, Entry] = field(default_factory=dict)

    def vector(self, name: str) -> list[Polynomial] | None:
        comps = [self.fields.get(f"{name}.{axis}") for axis in "xyz"]
        if all(c is None for c in comps):
            return None
        return [Polynomial.zero(4) if c is None else c for c in comps]

    def scalar(self, name: str) -> Polynomial | None:
        return self.fields.get(name)

    def numbers(self, section: str, key: str, default: list[float] | None = None) -> list[float] | None:
        entry = getattr(self, section).get(key)
        if entry is None:
            return default
        return parse_numbers(entry.value, entry.line, entry.column)

    def number(self, section: str, key: str, default: float) -> float:
        values = self.numbers(section, key)
        if values is None:
            return default
        if len(values) != 1:
            entry = getattr(self, section)[key]
            raise ParseError(f"{key} takes a single number", entry.line, entry.column)
        return values[0]

    def word(self, section: str, key: str, default: str) -> str:
        entry = getattr(self, section).get(key)
        return default if entry is None else entry.value.strip()


def _field_key_ok(key: str) -> bool:
    if key in SCALAR_FIELDS:
        return True
    name, _, axis = key.partition(".")
    return name in VECTOR_FIELDS and axis in ("x", "y", "z")


def parse_spec(text: str) -> SpecFile:
    spec = SpecFile()
    section: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        stripped = line.strip()
        indent = len(line) - len(line.lstrip()) + 1
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ParseError("unterminated section header", lineno, indent)
            name = stripped[1:-1].strip()
            if name not in SECTIONS:
                raise ParseError(f"unknown section [{name}]", lineno, indent)
            section = name
            continue
        if section is None:
            raise ParseError("entry before any section header", lineno, indent)
        if "=" not in line:
            raise ParseError("expected 'key = value'", lineno, indent)
        key_part, value = line.split("=", 1)
        key = key_part.strip()
        if not key:
            raise ParseError("missing key", lineno, indent)
        value_col = len(key_part) + 2
        if section == "fields":
            if not _field_key_ok(key):
                raise ParseError(f"unknown field {key!r}", lineno, indent)
            if key in spec.fields:
                raise ParseError(f"duplicate field {key!r}", lineno, indent)
            spec.fields[key] = parse_polynomial(value, lineno, value_col)
        else:
            table = getattr(spec, section)
            if key not in SECTION_KEYS[section]:
                raise ParseError(f"unknown key {key!r} in [{section}]", lineno, indent)
            if key in table:
                raise ParseError(f"duplicate key {key!r}", lineno, indent)
            table[key] = Entry(value, lineno, value_col)
    return spec
