r"""Predicate DSL and concept search.

Grammar (precedence ``!`` > ``&`` > ``|``)::

    expr    := or
    or      := and ('|' and)*
    and     := not ('&' not)*
    not     := '!'? primary
    primary := '(' expr ')'
             | field ('==' | '!=') string
             | field 'like' string
             | field 'in' '[' string (',' string)* ']'

Strings are double-quoted; ``\\``, ``\"``, ``\n`` and ``\t`` escapes are
recognised. ``like`` patterns match the whole field value, with ``%``
standing for any run of characters and ``_`` for a single character.
Comparisons fold case unless the store handle has case sensitivity enabled;
absent optional fields compare as the empty string.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import Iterable, NamedTuple, Union

from .errors import PredicateSyntaxError, UnknownField
from .model import ConceptRecord, DictionaryAdapter, FieldType, adapter_schema
from .store import StoreHandle


class OutputMode(Enum):
    ROWS = "rows"
    TERMS = "terms"
    CODES = "codes"


class CompareOp(Enum):
    EQ = "=="
    NE = "!="


@dataclass(frozen=True)
class Compare:
    field: str
    op: CompareOp
    value: str
    field_type: FieldType | None = None


@dataclass(frozen=True)
class Like:
    field: str
    pattern: str
    field_type: FieldType | None = None


@dataclass(frozen=True)
class In:
    field: str
    values: tuple[str, ...]
    field_type: FieldType | None = None


@dataclass(frozen=True)
class And:
    left: "Predicate"
    right: "Predicate"


@dataclass(frozen=True)
class Or:
    left: "Predicate"
    right: "Predicate"


@dataclass(frozen=True)
class Not:
    child: "Predicate"


Predicate = Union[Compare, Like, In, And, Or, Not]


# --- lexer ---------------------------------------------------------------------

class _Token(NamedTuple):
    kind: str  # IDENT, STRING, OP, PUNCT, END
    value: str
    pos: int


_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t"}
_IDENT_START = re.compile(r"[A-Za-z_]")
_IDENT_BODY = re.compile(r"[A-Za-z0-9_]")


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if text[i : i + 2] in ("==", "!="):
            tokens.append(_Token("OP", text[i : i + 2], i))
            i += 2
            continue
        if ch in "()[],&|!":
            tokens.append(_Token("PUNCT", ch, i))
            i += 1
            continue
        if ch == '"':
            start = i
            i += 1
            out: list[str] = []
            while i < n and text[i] != '"':
                if text[i] == "\\":
                    if i + 1 >= n:
                        raise PredicateSyntaxError("unterminated string", start)
                    esc = text[i + 1]
                    if esc not in _ESCAPES:
                        raise PredicateSyntaxError(f"unsupported escape \\{esc}", i)
                    out.append(_ESCAPES[esc])
                    i += 2
                else:
                    out.append(text[i])
                    i += 1
            if i >= n:
                raise PredicateSyntaxError("unterminated string", start)
            i += 1  # closing quote
            tokens.append(_Token("STRING", "".join(out), start))
            continue
        if _IDENT_START.match(ch):
            start = i
            while i < n and _IDENT_BODY.match(text[i]):
                i += 1
            tokens.append(_Token("IDENT", text[start:i], start))
            continue
        raise PredicateSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(_Token("END", "", n))
    return tokens


# --- parser -----------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str, adapter: DictionaryAdapter):
        self.text = text
        self.tokens = _tokenize(text)
        self.idx = 0
        self.schema = adapter_schema(adapter)

    def peek(self) -> _Token:
        return self.tokens[self.idx]

    def advance(self) -> _Token:
        tok = self.tokens[self.idx]
        self.idx += 1
        return tok

    def fail(self, expected: str) -> PredicateSyntaxError:
        tok = self.peek()
        got = "end of input" if tok.kind == "END" else repr(tok.value)
        return PredicateSyntaxError(f"unexpected {got}", tok.pos, expected=expected)

    def expect_punct(self, value: str, expected: str) -> None:
        tok = self.peek()
        if tok.kind == "PUNCT" and tok.value == value:
            self.advance()
            return
        raise self.fail(expected)

    def expect_string(self) -> str:
        tok = self.peek()
        if tok.kind == "STRING":
            self.advance()
            return tok.value
        raise self.fail("a double-quoted string")

    def parse(self) -> Predicate:
        node = self.parse_or()
        tok = self.peek()
        if tok.kind != "END":
            raise self.fail("'&', '|' or end of input")
        return node

    def parse_or(self) -> Predicate:
        node = self.parse_and()
        while self.peek().kind == "PUNCT" and self.peek().value == "|":
            self.advance()
            node = Or(node, self.parse_and())
        return node

    def parse_and(self) -> Predicate:
        node = self.parse_not()
        while self.peek().kind == "PUNCT" and self.peek().value == "&":
            self.advance()
            node = And(node, self.parse_not())
        return node

    def parse_not(self) -> Predicate:
        if self.peek().kind == "PUNCT" and self.peek().value == "!":
            self.advance()
            return Not(self.parse_primary())
        return self.parse_primary()

    def parse_primary(self) -> Predicate:
        tok = self.peek()
        if tok.kind == "PUNCT" and tok.value == "(":
            self.advance()
            node = self.parse_or()
            self.expect_punct(")", "')'")
            return node
        if tok.kind != "IDENT":
            raise self.fail("a field name or '('")
        self.advance()
        ftype = self.schema.type_of(tok.value)
        if ftype is None:
            raise UnknownField(tok.value, self.schema.names, pos=tok.pos)
        field = tok.value

        op_tok = self.peek()
        if op_tok.kind == "OP":
            self.advance()
            value = self.expect_string()
            op = CompareOp.EQ if op_tok.value == "==" else CompareOp.NE
            return Compare(field, op, value, field_type=ftype)
        if op_tok.kind == "IDENT" and op_tok.value == "like":
            self.advance()
            return Like(field, self.expect_string(), field_type=ftype)
        if op_tok.kind == "IDENT" and op_tok.value == "in":
            self.advance()
            self.expect_punct("[", "'['")
            values = [self.expect_string()]
            while self.peek().kind == "PUNCT" and self.peek().value == ",":
                self.advance()
                values.append(self.expect_string())
            self.expect_punct("]", "']' or ','")
            return In(field, tuple(values), field_type=ftype)
        raise self.fail("'==', '!=', 'like' or 'in'")


def parse_predicate(text: str, adapter: DictionaryAdapter) -> Predicate:
    """Parse DSL text into a validated predicate for ``adapter``."""
    return _Parser(text, adapter).parse()


def validate_predicate(predicate: Predicate, adapter: DictionaryAdapter) -> Predicate:
    """Check field names against the adapter schema; returns a resolved copy."""
    schema = adapter_schema(adapter)

    def walk(node: Predicate) -> Predicate:
        if isinstance(node, (Compare, Like, In)):
            ftype = schema.type_of(node.field)
            if ftype is None:
                raise UnknownField(node.field, schema.names)
            return replace(node, field_type=ftype)
        if isinstance(node, And):
            return And(walk(node.left), walk(node.right))
        if isinstance(node, Or):
            return Or(walk(node.left), walk(node.right))
        if isinstance(node, Not):
            return Not(walk(node.child))
        raise TypeError(f"not a predicate node: {node!r}")

    return walk(predicate)


# --- evaluation --------------------------------------------------------------------

@lru_cache(maxsize=512)
def _like_regex(pattern: str) -> re.Pattern:
    parts = []
    for ch in pattern:
        if ch == "%":
            parts.append(".*")
        elif ch == "_":
            parts.append(".")
        else:
            parts.append(re.escape(ch))
    return re.compile("".join(parts), re.DOTALL)


def _field_text(node: Compare | Like | In, rec: ConceptRecord) -> str:
    ftype = node.field_type
    if ftype is None:
        raise TypeError(
            f"predicate leaf for field {node.field!r} was not validated against an adapter"
        )
    if ftype is FieldType.CODE:
        return rec.code
    if ftype is FieldType.TERM:
        return rec.term
    if ftype is FieldType.FLAG:
        return "1" if rec.synonym else "0"
    if ftype is FieldType.STATUS:
        return rec.status or ""
    if ftype is FieldType.TERM_ID:
        return rec.term_id or ""
    return rec.extras.get(node.field, "")


def eval_predicate(
    predicate: Predicate, rec: ConceptRecord, case_sensitive: bool = False
) -> bool:
    """Evaluate a validated predicate against one record."""
    def fold(s: str) -> str:
        return s if case_sensitive else s.lower()

    if isinstance(predicate, Compare):
        match = fold(_field_text(predicate, rec)) == fold(predicate.value)
        return match if predicate.op is CompareOp.EQ else not match
    if isinstance(predicate, Like):
        value = fold(_field_text(predicate, rec))
        return _like_regex(fold(predicate.pattern)).fullmatch(value) is not None
    if isinstance(predicate, In):
        value = fold(_field_text(predicate, rec))
        return any(value == fold(v) for v in predicate.values)
    if isinstance(predicate, And):
        return eval_predicate(predicate.left, rec, case_sensitive) and eval_predicate(
            predicate.right, rec, case_sensitive
        )
    if isinstance(predicate, Or):
        return eval_predicate(predicate.left, rec, case_sensitive) or eval_predicate(
            predicate.right, rec, case_sensitive
        )
    if isinstance(predicate, Not):
        return not eval_predicate(predicate.child, rec, case_sensitive)
    raise TypeError(f"not a predicate node: {predicate!r}")


# --- search ---------------------------------------------------------------------------

def search_concepts(
    handle: StoreHandle,
    adapter: DictionaryAdapter,
    predicate: Predicate | str,
    include_synonyms: bool = False,
    output: OutputMode = OutputMode.ROWS,
) -> list[ConceptRecord] | list[str]:
    """Return records matching ``predicate``, in (code, term_id) order.

    Synonym records are excluded unless ``include_synonyms`` is set. The
    terms output projects one term per matching record; the codes output
    deduplicates while preserving first occurrence.
    """
    if isinstance(predicate, str):
        predicate = parse_predicate(predicate, adapter)
    else:
        predicate = validate_predicate(predicate, adapter)

    rows = [
        rec
        for rec in handle.scan_concepts(adapter)
        if (include_synonyms or not rec.synonym)
        and eval_predicate(predicate, rec, handle.case_sensitive)
    ]
    if output is OutputMode.ROWS:
        return rows
    if output is OutputMode.TERMS:
        return [rec.term for rec in rows]
    if output is OutputMode.CODES:
        return _dedup([rec.code for rec in rows])
    raise TypeError(f"not an output mode: {output!r}")


def _dedup(values: Iterable[str]) -> list[str]:
    seen: set[str] = set()
    out: list[str] = []
    for v in values:
        if v not in seen:
            seen.add(v)
            out.append(v)
    return out
