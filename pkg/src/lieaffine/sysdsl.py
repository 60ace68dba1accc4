"""Plain-text system descriptions.

Line-oriented format, '#' starts a comment, blank lines are ignored:

    group glplus dim 2
    field L = inner [1,0;0,-1]     # linear part, generator in the algebra
    field Y = invariant [0,1;0,0]  # right-invariant part
    field Z = zero
    drift L + Y
    control 1: Z + Y
    controlset box -1 1

The group line comes first. ``inner`` takes an algebra element (matrix
groups), ``abelian`` an n x n map (group kind rn), ``invariant`` an n x n
algebra element or, on rn, a 1 x n row. ``drift`` and ``control j:`` each
name a linear part and an invariant part; control indices must run 1..m.

Parsing never raises on malformed text: every problem is collected as a
ParseError with a source span, and later lines are still examined.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .groups import (
    GROUP_KINDS,
    GroupSpec,
    LinearField,
    abelian_field,
    in_algebra,
    inner_field,
    make_group,
    zero_field,
)
from .systems import AffineSystem

__all__ = [
    "SourceSpan",
    "ParseError",
    "ParseResult",
    "ERROR_KINDS",
    "SysParseFailure",
    "try_parse_system",
    "parse_system",
    "system_to_text",
]

ERROR_KINDS = (
    "syntax",
    "bad-number",
    "unknown-group",
    "duplicate-name",
    "dimension-mismatch",
    "not-in-algebra",
)


@dataclass(frozen=True)
class SourceSpan:
    """1-based line and column; length in characters."""

    line: int
    col: int
    length: int


@dataclass(frozen=True)
class ParseError:
    kind: str
    message: str
    span: SourceSpan


@dataclass(frozen=True)
class ParseResult:
    system: AffineSystem | None
    errors: tuple


class SysParseFailure(InputError):
    """Raised by parse_system; carries the full error list."""

    def __init__(self, errors):
        self.errors = tuple(errors)
        lines = "; ".join(f"{e.span.line}:{e.span.col} {e.kind}: {e.message}" for e in self.errors)
        super().__init__(f"system description has {len(self.errors)} error(s): {lines}")


# ---------------------------------------------------------------------------
# tokenizer

_NUM_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_WORD_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_PUNCT = set("=+:;,[]")


@dataclass(frozen=True)
class _Token:
    kind: str  # word | num | badnum | punct
    text: str
    col: int  # 1-based

    def span(self, line: int) -> SourceSpan:
        return SourceSpan(line, self.col, max(1, len(self.text)))


class _LineSyntaxError(Exception):
    def __init__(self, error: ParseError):
        self.error = error


def _tokenize(text: str, line_no: int) -> list:
    """Token list for one comment-stripped line; raises on stray characters."""
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in " \t":
            i += 1
            continue
        if ch.isalpha() or ch == "_":
            m = _WORD_RE.match(text, i)
            if m is None:  # non-ascii letter
                raise _LineSyntaxError(ParseError(
                    "syntax", f"unexpected character {ch!r}", SourceSpan(line_no, i + 1, 1)))
            tokens.append(_Token("word", m.group(), i + 1))
            i = m.end()
            continue
        starts_num = ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()) or (
            ch in "+-" and i + 1 < n and (text[i + 1].isdigit() or text[i + 1] == "."))
        if starts_num:
            m = _NUM_RE.match(text, i)
            if m is not None:
                end = m.end()
                # a number that runs straight into letters, dots or digits is malformed
                j = end
                while j < n and (text[j].isalnum() or text[j] in "._"):
                    j += 1
                if j > end:
                    tokens.append(_Token("badnum", text[i:j], i + 1))
                    i = j
                else:
                    tokens.append(_Token("num", m.group(), i + 1))
                    i = end
                continue
            # fall through: a bare sign is punctuation, anything else a stray char
        if ch in _PUNCT:
            tokens.append(_Token("punct", ch, i + 1))
            i += 1
            continue
        raise _LineSyntaxError(ParseError(
            "syntax", f"unexpected character {ch!r}", SourceSpan(line_no, i + 1, 1)))
    return tokens


# ---------------------------------------------------------------------------
# per-line parsing into raw items


@dataclass
class _Cursor:
    tokens: list
    line: int
    pos: int = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        if tok is not None:
            self.pos += 1
        return tok

    def end_span(self) -> SourceSpan:
        if self.tokens:
            last = self.tokens[-1]
            return SourceSpan(self.line, last.col, max(1, len(last.text)))
        return SourceSpan(self.line, 1, 1)

    def fail(self, message: str, tok=None, kind: str = "syntax"):
        span = tok.span(self.line) if tok is not None else self.end_span()
        raise _LineSyntaxError(ParseError(kind, message, span))

    def expect_word(self, value: str | None = None) -> _Token:
        tok = self.take()
        if tok is None or tok.kind != "word" or (value is not None and tok.text != value):
            want = f"'{value}'" if value else "a name"
            self.fail(f"expected {want}", tok)
        return tok

    def expect_punct(self, ch: str) -> _Token:
        tok = self.take()
        if tok is None or tok.kind != "punct" or tok.text != ch:
            self.fail(f"expected '{ch}'", tok)
        return tok

    def expect_number(self) -> tuple:
        tok = self.take()
        if tok is None or tok.kind not in ("num", "badnum"):
            self.fail("expected a number", tok)
        if tok.kind == "badnum":
            self.fail(f"malformed number {tok.text!r}", tok, kind="bad-number")
        value = float(tok.text)
        if not np.isfinite(value):
            self.fail(f"number {tok.text!r} overflows", tok, kind="bad-number")
        return value, tok

    def expect_int(self) -> tuple:
        value, tok = self.expect_number()
        if not re.fullmatch(r"[+-]?\d+", tok.text):
            self.fail(f"expected an integer, got {tok.text!r}", tok)
        return int(value), tok

    def expect_end(self):
        tok = self.peek()
        if tok is not None:
            self.fail(f"unexpected trailing {tok.text!r}", tok)


def _parse_matrix(cur: _Cursor) -> tuple:
    """Parse [a,b;c,d] into a list of rows; returns (rows, span)."""
    open_tok = cur.expect_punct("[")
    rows = [[]]
    value, _ = cur.expect_number()
    rows[-1].append(value)
    while True:
        tok = cur.peek()
        if tok is not None and tok.kind == "punct" and tok.text == ",":
            cur.take()
            value, _ = cur.expect_number()
            rows[-1].append(value)
        elif tok is not None and tok.kind == "punct" and tok.text == ";":
            cur.take()
            rows.append([])
            value, _ = cur.expect_number()
            rows[-1].append(value)
        elif tok is not None and tok.kind == "punct" and tok.text == "]":
            close = cur.take()
            span = SourceSpan(cur.line, open_tok.col, close.col - open_tok.col + 1)
            return rows, span
        else:
            cur.fail("expected ',', ';' or ']' in matrix", tok)


@dataclass
class _FieldDecl:
    name: str
    kind: str  # inner | abelian | invariant | zero
    rows: list | None
    name_span: SourceSpan
    value_span: SourceSpan


@dataclass
class _ChannelDecl:
    index: int  # 0 for drift
    linear_name: str
    invariant_name: str
    linear_span: SourceSpan
    invariant_span: SourceSpan
    line_span: SourceSpan


# ---------------------------------------------------------------------------
# the parser proper


def try_parse_system(text: str) -> ParseResult:
    """Parse a system description, collecting every error found."""
    if not isinstance(text, str):
        raise InputError("system description must be a string")
    errors: list = []
    lines = text.split("\n")

    group_decl = None  # (kind, n, line, kind_tok, n_tok)
    fields: dict = {}
    channels: dict = {}
    bounds = None
    bounds_line = None
    order: list = []  # meaningful line numbers in order, tagged

    for line_no, raw in enumerate(lines, start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        try:
            tokens = _tokenize(body, line_no)
        except _LineSyntaxError as exc:
            errors.append(exc.error)
            continue
        if not tokens:
            continue
        cur = _Cursor(tokens, line_no)
        try:
            head = cur.take()
            if head.kind != "word":
                cur.fail("expected a declaration keyword", head)
            if head.text == "group":
                kind_tok = cur.expect_word()
                cur.expect_word("dim")
                n, n_tok = cur.expect_int()
                cur.expect_end()
                if group_decl is not None:
                    cur.fail("group already declared", head, kind="duplicate-name")
                group_decl = (kind_tok.text, n, line_no, kind_tok, n_tok)
                order.append(("group", line_no))
            elif head.text == "field":
                name_tok = cur.expect_word()
                cur.expect_punct("=")
                kind_tok = cur.expect_word()
                if kind_tok.text == "zero":
                    rows, value_span = None, kind_tok.span(line_no)
                elif kind_tok.text in ("inner", "abelian", "invariant"):
                    rows, value_span = _parse_matrix(cur)
                else:
                    cur.fail(f"unknown field kind {kind_tok.text!r}", kind_tok)
                cur.expect_end()
                if name_tok.text in fields:
                    cur.fail(f"field {name_tok.text!r} already declared", name_tok,
                             kind="duplicate-name")
                fields[name_tok.text] = _FieldDecl(name_tok.text, kind_tok.text, rows,
                                                   name_tok.span(line_no), value_span)
                order.append(("field", line_no))
            elif head.text == "drift":
                lin_tok = cur.expect_word()
                cur.expect_punct("+")
                inv_tok = cur.expect_word()
                cur.expect_end()
                if 0 in channels:
                    cur.fail("drift already declared", head, kind="duplicate-name")
                channels[0] = _ChannelDecl(0, lin_tok.text, inv_tok.text,
                                           lin_tok.span(line_no), inv_tok.span(line_no),
                                           head.span(line_no))
                order.append(("drift", line_no))
            elif head.text == "control":
                idx, idx_tok = cur.expect_int()
                cur.expect_punct(":")
                lin_tok = cur.expect_word()
                cur.expect_punct("+")
                inv_tok = cur.expect_word()
                cur.expect_end()
                if idx < 1:
                    cur.fail(f"control index must be >= 1, got {idx}", idx_tok,
                             kind="dimension-mismatch")
                if idx in channels:
                    cur.fail(f"control {idx} already declared", idx_tok, kind="duplicate-name")
                channels[idx] = _ChannelDecl(idx, lin_tok.text, inv_tok.text,
                                             lin_tok.span(line_no), inv_tok.span(line_no),
                                             head.span(line_no))
                order.append(("control", line_no))
            elif head.text == "controlset":
                cur.expect_word("box")
                lo, lo_tok = cur.expect_number()
                hi, hi_tok = cur.expect_number()
                cur.expect_end()
                if bounds is not None:
                    cur.fail("controlset already declared", head, kind="duplicate-name")
                if lo > hi:
                    cur.fail(f"control box needs lo <= hi, got {lo} > {hi}", hi_tok,
                             kind="bad-number")
                bounds = (lo, hi)
                bounds_line = line_no
                order.append(("controlset", line_no))
            else:
                cur.fail(f"unknown declaration {head.text!r}", head)
        except _LineSyntaxError as exc:
            errors.append(exc.error)

    last_span = SourceSpan(len(lines), 1, 1)

    if group_decl is None:
        errors.append(ParseError("syntax", "missing group declaration", last_span))
        return ParseResult(None, tuple(errors))
    if order and order[0][0] != "group":
        errors.append(ParseError(
            "syntax", "group declaration must come first",
            SourceSpan(order[0][1], 1, 1)))

    kind, n, group_line, kind_tok, n_tok = group_decl
    group = None
    if kind not in GROUP_KINDS:
        errors.append(ParseError("unknown-group", f"unknown group kind {kind!r}",
                                 kind_tok.span(group_line)))
    else:
        try:
            group = make_group(kind, n)
        except InputError as exc:
            errors.append(ParseError("dimension-mismatch", str(exc), n_tok.span(group_line)))

    # second pass over declarations needs the group; without it stop here
    if group is None:
        return ParseResult(None, tuple(errors))

    def matrix_of(decl: _FieldDecl, want_rows: int, want_cols: int, line_desc: str):
        rows = decl.rows
        widths = {len(r) for r in rows}
        if len(widths) > 1:
            errors.append(ParseError("dimension-mismatch",
                                     f"{line_desc}: rows have unequal lengths", decl.value_span))
            return None
        mat = np.asarray(rows, dtype=float)
        if mat.shape != (want_rows, want_cols):
            errors.append(ParseError(
                "dimension-mismatch",
                f"{line_desc}: expected {want_rows}x{want_cols}, got {mat.shape[0]}x{mat.shape[1]}",
                decl.value_span))
            return None
        return mat

    # resolve field declarations against the group
    resolved: dict = {}
    for decl in fields.values():
        if decl.kind == "zero":
            resolved[decl.name] = ("zero", None)
            continue
        if decl.kind == "inner":
            if group.is_abelian:
                errors.append(ParseError("not-in-algebra",
                                         "inner fields require a matrix group; use 'abelian' on rn",
                                         decl.value_span))
                continue
            mat = matrix_of(decl, group.n, group.n, f"field {decl.name}")
            if mat is None:
                continue
            if not in_algebra(group, mat):
                errors.append(ParseError("not-in-algebra",
                                         f"field {decl.name}: generator is not in the algebra of {group.name}",
                                         decl.value_span))
                continue
            resolved[decl.name] = ("inner", mat)
        elif decl.kind == "abelian":
            if not group.is_abelian:
                errors.append(ParseError("not-in-algebra",
                                         "abelian maps require group kind rn",
                                         decl.value_span))
                continue
            mat = matrix_of(decl, group.n, group.n, f"field {decl.name}")
            if mat is None:
                continue
            resolved[decl.name] = ("abelian", mat)
        else:  # invariant
            if group.is_abelian:
                mat = matrix_of(decl, 1, group.n, f"field {decl.name}")
                if mat is None:
                    continue
                resolved[decl.name] = ("invariant", mat[0])
            else:
                mat = matrix_of(decl, group.n, group.n, f"field {decl.name}")
                if mat is None:
                    continue
                if not in_algebra(group, mat):
                    errors.append(ParseError("not-in-algebra",
                                             f"field {decl.name}: invariant part is not in the algebra of {group.name}",
                                             decl.value_span))
                    continue
                resolved[decl.name] = ("invariant", mat)

    if 0 not in channels:
        errors.append(ParseError("syntax", "missing drift declaration",
                                 SourceSpan(group_line, 1, 1)))

    indices = sorted(i for i in channels if i > 0)
    if indices and indices != list(range(1, len(indices) + 1)):
        worst = channels[indices[-1]]
        errors.append(ParseError("dimension-mismatch",
                                 f"control indices must run 1..m, got {indices}",
                                 worst.line_span))

    def build_linear(name: str, span: SourceSpan):
        if name not in resolved:
            if name not in fields:
                errors.append(ParseError("syntax", f"unknown field {name!r}", span))
            return None
        fkind, value = resolved[name]
        if fkind == "zero":
            return zero_field(group)
        if fkind == "inner":
            return inner_field(group, value)
        if fkind == "abelian":
            return abelian_field(group, value)
        errors.append(ParseError("dimension-mismatch",
                                 f"field {name!r} is an invariant part, expected a linear field", span))
        return None

    def build_invariant(name: str, span: SourceSpan):
        if name not in resolved:
            if name not in fields:
                errors.append(ParseError("syntax", f"unknown field {name!r}", span))
            return None
        fkind, value = resolved[name]
        if fkind == "zero":
            return np.zeros(group.n) if group.is_abelian else np.zeros((group.n, group.n))
        if fkind == "invariant":
            return value
        errors.append(ParseError("dimension-mismatch",
                                 f"field {name!r} is a linear field, expected an invariant part", span))
        return None

    built: dict = {}
    for idx, decl in channels.items():
        lin = build_linear(decl.linear_name, decl.linear_span)
        inv = build_invariant(decl.invariant_name, decl.invariant_span)
        if lin is not None and inv is not None:
            built[idx] = (lin, inv)

    if errors:
        return ParseResult(None, tuple(errors))

    controlled = tuple(built[i] for i in indices)
    system = AffineSystem(group, built[0][0], built[0][1], controlled, bounds)
    return ParseResult(system, ())


def parse_system(text: str) -> AffineSystem:
    result = try_parse_system(text)
    if result.system is None:
        raise SysParseFailure(result.errors)
    return result.system


# ---------------------------------------------------------------------------
# serializer


def _fmt_matrix(mat: np.ndarray) -> str:
    rows = [",".join(repr(float(v)) for v in row) for row in np.atleast_2d(mat)]
    return "[" + ";".join(rows) + "]"


def system_to_text(system: AffineSystem) -> str:
    """Render a system in the text format; parse_system round-trips it."""
    group = system.group
    out = [f"group {group.kind} dim {group.n}"]
    names = []
    for j, (f, y) in enumerate(zip(system.linear_fields, system.invariant_parts)):
        ln, yn = f"L{j}", f"Y{j}"
        out.append(f"field {ln} = {f.kind} {_fmt_matrix(f.generator)}")
        out.append(f"field {yn} = invariant {_fmt_matrix(np.atleast_2d(y))}")
        names.append((ln, yn))
    out.append(f"drift {names[0][0]} + {names[0][1]}")
    for j in range(1, len(names)):
        out.append(f"control {j}: {names[j][0]} + {names[j][1]}")
    if system.control_bounds is not None:
        lo, hi = system.control_bounds
        out.append(f"controlset box {lo!r} {hi!r}")
    return "\n".join(out) + "\n"
