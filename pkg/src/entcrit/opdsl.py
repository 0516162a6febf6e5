"""A small expression language for operators.

Grammar (whitespace is insignificant)::

    expr      := term (("+" | "-") term)*
    term      := ["-"] factor ("*" factor)*
    factor    := "-" factor | scalar | primitive | "(" expr ")" | func
    scalar    := number ["/" integer] | "i"
    primitive := name "[" integer "]"
    func      := "dag(" expr ")" | "pt(" expr ";" integer ("," integer)* ")"
               | "comm(" expr "," expr ")" | "acomm(" expr "," expr ")"

Primitive names: ``a ad n x p`` (boson), ``jp jm jz`` (spin), ``kp km kz``
(su11). Mode indices are 1-based. ``pt`` transposes the lowered matrix on
the listed modes.

Example::

    >>> e = parse("1/2*(ad[1]*ad[2]*a[3] + a[1]*a[2]*ad[3])")
    >>> to_text(e)
    '1/2*(ad[1]*ad[2]*a[3] + a[1]*a[2]*ad[3])'
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import Union

from . import ops
from .ptrans import partial_transpose
from .space import BOSON, SPIN, SU11, CompositeSpace, OperatorMatrix

PRIMITIVES = {
    "a": BOSON, "ad": BOSON, "n": BOSON, "x": BOSON, "p": BOSON,
    "jp": SPIN, "jm": SPIN, "jz": SPIN,
    "kp": SU11, "km": SU11, "kz": SU11,
}
FUNCTIONS = ("dag", "pt", "comm", "acomm")


class DslError(ValueError):
    pass


class DslSyntaxError(DslError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


# --- AST --------------------------------------------------------------------

@dataclass(frozen=True)
class Scalar:
    re: Fraction
    im: Fraction = Fraction(0)

    @property
    def value(self) -> complex:
        return complex(float(self.re), float(self.im))

    def negative(self) -> bool:
        return self.re < 0 or (self.re == 0 and self.im < 0)


@dataclass(frozen=True)
class Primitive:
    name: str
    mode: int


@dataclass(frozen=True)
class Sum:
    terms: tuple


@dataclass(frozen=True)
class Product:
    factors: tuple


@dataclass(frozen=True)
class Dag:
    child: object


@dataclass(frozen=True)
class Pt:
    child: object
    modes: tuple


@dataclass(frozen=True)
class Comm:
    left: object
    right: object


@dataclass(frozen=True)
class AComm:
    left: object
    right: object


ExprNode = Union[Scalar, Primitive, Sum, Product, Dag, Pt, Comm, AComm]


def negate(node: ExprNode) -> ExprNode:
    if isinstance(node, Scalar):
        return Scalar(-node.re, -node.im)
    if isinstance(node, Product) and isinstance(node.factors[0], Scalar):
        return Product((negate(node.factors[0]),) + node.factors[1:])
    if isinstance(node, Product):
        return Product((Scalar(Fraction(-1)),) + node.factors)
    return Product((Scalar(Fraction(-1)), node))


# --- tokenizer --------------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<ws>\s+)|(?P<num>\d+(?:\.\d*)?|\.\d+)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/()\[\],;])|(?P<bad>.)"
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks, line, line_start = [], 1, 0
    for m in _TOKEN.finditer(text):
        kind, value, col = m.lastgroup, m.group(), m.start() - line_start + 1
        if kind == "ws":
            for k, ch in enumerate(value):
                if ch == "\n":
                    line += 1
                    line_start = m.start() + k + 1
            continue
        if kind == "bad":
            raise DslSyntaxError(f"unexpected character {value!r}", line, col)
        toks.append(_Tok(kind, value, line, col))
    toks.append(_Tok("end", "", line, len(text) - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.pos]

    def error(self, message: str, tok: _Tok | None = None):
        tok = tok or self.tok
        return DslSyntaxError(message, tok.line, tok.col)

    def take(self, text: str | None = None, kind: str | None = None) -> _Tok:
        tok = self.tok
        if (text is not None and tok.text != text) or (kind is not None and tok.kind != kind):
            want = repr(text) if text is not None else {"num": "a number", "name": "a name"}.get(kind, kind)
            got = repr(tok.text) if tok.kind != "end" else "end of input"
            raise self.error(f"expected {want}, got {got}")
        self.pos += 1
        return tok

    def peek(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def parse(self) -> ExprNode:
        node = self.expr()
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")
        return node

    def expr(self) -> ExprNode:
        terms = [self.term()]
        while self.peek("+") or self.peek("-"):
            sign = self.take().text
            t = self.term()
            terms.append(negate(t) if sign == "-" else t)
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def term(self) -> ExprNode:
        negative = False
        if self.peek("-"):
            self.take()
            negative = True
        factors = [self.factor()]
        while self.peek("*"):
            self.take()
            factors.append(self.factor())
        node = factors[0] if len(factors) == 1 else Product(tuple(factors))
        return negate(node) if negative else node

    def integer(self) -> int:
        tok = self.take(kind="num")
        if not tok.text.isdigit():
            raise self.error(f"expected an integer, got {tok.text!r}", tok)
        return int(tok.text)

    def factor(self) -> ExprNode:
        tok = self.tok
        if self.peek("-"):
            self.take()
            return negate(self.factor())
        if tok.kind == "num":
            self.take()
            value = Fraction(tok.text)
            if self.peek("/"):
                slash = self.take()
                if "." in tok.text or self.tok.kind != "num" or not self.tok.text.isdigit():
                    raise self.error("malformed rational: expected integer/integer", slash)
                den = self.integer()
                if den == 0:
                    raise self.error("malformed rational: zero denominator", slash)
                value = value / den
            return Scalar(value)
        if self.peek("("):
            self.take()
            node = self.expr()
            self.take(")")
            return node
        if tok.kind == "name":
            name = tok.text
            self.take()
            if name == "i":
                return Scalar(Fraction(0), Fraction(1))
            if name in FUNCTIONS:
                return self.func(name)
            if name not in PRIMITIVES:
                raise self.error(f"unknown primitive {name!r}", tok)
            self.take("[")
            mode = self.integer()
            self.take("]")
            if mode < 1:
                raise self.error("mode index must be >= 1", tok)
            return Primitive(name, mode)
        got = repr(tok.text) if tok.kind != "end" else "end of input"
        raise self.error(f"unexpected {got}")

    def func(self, name: str) -> ExprNode:
        self.take("(")
        first = self.expr()
        if name == "dag":
            node = Dag(first)
        elif name == "pt":
            self.take(";")
            modes = [self.integer()]
            while self.peek(","):
                self.take()
                modes.append(self.integer())
            if min(modes) < 1:
                raise self.error("mode index must be >= 1")
            node = Pt(first, tuple(sorted(set(modes))))  # a mode set: sorted, no repeats
        else:
            self.take(",")
            second = self.expr()
            node = (Comm if name == "comm" else AComm)(first, second)
        self.take(")")
        return node


def parse(text: str) -> ExprNode:
    return _Parser(text).parse()


# --- printer ----------------------------------------------------------------

def _frac(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def _scalar_text(s: Scalar) -> str:
    if s.im == 0:
        return _frac(s.re)
    if s.re == 0 and abs(s.im) == 1:
        return "i" if s.im > 0 else "-i"
    # not produced by the parser; printed readably but reparses as a Sum
    sign = "+" if s.im >= 0 else "-"
    return f"({_frac(s.re)} {sign} {_frac(abs(s.im))}*i)"


def _is_negative(node) -> bool:
    if isinstance(node, Scalar):
        return node.negative()
    return isinstance(node, Product) and isinstance(node.factors[0], Scalar) and node.factors[0].negative()


def _factor_text(node) -> str:
    if isinstance(node, (Sum, Product)):
        return f"({to_text(node)})"
    return to_text(node)


def to_text(node: ExprNode) -> str:
    """Canonical text; ``parse(to_text(e)) == e`` for every parsed ``e``."""
    if isinstance(node, Scalar):
        return _scalar_text(node)
    if isinstance(node, Primitive):
        return f"{node.name}[{node.mode}]"
    if isinstance(node, Sum):
        parts = [_term_text(node.terms[0])]
        for t in node.terms[1:]:
            body = _minus_one_body(t)
            if body is not None:
                parts.append(f" - {body}")
            elif _is_negative(t):
                parts.append(f" - {_term_text(negate(t))}")
            else:
                parts.append(f" + {_term_text(t)}")
        return "".join(parts)
    if isinstance(node, Product):
        body = _minus_one_body(node)
        if body is not None:
            return "-" + body
        return "*".join(_factor_text(f) for f in node.factors)
    if isinstance(node, Dag):
        return f"dag({to_text(node.child)})"
    if isinstance(node, Pt):
        return f"pt({to_text(node.child)}; {','.join(str(m) for m in node.modes)})"
    if isinstance(node, Comm):
        return f"comm({to_text(node.left)}, {to_text(node.right)})"
    if isinstance(node, AComm):
        return f"acomm({to_text(node.left)}, {to_text(node.right)})"
    raise TypeError(f"not an expression node: {node!r}")


def _minus_one_body(node) -> str | None:
    """Text of ``rest`` for ``Product(-1, rest...)``; prefixing ``-`` reparses to ``node``."""
    if not isinstance(node, Product) or node.factors[0] != Scalar(Fraction(-1)):
        return None
    rest = node.factors[1:]
    if not rest or isinstance(rest[0], Scalar) or (len(rest) == 1 and isinstance(rest[0], Product)):
        return None
    return "*".join(_factor_text(f) for f in rest)


def _term_text(node) -> str:
    return f"({to_text(node)})" if isinstance(node, Sum) else to_text(node)


# --- lowering ---------------------------------------------------------------

def _primitive(node: Primitive, space: CompositeSpace) -> OperatorMatrix:
    if node.mode > space.n_modes:
        raise DslError(f"{node.name}[{node.mode}]: mode index out of range 1..{space.n_modes}")
    mode = space.mode(node.mode)
    need = PRIMITIVES[node.name]
    if mode.kind != need:
        raise DslError(f"{node.name}[{node.mode}] needs a {need} mode, mode {node.mode} is {mode.kind}")
    name = node.name
    if name in ("a", "jm", "km"):
        mat = ops.lowering(mode)
    elif name in ("ad", "jp", "kp"):
        mat = ops.raising(mode)
    elif name == "n":
        mat = ops.number_op(mode)
    elif name in ("x", "p"):
        mat = ops.quadratures(mode)[0 if name == "x" else 1]
    else:
        mat = ops.z_op(mode)
    return ops.embed(mat, node.mode, space)


def _lift(value, space):
    return value * OperatorMatrix.identity(space) if isinstance(value, complex) else value


def _lower(node, space):
    """Lower to a complex (pure scalar subtree) or an OperatorMatrix."""
    if isinstance(node, Scalar):
        return node.value
    if isinstance(node, Primitive):
        return _primitive(node, space)
    if isinstance(node, Sum):
        parts = [_lower(t, space) for t in node.terms]
        if all(isinstance(p, complex) for p in parts):
            return sum(parts, 0j)
        total = None
        for p in parts:
            p = _lift(p, space)
            total = p if total is None else total + p
        return total
    if isinstance(node, Product):
        acc = 1 + 0j
        for f in node.factors:
            val = _lower(f, space)
            acc = acc * val if isinstance(val, complex) or isinstance(acc, complex) else acc @ val
        return acc
    if isinstance(node, Dag):
        val = _lower(node.child, space)
        return val.conjugate() if isinstance(val, complex) else val.dag()
    if isinstance(node, Pt):
        for m in node.modes:
            if m > space.n_modes:
                raise DslError(f"pt mode {m} out of range 1..{space.n_modes}")
        return partial_transpose(_lift(_lower(node.child, space), space), node.modes)
    if isinstance(node, (Comm, AComm)):
        left, right = _lower(node.left, space), _lower(node.right, space)
        if isinstance(left, complex) or isinstance(right, complex):
            return _scalar_bracket(node, left, right)
        return ops.commutator(left, right) if isinstance(node, Comm) else ops.anticommutator(left, right)
    raise TypeError(f"not an expression node: {node!r}")


def _scalar_bracket(node, left, right):
    """Bracket with a scalar on at least one side: ``[s, X] = 0``, ``{s, X} = 2 s X``."""
    if isinstance(node, Comm):
        return 0j
    return 2 * left * right


def lower(expr: ExprNode | str, space: CompositeSpace) -> OperatorMatrix:
    """Matrix of an expression (or expression text) on ``space``."""
    if isinstance(expr, str):
        expr = parse(expr)
    return _lift(_lower(expr, space), space)


# --- corpus -----------------------------------------------------------------

@dataclass(frozen=True)
class CorpusEntry:
    name: str
    text: str
    space: CompositeSpace
    line: int


def read_corpus(text: str) -> list[CorpusEntry]:
    """Parse a corpus file: ``@space {json}`` lines select the space, ``NAME = expr`` define operators."""
    entries, space = [], None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("@space"):
            space = CompositeSpace.from_json(json.loads(line[len("@space"):]))
            continue
        name, sep, expr = line.partition("=")
        if not sep or not name.strip():
            raise DslError(f"corpus line {lineno}: expected NAME = expression")
        if space is None:
            raise DslError(f"corpus line {lineno}: no @space declared yet")
        entries.append(CorpusEntry(name.strip(), expr.strip(), space, lineno))
    return entries


def load_corpus() -> list[CorpusEntry]:
    """The shipped corpus of the built-in operator families."""
    return read_corpus(resources.files("entcrit.data").joinpath("family_ops.txt").read_text())


def corpus_matrix(entry: CorpusEntry) -> OperatorMatrix:
    return lower(parse(entry.text), entry.space)


__all__ = [
    "AComm", "Comm", "CorpusEntry", "Dag", "DslError", "DslSyntaxError", "ExprNode", "Primitive",
    "Product", "Pt", "Scalar", "Sum", "corpus_matrix", "load_corpus", "lower", "negate", "parse",
    "read_corpus", "to_text",
]
