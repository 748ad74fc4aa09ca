"""First-order formulas over a relational language and their evaluation.

Surface syntax::

    forall x. exists y. (r(x,y) & !r(y,x))
    x = y | r(x, x) -> false

``!`` binds tightest, then ``&``, ``|``, ``->`` (right associative) and
``<->``. A quantifier body extends as far right as possible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from .errors import FormulaError


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Atom:
    symbol: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Eq:
    left: str
    right: str


@dataclass(frozen=True)
class Not:
    body: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # "&", "|", "->", "<->"
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Quant:
    kind: str  # "forall" | "exists"
    var: str
    body: "Node"


Node = Union[Const, Atom, Eq, Not, BinOp, Quant]


def free_variables(node: Node) -> list[str]:
    """Free variables in order of first occurrence."""
    out: list[str] = []

    def walk(n, bound):
        if isinstance(n, Atom):
            vs = n.args
        elif isinstance(n, Eq):
            vs = (n.left, n.right)
        elif isinstance(n, Not):
            return walk(n.body, bound)
        elif isinstance(n, BinOp):
            walk(n.left, bound)
            return walk(n.right, bound)
        elif isinstance(n, Quant):
            return walk(n.body, bound | {n.var})
        else:
            return
        for v in vs:
            if v not in bound and v not in out:
                out.append(v)

    walk(node, frozenset())
    return out


def symbols(node: Node) -> dict[str, int]:
    out: dict[str, int] = {}

    def walk(n):
        if isinstance(n, Atom):
            if out.setdefault(n.symbol, len(n.args)) != len(n.args):
                raise FormulaError(f"symbol {n.symbol} used with two arities")
        elif isinstance(n, Not):
            walk(n.body)
        elif isinstance(n, BinOp):
            walk(n.left)
            walk(n.right)
        elif isinstance(n, Quant):
            walk(n.body)

    walk(node)
    return out


_PREC = {"<->": 1, "->": 2, "|": 3, "&": 4}


def to_text(node: Node, parent: int = 0) -> str:
    if isinstance(node, Const):
        return "true" if node.value else "false"
    if isinstance(node, Atom):
        return f"{node.symbol}({','.join(node.args)})"
    if isinstance(node, Eq):
        return f"{node.left}={node.right}"
    if isinstance(node, Not):
        return "!" + to_text(node.body, 5)
    if isinstance(node, Quant):
        s = f"{node.kind} {node.var}. {to_text(node.body, 0)}"
        return f"({s})" if parent else s
    p = _PREC[node.op]
    s = f"{to_text(node.left, p + (node.op == '->'))} {node.op} {to_text(node.right, p + (node.op != '->'))}"
    return f"({s})" if p < parent or (p == parent and parent) else s


@dataclass(frozen=True)
class Formula:
    """A formula together with the ordered list of its free variables."""

    node: Node
    free_vars: tuple[str, ...]

    def __post_init__(self):
        actual = free_variables(self.node)
        if set(actual) != set(self.free_vars) or len(set(self.free_vars)) != len(self.free_vars):
            raise FormulaError(
                f"declared free variables {list(self.free_vars)} do not match {actual}"
            )

    @property
    def arity(self) -> int:
        return len(self.free_vars)

    def negate(self) -> "Formula":
        return Formula(Not(self.node), self.free_vars)

    def __str__(self):
        return to_text(self.node)


_TOKEN = re.compile(
    r"\s*(?:(?P<op><->|->|[!~&|(),.=])|(?P<uop>[¬∧∨→∀∃↔])|(?P<id>[A-Za-z_][A-Za-z_0-9']*))"
)
_UNICODE = {"¬": "!", "∧": "&", "∨": "|", "→": "->", "↔": "<->", "∀": "forall", "∃": "exists"}


def _tokenize(text: str) -> list[tuple[str, int]]:
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise FormulaError(f"unexpected character {text[pos]!r} at {pos}")
        tok = m.group("op") or m.group("id") or _UNICODE[m.group("uop")]
        if tok == "~":
            tok = "!"
        out.append((tok, m.start(m.lastindex)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def take(self, expected=None):
        if self.i >= len(self.toks):
            raise FormulaError(f"unexpected end of formula, expected {expected or 'more input'}")
        tok, at = self.toks[self.i]
        if expected is not None and tok != expected:
            raise FormulaError(f"expected {expected!r} at {at}, found {tok!r}")
        self.i += 1
        return tok

    def ident(self):
        tok = self.take()
        if not re.match(r"[A-Za-z_]", tok) or tok in ("forall", "exists", "true", "false"):
            raise FormulaError(f"expected a variable, found {tok!r}")
        return tok

    def parse(self):
        node = self.iff()
        if self.peek() is not None:
            raise FormulaError(f"trailing input at {self.toks[self.i][1]}: {self.peek()!r}")
        return node

    def iff(self):
        left = self.implication()
        while self.peek() == "<->":
            self.take()
            left = BinOp("<->", left, self.implication())
        return left

    def implication(self):
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return BinOp("->", left, self.implication())
        return left

    def disjunction(self):
        left = self.conjunction()
        while self.peek() == "|":
            self.take()
            left = BinOp("|", left, self.conjunction())
        return left

    def conjunction(self):
        left = self.unary()
        while self.peek() == "&":
            self.take()
            left = BinOp("&", left, self.unary())
        return left

    def unary(self):
        tok = self.peek()
        if tok == "!":
            self.take()
            return Not(self.unary())
        if tok in ("forall", "exists"):
            self.take()
            var = self.ident()
            if self.peek() == ".":
                self.take()
            return Quant(tok, var, self.iff())
        if tok == "(":
            self.take()
            node = self.iff()
            self.take(")")
            return node
        if tok in ("true", "false"):
            self.take()
            return Const(tok == "true")
        name = self.ident()
        if self.peek() == "(":
            self.take()
            args = []
            if self.peek() != ")":
                args.append(self.ident())
                while self.peek() == ",":
                    self.take()
                    args.append(self.ident())
            self.take(")")
            return Atom(name, tuple(args))
        if self.peek() == "=":
            self.take()
            return Eq(name, self.ident())
        raise FormulaError(f"expected an atom after {name!r}")


def parse_formula(text: str, free_vars: Sequence[str] | None = None) -> Formula:
    node = _Parser(text).parse()
    if free_vars is None:
        free_vars = free_variables(node)
    return Formula(node, tuple(free_vars))


def eval_formula(structure, formula: Formula | Node, assignment: Mapping[str, object]) -> bool:
    """Tarski semantics over the finite carrier of ``structure``."""
    node = formula.node if isinstance(formula, Formula) else formula
    carrier = structure.carrier
    rels = structure.relations
    arities = dict(structure.language.symbols)

    def lookup(env, v):
        try:
            return env[v]
        except KeyError:
            raise FormulaError(f"unbound variable {v!r}") from None

    def ev(n, env):
        if isinstance(n, Atom):
            if n.symbol not in arities:
                raise FormulaError(f"symbol {n.symbol!r} not in the language")
            if arities[n.symbol] != len(n.args):
                raise FormulaError(f"{n.symbol} has arity {arities[n.symbol]}, used with {len(n.args)}")
            return tuple(lookup(env, v) for v in n.args) in rels[n.symbol]
        if isinstance(n, Eq):
            return lookup(env, n.left) == lookup(env, n.right)
        if isinstance(n, Not):
            return not ev(n.body, env)
        if isinstance(n, BinOp):
            a = ev(n.left, env)
            if n.op == "&":
                return a and ev(n.right, env)
            if n.op == "|":
                return a or ev(n.right, env)
            if n.op == "->":
                return (not a) or ev(n.right, env)
            return a == ev(n.right, env)
        if isinstance(n, Quant):
            test = all if n.kind == "forall" else any
            return test(ev(n.body, {**env, n.var: c}) for c in carrier)
        if isinstance(n, Const):
            return n.value
        raise FormulaError(f"unknown node {n!r}")

    if isinstance(formula, Formula):
        missing = [v for v in formula.free_vars if v not in assignment]
        if missing:
            raise FormulaError(f"unbound variable {missing[0]!r}")
    return ev(node, dict(assignment))
