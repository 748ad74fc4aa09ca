"""Black-box functions: external programs and small expression trees.

Wire protocol for morphism families, one request and one response per line,
ASCII decimal integers separated by single spaces, lines ending in ``\\n``::

    request:   <vertex> <x_0> ... <x_{n-1}>
    response:  <k> <a_0> ... <a_{k-1}> <s>

``vertex`` is 0 for the main vertex and ``j + 1`` for the j-th relation
symbol of the language. The response is the expression
``(a_0, ..., a_{k-1}) (x) F[k][s]``, with ``s`` indexing ``F[k]`` in the
functor's element order.
"""

from __future__ import annotations

import ast
import shlex
import subprocess
import threading
from typing import Callable, Sequence

from .errors import ExpressionParseError
from .functor import TruncatedFunctor
from .pairing import pair_n, unpair_n


def format_request(vertex: int, xs: Sequence[int]) -> str:
    return " ".join(str(int(v)) for v in (vertex, *xs)) + "\n"


def parse_response(line: str, F: TruncatedFunctor) -> tuple[tuple[int, ...], str]:
    parts = line.split()
    try:
        nums = [int(p) for p in parts]
    except ValueError:
        raise ExpressionParseError(f"non-integer token in response {line!r}") from None
    if not nums or nums[0] < 0 or len(nums) != nums[0] + 2:
        raise ExpressionParseError(f"malformed response {line!r}")
    k = nums[0]
    values, s = tuple(nums[1 : k + 1]), nums[k + 1]
    if k > F.bound:
        G = F.with_bound(k)
        if G is None:
            raise ExpressionParseError(f"arity {k} exceeds the functor bound {F.bound}")
        F = G
    if not 0 <= s < F.size(k):
        raise ExpressionParseError(f"element index {s} out of range for F[{k}]")
    if any(v < 0 for v in values):
        raise ExpressionParseError(f"negative value in response {line!r}")
    return values, F.values(k)[s]


def format_response(values: Sequence[int], s: int) -> str:
    return " ".join(str(int(v)) for v in (len(values), *values, s)) + "\n"


class SubprocessMorphism:
    """A morphism family served by an external program; calls are serialized."""

    def __init__(self, command: str | Sequence[str], F: TruncatedFunctor, n: int, symbols: Sequence[str] = ()):
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.F = F
        self.n = n
        self.symbols = list(symbols)
        self._lock = threading.Lock()
        self._proc: subprocess.Popen | None = None

    def _process(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        return self._proc

    def _call(self, vertex: int, xs) -> tuple[tuple[int, ...], str]:
        with self._lock:
            proc = self._process()
            proc.stdin.write(format_request(vertex, xs))
            proc.stdin.flush()
            line = proc.stdout.readline()
        if not line:
            raise ExpressionParseError(f"{self.command[0]} closed its output")
        return parse_response(line, self.F)

    def main(self, xs):
        return self._call(0, xs)

    def component(self, symbol, xs):
        return self._call(self.symbols.index(symbol) + 1, xs)

    def close(self):
        if self._proc is not None:
            self._proc.stdin.close()
            self._proc.wait(timeout=5)
            self._proc = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def serve(family, F: TruncatedFunctor, symbols: Sequence[str], stdin, stdout) -> None:
    """Answer protocol requests from ``stdin`` with ``family`` (used by test doubles)."""
    for line in stdin:
        if not line.strip():
            continue
        vertex, *xs = (int(p) for p in line.split())
        if vertex == 0:
            values, label = family.main(tuple(xs))
        else:
            values, label = family.component(symbols[vertex - 1], tuple(xs))
        stdout.write(format_response(values, F.index(len(values), label)))
        stdout.flush()


# -- expression trees over ℕ --------------------------------------------------

_FUNCS: dict[str, Callable] = {
    "pair": lambda *xs: pair_n(list(xs)),
    "p": lambda n, i, x: unpair_n(n, x)[i],
    "min": min,
    "max": max,
}
_BINOPS = {ast.Add: lambda a, b: a + b, ast.Mult: lambda a, b: a * b,
           ast.Sub: lambda a, b: max(a - b, 0), ast.FloorDiv: lambda a, b: a // b if b else 0,
           ast.Mod: lambda a, b: a % b if b else 0}


def parse_nat_function(text: str, n: int) -> Callable[..., int]:
    """Compile a small expression in ``x0 .. x{n-1}`` into a function ℕ^n -> ℕ.

    Allowed: integer literals, ``+ * - // %`` (``-`` truncated at 0),
    ``pair(a, b, ...)``, ``p(n, i, x)``, ``min``, ``max`` and
    ``a if cond else b`` with comparisons.
    """
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ExpressionParseError(f"cannot parse {text!r}: {exc.msg}") from None
    names = {f"x{i}" for i in range(n)}

    def build(node) -> Callable[[Sequence[int]], int]:
        if isinstance(node, ast.Constant) and isinstance(node.value, int) and node.value >= 0:
            v = node.value
            return lambda xs: v
        if isinstance(node, ast.Name) and node.id in names:
            i = int(node.id[1:])
            return lambda xs: xs[i]
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            op, a, b = _BINOPS[type(node.op)], build(node.left), build(node.right)
            return lambda xs: op(a(xs), b(xs))
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS and not node.keywords:
            fn, args = _FUNCS[node.func.id], [build(a) for a in node.args]
            return lambda xs: fn(*(a(xs) for a in args))
        if isinstance(node, ast.IfExp):
            c, a, b = build(node.test), build(node.body), build(node.orelse)
            return lambda xs: a(xs) if c(xs) else b(xs)
        if isinstance(node, ast.Compare) and len(node.ops) == 1:
            ops = {ast.Eq: int.__eq__, ast.NotEq: int.__ne__, ast.Lt: int.__lt__,
                   ast.LtE: int.__le__, ast.Gt: int.__gt__, ast.GtE: int.__ge__}
            if type(node.ops[0]) in ops:
                op, a, b = ops[type(node.ops[0])], build(node.left), build(node.comparators[0])
                return lambda xs: int(op(a(xs), b(xs)))
        raise ExpressionParseError(f"unsupported syntax in {text!r}: {ast.dump(node)[:60]}")

    body = build(tree.body)

    def f(*xs: int) -> int:
        if len(xs) != n:
            raise ValueError(f"expected {n} arguments")
        return body(xs)

    f.__name__ = f"<{text}>"
    return f

