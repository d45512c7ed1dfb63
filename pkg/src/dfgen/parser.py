"""Recursive-descent parser for the printed dataflow expression format.

Grammar sketch:

    expr     := call | terminal
    call     := NAME ws? '(' ws? args? ws? ')'
    args     := arg ( ws? ',' ws? arg )*
    arg      := SLOT '=' expr          (named, slot must exist on the host)
              | expr                    (positional)
    terminal := any run of characters up to the next ',' or ')' at this level

Function names may start with ':' (accessors).  Terminals may contain spaces
("get together") and punctuation such as ':' in clock times; they are consumed
greedily and whitespace-normalized.  A leading word followed by '=' is only
treated as a named argument when the host actually declares that slot, so
odd terminals stay parseable.
"""

from __future__ import annotations

from .errors import (
    ArityMismatchError,
    ExpressionSyntaxError,
    UnknownFunctionError,
)
from .graph import DataflowGraph, typecheck
from .types import FunctionSignature, Registry

_DELIMS = set(" \t\n(),=")


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t\n":
            self.pos += 1

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def word(self) -> str:
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] not in _DELIMS:
            self.pos += 1
        return self.text[start:self.pos]

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            raise ExpressionSyntaxError(f"expected {ch!r}", self.pos)
        self.pos += 1


def parse_expression(text: str, registry: Registry) -> DataflowGraph:
    """Parse and typecheck one expression, returning its graph."""
    graph = DataflowGraph()
    sc = _Scanner(text)
    sc.ws()
    if not sc.peek():
        raise ExpressionSyntaxError("empty expression", 0)
    root = _expr(sc, graph, registry)
    sc.ws()
    if sc.pos != len(sc.text):
        raise ExpressionSyntaxError("trailing characters", sc.pos)
    graph.root = root
    typecheck(graph, registry)
    return graph


def _expr(sc: _Scanner, graph: DataflowGraph, registry: Registry) -> int:
    sc.ws()
    mark = sc.pos
    name = sc.word()
    sc.ws()
    if name and sc.peek() == "(":
        sc.pos += 1
        return _call(sc, graph, registry, name, mark)
    sc.pos = mark
    return _terminal(sc, graph)


def _terminal(sc: _Scanner, graph: DataflowGraph) -> int:
    start = sc.pos
    while sc.pos < len(sc.text) and sc.text[sc.pos] not in {",", ")"}:
        if sc.text[sc.pos] == "(":
            raise ExpressionSyntaxError("unexpected '('", sc.pos)
        sc.pos += 1
    raw = sc.text[start:sc.pos].strip()
    if not raw:
        raise ExpressionSyntaxError("empty value", start)
    return graph.add_terminal(raw)


def _call(sc: _Scanner, graph: DataflowGraph, registry: Registry, name: str, at: int) -> int:
    sig = registry.function(name)
    if sig is None:
        raise UnknownFunctionError(name)
    canonical = registry.canonical_name(name)
    inputs: dict[str, int] = {}
    positional = 0

    sc.ws()
    if sc.peek() == ")":
        sc.pos += 1
        return graph.add_call(canonical, inputs)

    while True:
        sc.ws()
        child, slot = _argument(sc, graph, registry, sig)
        if slot is None:
            slot = _next_positional(sig, positional, inputs, canonical)
            positional += 1
        if slot in inputs:
            raise ArityMismatchError(canonical, f"slot {slot!r} filled twice")
        inputs[slot] = child
        sc.ws()
        if sc.peek() == ",":
            sc.pos += 1
            continue
        sc.expect(")")
        break
    return graph.add_call(canonical, inputs)


def _argument(sc, graph, registry, sig: FunctionSignature) -> tuple[int, str | None]:
    mark = sc.pos
    word = sc.word()
    sc.ws()
    if word and sc.peek() == "=" and not sig.variadic and sig.slot(word) is not None:
        sc.pos += 1
        return _expr(sc, graph, registry), word
    sc.pos = mark
    return _expr(sc, graph, registry), None


def _next_positional(sig: FunctionSignature, index: int, inputs, canonical: str) -> str:
    if sig.variadic:
        return f"arg{index}"
    free = [s.name for s in sig.slots if s.name not in inputs]
    if not free:
        raise ArityMismatchError(canonical, "too many arguments")
    return free[0]
