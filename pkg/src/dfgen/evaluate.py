"""Bottom-up graph evaluation against a domain context.

The context supplies one handler per function name.  Handlers receive the
already-evaluated input values keyed by slot and return a plain Python value.
Terminals evaluate to their surface string and point their result link at
themselves; every call node gets a result link to a terminal carrying the
value's surface form.
"""

from __future__ import annotations

from .errors import EvaluationError
from .graph import DataflowGraph
from .types import Registry


class EvalContext:
    """Base context: knows the registry and a handler table."""

    def __init__(self, registry: Registry, handlers: dict | None = None):
        self.registry = registry
        self.handlers = dict(handlers or {})

    def call(self, name: str, args: dict, node, graph: DataflowGraph):
        handler = self.handlers.get(name)
        if handler is None:
            raise EvaluationError(node.id, f"no handler for {name}")
        return handler(args, node, graph)

    def surface(self, value) -> str:
        return value if isinstance(value, str) else str(value)


def evaluate(graph: DataflowGraph, context: EvalContext, root: int | None = None):
    """Evaluate the subtree under root (default: graph root), filling result
    links, and return the root value."""
    root = graph.root if root is None else root
    memo: dict[int, object] = {}

    def run(nid: int):
        if nid in memo:
            return memo[nid]
        node = graph.nodes[nid]
        if node.terminal:
            node.result = nid
            memo[nid] = node.payload
            return node.payload
        name = context.registry.canonical_name(node.payload)
        args = {slot: run(child) for slot, child in node.inputs.items()}
        try:
            value = context.call(name, args, node, graph)
        except EvaluationError:
            raise
        except (ValueError, KeyError, TypeError) as exc:
            raise EvaluationError(nid, str(exc)) from exc
        node.result = graph.add_terminal(context.surface(value))
        memo[nid] = value
        return value

    return run(root)
