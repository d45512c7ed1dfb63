"""Dataflow graphs: nodes, canonical serialization, equivalence, typecheck.

Nodes are either function applications (payload = function name, inputs keyed
by slot name) or terminals (payload = surface value, no inputs).  The input
edge relation is kept acyclic by every mutating method.  Result links record
evaluation products and are ignored by equivalence and serialization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    ArityMismatchError,
    CycleError,
    TypeMismatchError,
    UnknownFunctionError,
)
from .types import Registry


@dataclass
class Node:
    id: int
    payload: str
    terminal: bool
    inputs: dict[str, int] = field(default_factory=dict)
    result: int | None = None


class DataflowGraph:
    def __init__(self):
        self.nodes: dict[int, Node] = {}
        self.root: int | None = None
        self._next = 0

    def __len__(self) -> int:
        return len(self.nodes)

    def node(self, nid: int) -> Node:
        return self.nodes[nid]

    def _new_id(self) -> int:
        self._next += 1
        return self._next

    def add_terminal(self, value: str) -> int:
        nid = self._new_id()
        self.nodes[nid] = Node(nid, " ".join(str(value).split()), True)
        return nid

    def add_call(self, fn_name: str, inputs: dict[str, int] | None = None) -> int:
        inputs = dict(inputs or {})
        for child in inputs.values():
            if child not in self.nodes:
                raise KeyError(f"unknown child node {child}")
        nid = self._new_id()
        self.nodes[nid] = Node(nid, fn_name, False, inputs)
        return nid

    def set_input(self, nid: int, slot: str, child: int) -> None:
        if self._reaches(child, nid):
            raise CycleError(f"edge {nid}->{child} would close a cycle")
        self.nodes[nid].inputs[slot] = child

    def set_result(self, nid: int, result: int) -> None:
        self.nodes[nid].result = result

    def _reaches(self, start: int, goal: int) -> bool:
        stack, seen = [start], set()
        while stack:
            cur = stack.pop()
            if cur == goal:
                return True
            if cur in seen:
                continue
            seen.add(cur)
            stack.extend(self.nodes[cur].inputs.values())
        return False

    # -- structure helpers --------------------------------------------------

    def reachable(self, start: int | None = None, results: bool = True) -> set[int]:
        start = self.root if start is None else start
        if start is None:
            return set()
        stack, seen = [start], set()
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            node = self.nodes[cur]
            stack.extend(node.inputs.values())
            if results and node.result is not None:
                stack.append(node.result)
        return seen

    def parents_of(self, nid: int) -> list[tuple[int, str]]:
        out = []
        for node in self.nodes.values():
            for slot, child in node.inputs.items():
                if child == nid:
                    out.append((node.id, slot))
        return out

    def copy(self) -> "DataflowGraph":
        g = DataflowGraph()
        g._next = self._next
        g.root = self.root
        for nid, node in self.nodes.items():
            g.nodes[nid] = Node(nid, node.payload, node.terminal, dict(node.inputs), node.result)
        return g

    def subgraph(self, root: int) -> "DataflowGraph":
        """Copy of the subtree under root (inputs and result links), reindexed."""
        g = DataflowGraph()
        mapping: dict[int, int] = {}
        for nid in sorted(self.reachable(root)):
            node = self.nodes[nid]
            if node.terminal:
                mapping[nid] = g.add_terminal(node.payload)
            else:
                mapping[nid] = g.add_call(node.payload)
        for nid, new in mapping.items():
            node = self.nodes[nid]
            for slot, child in node.inputs.items():
                g.nodes[new].inputs[slot] = mapping[child]
            if node.result is not None and node.result in mapping:
                g.nodes[new].result = mapping[node.result]
        g.root = mapping[root]
        return g

    def graft(self, other: "DataflowGraph", other_root: int | None = None) -> int:
        """Copy another graph's subtree into this one, returning the new root id."""
        other_root = other.root if other_root is None else other_root
        mapping: dict[int, int] = {}
        for nid in sorted(other.reachable(other_root)):
            node = other.nodes[nid]
            if node.terminal:
                mapping[nid] = self.add_terminal(node.payload)
            else:
                mapping[nid] = self.add_call(node.payload)
        for nid, new in mapping.items():
            node = other.nodes[nid]
            for slot, child in node.inputs.items():
                self.nodes[new].inputs[slot] = mapping[child]
            if node.result is not None and node.result in mapping:
                self.nodes[new].result = mapping[node.result]
        return mapping[other_root]

    def replace_node(self, old: int, other: "DataflowGraph", other_root: int | None = None) -> int:
        """Splice another graph in place of a node; returns the spliced root id."""
        new_root = self.graft(other, other_root)
        for pid, slot in self.parents_of(old):
            if self.nodes[pid].inputs.get(slot) == old:
                self.nodes[pid].inputs[slot] = new_root
        if self.root == old:
            self.root = new_root
        return new_root


# -- canonical serialization ---------------------------------------------


def _ordered_inputs(node: Node, registry: Registry) -> list[tuple[str, int]]:
    sig = registry.function(node.payload)
    if sig is None:
        return sorted(node.inputs.items())
    order = sig.slot_order(set(node.inputs))
    return [(name, node.inputs[name]) for name in order]


def serialize(graph: DataflowGraph, registry: Registry, root: int | None = None) -> str:
    """Canonical text form: one space inside parens, commas between args,
    slots in signature order, positional while they form a signature prefix."""

    def render(nid: int) -> str:
        node = graph.nodes[nid]
        if node.terminal:
            return node.payload
        sig = registry.function(node.payload)
        name = registry.canonical_name(node.payload)
        parts = []
        if sig is not None and not sig.variadic:
            filled = set(node.inputs)
            prefix = True
            for spec in sig.slots:
                if spec.name not in filled:
                    prefix = False
                    continue
                text = render(node.inputs[spec.name])
                parts.append(text if prefix else f"{spec.name}={text}")
        else:
            for _, child in _ordered_inputs(node, registry):
                parts.append(render(child))
        if not parts:
            return f"{name}( )"
        return f"{name}( " + " , ".join(parts) + " )"

    return render(graph.root if root is None else root)


# -- equivalence ------------------------------------------------------------


def canonical_key(graph: DataflowGraph, registry: Registry, root: int | None = None):
    """Order-insensitive content key: ids and result links ignored,
    commutative children compared as multisets."""

    def key(nid: int):
        node = graph.nodes[nid]
        if node.terminal:
            return ("t", node.payload)
        name = registry.canonical_name(node.payload)
        sig = registry.function(node.payload)
        pairs = _ordered_inputs(node, registry)
        if sig is not None and (sig.commutative or sig.variadic):
            return ("f", name, "c", tuple(sorted(key(c) for _, c in pairs)))
        return ("f", name, "n", tuple((slot, key(c)) for slot, c in pairs))

    return key(graph.root if root is None else root)


def equivalent(a: DataflowGraph, b: DataflowGraph, registry: Registry) -> bool:
    if a.root is None or b.root is None:
        return a.root is None and b.root is None
    return canonical_key(a, registry) == canonical_key(b, registry)


# -- typechecking -----------------------------------------------------------


def typecheck(graph: DataflowGraph, registry: Registry, root: int | None = None) -> str:
    """Returns the root's semantic type or raises.

    Terminal types are inferred from the slot they fill; a free-standing
    terminal defaults to Str.  Subtyping is honored slot-wise.
    """
    root = graph.root if root is None else root
    memo: dict[int, str] = {}
    active: set[int] = set()

    def check(nid: int) -> str:
        if nid in memo:
            return memo[nid]
        if nid in active:
            raise CycleError(f"input edges cycle through node {nid}")
        node = graph.nodes[nid]
        if node.terminal:
            return "Str"
        active.add(nid)
        sig = registry.function(node.payload)
        if sig is None:
            raise UnknownFunctionError(node.payload)
        name = registry.canonical_name(node.payload)
        if sig.variadic:
            if not node.inputs:
                raise ArityMismatchError(name, "needs at least one argument")
            idx = sorted(int(k[3:]) for k in node.inputs if sig.slot(k) is not None)
            if len(idx) != len(node.inputs) or idx != list(range(len(idx))):
                raise ArityMismatchError(name, "bad variadic argument keys")
        else:
            for slot in node.inputs:
                if sig.slot(slot) is None:
                    raise ArityMismatchError(name, f"no slot named {slot!r}")
            for spec in sig.slots:
                if spec.required and spec.name not in node.inputs:
                    raise ArityMismatchError(name, f"missing required slot {spec.name!r}")
        for slot, child in node.inputs.items():
            spec = sig.slot(slot)
            child_node = graph.nodes[child]
            if child_node.terminal:
                if not registry.terminal_ok(spec.type, child_node.payload):
                    raise TypeMismatchError(slot, spec.type, f"terminal {child_node.payload!r}")
                continue
            got = check(child)
            if not registry.is_subtype(got, spec.type):
                raise TypeMismatchError(slot, spec.type, got)
        active.discard(nid)
        hook = registry.dynamic_return(name)
        out = hook(graph, node, registry) if hook else sig.returns
        memo[nid] = out
        return out

    if graph.nodes[root].terminal:
        return "Str"
    return check(root)
