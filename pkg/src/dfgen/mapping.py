"""Rooted top-down mapping between a current and a target graph.

This is deliberately not general subgraph isomorphism: matching starts at the
roots and walks down slot edges, so it stays linear-ish and deterministic.
Commutative children are matched greedily by (label, recursive match size)
with canonical serialization order as the tie-break.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import RootMismatchError
from .graph import DataflowGraph, canonical_key
from .types import Registry


@dataclass
class Mapping:
    """Injective partial map from current node ids to target node ids."""

    pairs: dict[int, int] = field(default_factory=dict)

    def target_of(self, current_id: int) -> int | None:
        return self.pairs.get(current_id)

    def maps_to(self, current_id: int, target_id: int) -> bool:
        return self.pairs.get(current_id) == target_id

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass
class OpenSlot:
    path: str                 # dotted slot path relative to the point's node
    target_node: int          # terminal in the target graph holding the value
    reason: str               # "missing" | "differs"
    value: str = ""           # surface form of the target terminal


@dataclass
class ExtensionPoint:
    current_node: int
    target_node: int
    open_slots: list[OpenSlot] = field(default_factory=list)
    info_fields: list[str] = field(default_factory=list)


class ExtensionPolicy:
    """Domain hook table: which nodes accept extension, which slot carries
    agent-provided info.  The default allows every function node."""

    def extensible(self, fn_name: str) -> bool:
        return True

    def info_slot(self, fn_name: str) -> str | None:
        return None

    def info_fields(self, current: DataflowGraph, target: DataflowGraph,
                    c_node: int | None, t_node: int) -> list[str]:
        return []


def _labels_match(current: DataflowGraph, target: DataflowGraph, c: int, t: int) -> bool:
    cn, tn = current.nodes[c], target.nodes[t]
    if cn.terminal != tn.terminal:
        return False
    return cn.payload == tn.payload


def map_graphs(current: DataflowGraph, target: DataflowGraph, registry: Registry) -> Mapping:
    """Greedy top-down mapping.  Raises RootMismatchError when the roots
    already disagree."""
    if current.root is None or target.root is None:
        raise RootMismatchError(str(current.root), str(target.root))
    if not _labels_match(current, target, current.root, target.root):
        raise RootMismatchError(
            current.nodes[current.root].payload, target.nodes[target.root].payload
        )

    mapping = Mapping()

    def match_size(c: int, t: int) -> int:
        """Size of the tentative mapping rooted at (c, t); 0 if labels differ."""
        if not _labels_match(current, target, c, t):
            return 0
        probe = Mapping()
        descend(c, t, probe)
        return len(probe)

    def descend(c: int, t: int, into: Mapping) -> None:
        into.pairs[c] = t
        cn, tn = current.nodes[c], target.nodes[t]
        if cn.terminal:
            return
        sig = registry.function(cn.payload)
        if sig is not None and (sig.commutative or sig.variadic):
            c_kids = sorted(cn.inputs.values(),
                            key=lambda k: canonical_key(current, registry, k))
            t_kids = list(tn.inputs.values())
            used: set[int] = set()
            for ck in c_kids:
                best, best_rank = None, None
                for tk in t_kids:
                    if tk in used:
                        continue
                    size = match_size(ck, tk)
                    if size == 0:
                        continue
                    rank = (-size, canonical_key(target, registry, tk))
                    if best_rank is None or rank < best_rank:
                        best, best_rank = tk, rank
                if best is not None:
                    used.add(best)
                    descend(ck, best, into)
        else:
            for slot, ck in cn.inputs.items():
                tk = tn.inputs.get(slot)
                if tk is not None and _labels_match(current, target, ck, tk):
                    descend(ck, tk, into)

    descend(current.root, target.root, mapping)
    return mapping


def extensible_nodes(current: DataflowGraph, target: DataflowGraph, mapping: Mapping,
                     registry: Registry, policy: ExtensionPolicy | None = None) -> list[ExtensionPoint]:
    """Extension points over mapped current nodes, in ascending node id order.

    A slot is open when the target fills it and the current side is missing
    (or holds a different terminal).  When a whole function-valued subtree is
    missing on the current side, its assignable leaf slots are surfaced on the
    nearest mapped ancestor as dotted paths, so something is always requestable.
    """
    policy = policy or ExtensionPolicy()
    points: list[ExtensionPoint] = []
    mapped_targets = set(mapping.pairs.values())

    def open_slots_under(t_node: int, c_node: int | None, prefix: str) -> list[OpenSlot]:
        out: list[OpenSlot] = []
        tn = target.nodes[t_node]
        info_slot = policy.info_slot(tn.payload) if not tn.terminal else None
        for slot, t_child in tn.inputs.items():
            if slot == info_slot:
                continue
            path = f"{prefix}{slot}"
            t_child_node = target.nodes[t_child]
            c_child = None
            if c_node is not None:
                c_child = current.nodes[c_node].inputs.get(slot)
            if t_child_node.terminal:
                if c_child is None:
                    out.append(OpenSlot(path, t_child, "missing", t_child_node.payload))
                else:
                    c_child_node = current.nodes[c_child]
                    if not c_child_node.terminal or c_child_node.payload != t_child_node.payload:
                        out.append(OpenSlot(path, t_child, "differs", t_child_node.payload))
            else:
                if c_child is not None and mapping.maps_to(c_child, t_child):
                    continue  # handled by the child's own point
                out.extend(open_slots_under(t_child, c_child, f"{path}."))
        return out

    for c_id in sorted(mapping.pairs):
        t_id = mapping.pairs[c_id]
        node = current.nodes[c_id]
        if node.terminal or not policy.extensible(node.payload):
            continue
        slots = open_slots_under(t_id, c_id, "")
        info = policy.info_fields(current, target, c_id, t_id)
        if slots or info:
            points.append(ExtensionPoint(c_id, t_id, slots, list(info)))
    return points


def missing_and_differing(points: list[ExtensionPoint]) -> int:
    """Total open-slot count; the progress measure used by the simulator tests."""
    return sum(len(p.open_slots) for p in points)
