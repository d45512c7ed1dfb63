"""Structural dedup and training-corpus assembly.

Training pairs travel as UTF-8 tab-separated lines, `nl \\t df`, one per
line.  Deduplication keys on the expression's shape only: terminal values
are masked out, so two requests that differ merely in who/when/where
collapse onto one representative.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import MalformedLineError
from .graph import DataflowGraph
from .parser import parse_expression
from .types import Registry

_REGISTRY: Registry | None = None


def _default_registry() -> Registry:
    global _REGISTRY
    if _REGISTRY is None:
        from .domains import combined_registry
        _REGISTRY = combined_registry()
    return _REGISTRY


def structure_key(graph: DataflowGraph, registry: Registry | None = None,
                  root: int | None = None) -> str:
    """Canonical text with every terminal masked as `_`.

    Children of commutative functions are sorted lexicographically, so the
    key is insensitive to both terminal values and commutative order.
    """
    registry = registry or _default_registry()

    def mask(nid: int) -> str:
        node = graph.nodes[nid]
        if node.terminal:
            return "_"
        sig = registry.function(node.payload)
        name = registry.canonical_name(node.payload)
        parts: list[str] = []
        if sig is not None and not sig.variadic:
            filled = set(node.inputs)
            prefix = True
            for spec in sig.slots:
                if spec.name not in filled:
                    prefix = False
                    continue
                text = mask(node.inputs[spec.name])
                parts.append(text if prefix else f"{spec.name}={text}")
        else:
            for _, child in sorted(node.inputs.items()):
                parts.append(mask(child))
        if sig is not None and (sig.commutative or sig.variadic):
            parts.sort()
        if not parts:
            return f"{name}( )"
        return f"{name}( " + " , ".join(parts) + " )"

    return mask(graph.root if root is None else root)


@dataclass(frozen=True)
class CorpusPair:
    nl: str
    df: str
    structure_key: str


def make_pair(nl: str, df: str, registry: Registry | None = None) -> CorpusPair:
    registry = registry or _default_registry()
    graph = parse_expression(df, registry)
    return CorpusPair(nl, df, structure_key(graph, registry))


def dedupe(stream: Iterable[CorpusPair]) -> Iterator[CorpusPair]:
    """First pair per structure key, in input order."""
    seen: set[str] = set()
    for pair in stream:
        if pair.structure_key in seen:
            continue
        seen.add(pair.structure_key)
        yield pair


def read_pairs(path, registry: Registry | None = None) -> Iterator[CorpusPair]:
    registry = registry or _default_registry()
    with open(path, encoding="utf-8") as fh:
        for no, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            cells = line.split("\t")
            if len(cells) != 2:
                raise MalformedLineError(no, line)
            yield make_pair(cells[0], cells[1], registry)


def write_pairs(path, pairs: Iterable[CorpusPair]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(f"{pair.nl}\t{pair.df}\n")
            n += 1
    return n


@dataclass(frozen=True)
class MixSpec:
    original_path: str
    augmented_path: str
    upsample_factor: int = 5
    shuffle_seed: int = 0

    def __post_init__(self):
        if self.upsample_factor < 1:
            raise ValueError("upsample_factor must be >= 1")


def _read_tsv_lines(path) -> list[str]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for no, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if line.count("\t") != 1:
                raise MalformedLineError(no, line)
            out.append(line)
    return out


def mix(spec: MixSpec, out_path) -> int:
    """Write upsampled originals plus augmented lines, shuffled; returns count.

    Output length is always upsample_factor * |original| + |augmented|, and
    bytes depend only on the MixSpec fields (fixed seed, stable shuffle).
    """
    lines = _read_tsv_lines(spec.original_path) * spec.upsample_factor
    lines += _read_tsv_lines(spec.augmented_path)
    random.Random(spec.shuffle_seed).shuffle(lines)
    with open(out_path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line + "\n")
    return len(lines)
