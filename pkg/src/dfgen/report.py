"""Summary statistics and figures for generated corpora.

Reads the same delimited files the CLI emits (pair TSV, dialogue JSONL)
and writes a small stats table plus PNG histograms next to it.
"""

from __future__ import annotations

import json
from collections import Counter
from pathlib import Path

from . import corpus
from .composer import replacement_depth
from .parser import parse_expression


def _plt():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _write_stats(path: Path, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in rows:
            fh.write(f"{key}\t{value}\n")


def _bar(plt, counts: Counter, title: str, xlabel: str, out: Path) -> None:
    xs = sorted(counts)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar([str(x) for x in xs], [counts[x] for x in xs], color="#4878a8")
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("count")
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    plt.close(fig)


def report_pairs(in_path, out_dir, registry=None) -> list[Path]:
    """Stats + figures for a nl/df pair TSV; returns the written paths."""
    registry = registry or corpus._default_registry()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    depths: Counter = Counter()
    nl_words: Counter = Counter()
    keys: set[str] = set()
    n = 0
    for pair in corpus.read_pairs(in_path, registry):
        n += 1
        keys.add(pair.structure_key)
        depths[replacement_depth(parse_expression(pair.df, registry))] += 1
        nl_words[len(pair.nl.split())] += 1
    stats = out_dir / "pairs_stats.tsv"
    _write_stats(stats, [
        ("pairs", n),
        ("unique_structures", len(keys)),
        ("unique_fraction", round(len(keys) / n, 4) if n else 0.0),
        ("mean_nl_words",
         round(sum(k * v for k, v in nl_words.items()) / n, 2) if n else 0.0),
        ("max_replacement_depth", max(depths) if depths else 0),
    ])
    plt = _plt()
    depth_png = out_dir / "pairs_depth.png"
    words_png = out_dir / "pairs_nl_words.png"
    _bar(plt, depths, "Replacement depth", "depth", depth_png)
    _bar(plt, nl_words, "Request length", "words", words_png)
    return [stats, depth_png, words_png]


def report_dialogues(in_path, out_dir) -> list[Path]:
    """Stats + figures for a dialogue JSONL file; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    turns: Counter = Counter()
    reached = 0
    n = 0
    with open(in_path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            n += 1
            reached += bool(record.get("reached_target"))
            turns[len(record.get("turns", []))] += 1
    stats = out_dir / "dialogues_stats.tsv"
    _write_stats(stats, [
        ("dialogues", n),
        ("reached_target_fraction", round(reached / n, 4) if n else 0.0),
        ("mean_turns",
         round(sum(k * v for k, v in turns.items()) / n, 2) if n else 0.0),
    ])
    plt = _plt()
    turns_png = out_dir / "dialogues_turns.png"
    _bar(plt, turns, "Turns per dialogue", "turns", turns_png)
    return [stats, turns_png]
