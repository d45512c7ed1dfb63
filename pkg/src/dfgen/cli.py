"""Command line front end for dialogue and request generation."""

from __future__ import annotations

import argparse
import json
import random
import sys

from . import corpus
from .composer import CompositionConfig, generate_first_turn
from .domains import combined_registry, data_path
from .domains import multiwoz, smcal
from .graph import equivalent, serialize
from .parser import parse_expression
from .simulator import Persona, run_dialogue


def _seeds(master: int, n: int) -> list[int]:
    """One independent seed per generated item, all derived from the master."""
    rng = random.Random(master)
    return [rng.randrange(2 ** 63) for _ in range(n)]


def _load_persona(path) -> Persona:
    return Persona.from_file(path if path else data_path("persona_default.json"))


def _cmd_generate_mwoz(args) -> int:
    domain = multiwoz.MwozDomain()
    agendas = multiwoz.load_agendas(args.agendas, domain.registry)
    persona = _load_persona(args.persona)
    reached = 0
    with open(args.out, "w", encoding="utf-8") as fh:
        for i, seed in enumerate(_seeds(args.seed, args.n)):
            agenda_id, agenda = agendas[i % len(agendas)]
            dialogue = run_dialogue(agenda, persona, seed, domain,
                                    agenda_id=agenda_id)
            reached += dialogue.reached_target
            fh.write(json.dumps(dialogue.to_json_obj(), ensure_ascii=False))
            fh.write("\n")
    print(f"wrote {args.n} dialogues to {args.out} ({reached} reached target)")
    return 0


def _cmd_generate_smcal(args) -> int:
    kb = smcal.load_kb(args.kb)
    registry = smcal.load_registry()
    templates = smcal.load_templates()
    config = CompositionConfig(max_depth=args.max_depth)
    with open(args.out, "w", encoding="utf-8") as fh:
        for seed in _seeds(args.seed, args.n):
            expr, nl = generate_first_turn(config, kb, random.Random(seed),
                                           registry=registry,
                                           templates=templates)
            fh.write(f"{nl}\t{expr}\n")
    print(f"wrote {args.n} pairs to {args.out}")
    return 0


def _cmd_dedupe(args) -> int:
    registry = combined_registry()
    kept = corpus.write_pairs(
        args.out, corpus.dedupe(corpus.read_pairs(args.infile, registry)))
    print(f"kept {kept} unique-structure pairs in {args.out}")
    return 0


def _cmd_mix(args) -> int:
    spec = corpus.MixSpec(args.original, args.augmented,
                          upsample_factor=args.upsample,
                          shuffle_seed=args.seed)
    n = corpus.mix(spec, args.out)
    print(f"wrote {n} lines to {args.out}")
    return 0


def _cmd_eval_roundtrip(args) -> int:
    registry = combined_registry()
    total = failures = 0
    with open(args.infile, encoding="utf-8") as fh:
        for no, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line:
                continue
            expr = line.split("\t")[1] if "\t" in line else line
            total += 1
            try:
                graph = parse_expression(expr, registry)
                text = serialize(graph, registry)
                again = parse_expression(text, registry)
                if not equivalent(graph, again, registry):
                    raise ValueError("re-parse is not equivalent")
                if serialize(again, registry) != text:
                    raise ValueError("serialization is not stable")
            except Exception as exc:
                failures += 1
                print(f"line {no}: {exc}", file=sys.stderr)
    print(f"{total - failures}/{total} expressions round-tripped")
    return 1 if failures else 0


def _cmd_report(args) -> int:
    from . import report
    written = []
    if args.pairs:
        written.extend(report.report_pairs(args.pairs, args.out_dir))
    if args.dialogues:
        written.extend(report.report_dialogues(args.dialogues, args.out_dir))
    if not written:
        print("nothing to report: pass --pairs and/or --dialogues",
              file=sys.stderr)
        return 2
    for path in written:
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="dfgen",
        description="Generate typed-dataflow dialogues and single-turn requests.")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-mwoz",
                       help="simulate restaurant dialogues over agendas")
    p.add_argument("--agendas", default=None,
                   help="agenda expression file, one per line (default: bundled)")
    p.add_argument("--persona", default=None,
                   help="persona JSON file (default: bundled)")
    p.add_argument("--n", type=int, required=True, help="number of dialogues")
    p.add_argument("--seed", type=int, required=True, help="master seed")
    p.add_argument("--out", required=True, help="output JSONL path")
    p.set_defaults(func=_cmd_generate_mwoz)

    p = sub.add_parser("generate-smcal",
                       help="generate single-turn calendar requests")
    p.add_argument("--kb", default=None,
                   help="knowledge base JSON file (default: bundled)")
    p.add_argument("--max-depth", dest="max_depth", type=int, default=3,
                   help="replacement iterations per request")
    p.add_argument("--n", type=int, required=True, help="number of pairs")
    p.add_argument("--seed", type=int, required=True, help="master seed")
    p.add_argument("--out", required=True, help="output TSV path")
    p.set_defaults(func=_cmd_generate_smcal)

    p = sub.add_parser("dedupe",
                       help="keep one pair per expression structure")
    p.add_argument("--in", dest="infile", required=True, help="input pair TSV")
    p.add_argument("--out", required=True, help="output pair TSV")
    p.set_defaults(func=_cmd_dedupe)

    p = sub.add_parser("mix",
                       help="upsample originals and shuffle in augmented pairs")
    p.add_argument("--original", required=True, help="original pair TSV")
    p.add_argument("--augmented", required=True, help="augmented pair TSV")
    p.add_argument("--upsample", type=int, default=5,
                   help="copies of each original line")
    p.add_argument("--seed", type=int, default=0, help="shuffle seed")
    p.add_argument("--out", required=True, help="output pair TSV")
    p.set_defaults(func=_cmd_mix)

    p = sub.add_parser("eval-roundtrip",
                       help="check expressions parse and serialize stably")
    p.add_argument("--in", dest="infile", required=True,
                   help="pair TSV or bare-expression lines")
    p.set_defaults(func=_cmd_eval_roundtrip)

    p = sub.add_parser("report",
                       help="write summary stats and figures for an output file")
    p.add_argument("--pairs", default=None, help="pair TSV to summarize")
    p.add_argument("--dialogues", default=None, help="dialogue JSONL to summarize")
    p.add_argument("--out-dir", dest="out_dir", required=True,
                   help="directory for stats and PNG files")
    p.set_defaults(func=_cmd_report)

    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
