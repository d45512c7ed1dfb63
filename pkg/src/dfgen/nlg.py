"""Template-based NL rendering of dataflow graphs.

Rendering is bottom-up: each function maps to a template whose {slot}
placeholders receive the renderings of its children; terminals render as
their surface value (optionally prettified through a surface map).

Two composite styles go beyond plain substitution:

* "parts" templates render only the slots actually present, each through its
  own phrase, joined with commas ("for 4 people, at 17:30").
* "event" templates gather the constraint children (flattening AND), hoist a
  subject constraint into the head noun, merge attendee phrases with "and",
  and order the rest as duration, start, location, attendees.

Grammar is best-effort by design; the output feeds parser training, not
humans.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import MissingTemplateError
from .graph import DataflowGraph
from .types import Registry

_KIND_ORDER = {"has_duration": 0, "starts_at": 1, "at_location": 2, "with_attendee": 3}
_VOWELS = "aeiou"


@dataclass(frozen=True)
class Template:
    function: str
    variants: tuple[str, ...] = ()
    style: str = "plain"          # plain | parts | event | and | start | unit
    slot_parts: dict = field(default_factory=dict)
    article: str = "a"
    noun: str = "event"
    singular: str = ""
    plural: str = ""

    def pattern(self, rng=None) -> str:
        if len(self.variants) > 1 and rng is not None:
            return rng.choice(self.variants)
        return self.variants[0] if self.variants else ""


class TemplateSet:
    def __init__(self, functions: dict[str, Template], surface: dict[str, str] | None = None):
        self.functions = functions
        self.surface = dict(surface or {})

    @classmethod
    def from_dict(cls, cfg: dict) -> "TemplateSet":
        functions = {}
        for name, raw in cfg.get("functions", {}).items():
            if isinstance(raw, str):
                raw = {"pattern": raw}
            variants = raw.get("variants") or ([raw["pattern"]] if "pattern" in raw else [])
            functions[name] = Template(
                function=name,
                variants=tuple(variants),
                style=raw.get("style", "plain"),
                slot_parts=dict(raw.get("slot_parts", {})),
                article=raw.get("article", "a"),
                noun=raw.get("noun", "event"),
                singular=raw.get("singular", ""),
                plural=raw.get("plural", ""),
            )
        return cls(functions, cfg.get("surface", {}))

    @classmethod
    def from_file(cls, path) -> "TemplateSet":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


class _Safe(dict):
    def __missing__(self, key):
        return ""


def _article_for(article: str, noun: str) -> str:
    if article == "a" and noun[:1].lower() in _VOWELS:
        return "an"
    return article


def render(graph: DataflowGraph, templates: TemplateSet, registry: Registry,
           rng=None, root: int | None = None) -> str:
    """Render the graph to text.  Total over every registered function that
    has a template; raises MissingTemplateError otherwise."""

    def text_of(nid: int) -> str:
        node = graph.nodes[nid]
        if node.terminal:
            return templates.surface.get(node.payload, node.payload)
        name = registry.canonical_name(node.payload)
        tpl = templates.functions.get(name)
        if tpl is None:
            raise MissingTemplateError(name)
        if tpl.style == "unit":
            n = text_of(next(iter(node.inputs.values()))) if node.inputs else ""
            return f"{n} {tpl.singular if n == '1' else tpl.plural}"
        if tpl.style == "start":
            child = next(iter(node.inputs.values()), None)
            if child is None:
                return ""
            body = text_of(child)
            return f"at {body}" if _time_valued(graph, child, registry) else body
        if tpl.style == "and":
            _, parts = _constraints(list(node.inputs.values()))
            return "".join(parts).lstrip()
        if tpl.style == "event":
            kids = list(node.inputs.values())
            subject, parts = _constraints(kids)
            noun = subject if subject is not None else tpl.noun
            head = f"{_article_for(tpl.article, noun)} {noun}"
            return tpl.pattern(rng).format_map(_Safe(head=head, parts="".join(parts)))
        values = {slot: text_of(child) for slot, child in node.inputs.items()}
        if tpl.style == "parts":
            sig = registry.function(name)
            order = sig.slot_order(set(node.inputs)) if sig else sorted(node.inputs)
            rendered = [
                tpl.slot_parts[slot].format_map(_Safe(values))
                for slot in order
                if slot in tpl.slot_parts
            ]
            joined = " " + ", ".join(rendered) if rendered else ""
            return tpl.pattern(rng).format_map(_Safe(values, parts=joined))
        return tpl.pattern(rng).format_map(_Safe(values))

    def _flatten_and(nid: int) -> list[int]:
        node = graph.nodes[nid]
        if not node.terminal and registry.canonical_name(node.payload) == "AND":
            out = []
            sig = registry.function("AND")
            order = sig.slot_order(set(node.inputs)) if sig else sorted(node.inputs)
            for slot in order:
                out.extend(_flatten_and(node.inputs[slot]))
            return out
        return [nid]

    def _constraints(children: list[int]) -> tuple[str | None, list[str]]:
        kids: list[int] = []
        for c in children:
            kids.extend(_flatten_and(c))
        subject: str | None = None
        attendees: list[str] = []
        attendee_pos = None
        ordered: list[tuple[int, int, str]] = []
        for idx, kid in enumerate(kids):
            node = graph.nodes[kid]
            name = registry.canonical_name(node.payload) if not node.terminal else ""
            if name == "has_subject" and subject is None:
                subject = text_of(next(iter(node.inputs.values()), ""))
                continue
            if name == "with_attendee":
                attendees.append(text_of(next(iter(node.inputs.values()))))
                if attendee_pos is None:
                    attendee_pos = idx
                continue
            rank = _KIND_ORDER.get(name, 5)
            ordered.append((rank, idx, " " + text_of(kid)))
        if attendees:
            ordered.append((_KIND_ORDER["with_attendee"], attendee_pos or 0,
                            " with " + " and ".join(attendees)))
        ordered.sort(key=lambda t: (t[0], t[1]))
        return subject, [text for _, _, text in ordered]

    return text_of(graph.root if root is None else root)


def _time_valued(graph: DataflowGraph, nid: int, registry: Registry) -> bool:
    node = graph.nodes[nid]
    if node.terminal:
        return registry.has_type("Time") and registry.terminal_ok("Time", node.payload) \
            and ":" in node.payload
    sig = registry.function(node.payload)
    return sig is not None and registry.is_subtype(sig.returns, "Time")
