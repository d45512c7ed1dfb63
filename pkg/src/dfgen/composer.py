"""Grow single-turn calendar requests by swapping terminal values for calls.

A replacement rule knows one way to express a plain value as a function
call whose result is that value (or, in free mode, any value of the same
type).  Rules are filtered twice: statically by return type, then by an
admissibility check against the knowledge base, so a type-correct but
senseless substitution never survives.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

from .errors import NoSolutionError
from .graph import DataflowGraph, serialize, typecheck
from .nlg import TemplateSet, render
from .types import Registry
from .domains import smcal
from .domains.smcal import WEEKDAYS, KnowledgeBase

_Option = tuple
_Options = Callable[[KnowledgeBase, "str | None"], tuple]
_Build = Callable[[_Option], DataflowGraph]


@dataclass(frozen=True)
class ReplacementRule:
    """One legal way to grow a terminal into a function call.

    function: root function of the introduced subgraph
    produces: its declared return type
    slots: slot names where the substitution reads naturally
    options: enumerate argument choices, optionally pinned to a value
    build: construct the subgraph for one chosen option
    """

    function: str
    produces: str
    slots: tuple[str, ...]
    options: _Options
    build: _Build

    def admissible(self, host: str, slot: str, kb: KnowledgeBase,
                   required: str | None = None) -> bool:
        if self.slots and slot not in self.slots:
            return False
        return bool(self.options(kb, required))

    def value_solver(self, kb: KnowledgeBase, rng: random.Random,
                     required: str | None = None) -> DataflowGraph:
        """Pick arguments (honoring a required result value) and build."""
        opts = self.options(kb, required)
        if not opts:
            raise NoSolutionError(
                f"{self.function} cannot produce {required!r} from this knowledge base")
        return self.build(opts[rng.randrange(len(opts))])


@dataclass(frozen=True)
class CompositionConfig:
    max_depth: int = 3
    p_replace: float = 0.8
    slot_subset_law: dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_SLOT_LAW))

    def __post_init__(self):
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")


DEFAULT_SLOT_LAW = {
    "duration": 0.5,
    "start": 0.6,
    "location": 0.35,
    "attendee": 0.5,
    "subject": 0.35,
}

_PERSON_SLOTS = ("attendee", "recipient", "person")
_DAY_SLOTS = ("dow", "start", "date")
_TIME_SLOTS = ("t", "start", "time")


# -- fragment builders -----------------------------------------------------


def _event_chain(subject: str, steps: tuple[tuple[str, str], ...]) -> DataflowGraph:
    """FindEvents pinned by subject, then a chain of (function, slot) hops."""
    g = DataflowGraph()
    nid = g.add_terminal(subject)
    nid = g.add_call("has_subject", {"subject": nid})
    nid = g.add_call("FindEvents", {"constraint": nid})
    for fn, slot in steps:
        nid = g.add_call(fn, {slot: nid})
    g.root = nid
    return g


def _manager_options(kb: KnowledgeBase, required: str | None) -> tuple:
    pairs = [(m, p) for p, m in kb.manager_of.items()
             if required is None or m == required]
    return tuple(sorted(pairs))


def _manager_build(opt: _Option) -> DataflowGraph:
    _, employee = opt
    g = DataflowGraph()
    g.root = g.add_call("FindManager", {"recipient": g.add_terminal(employee)})
    return g


def _only_friend_options(kb: KnowledgeBase, required: str | None) -> tuple:
    pairs = [(friends[0], person) for person, friends in kb.friends_of.items()
             if len(friends) == 1 and (required is None or friends[0] == required)]
    return tuple(sorted(pairs))


def _only_friend_build(opt: _Option) -> DataflowGraph:
    _, person = opt
    g = DataflowGraph()
    inner = g.add_call("FindFriends", {"person": g.add_terminal(person)})
    g.root = g.add_call("singleton", {"items": inner})
    return g


def _solo_attendee_options(kb: KnowledgeBase, required: str | None) -> tuple:
    pairs = [(e.attendees[0], e.subject) for e in kb.unique_subject_events()
             if len(e.attendees) == 1
             and (required is None or e.attendees[0] == required)]
    return tuple(sorted(pairs))


def _solo_attendee_build(opt: _Option) -> DataflowGraph:
    _, subject = opt
    return _event_chain(subject, ((":attendees", "of"), (":recipient", "of")))


def _event_location_options(kb: KnowledgeBase, required: str | None) -> tuple:
    pairs = [(e.location, e.subject) for e in kb.unique_subject_events()
             if required is None or e.location == required]
    return tuple(sorted(pairs))


def _event_location_build(opt: _Option) -> DataflowGraph:
    _, subject = opt
    return _event_chain(subject, ((":location", "of"),))


def _event_day_options(kb: KnowledgeBase, required: str | None) -> tuple:
    pairs = [(WEEKDAYS[e.start.weekday()], e.subject)
             for e in kb.unique_subject_events()
             if required is None or WEEKDAYS[e.start.weekday()] == required]
    return tuple(sorted(pairs))


def _event_day_build(opt: _Option) -> DataflowGraph:
    _, subject = opt
    return _event_chain(subject, ((":start", "of"), (":dow", "of")))


def _days_after_options(kb: KnowledgeBase, required: str | None) -> tuple:
    targets = WEEKDAYS if required is None else (
        (required,) if required in WEEKDAYS else ())
    out = []
    for target in targets:
        ti = WEEKDAYS.index(target)
        for k in range(1, 7):
            out.append((target, k, WEEKDAYS[(ti - k) % 7]))
    return tuple(out)


def _days_after_build(opt: _Option) -> DataflowGraph:
    _, k, base = opt
    g = DataflowGraph()
    g.root = g.add_call("daysAfter", {
        "days": g.add_terminal(str(k)),
        "start": g.add_terminal(base),
    })
    return g


def _event_am_options(kb: KnowledgeBase, required: str | None) -> tuple:
    pairs = [(f"{e.start.hour % 12:02d}:00", e.subject)
             for e in kb.unique_subject_events()
             if required is None or f"{e.start.hour % 12:02d}:00" == required]
    return tuple(sorted(pairs))


def _event_am_build(opt: _Option) -> DataflowGraph:
    _, subject = opt
    return _event_chain(
        subject, ((":start", "of"), (":time", "of"), ("NumberAM", "t")))


DEFAULT_RULES: tuple[ReplacementRule, ...] = (
    ReplacementRule("FindManager", "Person", _PERSON_SLOTS,
                    _manager_options, _manager_build),
    ReplacementRule("singleton", "Person", _PERSON_SLOTS,
                    _only_friend_options, _only_friend_build),
    ReplacementRule(":recipient", "Person", _PERSON_SLOTS,
                    _solo_attendee_options, _solo_attendee_build),
    ReplacementRule(":location", "Location", ("location",),
                    _event_location_options, _event_location_build),
    ReplacementRule(":dow", "DayOfWeek", _DAY_SLOTS,
                    _event_day_options, _event_day_build),
    ReplacementRule("daysAfter", "DayOfWeek", _DAY_SLOTS,
                    _days_after_options, _days_after_build),
    ReplacementRule("NumberAM", "Time", _TIME_SLOTS,
                    _event_am_options, _event_am_build),
)

RULE_ROOTS = frozenset(rule.function for rule in DEFAULT_RULES)

_REGISTRY: Registry | None = None
_TEMPLATES: TemplateSet | None = None


def _default_registry() -> Registry:
    global _REGISTRY
    if _REGISTRY is None:
        _REGISTRY = smcal.load_registry()
    return _REGISTRY


def _default_templates() -> TemplateSet:
    global _TEMPLATES
    if _TEMPLATES is None:
        _TEMPLATES = smcal.load_templates()
    return _TEMPLATES


def candidate_functions(value: str | None, type_name: str, slot: str, host: str,
                        kb: KnowledgeBase, registry: Registry | None = None,
                        rules: tuple[ReplacementRule, ...] | None = None,
                        ) -> list[ReplacementRule]:
    """Rules that could replace a terminal of the given type in this slot.

    When `value` is set the rule must be able to produce exactly that value;
    pass None to ask only for type- and sense-compatibility.
    """
    registry = registry or _default_registry()
    rules = DEFAULT_RULES if rules is None else tuple(rules)
    out = []
    for rule in rules:
        if not registry.has_type(rule.produces):
            continue
        if not registry.is_subtype(rule.produces, type_name):
            continue
        if rule.admissible(host, slot, kb, value):
            out.append(rule)
    return out


def replace_value(graph: DataflowGraph, terminal: int, rule: ReplacementRule,
                  kb: KnowledgeBase, rng: random.Random,
                  required_value: str | None = None,
                  registry: Registry | None = None) -> DataflowGraph:
    """Return a copy of the graph with one terminal grown into a call."""
    registry = registry or _default_registry()
    if not graph.nodes[terminal].terminal:
        raise NoSolutionError(f"node {terminal} is not a terminal")
    fragment = rule.value_solver(kb, rng, required_value)
    out = graph.copy()
    out.replace_node(terminal, fragment)
    typecheck(out, registry)
    return out


# Hosts that look their argument up in the knowledge base: a replacement
# under them must still evaluate to the original value, or the host's own
# lookup would no longer be guaranteed to succeed.
_VALUE_PINNING_HOSTS = frozenset({
    ("FindManager", "recipient"),
    ("FindFriends", "person"),
})


def _replaceable(graph: DataflowGraph, kb: KnowledgeBase, registry: Registry,
                 rules: tuple[ReplacementRule, ...],
                 ) -> list[tuple[int, str | None, list[ReplacementRule]]]:
    out = []
    for nid in sorted(graph.reachable()):
        node = graph.nodes[nid]
        if not node.terminal:
            continue
        parents = graph.parents_of(nid)
        if not parents:
            continue
        host_id, slot = parents[0]
        sig = registry.function(graph.nodes[host_id].payload)
        slot_type = sig.slot(slot).type
        required = node.payload if (sig.name, slot) in _VALUE_PINNING_HOSTS else None
        applicable = candidate_functions(
            required, slot_type, slot, sig.name, kb, registry=registry, rules=rules)
        if applicable:
            out.append((nid, required, applicable))
    return out


_DURATIONS = ("15", "25", "30", "45", "60", "90")
_TIMES = ("08:00", "09:00", "10:00", "11:30", "13:00", "14:00", "15:30",
          "17:00", "18:30")
_SUBJECTS = ("sync", "review", "catch up", "planning session", "demo",
             "coffee chat")
_SEED_KINDS = ("duration", "start", "location", "attendee", "subject")


def _seed_request(config: CompositionConfig, kb: KnowledgeBase,
                  rng: random.Random) -> DataflowGraph:
    law = config.slot_subset_law
    kinds = [k for k in _SEED_KINDS if rng.random() < law.get(k, 0.0)]
    if not kinds:
        kinds = ["start"]
    g = DataflowGraph()
    parts = []
    for kind in kinds:
        if kind == "duration":
            n = g.add_terminal(rng.choice(_DURATIONS))
            d = g.add_call("toMinutes", {"n": n})
            parts.append(g.add_call("has_duration", {"duration": d}))
        elif kind == "start":
            form = rng.randrange(4)
            if form == 0:
                v = g.add_call("Today", {})
            elif form == 1:
                v = g.add_call("NextWeekend", {})
            elif form == 2:
                day = g.add_terminal(rng.choice(WEEKDAYS))
                v = g.add_call("NextDOW", {"dow": day})
            else:
                v = g.add_terminal(rng.choice(_TIMES))
            parts.append(g.add_call("starts_at", {"start": v}))
        elif kind == "location":
            spot = g.add_terminal(rng.choice(kb.locations()))
            parts.append(g.add_call("at_location", {"location": spot}))
        elif kind == "attendee":
            people = sorted(kb.persons)
            first = rng.choice(people)
            parts.append(g.add_call(
                "with_attendee", {"attendee": g.add_terminal(first)}))
            if rng.random() < 0.25:
                other = rng.choice([p for p in people if p != first])
                parts.append(g.add_call(
                    "with_attendee", {"attendee": g.add_terminal(other)}))
        else:
            topic = g.add_terminal(rng.choice(_SUBJECTS))
            parts.append(g.add_call("has_subject", {"subject": topic}))
    if len(parts) == 1:
        top = parts[0]
    else:
        top = g.add_call("AND", {f"arg{i}": p for i, p in enumerate(parts)})
    g.root = g.add_call("CreateEvent", {"constraint": top})
    return g


def generate_first_turn(config: CompositionConfig, kb: KnowledgeBase,
                        rng: random.Random, registry: Registry | None = None,
                        templates: TemplateSet | None = None,
                        rules: tuple[ReplacementRule, ...] | None = None,
                        ) -> tuple[str, str]:
    """Build one agenda-free request: (expression text, its NL rendering).

    Starts from a CreateEvent over a random slot subset, then runs up to
    max_depth replacement rounds, each growing one uniformly chosen
    terminal (or skipping with probability 1 - p_replace).
    """
    registry = registry or _default_registry()
    templates = templates or _default_templates()
    rules = DEFAULT_RULES if rules is None else tuple(rules)
    g = _seed_request(config, kb, rng)
    for _ in range(config.max_depth):
        if rng.random() >= config.p_replace:
            continue
        spots = _replaceable(g, kb, registry, rules)
        if not spots:
            break
        nid, required, applicable = spots[rng.randrange(len(spots))]
        rule = applicable[rng.randrange(len(applicable))]
        g = replace_value(g, nid, rule, kb, rng,
                          required_value=required, registry=registry)
    return serialize(g, registry), render(g, templates, registry, rng=rng)


def replacement_depth(graph: DataflowGraph, root: int | None = None,
                      rule_roots: frozenset[str] | None = None) -> int:
    """Deepest nesting of rule-introduced calls along any root-to-leaf path."""
    roots = RULE_ROOTS if rule_roots is None else frozenset(rule_roots)
    start = graph.root if root is None else root
    if start is None:
        return 0

    def walk(nid: int) -> int:
        node = graph.nodes[nid]
        here = 0 if node.terminal or node.payload not in roots else 1
        return here + max((walk(c) for c in node.inputs.values()), default=0)

    return walk(start)
