"""Agenda-driven user simulation.

A dialogue is produced by repeatedly mapping the current conversation graph
onto a target agenda graph, listing extension points, and letting a persona
(a small bundle of probability knobs) decide what the simulated user requests
next.  All randomness flows through one random.Random seeded per dialogue, so
identical (agenda, persona, seed) triples reproduce byte-identical output.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, asdict

from .errors import (
    EvaluationError,
    NoConversationRootError,
    ReferTargetAbsentError,
)
from .graph import DataflowGraph, equivalent, serialize
from .mapping import ExtensionPoint, extensible_nodes, map_graphs
from .nlg import render
from .parser import parse_expression


@dataclass(frozen=True)
class Persona:
    p_multi_slot: float = 0.3
    max_slots_per_turn: int = 2
    p_mistake: float = 0.1
    p_refer: float = 0.3
    p_ignore_agent: float = 0.2
    p_early_end: float = 0.02

    def __post_init__(self):
        for name in ("p_multi_slot", "p_mistake", "p_refer", "p_ignore_agent", "p_early_end"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.max_slots_per_turn < 1:
            raise ValueError("max_slots_per_turn must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Persona":
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> "Persona":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class Assignment:
    slot: str      # flattened slot name, e.g. "day" or "people"
    value: str
    via: str       # "explicit" | "reference" | "mistaken"


@dataclass
class UserRequest:
    kind: str                      # "set_slots" | "get_info" | "end" | "greet"
    task_name: str | None = None
    assignments: list[Assignment] = field(default_factory=list)
    info_field: str | None = None
    trace: list[str] = field(default_factory=list)


@dataclass
class Turn:
    index: int
    speaker: str                   # "user" | "agent"
    nl: str
    df: str | None = None
    seed_trace: list[str] = field(default_factory=list)
    request: UserRequest | None = None
    asked_slot: str | None = None
    answered_info: str | None = None


@dataclass
class AgentResponse:
    nl: str
    asked_slot: str | None = None
    answered_info: str | None = None


@dataclass
class Dialogue:
    turns: list[Turn]
    agenda_id: str
    persona: Persona
    seed: int
    reached_target: bool
    error: str | None = None

    def user_turns(self) -> list[Turn]:
        return [t for t in self.turns if t.speaker == "user"]

    def to_json_obj(self) -> dict:
        out = {
            "agenda_id": self.agenda_id,
            "seed": self.seed,
            "persona": self.persona.to_dict(),
            "reached_target": self.reached_target,
            "turns": [
                {"i": t.index, "speaker": t.speaker, "nl": t.nl, "df": t.df}
                for t in self.turns
            ],
        }
        if self.error is not None:
            out["error"] = self.error
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())


def extract_agenda(history: DataflowGraph, root_name: str = "MwozConversation") -> DataflowGraph:
    """Subgraph under the most recent conversation root of an executed history."""
    roots = [n.id for n in history.nodes.values()
             if not n.terminal and n.payload == root_name]
    if not roots:
        raise NoConversationRootError(f"no {root_name} node in history")
    return history.subgraph(max(roots))


def _flat(path: str) -> str:
    return path.rsplit(".", 1)[-1]


def select_action(points: list[ExtensionPoint], agent_prompt: str | None,
                  persona: Persona, rng: random.Random, hooks) -> UserRequest:
    """Choose the next user request.

    Draw order is fixed: early-end, prompt honoring, point, option, extra
    slots, then per-value mistake/reference draws.  `hooks` supplies the
    domain bits (mistake alternatives, reference eligibility, task name).
    """
    trace: list[str] = []
    if not points:
        return UserRequest(kind="end", trace=["done"])
    if rng.random() < persona.p_early_end:
        return UserRequest(kind="end", trace=["early_end"])

    # options per point: slot assignments first, then info questions
    options: list[list[tuple[str, object]]] = []
    for p in points:
        opts: list[tuple[str, object]] = [("slot", s) for s in p.open_slots]
        opts.extend(("info", f) for f in p.info_fields)
        options.append(opts)

    prompted = [
        (pi, oi)
        for pi, opts in enumerate(options)
        for oi, (kind, payload) in enumerate(opts)
        if kind == "slot" and agent_prompt is not None and _flat(payload.path) == agent_prompt
    ]

    def pick_from(pool: list[tuple[int, int]]) -> tuple[int, int]:
        by_point: dict[int, list[int]] = {}
        for pi, oi in pool:
            by_point.setdefault(pi, []).append(oi)
        pi = rng.choice(sorted(by_point))
        return pi, rng.choice(by_point[pi])

    everything = [(pi, oi) for pi, opts in enumerate(options) for oi in range(len(opts))]
    if prompted:
        if rng.random() >= persona.p_ignore_agent:
            pi, oi = prompted[0]
            trace.append(f"honor:{agent_prompt}")
        else:
            rest = [po for po in everything if po not in prompted]
            if rest:
                pi, oi = pick_from(rest)
                trace.append("ignore_prompt")
            else:
                pi, oi = prompted[0]
                trace.append("forced_prompt")
    else:
        pi, oi = pick_from(everything)
    trace.append(f"point:{pi}")

    kind, payload = options[pi][oi]
    if kind == "info":
        trace.append(f"ask:{payload}")
        return UserRequest(kind="get_info", task_name=hooks.task_selector(),
                           info_field=payload, trace=trace)

    chosen = [payload]
    remaining = [o for k, o in options[pi] if k == "slot" and o is not payload]
    if remaining and persona.max_slots_per_turn > 1:
        if rng.random() < persona.p_multi_slot:
            total = rng.randint(2, min(persona.max_slots_per_turn, 1 + len(remaining)))
            chosen.extend(rng.sample(remaining, total - 1))
            trace.append(f"multi:{total}")

    assignments = []
    for slot_opt in chosen:
        slot = _flat(slot_opt.path)
        value, via = slot_opt.value, "explicit"
        if rng.random() < persona.p_mistake:
            alts = hooks.alternatives(slot, value)
            if alts:
                value, via = rng.choice(alts), "mistaken"
                trace.append(f"mistake:{slot}")
        if via == "explicit" and hooks.refer_ok(slot, value):
            if rng.random() < persona.p_refer:
                via = "reference"
                trace.append(f"refer:{slot}")
        trace.append(f"set:{slot}")
        assignments.append(Assignment(slot, value, via))

    return UserRequest(kind="set_slots", task_name=hooks.task_selector(),
                       assignments=assignments, trace=trace)


def realize_expression(request: UserRequest, domain, state) -> str:
    """Turn a user request into its dataflow expression text."""
    hooks = domain.hooks(state)
    g = DataflowGraph()
    if request.kind == "set_slots":
        inputs = {"task": g.add_terminal(request.task_name)}
        for a in request.assignments:
            if a.via == "reference":
                ref_type = hooks.refer_type(a.slot)
                if hooks.resolve_reference(ref_type) != a.value:
                    raise ReferTargetAbsentError(ref_type)
                child = g.add_call("refer", {"target": g.add_terminal(ref_type)})
            else:
                child = g.add_terminal(a.value)
            inputs[a.slot] = child
        g.root = g.add_call("revise", inputs)
    elif request.kind == "get_info":
        ref = g.add_call("refer", {"target": g.add_terminal(request.task_name)})
        g.root = g.add_call("GetInfo", {"target": ref, "field": g.add_terminal(request.info_field)})
    else:
        raise ValueError(f"nothing to realize for kind={request.kind}")
    return serialize(g, domain.registry)


def run_dialogue(agenda: DataflowGraph, persona: Persona, seed: int, domain,
                 agenda_id: str = "agenda", max_user_turns: int = 80) -> Dialogue:
    """Drive one dialogue against the agenda until the user says goodbye.

    Never raises on domain evaluation problems; they end the dialogue and are
    recorded on the Dialogue.  The loop is bounded as a last resort against
    pathological personas.
    """
    rng = random.Random(seed)
    state = domain.new_state()
    hooks = domain.hooks(state)
    turns = [
        Turn(1, "user", domain.user_greeting, None, ["greet"],
             request=UserRequest(kind="greet")),
        Turn(1, "agent", domain.agent_greeting),
    ]
    prompt: str | None = None
    error: str | None = None

    for pair in range(2, max_user_turns + 2):
        mapping = map_graphs(state.conversation, agenda, domain.registry)
        points = extensible_nodes(state.conversation, agenda, mapping,
                                  domain.registry, domain.policy)
        req = select_action(points, prompt, persona, rng, hooks)
        if req.kind == "end":
            turns.append(Turn(pair, "user", domain.user_goodbye, None, req.trace, request=req))
            turns.append(Turn(pair, "agent", domain.agent_goodbye))
            break
        df = realize_expression(req, domain, state)
        expr = parse_expression(df, domain.registry)
        nl = render(expr, domain.templates, registry=domain.registry, rng=rng)
        turns.append(Turn(pair, "user", nl, df, req.trace, request=req))
        try:
            domain.apply_user(state, expr)
        except EvaluationError as exc:
            error = str(exc)
            break
        resp = domain.respond(state, rng)
        prompt = resp.asked_slot
        turns.append(Turn(pair, "agent", resp.nl, None, [],
                          asked_slot=resp.asked_slot, answered_info=resp.answered_info))
    else:
        error = "turn limit reached"

    reached = equivalent(state.conversation, agenda, domain.registry)
    return Dialogue(turns=turns, agenda_id=agenda_id, persona=persona,
                    seed=seed, reached_target=reached, error=error)
