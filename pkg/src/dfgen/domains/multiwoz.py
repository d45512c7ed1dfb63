"""Restaurant dialogue domain: registry, fixture DB, agent policy, hooks.

The conversation state is itself a dataflow graph rooted at MwozConversation.
User turns arrive as revise()/GetInfo() expressions; applying one mutates the
conversation graph.  The agent is a rule policy over the DB rows matched by
the current constraints.

Only the restaurant task is fully implemented; hotel and train exist as
registry stubs at most.
"""

from __future__ import annotations

import json
import random
import string
from dataclasses import dataclass

from . import data_path
from ..errors import (
    EvaluationError,
    NoConversationRootError,
    ReferTargetAbsentError,
    UnknownFieldError,
    UnknownSlotError,
)
from ..evaluate import EvalContext, evaluate
from ..graph import DataflowGraph
from ..mapping import ExtensionPolicy
from ..nlg import TemplateSet
from ..parser import parse_expression
from ..simulator import AgentResponse
from ..types import Registry

AREAS = ("centre", "north", "south", "east", "west")
PRICERANGES = ("cheap", "moderate", "expensive")
WEEKDAYS = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday")

CONSTRAINT_SLOTS = ("name", "food", "area", "pricerange")
BOOKING_SLOTS = ("people", "day", "time")
INFO_FIELDS = ("address", "phone")

USER_GREETING = "hello"
AGENT_GREETING = "Hello, I'm your MWOZ agent. How can I help you?"
USER_GOODBYE = "Goodbye!"
AGENT_GOODBYE = "Goodbye!"

BOOKING_QUESTIONS = {
    "people": "For how many people would you like to book the restaurant?",
    "day": "On which day would you like to book the restaurant?",
    "time": "At what time would you like to book the restaurant?",
}

REFER_TYPES = {
    "name": "RestaurantName",
    "food": "Food",
    "area": "Area",
    "pricerange": "PriceRange",
    "people": "Count",
    "day": "BookDay",
    "time": "Time",
}


@dataclass(frozen=True)
class RestaurantRow:
    name: str
    address: str
    phone: str
    food: str
    area: str
    pricerange: str


@dataclass
class BookingState:
    day: str | None = None
    time: str | None = None
    people: str | None = None
    confirmed: bool = False
    reference_code: str | None = None

    def complete(self) -> bool:
        return None not in (self.day, self.time, self.people)


def load_db(path=None) -> list[RestaurantRow]:
    src = path if path is not None else data_path("multiwoz_db.json")
    with open(src, encoding="utf-8") as fh:
        raw = json.load(fh)
    rows = [RestaurantRow(**r) for r in raw]
    names = [r.name for r in rows]
    if len(set(names)) != len(names):
        raise ValueError("duplicate restaurant names in DB")
    for r in rows:
        if r.area not in AREAS:
            raise ValueError(f"bad area {r.area!r} for {r.name}")
        if r.pricerange not in PRICERANGES:
            raise ValueError(f"bad pricerange {r.pricerange!r} for {r.name}")
    return rows


def load_registry() -> Registry:
    reg = Registry.from_file(data_path("multiwoz_registry.json"))

    def refer_return(graph, node, registry):
        target = graph.nodes[node.inputs["target"]].payload
        if registry.has_type(target):
            return target
        sig = registry.function(target)
        if sig is not None:
            return sig.returns
        return "Str"

    reg.set_dynamic_return("refer", refer_return)
    return reg


def load_templates() -> TemplateSet:
    return TemplateSet.from_file(data_path("multiwoz_templates.json"))


def db_query(constraints: dict, db: list[RestaurantRow]) -> list[RestaurantRow]:
    """Exact-match filter over RestaurantRow fields; full DB when empty."""
    fields = {f for f in RestaurantRow.__dataclass_fields__}
    for key in constraints:
        if key not in fields:
            raise UnknownFieldError(key)
    return [r for r in db
            if all(getattr(r, k) == v for k, v in constraints.items())]


def alternatives(slot: str, value: str, db: list[RestaurantRow]) -> list[str]:
    """Legal mistake values for a slot, excluding the intended one."""
    if slot == "time":
        pool = [f"{h:02d}:{m:02d}" for h in range(10, 22) for m in (0, 30)]
    elif slot == "day":
        pool = list(WEEKDAYS)
    elif slot == "people":
        pool = [str(n) for n in range(1, 9)]
    elif slot == "name":
        pool = sorted({r.name for r in db})
    elif slot in ("food", "area", "pricerange"):
        pool = sorted({getattr(r, slot) for r in db})
    else:
        raise UnknownSlotError(slot)
    return [v for v in pool if v != value]


class MwozPolicy(ExtensionPolicy):
    """Restaurant extension rules: constructors extensible, the info subtree
    is get_info material only, and info questions unlock once the constraints
    pin down a single DB row (so the answer is well-defined)."""

    def __init__(self, db: list[RestaurantRow]):
        self.db = db

    def extensible(self, fn_name: str) -> bool:
        return fn_name in ("MwozConversation", "FindRestaurant", "RestaurantBookInfo")

    def info_slot(self, fn_name: str) -> str | None:
        return "info" if fn_name == "FindRestaurant" else None

    def info_fields(self, current: DataflowGraph, target: DataflowGraph,
                    c_node: int | None, t_node: int) -> list[str]:
        tn = target.nodes[t_node]
        if tn.payload != "FindRestaurant" or "info" not in tn.inputs:
            return []
        t_info = target.nodes[tn.inputs["info"]]
        have: dict[str, str] = {}
        if c_node is not None:
            cn = current.nodes[c_node]
            if "info" in cn.inputs:
                c_info = current.nodes[cn.inputs["info"]]
                have = {f: current.nodes[ch].payload
                        for f, ch in c_info.inputs.items()}
        # a field answered for the wrong restaurant still needs asking
        missing = [f for f, ch in t_info.inputs.items()
                   if have.get(f) != target.nodes[ch].payload]
        if not missing:
            return []
        constraints = _graph_constraints(current, c_node)
        if len(db_query(constraints, self.db)) != 1:
            return []    # not answerable yet; keep asking once a row is pinned
        return missing


def _graph_constraints(graph: DataflowGraph, task_node: int | None) -> dict:
    out = {}
    if task_node is None:
        return out
    node = graph.nodes[task_node]
    for slot in CONSTRAINT_SLOTS:
        child = node.inputs.get(slot)
        if child is not None:
            out[slot] = graph.nodes[child].payload
    return out


class MwozState:
    def __init__(self, registry: Registry):
        self.conversation = DataflowGraph()
        self.conversation.root = self.conversation.add_call("MwozConversation", {})
        self.history = DataflowGraph()
        self.booking = BookingState()
        self.mentions: list[tuple[str, str]] = []
        self.pending_info: str | None = None
        self.last_unique: str | None = None
        self._registry = registry
        self.snapshot()

    def task_node(self) -> int | None:
        root = self.conversation.nodes[self.conversation.root]
        return root.inputs.get("task")

    def constraints(self) -> dict:
        return _graph_constraints(self.conversation, self.task_node())

    def booking_values(self) -> dict:
        task = self.task_node()
        if task is None:
            return {}
        node = self.conversation.nodes[task]
        book = node.inputs.get("book")
        if book is None:
            return {}
        return {slot: self.conversation.nodes[child].payload
                for slot, child in self.conversation.nodes[book].inputs.items()}

    def snapshot(self) -> None:
        self.history.graft(self.conversation)

    def booking_state(self) -> BookingState:
        vals = self.booking_values()
        return BookingState(
            day=vals.get("day"), time=vals.get("time"), people=vals.get("people"),
            confirmed=self.booking.confirmed,
            reference_code=self.booking.reference_code,
        )


class MwozHooks:
    """Domain callbacks consumed by the simulator's action selection."""

    def __init__(self, state: MwozState, db: list[RestaurantRow]):
        self.state = state
        self.db = db

    def task_selector(self) -> str:
        return "FindRestaurant"

    def alternatives(self, slot: str, value: str) -> list[str]:
        return alternatives(slot, value, self.db)

    def refer_type(self, slot: str) -> str:
        try:
            return REFER_TYPES[slot]
        except KeyError:
            raise UnknownSlotError(slot) from None

    def resolve_reference(self, type_name: str) -> str | None:
        if type_name == "FindRestaurant":
            return "FindRestaurant"
        for t, value in reversed(self.state.mentions):
            if t == type_name:
                return value
        return None

    def refer_ok(self, slot: str, value: str) -> bool:
        return self.resolve_reference(self.refer_type(slot)) == value


class MwozDomain:
    user_greeting = USER_GREETING
    agent_greeting = AGENT_GREETING
    user_goodbye = USER_GOODBYE
    agent_goodbye = AGENT_GOODBYE

    def __init__(self, db=None, registry=None, templates=None):
        self.db = db if db is not None else load_db()
        self.registry = registry if registry is not None else load_registry()
        self.templates = templates if templates is not None else load_templates()
        self.policy = MwozPolicy(self.db)

    def new_state(self) -> MwozState:
        return MwozState(self.registry)

    def hooks(self, state: MwozState) -> MwozHooks:
        return MwozHooks(state, self.db)

    # -- user side ----------------------------------------------------------

    def apply_user(self, state: MwozState, expr: DataflowGraph) -> None:
        hooks = self.hooks(state)

        def h_refer(args, node, graph):
            value = hooks.resolve_reference(args["target"])
            if value is None:
                raise ReferTargetAbsentError(args["target"])
            return value

        def h_revise(args, node, graph):
            self._revise(state, args)
            return "ok"

        def h_getinfo(args, node, graph):
            if args["field"] not in INFO_FIELDS:
                raise EvaluationError(node.id, f"no such info field: {args['field']}")
            state.pending_info = args["field"]
            return args["field"]

        ctx = EvalContext(self.registry, {
            "refer": h_refer, "revise": h_revise, "GetInfo": h_getinfo,
        })
        evaluate(expr, ctx)
        state.snapshot()

    def _revise(self, state: MwozState, args: dict) -> None:
        conv = state.conversation
        task = state.task_node()
        if task is None:
            task = conv.add_call(args["task"], {})
            conv.set_input(conv.root, "task", task)
        changed = False
        for slot, value in args.items():
            if slot == "task":
                continue
            if slot in BOOKING_SLOTS:
                owner = conv.nodes[task].inputs.get("book")
                if owner is None:
                    owner = conv.add_call("RestaurantBookInfo", {})
                    conv.set_input(task, "book", owner)
            elif slot in CONSTRAINT_SLOTS:
                owner = task
            else:
                raise EvaluationError(slot, "not an assignable slot")
            old = conv.nodes[owner].inputs.get(slot)
            if old is None or conv.nodes[old].payload != value:
                conv.set_input(owner, slot, conv.add_terminal(value))
                changed = True
            state.mentions.append((REFER_TYPES[slot], value))
        if changed and state.booking.confirmed:
            state.booking = BookingState()
            book = conv.nodes[task].inputs.get("book")
            if book is not None:
                conv.set_result(book, None)

    # -- agent side ---------------------------------------------------------

    def respond(self, state: MwozState, rng: random.Random) -> AgentResponse:
        rows = db_query(state.constraints(), self.db)
        parts: list[str] = []
        asked: str | None = None
        answered: str | None = None

        if state.pending_info is not None:
            field = state.pending_info
            state.pending_info = None
            if len(rows) == 1:
                row = rows[0]
                value = getattr(row, field)
                self._attach_info(state, field, value)
                parts.append(f"For {row.name} the {field} is {value}.")
                answered = field
            else:
                parts.append("I need a specific restaurant to tell you that.")

        if not rows:
            parts.append("I'm sorry, I could not find a restaurant matching your request.")
        elif len(rows) > 1:
            parts.append(f"I see several ({len(rows)}) matches, maybe select name or address")
        else:
            row = rows[0]
            newly = state.last_unique != row.name
            state.last_unique = row.name
            booked = state.booking_values()
            missing = [s for s in BOOKING_SLOTS if s not in booked]
            if missing:
                asked = missing[0]
                question = BOOKING_QUESTIONS[asked]
                parts.append(f"OK, {row.name}. {question}" if newly else question)
            elif not state.booking.confirmed:
                code = "".join(rng.choice(string.ascii_uppercase + string.digits)
                               for _ in range(8))
                state.booking = BookingState(
                    day=booked["day"], time=booked["time"], people=booked["people"],
                    confirmed=True, reference_code=code,
                )
                self._attach_booking_result(state, code)
                parts.append(
                    f"I have made the reservation for {booked['people']} people "
                    f"on {booked['day']} at {booked['time']}. "
                    f"Your reference code is {code}. "
                    "Is there anything else I can do for you?"
                )
            else:
                parts.append("Is there anything else I can do for you?")

        state.snapshot()
        return AgentResponse(nl=" ".join(parts), asked_slot=asked, answered_info=answered)

    def _attach_info(self, state: MwozState, field: str, value: str) -> None:
        conv = state.conversation
        task = state.task_node()
        if task is None:
            return
        info = conv.nodes[task].inputs.get("info")
        if info is None:
            info = conv.add_call("RestaurantInfo", {})
            conv.set_input(task, "info", info)
        conv.set_input(info, field, conv.add_terminal(value))

    def _attach_booking_result(self, state: MwozState, code: str) -> None:
        conv = state.conversation
        task = state.task_node()
        book = conv.nodes[task].inputs.get("book") if task is not None else None
        if book is not None:
            conv.set_result(book, conv.add_terminal(f"booked {code}"))


def load_agendas(path=None, registry: Registry | None = None):
    """Shipped agenda expressions -> list of (agenda_id, graph)."""
    registry = registry or load_registry()
    src = path if path is not None else data_path("multiwoz_agendas.txt")
    out = []
    with open(src, encoding="utf-8") as fh:
        for i, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            out.append((f"agenda{i}", parse_expression(line, registry)))
    if not out:
        raise NoConversationRootError("agenda file is empty")
    return out
