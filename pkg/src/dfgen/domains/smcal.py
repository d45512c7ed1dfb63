"""Calendar domain: function registry, fixture knowledge base, evaluation.

Values flowing through evaluation:
  Person      -> name string
  PersonSet   -> tuple of name strings
  Duration    -> int minutes
  Date        -> datetime.date
  Time        -> "HH:MM" string
  DateTime    -> datetime.datetime (event start)
  Event       -> Event dataclass
  Constraint  -> tuple of ConstraintSpec (AND flattens)

The calendar "now" is a fixed epoch date, never the wall clock, so every
evaluation is reproducible.  DFGEN_EPOCH=YYYY-MM-DD overrides it.
"""

from __future__ import annotations

import datetime
import json
import os
from dataclasses import dataclass

from . import data_path
from ..errors import AmbiguousError, EvaluationError, NoMatchError
from ..evaluate import EvalContext
from ..nlg import TemplateSet
from ..types import Registry

DEFAULT_EPOCH = datetime.date(2024, 1, 1)

_WEEKDAYS = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday")
WEEKDAYS = _WEEKDAYS


def epoch_date() -> datetime.date:
    raw = os.environ.get("DFGEN_EPOCH")
    if raw:
        return datetime.date.fromisoformat(raw)
    return DEFAULT_EPOCH


@dataclass(frozen=True)
class Event:
    subject: str
    start: datetime.datetime
    duration_minutes: int
    location: str
    attendees: tuple[str, ...]

    def __str__(self):
        return f"{self.subject} on {self.start:%Y-%m-%d %H:%M}"


@dataclass(frozen=True)
class ConstraintSpec:
    kind: str    # attendee | duration | subject | start | location
    value: object


class KnowledgeBase:
    def __init__(self, persons, manager_of, friends_of, events):
        self.persons = tuple(persons)
        self.manager_of = dict(manager_of)
        self.friends_of = {k: tuple(v) for k, v in friends_of.items()}
        self.events = tuple(events)
        self._validate()

    def _validate(self):
        known = set(self.persons)
        for p, m in self.manager_of.items():
            if p == m:
                raise ValueError(f"manager self-loop: {p}")
            if p not in known or m not in known:
                raise ValueError(f"unknown person in manager_of: {p} -> {m}")
        for p in self.manager_of:
            seen, cur = set(), p
            while cur in self.manager_of:
                if cur in seen:
                    raise ValueError(f"manager cycle through {p}")
                seen.add(cur)
                cur = self.manager_of[cur]
        for ev in self.events:
            bad = set(ev.attendees) - known
            if bad:
                raise ValueError(f"unknown attendees {sorted(bad)} in event {ev.subject}")

    def locations(self) -> list[str]:
        return sorted({e.location for e in self.events})

    def subjects(self) -> list[str]:
        return sorted({e.subject for e in self.events})

    def unique_subject_events(self) -> list[Event]:
        """Events whose subject occurs exactly once, so a subject query
        pins them down."""
        counts: dict[str, int] = {}
        for e in self.events:
            counts[e.subject] = counts.get(e.subject, 0) + 1
        return [e for e in self.events if counts[e.subject] == 1]


def load_kb(path=None) -> KnowledgeBase:
    src = path if path is not None else data_path("smcal_kb.json")
    with open(src, encoding="utf-8") as fh:
        raw = json.load(fh)
    events = [
        Event(
            subject=e["subject"],
            start=datetime.datetime.strptime(e["start"], "%Y-%m-%d %H:%M"),
            duration_minutes=int(e["duration_minutes"]),
            location=e["location"],
            attendees=tuple(e["attendees"]),
        )
        for e in raw.get("events", [])
    ]
    return KnowledgeBase(raw["persons"], raw.get("manager_of", {}),
                         raw.get("friends_of", {}), events)


def load_registry() -> Registry:
    return Registry.from_file(data_path("smcal_registry.json"))


def load_templates() -> TemplateSet:
    return TemplateSet.from_file(data_path("smcal_templates.json"))


def _as_specs(value) -> tuple[ConstraintSpec, ...]:
    if isinstance(value, ConstraintSpec):
        return (value,)
    return tuple(value)


def _matches(event: Event, spec: ConstraintSpec) -> bool:
    if spec.kind == "attendee":
        return spec.value in event.attendees
    if spec.kind == "duration":
        return event.duration_minutes == spec.value
    if spec.kind == "subject":
        return event.subject == spec.value
    if spec.kind == "location":
        return event.location == spec.value
    if spec.kind == "start":
        v = spec.value
        if isinstance(v, datetime.datetime):
            return event.start == v
        if isinstance(v, datetime.date):
            return event.start.date() == v
        return event.start.strftime("%H:%M") == v
    raise EvaluationError("constraint", f"unknown kind {spec.kind}")


def find_events(specs, kb: KnowledgeBase) -> Event:
    hits = [e for e in kb.events if all(_matches(e, s) for s in specs)]
    if not hits:
        raise NoMatchError("FindEvents", "no event satisfies the constraints")
    if len(hits) > 1:
        raise AmbiguousError("FindEvents", f"{len(hits)} events satisfy the constraints")
    return hits[0]


def _the_one(items, fn: str) -> str:
    items = tuple(items)
    if not items:
        raise NoMatchError(fn, "empty set")
    if len(items) > 1:
        raise AmbiguousError(fn, f"{len(items)} elements, expected one")
    return items[0]


def _coerce_start(value, epoch: datetime.date | None = None):
    """Interpret a starts_at argument: date, datetime, weekday name, or HH:MM text."""
    if isinstance(value, (datetime.datetime, datetime.date)):
        return value
    text = str(value)
    if ":" in text:
        return text
    if text in _WEEKDAYS:
        return _next_weekday(epoch or epoch_date(), _WEEKDAYS.index(text))
    return datetime.date.fromisoformat(text)


def _build_event(specs, epoch: datetime.date) -> Event:
    subject, location, attendees = "event", "office", []
    duration = 30
    day, time_text, exact = epoch, "09:00", None
    for s in specs:
        if s.kind == "subject":
            subject = s.value
        elif s.kind == "location":
            location = s.value
        elif s.kind == "attendee":
            attendees.append(s.value)
        elif s.kind == "duration":
            duration = s.value
        elif s.kind == "start":
            if isinstance(s.value, datetime.datetime):
                exact = s.value
            elif isinstance(s.value, datetime.date):
                day = s.value
            else:
                time_text = s.value
    if exact is None:
        h, m = (int(p) for p in time_text.split(":"))
        exact = datetime.datetime.combine(day, datetime.time(h, m))
    return Event(subject, exact, duration, location, tuple(attendees))


def _next_weekday(epoch: datetime.date, weekday: int) -> datetime.date:
    ahead = (weekday - epoch.weekday() - 1) % 7 + 1
    return epoch + datetime.timedelta(days=ahead)


def kb_eval(fn: str, args: dict, kb: KnowledgeBase, epoch: datetime.date | None = None):
    """Evaluate one calendar function application on already-evaluated args."""
    epoch = epoch or epoch_date()
    if fn == "FindManager":
        p = args["recipient"]
        m = kb.manager_of.get(p)
        if m is None:
            raise NoMatchError("FindManager", f"{p} has no manager")
        return m
    if fn == "FindFriends":
        p = args["person"]
        friends = kb.friends_of.get(p, ())
        if not friends:
            raise NoMatchError("FindFriends", f"{p} has no friends")
        return tuple(friends)
    if fn == "singleton":
        return _the_one(args["items"], "singleton")
    if fn == "FindEvents":
        return find_events(_as_specs(args["constraint"]), kb)
    if fn == "CreateEvent":
        specs = _as_specs(args["constraint"]) if "constraint" in args else ()
        return _build_event(specs, epoch)
    if fn == "AND":
        out = []
        for key in sorted(args, key=lambda k: int(k[3:])):
            out.extend(_as_specs(args[key]))
        return tuple(out)
    if fn == "with_attendee":
        return ConstraintSpec("attendee", args["attendee"])
    if fn == "has_duration":
        return ConstraintSpec("duration", args["duration"])
    if fn == "has_subject":
        return ConstraintSpec("subject", args["subject"])
    if fn == "at_location":
        return ConstraintSpec("location", args["location"])
    if fn == "starts_at":
        return ConstraintSpec("start", _coerce_start(args["start"], epoch))
    if fn == "toMinutes":
        return int(args["n"])
    if fn == "toWeeks":
        return int(args["n"]) * 7 * 24 * 60
    if fn == "toMonths":
        return int(args["n"]) * 30 * 24 * 60
    if fn == "toYears":
        return int(args["n"]) * 365 * 24 * 60
    if fn == "Today":
        return epoch
    if fn == "Yesterday":
        return epoch - datetime.timedelta(days=1)
    if fn == "NextWeekend":
        return _next_weekday(epoch, 5)
    if fn == "NextDOW":
        return _next_weekday(epoch, _WEEKDAYS.index(args["dow"]))
    if fn == "NumberAM":
        hour = int(str(args["t"]).split(":")[0]) % 12
        return f"{hour:02d}:00"
    if fn == "daysAfter":
        start = _WEEKDAYS.index(args["start"])
        return _WEEKDAYS[(start + int(args["days"])) % 7]
    if fn == "GetTemperature":
        return "21"
    if fn == ":location":
        return args["of"].location
    if fn == ":start":
        return args["of"].start
    if fn == ":attendees":
        return args["of"].attendees
    if fn == ":recipient":
        return _the_one(args["of"], ":recipient")
    if fn == ":dow":
        return _WEEKDAYS[args["of"].weekday()]
    if fn == ":time":
        return args["of"].strftime("%H:%M")
    raise EvaluationError(fn, "no calendar semantics registered")


def calendar_context(kb: KnowledgeBase, registry: Registry | None = None,
                     epoch: datetime.date | None = None) -> EvalContext:
    registry = registry or load_registry()
    epoch = epoch or epoch_date()

    def handler_for(name):
        def handle(args, node, graph):
            return kb_eval(name, args, kb, epoch)
        return handle

    handlers = {name: handler_for(name) for name in registry.function_names()}
    return EvalContext(registry, handlers)
