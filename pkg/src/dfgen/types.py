"""Semantic types and function signatures.

A Registry holds the declared semantic types (with a single-parent subtype
relation) and the function signatures of one domain.  Registries are built
either in code or from a declarative JSON config and are immutable once
loaded: lookups never mutate shared state, so a registry can be shared
freely across threads.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .errors import RegistryError


@dataclass(frozen=True)
class SlotSpec:
    name: str
    type: str
    required: bool = False


@dataclass(frozen=True)
class FunctionSignature:
    """Declared shape of one function.

    Variadic functions (AND) declare a single element slot;  actual inputs
    are keyed arg0..argN.  Accessors (names starting with ':') declare
    exactly one slot.
    """

    name: str
    slots: tuple[SlotSpec, ...] = ()
    returns: str = "Str"
    commutative: bool = False
    accessor: bool = False
    variadic: bool = False

    def __post_init__(self):
        names = [s.name for s in self.slots]
        if len(set(names)) != len(names):
            raise RegistryError(f"duplicate slot names in {self.name}")
        if self.accessor and len(self.slots) != 1:
            raise RegistryError(f"accessor {self.name} must take exactly one slot")
        if self.variadic and len(self.slots) != 1:
            raise RegistryError(f"variadic {self.name} must declare one element slot")

    def slot(self, name: str) -> SlotSpec | None:
        if self.variadic:
            if re.fullmatch(r"arg\d+", name):
                return SlotSpec(name, self.slots[0].type, False)
            return None
        for s in self.slots:
            if s.name == name:
                return s
        return None

    def slot_order(self, filled: set[str]) -> list[str]:
        """Filled slot names in canonical (declaration) order."""
        if self.variadic:
            return sorted(filled, key=lambda n: int(n[3:]))
        return [s.name for s in self.slots if s.name in filled]


_WEEKDAYS = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday")

# How terminal surface strings are validated per type.  Looked up along the
# ancestor chain, so e.g. BookDay inherits the DayOfWeek check.
_TERMINAL_CHECKS = {
    "Int": re.compile(r"-?\d+"),
    "Count": re.compile(r"\d+"),
    "Time": re.compile(r"([01]?\d|2[0-3]):[0-5]\d"),
    "Date": re.compile(r"\d{4}-\d{2}-\d{2}"),
    "Bool": re.compile(r"true|false"),
}


class Registry:
    def __init__(self):
        self._parents: dict[str, str | None] = {}
        self._functions: dict[str, FunctionSignature] = {}
        self._aliases: dict[str, str] = {}
        self._dynamic: dict[str, object] = {}

    # -- types ------------------------------------------------------------

    def add_type(self, name: str, parent: str | None = None) -> None:
        if name in self._parents:
            raise RegistryError(f"type already declared: {name}")
        if parent is not None and parent not in self._parents:
            # parents must pre-exist, which keeps the relation acyclic
            raise RegistryError(f"unknown parent type: {parent}")
        self._parents[name] = parent

    def has_type(self, name: str) -> bool:
        return name in self._parents

    def type_items(self) -> list[tuple[str, str | None]]:
        """(name, parent) pairs in declaration order (parents first)."""
        return list(self._parents.items())

    def supertypes(self, name: str) -> list[str]:
        chain = []
        cur: str | None = name
        while cur is not None:
            chain.append(cur)
            cur = self._parents.get(cur)
        return chain

    def is_subtype(self, sub: str, sup: str) -> bool:
        return sup in self.supertypes(sub)

    def terminal_ok(self, type_name: str, value: str) -> bool:
        for t in self.supertypes(type_name):
            if t == "DayOfWeek":
                return value in _WEEKDAYS
            pat = _TERMINAL_CHECKS.get(t)
            if pat is not None:
                return pat.fullmatch(value) is not None
        return True

    # -- functions ---------------------------------------------------------

    def add_function(self, sig: FunctionSignature, aliases: tuple[str, ...] = ()) -> None:
        if sig.name in self._functions or sig.name in self._aliases:
            raise RegistryError(f"function already declared: {sig.name}")
        for s in sig.slots:
            if s.type not in self._parents:
                raise RegistryError(f"{sig.name}: unknown slot type {s.type}")
        if sig.returns not in self._parents:
            raise RegistryError(f"{sig.name}: unknown return type {sig.returns}")
        self._functions[sig.name] = sig
        for a in aliases:
            if a in self._functions or a in self._aliases:
                raise RegistryError(f"alias already taken: {a}")
            self._aliases[a] = sig.name

    def set_dynamic_return(self, fn_name: str, hook) -> None:
        """hook(graph, node, registry) -> type name, overriding sig.returns."""
        self._dynamic[self.canonical_name(fn_name)] = hook

    def dynamic_return(self, fn_name: str):
        return self._dynamic.get(fn_name)

    def canonical_name(self, name: str) -> str:
        return self._aliases.get(name, name)

    def function(self, name: str) -> FunctionSignature | None:
        return self._functions.get(self.canonical_name(name))

    def aliases_of(self, name: str) -> tuple[str, ...]:
        canon = self.canonical_name(name)
        return tuple(a for a, c in self._aliases.items() if c == canon)

    def function_names(self) -> list[str]:
        return list(self._functions)

    # -- config loading ----------------------------------------------------

    @classmethod
    def from_dict(cls, cfg: dict) -> "Registry":
        reg = cls()
        for t in cfg.get("types", []):
            reg.add_type(t["name"], t.get("parent"))
        for f in cfg.get("functions", []):
            slots = tuple(
                SlotSpec(s["name"], s["type"], bool(s.get("required", False)))
                for s in f.get("slots", [])
            )
            sig = FunctionSignature(
                name=f["name"],
                slots=slots,
                returns=f.get("returns", "Str"),
                commutative=bool(f.get("commutative", False)),
                accessor=bool(f.get("accessor", False)),
                variadic=bool(f.get("variadic", False)),
            )
            reg.add_function(sig, tuple(f.get("aliases", [])))
        return reg

    @classmethod
    def from_file(cls, path) -> "Registry":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))
