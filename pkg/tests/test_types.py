import pytest

from dfgen.errors import RegistryError
from dfgen.types import FunctionSignature, Registry, SlotSpec


def _tiny_registry():
    reg = Registry()
    reg.add_type("Str")
    reg.add_type("DateTime")
    reg.add_type("Date", parent="DateTime")
    reg.add_type("DayOfWeek", parent="Date")
    reg.add_type("BookDay", parent="DayOfWeek")
    reg.add_type("Int")
    reg.add_type("Count", parent="Int")
    reg.add_type("Time", parent="DateTime")
    reg.add_type("Bool")
    return reg


def test_type_names_unique():
    reg = _tiny_registry()
    with pytest.raises(RegistryError):
        reg.add_type("Date")


def test_parent_must_preexist():
    reg = Registry()
    with pytest.raises(RegistryError):
        reg.add_type("Child", parent="Ghost")


def test_subtype_chain():
    reg = _tiny_registry()
    assert reg.is_subtype("BookDay", "DayOfWeek")
    assert reg.is_subtype("BookDay", "Date")
    assert reg.is_subtype("BookDay", "DateTime")
    assert reg.is_subtype("Date", "Date")
    assert not reg.is_subtype("DateTime", "Date")
    assert not reg.is_subtype("Int", "Date")


def test_supertypes_order():
    reg = _tiny_registry()
    assert reg.supertypes("BookDay") == ["BookDay", "DayOfWeek", "Date", "DateTime"]


def test_terminal_checks():
    reg = _tiny_registry()
    assert reg.terminal_ok("Int", "-3")
    assert not reg.terminal_ok("Int", "three")
    assert reg.terminal_ok("Count", "12")
    assert not reg.terminal_ok("Count", "-1")
    assert reg.terminal_ok("Time", "09:30")
    assert reg.terminal_ok("Time", "9:30")
    assert not reg.terminal_ok("Time", "25:00")
    assert reg.terminal_ok("Date", "2024-01-01")
    assert not reg.terminal_ok("Date", "Jan 1")
    assert reg.terminal_ok("Bool", "true")
    assert not reg.terminal_ok("Bool", "yes")
    # unconstrained types accept anything
    assert reg.terminal_ok("Str", "get together")


def test_weekday_terminals_strict_but_inherited():
    reg = _tiny_registry()
    assert reg.terminal_ok("DayOfWeek", "Wednesday")
    assert not reg.terminal_ok("DayOfWeek", "wednesday")
    # BookDay inherits the weekday check from its parent
    assert reg.terminal_ok("BookDay", "Thursday")
    assert not reg.terminal_ok("BookDay", "17:30")
    # Date-typed slots still demand ISO dates, not weekday names
    assert not reg.terminal_ok("Date", "Wednesday")


def test_signature_slot_rules():
    with pytest.raises(RegistryError):
        FunctionSignature("f", (SlotSpec("a", "Str"), SlotSpec("a", "Str")))
    with pytest.raises(RegistryError):
        FunctionSignature(":acc", (SlotSpec("a", "Str"), SlotSpec("b", "Str")),
                          accessor=True)
    with pytest.raises(RegistryError):
        FunctionSignature("v", (SlotSpec("a", "Str"), SlotSpec("b", "Str")),
                          variadic=True)


def test_variadic_slot_lookup():
    sig = FunctionSignature("AND", (SlotSpec("item", "Str"),), variadic=True)
    assert sig.slot("arg0") == SlotSpec("arg0", "Str", False)
    assert sig.slot("arg17").type == "Str"
    assert sig.slot("item") is None
    assert sig.slot("argx") is None
    assert sig.slot_order({"arg2", "arg0", "arg10"}) == ["arg0", "arg2", "arg10"]


def test_slot_order_follows_declaration():
    sig = FunctionSignature("f", (SlotSpec("b", "Str"), SlotSpec("a", "Str")))
    assert sig.slot_order({"a", "b"}) == ["b", "a"]


def test_function_registration_and_aliases():
    reg = _tiny_registry()
    sig = FunctionSignature("FindManager", (SlotSpec("recipient", "Str", True),),
                            returns="Str")
    reg.add_function(sig, aliases=("GetManager",))
    assert reg.function("GetManager") is sig
    assert reg.canonical_name("GetManager") == "FindManager"
    assert reg.aliases_of("FindManager") == ("GetManager",)
    with pytest.raises(RegistryError):
        reg.add_function(FunctionSignature("GetManager"))


def test_unknown_slot_type_rejected():
    reg = _tiny_registry()
    with pytest.raises(RegistryError):
        reg.add_function(FunctionSignature("f", (SlotSpec("x", "Ghost"),)))
    with pytest.raises(RegistryError):
        reg.add_function(FunctionSignature("g", returns="Ghost"))


def test_from_dict_round_trip(tmp_path):
    cfg = {
        "types": [{"name": "Str"}, {"name": "Thing"}],
        "functions": [
            {"name": "make", "slots": [{"name": "x", "type": "Str", "required": True}],
             "returns": "Thing", "aliases": ["mk"]},
        ],
    }
    reg = Registry.from_dict(cfg)
    assert reg.function("mk").returns == "Thing"
    assert reg.function("make").slot("x").required
