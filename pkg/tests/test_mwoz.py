"""Restaurant domain: DB queries, agent policy, conversation state."""

import json
import random
import re

import pytest

from dfgen.domains import multiwoz as mw
from dfgen.errors import (
    EvaluationError,
    ReferTargetAbsentError,
    UnknownFieldError,
    UnknownSlotError,
)
from dfgen.graph import equivalent
from dfgen.parser import parse_expression
from dfgen.simulator import Persona, extract_agenda, run_dialogue

_CITY_STOP = mw.RestaurantRow(
    name="city stop restaurant",
    address="108 regent street city centre",
    phone="01223 363270",
    food="european",
    area="north",
    pricerange="expensive",
)


def _apply(dom, state, expr_text):
    dom.apply_user(state, parse_expression(expr_text, dom.registry))


def test_db_query_counts(rest_domain):
    db = rest_domain.db
    assert len(db) == 25
    assert len(mw.db_query({}, db)) == 25
    assert len(mw.db_query({"area": "centre"}, db)) == 20
    assert len(mw.db_query({"food": "european"}, db)) == 3
    assert len(mw.db_query({"pricerange": "cheap"}, db)) == 6
    assert len(mw.db_query({"area": "centre", "pricerange": "cheap"}, db)) == 5
    assert mw.db_query({"area": "centre", "food": "afghan"}, db) == []


def test_db_query_exact_row(rest_domain):
    assert mw.db_query({"name": "city stop restaurant"}, rest_domain.db) == \
        [_CITY_STOP]


def test_db_query_unknown_field(rest_domain):
    with pytest.raises(UnknownFieldError):
        mw.db_query({"smoking": "no"}, rest_domain.db)


def test_alternatives(rest_domain):
    db = rest_domain.db
    times = mw.alternatives("time", "17:30", db)
    assert "13:00" in times and "17:30" not in times
    assert len(times) == 23
    assert mw.alternatives("day", "Thursday", db) == \
        ["Monday", "Tuesday", "Wednesday", "Friday", "Saturday", "Sunday"]
    assert mw.alternatives("people", "4", db) == \
        ["1", "2", "3", "5", "6", "7", "8"]
    assert "european" not in mw.alternatives("food", "european", db)
    with pytest.raises(UnknownSlotError):
        mw.alternatives("address", "x", db)


def test_db_validation(tmp_path):
    rows = [json.loads(json.dumps(_CITY_STOP.__dict__))] * 2
    dup = tmp_path / "dup.json"
    dup.write_text(json.dumps(rows))
    with pytest.raises(ValueError, match="duplicate"):
        mw.load_db(dup)
    bad_area = dict(_CITY_STOP.__dict__, area="downtown")
    f = tmp_path / "area.json"
    f.write_text(json.dumps([bad_area]))
    with pytest.raises(ValueError, match="bad area"):
        mw.load_db(f)
    bad_price = dict(_CITY_STOP.__dict__, pricerange="luxury")
    f2 = tmp_path / "price.json"
    f2.write_text(json.dumps([bad_price]))
    with pytest.raises(ValueError, match="bad pricerange"):
        mw.load_db(f2)


def test_respond_several_matches(rest_domain):
    state = rest_domain.new_state()
    resp = rest_domain.respond(state, random.Random(0))
    assert resp.nl == "I see several (25) matches, maybe select name or address"
    assert resp.asked_slot is None and resp.answered_info is None


def test_respond_no_matches(rest_domain):
    state = rest_domain.new_state()
    _apply(rest_domain, state,
           "revise( FindRestaurant , name=city stop restaurant , food=chinese )")
    resp = rest_domain.respond(state, random.Random(0))
    assert resp.nl == \
        "I'm sorry, I could not find a restaurant matching your request."


def test_booking_question_order(rest_domain):
    """Unique row -> the agent works through people, day, time in order."""
    state = rest_domain.new_state()
    rng = random.Random(0)
    _apply(rest_domain, state, "revise( FindRestaurant , name=city stop restaurant )")
    resp = rest_domain.respond(state, rng)
    assert resp.nl == ("OK, city stop restaurant. For how many people "
                       "would you like to book the restaurant?")
    assert resp.asked_slot == "people"
    _apply(rest_domain, state, "revise( FindRestaurant , people=4 )")
    resp = rest_domain.respond(state, rng)
    assert resp.nl == "On which day would you like to book the restaurant?"
    assert resp.asked_slot == "day"
    _apply(rest_domain, state, "revise( FindRestaurant , day=Thursday )")
    resp = rest_domain.respond(state, rng)
    assert resp.nl == "At what time would you like to book the restaurant?"
    assert resp.asked_slot == "time"


def _booked_state(dom, rng):
    state = dom.new_state()
    _apply(dom, state, "revise( FindRestaurant , name=city stop restaurant , "
                       "people=4 , day=Thursday , time=17:30 )")
    resp = dom.respond(state, rng)
    return state, resp


def test_booking_confirmation(rest_domain):
    state, resp = _booked_state(rest_domain, random.Random(7))
    m = re.fullmatch(
        r"I have made the reservation for 4 people on Thursday at 17:30\. "
        r"Your reference code is ([A-Z0-9]{8})\. "
        r"Is there anything else I can do for you\?", resp.nl)
    assert m
    assert state.booking.confirmed
    assert state.booking.reference_code == m.group(1)
    # booked state mirrors the conversation graph values
    assert state.booking_state().complete()
    # second respond with nothing new: no re-booking
    again = rest_domain.respond(state, random.Random(7))
    assert again.nl == "Is there anything else I can do for you?"
    assert state.booking.reference_code == m.group(1)


def test_booking_determinism(rest_domain):
    _, a = _booked_state(rest_domain, random.Random(7))
    _, b = _booked_state(rest_domain, random.Random(7))
    assert a.nl == b.nl


def test_booking_reset_on_constraint_change(rest_domain):
    state, _ = _booked_state(rest_domain, random.Random(7))
    old_code = state.booking.reference_code
    _apply(rest_domain, state, "revise( FindRestaurant , day=Friday )")
    assert not state.booking.confirmed
    assert state.booking.reference_code is None
    resp = rest_domain.respond(state, random.Random(8))
    assert "on Friday at 17:30" in resp.nl
    assert state.booking.reference_code != old_code
    # re-applying an identical value is not a change
    code = state.booking.reference_code
    _apply(rest_domain, state, "revise( FindRestaurant , day=Friday )")
    assert state.booking.confirmed
    assert state.booking.reference_code == code


def test_booking_integrity(rest_domain):
    state, _ = _booked_state(rest_domain, random.Random(3))
    assert state.booking.confirmed
    rows = mw.db_query(state.constraints(), rest_domain.db)
    assert len(rows) == 1 and rows[0].name == "city stop restaurant"


def test_info_answer_for_unique_row(rest_domain):
    state, _ = _booked_state(rest_domain, random.Random(7))
    _apply(rest_domain, state,
           "GetInfo( refer( FindRestaurant ) , address )")
    assert state.pending_info == "address"
    resp = rest_domain.respond(state, random.Random(9))
    assert resp.nl.startswith(
        "For city stop restaurant the address is 108 regent street city centre.")
    assert resp.answered_info == "address"
    assert state.pending_info is None


def test_info_answer_needs_unique_row(rest_domain):
    state = rest_domain.new_state()
    _apply(rest_domain, state, "GetInfo( refer( FindRestaurant ) , address )")
    resp = rest_domain.respond(state, random.Random(0))
    assert resp.nl.startswith("I need a specific restaurant to tell you that.")
    assert resp.answered_info is None


def test_get_info_unknown_field(rest_domain):
    state = rest_domain.new_state()
    with pytest.raises(EvaluationError, match="no such info field"):
        _apply(rest_domain, state, "GetInfo( refer( FindRestaurant ) , menu )")


def test_refer_resolution(rest_domain):
    state = rest_domain.new_state()
    hooks = rest_domain.hooks(state)
    assert hooks.resolve_reference("FindRestaurant") == "FindRestaurant"
    assert hooks.resolve_reference("BookDay") is None
    _apply(rest_domain, state, "revise( FindRestaurant , day=Thursday )")
    _apply(rest_domain, state, "revise( FindRestaurant , day=Friday )")
    # latest mention wins
    assert hooks.resolve_reference("BookDay") == "Friday"
    assert hooks.refer_ok("day", "Friday")
    assert not hooks.refer_ok("day", "Thursday")
    with pytest.raises(UnknownSlotError):
        hooks.refer_type("address")


def test_refer_without_mention_raises(rest_domain):
    state = rest_domain.new_state()
    with pytest.raises(ReferTargetAbsentError):
        _apply(rest_domain, state,
               "revise( FindRestaurant , day=refer( BookDay ) )")


def test_refer_value_lands_in_graph(rest_domain):
    state = rest_domain.new_state()
    _apply(rest_domain, state, "revise( FindRestaurant , time=17:30 )")
    _apply(rest_domain, state, "revise( FindRestaurant , time=refer( Time ) )")
    assert state.booking_values()["time"] == "17:30"


def test_shipped_agendas(rest_agendas, rest_registry):
    assert [aid for aid, _ in rest_agendas] == \
        [f"agenda{i}" for i in range(1, 11)]
    for _, graph in rest_agendas:
        assert graph.nodes[graph.root].payload == "MwozConversation"


def test_agenda_closure(rest_domain, rest_registry):
    """A finished conversation's history re-drives as an agenda."""
    state = rest_domain.new_state()
    rng = random.Random(11)
    _apply(rest_domain, state, "revise( FindRestaurant , name=city stop restaurant )")
    rest_domain.respond(state, rng)
    _apply(rest_domain, state, "revise( FindRestaurant , people=4 , day=Thursday )")
    rest_domain.respond(state, rng)
    _apply(rest_domain, state, "revise( FindRestaurant , time=17:30 )")
    rest_domain.respond(state, rng)

    extracted = extract_agenda(state.history)
    assert equivalent(extracted, state.conversation, rest_registry)
    replay = run_dialogue(extracted, Persona(p_early_end=0.0, p_mistake=0.0),
                          seed=4, domain=rest_domain)
    assert replay.reached_target
    assert replay.error is None


def test_policy_totality_over_fuzzed_dialogues(rest_domain, rest_agendas):
    """The agent never raises, whatever the persona throws at it."""
    meta = random.Random(20240101)
    ran = 0
    for aid, agenda in rest_agendas:
        for _ in range(20):
            persona = Persona(
                p_multi_slot=meta.random(),
                max_slots_per_turn=meta.randint(1, 4),
                p_mistake=meta.random() * 0.5,
                p_refer=meta.random(),
                p_ignore_agent=meta.random(),
                p_early_end=meta.random() * 0.1,
            )
            d = run_dialogue(agenda, persona, seed=meta.randrange(2**32),
                             domain=rest_domain, agenda_id=aid)
            assert d.error in (None, "turn limit reached")
            assert d.turns[0].nl == mw.USER_GREETING
            for t in d.turns:
                if t.speaker == "agent":
                    assert t.nl
            ran += 1
    assert ran == 200
