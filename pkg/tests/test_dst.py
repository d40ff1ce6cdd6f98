import random

import pytest

from dialoglab.acts import DialogAct, canonicalize
from dialoglab.dst import absorb_system_acts, init_state, update, word_dst_update
from dialoglab.errors import UnknownSlot
from dialoglab.nlg import generate
from dialoglab.nlu import parse

from .conftest import sample_grammar_acts


def inform(d, s, v):
    return DialogAct("inform", d, s, v)


class TestInitState:
    def test_all_sections_empty(self, schemas):
        state = init_state(schemas)
        assert set(state.domains) == set(schemas.names)
        for dstate in state.domains.values():
            assert dstate.is_empty()
            assert not dstate.fulfilled and dstate.offered is None and not dstate.booked

    def test_turn_count_zero(self, schemas):
        assert init_state(schemas).turn_count == 0

    def test_deterministic(self, schemas):
        assert init_state(schemas) == init_state(schemas)


class TestUpdate:
    def test_empty_acts_only_bump_turn_count(self, schemas):
        s0 = init_state(schemas)
        s1 = update(s0, (), schemas)
        assert s1.turn_count == 1
        assert s1.domains == s0.domains
        assert not s1.terminated

    def test_inform_sets_constraint(self, schemas):
        s1 = update(init_state(schemas), (inform("restaurant", "area", "north"),), schemas)
        assert s1.domains["restaurant"].constraints == {"area": "north"}

    def test_last_write_wins_across_updates(self, schemas):
        s = init_state(schemas)
        s = update(s, (inform("restaurant", "area", "north"),), schemas)
        s = update(s, (inform("restaurant", "area", "south"),), schemas)
        assert s.domains["restaurant"].constraints == {"area": "south"}

    def test_request_accumulates(self, schemas):
        s = update(init_state(schemas), (DialogAct("request", "restaurant", "phone"),), schemas)
        s = update(s, (DialogAct("request", "restaurant", "address"),), schemas)
        assert s.domains["restaurant"].requested == {"phone", "address"}

    def test_bye_terminates(self, schemas):
        s = update(init_state(schemas), (DialogAct("bye"),), schemas)
        assert s.terminated

    def test_dontcare_clears_and_is_remembered(self, schemas):
        s = update(init_state(schemas), (inform("restaurant", "area", "north"),), schemas)
        s = update(s, (inform("restaurant", "area", "dontcare"),), schemas)
        assert "area" not in s.domains["restaurant"].constraints
        assert "area" in s.domains["restaurant"].dontcare

    def test_unknown_slot_raises(self, schemas):
        with pytest.raises(UnknownSlot):
            update(init_state(schemas), (inform("restaurant", "wifi", "yes"),), schemas)

    def test_unknown_domain_raises(self, schemas):
        with pytest.raises(UnknownSlot):
            update(init_state(schemas), (inform("cinema", "area", "north"),), schemas)

    def test_booking_details_tracked(self, schemas):
        s = update(init_state(schemas), (DialogAct("book", "restaurant", "day", "friday"),), schemas)
        assert s.domains["restaurant"].booking == {"day": "friday"}

    def test_turn_count_strictly_increases(self, schemas):
        s = init_state(schemas)
        for i in range(5):
            s = update(s, (), schemas)
            assert s.turn_count == i + 1

    def test_referential_transparency(self, schemas):
        acts = (inform("hotel", "stars", "4"), DialogAct("request", "hotel", "phone"))
        s0 = init_state(schemas)
        assert update(s0, acts, schemas) == update(s0, acts, schemas)
        # and the input state is untouched
        assert s0.turn_count == 0 and s0.domains["hotel"].is_empty()


class TestWordDst:
    def test_empty_utterance_only_bumps_turn(self, schemas, user_lexicon):
        s1 = word_dst_update(init_state(schemas), "", (), user_lexicon, schemas)
        assert s1.turn_count == 1

    def test_generated_inform_lands_in_state(self, schemas, templates, user_lexicon):
        text = generate(templates, (inform("hotel", "stars", "4"),), "user")
        s1 = word_dst_update(init_state(schemas), text, (), user_lexicon, schemas)
        assert s1.domains["hotel"].constraints == {"stars": "4"}

    def test_equivalence_with_parse_then_update_1000(self, schemas, db, templates, user_lexicon):
        rng = random.Random("word-dst")
        state_a = init_state(schemas)
        state_b = init_state(schemas)
        for _ in range(1000):
            acts = sample_grammar_acts(rng, schemas, db, "user")
            text = generate(templates, acts, "user")
            state_a = word_dst_update(state_a, text, (), user_lexicon, schemas)
            state_b = update(state_b, parse(user_lexicon, text), schemas)
            assert state_a == state_b


class TestAbsorbSystemActs:
    def test_inform_marks_fulfilled(self, schemas):
        s = absorb_system_acts(init_state(schemas), (inform("restaurant", "phone", "123"),))
        assert s.domains["restaurant"].fulfilled == {"phone": "123"}

    def test_offer_sets_offered(self, schemas):
        s = absorb_system_acts(init_state(schemas), (DialogAct("offer", "restaurant", "name", "golden curry"),))
        assert s.domains["restaurant"].offered == "golden curry"

    def test_book_sets_booked(self, schemas):
        s = absorb_system_acts(init_state(schemas), (DialogAct("book", "restaurant"),))
        assert s.domains["restaurant"].booked
