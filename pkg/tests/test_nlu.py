import json
import random

import pytest

from dialoglab.acts import DialogAct, canonicalize
from dialoglab.errors import ValidationFailure
from dialoglab.nlg import generate, load_templates
from dialoglab.nlu import build_lexicon, parse

from .conftest import sample_grammar_acts


class TestParseBasics:
    def test_empty_utterance(self, user_lexicon):
        assert parse(user_lexicon, "") == ()

    def test_unknown_utterance_degrades_to_empty(self, user_lexicon):
        assert parse(user_lexicon, "colorless green ideas sleep furiously") == ()

    def test_single_inform(self, user_lexicon):
        acts = parse(user_lexicon, "i want a restaurant in the north part of town")
        assert acts == (DialogAct("inform", "restaurant", "area", "north"),)

    def test_multi_intent_concatenation(self, templates, user_lexicon):
        inform = generate(templates, (DialogAct("inform", "hotel", "stars", "4"),), "user")
        req = generate(templates, (DialogAct("request", "hotel", "phone"),), "user")
        acts = parse(user_lexicon, f"{inform}. {req}")
        assert DialogAct("inform", "hotel", "stars", "4") in acts
        assert DialogAct("request", "hotel", "phone") in acts
        assert len(acts) == 2

    def test_out_of_vocabulary_value_rejected_for_closed_slot(self, user_lexicon):
        assert parse(user_lexicon, "i want a restaurant in the downtown part of town") == ()

    def test_open_slot_accepts_any_span(self, system_lexicon):
        acts = parse(system_lexicon, "the name of the restaurant is some entirely new place")
        assert acts == (DialogAct("inform", "restaurant", "name", "some entirely new place"),)

    def test_case_and_whitespace_insensitive(self, user_lexicon):
        acts = parse(user_lexicon, "  I Want a Restaurant IN the  north part of town!  ")
        assert acts == (DialogAct("inform", "restaurant", "area", "north"),)

    def test_purity(self, user_lexicon):
        text = "i want a restaurant in the north part of town"
        assert parse(user_lexicon, text) == parse(user_lexicon, text)


class TestContextResolution:
    def test_bare_value_resolves_against_last_request(self, user_lexicon):
        context = (DialogAct("request", "restaurant", "area"),)
        assert parse(user_lexicon, "the north one", context) == (
            DialogAct("inform", "restaurant", "area", "north"),
        )

    def test_dontcare_phrase_resolves(self, user_lexicon):
        context = (DialogAct("request", "restaurant", "pricerange"),)
        assert parse(user_lexicon, "i do not care", context) == (
            DialogAct("inform", "restaurant", "pricerange", "dontcare"),
        )

    def test_no_context_no_resolution(self, user_lexicon):
        assert parse(user_lexicon, "the north one") == ()


class TestRoundTrip:
    @pytest.mark.parametrize("role", ["user", "system"])
    def test_round_trip_1000(self, role, templates, schemas, db, resources):
        lexicon = resources.lexicon(role)
        rng = random.Random(f"roundtrip:{role}")
        for i in range(1000):
            acts = sample_grammar_acts(rng, schemas, db, role)
            utterance = generate(templates, acts, role)
            parsed = parse(lexicon, utterance)
            assert parsed == canonicalize(acts), f"[{i}] {utterance!r}: {parsed} != {acts}"


class TestBuildLexicon:
    def test_empty_template_set(self, schemas, tmp_path):
        path = tmp_path / "empty.json"
        path.write_text("[]")
        lexicon = build_lexicon(schemas, load_templates(path), "user")
        # only the built-in fallback grammar patterns remain
        assert len(lexicon) == 11

    def test_invertible_count_matches(self, schemas, templates):
        lexicon = build_lexicon(schemas, templates, "system")
        invertible = len(templates.invertible_entries("system"))
        assert len(lexicon) == invertible + 11  # + fallback patterns

    def test_non_invertible_reported(self, schemas, templates):
        lexicon = build_lexicon(schemas, templates, "user")
        assert lexicon.non_invertible == 1  # the decorative bye variant

    def test_ambiguous_identical_surfaces_rejected(self, schemas, tmp_path):
        doc = [
            {"act": "inform(restaurant, area)", "role": "user", "surface": "i want {area}"},
            {"act": "inform(hotel, area)", "role": "user", "surface": "i want {area}"},
        ]
        path = tmp_path / "amb.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ValidationFailure, match="ambiguous"):
            build_lexicon(schemas, load_templates(path), "user")

    def test_same_shape_closed_slots_still_ambiguous_via_dontcare(self, schemas, tmp_path):
        # disjoint schema vocabularies, but both accept "dontcare"
        doc = [
            {"act": "inform(restaurant, food)", "role": "user", "surface": "give me {food}"},
            {"act": "inform(hotel, stars)", "role": "user", "surface": "give me {stars}"},
        ]
        path = tmp_path / "amb2.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ValidationFailure, match="ambiguous"):
            build_lexicon(schemas, load_templates(path), "user")

    def test_vocab_gating_disambiguates_nested_literals(self, system_lexicon):
        # "the taxi is {color}" must not swallow "the taxi is a {cartype}"
        assert parse(system_lexicon, "the taxi is red") == (DialogAct("inform", "taxi", "color", "red"),)
        assert parse(system_lexicon, "the taxi is a ford") == (DialogAct("inform", "taxi", "cartype", "ford"),)


class TestNoiseMonotonicity:
    def test_f1_non_increasing_under_corruption(self, templates, schemas, db, user_lexicon):
        rng = random.Random("noise")

        def corrupt(text, k):
            chars = list(text)
            for _ in range(k):
                pos = rng.randrange(len(chars))
                chars[pos] = rng.choice("abcdefghijklmnopqrstuvwxyz")
            return "".join(chars)

        def f1(gold, got):
            gold, got = set(gold), set(got)
            if not gold and not got:
                return 1.0
            tp = len(gold & got)
            if tp == 0:
                return 0.0
            precision = tp / len(got)
            recall = tp / len(gold)
            return 2 * precision * recall / (precision + recall)

        samples = []
        for i in range(200):
            acts = sample_grammar_acts(rng, schemas, db, "user")
            samples.append((acts, generate(templates, acts, "user")))

        means = []
        for k in (0, 3, 8):
            scores = [f1(acts, parse(user_lexicon, corrupt(text, k))) for acts, text in samples]
            means.append(sum(scores) / len(scores))
        assert means[0] == 1.0
        assert means[0] >= means[1] >= means[2]
        assert means[2] < means[0]  # heavy corruption certainly hurts
