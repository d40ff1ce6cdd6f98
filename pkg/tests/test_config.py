import glob
import json

import pytest

from dialoglab.config import compose, load_config, parse_config
from dialoglab.errors import (
    DuplicateName,
    MissingSlot,
    ParseFailure,
    ShapeMismatch,
    SlotConflict,
    UnknownComponent,
    ValidationFailure,
)
from dialoglab.registry import Registry

from .conftest import CONFIG_DIR

PIPELINE = {
    "demo": {
        "agent": [
            {
                "name": "DialogAgent",
                "nlu": {"name": "PatternNLU"},
                "dst": {"name": "RuleDST"},
                "policy": {"name": "RulePolicy"},
                "nlg": {"name": "TemplateNLG", "is_user": False},
            }
        ],
        "env": [
            {
                "name": "toy",
                "nlu": {"name": "PatternNLU", "side": "system"},
                "policy": {"name": "AgendaPolicy"},
                "nlg": {"name": "TemplateNLG", "is_user": True},
                "max_t": 40,
                "max_tick": 20000,
            }
        ],
        "body": {"product": "outer", "num": 1},
        "meta": {"episodes": 5},
    }
}


def variant(agent_doc):
    doc = json.loads(json.dumps(PIPELINE))
    doc["demo"]["agent"][0] = agent_doc
    return doc


class TestParseConfig:
    def test_pipeline_shape_parses(self):
        config = parse_config(PIPELINE)
        assert config.name == "demo"
        assert config.agents[0].mode == "pipeline"
        assert set(config.agents[0].slots) == {"nlu", "dst", "policy", "nlg"}

    def test_word_dst_spellings_normalized(self):
        doc = variant({"name": "A", "word-dst": {"name": "WordDST"}, "policy": {"name": "RulePolicy"}})
        config = parse_config(doc)
        assert config.agents[0].mode == "word_dst"
        assert "word_dst" in config.agents[0].slots
        # normalized form echoes the canonical spelling
        assert "word_dst" in config.normalized()["demo"]["agent"][0]

    def test_nlu_plus_word_dst_conflict(self):
        doc = variant(
            {"name": "A", "nlu": {"name": "PatternNLU"}, "word_dst": {"name": "WordDST"}, "policy": {"name": "RulePolicy"}}
        )
        with pytest.raises(SlotConflict):
            parse_config(doc)

    def test_word_policy_excludes_policy(self):
        doc = variant(
            {"name": "A", "dst": {"name": "RuleDST"}, "policy": {"name": "RulePolicy"}, "word_policy": {"name": "WordPolicy"}}
        )
        with pytest.raises(SlotConflict):
            parse_config(doc)

    def test_end_to_end_excludes_all(self):
        doc = variant(
            {"name": "A", "end_to_end": {"name": "PipelineEndToEnd"}, "dst": {"name": "RuleDST"}}
        )
        with pytest.raises(SlotConflict):
            parse_config(doc)

    def test_missing_policy_slot(self):
        doc = variant({"name": "A", "nlu": {"name": "PatternNLU"}, "dst": {"name": "RuleDST"}})
        with pytest.raises(MissingSlot):
            parse_config(doc)

    def test_unknown_component(self):
        doc = variant({"name": "A", "dst": {"name": "RuleDST"}, "policy": {"name": "NeuralPolicy9000"}})
        with pytest.raises(UnknownComponent):
            parse_config(doc)

    def test_syntax_error(self):
        with pytest.raises(ParseFailure):
            parse_config("{not json")

    def test_two_top_level_keys_rejected(self):
        with pytest.raises(ParseFailure):
            parse_config({"a": {}, "b": {}})

    def test_normalization_idempotent(self):
        config = parse_config(PIPELINE)
        once = config.normalized()
        again = parse_config(once).normalized()
        assert once == again

    def test_env_kind_inferred(self):
        config = parse_config(PIPELINE)
        assert config.envs[0]["kind"] == "simulated_text"
        act_doc = json.loads(json.dumps(PIPELINE))
        act_doc["demo"]["env"][0] = {"name": "toy", "policy": {"name": "AgendaPolicy"}}
        assert parse_config(act_doc).envs[0]["kind"] == "simulated_acts"

    def test_unknown_env_key_rejected(self):
        doc = json.loads(json.dumps(PIPELINE))
        doc["demo"]["env"][0]["max_turn"] = 10
        with pytest.raises(ValidationFailure):
            parse_config(doc)


class TestCompose:
    def _multi(self, n_agents, n_envs, product):
        doc = json.loads(json.dumps(PIPELINE))
        agent = doc["demo"]["agent"][0]
        env = doc["demo"]["env"][0]
        doc["demo"]["agent"] = [json.loads(json.dumps(agent)) for _ in range(n_agents)]
        doc["demo"]["env"] = [json.loads(json.dumps(env)) for _ in range(n_envs)]
        doc["demo"]["body"] = {"product": product, "num": 1}
        return parse_config(doc)

    def test_outer_product_2x3_gives_6_bodies(self):
        composed = compose(self._multi(2, 3, "outer"))
        assert len(composed.bodies) == 6
        assert {(b.agent_index, b.env_index) for b in composed.bodies} == {(i, j) for i in range(2) for j in range(3)}

    def test_inner_zips_equal_lengths(self):
        composed = compose(self._multi(2, 2, "inner"))
        assert [(b.agent_index, b.env_index) for b in composed.bodies] == [(0, 0), (1, 1)]

    def test_inner_mismatch_raises(self):
        with pytest.raises(ShapeMismatch):
            compose(self._multi(2, 3, "inner"))

    def test_custom_pairs(self):
        config = self._multi(2, 2, "outer")
        doc = config.normalized()
        doc["demo"]["body"] = {"product": "custom", "num": 1, "pairs": [[0, 1], [1, 0]]}
        composed = compose(parse_config(doc))
        assert [(b.agent_index, b.env_index) for b in composed.bodies] == [(0, 1), (1, 0)]

    def test_custom_without_pairs_rejected(self):
        config = self._multi(1, 1, "outer")
        doc = config.normalized()
        doc["demo"]["body"] = {"product": "custom", "num": 1}
        with pytest.raises(ValidationFailure):
            parse_config(doc)

    def test_no_hidden_sharing_between_bodies(self):
        composed = compose(self._multi(1, 2, "outer"))
        a, b = composed.bodies
        assert a.agent is not b.agent
        assert a.env is not b.env

    def test_composition_purity(self):
        config = self._multi(2, 2, "outer")
        one = compose(config)
        two = compose(config)
        assert [(b.agent_index, b.env_index) for b in one.bodies] == [
            (b.agent_index, b.env_index) for b in two.bodies
        ]


class TestRegistry:
    def test_register_then_lookup(self):
        registry = Registry()
        factory = object()
        registry.register("X", factory)
        assert registry.lookup("X") is factory

    def test_duplicate_rejected(self):
        registry = Registry()
        registry.register("X", object())
        with pytest.raises(DuplicateName):
            registry.register("X", object())

    def test_unknown_lookup(self):
        with pytest.raises(UnknownComponent):
            Registry().lookup("nope")

    def test_listing_sorted(self):
        registry = Registry()
        registry.register("b", 1)
        registry.register("a", 2)
        assert registry.names() == ["a", "b"]


class TestFixtureConfigs:
    @pytest.mark.parametrize("path", sorted(glob.glob(f"{CONFIG_DIR}/*.json")))
    def test_every_shipped_config_parses_and_composes(self, path):
        config = load_config(path)
        composed = compose(config)
        assert composed.bodies

    def test_table_shaped_fixtures_have_both_column_structures(self):
        pipeline = load_config(f"{CONFIG_DIR}/pipeline_rule_text.json")
        assert pipeline.agents[0].mode == "pipeline"
        assert {"nlu", "dst", "policy", "nlg"} <= set(pipeline.agents[0].slots)
        swapped = load_config(f"{CONFIG_DIR}/word_dst_swap.json")
        assert swapped.agents[0].mode == "word_dst"
        assert "nlu" not in swapped.agents[0].slots and "dst" not in swapped.agents[0].slots

    def test_normalized_configs_validate_against_schema(self):
        jsonschema = pytest.importorskip("jsonschema")
        with open("docs/config.schema.json", "r", encoding="utf-8") as fh:
            schema = json.load(fh)
        for path in sorted(glob.glob(f"{CONFIG_DIR}/*.json")):
            config = load_config(path)
            jsonschema.validate(config.normalized(), schema)
