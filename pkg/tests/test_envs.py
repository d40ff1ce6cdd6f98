import random

import pytest

from dialoglab.acts import DialogAct, acts_to_string
from dialoglab.agent import UserAgent
from dialoglab.dst import absorb_system_acts, init_state, update
from dialoglab.envs import EnvSpec, RoleplayEnv, SimulatedEnv
from dialoglab.errors import SteppedAfterDone, ValidationFailure, WrongSpeaker
from dialoglab.ontology import BOOKING_SLOTS
from dialoglab.policy import decide_rule


@pytest.fixture
def act_env(schemas, db):
    return SimulatedEnv(schemas, db, EnvSpec(kind="simulated_acts"))


def drive_rule_agent(env, schemas, db, seed):
    obs = env.reset(seed)
    state = init_state(schemas)
    while not obs.done:
        state = update(state, obs.payload, schemas)
        acts = decide_rule(state, db, schemas)
        state = absorb_system_acts(state, acts)
        obs = env.step(acts)
    return env.episode


class TestEnvSpec:
    def test_rejects_bad_noise(self):
        with pytest.raises(ValidationFailure):
            EnvSpec(noise_rate=1.5)

    def test_rejects_tiny_max_t(self):
        with pytest.raises(ValidationFailure):
            EnvSpec(max_t=1)

    def test_rejects_unknown_kind(self):
        with pytest.raises(ValidationFailure):
            EnvSpec(kind="underwater")


class TestReset:
    def test_deterministic_opening(self, act_env):
        a = act_env.reset(7)
        b = act_env.reset(7)
        assert a.payload == b.payload and a.tick == b.tick == 0

    def test_opening_payload_non_empty(self, act_env):
        assert act_env.reset(3).payload

    def test_reward_zero_done_false(self, act_env):
        obs = act_env.reset(1)
        assert obs.reward == 0.0 and not obs.done


class TestStep:
    def test_stepping_after_done_raises(self, act_env):
        act_env.reset(0)
        obs = act_env.step((DialogAct("bye"),))
        assert obs.done
        with pytest.raises(SteppedAfterDone):
            act_env.step((DialogAct("reqmore"),))

    def test_turn_limit_gives_failure_penalty(self, schemas, db):
        env = SimulatedEnv(schemas, db, EnvSpec(kind="simulated_acts", max_t=2))
        env.reset(0)
        obs = env.step((DialogAct("request", "restaurant", "food"),))
        if not obs.done:
            obs = env.step((DialogAct("request", "restaurant", "area"),))
        assert obs.done
        assert env.episode.done_reason == "failure_turn_limit"
        assert obs.reward == -2.0  # -max_t

    def test_success_reward_is_twice_max_t(self, act_env, schemas, db):
        episode = drive_rule_agent(act_env, schemas, db, seed=5)
        assert episode.success
        assert episode.reward_trace[-1] == 80.0

    def test_intermediate_reward_minus_one(self, act_env):
        act_env.reset(2)
        obs = act_env.step((DialogAct("request", "restaurant", "food"),))
        assert obs.reward == -1.0

    def test_reward_trace_sums_to_return_decomposition(self, act_env, schemas, db):
        episode = drive_rule_agent(act_env, schemas, db, seed=11)
        trace = episode.reward_trace
        assert sum(trace) == -(len(trace) - 1) + trace[-1]

    def test_tick_increments_by_one(self, act_env):
        obs = act_env.reset(4)
        seen = [obs.tick]
        while not obs.done and len(seen) < 6:
            obs = act_env.step((DialogAct("reqmore"),))
            seen.append(obs.tick)
        assert seen == list(range(len(seen)))

    def test_speakers_alternate_starting_with_user(self, act_env, schemas, db):
        episode = drive_rule_agent(act_env, schemas, db, seed=8)
        speakers = [t.speaker for t in episode.turns]
        for i, speaker in enumerate(speakers):
            assert speaker == ("user" if i % 2 == 0 else "system")

    def test_reward_trace_length_equals_system_turns(self, act_env, schemas, db):
        episode = drive_rule_agent(act_env, schemas, db, seed=9)
        assert len(episode.reward_trace) == sum(1 for t in episode.turns if t.speaker == "system")


class TestNoise:
    def test_noise_flips_stay_in_vocabulary(self, schemas, db):
        env = SimulatedEnv(schemas, db, EnvSpec(kind="simulated_acts", noise_rate=1.0))
        for seed in range(30):
            obs = env.reset(seed)
            for act in obs.payload:
                if act.act_type == "inform" and act.value not in ("none", "dontcare"):
                    vocab = schemas[act.domain].informable.get(act.slot)
                    if vocab:
                        assert act.value in vocab
                elif act.act_type == "book":
                    assert act.value in BOOKING_SLOTS[act.slot]

    def test_noise_zero_never_corrupts(self, schemas, db):
        spec = EnvSpec(kind="simulated_acts", noise_rate=0.0)
        env_a = SimulatedEnv(schemas, db, spec)
        env_b = SimulatedEnv(schemas, db, EnvSpec(kind="simulated_acts"))
        for seed in range(20):
            assert env_a.reset(seed).payload == env_b.reset(seed).payload


class TestChannelEquivalence:
    def test_text_env_reproduces_act_traces(self, schemas, db, templates, resources):
        from dialoglab.nlg import generate
        from dialoglab.nlu import parse

        user_lexicon = resources.lexicon("user")
        system_lexicon = resources.lexicon("system")

        def run_text(seed):
            env = SimulatedEnv(schemas, db, EnvSpec(kind="simulated_text"), templates=templates, system_lexicon=system_lexicon)
            obs = env.reset(seed)
            state = init_state(schemas)
            last_system = ()
            while not obs.done:
                user_acts = parse(user_lexicon, obs.payload, context=last_system)
                state = update(state, user_acts, schemas)
                acts = decide_rule(state, db, schemas)
                state = absorb_system_acts(state, acts)
                last_system = acts
                obs = env.step(generate(templates, acts, "system"))
            return env.episode

        for seed in range(50):
            act_episode = drive_rule_agent(SimulatedEnv(schemas, db, EnvSpec(kind="simulated_acts")), schemas, db, seed)
            text_episode = run_text(seed)
            assert act_episode.act_trace() == text_episode.act_trace(), f"seed {seed}"


class TestRoleplay:
    def _drive(self, schemas, db, seed):
        spec = EnvSpec(kind="roleplay")
        env = RoleplayEnv(schemas, db, spec)
        user = UserAgent(schemas, db, spec)
        env.attach_user_side(user.side)
        user_acts, goal = user.open_episode(seed)
        env.begin(goal)
        state = init_state(schemas)
        obs = env.roleplay_step("user", user_acts)
        while not obs.done:
            state = update(state, obs.payload, schemas)
            system_acts = decide_rule(state, db, schemas)
            state = absorb_system_acts(state, system_acts)
            obs = env.roleplay_step("system", system_acts)
            if obs.done:
                break
            user_acts, user_done = user.respond(obs.payload)
            obs = env.roleplay_step("user", user_acts)
        return env.episode

    def test_strict_alternation_enforced(self, schemas, db):
        spec = EnvSpec(kind="roleplay")
        env = RoleplayEnv(schemas, db, spec)
        user = UserAgent(schemas, db, spec)
        user_acts, goal = user.open_episode(0)
        env.begin(goal)
        env.roleplay_step("user", user_acts)
        with pytest.raises(WrongSpeaker):
            env.roleplay_step("user", user_acts)

    def test_speakers_recorded_in_alternation(self, schemas, db):
        episode = self._drive(schemas, db, 3)
        speakers = [t.speaker for t in episode.turns]
        assert all(s == ("user" if i % 2 == 0 else "system") for i, s in enumerate(speakers))

    def test_roleplay_trace_equals_simulated_env_trace(self, schemas, db):
        for seed in range(30):
            sim = drive_rule_agent(SimulatedEnv(schemas, db, EnvSpec(kind="simulated_acts")), schemas, db, seed)
            rp = self._drive(schemas, db, seed)
            assert sim.act_trace() == rp.act_trace(), f"seed {seed}"
            assert sim.success == rp.success


class TestSystemInitiative:
    def test_system_first_env_opens_with_empty_user_turn(self, schemas, db):
        env = SimulatedEnv(schemas, db, EnvSpec(kind="simulated_acts", user_first=False))
        obs = env.reset(3)
        assert obs.payload == ()
        # the dialog still completes once the system takes the initiative
        state = init_state(schemas)
        while not obs.done:
            state = update(state, obs.payload, schemas)
            acts = decide_rule(state, db, schemas)
            state = absorb_system_acts(state, acts)
            obs = env.step(acts)
        assert env.episode.success

    def test_unknown_seed_policy_rejected(self):
        with pytest.raises(ValidationFailure):
            EnvSpec(seed_policy="lottery")


class TestRoleplayDriver:
    def test_composed_roleplay_config_runs_under_the_harness(self):
        from dialoglab.config import load_config, compose
        from dialoglab.harness import apply_overrides, run_session

        config = apply_overrides(load_config("configs/roleplay_act.json"), {"meta.episodes": 40})
        report = run_session(compose(config), config.meta, seed=0)
        assert report.success_rate == 1.0

    def test_roleplay_session_trace_equals_simulated_session(self):
        from dialoglab.config import load_config, compose
        from dialoglab.harness import apply_overrides, run_session

        episodes = {"meta.episodes": 25}
        roleplay = apply_overrides(load_config("configs/roleplay_act.json"), episodes)
        simulated = apply_overrides(load_config("configs/act_level_rule.json"), episodes)
        rp = run_session(compose(roleplay), roleplay.meta, seed=7)
        sim = run_session(compose(simulated), simulated.meta, seed=7)
        for a, b in zip(rp.transcripts, sim.transcripts):
            assert a.act_trace() == b.act_trace()
            assert a.reward_trace == b.reward_trace
        assert rp.success_rate == sim.success_rate
