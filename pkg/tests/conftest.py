import random

import pytest

from dialoglab.acts import DialogAct, canonicalize
from dialoglab.config import load_resources
from dialoglab.ontology import BOOKING_SLOTS, DONTCARE

CONFIG_DIR = "configs"


@pytest.fixture(scope="session")
def resources():
    return load_resources({})


@pytest.fixture(scope="session")
def schemas(resources):
    return resources.schemas


@pytest.fixture(scope="session")
def db(resources):
    return resources.db


@pytest.fixture(scope="session")
def templates(resources):
    return resources.templates


@pytest.fixture(scope="session")
def user_lexicon(resources):
    return resources.lexicon("user")


@pytest.fixture(scope="session")
def system_lexicon(resources):
    return resources.lexicon("system")


def sample_grammar_acts(rng: random.Random, schemas, db, role: str):
    """Random act set expressible by the template grammar for ``role``.

    Values come from the schema vocabularies, the booking vocabularies or
    actual entity attributes, which is exactly the space the lexicon's
    gazetteer accepts.
    """
    choices = []
    for name in schemas.names:
        schema = schemas[name]
        entities = db.domain_entities(name)
        for slot, vocab in schema.informable.items():
            if role == "user":
                choices.append(lambda d=name, s=slot, v=vocab: DialogAct("inform", d, s, rng.choice(list(v) + [DONTCARE])))
            else:
                choices.append(lambda d=name, s=slot, v=vocab: DialogAct("inform", d, s, rng.choice(v)))
                choices.append(lambda d=name, s=slot, v=vocab: DialogAct("nooffer", d, s, rng.choice(v)))
                choices.append(lambda d=name, s=slot: DialogAct("request", d, s))
        for slot in schema.requestable:
            if role == "user":
                choices.append(lambda d=name, s=slot: DialogAct("request", d, s))
            else:
                choices.append(
                    lambda d=name, s=slot, es=entities: DialogAct("inform", d, s, rng.choice(es).attributes.get(s, "x"))
                )
        if role == "system" and "name" in schema.slots:
            choices.append(lambda d=name, es=entities: DialogAct("offer", d, "name", rng.choice(es).attributes["name"]))
            choices.append(lambda d=name, es=entities: DialogAct("recommend", d, "name", rng.choice(es).attributes["name"]))
        if schema.bookable:
            if role == "user":
                for slot, vocab in BOOKING_SLOTS.items():
                    choices.append(lambda d=name, s=slot, v=vocab: DialogAct("book", d, s, rng.choice(v)))
            else:
                choices.append(lambda d=name: DialogAct("book", d))
        if role == "system":
            choices.append(lambda d=name: DialogAct("nooffer", d))
        # fallback-grammar acts (no dedicated template)
        slot0 = next(iter(schema.informable))
        choices.append(lambda d=name, s=slot0, v=schema.informable[slot0]: DialogAct("select", d, s, rng.choice(v)))
    for act_type in ("bye", "greet", "thank", "reqmore"):
        choices.append(lambda t=act_type: DialogAct(t))

    k = rng.randint(1, 4)
    return canonicalize(rng.choice(choices)() for _ in range(k))
