"""dialoglab: config-driven multi-domain task-oriented dialog platform.

Agents (NLU -> DST -> policy -> NLG pipelines, or merged word-level
slots) talk to environments (act-level or NL-level simulated users, role
play, human bridge); bodies bind the two and the session/trial/experiment
harness measures everything with seeded determinism.
"""

__version__ = "0.1.0"
