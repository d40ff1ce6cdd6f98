"""Component registry: the plugin point the config layer resolves names
against.  Populated at import time, read-only afterwards."""

from __future__ import annotations

from typing import Callable, Dict

from .errors import DuplicateName, UnknownComponent


class Registry:
    def __init__(self):
        self._factories: Dict[str, Callable] = {}

    def register(self, name: str, factory: Callable) -> Callable:
        if name in self._factories:
            raise DuplicateName(f"component {name!r} already registered")
        self._factories[name] = factory
        return factory

    def lookup(self, name: str) -> Callable:
        try:
            return self._factories[name]
        except KeyError:
            raise UnknownComponent(f"no component registered under {name!r}") from None

    def __contains__(self, name):
        return name in self._factories

    def names(self):
        return sorted(self._factories)


REGISTRY = Registry()


def register(name: str):
    def decorator(factory):
        REGISTRY.register(name, factory)
        return factory

    return decorator
