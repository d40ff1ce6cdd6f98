"""Exception hierarchy shared by all dialoglab modules."""


class DialogLabError(Exception):
    """Base class for all errors raised by this package."""


class IOFailure(DialogLabError):
    """A file could not be read or written."""


class ParseFailure(DialogLabError):
    """Malformed input. ``location`` points at the offending spot."""

    def __init__(self, message, location=None):
        super().__init__(message if location is None else f"{message} (at {location})")
        self.location = location


class ValidationFailure(DialogLabError):
    """Input is syntactically fine but violates a semantic rule."""


class UnknownDomain(DialogLabError):
    pass


class UnsatisfiableProfile(DialogLabError):
    """No entity exists for any constraint assignment under the profile."""


class UnknownSlot(DialogLabError):
    """A dialog act references a slot absent from the active schema."""


class EmptyActSet(DialogLabError):
    pass


class EmptyGoal(DialogLabError):
    pass


class DivergenceDetected(DialogLabError):
    """A trained weight left the sane range; hyperparameters are off."""


class SteppedAfterDone(DialogLabError):
    pass


class WrongSpeaker(DialogLabError):
    """A role-play action was submitted out of turn."""


class SlotConflict(DialogLabError):
    """Mutually exclusive agent slots appear in one config."""


class MissingSlot(DialogLabError):
    """An agent config lacks a policy / word_policy / end_to_end slot."""


class UnknownComponent(DialogLabError):
    pass


class DuplicateName(DialogLabError):
    pass


class ShapeMismatch(DialogLabError):
    """Inner body product requires equal-length agent and env lists."""


class EmptySearchSpace(DialogLabError):
    pass


class ComponentFailure(DialogLabError):
    """Wraps a component error with episode/turn location info."""


class CheckpointMismatch(DialogLabError):
    """Checkpoint schema hash does not match the active ontology."""


class UnknownConfig(DialogLabError):
    pass


class UnknownSession(DialogLabError):
    pass


class SessionClosed(DialogLabError):
    pass
