"""Exception taxonomy shared by all modules.

Three failure families map onto the CLI exit codes: the math said no
(PreconditionError and friends, exit 1), the caller said something
malformed (StructuralError / UsageError, exit 2), and the library broke
one of its own guarantees (InternalInvariantError, exit 3).
"""


class AmalgamError(Exception):
    """Base class for all library errors."""


class StructuralError(AmalgamError):
    """Malformed input container: wrong shape, unknown label, bad JSON field."""


class PreconditionError(AmalgamError):
    """A documented operation precondition does not hold for the given input."""


class UsageError(AmalgamError):
    """Command line misuse: unknown flags, unparsable values, missing files."""


class InternalInvariantError(AmalgamError):
    """The library violated one of its own verified guarantees; always a bug."""
