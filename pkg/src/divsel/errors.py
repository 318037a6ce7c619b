"""Exception types shared across the package."""


class DivselError(Exception):
    """Base class for all errors raised by divsel."""


class InputError(DivselError):
    """Invalid or unparsable user input: files, parameters, request bodies."""


class UnknownTermError(InputError):
    """One or more terms could not be resolved in the embedding store.

    Carries the complete list of offending terms, not just the first one,
    so callers can report them all at once.
    """

    def __init__(self, terms):
        self.terms = sorted(set(terms))
        super().__init__("unknown term(s): " + ", ".join(self.terms))


class ComputationError(DivselError):
    """A numerical stage produced an invalid result (e.g. a non-PSD kernel)."""
