"""Exception hierarchy shared by the library and the CLI."""


class Sa2DecideError(Exception):
    """Base class for all errors raised by sa2_decide."""


class InputError(Sa2DecideError, ValueError):
    """An operation was called outside its precondition or with malformed data."""


class FieldContextError(InputError):
    """Quadratic-field values from different fields were combined."""


class DegenerateInputError(InputError):
    """The input has no invariant-line structure (the matrix is I or -I)."""


class ResourceError(Sa2DecideError):
    """A configured search cap was exhausted where the contract demands an answer."""


class CertificateError(Sa2DecideError):
    """A constructed certificate failed its own exact verification."""
