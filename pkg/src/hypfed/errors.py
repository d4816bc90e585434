"""Exception types shared across the package."""


class HypfedError(Exception):
    """Base class for every error raised on purpose by this package."""


class DomainError(HypfedError, ValueError):
    """Input outside the mathematical domain (point off the disc, R >= s, ...)."""


class EmptyInputError(HypfedError, ValueError):
    pass


class DegenerateInputError(HypfedError, ValueError):
    """Coincident or otherwise degenerate geometric input."""


class SizeCapError(HypfedError, ValueError):
    """An exhaustive oracle was asked to handle more than it is built for."""


class FieldOverflowError(HypfedError, ValueError):
    """A value does not fit in the prime field it is being encoded into."""


class NotSeparableError(HypfedError):
    """Hard-margin training could not satisfy every constraint."""


class ProtocolError(HypfedError):
    """Server-side failure of the federated protocol."""


class DecodeError(ProtocolError):
    pass


class UnresolvableLabelError(ProtocolError):
    def __init__(self, msg, bin_index=None, value=None):
        super().__init__(msg)
        self.bin_index = bin_index
        self.value = value


class InfeasibleGroupingError(ProtocolError):
    pass


class DatasetError(HypfedError, ValueError):
    """Malformed dataset file; carries the 1-based data row when known."""

    def __init__(self, msg, row=None):
        super().__init__(msg if row is None else f"row {row}: {msg}")
        self.row = row
