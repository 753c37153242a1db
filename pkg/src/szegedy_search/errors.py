"""Exception hierarchy shared by the simulator modules."""

from __future__ import annotations


class WalkError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameter(WalkError, ValueError):
    """A generator or formula received an argument outside its domain."""


class GraphValidationError(WalkError, ValueError):
    """A graph violates one of the structural invariants (simple, undirected, connected)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NotStronglyRegular(WalkError):
    """Raised by the SRG check; ``witness`` is the first offending vertex pair (or vertex)."""

    def __init__(self, message: str, witness: tuple[int, ...]):
        self.witness = witness
        super().__init__(f"{message} (witness {witness})")


class IncompatibleState(WalkError, ValueError):
    """Two edge states (or a state and a context) live on different supports."""


class SizeGuardError(WalkError):
    """A dense construction was requested for a graph that is too large."""


class Unsupported(WalkError):
    """The operation is defined only for a narrower class of inputs."""


class DecompositionUnstable(WalkError):
    """The Gram matrix of a spanning set is too ill-conditioned to solve against."""
