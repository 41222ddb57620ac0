"""Exception types raised across the package."""


class ParseError(ValueError):
    """Malformed instance, partition or list file."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UncolorableSource(ValueError):
    """A source with no path to any sink; no finite k can route it."""

    def __init__(self, vertex):
        self.vertex = vertex
        super().__init__(f"source {vertex} cannot reach any sink")


class NotIndependent(ValueError):
    """Routing requested for a dependent source set."""

    def __init__(self, sources):
        self.sources = sorted(sources)
        super().__init__(f"sources {self.sources} admit no vertex-disjoint routing")


class TooLarge(ValueError):
    """Brute-force oracle called on an instance beyond its limit."""


class UniverseMismatch(ValueError):
    """Partition matroid ground set differs from the gammoid's real sources."""


class ListTooSmall(ValueError):
    """An element's allowable color list is shorter than required."""

    def __init__(self, element, size, required):
        self.element = element
        self.size = size
        self.required = required
        super().__init__(
            f"list of element {element} has {size} colors, needs at least {required}"
        )


class GenerationFailed(RuntimeError):
    """Random instance generation gave up after bounded retries."""


class InvariantViolation(AssertionError):
    """An internal invariant failed; signals a bug rather than bad input.

    ``state`` carries a printable dump of whatever structure was being
    processed when the check failed.
    """

    def __init__(self, message, state=None):
        self.state = state
        if state is not None:
            message = f"{message}\n--- state ---\n{state}"
        super().__init__(message)


class NoCaseApplies(InvariantViolation):
    """Case selection found no applicable case for a tree state."""
