"""Exception hierarchy shared by all hicluster modules.

Exit-code mapping used by the CLI: usage/parse errors -> 2, resource
guards -> 3, internal invariant breaches -> 4.
"""

from __future__ import annotations


class HiclusterError(Exception):
    """Base class for all errors raised by this package."""


class PreconditionError(HiclusterError, ValueError):
    """An operation was called with arguments violating its contract."""


class FormatError(HiclusterError, ValueError):
    """A text input (graph, tree, config, spec) is malformed.

    ``offset`` is the byte offset of the first offending character when
    known, else -1.
    """

    def __init__(self, message: str, offset: int = -1):
        super().__init__(message if offset < 0 else f"{message} (at byte {offset})")
        self.offset = offset


class ResourceGuardError(HiclusterError):
    """A brute-force operation was asked to exceed its size guard."""

    def __init__(self, message: str, n: int):
        super().__init__(message)
        self.n = n


class AdmissibilityError(PreconditionError):
    """A base sequence or derived table fails an admissibility condition."""


class NotUltrametricError(HiclusterError):
    """The graph is not generated from any ultrametric.

    ``witness`` is a triple (x, y, z) whose weights violate the triple
    condition for the graph's mode.
    """

    def __init__(self, message: str, witness: tuple[int, int, int]):
        super().__init__(f"{message}; witness triple {witness}")
        self.witness = witness


class DegenerateInputError(PreconditionError):
    """The input is degenerate for the requested operation (e.g. no edges)."""


class InvariantError(HiclusterError):
    """A runtime invariant failed; indicates a bug or an invalid script."""
