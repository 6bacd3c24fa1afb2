"""Three-valued register model with deferred feedback resolution.

Bits are tracked by absolute index: original state bits live at indices
0..length-1, and the bit fed back on the k-th clocking gets index -k.  The
current position p of a register clocked t times therefore holds absolute
index p - t.  Feedback bits never store a value; they are resolved on demand
from their tap dependencies, so a bit that is never consulted never forces a
branch.

Internally a register keeps two masks over the original indices: which bits
are assigned and what their values are.  Every bit (original or feedback) is
a GF(2) linear function of the original bits, so resolving position p reduces
to a parity over a precomputed dependency mask.
"""

from __future__ import annotations

from functools import lru_cache

UNKNOWN = None  # third truth value for unresolved bits


@lru_cache(maxsize=None)
def feedback_vectors(length: int, taps: tuple[int, ...], kmax: int = 96) -> tuple[int, ...]:
    """Dependency mask (over original bits 0..length-1) of each feedback bit.

    Entry k is the parity mask of the bit created on the k-th clocking, i.e.
    absolute index -k.  Multiplicity is honored: a dependency appearing an
    even number of times cancels.
    """
    vec = [0] * (kmax + 1)

    def v(a: int) -> int:
        return (1 << a) if a >= 0 else vec[-a]

    for k in range(1, kmax + 1):
        x = 0
        for tap in taps:
            x ^= v(tap - (k - 1))  # tap dependencies are read pre-clock
        vec[k] = x
    return tuple(vec)


class PartialRegister:
    """A register whose original bits may each be 0, 1 or unknown."""

    __slots__ = ("length", "taps", "t", "assigned", "values")

    def __init__(self, length: int, taps: tuple[int, ...]):
        self.length = length
        self.taps = tuple(taps)
        self.t = 0  # times clocked
        self.assigned = 0  # mask of assigned original bits
        self.values = 0  # their values (zero where unassigned)

    def copy(self) -> "PartialRegister":
        other = PartialRegister.__new__(PartialRegister)
        other.length = self.length
        other.taps = self.taps
        other.t = self.t
        other.assigned = self.assigned
        other.values = self.values
        return other

    @property
    def assignments(self) -> dict[int, int]:
        return {
            a: (self.values >> a) & 1
            for a in range(self.length)
            if (self.assigned >> a) & 1
        }

    def feedback_deps(self, k: int) -> list[int]:
        """Absolute indices of the tap dependencies of feedback bit -k."""
        if not 1 <= k <= self.t:
            raise ValueError("no such feedback record")
        return [tap - (k - 1) for tap in self.taps]

    def _vec(self, a: int) -> int:
        if a >= 0:
            return 1 << a
        return feedback_vectors(self.length, self.taps)[-a]

    def parity_info(self, p: int) -> tuple[int, int]:
        """(constant, unknown-mask) of the bit at current position p.

        The bit value is constant XOR parity of the unknown original bits in
        the mask; it is concrete iff the mask is zero.
        """
        if not 0 <= p < self.length:
            raise ValueError("position out of range")
        vec = self._vec(p - self.t)
        unknown = vec & ~self.assigned & ((1 << self.length) - 1)
        return parity_of(vec & self.values), unknown

    def current_bit(self, p: int):
        const, unknown = self.parity_info(p)
        return const if unknown == 0 else UNKNOWN

    def unresolved_original_deps(self, p: int) -> set[int]:
        _, unknown = self.parity_info(p)
        return {a for a in range(self.length) if (unknown >> a) & 1}

    def assign(self, a: int, v: int) -> bool:
        """Record original bit a = v; False signals a contradiction."""
        if not 0 <= a < self.length:
            raise ValueError("only original bits are assignable")
        if v not in (0, 1):
            raise ValueError("bit value must be 0 or 1")
        bit = 1 << a
        if self.assigned & bit:
            return ((self.values >> a) & 1) == v
        self.assigned |= bit
        if v:
            self.values |= bit
        return True

    def clock(self) -> None:
        """Shift by one; the new feedback bit stays a deferred record."""
        self.t += 1

    def unassigned_mask(self) -> int:
        return ~self.assigned & ((1 << self.length) - 1)

    def materialize(self) -> list[int]:
        """All 2^u concrete fills of the original state consistent with the
        assignments (u = number of unassigned original bits)."""
        free = self.unassigned_mask()
        fills = []
        sub = free
        while True:
            fills.append(self.values | sub)
            if sub == 0:
                break
            sub = (sub - 1) & free
        fills.reverse()
        return fills


def parity_of(x: int) -> int:
    return x.bit_count() & 1
