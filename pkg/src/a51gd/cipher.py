"""Bit-exact A5/1 and generically parameterized LFSR-majority stream ciphers.

Registers are plain machine integers; bit p of a register r is (r >> p) & 1,
so bit 0 is the rightmost (least significant) bit.  All operations are pure:
states are immutable values and safe to share between threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence


def majority(a: int, b: int, c: int) -> int:
    """Value held by at least two of the three input bits."""
    return (a & b) | (a & c) | (b & c)


def parity(x: int) -> int:
    return x.bit_count() & 1


@dataclass(frozen=True)
class CipherSpec:
    """Register lengths, feedback taps and clocking-bit positions.

    The output tap of each register is fixed as its most significant bit
    (position length - 1).
    """

    lengths: tuple[int, int, int]
    taps: tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]
    clock_bits: tuple[int, int, int]

    def __post_init__(self):
        if len(self.lengths) != 3 or len(self.taps) != 3 or len(self.clock_bits) != 3:
            raise ValueError("spec needs exactly three registers")
        for length, taps, cb in zip(self.lengths, self.taps, self.clock_bits):
            if length < 2:
                raise ValueError("register too short")
            if not taps:
                raise ValueError("empty tap list")
            if len(set(taps)) != len(taps):
                raise ValueError("duplicate tap positions")
            if any(not 0 <= t < length for t in taps):
                raise ValueError("tap position out of range")
            if not 0 <= cb < length:
                raise ValueError("clocking bit out of range")

    @cached_property
    def masks(self) -> tuple[int, int, int]:
        return tuple((1 << n) - 1 for n in self.lengths)

    @cached_property
    def tap_masks(self) -> tuple[int, int, int]:
        return tuple(sum(1 << t for t in taps) for taps in self.taps)

    def to_json(self) -> str:
        return json.dumps(
            {
                "lengths": list(self.lengths),
                "taps": [list(t) for t in self.taps],
                "clock_bits": list(self.clock_bits),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "CipherSpec":
        doc = json.loads(text)
        return cls(
            lengths=tuple(doc["lengths"]),
            taps=tuple(tuple(t) for t in doc["taps"]),
            clock_bits=tuple(doc["clock_bits"]),
        )


#: The real A5/1: lengths 19/22/23, taps {13,16,17,18}/{20,21}/{7,20,21,22},
#: clocking bits 8/10/10.
A51 = CipherSpec(
    lengths=(19, 22, 23),
    taps=((13, 16, 17, 18), (20, 21), (7, 20, 21, 22)),
    clock_bits=(8, 10, 10),
)


@dataclass(frozen=True)
class CipherState:
    """Concrete fills of the three registers."""

    r1: int
    r2: int
    r3: int

    def registers(self) -> tuple[int, int, int]:
        return (self.r1, self.r2, self.r3)

    def validate(self, spec: CipherSpec) -> None:
        for value, mask in zip(self.registers(), spec.masks):
            if not 0 <= value <= mask:
                raise ValueError("register value does not fit its length")


def step(spec: CipherSpec, state: CipherState) -> tuple[CipherState, int]:
    """One irregular clocking: majority-selected registers shift, then the
    output bit is the XOR of the three post-clock MSBs."""
    regs = list(state.registers())
    cbs = [(r >> cb) & 1 for r, cb in zip(regs, spec.clock_bits)]
    maj = majority(*cbs)
    for i in range(3):
        if cbs[i] == maj:
            fb = parity(regs[i] & spec.tap_masks[i])
            regs[i] = ((regs[i] << 1) | fb) & spec.masks[i]
    out = 0
    for i in range(3):
        out ^= (regs[i] >> (spec.lengths[i] - 1)) & 1
    return CipherState(*regs), out


def generate_keystream(spec: CipherSpec, state: CipherState, n: int) -> list[int]:
    """n output bits obtained by stepping n times from `state`."""
    if n < 0:
        raise ValueError("n must be >= 0")
    bits = []
    for _ in range(n):
        state, out = step(spec, state)
        bits.append(out)
    return bits


def state_output_bits(spec: CipherSpec, state: CipherState, n: int) -> list[int]:
    """Output prefix anchored at `state` itself: bit 0 is the XOR of the
    current MSBs, later bits come from stepping.

    This is the convention the state-recovery search uses: the first known
    keystream bit pins down the MSBs of the state being recovered, so that
    state is the one the generator held when the first bit was read.
    """
    if n <= 0:
        return []
    out0 = 0
    for i in range(3):
        out0 ^= (state.registers()[i] >> (spec.lengths[i] - 1)) & 1
    return [out0] + generate_keystream(spec, state, n - 1)


def _clock_all(spec: CipherSpec, regs: list[int], inject: int) -> None:
    # Regular clocking used during key/frame loading: all three registers
    # shift, with the input bit XORed into each feedback value.
    for i in range(3):
        fb = parity(regs[i] & spec.tap_masks[i]) ^ inject
        regs[i] = ((regs[i] << 1) | fb) & spec.masks[i]


def initialize(
    spec: CipherSpec,
    key_bits: Sequence[int],
    frame_bits: Sequence[int],
    warmup_cycles: int = 100,
) -> CipherState:
    """Key/frame loading followed by warm-up; returns the post-warm-up state.

    Starting from all-zero registers, the 64 key bits then the 22 frame bits
    are consumed least-index-first, each XORed into every register's feedback
    during a regular (non-majority) clocking.  The resulting state is then
    clocked `warmup_cycles` times under the majority rule with output
    discarded.
    """
    if len(key_bits) != 64:
        raise ValueError("key must be exactly 64 bits")
    if len(frame_bits) != 22:
        raise ValueError("frame must be exactly 22 bits")
    regs = [0, 0, 0]
    for b in list(key_bits) + list(frame_bits):
        if b not in (0, 1):
            raise ValueError("key/frame bits must be 0 or 1")
        _clock_all(spec, regs, b)
    state = CipherState(*regs)
    for _ in range(warmup_cycles):
        state, _ = step(spec, state)
    return state


def register_period(length: int, taps: Sequence[int], seed: int) -> int:
    """Steps until a regularly clocked single register returns to `seed`.

    Returns 0 if the trajectory never comes back (possible for degenerate
    tap sets whose update map is not invertible).
    """
    if seed == 0:
        raise ValueError("seed must be nonzero")
    mask = (1 << length) - 1
    tap_mask = sum(1 << t for t in taps)
    state = seed & mask
    steps = 0
    limit = 1 << length
    while steps < limit:
        state = ((state << 1) | ((state & tap_mask).bit_count() & 1)) & mask
        steps += 1
        if state == seed:
            return steps
    return 0


# --- encodings -------------------------------------------------------------
#
# Registers: lowercase hex of the integer whose bit i equals register bit i.
# Keystream text form: '0'/'1' string with KS[0] first.  Keystream hex form
# packs 8 bits per byte with KS[0] as the MSB of the first byte.


def register_to_hex(value: int) -> str:
    return format(value, "#x")


def register_from_hex(text: str) -> int:
    value = int(text, 16)
    if value < 0:
        raise ValueError("register value must be non-negative")
    return value


def bits_to_string(bits: Sequence[int]) -> str:
    return "".join(str(b) for b in bits)


def bits_from_string(text: str) -> list[int]:
    if any(ch not in "01" for ch in text):
        raise ValueError("bit string may contain only '0' and '1'")
    return [int(ch) for ch in text]


def bits_to_hex(bits: Sequence[int]) -> str:
    out = []
    for i in range(0, len(bits), 8):
        chunk = bits[i : i + 8]
        byte = 0
        for j, b in enumerate(chunk):
            byte |= b << (7 - j)
        out.append(format(byte, "02x"))
    return "".join(out)


def bits_from_hex(text: str) -> list[int]:
    if text.startswith(("0x", "0X")):
        text = text[2:]
    if len(text) % 2:
        raise ValueError("hex keystream must be a whole number of bytes")
    raw = bytes.fromhex(text)
    bits = []
    for byte in raw:
        for j in range(7, -1, -1):
            bits.append((byte >> j) & 1)
    return bits


def key_bits_from_bytes(data: bytes) -> list[int]:
    """Key/frame loading order used by the circulated reference vector:
    byte 0 first, least significant bit of each byte first."""
    bits = []
    for byte in data:
        for j in range(8):
            bits.append((byte >> j) & 1)
    return bits


def frame_bits_from_int(frame: int) -> list[int]:
    """22 frame-counter bits, least significant first."""
    if not 0 <= frame < (1 << 22):
        raise ValueError("frame number must fit in 22 bits")
    return [(frame >> i) & 1 for i in range(22)]
