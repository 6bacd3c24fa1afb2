"""Guess-and-determine state recovery.

Register 1 is guessed in full; registers 2 and 3 are filled progressively by
a depth-first search.  Each round resolves the clocking bits (branching on
any unresolved original bit they depend on), selects the clock set by the
majority rule, constrains the post-clock MSBs against the next known
keystream bit, and clocks.  A branch stops once register 2 has clocked at
least D2 times and register 3 at least D3 times, at which point both partial
registers are materialized into concrete original fills.

The keystream convention: bit 0 of the known keystream is the XOR of the
MSBs of the state being recovered, and subsequent bits are produced by
stepping.  See `cipher.state_output_bits`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import Callable, Iterable, Sequence

from .cipher import (
    CipherSpec,
    CipherState,
    majority,
    parity,
    register_to_hex,
    state_output_bits,
    step,
)
from .partial import PartialRegister

MAX_ROUNDS_HARD_LIMIT = 64  # every path must stop long before this


class BranchPolicy(Enum):
    """LAZY defers the inner R3 tap until a consulted bit depends on it;
    PAPER_EAGER_R37 additionally branches it unconditionally in round 1."""

    LAZY = "lazy"
    PAPER_EAGER_R37 = "paper-eager"


class SoundnessError(AssertionError):
    """An emitted complete candidate failed to reproduce its keystream prefix."""


def stop_thresholds(spec: CipherSpec) -> tuple[int, int]:
    """Minimum clock counts (D2, D3) after which registers 2 and 3 are fully
    determined: max(MSB - CB - 1, CB) per register."""
    out = []
    for i in (1, 2):
        length = spec.lengths[i]
        cb = spec.clock_bits[i]
        out.append(max(length - 2 - cb, cb))
    return tuple(out)


@dataclass
class StateCandidate:
    """A concrete register-1 value plus partial registers 2 and 3."""

    spec: CipherSpec
    r1: int  # current (clocked) register-1 value
    t1: int
    pr2: PartialRegister
    pr3: PartialRegister
    round: int

    @classmethod
    def fresh(cls, spec: CipherSpec, r1_guess: int) -> "StateCandidate":
        if not 0 <= r1_guess <= spec.masks[0]:
            raise ValueError("register-1 guess out of range")
        return cls(
            spec=spec,
            r1=r1_guess,
            t1=0,
            pr2=PartialRegister(spec.lengths[1], spec.taps[1]),
            pr3=PartialRegister(spec.lengths[2], spec.taps[2]),
            round=0,
        )

    def copy(self) -> "StateCandidate":
        return StateCandidate(
            spec=self.spec,
            r1=self.r1,
            t1=self.t1,
            pr2=self.pr2.copy(),
            pr3=self.pr3.copy(),
            round=self.round,
        )

    def partial(self, which: int) -> PartialRegister:
        return self.pr2 if which == 2 else self.pr3


@dataclass(frozen=True)
class CompleteStateCandidate:
    """All three registers concrete, as original (round-0) fills."""

    state: CipherState
    rounds_consumed: int


@dataclass
class AttackReport:
    matches: list[CompleteStateCandidate] = field(default_factory=list)
    candidates_emitted: int = 0
    leaves_pruned: int = 0
    max_depth: int = 0
    peak_live_candidates: int = 0

    def merge(self, other: "AttackReport") -> None:
        self.matches.extend(other.matches)
        self.candidates_emitted += other.candidates_emitted
        self.leaves_pruned += other.leaves_pruned
        self.max_depth = max(self.max_depth, other.max_depth)
        self.peak_live_candidates = max(
            self.peak_live_candidates, other.peak_live_candidates
        )

    def sort_matches(self) -> None:
        self.matches.sort(key=lambda m: (m.state.r1, m.state.r2, m.state.r3))


def match_to_json(m: CompleteStateCandidate) -> str:
    return json.dumps(
        {
            "r1": register_to_hex(m.state.r1),
            "r2": register_to_hex(m.state.r2),
            "r3": register_to_hex(m.state.r3),
            "rounds": m.rounds_consumed,
        }
    )


def report_summary_json(report: AttackReport) -> str:
    return json.dumps(
        {
            "matches": len(report.matches),
            "candidates_emitted": report.candidates_emitted,
            "leaves_pruned": report.leaves_pruned,
            "max_depth": report.max_depth,
            "peak_live_candidates": report.peak_live_candidates,
        }
    )


# --- constraint machinery --------------------------------------------------


def _enforce_parity(
    cand: StateCandidate,
    terms: Sequence[tuple[int, int]],
    target: int,
) -> list[StateCandidate]:
    """Children of `cand` on which the XOR of the given (register, position)
    bits equals `target`, with every participating unknown original bit
    assigned.  Register 1 terms are always concrete.  n unknown bits yield
    2^(n-1) children; zero unknowns yield the candidate itself or nothing.
    """
    const = 0
    unknowns: list[tuple[int, int]] = []  # (register, original bit)
    for which, pos in terms:
        if which == 1:
            const ^= (cand.r1 >> pos) & 1
        else:
            c, unk = cand.partial(which).parity_info(pos)
            const ^= c
            while unk:
                low = unk & -unk
                unknowns.append((which, low.bit_length() - 1))
                unk ^= low
    if not unknowns:
        return [cand] if const == target else []
    out = []
    for fills in product((0, 1), repeat=len(unknowns) - 1):
        child = cand.copy()
        acc = const
        for (which, b), v in zip(unknowns, fills):
            assert child.partial(which).assign(b, v)
            acc ^= v
        which, b = unknowns[-1]
        assert child.partial(which).assign(b, target ^ acc)
        out.append(child)
    return out


def phase1_round0(cand: StateCandidate, ks0: int) -> list[StateCandidate]:
    """Enforce the output equation on the current MSBs against KS[0]."""
    spec = cand.spec
    terms = [(1, spec.lengths[0] - 1), (2, spec.lengths[1] - 1), (3, spec.lengths[2] - 1)]
    return _enforce_parity(cand, terms, ks0)


def _resolve_clock_bit(cand: StateCandidate, which: int) -> list[tuple[StateCandidate, int]]:
    """Candidates with the clocking bit of register `which` made concrete,
    branching on unresolved original dependencies one at a time."""
    cb_pos = cand.spec.clock_bits[which - 1]
    pending = [cand]
    out = []
    while pending:
        c = pending.pop()
        const, unk = c.partial(which).parity_info(cb_pos)
        if unk == 0:
            out.append((c, const))
            continue
        b = (unk & -unk).bit_length() - 1
        for v in (0, 1):
            child = c.copy()
            assert child.partial(which).assign(b, v)
            pending.append(child)
    return out


def branch_clocking_bits(cand: StateCandidate) -> list[StateCandidate]:
    """Fill both vacant clocking bits with every combination."""
    out = []
    for c2, _ in _resolve_clock_bit(cand, 2):
        for c3, _ in _resolve_clock_bit(c2, 3):
            out.append(c3)
    return out


def lookahead_constrain(
    cand: StateCandidate, clockset: Iterable[int], ks_next: int
) -> list[StateCandidate]:
    """Constrain the post-clock MSBs against the next keystream bit.

    For each register the post-clock MSB is the current bit at length-2 if it
    clocks, else the current MSB.
    """
    spec = cand.spec
    clockset = set(clockset)
    terms = []
    for which in (1, 2, 3):
        length = spec.lengths[which - 1]
        pos = length - 2 if which in clockset else length - 1
        terms.append((which, pos))
    return _enforce_parity(cand, terms, ks_next)


def advance_round(
    cand: StateCandidate, ks: Sequence[int], policy: BranchPolicy = BranchPolicy.LAZY
) -> list[StateCandidate]:
    """One determination round: resolve clocking bits, pick the clock set by
    majority, constrain against KS[round+1], then clock."""
    spec = cand.spec
    if cand.round + 1 >= len(ks):
        raise ValueError("keystream exhausted")
    ks_next = ks[cand.round + 1]
    eager_round = policy is BranchPolicy.PAPER_EAGER_R37 and cand.round == 0
    eager_bit = min(spec.taps[2])
    out = []
    for c2, cb2 in _resolve_clock_bit(cand.copy(), 2):
        for c3, cb3 in _resolve_clock_bit(c2, 3):
            cb1 = (c3.r1 >> spec.clock_bits[0]) & 1
            maj = majority(cb1, cb2, cb3)
            clockset = tuple(
                which
                for which, cb in ((1, cb1), (2, cb2), (3, cb3))
                if cb == maj
            )
            for c4 in lookahead_constrain(c3, clockset, ks_next):
                if eager_round and not (c4.pr3.assigned >> eager_bit) & 1:
                    expanded = []
                    for v in (0, 1):
                        child = c4.copy()
                        assert child.pr3.assign(eager_bit, v)
                        expanded.append(child)
                else:
                    expanded = [c4]
                for c5 in expanded:
                    if 1 in clockset:
                        fb = parity(c5.r1 & spec.tap_masks[0])
                        c5.r1 = ((c5.r1 << 1) | fb) & spec.masks[0]
                        c5.t1 += 1
                    if 2 in clockset:
                        c5.pr2.clock()
                    if 3 in clockset:
                        c5.pr3.clock()
                    c5.round += 1
                    out.append(c5)
    return out


def is_stopped(cand: StateCandidate) -> bool:
    d2, d3 = stop_thresholds(cand.spec)
    return cand.pr2.t >= d2 and cand.pr3.t >= d3


# --- drivers ---------------------------------------------------------------


def _run_enumeration(
    spec: CipherSpec,
    r1_guess: int,
    ks: Sequence[int],
    policy: BranchPolicy,
    sink: Callable[[CompleteStateCandidate], None],
    max_round: int | None = None,
    counters: dict | None = None,
    check_prefix: bool = False,
) -> AttackReport:
    report = AttackReport()
    if counters is not None:
        counters.setdefault("created", [0] * (MAX_ROUNDS_HARD_LIMIT + 1))
        counters.setdefault("leaves", [0] * (MAX_ROUNDS_HARD_LIMIT + 1))
        counters.setdefault("completes", [0] * (MAX_ROUNDS_HARD_LIMIT + 1))
        counters["created"][0] += 1
    root = StateCandidate.fresh(spec, r1_guess)
    stack = phase1_round0(root, ks[0])
    while stack:
        report.peak_live_candidates = max(report.peak_live_candidates, len(stack))
        c = stack.pop()
        report.max_depth = max(report.max_depth, c.round)
        if c.round > MAX_ROUNDS_HARD_LIMIT:
            raise AssertionError("determination tree exceeded the hard depth limit")
        if is_stopped(c):
            if counters is not None:
                counters["leaves"][c.round] += 1
            for r2 in c.pr2.materialize():
                for r3 in c.pr3.materialize():
                    comp = CompleteStateCandidate(
                        CipherState(r1_guess, r2, r3), c.round
                    )
                    report.candidates_emitted += 1
                    if counters is not None:
                        counters["completes"][c.round] += 1
                    if check_prefix:
                        prefix = state_output_bits(spec, comp.state, c.round + 1)
                        if prefix != list(ks[: c.round + 1]):
                            raise SoundnessError(
                                "complete candidate does not reproduce its prefix"
                            )
                    sink(comp)
            continue
        if max_round is not None and c.round >= max_round:
            continue
        if c.round + 1 >= len(ks):
            report.leaves_pruned += 1
            continue
        children = advance_round(c, ks, policy)
        if counters is not None:
            counters["created"][c.round + 1] += len(children)
        stack.extend(children)
    return report


def enumerate_candidates(
    spec: CipherSpec,
    r1_guess: int,
    ks: Sequence[int],
    policy: BranchPolicy,
    sink: Callable[[CompleteStateCandidate], None],
    check_prefix: bool = False,
) -> AttackReport:
    """Stream every complete state candidate for one register-1 guess."""
    if len(ks) < 64:
        raise ValueError("keystream must be at least 64 bits")
    return _run_enumeration(spec, r1_guess, ks, policy, sink, check_prefix=check_prefix)


def post_process(
    spec: CipherSpec, comp: CompleteStateCandidate, ks: Sequence[int]
) -> bool:
    """Regenerate 64 output bits from scratch and compare bit-wise, stopping
    at the first mismatch."""
    if len(ks) < 64:
        raise ValueError("keystream must be at least 64 bits")
    state = comp.state
    out0 = 0
    for i in range(3):
        out0 ^= (state.registers()[i] >> (spec.lengths[i] - 1)) & 1
    if out0 != ks[0]:
        return False
    for i in range(1, 64):
        state, out = step(spec, state)
        if out != ks[i]:
            return False
    return True


def attack_single_guess(
    spec: CipherSpec,
    r1_guess: int,
    ks: Sequence[int],
    policy: BranchPolicy = BranchPolicy.LAZY,
    engine: str = "auto",
    check_prefix: bool = False,
) -> AttackReport:
    """Enumerate all complete candidates for one guess and keep those that
    survive the full 64-bit check."""
    if len(ks) < 64:
        raise ValueError("keystream must be at least 64 bits")
    if engine not in ("auto", "python", "compiled"):
        raise ValueError("unknown engine")
    if engine != "python":
        from . import kernel

        if kernel.available():
            return kernel.kernel_attack_single_guess(
                spec, r1_guess, ks, policy, check_prefix=check_prefix
            )
        if engine == "compiled":
            raise RuntimeError("compiled engine unavailable")
    report = AttackReport()

    def sink(comp: CompleteStateCandidate) -> None:
        if post_process(spec, comp, ks):
            report.matches.append(comp)

    inner = _run_enumeration(spec, r1_guess, ks, policy, sink, check_prefix=check_prefix)
    report.candidates_emitted = inner.candidates_emitted
    report.leaves_pruned = inner.leaves_pruned
    report.max_depth = inner.max_depth
    report.peak_live_candidates = inner.peak_live_candidates
    report.sort_matches()
    return report


def _guess_worker(args) -> tuple[int, AttackReport]:
    spec_json, guess, ks, policy_value, engine = args
    spec = CipherSpec.from_json(spec_json)
    report = attack_single_guess(
        spec, guess, ks, BranchPolicy(policy_value), engine=engine
    )
    return guess, report


def attack_full(
    spec: CipherSpec,
    ks: Sequence[int],
    guess_range: Iterable[int],
    policy: BranchPolicy = BranchPolicy.LAZY,
    workers: int = 1,
    engine: str = "auto",
    checkpoint_path: str | None = None,
) -> AttackReport:
    """Run the single-guess attack over a range of register-1 guesses.

    Guesses are independent; with `workers` > 1 they run in parallel, and the
    merged report is deterministic (matches sorted by register values).  With
    a checkpoint path, completed guesses are persisted and skipped on resume.
    """
    if len(ks) < 64:
        raise ValueError("keystream must be at least 64 bits")
    guesses = sorted(set(guess_range))
    if not guesses:
        raise ValueError("empty guess range")
    merged = AttackReport()
    done_through = None
    if checkpoint_path:
        done_through, merged = _load_checkpoint(checkpoint_path, merged)
    todo = [g for g in guesses if done_through is None or g > done_through]
    ks = list(ks)
    if workers <= 1:
        for guess in todo:
            report = attack_single_guess(spec, guess, ks, policy, engine=engine)
            merged.merge(report)
            if checkpoint_path:
                _save_checkpoint(checkpoint_path, guess, merged)
    else:
        from concurrent.futures import ProcessPoolExecutor

        args = [(spec.to_json(), g, ks, policy.value, engine) for g in todo]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # results consumed in submission order so the checkpoint frontier
            # stays contiguous
            for guess, report in pool.map(_guess_worker, args):
                merged.merge(report)
                if checkpoint_path:
                    _save_checkpoint(checkpoint_path, guess, merged)
    merged.sort_matches()
    return merged


def _save_checkpoint(path: str, guess: int, report: AttackReport) -> None:
    doc = {
        "completed_through": guess,
        "candidates_emitted": report.candidates_emitted,
        "leaves_pruned": report.leaves_pruned,
        "max_depth": report.max_depth,
        "peak_live_candidates": report.peak_live_candidates,
        "matches": [
            {
                "r1": m.state.r1,
                "r2": m.state.r2,
                "r3": m.state.r3,
                "rounds": m.rounds_consumed,
            }
            for m in report.matches
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def _load_checkpoint(path: str, merged: AttackReport) -> tuple[int | None, AttackReport]:
    import os

    if not os.path.exists(path):
        return None, merged
    with open(path) as fh:
        doc = json.load(fh)
    merged.candidates_emitted = doc["candidates_emitted"]
    merged.leaves_pruned = doc["leaves_pruned"]
    merged.max_depth = doc["max_depth"]
    merged.peak_live_candidates = doc["peak_live_candidates"]
    merged.matches = [
        CompleteStateCandidate(
            CipherState(m["r1"], m["r2"], m["r3"]), m["rounds"]
        )
        for m in doc["matches"]
    ]
    return doc["completed_through"], merged
