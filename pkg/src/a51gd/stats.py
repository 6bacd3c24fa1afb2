"""Brute-force oracle on down-scaled ciphers plus the statistics harness:
per-round candidate growth, expected rounds to completion, and random-descent
estimation of the complete-candidate count.
"""

from __future__ import annotations

import csv
import io
import json
import math
import random
import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Sequence

from .attack import (
    BranchPolicy,
    StateCandidate,
    _run_enumeration,
    advance_round,
    is_stopped,
    phase1_round0,
)
from .cipher import A51, CipherSpec, CipherState, majority, parity, register_period

BRUTE_FORCE_SPACE_LIMIT = 1 << 26


# --- mini-cipher preset ----------------------------------------------------


@lru_cache(maxsize=None)
def maximal_length_taps(length: int) -> tuple[int, ...]:
    """First tap set (by size, then lexicographic) whose regularly clocked
    register has the full period 2^length - 1, verified by direct cycle
    enumeration."""
    full = (1 << length) - 1
    for size in (2, 4):
        for taps in combinations(range(length), size):
            if register_period(length, taps, 1) == full:
                return taps
    raise ValueError(f"no maximal-length tap set of size 2 or 4 for length {length}")


@lru_cache(maxsize=None)
def mini_spec() -> CipherSpec:
    """Down-scaled cipher with the same structure, small enough for
    exhaustive oracle comparison: lengths 7/9/10, clocking bits 3/4/4."""
    lengths = (7, 9, 10)
    return CipherSpec(
        lengths=lengths,
        taps=tuple(maximal_length_taps(n) for n in lengths),
        clock_bits=(3, 4, 4),
    )


# --- brute-force oracle ----------------------------------------------------


def brute_force_matches(
    spec: CipherSpec,
    ks: Sequence[int],
    r1_fixed: int | None = None,
    engine: str = "auto",
) -> set[CipherState]:
    """Every concrete state whose output prefix equals ks exactly.

    Independent of the determination search: a plain scan of the whole state
    space (with register 1 optionally pinned), generating output bits with
    early exit at the first mismatch.
    """
    L1, L2, L3 = spec.lengths
    space = (1 << L2) * (1 << L3)
    if r1_fixed is None:
        space *= 1 << L1
    if space > BRUTE_FORCE_SPACE_LIMIT:
        raise ValueError("state space too large for brute force")
    ks = list(ks)
    if engine != "python":
        from . import kernel

        if kernel.available():
            triples = kernel.brute_force_scan(spec, ks, r1_fixed)
            return {CipherState(r1, r2, r3) for r1, r2, r3 in triples}
        if engine == "compiled":
            raise RuntimeError("compiled engine unavailable")
    return _brute_force_py(spec, ks, r1_fixed)


def _brute_force_py(spec, ks, r1_fixed):
    L1, L2, L3 = spec.lengths
    T1, T2, T3 = spec.tap_masks
    CB1, CB2, CB3 = spec.clock_bits
    m1, m2, m3 = spec.masks
    n = len(ks)
    r1_values = range(1 << L1) if r1_fixed is None else (r1_fixed,)
    found = set()
    for r1_0 in r1_values:
        for r2_0 in range(1 << L2):
            for r3_0 in range(1 << L3):
                r1, r2, r3 = r1_0, r2_0, r3_0
                out = ((r1 >> (L1 - 1)) ^ (r2 >> (L2 - 1)) ^ (r3 >> (L3 - 1))) & 1
                if out != ks[0]:
                    continue
                i = 1
                while i < n:
                    c1 = (r1 >> CB1) & 1
                    c2 = (r2 >> CB2) & 1
                    c3 = (r3 >> CB3) & 1
                    maj = majority(c1, c2, c3)
                    if c1 == maj:
                        r1 = ((r1 << 1) | parity(r1 & T1)) & m1
                    if c2 == maj:
                        r2 = ((r2 << 1) | parity(r2 & T2)) & m2
                    if c3 == maj:
                        r3 = ((r3 << 1) | parity(r3 & T3)) & m3
                    out = ((r1 >> (L1 - 1)) ^ (r2 >> (L2 - 1)) ^ (r3 >> (L3 - 1))) & 1
                    if out != ks[i]:
                        break
                    i += 1
                else:
                    found.add(CipherState(r1_0, r2_0, r3_0))
    return found


# --- per-round growth ------------------------------------------------------


@dataclass(frozen=True)
class RoundStats:
    round: int
    total: int
    complete: int

    @property
    def ratio(self) -> float:
        return self.complete / self.total if self.total else 0.0


@dataclass
class GrowthStats:
    """Per-round candidate totals under the streaming counting convention:
    total after round n = candidates still live after round n plus all
    completes materialized so far; complete after round n is cumulative."""

    rows: list[RoundStats] = field(default_factory=list)

    def row(self, n: int) -> RoundStats:
        return self.rows[n - 1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["round", "total", "complete", "ratio"])
        for r in self.rows:
            writer.writerow([r.round, r.total, r.complete, f"{r.ratio:.6f}"])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            [
                {"round": r.round, "total": r.total, "complete": r.complete, "ratio": r.ratio}
                for r in self.rows
            ]
        )


def growth_counts(
    spec: CipherSpec,
    r1_guess: int,
    ks: Sequence[int],
    max_round: int,
    policy: BranchPolicy = BranchPolicy.LAZY,
    engine: str = "auto",
) -> GrowthStats:
    """Per-round totals/completes of the determination tree, truncated below
    round `max_round`."""
    if max_round + 1 > len(ks):
        raise ValueError("max_round + 1 exceeds keystream length")
    if engine != "python":
        from . import kernel

        if kernel.available():
            raw = kernel.run_attack(
                spec, r1_guess, ks, policy, max_round=max_round, do_post=False
            )
            created = raw["created"]
            leaves = raw["leaves"]
            completes = raw["completes"]
        elif engine == "compiled":
            raise RuntimeError("compiled engine unavailable")
        else:
            engine = "python"
    if engine == "python":
        counters: dict = {}
        _run_enumeration(
            spec,
            r1_guess,
            ks,
            policy,
            sink=lambda comp: None,
            max_round=max_round,
            counters=counters,
        )
        created = counters["created"]
        leaves = counters["leaves"]
        completes = counters["completes"]
    rows = []
    complete_cum = 0
    for n in range(1, max_round + 1):
        complete_cum += int(completes[n])
        live = int(created[n]) - int(leaves[n])
        rows.append(RoundStats(round=n, total=live + complete_cum, complete=complete_cum))
    return GrowthStats(rows=rows)


# --- expected rounds to completion -----------------------------------------


@dataclass(frozen=True)
class RoundExpectationModel:
    """Clocking-event mix behind the expected-rounds figure: with probability
    1/2 registers 2 and 3 clock together; otherwise register 1 clocks with
    exactly one of them (1/4 each).  The clock-cycle requirements are the
    per-register determination thresholds."""

    p_both: Fraction = Fraction(1, 2)
    p_with_r2: Fraction = Fraction(1, 4)
    p_with_r3: Fraction = Fraction(1, 4)
    clocks_both: int = 10
    clocks_with_r2: int = 10
    clocks_with_r3: int = 11


def expected_rounds_formula(model: RoundExpectationModel | None = None) -> Fraction:
    """Exact expectation of the rounds needed before both counters reach
    their thresholds; 31/2 for the default model."""
    m = model or RoundExpectationModel()
    total_p = m.p_both + m.p_with_r2 + m.p_with_r3
    if total_p != 1:
        raise ValueError("event probabilities must sum to 1")
    numerator = m.clocks_both * m.p_both + 2 * (
        m.clocks_with_r2 * m.p_with_r2 + m.clocks_with_r3 * m.p_with_r3
    )
    return Fraction(numerator, total_p)


@dataclass(frozen=True)
class RoundsExperiment:
    mean: float
    stddev: float
    minimum: int

    def to_json(self) -> str:
        return json.dumps(
            {"mean": self.mean, "stddev": self.stddev, "min": self.minimum}
        )


def rounds_experiment(
    trials: int, seed: int, spec: CipherSpec = A51
) -> RoundsExperiment:
    """Clock random full states under normal encryption and count the rounds
    until register 2 has clocked >= D2 times and register 3 >= D3 times."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    from .attack import stop_thresholds

    d2, d3 = stop_thresholds(spec)
    L1, L2, L3 = spec.lengths
    T1, T2, T3 = spec.tap_masks
    CB1, CB2, CB3 = spec.clock_bits
    m1, m2, m3 = spec.masks
    rng = random.Random(seed)
    counts = []
    for _ in range(trials):
        r1 = rng.getrandbits(L1)
        r2 = rng.getrandbits(L2)
        r3 = rng.getrandbits(L3)
        t2 = t3 = rounds = 0
        while t2 < d2 or t3 < d3:
            c1 = (r1 >> CB1) & 1
            c2 = (r2 >> CB2) & 1
            c3 = (r3 >> CB3) & 1
            maj = majority(c1, c2, c3)
            if c1 == maj:
                r1 = ((r1 << 1) | parity(r1 & T1)) & m1
            if c2 == maj:
                r2 = ((r2 << 1) | parity(r2 & T2)) & m2
                t2 += 1
            if c3 == maj:
                r3 = ((r3 << 1) | parity(r3 & T3)) & m3
                t3 += 1
            rounds += 1
        counts.append(rounds)
    mean = statistics.fmean(counts)
    stddev = statistics.stdev(counts) if trials > 1 else 0.0
    return RoundsExperiment(mean=mean, stddev=stddev, minimum=min(counts))


# --- random-descent size estimation ----------------------------------------


@dataclass(frozen=True)
class EstimateResult:
    """Unbiased estimate of the number of complete candidates for one guess:
    mean over probes of the product of branching factors along a uniformly
    random root-to-leaf path (times the materialization expansion)."""

    estimate: float
    stderr: float
    probes: int

    def to_json(self) -> str:
        return json.dumps(
            {"estimate": self.estimate, "stderr": self.stderr, "probes": self.probes}
        )


def estimate_complete_count(
    spec: CipherSpec,
    r1_guess: int,
    ks: Sequence[int],
    probes: int,
    seed: int,
    policy: BranchPolicy = BranchPolicy.LAZY,
) -> EstimateResult:
    if probes < 1:
        raise ValueError("probes must be >= 1")
    rng = random.Random(seed)
    ks = list(ks)
    samples = []
    for _ in range(probes):
        root = StateCandidate.fresh(spec, r1_guess)
        children = phase1_round0(root, ks[0])
        value = float(len(children))
        while children:
            cand = rng.choice(children)
            if is_stopped(cand):
                u = cand.pr2.unassigned_mask().bit_count() + cand.pr3.unassigned_mask().bit_count()
                value *= 1 << u
                break
            if cand.round + 1 >= len(ks):
                value = 0.0
                break
            children = advance_round(cand, ks, policy)
            value *= len(children)
        else:
            value = 0.0
        samples.append(value)
    mean = statistics.fmean(samples)
    if probes > 1:
        stderr = statistics.stdev(samples) / math.sqrt(probes)
    else:
        stderr = 0.0
    return EstimateResult(estimate=mean, stderr=stderr, probes=probes)
