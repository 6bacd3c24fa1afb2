"""Compiled depth-first search for the state-recovery attack.

Same semantics as the object-level engine in `attack`, restated over packed
integer masks so numba can JIT it.  Branching is re-entrant: whenever a
constraint needs a branch on an original bit, two siblings are pushed at the
same round and reprocessed from the top; all per-round bookkeeping happens
only when a candidate is actually clocked into the next round, so the counts
agree with the object engine.

Falls back gracefully when numba is unavailable: `available()` returns False
and callers use the pure-Python engine.
"""

from __future__ import annotations

import numpy as np

from .cipher import CipherSpec, CipherState
from .partial import feedback_vectors

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


_STACK_CAP = 1 << 14
_HARD_LIMIT = 64

# result-vector slots
_R_MATCHES = 0
_R_EMITTED = 1
_R_PRUNED = 2
_R_PEAK = 3
_R_DEPTH = 4
_R_VIOLATIONS = 5
_R_ERROR = 6

_ERR_STACK = 1
_ERR_MATCH_CAP = 2
_ERR_MATERIALIZE = 3
_ERR_DEPTH = 4


def available() -> bool:
    return _HAVE_NUMBA


@njit(cache=True)
def _parity(x):
    x ^= x >> 32
    x ^= x >> 16
    x ^= x >> 8
    x ^= x >> 4
    x ^= x >> 2
    x ^= x >> 1
    return x & 1


@njit(cache=True)
def _popcount(x):
    n = 0
    while x:
        x &= x - 1
        n += 1
    return n


@njit(cache=True)
def _match_len(r1, r2, r3, L1, L2, L3, T1, T2, T3, CB1, CB2, CB3, ks, limit):
    """Leading bits of the candidate's output prefix that match ks.

    Bit 0 is the XOR of the current MSBs; later bits come from stepping.
    """
    m1 = (1 << L1) - 1
    m2 = (1 << L2) - 1
    m3 = (1 << L3) - 1
    out = ((r1 >> (L1 - 1)) ^ (r2 >> (L2 - 1)) ^ (r3 >> (L3 - 1))) & 1
    if out != ks[0]:
        return 0
    i = 1
    while i < limit:
        c1 = (r1 >> CB1) & 1
        c2 = (r2 >> CB2) & 1
        c3 = (r3 >> CB3) & 1
        maj = (c1 & c2) | (c1 & c3) | (c2 & c3)
        if c1 == maj:
            r1 = ((r1 << 1) | _parity(r1 & T1)) & m1
        if c2 == maj:
            r2 = ((r2 << 1) | _parity(r2 & T2)) & m2
        if c3 == maj:
            r3 = ((r3 << 1) | _parity(r3 & T3)) & m3
        out = ((r1 >> (L1 - 1)) ^ (r2 >> (L2 - 1)) ^ (r3 >> (L3 - 1))) & 1
        if out != ks[i]:
            return i
        i += 1
    return limit


@njit(cache=True)
def _run_dfs(
    L1,
    L2,
    L3,
    T1,
    T2,
    T3,
    CB1,
    CB2,
    CB3,
    fv2,
    fv3,
    d2,
    d3,
    r1_guess,
    ks,
    eager_bit,  # -1 for the lazy policy
    max_round,
    do_post,
    check_prefix,
    matches,
    created,
    leaves,
    completes,
    res,
):
    mask1 = (1 << L1) - 1
    mask2 = (1 << L2) - 1
    mask3 = (1 << L3) - 1
    ks_len = len(ks)
    stack = np.empty((_STACK_CAP, 8), np.int64)
    # fields: r1, a2, v2, t2, a3, v3, t3, round
    stack[0, 0] = r1_guess
    for j in range(1, 8):
        stack[0, j] = 0
    sp = 1
    created[0] += 1
    while sp > 0:
        if sp > res[_R_PEAK]:
            res[_R_PEAK] = sp
        sp -= 1
        r1 = stack[sp, 0]
        a2 = stack[sp, 1]
        v2 = stack[sp, 2]
        t2 = stack[sp, 3]
        a3 = stack[sp, 4]
        v3 = stack[sp, 5]
        t3 = stack[sp, 6]
        rnd = stack[sp, 7]
        if rnd > res[_R_DEPTH]:
            res[_R_DEPTH] = rnd
        if t2 >= d2 and t3 >= d3:
            # stopped: materialize every fill of the unassigned original bits
            leaves[rnd] += 1
            u2 = ~a2 & mask2
            u3 = ~a3 & mask3
            if _popcount(u2) + _popcount(u3) > 20:
                res[_R_ERROR] = _ERR_MATERIALIZE
                return
            limit = 64 if do_post else rnd + 1
            if limit > ks_len:
                limit = ks_len
            s2 = u2
            while True:
                s3 = u3
                while True:
                    r2o = v2 | s2
                    r3o = v3 | s3
                    completes[rnd] += 1
                    res[_R_EMITTED] += 1
                    if do_post or check_prefix:
                        ml = _match_len(
                            r1_guess, r2o, r3o,
                            L1, L2, L3, T1, T2, T3, CB1, CB2, CB3,
                            ks, limit,
                        )
                        if check_prefix and ml < rnd + 1:
                            res[_R_VIOLATIONS] += 1
                        if do_post and ml >= 64:
                            if res[_R_MATCHES] >= matches.shape[0]:
                                res[_R_ERROR] = _ERR_MATCH_CAP
                                return
                            matches[res[_R_MATCHES], 0] = r2o
                            matches[res[_R_MATCHES], 1] = r3o
                            matches[res[_R_MATCHES], 2] = rnd
                            res[_R_MATCHES] += 1
                    if s3 == 0:
                        break
                    s3 = (s3 - 1) & u3
                if s2 == 0:
                    break
                s2 = (s2 - 1) & u2
            continue
        if rnd >= max_round:
            continue
        if rnd + 1 >= ks_len:
            res[_R_PRUNED] += 1
            continue
        if sp + 2 > _STACK_CAP:
            res[_R_ERROR] = _ERR_STACK
            return
        # output equation on the current MSBs (a no-op re-check for rounds
        # the previous lookahead already constrained)
        const = (r1 >> (L1 - 1)) & 1
        a = L2 - 1 - t2
        vec2 = (1 << a) if a >= 0 else fv2[-a]
        a = L3 - 1 - t3
        vec3 = (1 << a) if a >= 0 else fv3[-a]
        um2 = vec2 & ~a2 & mask2
        um3 = vec3 & ~a3 & mask3
        const ^= _parity(vec2 & v2) ^ _parity(vec3 & v3)
        n_unknown = _popcount(um2) + _popcount(um3)
        if n_unknown == 0:
            if const != ks[rnd]:
                continue
        elif n_unknown == 1:
            v = ks[rnd] ^ const
            if um2:
                a2 |= um2
                if v:
                    v2 |= um2
            else:
                a3 |= um3
                if v:
                    v3 |= um3
        else:
            bm = um2 & -um2 if um2 else um3 & -um3
            in2 = um2 != 0
            for v in range(2):
                stack[sp, 0] = r1
                stack[sp, 1] = a2 | bm if in2 else a2
                stack[sp, 2] = v2 | bm if (in2 and v) else v2
                stack[sp, 3] = t2
                stack[sp, 4] = a3 if in2 else a3 | bm
                stack[sp, 5] = v3 | bm if (not in2 and v) else v3
                stack[sp, 6] = t3
                stack[sp, 7] = rnd
                sp += 1
            continue
        # resolve clocking bit of register 2
        a = CB2 - t2
        vec = (1 << a) if a >= 0 else fv2[-a]
        um = vec & ~a2 & mask2
        if um:
            bm = um & -um
            for v in range(2):
                stack[sp, 0] = r1
                stack[sp, 1] = a2 | bm
                stack[sp, 2] = v2 | bm if v else v2
                stack[sp, 3] = t2
                stack[sp, 4] = a3
                stack[sp, 5] = v3
                stack[sp, 6] = t3
                stack[sp, 7] = rnd
                sp += 1
            continue
        cb2 = _parity(vec & v2)
        # resolve clocking bit of register 3
        a = CB3 - t3
        vec = (1 << a) if a >= 0 else fv3[-a]
        um = vec & ~a3 & mask3
        if um:
            bm = um & -um
            for v in range(2):
                stack[sp, 0] = r1
                stack[sp, 1] = a2
                stack[sp, 2] = v2
                stack[sp, 3] = t2
                stack[sp, 4] = a3 | bm
                stack[sp, 5] = v3 | bm if v else v3
                stack[sp, 6] = t3
                stack[sp, 7] = rnd
                sp += 1
            continue
        cb3 = _parity(vec & v3)
        cb1 = (r1 >> CB1) & 1
        maj = (cb1 & cb2) | (cb1 & cb3) | (cb2 & cb3)
        k1 = cb1 == maj
        k2 = cb2 == maj
        k3 = cb3 == maj
        # eager policy: branch the inner register-3 tap in the first round
        if eager_bit >= 0 and rnd == 0:
            bm = 1 << eager_bit
            if not a3 & bm:
                for v in range(2):
                    stack[sp, 0] = r1
                    stack[sp, 1] = a2
                    stack[sp, 2] = v2
                    stack[sp, 3] = t2
                    stack[sp, 4] = a3 | bm
                    stack[sp, 5] = v3 | bm if v else v3
                    stack[sp, 6] = t3
                    stack[sp, 7] = rnd
                    sp += 1
                continue
        # lookahead: post-clock MSB parity must equal ks[rnd + 1]
        const = (r1 >> (L1 - 2 if k1 else L1 - 1)) & 1
        a = (L2 - 2 if k2 else L2 - 1) - t2
        vec2 = (1 << a) if a >= 0 else fv2[-a]
        a = (L3 - 2 if k3 else L3 - 1) - t3
        vec3 = (1 << a) if a >= 0 else fv3[-a]
        um2 = vec2 & ~a2 & mask2
        um3 = vec3 & ~a3 & mask3
        const ^= _parity(vec2 & v2) ^ _parity(vec3 & v3)
        n_unknown = _popcount(um2) + _popcount(um3)
        if n_unknown == 0:
            if const != ks[rnd + 1]:
                continue
        elif n_unknown == 1:
            v = ks[rnd + 1] ^ const
            if um2:
                a2 |= um2
                if v:
                    v2 |= um2
            else:
                a3 |= um3
                if v:
                    v3 |= um3
        else:
            bm = um2 & -um2 if um2 else um3 & -um3
            in2 = um2 != 0
            for v in range(2):
                stack[sp, 0] = r1
                stack[sp, 1] = a2 | bm if in2 else a2
                stack[sp, 2] = v2 | bm if (in2 and v) else v2
                stack[sp, 3] = t2
                stack[sp, 4] = a3 if in2 else a3 | bm
                stack[sp, 5] = v3 | bm if (not in2 and v) else v3
                stack[sp, 6] = t3
                stack[sp, 7] = rnd
                sp += 1
            continue
        # all consulted bits concrete: clock
        if k1:
            r1 = ((r1 << 1) | _parity(r1 & T1)) & mask1
        if k2:
            t2 += 1
        if k3:
            t3 += 1
        rnd += 1
        if rnd > _HARD_LIMIT:
            res[_R_ERROR] = _ERR_DEPTH
            return
        created[rnd] += 1
        stack[sp, 0] = r1
        stack[sp, 1] = a2
        stack[sp, 2] = v2
        stack[sp, 3] = t2
        stack[sp, 4] = a3
        stack[sp, 5] = v3
        stack[sp, 6] = t3
        stack[sp, 7] = rnd
        sp += 1


def run_attack(
    spec: CipherSpec,
    r1_guess: int,
    ks,
    policy,
    max_round: int | None = None,
    do_post: bool = True,
    check_prefix: bool = False,
    match_capacity: int = 1 << 16,
) -> dict:
    """Run the compiled DFS; returns raw counters and match rows."""
    if not _HAVE_NUMBA:
        raise RuntimeError("numba unavailable")
    from .attack import BranchPolicy

    L1, L2, L3 = spec.lengths
    T1, T2, T3 = spec.tap_masks
    CB1, CB2, CB3 = spec.clock_bits
    fv2 = np.array(feedback_vectors(L2, spec.taps[1]), dtype=np.int64)
    fv3 = np.array(feedback_vectors(L3, spec.taps[2]), dtype=np.int64)
    from .attack import stop_thresholds

    d2, d3 = stop_thresholds(spec)
    eager_bit = min(spec.taps[2]) if policy is BranchPolicy.PAPER_EAGER_R37 else -1
    ks_arr = np.array(list(ks), dtype=np.int64)
    matches = np.zeros((match_capacity, 3), dtype=np.int64)
    created = np.zeros(_HARD_LIMIT + 1, dtype=np.int64)
    leaves = np.zeros(_HARD_LIMIT + 1, dtype=np.int64)
    completes = np.zeros(_HARD_LIMIT + 1, dtype=np.int64)
    res = np.zeros(8, dtype=np.int64)
    _run_dfs(
        L1, L2, L3, T1, T2, T3, CB1, CB2, CB3,
        fv2, fv3, d2, d3, r1_guess, ks_arr,
        eager_bit,
        max_round if max_round is not None else _HARD_LIMIT + 1,
        do_post, check_prefix,
        matches, created, leaves, completes, res,
    )
    err = int(res[_R_ERROR])
    if err == _ERR_STACK:
        raise RuntimeError("DFS stack overflow")
    if err == _ERR_MATCH_CAP:
        raise RuntimeError("match buffer overflow")
    if err == _ERR_MATERIALIZE:
        raise RuntimeError("too many unassigned bits at materialization")
    if err == _ERR_DEPTH:
        raise AssertionError("determination tree exceeded the hard depth limit")
    n = int(res[_R_MATCHES])
    return {
        "matches": [(int(matches[i, 0]), int(matches[i, 1]), int(matches[i, 2])) for i in range(n)],
        "emitted": int(res[_R_EMITTED]),
        "pruned": int(res[_R_PRUNED]),
        "peak": int(res[_R_PEAK]),
        "max_depth": int(res[_R_DEPTH]),
        "violations": int(res[_R_VIOLATIONS]),
        "created": created,
        "leaves": leaves,
        "completes": completes,
    }


def kernel_attack_single_guess(spec, r1_guess, ks, policy, check_prefix=False):
    from .attack import AttackReport, CompleteStateCandidate, SoundnessError

    raw = run_attack(spec, r1_guess, ks, policy, check_prefix=check_prefix)
    if raw["violations"]:
        raise SoundnessError("complete candidate does not reproduce its prefix")
    report = AttackReport(
        matches=[
            CompleteStateCandidate(CipherState(r1_guess, r2, r3), rounds)
            for r2, r3, rounds in raw["matches"]
        ],
        candidates_emitted=raw["emitted"],
        leaves_pruned=raw["pruned"],
        max_depth=raw["max_depth"],
        peak_live_candidates=raw["peak"],
    )
    report.sort_matches()
    return report


@njit(cache=True)
def _brute_force(L1, L2, L3, T1, T2, T3, CB1, CB2, CB3, ks, r1_lo, r1_hi, out, cap):
    """Exhaustive scan: every state whose output prefix equals ks exactly."""
    n = 0
    for r1 in range(r1_lo, r1_hi):
        for r2 in range(1 << L2):
            for r3 in range(1 << L3):
                ml = _match_len(
                    r1, r2, r3, L1, L2, L3, T1, T2, T3, CB1, CB2, CB3, ks, len(ks)
                )
                if ml >= len(ks):
                    if n >= cap:
                        return -1
                    out[n, 0] = r1
                    out[n, 1] = r2
                    out[n, 2] = r3
                    n += 1
    return n


def brute_force_scan(spec: CipherSpec, ks, r1_fixed: int | None, capacity: int = 1 << 20):
    if not _HAVE_NUMBA:
        raise RuntimeError("numba unavailable")
    L1, L2, L3 = spec.lengths
    T1, T2, T3 = spec.tap_masks
    CB1, CB2, CB3 = spec.clock_bits
    ks_arr = np.array(list(ks), dtype=np.int64)
    out = np.zeros((capacity, 3), dtype=np.int64)
    if r1_fixed is None:
        lo, hi = 0, 1 << L1
    else:
        lo, hi = r1_fixed, r1_fixed + 1
    n = _brute_force(L1, L2, L3, T1, T2, T3, CB1, CB2, CB3, ks_arr, lo, hi, out, capacity)
    if n < 0:
        raise RuntimeError("brute-force result buffer overflow")
    return {(int(out[i, 0]), int(out[i, 1]), int(out[i, 2])) for i in range(n)}
