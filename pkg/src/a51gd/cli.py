"""Command-line entry points.

Exit codes: 0 = success (for `attack`: at least one match), 1 = completed
with no match, 2 = usage or input error.
"""

from __future__ import annotations

import argparse
import sys

from . import stats
from .attack import (
    BranchPolicy,
    attack_full,
    attack_single_guess,
    match_to_json,
    report_summary_json,
)
from .cipher import (
    A51,
    CipherSpec,
    bits_from_hex,
    bits_from_string,
    bits_to_hex,
    bits_to_string,
    frame_bits_from_int,
    generate_keystream,
    initialize,
    key_bits_from_bytes,
)


class UsageError(Exception):
    pass


def _load_spec(args) -> CipherSpec:
    if getattr(args, "spec", None):
        try:
            with open(args.spec) as fh:
                return CipherSpec.from_json(fh.read())
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot load cipher spec: {exc}")
    return A51


def _load_keystream(args) -> list[int]:
    if args.ks is not None and args.ks_file is not None:
        raise UsageError("use either --ks or --ks-file, not both")
    if args.ks is not None:
        text = args.ks
    elif args.ks_file is not None:
        try:
            with open(args.ks_file) as fh:
                text = fh.read().strip()
        except OSError as exc:
            raise UsageError(str(exc))
    else:
        raise UsageError("a keystream is required (--ks or --ks-file)")
    try:
        if args.format == "hex":
            return bits_from_hex(text)
        return bits_from_string(text)
    except ValueError as exc:
        raise UsageError(f"malformed keystream: {exc}")


def _parse_int(text: str, what: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise UsageError(f"malformed {what}: {text!r}")


def _out_stream(args):
    if args.out:
        return open(args.out, "w")
    return sys.stdout


def _emit(args, text: str) -> None:
    stream = _out_stream(args)
    try:
        stream.write(text)
        if not text.endswith("\n"):
            stream.write("\n")
    finally:
        if stream is not sys.stdout:
            stream.close()


def _cmd_keystream(args) -> int:
    key = _parse_int(args.key, "key")
    if not 0 <= key < (1 << 64):
        raise UsageError("key must fit in 64 bits")
    frame = _parse_int(args.frame, "frame")
    if not 0 <= frame < (1 << 22):
        raise UsageError("frame must fit in 22 bits")
    if args.n < 0:
        raise UsageError("--n must be >= 0")
    key_bits = key_bits_from_bytes(key.to_bytes(8, "big"))
    state = initialize(A51, key_bits, frame_bits_from_int(frame))
    bits = generate_keystream(A51, state, args.n)
    if args.format == "hex":
        if args.n % 8:
            raise UsageError("hex output requires --n to be a multiple of 8")
        _emit(args, bits_to_hex(bits))
    else:
        _emit(args, bits_to_string(bits))
    return 0


def _parse_range(text: str, limit: int) -> range:
    if ".." not in text:
        raise UsageError("range must have the form A..B")
    lo_text, hi_text = text.split("..", 1)
    lo = _parse_int(lo_text, "range start")
    hi = _parse_int(hi_text, "range end")
    if not (0 <= lo <= hi < limit):
        raise UsageError("guess range out of bounds")
    return range(lo, hi + 1)


def _cmd_attack(args) -> int:
    spec = _load_spec(args)
    ks = _load_keystream(args)
    if len(ks) < 64:
        raise UsageError("attack requires at least 64 keystream bits")
    policy = BranchPolicy(args.policy)
    guess_limit = 1 << spec.lengths[0]
    if args.r1 is not None:
        guess = _parse_int(args.r1, "register-1 guess")
        if not 0 <= guess < guess_limit:
            raise UsageError("register-1 guess out of range")
        report = attack_single_guess(spec, guess, ks, policy)
    else:
        if args.r1_range is not None:
            guesses = _parse_range(args.r1_range, guess_limit)
        else:
            guesses = range(guess_limit)
        report = attack_full(
            spec,
            ks,
            guesses,
            policy,
            workers=args.workers,
            checkpoint_path=args.resume,
        )
    lines = [match_to_json(m) for m in report.matches]
    lines.append(report_summary_json(report))
    _emit(args, "\n".join(lines))
    return 0 if report.matches else 1


def _cmd_stats_growth(args) -> int:
    spec = _load_spec(args)
    ks = _load_keystream(args)
    guess = _parse_int(args.r1, "register-1 guess")
    if not 0 <= guess < (1 << spec.lengths[0]):
        raise UsageError("register-1 guess out of range")
    if args.max_round + 1 > len(ks):
        raise UsageError("--max-round + 1 exceeds keystream length")
    growth = stats.growth_counts(
        spec, guess, ks, args.max_round, BranchPolicy(args.policy)
    )
    _emit(args, growth.to_csv())
    return 0


def _cmd_stats_rounds(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    result = stats.rounds_experiment(args.trials, args.seed)
    _emit(args, result.to_json())
    return 0


def _cmd_oracle_verify(args) -> int:
    spec = _load_spec(args) if args.spec else stats.mini_spec()
    import random

    from .cipher import CipherState, state_output_bits

    rng = random.Random(args.seed)
    failures = 0
    for i in range(args.instances):
        truth = CipherState(
            rng.getrandbits(spec.lengths[0]),
            rng.getrandbits(spec.lengths[1]),
            rng.getrandbits(spec.lengths[2]),
        )
        ks = state_output_bits(spec, truth, 64)
        oracle = {
            (s.r1, s.r2, s.r3)
            for s in stats.brute_force_matches(spec, ks, r1_fixed=truth.r1)
        }
        report = attack_single_guess(spec, truth.r1, ks)
        attacked = {
            (m.state.r1, m.state.r2, m.state.r3) for m in report.matches
        }
        ok = oracle == attacked and (truth.r1, truth.r2, truth.r3) in attacked
        if args.full_range:
            oracle_all = {
                (s.r1, s.r2, s.r3) for s in stats.brute_force_matches(spec, ks)
            }
            full = attack_full(spec, ks, range(1 << spec.lengths[0]))
            attacked_all = {
                (m.state.r1, m.state.r2, m.state.r3) for m in full.matches
            }
            ok = ok and oracle_all == attacked_all
        print(f"instance {i}: {'ok' if ok else 'MISMATCH'}")
        if not ok:
            failures += 1
    return 0 if failures == 0 else 1


def _cmd_estimate(args) -> int:
    spec = _load_spec(args)
    ks = _load_keystream(args)
    guess = _parse_int(args.r1, "register-1 guess")
    result = stats.estimate_complete_count(spec, guess, ks, args.probes, args.seed)
    _emit(args, result.to_json())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="a51gd",
        description="A5/1 keystream generation and internal-state recovery",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_ks_flags(p):
        p.add_argument("--ks", help="keystream as a '0'/'1' string (or hex with --format hex)")
        p.add_argument("--ks-file", help="file containing the keystream")
        p.add_argument("--format", choices=["bits", "hex"], default="bits")

    p = sub.add_parser("keystream", help="generate keystream from key/frame")
    p.add_argument("--key", required=True, help="64-bit key, e.g. 0x1223456789abcdef")
    p.add_argument("--frame", required=True, help="22-bit frame number")
    p.add_argument("--n", type=int, required=True, help="number of output bits")
    p.add_argument("--format", choices=["bits", "hex"], default="bits")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_keystream)

    p = sub.add_parser("attack", help="recover the internal state from a keystream")
    add_ks_flags(p)
    p.add_argument("--r1", help="single register-1 guess (hex or decimal)")
    p.add_argument("--r1-range", help="inclusive guess range A..B")
    p.add_argument("--policy", choices=[b.value for b in BranchPolicy], default="lazy")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--resume", help="checkpoint file for range attacks")
    p.add_argument("--spec", help="JSON cipher parameters (default: A5/1)")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_attack)

    p = sub.add_parser("stats-growth", help="per-round candidate counts (CSV)")
    add_ks_flags(p)
    p.add_argument("--r1", required=True)
    p.add_argument("--max-round", type=int, default=13)
    p.add_argument("--policy", choices=[b.value for b in BranchPolicy], default="lazy")
    p.add_argument("--spec")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_stats_growth)

    p = sub.add_parser("stats-rounds", help="rounds-to-completion experiment (JSON)")
    p.add_argument("--trials", type=int, default=250)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_stats_rounds)

    p = sub.add_parser("oracle-verify", help="attack vs brute-force set equality")
    p.add_argument("--spec", help="JSON cipher parameters (default: built-in mini)")
    p.add_argument("--instances", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--full-range", action="store_true")
    p.set_defaults(func=_cmd_oracle_verify)

    p = sub.add_parser("estimate", help="random-descent complete-count estimate")
    add_ks_flags(p)
    p.add_argument("--r1", required=True)
    p.add_argument("--probes", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--spec")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_estimate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
