import json
import pathlib
import random

import pytest

from a51gd.cipher import CipherSpec, CipherState

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


def load_vector() -> dict:
    with open(FIXTURES / "a51_vector.json") as fh:
        return json.load(fh)


def random_state(rng: random.Random, spec: CipherSpec) -> CipherState:
    return CipherState(
        rng.getrandbits(spec.lengths[0]),
        rng.getrandbits(spec.lengths[1]),
        rng.getrandbits(spec.lengths[2]),
    )


def match_set(report) -> set[tuple[int, int, int]]:
    return {(m.state.r1, m.state.r2, m.state.r3) for m in report.matches}


def oracle_set(states) -> set[tuple[int, int, int]]:
    return {(s.r1, s.r2, s.r3) for s in states}


@pytest.fixture(scope="session")
def mini():
    from a51gd.stats import mini_spec

    return mini_spec()
