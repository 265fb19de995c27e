from __future__ import annotations

from fractions import Fraction as F
from pathlib import Path

import pytest

from dgldpc.codes import LinearCode, hamming74, repetition, single_parity_check
from dgldpc.ensemble import build_ensemble

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

# lines appended by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def code_42() -> LinearCode:
    """(4,2) code with rows 1011, 0111: one weight-2 codeword, from input 11."""
    return LinearCode.from_bitstrings(["1011", "0111"])


def spc32() -> LinearCode:
    return single_parity_check(3)


def ldpc_23():
    return build_ensemble([(single_parity_check(3), F(1))], [(repetition(2), F(1))], name="(2,3) LDPC")


def cycle_code():
    return build_ensemble([(single_parity_check(2), F(1))], [(repetition(2), F(1))], name="cycle code")


def mixed_rep():
    return build_ensemble(
        [(single_parity_check(3), F(1))],
        [(repetition(2), F(1, 2)), (repetition(3), F(1, 2))],
        name="rep-2/rep-3 over SPC-3",
    )


# (ensemble, n) pairs with E <= 8: small enough for the all-permutation average
SMALL_INSTANCES = [
    (cycle_code, 2),
    (cycle_code, 4),
    (ldpc_23, 3),
    (lambda: build_ensemble([(single_parity_check(4), F(1))], [(repetition(2), F(1))]), 4),
    (
        lambda: build_ensemble(
            [(single_parity_check(5), F(1))], [(repetition(2), F(2, 5)), (repetition(3), F(3, 5))]
        ),
        2,
    ),
    (lambda: build_ensemble([(single_parity_check(3), F(1))], [(spc32(), F(1))]), 2),
    (lambda: build_ensemble([(single_parity_check(2), F(1))], [(code_42(), F(1))]), 2),
    (lambda: build_ensemble([(hamming74(), F(1))], [(repetition(2), F(4, 7)), (repetition(3), F(3, 7))]), 3),
    (
        lambda: build_ensemble(
            [(single_parity_check(2), F(1, 2)), (single_parity_check(4), F(1, 2))], [(repetition(2), F(1))]
        ),
        4,
    ),
]


@pytest.fixture
def config_dir() -> Path:
    return CONFIG_DIR


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
