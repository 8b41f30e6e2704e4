"""Acceptance gate: one test per criterion, at the stated scale and tolerance.

Each test prints its own pass/fail line (run with -s or check the captured
output) and asserts both the criterion outcome and its runtime budget.
"""

from relim import verify


def report(result, budget_seconds):
    status = "PASS" if result.passed else "FAIL"
    print(
        f"criterion {result.number} ({result.name}): {status} "
        f"[{result.seconds:.1f}s / budget {budget_seconds}s] {result.details}"
    )
    assert result.passed, result.details
    assert result.seconds < budget_seconds, (
        f"criterion {result.number} exceeded its {budget_seconds}s budget "
        f"({result.seconds:.1f}s)"
    )


def test_criterion_1_re_oracle_equivalence():
    # Corpus at |alphabet| <= 5 with the named problems; exact set-level equality.
    report(verify.criterion_1_re_oracle(), budget_seconds=60)


def test_criterion_2_transform_reproduction():
    # Every window parameter tuple at 4 <= delta <= 6: isomorphism, the four
    # edge configurations, and the eight right-closed source sets. Exact.
    report(verify.criterion_2_transform_reproduction(), budget_seconds=30)


def test_criterion_3_speedup_mechanization():
    # 4 <= delta <= 5, full window: coverage holds; deleting any non-redundant
    # target line fails with a witness.
    report(verify.criterion_3_speedup(), budget_seconds=600)


def test_criterion_4_zero_round_verdicts():
    # delta <= 8, a >= 1, x <= delta-1: unsolvable with witnesses M/A/P;
    # single-label control solvable. Exact.
    report(verify.criterion_4_zero_round(), budget_seconds=60)


def test_criterion_5_failure_bound():
    # 2 <= delta <= 64: exactly (1/(3*delta))^2 and >= 1/delta^8, in exact
    # rational arithmetic.
    report(verify.criterion_5_failure_bound(), budget_seconds=60)


def test_criterion_6_executable_transforms():
    # 100 seeded trees at delta=4, n <= 300: one-round reduction for
    # k in {0,1,2} and every a; color-based rewrite valid with no A A edge;
    # weakening valid for every parameter-monotone pair.
    report(verify.criterion_6_transforms(), budget_seconds=300)


def test_criterion_7_sequence_certificates():
    # delta=2^20 chain: t=5, all checks, final problem not zero-round
    # solvable; delta=5 chain verified per transition by the full pipeline.
    report(verify.criterion_7_sequence(), budget_seconds=60)


def test_criterion_8_determinism():
    # Three repeats and parallel execution, byte-identical canonical output.
    report(verify.criterion_8_determinism(), budget_seconds=120)
