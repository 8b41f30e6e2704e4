"""The parameterized problem family behind the lower-bound chain.

``family(delta, a, x)`` mixes an independent-set-like part with an orientation
part: dominating-set members label edges M (X on up to x set-internal edges),
non-members either point P at a member (O elsewhere) or certify ownership of
``a`` edges with label A (X elsewhere).  The module also builds the extended
six-label variant used after one transformation step, the literal expected
result of transforming the family, the relaxation target that the speedup
check verifies against, parameter stepping, and chain certificates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .analysis import (
    SetProblem,
    Verdict,
    verify_speedup_target,
    zero_round_solvable_symmetric,
)
from .core import Config, Problem, problems_isomorphic, rename_problem
from .errors import PreconditionError, SequenceError
from .roundelim import re as re_transform


@dataclass(frozen=True)
class FamilyParams:
    delta: int
    a: int
    x: int

    def __post_init__(self):
        if self.delta < 2:
            raise PreconditionError(f"delta must be at least 2, got {self.delta}", "delta >= 2")
        if not 0 <= self.a <= self.delta:
            raise PreconditionError(
                f"owned-edge count a={self.a} outside [0, {self.delta}]", "0 <= a <= delta"
            )
        if not 0 <= self.x <= self.delta:
            raise PreconditionError(
                f"outgoing-edge count x={self.x} outside [0, {self.delta}]", "0 <= x <= delta"
            )


def _cfg(*items) -> Config:
    # A string group is one single-character label per character: "AOPX" is [A O P X].
    return Config.of((tuple(group), mult) for group, mult in items)


def make_family_problem(params: FamilyParams) -> Problem:
    d, a, x = params.delta, params.a, params.x
    nodes = [
        _cfg(("M", d - x), ("X", x)),
        _cfg(("A", a), ("X", d - a)),
        _cfg(("P", 1), ("O", d - 1)),
    ]
    edges = [
        _cfg(("M", 1), ("AOPX", 1)),
        _cfg(("O", 1), ("AMOX", 1)),
        _cfg(("P", 1), ("MX", 1)),
        _cfg(("A", 1), ("MOX", 1)),
        _cfg(("X", 1), ("AMOPX", 1)),
    ]
    return Problem.build(d, nodes, edges, note=f"family(delta={d}, a={a}, x={x})")


def make_plus_problem(params: FamilyParams) -> Problem:
    """Extended variant with a sixth label C certifying ownership after a step."""
    d, a, x = params.delta, params.a, params.x
    if x + 1 > d:
        raise PreconditionError(f"x+1 = {x + 1} exceeds delta = {d}", "x+1 <= delta")
    if a - x - 1 < 0:
        raise PreconditionError(f"a-x-1 = {a - x - 1} is negative", "a-x-1 >= 0")
    nodes = [
        _cfg(("M", d - x - 1), ("X", x + 1)),
        _cfg(("P", 1), ("O", d - 1)),
        _cfg(("A", a - x - 1), ("X", d - a + x + 1)),
        _cfg(("C", d - x), ("X", x)),
    ]
    edges = [
        _cfg(("M", 1), ("ACOPX", 1)),
        _cfg(("O", 1), ("ACMOX", 1)),
        _cfg(("P", 1), ("MX", 1)),
        _cfg(("A", 1), ("CMOX", 1)),
        _cfg(("X", 1), ("ACMOPX", 1)),
        _cfg(("C", 1), ("AMOX", 1)),
    ]
    return Problem.build(d, nodes, edges, note=f"family+(delta={d}, a={a}, x={x})")


def make_mis_problem(delta: int) -> Problem:
    if delta < 2:
        raise PreconditionError(f"delta must be at least 2, got {delta}", "delta >= 2")
    nodes = [_cfg(("M", delta)), _cfg(("P", 1), ("O", delta - 1))]
    edges = [_cfg(("M", 1), ("OP", 1)), _cfg(("O", 2))]
    return Problem.build(delta, nodes, edges, note=f"mis(delta={delta})")


# ---------------------------------------------------------------------------
# Expected transformation result and relaxation target

# The family's transformed problem uses eight labels; each stands for a
# right-closed set of the original five, named as follows.
LIFTED_SET_NAMES: dict[frozenset, str] = {
    frozenset("X"): "X",
    frozenset("MX"): "M",
    frozenset("OX"): "O",
    frozenset("MOX"): "U",
    frozenset("AOX"): "A",
    frozenset("MAOX"): "B",
    frozenset("PAOX"): "P",
    frozenset("MPAOX"): "Q",
}

_M4 = frozenset("MUBQ")
_X8 = frozenset("XMOUABPQ")
_P2 = frozenset("PQ")
_O6 = frozenset("OUABPQ")
_A4 = frozenset("ABPQ")
_C4 = frozenset("UBPQ")

# Renaming that carries the relaxation target onto the six-label variant.
REL_SET_NAMES: dict[frozenset, str] = {
    _M4: "M", _X8: "X", _P2: "P", _O6: "O", _A4: "A", _C4: "C",
}


def _require_step_window(params: FamilyParams) -> None:
    if not params.x + 2 <= params.a:
        raise PreconditionError(
            f"x+2 = {params.x + 2} exceeds a = {params.a}", "x+2 <= a"
        )
    if not params.a <= params.delta:
        raise PreconditionError(
            f"a = {params.a} exceeds delta = {params.delta}", "a <= delta"
        )


def expected_re_problem(params: FamilyParams) -> Problem:
    """The eight-label problem the transformation of the family must produce,
    constructed literally for isomorphism comparison against engine output."""
    _require_step_window(params)
    d, a, x = params.delta, params.a, params.x
    nodes = [
        _cfg(("BMQU", d - x), ("ABMOPQUX", x)),
        _cfg(("PQ", 1), ("ABOPQU", d - 1)),
        _cfg(("ABPQ", a), ("ABMOPQUX", d - a)),
    ]
    edges = [
        _cfg(("X", 1), ("Q", 1)),
        _cfg(("O", 1), ("B", 1)),
        _cfg(("A", 1), ("U", 1)),
        _cfg(("P", 1), ("M", 1)),
    ]
    return Problem.build(d, nodes, edges, note=f"expected re of family(delta={d}, a={a}, x={x})")


def rel_coverage_target(params: FamilyParams) -> SetProblem:
    """Relaxation target over the eight transformed labels: the four node lines
    (member / pointer / owner / new-owner) and the edge constraint obtained by
    the existential lift method from the transformed edge constraint."""
    _require_step_window(params)
    d, a, x = params.delta, params.a, params.x
    nodes = [
        (_M4,) * (d - x - 1) + (_X8,) * (x + 1),
        (_P2,) + (_O6,) * (d - 1),
        (_A4,) * (a - x - 1) + (_X8,) * (d - a + x + 1),
        (_C4,) * (d - x) + (_X8,) * x,
    ]
    edges = [
        (((_M4,), 1), ((_P2, _A4, _C4, _O6, _X8), 1)),
        (((_O6,), 1), ((_M4, _A4, _C4, _O6, _X8), 1)),
        (((_P2,), 1), ((_M4, _X8), 1)),
        (((_A4,), 1), ((_M4, _C4, _O6, _X8), 1)),
        (((_X8,), 1), ((_M4, _P2, _A4, _C4, _O6, _X8), 1)),
        (((_C4,), 1), ((_M4, _A4, _O6, _X8), 1)),
    ]
    return SetProblem.build(d, nodes, edges)


def step_params(params: FamilyParams) -> FamilyParams:
    """One chain step: (a, x) -> (floor((a-2x-1)/2), x+1)."""
    if not 2 * params.x + 1 <= params.a:
        raise PreconditionError(
            f"2x+1 = {2 * params.x + 1} exceeds a = {params.a}", "2x+1 <= a"
        )
    _require_step_window(params)
    return FamilyParams(params.delta, (params.a - 2 * params.x - 1) // 2, params.x + 1)


def mechanized_step_check(params: FamilyParams, *, workers: int = 0) -> Verdict:
    """Engine-backed verification of one chain step at desk scale.

    Transforms the family problem, matches it against the expected eight-label
    problem by isomorphism, and runs the full relaxation-coverage check against
    the target.  Intended for delta <= 6.
    """
    p = make_family_problem(params)
    lifted = re_transform(p, workers=workers)
    expected = expected_re_problem(params)
    iso = problems_isomorphic(lifted.problem, expected)
    if iso is None:
        return Verdict(
            False,
            {"transformed": lifted.problem.note},
            "transformed family problem is not isomorphic to the expected eight-label problem",
        )
    table = {}
    for name, members in lifted.sets:
        if members not in LIFTED_SET_NAMES:
            return Verdict(
                False,
                {"set": sorted(members)},
                "transformed problem uses a label set outside the expected eight",
            )
        table[name] = LIFTED_SET_NAMES[members]
    renamed = rename_problem(lifted.problem, table)
    if renamed != expected:
        return Verdict(
            False,
            {"renamed": renamed.note},
            "canonical renaming of the transformed problem differs from the expected problem",
        )
    verdict = verify_speedup_target(renamed, rel_coverage_target(params), workers=workers)
    if not verdict.holds:
        return verdict
    return Verdict(
        True,
        None,
        f"step at (delta={params.delta}, a={params.a}, x={params.x}) mechanized: "
        "transformed problem matches expectation and covers the relaxation target",
    )


# ---------------------------------------------------------------------------
# Chain certificates


@dataclass(frozen=True)
class SequenceStep:
    index: int
    params: FamilyParams
    stepped: FamilyParams
    next_params: FamilyParams
    checks: tuple[tuple[str, bool], ...]
    mechanized: Verdict | None = None


@dataclass(frozen=True)
class SequenceCertificate:
    delta: int
    x0: int
    epsilon: float
    t: int
    x0_within_guidance: bool
    steps: tuple[SequenceStep, ...]
    final_params: FamilyParams
    final_verdict: Verdict
    statement: str
    # Concrete smallest delta at which every check of this (x0, epsilon)
    # chain passes; None when it lies beyond the scan range.
    smallest_delta: int | None = None


_STEP_CHECKS = ("2x+1 <= a", "x+2 <= a", "a <= delta", "8x < a", "step dominates next")


def smallest_certified_delta(x0: int, epsilon: float, scan_limit: int = 1 << 16) -> int | None:
    """Smallest delta whose (x0, epsilon) chain passes every arithmetic check,
    found by direct scan; None when the search range is impractical.

    There is no closed-form threshold for "large enough", so the concrete
    smallest working delta is reported instead.
    """
    if epsilon <= 0:
        return None
    if epsilon * math.log2(scan_limit) < 1:
        return None  # even the largest scanned delta gives an empty chain
    for delta in range(2, scan_limit + 1):
        try:
            build_sequence(delta, x0, epsilon, report_smallest=False)
            return delta
        except SequenceError:
            continue
    return None


def build_sequence(
    delta: int,
    x0: int,
    epsilon: float,
    *,
    mechanize: bool = False,
    workers: int = 0,
    report_smallest: bool = True,
) -> SequenceCertificate:
    """Certificate for the chain (a_i, x_i) = (floor(delta / 8^i), x0 + i).

    Builds t = floor(epsilon * log2 delta) transition steps, checks the named
    inequalities and the domination of each step's direct result over the next
    chain member, and requires the final problem to fail the symmetric
    zero-round criterion.  Any failed check aborts with its step index.
    ``mechanize`` additionally runs the engine-backed step verification
    (desk scale, delta <= 6).
    """
    if delta < 2:
        raise SequenceError(f"delta must be at least 2, got {delta}", inequality="delta >= 2")
    if x0 < 0:
        raise SequenceError(f"x0 must be nonnegative, got {x0}", inequality="x0 >= 0")
    if epsilon <= 0:
        raise SequenceError("epsilon must be positive", inequality="epsilon > 0")
    t = math.floor(epsilon * math.log2(delta))
    if t < 1:
        raise SequenceError(
            f"t = floor(epsilon * log2(delta)) = {t}: an empty chain certifies nothing",
            inequality="t >= 1",
        )
    guidance = x0 <= delta**epsilon

    def chain_params(i: int) -> FamilyParams:
        try:
            return FamilyParams(delta, delta // (2 ** (3 * i)), x0 + i)
        except PreconditionError as exc:
            raise SequenceError(str(exc), index=i, inequality=exc.inequality) from exc

    steps: list[SequenceStep] = []
    for i in range(t):
        params = chain_params(i)
        nxt = chain_params(i + 1)
        checks = {
            "2x+1 <= a": 2 * params.x + 1 <= params.a,
            "x+2 <= a": params.x + 2 <= params.a,
            "a <= delta": params.a <= delta,
            # Hypothesis of the chain argument; reported, and implied whenever
            # x0 is within guidance and delta is large enough.
            "8x < a": 8 * params.x < params.a,
        }
        required = ("2x+1 <= a", "x+2 <= a", "a <= delta")
        if not all(checks[name] for name in required):
            failed = next(name for name in required if not checks[name])
            raise SequenceError(
                f"step {i} at (a={params.a}, x={params.x}) fails {failed}",
                index=i,
                inequality=failed,
            )
        stepped = step_params(params)
        dominates = stepped.a >= nxt.a and stepped.x <= nxt.x
        checks["step dominates next"] = dominates
        if not dominates:
            raise SequenceError(
                f"step {i}: direct result (a={stepped.a}, x={stepped.x}) does not dominate "
                f"the next chain member (a={nxt.a}, x={nxt.x})",
                index=i,
                inequality="step dominates next",
            )
        mechanized = mechanized_step_check(params, workers=workers) if mechanize else None
        if mechanized is not None and not mechanized.holds:
            raise SequenceError(
                f"step {i} failed mechanized verification: {mechanized.narrative}",
                index=i,
                inequality="mechanized step check",
            )
        steps.append(
            SequenceStep(i, params, stepped, nxt, tuple(checks.items()), mechanized)
        )
    final_params = chain_params(t)
    final_verdict = zero_round_solvable_symmetric(make_family_problem(final_params))
    if final_verdict.holds:
        raise SequenceError(
            f"final problem (a={final_params.a}, x={final_params.x}) is zero-round solvable; "
            "the chain certifies nothing (a >= 1 and x <= delta-1 are required)",
            index=t,
            inequality="a >= 1 and x <= delta-1",
        )
    statement = (
        f"chain of {t} one-round reductions from family(delta={delta}, a={delta}, x={x0}) "
        f"to family(delta={delta}, a={final_params.a}, x={final_params.x}), whose final "
        "problem is not zero-round solvable under symmetric ports: lower bound of "
        f"{t} rounds in the port numbering model; with the standard lifting machinery this "
        f"gives Omega(min({t}, log_delta n)) deterministic and Omega(min({t}, log_delta log n)) "
        "randomized rounds on high-girth regular trees"
    )
    return SequenceCertificate(
        delta,
        x0,
        epsilon,
        t,
        guidance,
        tuple(steps),
        final_params,
        final_verdict,
        statement,
        smallest_certified_delta(x0, epsilon) if report_smallest else None,
    )


# ---------------------------------------------------------------------------
# Outdegree-bounded dominating sets


@dataclass(frozen=True)
class KodsStatement:
    """Machine-readable statement of the k-outdegree dominating set problem."""

    delta: int
    k: int
    requirements: tuple[str, ...]
    is_mis: bool
    is_trivial: bool
    one_round_reduction: str


def kods_problem_statement(delta: int, k: int) -> KodsStatement:
    if not 0 <= k <= delta:
        raise PreconditionError(f"k = {k} outside [0, {delta}]", "0 <= k <= delta")
    requirements = (
        "S is a dominating set: every node outside S has a neighbor in S",
        "the edges inside S are oriented",
        f"every member of S has outdegree at most {k} inside S",
    )
    return KodsStatement(
        delta=delta,
        k=k,
        requirements=requirements,
        is_mis=(k == 0),
        is_trivial=(k == delta),
        one_round_reduction=(
            f"given a solution, family(delta={delta}, a, {k}) is solvable in one round for every a"
        ),
    )
