"""Canonical JSON encodings shared by the CLI and the HTTP service.

Everything machine-readable goes through ``canonical_dumps`` (sorted keys,
compact separators, trailing newline) so the two surfaces emit byte-identical
output for the same input.
"""

from __future__ import annotations

import json

from .analysis import FailureBound, Relaxation, SetProblem, Verdict
from .core import Config, Problem
from .diagram import Diagram
from .family import FamilyParams, KodsStatement, SequenceCertificate, SequenceStep
from .roundelim import LiftedProblem
from .simtree import DSolution, LabeledTree, TreeEdge


def canonical_dumps(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


# ---------------------------------------------------------------------------
# Problems


def _constraint_to_json(configs) -> list:
    return [[[list(group), mult] for group, mult in cfg.items] for cfg in configs]


def problem_to_json(p: Problem) -> dict:
    out = {
        "delta": p.delta,
        "nodes": _constraint_to_json(p.node_constraint.configs),
        "edges": _constraint_to_json(p.edge_constraint.configs),
    }
    if p.note:
        out["note"] = p.note
    return out


def _configs_from_json(rows) -> list[Config]:
    return [Config.of((tuple(group), mult) for group, mult in cfg) for cfg in rows]


def problem_from_json(data: dict) -> Problem:
    return Problem.build(
        int(data["delta"]),
        _configs_from_json(data.get("nodes", [])),
        _configs_from_json(data.get("edges", [])),
        note=str(data.get("note", "")),
    )


def lifted_to_json(lp: LiftedProblem) -> dict:
    return {
        "problem": problem_to_json(lp.problem),
        "sets": {name: sorted(members) for name, members in lp.sets},
        "transform": lp.transform,
    }


def set_problem_from_json(data: dict) -> SetProblem:
    nodes = [[frozenset(s) for s in cfg] for cfg in data["node_configs"]]
    edges = [
        [(tuple(frozenset(s) for s in group), mult) for group, mult in cfg]
        for cfg in data["edge_configs"]
    ]
    alphabet = [frozenset(s) for s in data["alphabet"]] if "alphabet" in data else None
    return SetProblem.build(int(data["delta"]), nodes, edges, alphabet)


def set_problem_to_json(sp: SetProblem) -> dict:
    return {
        "delta": sp.delta,
        "alphabet": [sorted(s) for s in sp.alphabet],
        "node_configs": [[sorted(s) for s in cfg] for cfg in sp.node_configs],
        "edge_configs": [
            [[[sorted(s) for s in group], mult] for group, mult in cfg]
            for cfg in sp.edge_configs
        ],
    }


# ---------------------------------------------------------------------------
# Diagrams, verdicts, bounds


def diagram_to_json(d: Diagram) -> dict:
    return {
        "side": d.side,
        "labels": list(d.labels),
        "classes": [list(cls) for cls in d.classes],
        "edges": [[u, v] for u, v in d.edges],
    }


def verdict_to_json(v: Verdict) -> dict:
    return {"holds": v.holds, "witness": v.witness, "narrative": v.narrative}


def relaxation_to_json(r: Relaxation | None) -> dict:
    if r is None:
        return {"relaxes": False}
    return {
        "relaxes": True,
        "source": [sorted(s) for s in r.source],
        "target": [sorted(s) for s in r.target],
        "witness": list(r.witness),
    }


def bound_to_json(b: FailureBound) -> dict:
    return {
        "probability": f"{b.probability.numerator}/{b.probability.denominator}",
        "probability_float": float(b.probability),
        "threshold": f"{b.threshold.numerator}/{b.threshold.denominator}",
        "meets_threshold": b.meets_threshold,
        "config_count": b.config_count,
        "delta": b.delta,
        "note": b.note,
    }


# ---------------------------------------------------------------------------
# Sequence certificates


def _params_to_json(p: FamilyParams) -> dict:
    return {"delta": p.delta, "a": p.a, "x": p.x}


def _step_to_json(s: SequenceStep) -> dict:
    out = {
        "index": s.index,
        "params": _params_to_json(s.params),
        "stepped": _params_to_json(s.stepped),
        "next": _params_to_json(s.next_params),
        "checks": {name: ok for name, ok in s.checks},
    }
    if s.mechanized is not None:
        out["mechanized"] = verdict_to_json(s.mechanized)
    return out


def certificate_to_json(c: SequenceCertificate) -> dict:
    return {
        "delta": c.delta,
        "x0": c.x0,
        "epsilon": c.epsilon,
        "t": c.t,
        "x0_within_guidance": c.x0_within_guidance,
        "steps": [_step_to_json(s) for s in c.steps],
        "final_params": _params_to_json(c.final_params),
        "final_verdict": verdict_to_json(c.final_verdict),
        "statement": c.statement,
        "smallest_delta": c.smallest_delta,
    }


def certificate_report(c: SequenceCertificate) -> str:
    lines = [
        f"chain certificate: delta={c.delta}, x0={c.x0}, epsilon={c.epsilon}, t={c.t}",
        f"x0 within delta^epsilon guidance: {'yes' if c.x0_within_guidance else 'no'}",
    ]
    for s in c.steps:
        checks = ", ".join(f"{name}: {'ok' if ok else 'FAIL'}" for name, ok in s.checks)
        lines.append(
            f"  step {s.index}: (a={s.params.a}, x={s.params.x}) -> "
            f"(a={s.stepped.a}, x={s.stepped.x}) dominates next (a={s.next_params.a}, "
            f"x={s.next_params.x}); {checks}"
        )
        if s.mechanized is not None:
            lines.append(f"    mechanized: {s.mechanized.narrative}")
    lines.append(
        f"  final: (a={c.final_params.a}, x={c.final_params.x}) zero-round solvable: no"
    )
    if c.smallest_delta is not None:
        lines.append(
            f"smallest delta passing every check at (x0={c.x0}, epsilon={c.epsilon}): "
            f"{c.smallest_delta}"
        )
    lines.append(c.statement)
    return "\n".join(lines) + "\n"


def kods_statement_to_json(s: KodsStatement) -> dict:
    return {
        "delta": s.delta,
        "k": s.k,
        "requirements": list(s.requirements),
        "is_mis": s.is_mis,
        "is_trivial": s.is_trivial,
        "one_round_reduction": s.one_round_reduction,
    }


# ---------------------------------------------------------------------------
# Trees and solutions


def tree_to_json(t: LabeledTree) -> dict:
    out = {
        "delta": t.delta,
        "n": t.n,
        "symmetric": t.symmetric,
        "edges": [
            {"u": e.u, "v": e.v, "pu": e.pu, "pv": e.pv}
            | ({"color": e.color} if e.color is not None else {})
            for e in t.edges
        ],
    }
    if t.labels is not None:
        out["labels"] = [[v, e, l] for v, e, l in t.labels]
    return out


def tree_from_json(data: dict) -> LabeledTree:
    edges = tuple(
        TreeEdge(int(e["u"]), int(e["v"]), int(e["pu"]), int(e["pv"]), e.get("color"))
        for e in data["edges"]
    )
    labels = None
    if "labels" in data:
        labels = tuple(sorted((int(v), int(e), str(l)) for v, e, l in data["labels"]))
    return LabeledTree(
        int(data["delta"]),
        int(data["n"]),
        edges,
        symmetric=bool(data.get("symmetric", False)),
        labels=labels,
    )


def tree_to_dot(t: LabeledTree) -> str:
    """Plot-description export: undirected graph text with ports, colors, and
    half-edge labels as edge attributes."""
    labels = t.label_map()
    lines = ["graph tree {"]
    for v in range(t.n):
        lines.append(f"  {v};")
    for e, edge in enumerate(t.edges):
        attrs = [f'taillabel="{edge.pu}"', f'headlabel="{edge.pv}"']
        if edge.color is not None:
            attrs.append(f'label="c{edge.color}"')
        if t.labels is not None:
            attrs.append(
                f'xlabel="{labels.get((edge.u, e), "?")} {labels.get((edge.v, e), "?")}"'
            )
        lines.append(f"  {edge.u} -- {edge.v} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def dsolution_to_json(sol: DSolution) -> dict:
    return {
        "in_set": [bool(b) for b in sol.in_set],
        "orientation": [[e, tail, head] for e, tail, head in sol.orientation],
    }


def dsolution_from_json(data: dict) -> DSolution:
    return DSolution(
        tuple(bool(b) for b in data["in_set"]),
        tuple(sorted((int(e), int(t), int(h)) for e, t, h in data["orientation"])),
    )
