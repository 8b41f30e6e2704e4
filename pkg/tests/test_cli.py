import json
import subprocess
import sys
from pathlib import Path

import jsonschema

GOLDEN = Path(__file__).parent / "golden"
SCHEMAS = json.loads(
    (Path(__file__).parent.parent / "docs" / "schemas.json").read_text()
)


def cli(*args, inp: bytes | None = None):
    return subprocess.run(
        [sys.executable, "-m", "relim.cli", *args], capture_output=True, input=inp
    )


def validate(payload, name: str):
    jsonschema.validate(payload, {"$ref": f"#/$defs/{name}", "$defs": SCHEMAS["$defs"]})


def test_mis_matches_golden():
    r = cli("mis", "--delta", "3")
    assert r.returncode == 0
    assert r.stdout == (GOLDEN / "mis3.problem").read_bytes()


def test_family_matches_golden():
    r = cli("family", "--delta", "4", "--a", "2", "--x", "1")
    assert r.stdout == (GOLDEN / "family_4_2_1.problem").read_bytes()


def test_re_json_matches_golden():
    r = cli("re", str(GOLDEN / "mis3.problem"), "--format", "json")
    assert r.returncode == 0
    assert r.stdout == (GOLDEN / "re_mis3.json").read_bytes()
    validate(json.loads(r.stdout), "lifted")


def test_re_text_output():
    r = cli("re", str(GOLDEN / "mis3.problem"))
    out = r.stdout.decode()
    assert "sets:" in out and "A = {M}" in out


def test_re_text_output_pipes_into_rere():
    # The dictionary is written as comments, so the text output is itself a
    # valid problem file.
    mis = cli("mis", "--delta", "3")
    re_out = cli("re", "-", inp=mis.stdout)
    assert "# sets:" in re_out.stdout.decode()
    rr = cli("rere", "-", inp=re_out.stdout)
    assert rr.returncode == 0
    assert rr.stdout.decode().startswith("delta: 3\n")


def test_iso_command(tmp_path):
    from relim.core import serialize_problem
    from relim.family import FamilyParams, expected_re_problem

    fam = cli("family", "--delta", "5", "--a", "4", "--x", "1")
    lifted = cli("re", "-", inp=fam.stdout)
    lifted_file = tmp_path / "lifted.problem"
    lifted_file.write_bytes(lifted.stdout)
    expected_file = tmp_path / "expected.problem"
    expected_file.write_text(serialize_problem(expected_re_problem(FamilyParams(5, 4, 1))))
    r = cli("iso", str(lifted_file), str(expected_file), "--format", "json")
    assert r.returncode == 0
    payload = json.loads(r.stdout)
    assert payload["isomorphic"] is True
    assert payload["mapping"]["A"] == "X"
    mis = cli("mis", "--delta", "5")
    mis_file = tmp_path / "mis.problem"
    mis_file.write_bytes(mis.stdout)
    assert cli("iso", str(lifted_file), str(mis_file)).returncode == 1


def test_re_trivial_prints_same_problem(tmp_path):
    f = tmp_path / "trivial.problem"
    f.write_text("delta: 2\nnodes:\nX^2\nedges:\nX X\n")
    r = cli("re", str(f))
    assert r.returncode == 0
    assert "A^2" in r.stdout.decode()


def test_rename_file(tmp_path):
    table = tmp_path / "names.json"
    table.write_text(json.dumps({"M": "M", "O": "O", "M O": "MO", "O P": "PO"}))
    r = cli("re", str(GOLDEN / "mis3.problem"), "--format", "json", "--rename-file", str(table))
    assert r.stdout == (GOLDEN / "re_mis3_renamed.json").read_bytes()


def test_rename_file_juxtaposed_keys(tmp_path):
    table = tmp_path / "names.json"
    table.write_text(json.dumps({"MO": "MO", "OP": "PO"}))
    r = cli("re", str(GOLDEN / "mis3.problem"), "--format", "json", "--rename-file", str(table))
    got = json.loads(r.stdout)
    assert got["sets"]["MO"] == ["M", "O"] and got["sets"]["PO"] == ["O", "P"]


def test_diagram_dot_and_json(tmp_path):
    r = cli("diagram", str(GOLDEN / "family_4_2_1.problem"), "--side", "edge")
    assert r.stdout.decode().startswith("digraph edge_strength")
    r = cli("diagram", str(GOLDEN / "family_4_2_1.problem"), "--side", "edge", "--format", "json")
    validate(json.loads(r.stdout), "diagram")


def test_expected_node_diagram_matches_golden():
    # The transformed family problem's node diagram, frozen once.
    from relim.diagram import build_diagram, diagram_to_dot
    from relim.family import FamilyParams, expected_re_problem

    dot = diagram_to_dot(build_diagram(expected_re_problem(FamilyParams(5, 4, 1)), "node"))
    assert dot == (GOLDEN / "expected_re_5_4_1_node_diagram.dot").read_text()


def test_sequence_json_matches_golden():
    r = cli("sequence", "--delta", str(2**20), "--x0", "2", "--epsilon", "0.25", "--format", "json")
    assert r.returncode == 0
    assert r.stdout == (GOLDEN / "sequence_2p20.json").read_bytes()
    validate(json.loads(r.stdout), "certificate")


def test_sequence_failure_exit_code():
    r = cli("sequence", "--delta", "5", "--x0", "0", "--epsilon", "0.5")
    assert r.returncode == 1
    assert b"zero-round solvable" in r.stderr


def test_simulate_kods_deterministic():
    args = ("simulate", "kods", "--n", "50", "--delta", "4", "--k", "1", "--a", "2", "--seed", "5", "--format", "json")
    a, b = cli(*args), cli(*args)
    assert a.returncode == 0 and a.stdout == b.stdout
    payload = json.loads(a.stdout)
    assert payload["holds"] is True
    validate(payload["tree"], "tree")


def test_simulate_plus_transform():
    r = cli(
        "simulate", "plus-transform", "--n", "60", "--delta", "4",
        "--a", "3", "--x", "0", "--seed", "7", "--format", "json",
    )
    assert r.returncode == 0
    assert json.loads(r.stdout)["holds"] is True


def test_simulate_check_roundtrip(tmp_path):
    r = cli(
        "simulate", "kods", "--n", "30", "--delta", "4", "--k", "0", "--a", "1",
        "--seed", "3", "--format", "json",
    )
    tree = json.loads(r.stdout)["tree"]
    tree_file = tmp_path / "tree.json"
    tree_file.write_text(json.dumps(tree))
    fam = cli("family", "--delta", "4", "--a", "1", "--x", "0")
    prob_file = tmp_path / "fam.problem"
    prob_file.write_bytes(fam.stdout)
    r = cli("simulate", "check", "--tree", str(tree_file), "--problem", str(prob_file))
    assert r.returncode == 0
    # An invalid problem for the same labeling exits 1.
    mis = cli("mis", "--delta", "4")
    prob_file.write_bytes(mis.stdout)
    r = cli("simulate", "check", "--tree", str(tree_file), "--problem", str(prob_file))
    assert r.returncode in (0, 1)


def test_parse_error_exit_code(tmp_path):
    bad = tmp_path / "bad.problem"
    bad.write_text("delta: x\n")
    r = cli("re", str(bad))
    assert r.returncode == 2
    assert b"parse error" in r.stderr


def test_usage_error_exit_code():
    assert cli("verify").returncode == 2
    assert cli("no-such-command").returncode == 2


def test_failure_bound_json_schema(fam421):
    from relim.analysis import randomized_failure_bound
    from relim.jsonio import bound_to_json

    validate(bound_to_json(randomized_failure_bound(fam421)), "bound")


def test_problem_json_schema(fam421):
    from relim.jsonio import problem_to_json

    validate(problem_to_json(fam421), "problem")
