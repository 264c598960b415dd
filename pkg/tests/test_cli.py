import json

import pytest

from cosetope.cli import main
from cosetope.modular import congruence_rep, is_congruence, low_index_reps
from cosetope.report import canonical_dumps, parse_int


H_GENS_JSON = [{"w": "S"}, {"w": "T"}]
# i h i^-1 for h in {S, T}: additive part I - h
K_GENS_JSON = [
    {"a": {"rows": [[1, 1], [-1, 1]], "m": None}, "w": "S"},
    {"a": {"rows": [[0, -1], [0, 0]], "m": None}, "w": "T"},
]


@pytest.fixture
def gens_files(tmp_path):
    h = tmp_path / "h.json"
    h.write_text(json.dumps(H_GENS_JSON))
    k = tmp_path / "k.json"
    k.write_text(json.dumps(K_GENS_JSON))
    empty = tmp_path / "empty.json"
    empty.write_text("[]")
    return {"h": str(h), "k": str(k), "empty": str(empty), "dir": tmp_path}


def run_report(args, path):
    code = main(args + ["--output", str(path)])
    assert code == 0, f"command failed: {args}"
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    data = json.loads(text)
    assert canonical_dumps(data) == text
    return data, text


def test_quotient_command(tmp_path):
    data, _ = run_report(["quotient", "--modulus", "2", "--enumerate"], tmp_path / "q.json")
    assert parse_int(data["result"]["order"]) == 96
    assert parse_int(data["result"]["enumerated_order"]) == 96
    assert parse_int(data["schema"]) == 1


def test_image_and_intersect_commands(tmp_path, gens_files):
    data, _ = run_report(
        ["image", "--modulus", "3", "--gens", gens_files["h"]], tmp_path / "img.json"
    )
    assert parse_int(data["result"]["size"]) == 24
    data, _ = run_report(
        [
            "intersect",
            "--modulus",
            "3",
            "--left",
            gens_files["h"],
            "--right",
            gens_files["k"],
        ],
        tmp_path / "meet.json",
    )
    assert parse_int(data["result"]["size_intersection"]) == 1


def test_dcoset_member_and_verify(tmp_path, gens_files):
    element = json.dumps({"a": {"rows": [["2", "0"], ["0", "2"]], "m": None}, "w": ""})
    path = tmp_path / "member.json"
    data, _ = run_report(
        [
            "dcoset-member",
            "--modulus",
            "3",
            "--element",
            element,
            "--left",
            gens_files["h"],
            "--right",
            gens_files["k"],
        ],
        path,
    )
    assert data["result"]["member"] is False
    verify_out = tmp_path / "verify.json"
    assert main(["verify", "--report", str(path), "--output", str(verify_out)]) == 0


def test_lowindex_and_congruence_commands(tmp_path):
    path = tmp_path / "lowindex.json"
    data, _ = run_report(["lowindex", "--max-degree", "5"], path)
    assert parse_int(data["result"]["count"]) == len(low_index_reps(5))
    assert main(["verify", "--report", str(path), "--output", str(tmp_path / "v.json")]) == 0

    rep_path = tmp_path / "rep.json"
    rep_path.write_text(json.dumps(congruence_rep(2).to_json()))
    cpath = tmp_path / "congruence.json"
    data, _ = run_report(["congruence", "--rep", str(rep_path)], cpath)
    assert data["result"]["congruence"] is True
    assert parse_int(data["result"]["level"]) == 2
    assert main(["verify", "--report", str(cpath), "--output", str(tmp_path / "v2.json")]) == 0


def test_gap_witness_command_and_verify(tmp_path):
    rep = next(r for r in low_index_reps(7) if not is_congruence(r))
    rep_path = tmp_path / "rep.json"
    rep_path.write_text(json.dumps(rep.to_json()))
    path = tmp_path / "witness.json"
    data, _ = run_report(
        ["gap-witness", "--rep", str(rep_path), "--level", "12", "--m-max", "12"], path
    )
    assert data["result"]["status"] == "found"
    assert main(["verify", "--report", str(path), "--output", str(tmp_path / "v.json")]) == 0


def test_gap_witness_rejects_congruence_rep(tmp_path, capsys):
    rep_path = tmp_path / "rep.json"
    rep_path.write_text(json.dumps(congruence_rep(2).to_json()))
    code = main(["gap-witness", "--rep", str(rep_path), "--level", "4"])
    assert code == 2


def test_tractable_command_and_verify(tmp_path, gens_files):
    path = tmp_path / "tractable.json"
    data, _ = run_report(
        [
            "tractable",
            "--h-gens",
            gens_files["h"],
            "--k-gens",
            gens_files["k"],
            "--hcapk-gens",
            gens_files["empty"],
            "--m-spec",
            '{"m": 2}',
        ],
        path,
    )
    assert data["result"]["found"] is not None
    assert main(["verify", "--report", str(path), "--output", str(tmp_path / "v.json")]) == 0


def test_thm_b_probe_command_and_verify(tmp_path, gens_files):
    element = json.dumps({"a": {"rows": [["2", "0"], ["0", "2"]], "m": None}, "w": ""})
    path = tmp_path / "probe.json"
    data, _ = run_report(
        [
            "thm-b-probe",
            "--h-gens",
            gens_files["h"],
            "--k-gens",
            gens_files["k"],
            "--element",
            element,
        ],
        path,
    )
    assert data["result"]["status"] == "certified"
    assert parse_int(data["result"]["certificate"]["spec"]["m"]) == 3
    assert main(["verify", "--report", str(path), "--output", str(tmp_path / "v.json")]) == 0


def test_gs_demo_determinism_and_verify(tmp_path):
    first = tmp_path / "demo1.json"
    second = tmp_path / "demo2.json"
    _, text1 = run_report(["gs-demo", "--max-level", "4", "--m-max", "6"], first)
    _, text2 = run_report(["gs-demo", "--max-level", "4", "--m-max", "6"], second)
    assert text1 == text2
    assert main(["verify", "--report", str(first), "--output", str(tmp_path / "v.json")]) == 0


def test_verify_rejects_tampered_report(tmp_path):
    path = tmp_path / "demo.json"
    data, text = run_report(["gs-demo", "--max-level", "3", "--m-max", "4"], path)
    tampered = json.loads(text)
    tampered["result"]["intersections"][0]["size"] = "2"
    path.write_text(canonical_dumps(tampered))
    assert main(["verify", "--report", str(path)]) == 2
    path.write_text(text + " ")
    assert main(["verify", "--report", str(path)]) == 2


def test_exit_code_on_bad_input(tmp_path):
    assert main(["image", "--modulus", "3", "--gens", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["image", "--modulus", "3", "--gens", str(bad)]) == 2


def test_exit_code_on_budget_exhaustion(tmp_path):
    assert (
        main(
            [
                "quotient",
                "--modulus",
                "3",
                "--enumerate",
                "--closure-cap",
                "10",
                "--output",
                str(tmp_path / "q.json"),
            ]
        )
        == 3
    )


def test_budget_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("COSETOPE_BUDGET", "10")
    assert (
        main(["quotient", "--modulus", "3", "--enumerate", "--output", str(tmp_path / "q.json")])
        == 3
    )
    monkeypatch.setenv("COSETOPE_BUDGET", "closure=10,product=99")
    assert (
        main(["quotient", "--modulus", "3", "--enumerate", "--output", str(tmp_path / "q2.json")])
        == 3
    )
