"""End-to-end tests for the command line front end."""

from __future__ import annotations

import json

import pytest

from soncert import cli
from soncert.certify import Certificate
from soncert.polyring import SparsePoly, poly_dumps

MOTZKIN = SparsePoly(2, {(4, 2): 1, (2, 4): 1, (0, 0): 1, (2, 2): -3})
EX6 = SparsePoly(
    2, {(0, 0): 1, (4, 0): 1, (0, 4): 1, (1, 2): -1, (2, 1): -1, (1, 1): 5}
)


@pytest.fixture
def motzkin_file(tmp_path):
    path = tmp_path / "motzkin.json"
    path.write_text(poly_dumps(MOTZKIN))
    return str(path)


def test_bound_json_report(motzkin_file, capsys):
    code = cli.main(["bound", motzkin_file, "--json"])
    assert code == cli.EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["status"] == "ok"
    assert abs(report["xi"]) < 1e-4
    assert report["num_triples"] == 3


def test_bound_key_value_report(motzkin_file, capsys):
    code = cli.main(["bound", motzkin_file])
    assert code == cli.EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    pairs = dict(line.split("=", 1) for line in lines)
    assert pairs["status"] == "ok"
    assert abs(float(pairs["xi"])) < 1e-4


def test_bound_dump_socp(motzkin_file, tmp_path, capsys):
    dump = tmp_path / "socp.json"
    code = cli.main(["bound", motzkin_file, "--dump-socp", str(dump)])
    assert code == cli.EXIT_OK
    capsys.readouterr()
    data = json.loads(dump.read_text())
    assert data["mode"] == "bound"
    assert data["num_cones"] == 3


def test_certify_then_verify(motzkin_file, tmp_path, capsys):
    cert_path = tmp_path / "cert.json"
    code = cli.main(["certify", motzkin_file, "-o", str(cert_path)])
    assert code == cli.EXIT_OK
    err = capsys.readouterr().err
    assert "status=ok" in err
    cert = Certificate.loads(cert_path.read_text())
    assert cert.n == 2

    code = cli.main(["verify", motzkin_file, str(cert_path), "--json"])
    assert code == cli.EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out == {"ok": True, "reason": "ok"}


def test_certify_json_inlines_certificate(motzkin_file, capsys):
    code = cli.main(["certify", motzkin_file, "--json"])
    assert code == cli.EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["status"] == "ok"
    assert payload["certificate"]["n"] == 2


def test_certify_at_boundary_exits_2(motzkin_file, capsys):
    code = cli.main(["certify", motzkin_file, "--xi", "0"])
    assert code == cli.EXIT_BOUNDARY
    assert "status=boundary-failure" in capsys.readouterr().out


def test_verify_rejects_tampered_certificate(motzkin_file, tmp_path, capsys):
    cert_path = tmp_path / "cert.json"
    assert cli.main(["certify", motzkin_file, "-o", str(cert_path)]) == cli.EXIT_OK
    capsys.readouterr()
    data = json.loads(cert_path.read_text())
    data["xi"] = "1/2"
    cert_path.write_text(json.dumps(data))
    code = cli.main(["verify", motzkin_file, str(cert_path)])
    assert code == cli.EXIT_ERROR
    out = capsys.readouterr().out
    assert "ok=false" in out


def test_gen_roundtrips_through_bound(tmp_path, capsys):
    code = cli.main(["gen", "--seed", "3", "--n", "2", "--degree", "6", "--terms", "8", "--count", "2"])
    assert code == cli.EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2
    poly_path = tmp_path / "gen.json"
    poly_path.write_text(lines[0])
    assert cli.main(["bound", str(poly_path)]) == cli.EXIT_OK
    capsys.readouterr()


def test_gen_json_metadata(capsys):
    code = cli.main(["gen", "--seed", "5", "--json", "--poly-class", "general-simplex"])
    assert code == cli.EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["meta"]["poly_class"] == "general-simplex"
    assert payload["meta"]["seed"] == 5
    assert payload["poly"]["n"] == 2


def test_batch_bound_jsonl(tmp_path, capsys):
    batch = tmp_path / "batch.jsonl"
    batch.write_text(poly_dumps(MOTZKIN) + "\n" + poly_dumps(EX6) + "\n")
    code = cli.main(["bound", str(batch), "--batch"])
    assert code == cli.EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2
    xis = [json.loads(ln)["xi"] for ln in lines]
    assert abs(xis[0]) < 1e-4
    assert abs(xis[1] + 6.9165) < 1e-3


def test_batch_bound_directory(tmp_path, capsys):
    box = tmp_path / "polys"
    box.mkdir()
    (box / "a.json").write_text(poly_dumps(MOTZKIN))
    (box / "b.json").write_text(poly_dumps(EX6))
    (box / "ignore.txt").write_text("not a polynomial")
    code = cli.main(["bound", str(box), "--batch"])
    assert code == cli.EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2


def test_stdin_input(motzkin_file, capsys, monkeypatch):
    import io

    monkeypatch.setattr("sys.stdin", io.StringIO(poly_dumps(MOTZKIN)))
    code = cli.main(["bound", "-", "--json"])
    assert code == cli.EXIT_OK
    assert json.loads(capsys.readouterr().out)["status"] == "ok"


def test_error_exit_on_garbage(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code = cli.main(["bound", str(bad)])
    assert code == cli.EXIT_ERROR
    assert "error:" in capsys.readouterr().err


def test_error_exit_on_missing_file(capsys):
    code = cli.main(["bound", "/nonexistent/nope.json"])
    assert code == cli.EXIT_ERROR
    capsys.readouterr()
