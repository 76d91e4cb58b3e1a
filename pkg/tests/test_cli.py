import json

import numpy as np
import pytest

from channel_lab import serialize
from channel_lab.cli import main
from channel_lab.core import amplitude_damping_channel, dephasing_channel, identity_channel
from channel_lab.gaussian import GaussianState


def run(*argv):
    return main(list(argv))


def test_convert_kraus_to_stinespring_and_back(tmp_path):
    src = tmp_path / "ch.json"
    serialize.dump(amplitude_damping_channel(0.3), src)
    mid = tmp_path / "v.json"
    assert run("convert", "--in", str(src), "--to", "stinespring", "--out", str(mid)) == 0
    out = tmp_path / "back.json"
    assert run("convert", "--in", str(mid), "--to", "kraus", "--out", str(out)) == 0
    doc = json.loads(out.read_text())
    assert doc["kind"] == "kraus"
    assert doc["metadata"]["verified"] is True
    assert doc["metadata"]["max_action_deviation"] <= 1e-10


def test_convert_to_unitary_dilation_and_minimal(tmp_path, capsys):
    src = tmp_path / "ch.json"
    serialize.dump(dephasing_channel(0.0), src)
    dil = tmp_path / "dil.json"
    assert run("convert", "--in", str(src), "--to", "unitary-dilation", "--out", str(dil)) == 0
    assert json.loads(dil.read_text())["kind"] == "unitary-dilation"
    capsys.readouterr()
    # stdout mode prints the document itself
    assert run("convert", "--in", str(src), "--to", "minimal-stinespring") == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["kind"] == "stinespring"
    assert doc["d_env"] == 2


def test_sequence_swap_csv_columns(tmp_path):
    prefix = tmp_path / "swap"
    assert run("sequence", "swap", "--dim", "6", "--out", str(prefix)) == 0
    rows = (tmp_path / "swap.csv").read_text().splitlines()
    assert rows[0].startswith("n,strong,strongstar,choi")
    body = [r.split(",") for r in rows[1:]]
    assert len(body) == 5
    # the witness column stays pinned at 1.0 while the probe column dies out
    assert all(float(r[2]) == 1.0 for r in body)
    assert float(body[0][1]) == pytest.approx(np.sqrt(2.0), abs=1e-12)
    assert all(float(r[1]) == 0.0 for r in body[1:])
    report = json.loads((tmp_path / "swap.json").read_text())
    assert report["kind"] == "convergence-report"


def test_sequence_swap_rejects_odd_dims(tmp_path, capsys):
    code = run("sequence", "swap", "--dim", "7", "--out", str(tmp_path / "x"))
    assert code == 2
    assert "even dimension" in capsys.readouterr().err


def test_sequence_rotation_family_and_report_summary(tmp_path, capsys):
    prefix = tmp_path / "rot"
    assert run("sequence", "partial-trace-form", "--ns", "1,10,100", "--out", str(prefix)) == 0
    rows = (tmp_path / "rot.csv").read_text().splitlines()
    assert len(rows) == 4
    last = rows[-1].split(",")
    assert float(last[3]) < 1e-2
    capsys.readouterr()
    assert run("report", "--in", str(tmp_path / "rot.json")) == 0
    summary = capsys.readouterr().out
    assert "indices: 1..100 (3 rows)" in summary
    assert "choi:" in summary


def test_sequence_compress_reaches_zero_at_full_rank(tmp_path):
    src = tmp_path / "base.json"
    serialize.dump(identity_channel(4), src)
    prefix = tmp_path / "comp"
    assert run("sequence", "compress", "--in", str(src), "--out", str(prefix)) == 0
    rows = (tmp_path / "comp.csv").read_text().splitlines()
    final = rows[-1].split(",")
    assert float(final[1]) < 1e-12
    assert float(final[3]) < 1e-12


def test_sequence_outputs_are_deterministic(tmp_path, monkeypatch):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("sequence", "partial-trace-form", "--ns", "1,5", "--out", str(a)) == 0
    monkeypatch.setenv("CHANNEL_LAB_THREADS", "3")
    assert run("sequence", "partial-trace-form", "--ns", "1,5", "--out", str(b)) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_report_reemits_identical_csv(tmp_path):
    prefix = tmp_path / "swap"
    assert run("sequence", "swap", "--dim", "6", "--out", str(prefix)) == 0
    out = tmp_path / "again.csv"
    assert run("report", "--in", str(tmp_path / "swap.json"), "--out", str(out)) == 0
    assert out.read_bytes() == (tmp_path / "swap.csv").read_bytes()


def test_gaussian_distance_anchor(capsys):
    assert run("gaussian", "distance", "--k", "0.6", "--kprime", "0.5", "--eta", "100") == 0
    assert float(capsys.readouterr().out) == pytest.approx(2.0, abs=1e-9)


def test_gaussian_validate_exit_codes(tmp_path, capsys):
    good = tmp_path / "vac.json"
    serialize.dump(GaussianState(mean=np.zeros(2), cov=np.eye(2)), good)
    assert run("gaussian", "validate", "--in", str(good)) == 0
    bad = tmp_path / "squeezed.json"
    serialize.dump(GaussianState(mean=np.zeros(2), cov=np.eye(2) / 2), bad)
    capsys.readouterr()
    assert run("gaussian", "validate", "--in", str(bad)) == 2
    assert "valid=False" in capsys.readouterr().out


def test_gaussian_apply_and_converge(tmp_path, capsys):
    assert run("gaussian", "apply", "--k", "0.5") == 0
    doc = json.loads(capsys.readouterr().out)
    assert set(doc) == {"input", "channel", "output"}
    assert doc["output"]["sigma"][0][0] == pytest.approx(1.0)

    prefix = tmp_path / "sweep"
    assert run("gaussian", "converge", "--k", "0.5", "--ns", "20", "--out", str(prefix)) == 0
    rows = (tmp_path / "sweep.csv").read_text().splitlines()
    # index 1 would need transmissivity 1.5, so the sweep starts at 2
    assert rows[1].split(",")[0] == "2"
    assert rows[-1].split(",")[0] == "20"


def test_exit_code_three_for_parse_problems(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    assert run("convert", "--in", str(bad), "--to", "kraus") == 3
    assert "parse error" in capsys.readouterr().err


def test_exit_code_two_for_invalid_values(tmp_path, capsys):
    doc = serialize.to_json_obj(amplitude_damping_channel(0.2))
    doc["kraus"][0][0][0] = [9.0, 0.0]
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(doc))
    assert run("convert", "--in", str(path), "--to", "kraus") == 2
    assert "validation error" in capsys.readouterr().err
    assert run("convert", "--in", str(tmp_path / "missing.json"), "--to", "kraus") == 2


def test_usage_errors_exit_two(tmp_path):
    with pytest.raises(SystemExit) as err:
        run("convert", "--in", "x.json", "--to", "nonsense")
    assert err.value.code == 2
