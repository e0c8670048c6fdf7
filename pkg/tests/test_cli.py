import csv
import json
import subprocess
import sys

import pytest

from pmbits.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


class TestPmVerify:
    def test_ok(self, capsys):
        code, doc = run(capsys, "pm-verify")
        assert code == 0
        assert doc["no_go"]["all_six_satisfiable"] == 0
        assert doc["no_go"]["max_satisfied"] == 5
        assert doc["structure"]["passed"] is True

    def test_format_json(self, capsys):
        code, doc = run(capsys, "pm-verify", "--format", "json")
        assert code == 0 and "structure" in doc

    def test_tampered(self, capsys):
        code, doc = run(capsys, "pm-verify", "--tamper", "Y1")
        assert code == 1
        assert sorted(doc["structure"]["failures"]) == ["col2", "row2"]


class TestBits:
    def test_singlet_xxyy(self, capsys):
        code, doc = run(capsys, "bits", "run", "--state", "singlet", "--context", "xxyy", "--seed", "7")
        assert code == 0
        assert doc["bit"] == 1
        assert doc["outcome"] == [-1, -1]

    def test_aa_xyyx(self, capsys):
        code, doc = run(capsys, "bits", "run", "--state", "aa", "--context", "xyyx", "--seed", "1")
        assert code == 0 and doc["bit"] == 0

    def test_raw_amplitudes_are_normalized(self, capsys):
        code, doc = run(capsys, "bits", "run", "--amps", "2,0,0,0,0,0,0,0", "--context", "xyyx")
        assert code == 0
        assert doc["state"][0] == [1.0, 0.0]

    @pytest.mark.parametrize("amps", ["0,0,0,0,0,0,0,1e-9", "1,2,3", "a,b,c,d,e,f,g,h"])
    def test_bad_state(self, capsys, amps):
        assert main(["bits", "run", "--amps", amps]) == 2

    def test_unknown_preset(self, capsys):
        assert main(["bits", "run", "--state", "nope"]) == 2

    def test_sweep(self, capsys):
        code, doc = run(capsys, "bits", "sweep", "--trials", "1000", "--n-states", "2")
        assert code == 0
        assert doc["match_fraction"] == 1.0
        assert doc["n_runs"] == 4000

    def test_replay_identical(self, capsys):
        argv = ["bits", "run", "--state", "plus-y", "--context", "xxyy", "--seed", "99"]
        main(argv)
        first = capsys.readouterr().out
        main(argv)
        assert capsys.readouterr().out == first

    def test_negative_seed_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["bits", "run", "--seed", "-1"])
        assert exc.value.code == 2


class TestFulo:
    def test_fig2(self, capsys):
        code, doc = run(capsys, "fulo", "fig2")
        assert code == 0
        assert all(r["unstable_axes"] == ["x"] for r in doc["reports"])
        assert len(doc["reports"]) == 4

    def test_sequence_xyx(self, capsys):
        code, doc = run(capsys, "fulo", "sequence", "--devices", "+x,+y,+x", "--state", "plus-y", "--q", "0.9")
        assert code == 0
        values = doc["reports"][0]["values_by_axis"]["x"]
        assert values[0] == values[1]
        assert "x" not in doc["reports"][0]["unstable_axes"]

    def test_trajectory_single_packet(self, capsys, tmp_path):
        out = tmp_path / "t.csv"
        code, doc = run(capsys, "fulo", "trajectory", "--p-up", "1", "--q", "0.3", "--out", str(out))
        assert code == 0
        with open(out) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["t", "z"]
        z = [float(r[1]) for r in rows[1:]]
        mid = len(z) // 2
        # straight out, straight back
        assert all(b > a for a, b in zip(z[: mid], z[1 : mid + 1]))
        assert all(b < a for a, b in zip(z[mid:], z[mid + 1 :]))
        assert z[-1] == pytest.approx(z[0], abs=1e-9)
        assert doc["trajectories"][0]["arm"] == "up"

    def test_trajectory_multiple_quantiles(self, capsys, tmp_path):
        out = tmp_path / "t.csv"
        code, doc = run(capsys, "fulo", "trajectory", "--q", "0.2,0.8", "--out", str(out))
        assert code == 0
        assert [t["arm"] for t in doc["trajectories"]] == ["down", "up"]
        assert (tmp_path / "t_q0.2.csv").exists() and (tmp_path / "t_q0.8.csv").exists()

    def test_csv_byte_identical(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["fulo", "trajectory", "--q", "0.6", "--out", str(a)])
        main(["fulo", "trajectory", "--q", "0.6", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_separation_violation(self, capsys):
        assert main(["fulo", "fig2", "--half-duration", "2"]) == 2
        assert main(["fulo", "trajectory", "--half-duration", "2"]) == 2

    def test_bad_dt(self, capsys):
        assert main(["fulo", "trajectory", "--dt", "1"]) == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "pmbits", "pm-verify"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["no_go"]["max_satisfied"] == 5
