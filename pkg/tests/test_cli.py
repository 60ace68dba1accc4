"""End-to-end runs of the command-line client.

Everything goes through run(argv) with the in-process transport except
one round trip against a live uvicorn instance.
"""

import json
import socket
import subprocess
import sys
import time
from pathlib import Path

import pytest

from lieaffine.cli import run

SAMPLES = Path(__file__).resolve().parent.parent / "samples"
GL2 = str(SAMPLES / "gl2_linear.sys")
GL2_TRACEFUL = str(SAMPLES / "gl2_linear_traceful.sys")
GL2_DET = str(SAMPLES / "gl2_linear_traceful_det.sys")
HEIS = str(SAMPLES / "heis3_invariant.sys")


@pytest.fixture
def noncommuting_file(tmp_path):
    p = tmp_path / "noncomm.sys"
    p.write_text("group glplus dim 2\n"
                 "field X0 = inner [0,1;0,0]\n"
                 "field Y0 = zero\n"
                 "field X1 = inner [0,0;1,0]\n"
                 "field Y1 = zero\n"
                 "drift X0 + Y0\n"
                 "control 1: X1 + Y1\n")
    return str(p)


def test_check_ok(capsys):
    assert run(["check", GL2]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["commuting"] is True
    assert body["dim"] == 4


def test_check_noncommuting_exits_1(noncommuting_file, capsys):
    assert run(["check", noncommuting_file]) == 1
    body = json.loads(capsys.readouterr().out)
    assert body["commuting"] is False


def test_broken_file_exits_2(tmp_path, capsys):
    p = tmp_path / "broken.sys"
    p.write_text("group glplus dim 2\nfield X = inner [1,0;0,oops]\n")
    assert run(["check", str(p)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["kind"] == "parse"


def test_missing_file_exits_2(capsys):
    assert run(["check", "/nonexistent/x.sys"]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["kind"] == "usage"


def test_simulate_writes_csv(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    assert run(["simulate", GL2, "--signal", "0.5:1.0;0.5:-1.0",
                "--samples-per-segment", "2", "--out", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "t,e11,e12,e21,e22"
    assert len(lines) == 6
    ts = [float(ln.split(",")[0]) for ln in lines[1:]]
    assert ts[0] == 0.0 and ts == sorted(ts)


def test_simulate_stdout_matches_out_file(tmp_path, capsys):
    assert run(["simulate", GL2, "--signal", "0.25:0.5"]) == 0
    streamed = capsys.readouterr().out
    out = tmp_path / "t.csv"
    assert run(["simulate", GL2, "--signal", "0.25:0.5", "--out", str(out)]) == 0
    assert out.read_text() == streamed


def test_simulate_noncommuting_exits_1(noncommuting_file, capsys):
    assert run(["simulate", noncommuting_file, "--signal", "0.5:1.0"]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["kind"] == "hypothesis"


def test_simulate_force_exits_0(noncommuting_file, capsys):
    assert run(["simulate", noncommuting_file, "--signal", "0.5:1.0",
                "--method", "product", "--force"]) == 0


def test_simulate_overflow_exits_3(capsys):
    assert run(["simulate", GL2, "--signal", "500:1.0",
                "--method", "rk4", "--dt", "0.5"]) == 3
    err = json.loads(capsys.readouterr().err)
    assert err["kind"] == "numerical"


def test_compare_ok_and_tight_tol(capsys):
    assert run(["compare", GL2, "--signal", "0.5:1.0"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["within"] is True
    # rk4 at default step cannot match 1e-15
    assert run(["compare", GL2, "--signal", "0.5:1.0", "--tol", "1e-15"]) == 1


def test_reach_deterministic(tmp_path):
    a, b, c = (tmp_path / n for n in ("a.csv", "b.csv", "c.csv"))
    args = ["reach", GL2, "--T", "1.0", "--samples", "12", "--seed", "7"]
    assert run(args + ["--out", str(a)]) == 0
    assert run(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert run(["reach", GL2, "--T", "1.0", "--samples", "12", "--seed", "8",
                "--out", str(c)]) == 0
    assert c.read_bytes() != a.read_bytes()
    header = a.read_text().split("\n", 1)[0]
    assert header == "index,e11,e12,e21,e22"


def test_conjugate_det_pair(capsys):
    assert run(["conjugate", GL2_TRACEFUL, GL2_DET, "--hom", "det",
                "--signal", "0.5:1.0;0.5:-1.0"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["pass"] is True


def test_larc(capsys):
    assert run(["larc", HEIS]) == 0
    assert json.loads(capsys.readouterr().out) == {"dim": 3, "full": True, "rank": 3}


def test_unreachable_server_exits_3(capsys):
    assert run(["--server", "http://127.0.0.1:1", "check", GL2]) == 3
    err = json.loads(capsys.readouterr().err)
    assert err["kind"] == "transport"


def test_no_subcommand_exits_2(capsys):
    assert run([]) == 2


def test_live_server_round_trip(capsys):
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    proc = subprocess.Popen(
        [sys.executable, "-m", "uvicorn", "--factory", "lieaffine.service.app:create_app",
         "--host", "127.0.0.1", "--port", str(port), "--log-level", "error"],
        stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
    try:
        base = f"http://127.0.0.1:{port}"
        for _ in range(100):
            if proc.poll() is not None:
                pytest.fail("server exited early")
            try:
                with socket.create_connection(("127.0.0.1", port), timeout=0.2):
                    break
            except OSError:
                time.sleep(0.1)
        else:
            pytest.fail("server never came up")
        assert run(["--server", base, "check", GL2]) == 0
        body = json.loads(capsys.readouterr().out)
        assert body["commuting"] is True
    finally:
        proc.terminate()
        proc.wait(timeout=10)
