import json
import os
import signal
import socket
import subprocess
import sys
import time

import httpx
import pytest

from casescope.cli import main
from casescope.synth import SynthConfig, generate, write_outputs


def _free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def test_synth_command(tmp_path, capsys):
    config_path = tmp_path / "synth.json"
    config_path.write_text(json.dumps({"nCases": 8, "seed": 3}))
    out_dir = tmp_path / "out"
    assert main(["synth", "--config", str(config_path), "--out-dir", str(out_dir)]) == 0
    assert (out_dir / "bundle.json").exists()
    assert (out_dir / "coords.json").exists()
    assert "wrote 8 cases" in capsys.readouterr().out


def test_synth_command_missing_config(tmp_path, capsys):
    code = main(["synth", "--config", str(tmp_path / "nope.json"), "--out-dir", str(tmp_path)])
    assert code == 2
    assert "config_error" in capsys.readouterr().err


def test_serve_command_bad_data_dir(tmp_path, capsys):
    code = main(
        ["serve", "--data-dir", str(tmp_path / "missing"), "--records-path", str(tmp_path / "r.json")]
    )
    assert code == 2


def _wait_ready(base: str, deadline: float) -> None:
    while time.time() < deadline:
        try:
            if httpx.get(f"{base}/ready", timeout=1.0).status_code == 200:
                return
        except httpx.HTTPError:
            time.sleep(0.1)
    raise TimeoutError(f"service at {base} never became ready")


@pytest.mark.skipif(os.name != "posix", reason="uses SIGKILL")
def test_serve_survives_kill(tmp_path):
    data_dir = tmp_path / "data"
    write_outputs(generate(SynthConfig(n_cases=8, seed=3)), data_dir)
    records = tmp_path / "records.json"
    port = _free_port()
    base = f"http://127.0.0.1:{port}"
    args = [
        sys.executable,
        "-m",
        "casescope.cli",
        "serve",
        "--data-dir",
        str(data_dir),
        "--records-path",
        str(records),
        "--port",
        str(port),
    ]

    proc = subprocess.Popen(args, stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
    try:
        _wait_ready(base, time.time() + 20)
        created = httpx.post(
            f"{base}/records", json={"caseId": "c001", "summary": "hard-kill survivor"}
        ).json()
    finally:
        proc.send_signal(signal.SIGKILL)
        proc.wait(timeout=10)

    proc = subprocess.Popen(args, stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
    try:
        _wait_ready(base, time.time() + 20)
        listed = httpx.get(f"{base}/records").json()["items"]
        assert listed == [created]
    finally:
        proc.terminate()
        proc.wait(timeout=10)
