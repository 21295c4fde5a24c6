from __future__ import annotations

import json

import httpx
import pytest
import yaml

from carbonsched import cli
from carbonsched.config import default_config
from carbonsched.service import create_app


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "experiment.yaml"
    path.write_text(yaml.safe_dump(default_config().model_dump(mode="json")))
    return path


class TestValidate:
    def test_ok(self, config_file, capsys):
        code = cli.main(["validate", "--config", str(config_file)])
        assert code == 0
        assert "valid (digest " in capsys.readouterr().out

    def test_defaults_when_no_config_given(self, capsys):
        assert cli.main(["validate"]) == 0
        assert "valid" in capsys.readouterr().out

    def test_bad_config(self, tmp_path, capsys):
        path = tmp_path / "bad.yaml"
        data = default_config().model_dump(mode="json")
        data["modes"] = ["thrifty"]
        path.write_text(yaml.safe_dump(data))
        code = cli.main(["validate", "--config", str(path)])
        assert code == 2
        assert "thrifty" in capsys.readouterr().err

    def test_missing_file(self, tmp_path, capsys):
        code = cli.main(["validate", "--config", str(tmp_path / "nope.yaml")])
        assert code == 2


class TestCompare:
    def test_writes_reports(self, config_file, tmp_path, capsys):
        out = tmp_path / "out"
        code = cli.main(["compare", "--config", str(config_file), "--out", str(out)])
        assert code == 0
        for name in ("report.json", "report.csv", "report.md", "overhead.json"):
            assert (out / name).exists()
        printed = capsys.readouterr().out
        assert "monolithic" in printed and "green" in printed

    def test_reruns_are_byte_identical(self, config_file, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert cli.main(["compare", "--config", str(config_file), "--out", str(out_a)]) == 0
        assert cli.main(["compare", "--config", str(config_file), "--out", str(out_b)]) == 0
        for name in ("report.json", "report.csv", "report.md"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_format_filter(self, config_file, tmp_path):
        out = tmp_path / "out"
        code = cli.main(["compare", "--config", str(config_file), "--out", str(out), "--format", "json"])
        assert code == 0
        assert (out / "report.json").exists()
        assert not (out / "report.csv").exists()
        assert not (out / "report.md").exists()

    def test_seed_override_lands_in_report(self, config_file, tmp_path):
        out = tmp_path / "out"
        assert cli.main(["compare", "--config", str(config_file), "--out", str(out), "--seed", "7"]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["seed"] == 7

    def test_out_path_collision_is_io_error(self, config_file, tmp_path, capsys):
        blocker = tmp_path / "blocked"
        blocker.write_text("a file, not a directory")
        code = cli.main(["compare", "--config", str(config_file), "--out", str(blocker)])
        assert code == 4


class TestSweep:
    def test_step_override(self, config_file, tmp_path, capsys):
        out = tmp_path / "out"
        code = cli.main(
            ["sweep", "--config", str(config_file), "--out", str(out), "--sweep-step", "0.5"]
        )
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert [point["w_c"] for point in report["series"]] == [0.0, 0.5, 1.0]
        assert "settles on node-green from w_c=0.5" in capsys.readouterr().out


class TestPartition:
    def test_bundled_model(self, capsys):
        code = cli.main(
            [
                "partition",
                "--model",
                "mobilenet_v2_sim",
                "--capacities",
                "1.0,0.6,0.4",
                "--node-ids",
                "node-high,node-medium,node-green",
            ]
        )
        assert code == 0
        printed = capsys.readouterr().out
        assert printed.count("layers [") == 3
        assert "bottleneck" in printed

    def test_json_output(self, capsys):
        code = cli.main(["partition", "--model", "mobilenet_v2_sim", "--capacities", "1.0,1.0", "--json"])
        assert code == 0
        body = json.loads(capsys.readouterr().out)
        assert len(body["segments"]) == 2
        assert body["segments"][0]["start"] == 0

    def test_layers_file(self, tmp_path, capsys):
        layers = [
            {"name": f"fc{i}", "kind": "linear", "in_features": 32, "out_features": 32}
            for i in range(4)
        ]
        path = tmp_path / "layers.yaml"
        path.write_text(yaml.safe_dump(layers))
        code = cli.main(["partition", "--layers", str(path), "--capacities", "1.0,1.0", "--json"])
        assert code == 0
        body = json.loads(capsys.readouterr().out)
        assert body["boundaries"] == [2]

    def test_bad_capacities(self, capsys):
        code = cli.main(["partition", "--model", "mobilenet_v2_sim", "--capacities", "abc"])
        assert code == 2

    def test_unknown_model(self, capsys):
        code = cli.main(["partition", "--model", "resnet_9000", "--capacities", "1.0"])
        assert code == 2
        assert "resnet_9000" in capsys.readouterr().err

    def test_too_many_segments(self, capsys):
        code = cli.main(["partition", "--model", "mobilenet_v2_sim", "--capacities", ",".join(["0.5"] * 20)])
        assert code == 2


class TestRemote:
    @pytest.fixture(autouse=True)
    def asgi_backend(self, monkeypatch):
        from fastapi.testclient import TestClient

        app = create_app()

        def make_client(server: str) -> httpx.Client:
            return TestClient(app, base_url=server)

        monkeypatch.setattr(cli, "_make_client", make_client)

    def test_remote_compare_matches_local(self, config_file, tmp_path):
        local, remote = tmp_path / "local", tmp_path / "remote"
        assert cli.main(["compare", "--config", str(config_file), "--out", str(local)]) == 0
        assert (
            cli.main(
                ["compare", "--config", str(config_file), "--out", str(remote), "--server", "http://sv"]
            )
            == 0
        )
        local_report = json.loads((local / "report.json").read_text())
        remote_report = json.loads((remote / "report.json").read_text())
        assert local_report == remote_report

    def test_remote_validate(self, config_file, capsys):
        assert cli.main(["validate", "--config", str(config_file), "--server", "http://sv"]) == 0
        assert "valid" in capsys.readouterr().out

    def test_remote_rejects_bad_config(self, tmp_path, capsys):
        data = default_config().model_dump(mode="json")
        data["pue"] = 0.1
        path = tmp_path / "bad.yaml"
        path.write_text(yaml.safe_dump(data))
        code = cli.main(["compare", "--config", str(path), "--out", str(tmp_path / "o"), "--server", "http://sv"])
        assert code == 2

    def test_remote_partition(self, capsys):
        code = cli.main(
            ["partition", "--model", "mobilenet_v2_sim", "--capacities", "1.0,1.0", "--server", "http://sv", "--json"]
        )
        assert code == 0
        body = json.loads(capsys.readouterr().out)
        assert len(body["segments"]) == 2

    def test_unreachable_server(self, config_file, tmp_path, monkeypatch, capsys):
        def make_client(server: str) -> httpx.Client:
            return httpx.Client(base_url="http://127.0.0.1:1", timeout=0.2)

        monkeypatch.setattr(cli, "_make_client", make_client)
        code = cli.main(
            ["compare", "--config", str(config_file), "--out", str(tmp_path / "o"), "--server", "http://sv"]
        )
        assert code == 3
