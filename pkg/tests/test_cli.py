"""Command-line behavior: exit codes, determinism, and workflows."""

import json

import pytest

from wexfab.cli import main


def run_cli(*argv, capsys=None):
    code = main(list(argv))
    if capsys is None:
        return code, "", ""
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestExitCodes:
    def test_usage_error_is_2(self, capsys):
        assert main(["no-such-command"]) == 2
        assert main([]) == 2

    def test_validate_ok_is_0(self, samples_dir, capsys):
        assert main(["validate", str(samples_dir / "google-task.wdl")]) == 0

    def test_validate_cycle_is_1(self, samples_dir, capsys):
        code = main(["validate", str(samples_dir / "cyclic.wdl")])
        out = capsys.readouterr().out
        assert code == 1
        assert "CYCLE" in out

    def test_parse_error_is_1(self, tmp_path, capsys):
        bad = tmp_path / "bad.wdl"
        bad.write_text("<source name='x'><oops name='y'/></source>")
        assert main(["validate", str(bad)]) == 1
        assert "UNKNOWN_OPERATOR" in capsys.readouterr().err

    def test_missing_file_is_1(self, capsys):
        assert main(["validate", "/no/such/file.wdl"]) == 1


class TestRun:
    def test_google_task_offline(self, samples_dir, google_fixtures, tmp_path, capsys):
        report_path = tmp_path / "report.json"
        code = main([
            "run", str(samples_dir / "google-task.wdl"),
            "--offline", str(google_fixtures),
            "--report", str(report_path),
        ])
        assert code == 0
        report = json.loads(report_path.read_text())
        assert set(report["operators"]) == {"search", "parse", "urls", "head", "meta"}
        assert len(report["terminal"]) == 3

    def test_repeated_runs_byte_identical(self, samples_dir, google_fixtures, tmp_path):
        paths = [tmp_path / "a.json", tmp_path / "b.json"]
        for path in paths:
            assert main([
                "run", str(samples_dir / "google-task.wdl"),
                "--offline", str(google_fixtures),
                "--report", str(path),
            ]) == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_fixture_dir_from_environment(self, samples_dir, google_fixtures,
                                          tmp_path, monkeypatch):
        monkeypatch.setenv("WEXFAB_FIXTURES", str(google_fixtures))
        report_path = tmp_path / "report.json"
        assert main([
            "run", str(samples_dir / "google-task.wdl"), "--report", str(report_path),
        ]) == 0
        assert len(json.loads(report_path.read_text())["terminal"]) == 3

    def test_sink_out_matches_golden(self, samples_dir, dblp_fixtures, tmp_path):
        sink = tmp_path / "inserts.sql"
        assert main([
            "run", str(samples_dir / "dblp-task.wdl"),
            "--offline", str(dblp_fixtures),
            "--report", str(tmp_path / "r.json"),
            "--sink-out", str(sink),
        ]) == 0
        golden = (samples_dir / "golden" / "dblp-inserts.sql").read_bytes()
        assert sink.read_bytes() == golden

    def test_trace_lines_printed(self, samples_dir, dblp_fixtures, tmp_path, capsys):
        assert main([
            "run", str(samples_dir / "dblp-task.wdl"),
            "--offline", str(dblp_fixtures),
            "--report", str(tmp_path / "r.json"),
            "--trace",
        ]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert "init in url" in lines
        assert "fl out response" in lines


class TestWrapperWorkflow:
    def test_learn_extract_eval_round(self, samples_dir, tmp_path, capsys):
        wrapper_path = tmp_path / "wrapper.json"
        code = main([
            "learn",
            "--corpus", str(samples_dir / "docs"),
            "--examples", str(samples_dir / "conference-examples.jsonl"),
            "--out", str(wrapper_path),
            "--left", "1", "--right", "1",
        ])
        assert code == 0
        assert wrapper_path.exists()

        records_path = tmp_path / "records.jsonl"
        code = main([
            "extract",
            "--wrapper", str(wrapper_path),
            "--docs", str(samples_dir / "docs"),
            "--out", str(records_path),
        ])
        assert code == 0
        extracted = [json.loads(line) for line in records_path.read_text().splitlines()]
        assert {r["acronyme"] for r in extracted} == {"SIGMOD", "KDD", "WWW"}

        capsys.readouterr()
        code = main([
            "eval",
            "--wrapper", str(wrapper_path),
            "--docs", str(samples_dir / "docs"),
            "--truth", str(samples_dir / "conference-truth.jsonl"),
            "--source", "dblp",
            "--examples-count", "2",
        ])
        assert code == 0
        table = capsys.readouterr().out
        assert table.splitlines()[1].split() == ["dblp", "2", "6", "3", "0.50", "1.00"]

    def test_eval_writes_jsonl_and_figure(self, samples_dir, tmp_path):
        wrapper_path = tmp_path / "wrapper.json"
        main([
            "learn",
            "--corpus", str(samples_dir / "docs"),
            "--examples", str(samples_dir / "conference-examples.jsonl"),
            "--out", str(wrapper_path),
            "--left", "1", "--right", "1",
        ])
        jsonl = tmp_path / "rows.jsonl"
        plot = tmp_path / "rows.png"
        code = main([
            "eval",
            "--wrapper", str(wrapper_path),
            "--docs", str(samples_dir / "docs"),
            "--truth", str(samples_dir / "conference-truth.jsonl"),
            "--jsonl", str(jsonl),
            "--plot", str(plot),
        ])
        assert code == 0
        row = json.loads(jsonl.read_text().splitlines()[0])
        assert row["retrieved"] == 3
        assert plot.stat().st_size > 0
        assert plot.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_extract_determinism(self, samples_dir, tmp_path):
        wrapper_path = tmp_path / "wrapper.json"
        main([
            "learn",
            "--corpus", str(samples_dir / "docs"),
            "--examples", str(samples_dir / "conference-examples.jsonl"),
            "--out", str(wrapper_path),
            "--left", "1", "--right", "1",
        ])
        outs = []
        for name in ("one.jsonl", "two.jsonl"):
            path = tmp_path / name
            main(["extract", "--wrapper", str(wrapper_path),
                  "--docs", str(samples_dir / "docs"), "--out", str(path)])
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]


class TestPolicyCommands:
    def test_policy_eval_prints_plan(self, samples_dir, capsys):
        code = main([
            "policy", "eval",
            "--policy", str(samples_dir / "bandwidth-policy.xml"),
            "--props", str(samples_dir / "props-low-bandwidth.txt"),
        ])
        out = capsys.readouterr().out
        assert code == 0
        assert "detach VideoService" in out
        assert "update AudioService SoundEncoder=classLpc" in out

    def test_policy_eval_high_bandwidth_empty_plan(self, samples_dir, capsys):
        code = main([
            "policy", "eval",
            "--policy", str(samples_dir / "bandwidth-policy.xml"),
            "--props", str(samples_dir / "props-high-bandwidth.txt"),
        ])
        out = capsys.readouterr().out
        assert code == 0
        assert "0 rule(s) triggered" in out
        assert "detach" not in out

    def test_policy_apply_directive_scenario(self, samples_dir, dblp_fixtures, tmp_path, capsys):
        registry_path = tmp_path / "reg.json"
        registry_path.write_text((samples_dir / "registry-session.json").read_text())
        code = main([
            "policy", "apply",
            "--policy", str(samples_dir / "dblp-directive.xml"),
            "--registry", str(registry_path),
            "--offline", str(dblp_fixtures),
        ])
        out = capsys.readouterr().out
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "detach tchat"
        assert lines[1] == "detach mail"
        assert lines[2] == "attach fetch"
        assert lines[3].startswith("attach extract")
        snapshot = json.loads(registry_path.read_text())
        assert [s["name"] for s in snapshot["services"]] == ["parse", "fetch", "extract", "db"]

    def test_policy_apply_dry_run_keeps_registry(self, samples_dir, dblp_fixtures, tmp_path, capsys):
        registry_path = tmp_path / "reg.json"
        original = (samples_dir / "registry-session.json").read_text()
        registry_path.write_text(original)
        code = main([
            "policy", "apply",
            "--policy", str(samples_dir / "dblp-directive.xml"),
            "--registry", str(registry_path),
            "--task", str(samples_dir / "dblp-task.wdl"),
            "--dry-run",
        ])
        assert code == 0
        assert registry_path.read_text() == original

    def test_policy_apply_system_policy_needs_props(self, samples_dir, tmp_path, capsys):
        registry_path = tmp_path / "reg.json"
        code = main([
            "policy", "apply",
            "--policy", str(samples_dir / "bandwidth-policy.xml"),
            "--registry", str(registry_path),
        ])
        assert code == 2

    def test_policy_apply_rejection_is_1(self, samples_dir, tmp_path, capsys):
        registry_path = tmp_path / "reg.json"  # fresh registry: no VideoService
        code = main([
            "policy", "apply",
            "--policy", str(samples_dir / "bandwidth-policy.xml"),
            "--registry", str(registry_path),
            "--props", str(samples_dir / "props-low-bandwidth.txt"),
        ])
        assert code == 1
        assert "UNKNOWN_SERVICE" in capsys.readouterr().err
