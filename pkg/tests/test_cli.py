import json
import os

import numpy as np
import pytest

from icregime import regions
from icregime.cli_interface import EXIT_FAILED, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, build_parser, config_from_args, main
from icregime.model import bec, bsc, channel_to_spec
from icregime.report_logger import ReportLogger
from icregime.verifier import make_degraded_channel

from conftest import WORKED_EXAMPLE


def _gaussian(gains):
    return {"type": "gaussian_ic", "gains": gains, "powers": [1.0] * len(gains)}


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def _report(capsys, argv):
    code, out = _run(capsys, argv)
    return code, json.loads(out)


@pytest.fixture
def worked(write_spec):
    return write_spec(_gaussian(WORKED_EXAMPLE), "worked.json")


@pytest.fixture
def all_ones(write_spec):
    return write_spec(_gaussian(np.ones((3, 3)).tolist()), "ones.json")


@pytest.fixture
def weak(write_spec):
    gains = np.full((3, 3), 0.1)
    np.fill_diagonal(gains, 1.0)
    return write_spec(_gaussian(gains.tolist()), "weak.json")


@pytest.fixture
def degraded_spec(write_spec):
    return write_spec(channel_to_spec(make_degraded_channel(bsc(0.1), bsc(0.125))), "degraded.json")


@pytest.fixture
def anti_degraded_spec(write_spec):
    ch = make_degraded_channel(bsc(0.1), bsc(0.125)).swap_outputs()
    return write_spec(channel_to_spec(ch), "anti.json")


def test_config_from_args_collects_verb_options():
    args = build_parser().parse_args(["membership", "in.json", "--rates", "0.1,0.2", "--tol", "membership=1e-9"])
    config = config_from_args(args)
    assert config.command == "membership"
    assert config.options["rates"] == [0.1, 0.2]
    assert config.tolerance_overrides == {"membership": 1e-9}


def test_check_gaussian_passes_the_worked_example(capsys, worked):
    code, report = _report(capsys, ["check-gaussian", worked, "--no-timestamp"])
    assert code == EXIT_OK
    assert report["pass"] is True
    assert report["alphas"] == pytest.approx([0.5, 0.333333, 0.5])
    assert report["exit_code"] == 0


def test_check_gaussian_failure_exit_code(capsys, weak):
    code, report = _report(capsys, ["check-gaussian", weak, "--no-timestamp"])
    assert code == EXIT_FAILED
    assert report["pass"] is False
    assert report["failures"]


def test_check_3user_and_variant(capsys, worked, all_ones):
    assert _report(capsys, ["check-3user", worked])[0] == EXIT_OK
    code, report = _report(capsys, ["check-variant46", all_ones])
    assert code == EXIT_OK
    assert report["notes"]


def test_sum_capacity_is_printed_at_fixed_precision(capsys, all_ones):
    code, out = _run(capsys, ["sum-capacity", all_ones, "--no-timestamp"])
    assert code == EXIT_OK
    assert '"sum_capacity": 1.000000' in out


def test_sum_capacity_reports_the_attained_sum_rate(capsys, worked, all_ones):
    code, report = _report(capsys, ["sum-capacity", worked])
    assert code == EXIT_OK
    assert report["max_sum_rate"] == pytest.approx(1.5, abs=1e-6)
    assert report["full_set_binds"] is False
    assert _report(capsys, ["sum-capacity", all_ones])[1]["full_set_binds"] is True


def test_precision_flag(capsys, worked):
    code, out = _run(capsys, ["sum-capacity", worked, "--precision", "3", "--no-timestamp"])
    assert code == EXIT_OK
    assert '"sum_capacity": 2.230' in out


def test_membership_exit_codes(capsys, all_ones):
    code, report = _report(capsys, ["membership", all_ones, "--rates", "0.5,0.5,0"])
    assert code == EXIT_FAILED
    assert report["violated"] == [[1, 2]]
    assert _report(capsys, ["membership", all_ones, "--rates", "0.3,0.3,0.3"])[0] == EXIT_OK


def test_missing_field_reports_the_field(capsys, write_spec):
    path = write_spec({"type": "gaussian_ic", "gains": [[1.0, 2.0], [2.0, 1.0]]})
    code, report = _report(capsys, ["check-gaussian", path])
    assert code == EXIT_USAGE
    assert report["field"] == "powers"
    assert "error" in report


def test_wrong_channel_type_for_the_verb(capsys, degraded_spec):
    code, report = _report(capsys, ["check-gaussian", degraded_spec])
    assert code == EXIT_USAGE
    assert report["field"] == "type"


def test_unknown_verb_and_missing_input(capsys, worked):
    assert main(["teleport", worked]) == EXIT_USAGE
    capsys.readouterr()
    code, report = _report(capsys, ["sum-capacity"])
    assert code == EXIT_USAGE
    assert "channel-spec" in report["error"]


def test_csv_refused_for_report_only_verbs(capsys, worked):
    code, report = _report(capsys, ["check-gaussian", worked, "--format", "csv"])
    assert code == EXIT_USAGE
    assert "csv" in report["error"]


def test_unknown_tolerance_name(capsys, worked):
    code, report = _report(capsys, ["check-gaussian", worked, "--tol", "bogus=1"])
    assert code == EXIT_USAGE
    assert "bogus" in report["error"]


def test_rejected_arguments_are_usage_errors(capsys, all_ones):
    code, report = _report(capsys, ["support", all_ones, "--direction", "1,-1,0"])
    assert code == EXIT_USAGE
    assert "nonnegative" in report["error"]


def test_internal_value_errors_are_runtime_failures(capsys, monkeypatch, worked):
    def broken(ic):
        raise ValueError("math domain error")

    monkeypatch.setattr(regions, "sum_capacity", broken)
    code, report = _report(capsys, ["sum-capacity", worked])
    assert code == EXIT_NUMERIC
    assert report["error"] == "math domain error"


def test_reports_are_byte_stable_without_timestamps(tmp_path, degraded_spec):
    outputs = []
    for name in ("first.json", "second.json"):
        out = tmp_path / name
        code = main(["lemma1", degraded_spec, "--samples", "40", "--seed", "4", "--no-timestamp",
                     "--output", str(out)])
        assert code == EXIT_OK
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
    assert b"elapsed_ms" not in outputs[0]


def test_timestamped_reports_carry_timings(capsys, degraded_spec):
    code, report = _report(capsys, ["grid-gap", degraded_spec, "--resolution", "4"])
    assert code == EXIT_OK
    assert "elapsed_ms" in report


def test_region_csv(capsys, all_ones):
    code, out = _run(capsys, ["region", all_ones, "--format", "csv"])
    lines = out.splitlines()
    assert code == EXIT_OK
    assert lines[0] == "subset,bound,argmin_receivers"
    assert lines[1] == "1,0.500000,1 2 3"
    assert len(lines) == 8


def test_vertices_csv(capsys, write_spec):
    path = write_spec(_gaussian([[1.0, 1.0], [1.0, 1.0]]))
    code, out = _run(capsys, ["vertices", path, "--format", "csv"])
    lines = out.splitlines()
    assert code == EXIT_OK
    assert lines[0] == "r1,r2"
    assert "0.500000,0.292481" in lines
    assert len(lines) == 6


def test_slice_writes_csv_and_plot_script(tmp_path, all_ones):
    data, script = tmp_path / "slice.csv", tmp_path / "slice.gp"
    code = main(["slice", all_ones, "--fix", "3=0", "--format", "csv", "--output", str(data),
                 "--script", str(script)])
    assert code == EXIT_OK
    lines = data.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("# slice with fixed r3=0.000000")
    assert lines[1] == "x,y"
    assert lines[2] == lines[-1]
    assert str(data) in script.read_text(encoding="utf-8")


def test_slice_script_needs_csv_output(capsys, all_ones, tmp_path):
    code, report = _report(capsys, ["slice", all_ones, "--fix", "3=0", "--script", str(tmp_path / "p.gp")])
    assert code == EXIT_USAGE


def test_support_verb(capsys, all_ones):
    code, report = _report(capsys, ["support", all_ones, "--direction", "1,1,0"])
    assert code == EXIT_OK
    assert report["support"] == pytest.approx(0.792481, abs=1e-6)


def test_redundancy_verb(capsys, worked, weak):
    code, report = _report(capsys, ["redundancy", worked])
    assert code == EXIT_OK
    assert report["equivalent"] is True
    code, report = _report(capsys, ["redundancy", weak])
    assert code == EXIT_FAILED
    assert "not in declared regime" in report["error"]


def test_regime_list_csv(capsys):
    code, out = _run(capsys, ["regime-list", "--k", "3", "--format", "csv"])
    lines = out.splitlines()
    assert code == EXIT_OK
    assert len(lines) == 1 + 3 * 3
    assert lines[1] == "cyclic-shift-0,1,2 3,1,3,1,1|2 3"


def test_regime_list_variant(capsys):
    code, report = _report(capsys, ["regime-list", "--k", "3", "--variant", "46"])
    assert code == EXIT_OK
    assert len(report["regimes"][0]["inequalities"]) == 4
    assert _report(capsys, ["regime-list", "--k", "4", "--variant", "46"])[0] == EXIT_USAGE


def test_grid_gap_exit_codes(capsys, degraded_spec, anti_degraded_spec):
    assert _report(capsys, ["grid-gap", degraded_spec])[0] == EXIT_OK
    code, report = _report(capsys, ["grid-gap", anti_degraded_spec, "--no-timestamp"])
    assert code == EXIT_FAILED
    assert report["min_gap"] <= -0.25
    assert report["mode"] == "grid"


def test_grid_cap_environment_variable(capsys, monkeypatch, degraded_spec):
    monkeypatch.setenv("ICREGIME_MAX_GRID", "3")
    code, report = _report(capsys, ["grid-gap", degraded_spec])
    assert code == EXIT_OK
    assert report["mode"] == "sampled"


@pytest.mark.parametrize("verb,extra", [
    ("lemma1", ["--d-size", "2"]),
    ("lemma3", []),
    ("lemma4", ["--u-size", "2"]),
])
def test_sampled_lemma_verbs(capsys, degraded_spec, verb, extra):
    code, report = _report(capsys, [verb, degraded_spec, "--samples", "30"] + extra)
    assert code == EXIT_OK
    assert report["operation"] == verb
    assert report["n_evaluated"] == 30


def test_corollary_verb_validates_the_moved_inputs(capsys, degraded_spec):
    code, report = _report(capsys, ["corollary1", degraded_spec, "--lhs-fixed", "2", "--samples", "5"])
    assert code == EXIT_USAGE


def test_degrade_test(capsys, write_spec):
    forward = write_spec({"type": "broadcast", "marginals": [bsc(0.1).tolist(), bsc(0.2).tolist()]}, "f.json")
    code, report = _report(capsys, ["degrade-test", forward])
    assert code == EXIT_OK
    assert report["second_degraded_from_first"]["degraded"] is True
    assert report["first_degraded_from_second"]["degraded"] is False
    mixed = write_spec({"type": "broadcast", "marginals": [bsc(0.1).tolist(), bec(0.4).tolist()]}, "m.json")
    assert _report(capsys, ["degrade-test", mixed])[0] == EXIT_FAILED


def test_degrade_test_with_a_second_file(capsys, write_spec):
    first = write_spec({"type": "broadcast", "marginals": [bsc(0.1).tolist()]}, "one.json")
    second = write_spec({"type": "broadcast", "marginals": [bsc(0.2).tolist()]}, "two.json")
    assert _report(capsys, ["degrade-test", first, "--second", second])[0] == EXIT_OK


def test_broadcast_verbs(capsys, write_spec):
    path = write_spec({"type": "broadcast", "marginals": [bsc(0.1).tolist(), bec(0.4).tolist()]})
    code, report = _report(capsys, ["bc-order", path, "--resolution", "128"])
    assert code == EXIT_OK
    assert report["order"] == [2, 1]
    code, report = _report(capsys, ["bc-sumcap", path, "--strongest", "2"])
    assert code == EXIT_OK
    assert report["capacity"] == pytest.approx(0.6, abs=1e-6)


def test_degraded_equivalent_verb(capsys, write_spec):
    good = write_spec({"type": "two_output_system", "mu1": 1, "mu2": 1, "a": [1.0, 0.0], "b": [2.0, 1.0]}, "g.json")
    code, report = _report(capsys, ["degraded-equivalent", good])
    assert code == EXIT_OK
    assert report["alpha"] == pytest.approx(0.5)
    assert report["x_coeffs"] == pytest.approx([-0.5])
    assert report["conditional_variance"] == pytest.approx(1.0)
    bad = write_spec({"type": "two_output_system", "mu1": 2, "mu2": 0, "a": [1.0, 2.0], "b": [2.0, 3.0]}, "b.json")
    assert _report(capsys, ["degraded-equivalent", bad])[0] == EXIT_FAILED


def test_session_log_is_written(capsys, monkeypatch, tmp_path, worked):
    monkeypatch.setenv("ICREGIME_LOG_DIR", str(tmp_path / "logs"))
    assert main(["sum-capacity", worked]) == EXIT_OK
    capsys.readouterr()
    files = os.listdir(tmp_path / "logs")
    assert len(files) == 1
    entries = ReportLogger.read_log(str(tmp_path / "logs" / files[0]))
    assert entries[-1]["operation"] == "sum-capacity"
    assert "timestamp" in entries[-1]
