import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqfrac.cli import main, run
from seqfrac.config import ConfigError, parse_config

MINIMAL = {
    "alpha": 1, "beta": 1, "h": 1, "N": 10, "dim": 1,
    "A": [[0]], "x_a": [1], "x_0": [0], "gamma": "zero",
}
CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def doc(**over):
    d = dict(MINIMAL)
    d.update(over)
    return json.dumps(d)


def write_config(tmp_path, **over):
    p = tmp_path / "run.json"
    p.write_text(doc(**over))
    return p


# ---------------------------------------------------------------- parsing


def test_minimal_config_defaults():
    cfg = parse_config(doc())
    assert cfg.solver == "recursive" and cfg.kernel == "corrected"
    assert cfg.outputs.trajectory is None and not cfg.checks.positivity
    assert cfg.seed == 0 and cfg.positivity.samples == 32


def test_alpha_out_of_range():
    with pytest.raises(ConfigError) as info:
        parse_config(doc(alpha=1.5))
    (path, reason), = info.value.problems
    assert path == "alpha" and "(0, 1]" in reason


def test_dim_mismatch():
    with pytest.raises(ConfigError) as info:
        parse_config(doc(dim=2, A=[[0, 0], [0, 0]], x_a=[1, 2, 3], x_0=[0, 0]))
    assert [p for p, _ in info.value.problems] == ["x_a"]


def test_all_problems_reported():
    with pytest.raises(ConfigError) as info:
        parse_config(doc(alpha=0, h=-1, N=-3, A=[[0, 1]], solver="magic"))
    paths = {p for p, _ in info.value.problems}
    assert {"alpha", "h", "N", "A[0]", "solver"} <= paths


def test_unknown_keys_are_errors():
    with pytest.raises(ConfigError) as info:
        parse_config(doc(colour="red", checks={"positivity": True, "bogus": 1}))
    assert {p for p, _ in info.value.problems} == {"colour"}
    with pytest.raises(ConfigError) as info:
        parse_config(doc(checks={"positivity": True, "bogus": 1}))
    assert {p for p, _ in info.value.problems} == {"checks.bogus"}


def test_missing_key_and_malformed_document():
    d = dict(MINIMAL)
    del d["gamma"]
    with pytest.raises(ConfigError, match="gamma"):
        parse_config(json.dumps(d))
    with pytest.raises(ConfigError, match="malformed"):
        parse_config("{not json")


def test_gamma_file_missing(tmp_path):
    with pytest.raises(FileNotFoundError):
        parse_config(doc(gamma="nowhere.txt"), base_dir=tmp_path)


def test_gamma_file_too_short(tmp_path):
    (tmp_path / "g.txt").write_text("1\n2\n")
    with pytest.raises(ConfigError, match="need at least 11"):
        parse_config(doc(gamma="g.txt"), base_dir=tmp_path)


def test_linear_series_needs_zero_gamma():
    with pytest.raises(ConfigError):
        parse_config(doc(solver="linear-series", gamma=[1.0]))


finite = st.floats(-10, 10, allow_nan=False)


@given(
    alpha=st.floats(0.01, 1.0), beta=st.floats(0.01, 1.0), h=st.floats(0.01, 5.0),
    N=st.integers(0, 50), dim=st.integers(1, 3), data=st.data(),
)
@settings(max_examples=50)
def test_round_trip(alpha, beta, h, N, dim, data):
    vec = st.lists(finite, min_size=dim, max_size=dim)
    d = {
        "alpha": alpha, "beta": beta, "h": h, "N": N, "dim": dim,
        "A": [data.draw(vec) for _ in range(dim)], "x_a": data.draw(vec), "x_0": data.draw(vec),
        "gamma": data.draw(st.one_of(st.just("zero"), vec)),
        "kernel": data.draw(st.sampled_from(["corrected", "literal"])),
        "solver": data.draw(st.sampled_from(["recursive", "semilinear-series"])),
        "checks": {"positivity": data.draw(st.booleans())},
        "seed": data.draw(st.integers(0, 1000)),
    }
    cfg = parse_config(json.dumps(d))
    assert parse_config(cfg.to_json()) == cfg


# ---------------------------------------------------------------- running


def test_csv_single_row(tmp_path, capsys):
    cfg = parse_config(doc(alpha=0.5, N=0, x_a=[2.5]), base_dir=tmp_path)
    assert run(cfg) == 0
    out = capsys.readouterr().out.splitlines()
    assert out == ["n,t,x_1", "0,-0.5,2.5"]


def test_csv_rows_and_times(tmp_path):
    p = write_config(tmp_path, alpha=0.3, h=0.1, N=57, outputs={"trajectory": "out.csv"})
    assert main(["solve", str(p)]) == 0
    lines = (tmp_path / "out.csv").read_text().splitlines()
    assert len(lines) == 58 + 1
    for n, line in enumerate(lines[1:]):
        t = float(line.split(",")[1])
        ref = n * 0.1 + (0.3 - 1.0) * 0.1
        assert abs(t - ref) <= np.spacing(abs(ref))


def test_csv_with_y_columns(tmp_path):
    p = write_config(tmp_path, dim=2, A=[[0, 1], [-1, 0]], x_a=[1, 0], x_0=[0, 1],
                     checks={"reconstruct_y": True}, outputs={"trajectory": "o.csv"})
    assert main(["solve", str(p)]) == 0
    header = (tmp_path / "o.csv").read_text().splitlines()[0]
    assert header == "n,t,x_1,x_2,y_1,y_2"


def test_solve_is_byte_deterministic(tmp_path):
    p = write_config(tmp_path, alpha=0.4, beta=0.7, h=0.5, N=200, A=[[-0.3]], gamma=[0.2])
    outs = []
    for i in range(2):
        target = tmp_path / f"r{i}.csv"
        assert main(["solve", str(p), "--output", str(target)]) == 0
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]


def test_compare_semilinear_corrected(tmp_path, capsys):
    p = write_config(tmp_path, alpha=0.6, beta=0.8, h=0.5, N=60, dim=2,
                     A=[[-0.4, 0.3], [0.2, -0.1]], x_a=[1, -1], x_0=[0.5, 0.5], gamma=[0.3, -0.2])
    assert main(["compare", str(p)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["discrepancy"]["ok"] and rep["discrepancy"]["max_error"] <= 1e-9
    assert len(rep["discrepancy"]["errors"]) == 61


def test_compare_literal_kernel_flag(tmp_path, capsys):
    p = write_config(tmp_path, alpha=0.6, beta=0.8, h=0.5, N=20, A=[[-0.4]], gamma=[0.3])
    assert main(["compare", str(p), "--kernel", "literal"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["discrepancy"]["solver"] == "semilinear-series[literal]"
    assert 1 in rep["discrepancy"]["flagged_steps"]


def test_positivity_report_local_failure(tmp_path):
    p = write_config(tmp_path, alpha=0.5, beta=0.5, A=[[-2]],
                     checks={"positivity": True}, outputs={"trajectory": "t.csv", "report": "r.json"})
    assert main(["solve", str(p)]) == 0
    rep = json.loads((tmp_path / "r.json").read_text())
    local = rep["positivity"]["local"]
    assert (local["verdict"], local["row"], local["col"], local["value"]) == ("LocalCriterionFails", 0, 0, -1.0)
    assert main(["solve", str(p), "--fail-on-violation"]) == 3


def test_positivity_subcommand_flags(tmp_path, capsys):
    p = write_config(tmp_path, alpha=0.5, beta=0.5, A=[[-0.5]], x_0=[0.1])
    assert main(["positivity", str(p), "--tau", "1", "--samples", "4", "--fail-on-violation"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["positivity"]["sampled"]["samples"] == 4
    assert rep["positivity"]["trajectory"]["horizon"] == 1


def test_exit_codes(tmp_path):
    bad = write_config(tmp_path, alpha=1.5)
    assert main(["solve", str(bad)]) == 1
    missing = write_config(tmp_path, gamma="absent.txt")
    assert main(["solve", str(missing)]) == 1
    blowup = write_config(tmp_path, N=5000, A=[[1e3]], x_0=[1], outputs={"report": "r.json"})
    assert main(["solve", str(blowup)]) == 2
    rep = json.loads((tmp_path / "r.json").read_text())
    assert rep["error"]["type"] == "NonFiniteStateError"


def test_gamma_file_run(tmp_path):
    np.savetxt(tmp_path / "g.txt", np.linspace(0, 1, 22).reshape(11, 2))
    p = write_config(tmp_path, dim=2, A=[[0, 0], [0, 0]], x_a=[0, 0], x_0=[0, 0], gamma="g.txt",
                     outputs={"trajectory": "t.csv"})
    assert main(["solve", str(p)]) == 0
    last = (tmp_path / "t.csv").read_text().splitlines()[-1]
    assert float(last.split(",")[2]) > 0


def test_shipped_configs_parse():
    files = sorted(CONFIGS.glob("*.json"))
    assert files
    for f in files:
        parse_config(f.read_text(), base_dir=CONFIGS)


# ---------------------------------------------------------------- verify


def test_verify_default_and_seed_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["verify", "--seed", "5", "--report", str(a)]) == 0
    assert main(["verify", "--seed", "5", "--report", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    out = capsys.readouterr().out
    assert out.count("PASS") == 10


def test_verify_negative_control(capsys):
    assert main(["verify", "--perturb-kernel", "1e-6"]) == 1
    err = capsys.readouterr().err
    assert "phi_recurrence" in err


def test_console_entry_point(tmp_path):
    p = write_config(tmp_path, N=3)
    res = subprocess.run([sys.executable, "-m", "seqfrac.cli", "solve", str(p)], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.splitlines()[0] == "n,t,x_1"
