import csv
import io
import json
import os
import shutil
from pathlib import Path

import numpy as np
import pytest

from schurnev.cli import main
from schurnev.config import ConfigError, load_config, parse_config
from schurnev.disc import DiscSequence, generate_sequence
from schurnev.kernels import completeness_trace
from schurnev.operators import nehari_lower_bound, theta_conj_b_symbol
from schurnev.oracle import CircleGrid
from schurnev.reports import rows_to_csv
from schurnev.schur import (AtomicSingular, BlaschkeNode, Constant, from_json,
                            inverse_process_III, schur_forward, schur_values)

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(tmp_path, cfg, command=None, *extra, name="out"):
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(cfg) if isinstance(cfg, dict) else cfg)
    command = command or cfg["command"]
    out = tmp_path / name
    code = main([command, "--config", str(path), "--out", str(out), *extra])
    return code, out


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def summary(out):
    return json.loads((out / "summary.json").read_text())


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.json")))
def test_shipped_configs_run(tmp_path, name):
    shutil.copy(CONFIGS / name, tmp_path / "cfg.json")
    cfg = json.loads((CONFIGS / name).read_text())
    out = tmp_path / "o"
    assert main([cfg["command"], "--config", str(tmp_path / "cfg.json"), "--out", str(out),
                 "--grid", "1024", "--no-figures"]) == 0
    s = summary(out)
    assert s["status"] == "ok"
    assert all((out / f).exists() for f in s["files"])


def test_figures_rendered(tmp_path):
    cfg = json.loads((CONFIGS / "schur_forward.json").read_text())
    code, out = run(tmp_path, cfg)
    assert code == 0
    assert (out / "gammas.png").read_bytes()[:4] == b"\x89PNG"


def test_deterministic_outputs(tmp_path):
    cfg = json.loads((CONFIGS / "distance_compare.json").read_text())
    _, a = run(tmp_path, cfg, None, "--grid", "1024", "--no-figures", name="a")
    _, b = run(tmp_path, cfg, None, "--grid", "1024", "--no-figures", name="b")
    files = sorted(os.listdir(a))
    assert files == sorted(os.listdir(b))
    for f in files:
        assert (a / f).read_bytes() == (b / f).read_bytes(), f


def test_seed_changes_random_choices(tmp_path):
    cfg = json.loads((CONFIGS / "distance_compare.json").read_text())
    _, a = run(tmp_path, cfg, None, "--oracle", "off", "--no-figures", name="a")
    _, b = run(tmp_path, cfg, None, "--oracle", "off", "--seed", "2", "--no-figures", name="b")
    assert (a / "dist_mw.csv").read_bytes() != (b / "dist_mw.csv").read_bytes()


# --- error paths -----------------------------------------------------------


def test_unknown_field_is_config_error(tmp_path, capsys):
    cfg = {"command": "schur-forward", "sequence": {"points": [[0.1, 0]]},
           "theta": {"kind": "constant", "value": [0.3, 0]}, "bogus": 1}
    code, out = run(tmp_path, cfg)
    assert code == 2
    err = json.loads((out / "error.json").read_text())
    assert err["kind"] == "config" and "bogus" in err["message"]
    assert "bogus" in capsys.readouterr().err


def test_bad_json_reports_position(tmp_path):
    code, out = run(tmp_path, '{"command": "hankel",\n  "sequence": }', "hankel")
    assert code == 2
    assert "line 2" in json.loads((out / "error.json").read_text())["message"]


def test_command_mismatch(tmp_path):
    cfg = json.loads((CONFIGS / "hankel.json").read_text())
    code, _ = run(tmp_path, cfg, "inverse")
    assert code == 2


def test_nested_field_diagnostics():
    with pytest.raises(ConfigError, match="theta.constant.value"):
        parse_config({"command": "schur-forward", "sequence": {"points": [[0.1, 0]]},
                      "theta": {"kind": "constant", "value": "x"}})
    with pytest.raises(ConfigError, match="exactly one"):
        parse_config({"sequence": {}})


def test_numerical_failure_exit_3(tmp_path):
    # two nodes 1e-9 apart make the kernel Gram numerically singular
    cfg = {"command": "riesz-diagnose", "sequence": {"points": [[0.1, 0.0], [0.1, 1e-9], [0.4, 0.2]]},
           "theta": {"kind": "blaschke", "zeros": [[0.5, 0.0], [-0.2, 0.3], [0.1, -0.6]]}, "oracle": False}
    code, out = run(tmp_path, cfg)
    err = json.loads((out / "error.json").read_text())
    assert code == 3 and err["kind"] == "numerical" and err["type"] == "IllConditioned"
    assert err["condition"] > 1e12
    assert not (out / "summary.json").exists()


# --- command examples ------------------------------------------------------


def test_schur_forward_constant(tmp_path):
    cfg = {"command": "schur-forward", "sequence": {"generator": "geometric", "n": 5},
           "theta": {"kind": "constant", "value": [0.3, 0.0]}}
    code, out = run(tmp_path, cfg, None, "--no-figures")
    assert code == 0
    rows = read_csv(out / "gammas.csv")
    assert [float(r["abs"]) for r in rows] == pytest.approx([0.3, 0, 0, 0, 0], abs=1e-15)


def test_schur_forward_terminates_on_own_zeros(tmp_path):
    cfg = {"command": "schur-forward", "sequence": {"points": [[0.1, 0.2], [-0.3, 0.1], [0.0, -0.5]]},
           "theta": {"kind": "sequence_blaschke"}}
    code, out = run(tmp_path, cfg, None, "--no-figures")
    s = summary(out)
    assert code == 0 and s["terminated_at"] is not None and s["recursion_status"].startswith("terminated")
    assert all(float(r["abs"]) < 1e-12 for r in read_csv(out / "gammas.csv")[:-1])


def test_schur_forward_api_parity(tmp_path):
    cfg = {"command": "schur-forward", "sequence": {"generator": "geometric", "n": 6},
           "theta": {"kind": "atomic", "a": 1.0}, "mu": [[0.2, 0.1]]}
    code, out = run(tmp_path, cfg, None, "--no-figures")
    assert code == 0
    seq = generate_sequence("geometric", 6)
    params, thetas = schur_forward(AtomicSingular(1.0), seq, 6)
    vals = schur_values(thetas, params, seq, 0.2 + 0.1j, len(thetas) - 1)
    expect = rows_to_csv(("mu_index", "k", "re", "im", "abs"),
                         [(0, k, v.real, v.imag, abs(v)) for k, v in enumerate(vals)])
    assert (out / "theta_mu.csv").read_text() == expect


def test_inverse_process_III_depth_one(tmp_path):
    cfg = {"command": "inverse", "sequence": {"points": [[0.3, 0.2], [0.1, 0.0]]},
           "inverse": {"process": "III", "gammas": [[0.0, 0.0]]}}
    code, out = run(tmp_path, cfg, None, "--no-figures")
    assert code == 0
    h = from_json(json.loads((out / "function.json").read_text()))
    z = np.array([0.1, -0.4j, 0.5 + 0.2j])
    lam = 0.3 + 0.2j
    tau = (z - lam) / (1 - np.conj(lam) * z)
    assert np.max(np.abs(h(z) - tau)) < 1e-14
    s = summary(out)
    assert s["boundary_unimodular_dev"] < 1e-9


def test_inverse_summaries(tmp_path):
    code, out = run(tmp_path, json.loads((CONFIGS / "inverse_I.json").read_text()), None, "--no-figures")
    s = summary(out)
    assert code == 0 and s["roundtrip_error"] <= 1e-9 and s["floor_slack"] >= -1e-9
    code, out = run(tmp_path, json.loads((CONFIGS / "inverse_III.json").read_text()), None,
                    "--no-figures", name="iii")
    s = summary(out)
    assert code == 0 and s["roundtrip_error"] <= 1e-9 and s["boundary_unimodular_dev"] <= 1e-9


def test_inverse_api_parity(tmp_path):
    cfg = json.loads((CONFIGS / "inverse_III.json").read_text())
    code, out = run(tmp_path, cfg, None, "--no-figures")
    c = load_config(tmp_path / "out.json")
    g = [complex(*x) for x in c.inverse.gammas]
    h = inverse_process_III(g, c.build_sequence(), len(g))
    assert json.loads((out / "function.json").read_text()) == json.loads(json.dumps(h.to_json()))


def test_distance_compare_one_point(tmp_path):
    cfg = {"command": "distance-compare", "sequence": {"points": [[0.0, 0.0]]},
           "theta": {"kind": "blaschke", "zeros": [[0.0, 0.0], [0.0, 0.0]]}, "mu": [[0.5, 0.0]]}
    code, out = run(tmp_path, cfg, None, "--no-figures")
    assert code == 0
    row = read_csv(out / "trace_mu0.csv")[1]
    assert float(row["closed_form"]) == pytest.approx(0.2, abs=1e-14)
    assert float(row["oracle"]) == pytest.approx(0.2, abs=1e-12)
    assert summary(out)["max_discrepancy"] <= 1e-6


def test_distance_compare_api_parity_and_caveat(tmp_path):
    cfg = {"command": "distance-compare", "sequence": {"generator": "geometric", "n": 4},
           "theta": {"kind": "atomic", "a": 0.5}, "mu": [[0.1, 0.3]], "oracle": False}
    code, out = run(tmp_path, cfg, None, "--no-figures")
    assert code == 0
    tr = completeness_trace(AtomicSingular(0.5), generate_sequence("geometric", 4), 0.1 + 0.3j,
                            n_max=4, oracle=False)
    assert (out / "trace_mu0.csv").read_text() == tr.to_csv()
    code, out = run(tmp_path, cfg, None, "--oracle", "on", "--grid", "1024", "--no-figures", name="on")
    assert summary(out)["oracle_caveat"] is True


def test_riesz_orthonormal_sanity(tmp_path):
    cfg = {"command": "riesz-diagnose", "sequence": {"points": [[0.0, 0.0]]},
           "theta": {"kind": "blaschke", "zeros": [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]},
           "riesz": {"family": "mw_projection"}}
    code, out = run(tmp_path, cfg, None, "--grid", "1024", "--no-figures")
    assert code == 0
    s = summary(out)
    assert s["lambda_min"] == pytest.approx(1, abs=1e-12) and s["lambda_max"] == pytest.approx(1, abs=1e-12)


def test_riesz_process_contrast(tmp_path):
    base = {"command": "riesz-diagnose",
            "sequence": {"generator": "geometric", "n": 8, "params": {"r": 0.6}},
            "mu": [[0.2, -0.3]], "riesz": {"family": "kernels"}, "oracle": False}
    gammas = [[0.3 * 0.5 ** k, 0.0] for k in range(9)]
    cfg_i = dict(base, theta={"kind": "process_I", "gammas": gammas})
    code, out = run(tmp_path, cfg_i, None, "--no-figures", name="pi")
    s = summary(out)
    assert code == 0 and s["lambda_min"] > 0
    trace = [float(r["closed_form"]) for r in read_csv(out / "completeness_mu0.csv")]
    assert trace[-1] > 0.02 and trace[-1] > 0.9 * trace[-2]
    cfg_iii = dict(base, theta={"kind": "process_III", "gammas": gammas[:8]})
    code, out = run(tmp_path, cfg_iii, None, "--no-figures", name="piii")
    trace = [float(r["closed_form"]) for r in read_csv(out / "completeness_mu0.csv")]
    assert code == 0 and trace[-1] < 1e-10 and trace[-1] < trace[0]


def test_hankel_analytic_symbol_gives_zero_sigma(tmp_path):
    cfg = {"command": "hankel", "sequence": {"points": [[0.1, 0.2], [-0.4, 0.0]]},
           "theta": {"kind": "sequence_blaschke"}, "hankel": {"sizes": [4, 8], "k_max": 4}}
    code, out = run(tmp_path, cfg, None, "--grid", "1024", "--no-figures")
    assert code == 0
    assert all(abs(float(r["sigma"])) < 1e-12 for r in read_csv(out / "sigma.csv"))


def test_hankel_process_I_and_pairs(tmp_path):
    cfg = json.loads((CONFIGS / "hankel.json").read_text())
    code, out = run(tmp_path, cfg, None, "--no-figures")
    assert code == 0
    rows = read_csv(out / "nehari.csv")
    assert all(float(r["lower_bound"]) <= float(r["witness_sup"]) < 1 for r in rows)
    s = summary(out)
    assert s["sandwich_ok"] and s["forward_lambda_min"] > 0 and s["backward_lambda_min"] > 0
    pairs = read_csv(out / "cross_basis.csv")
    for side in ("forward", "backward"):
        v = [float(r["vanishing"]) for r in pairs if r["direction"] == side]
        assert all(b < a for a, b in zip(v, v[1:]))


def test_hankel_api_parity(tmp_path):
    cfg = {"command": "hankel", "sequence": {"points": [[0.1, 0.2], [-0.4, 0.0]]},
           "theta": {"kind": "blaschke", "zeros": [[0.5, 0.1]]}, "hankel": {"sizes": [2, 4]}}
    code, out = run(tmp_path, cfg, None, "--grid", "1024", "--no-figures")
    assert code == 0
    seq = DiscSequence((0.1 + 0.2j, -0.4))
    phi = theta_conj_b_symbol(BlaschkeNode((0.5 + 0.1j,)), seq, CircleGrid(1024))
    bounds, raw = nehari_lower_bound(phi, [2, 4], raw=True)
    rows = read_csv(out / "nehari.csv")
    assert [float(r["sigma_max"]) for r in rows] == raw
    assert [float(r["lower_bound"]) for r in rows] == bounds
