"""Command runners behind the CLI.

Each runner takes a validated :class:`ExperimentConfig` and returns a
:class:`RunResult`: CSV tables, JSON documents, figure data and a summary.
Every table row comes from one library call, so the files can be
reproduced from Python without the CLI.
"""
from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .config import ConfigError, ExperimentConfig, HankelSpec, RieszSpec, _c
from .disc import DiscSequence, generate_sequence
from .kernels import (KernelFamilySpec, completeness_trace, dist_mw, dist_plmu,
                      gram_kernels, verify_useful_identity)
from .operators import (aos_tail_constants, compactness_profile, cross_basis_experiment,
                        mw_projection_gram, nehari_lower_bound, orthogonalizer_norm_trace,
                        riesz_profile, theta_conj_b_symbol)
from .oracle import (CircleGrid, lemma_g_check, oracle_dist_mw, oracle_dist_plmu,
                     with_drift)
from .schur import (boundary_floor_check, boundary_modulus, cauchy_sequence_probe,
                    inverse_process_I, inverse_process_II, inverse_process_III,
                    roundtrip_check, schur_forward, schur_values, summability_check)


@dataclass
class RunResult:
    tables: dict = field(default_factory=dict)   # file name -> CSV text
    documents: dict = field(default_factory=dict)  # file name -> JSON-able object
    figures: dict = field(default_factory=dict)  # file name -> (kind, data)
    summary: dict = field(default_factory=dict)


def rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _has_atoms(theta) -> bool:
    return bool(theta.atoms())


def _depth(cfg: ExperimentConfig, seq: DiscSequence) -> int:
    d = len(seq) if cfg.depth is None else cfg.depth
    if d > len(seq):
        raise ConfigError(f"depth {d} exceeds the sequence length {len(seq)}")
    return d


# ---------------------------------------------------------------------------


def run_schur_forward(cfg: ExperimentConfig) -> RunResult:
    rng = cfg.rng()
    seq = cfg.build_sequence()
    theta = cfg.build_theta(seq, rng)
    mus = cfg.build_mu(seq, rng)
    n = _depth(cfg, seq)
    params, thetas = schur_forward(theta, seq, n)
    sums, flag = summability_check(params)
    res = RunResult()
    res.tables["gammas.csv"] = rows_to_csv(
        ("k", "re", "im", "abs", "partial_sum_abs"),
        [(k, g.real, g.imag, abs(g), s) for k, (g, s) in enumerate(zip(params.gammas, sums))])
    reach = len(thetas) - 1
    rows = []
    for i, mu in enumerate(mus):
        vals = schur_values(thetas, params, seq, mu, reach)
        rows += [(i, k, v.real, v.imag, abs(v)) for k, v in enumerate(vals)]
    res.tables["theta_mu.csv"] = rows_to_csv(("mu_index", "k", "re", "im", "abs"), rows)
    res.documents["params.json"] = params.to_json()
    res.documents["theta.json"] = theta.to_json()
    res.figures["gammas.png"] = ("gammas", [abs(g) for g in params.gammas])
    res.summary = {"depth": n, "computed": len(params), "recursion_status": params.status,
                   "terminated_at": params.terminated_at,
                   "sum_abs_gamma": sums[-1] if sums else 0.0, "summable_flag": flag}
    return res


def _process_builder(process, gammas, seq, theta=None, mu=None):
    if process == "I":
        return lambda k: inverse_process_I(gammas, seq, k)
    if process == "III":
        return lambda k: inverse_process_III(gammas, seq, k)
    return lambda k: inverse_process_II(theta, seq, mu, k)


def run_inverse(cfg: ExperimentConfig) -> RunResult:
    spec = cfg.inverse
    rng = cfg.rng()
    seq = cfg.build_sequence()
    gammas = [_c(g) for g in spec.gammas]
    theta = mu = None
    if spec.process == "I":
        if not gammas:
            raise ConfigError("process I needs gammas")
        n = len(gammas) - 1 if spec.depth is None else spec.depth
        checked = n + 1
    elif spec.process == "III":
        if not gammas and (spec.depth or 0) > 0:
            raise ConfigError("process III needs gammas")
        n = len(gammas) if spec.depth is None else spec.depth
        checked = n
    else:
        theta = cfg.build_theta(seq, rng)
        mus = cfg.build_mu(seq, rng)
        if not mus:
            raise ConfigError("process II needs a query point mu")
        mu = mus[0]
        n = _depth(cfg, seq) if spec.depth is None else spec.depth
        params, _ = schur_forward(theta, seq, n)
        gammas = list(params.gammas)
        checked = n
    if checked > len(seq):
        raise ConfigError(f"depth needs {checked} nodes, sequence has {len(seq)}")
    build = _process_builder(spec.process, gammas, seq, theta, mu)
    h = build(n)
    err = roundtrip_check(h, seq, gammas, checked)
    res = RunResult()
    res.documents["function.json"] = h.to_json()
    m = spec.boundary_samples
    mod = boundary_modulus(h, m)
    res.tables["boundary.csv"] = rows_to_csv(
        ("index", "angle", "modulus"), [(j, 2 * np.pi * j / m, v) for j, v in enumerate(mod)])
    summary = {"process": spec.process, "depth": n, "roundtrip_error": err,
               "boundary_max": float(mod.max()), "boundary_min": float(mod.min())}
    if spec.process == "I":
        emp, floor = boundary_floor_check(h, gammas[:n + 1], m)
        summary.update(boundary_floor_empirical=emp, boundary_floor=floor, floor_slack=emp - floor)
    if spec.process == "III":
        summary["boundary_unimodular_dev"] = float(np.max(np.abs(mod - 1.0)))
    sums, flag = summability_check(gammas)
    summary.update(sum_abs_gamma=sums[-1] if sums else 0.0, summable_flag=flag)
    probe = cauchy_sequence_probe(build, spec.cauchy_radii, n)
    res.tables["cauchy.csv"] = rows_to_csv(
        ("radius", "n", "sup_diff"), [(r, k + 1, d) for r, diffs in probe.items() for k, d in enumerate(diffs)])
    res.figures["boundary.png"] = ("boundary", list(mod))
    res.summary = summary
    return res


def run_distance_compare(cfg: ExperimentConfig) -> RunResult:
    rng = cfg.rng()
    seq = cfg.build_sequence()
    theta = cfg.build_theta(seq, rng)
    mus = cfg.build_mu(seq, rng)
    n = _depth(cfg, seq)
    res = RunResult()
    oracle = cfg.oracle
    worst = 0.0
    traces = []
    for i, mu in enumerate(mus):
        tr = completeness_trace(theta, seq, mu, n_max=n, oracle=oracle)
        res.tables[f"trace_mu{i}.csv"] = tr.to_csv()
        worst = max(worst, tr.max_discrepancy())
        traces.append(tr.column("closed_form"))
    mw_rows = []
    for k in range(n):
        cf = dist_mw(theta, seq, k)
        ov = dr = disc = None
        if oracle:
            ov, dr = with_drift(oracle_dist_mw, theta, seq[:k + 1], k, n=cfg.grid)
            disc = abs(ov - cf)
            worst = max(worst, disc)
        mw_rows.append((k, cf, ov, disc, dr))
    res.tables["dist_mw.csv"] = rows_to_csv(("n", "closed_form", "oracle", "discrepancy", "drift"), mw_rows)
    pl_rows, id_rows = [], []
    for i, mu in enumerate(mus):
        cf = dist_plmu(theta, seq[:n], mu)
        ov = dr = disc = None
        if oracle:
            ov, dr = with_drift(oracle_dist_plmu, theta, seq[:n], mu, n=cfg.grid)
            disc = abs(ov - cf)
            worst = max(worst, disc)
        pl_rows.append((i, n, cf, ov, disc, dr))
        for m in range(n + 1):
            lhs, rhs, e = verify_useful_identity(theta, seq, mu, m)
            id_rows.append((i, m, lhs, rhs, e))
    res.tables["dist_plmu.csv"] = rows_to_csv(
        ("mu_index", "m", "closed_form", "oracle", "discrepancy", "drift"), pl_rows)
    res.tables["identity.csv"] = rows_to_csv(("mu_index", "m", "lhs", "rhs", "abs_err"), id_rows)
    res.figures["distances.png"] = ("traces", traces)
    res.summary = {"depth": n, "mu_count": len(mus), "oracle": oracle,
                   "oracle_caveat": _has_atoms(theta) if oracle else False,
                   "max_discrepancy": worst,
                   "max_identity_error": max((r[4] for r in id_rows), default=0.0)}
    return res


def run_riesz_diagnose(cfg: ExperimentConfig) -> RunResult:
    spec = cfg.riesz or RieszSpec()
    rng = cfg.rng()
    seq = cfg.build_sequence()
    theta = cfg.build_theta(seq, rng)
    mus = cfg.build_mu(seq, rng)
    n = _depth(cfg, seq)
    sub = seq[:n]
    if spec.family == "kernels":
        G = gram_kernels(KernelFamilySpec(theta, sub), normalized=spec.normalized)
    else:
        G = mw_projection_gram(theta, sub, grid=CircleGrid(cfg.grid))
    res = RunResult()
    prof = riesz_profile(G)
    res.tables["gram_spectrum.csv"] = rows_to_csv(
        ("size", "lambda_min", "lambda_max"), [(k + 1, lo, hi) for k, (lo, hi) in enumerate(prof)])
    aos = aos_tail_constants(G, spec.aos)
    res.tables["aos.csv"] = rows_to_csv(("N", "c_N", "C_N"), aos)
    norms, inv, d2 = orthogonalizer_norm_trace(G)
    res.tables["orthogonalizer.csv"] = rows_to_csv(
        ("n", "norm_sq", "biorth_norm_sq", "dist_sq_to_others"),
        [(k, a, b, c) for k, (a, b, c) in enumerate(zip(norms, inv, d2))])
    traces = []
    for i, mu in enumerate(mus):
        tr = completeness_trace(theta, seq, mu, n_max=n, oracle=cfg.oracle)
        res.tables[f"completeness_mu{i}.csv"] = tr.to_csv()
        traces.append(tr.column("closed_form"))
    summary = {"family": spec.family, "size": n,
               "lambda_min": min(p[0] for p in prof) if prof else None,
               "lambda_max": max(p[1] for p in prof) if prof else None,
               "completeness_final": [t[-1] for t in traces]}
    if cfg.oracle and n > 0:
        summary["gram_identity_residual"] = lemma_g_check(theta, sub, grid=CircleGrid(cfg.grid))
    res.figures["gram_spectrum.png"] = ("spectrum", prof)
    res.summary = summary
    return res


def run_hankel(cfg: ExperimentConfig) -> RunResult:
    spec = cfg.hankel or HankelSpec()
    rng = cfg.rng()
    res = RunResult()
    summary = {"sizes": list(spec.sizes), "route": spec.route}
    profiles = {}
    if cfg.theta is not None:
        seq = cfg.build_sequence()
        theta = cfg.build_theta(seq, rng)
        witness = None
        zeros = seq
        if cfg.theta.kind == "process_I":
            # inner companion with the same coefficients; h is the H^inf witness
            g = [_c(x) for x in cfg.theta.gammas]
            witness = theta
            zeros = seq[:len(g)]
            theta = inverse_process_III(g, seq, len(g))
        source = (theta, zeros) if spec.route == "exact" else theta_conj_b_symbol(theta, zeros, CircleGrid(cfg.grid))
        bounds, raw = nehari_lower_bound(source, spec.sizes, raw=True)
        wmax = float(boundary_modulus(witness, cfg.grid).max()) if witness is not None else None
        res.tables["nehari.csv"] = rows_to_csv(
            ("size", "sigma_max", "lower_bound", "witness_sup"),
            [(m, r, b, wmax) for m, r, b in zip(spec.sizes, raw, bounds)])
        k = min(spec.k_max, spec.sizes[-1])
        prof = compactness_profile(source, spec.sizes, min(k, spec.sizes[0]))
        res.tables["sigma.csv"] = rows_to_csv(
            ("size", "k", "sigma"), [(m, j, s) for m, sv in prof.items() for j, s in enumerate(sv)])
        profiles["theta"] = prof[spec.sizes[-1]]
        summary.update(nehari_bound=bounds[-1], witness_sup=wmax,
                       sandwich_ok=(wmax is None) or bool(bounds[-1] <= wmax + 1e-6))
    if spec.pair is not None:
        lam, mu = generate_sequence("paired_vanishing", spec.pair.n, **dict(spec.pair.params))
        sizes = [m for m in spec.sizes if m <= 512]
        rep = cross_basis_experiment(lam, mu, hankel_sizes=sizes, k_max=spec.k_max)
        rows = []
        for side, d in (("forward", rep.forward), ("backward", rep.backward)):
            for i, (v, t, lo, hi) in enumerate(zip(d["vanishing"], d["tail_sup"], d["lambda_min"], d["lambda_max"])):
                rows.append((side, i, v, t, lo, hi))
        res.tables["cross_basis.csv"] = rows_to_csv(
            ("direction", "index", "vanishing", "tail_sup", "lambda_min", "lambda_max"), rows)
        srows = [(side, m, j, s) for side, d in (("forward", rep.forward), ("backward", rep.backward))
                 for m, sv in d["hankel_sigma"].items() for j, s in enumerate(sv)]
        res.tables["cross_sigma.csv"] = rows_to_csv(("direction", "size", "k", "sigma"), srows)
        res.documents["cross_basis.json"] = rep.to_json()
        profiles["forward"] = rep.forward["hankel_sigma"][sizes[-1]]
        profiles["backward"] = rep.backward["hankel_sigma"][sizes[-1]]
        summary.update(forward_lambda_min=min(rep.forward["lambda_min"]),
                       backward_lambda_min=min(rep.backward["lambda_min"]))
    res.figures["sigma.png"] = ("sigma", profiles)
    res.summary = summary
    return res


RUNNERS = {
    "schur-forward": run_schur_forward,
    "inverse": run_inverse,
    "distance-compare": run_distance_compare,
    "riesz-diagnose": run_riesz_diagnose,
    "hankel": run_hankel,
}


def write_result(res: RunResult, out_dir: str, command: str, plots: bool = True) -> list:
    """Write tables, documents and figures, then ``summary.json`` last."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for name, text in sorted(res.tables.items()):
        path = os.path.join(out_dir, name)
        with open(path, "w", newline="") as fh:
            fh.write(text)
        written.append(name)
    for name, doc in sorted(res.documents.items()):
        with open(os.path.join(out_dir, name), "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
        written.append(name)
    if plots:
        from .plotting import render
        for name, (kind, data) in sorted(res.figures.items()):
            render(kind, data, os.path.join(out_dir, name))
            written.append(name)
    summary = {"command": command, "status": "ok", "files": written, **res.summary}
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=_json_default)
    return written


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not serializable: {type(o)}")
