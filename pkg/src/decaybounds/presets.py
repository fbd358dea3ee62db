"""Named experiment recipes and the runner that writes their artifacts."""
from __future__ import annotations

import json
import math
import os
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .bounds import exp_bound, invsqrt_bound, kron_distances, kron_phi1_bound, phi1_bound
from .krylov import (ExactOperator, PerturbedOperator, arnoldi, apriori_residual_bound,
                     decay_weights, inexact_arnoldi_run, relaxation_schedule, residual_rm)
from .matrices import band_distance, kron_sum, measured_bandwidths, spectral_norm, toeplitz
from .mmio import mtx_read
from .oracle import eval_matfun
from .regions import fit_disk, fit_ellipse, fmt, fov_boundary, inflate_for_perturbation, write_fov_csv

DOMINANCE_SLACK = 1e-13
PDE225_ENV = "DECAYBOUNDS_PDE225"
PDE225_SOURCE = "Matrix Market, NEP collection, MATPDE set: pde225 (225 x 225, real nonsymmetric)"


class PresetError(Exception):
    """Unknown preset or missing input; maps to exit status 2."""


@dataclass(frozen=True)
class Preset:
    name: str
    mode: str  # "decay", "kron" or "krylov"
    function: str
    stencil: tuple = ()
    diag_index: int = 1
    n: int = 0
    column: int = 0
    region: str = "ellipse"
    eps: float | None = None
    mtx: str | None = None  # identifier of a Matrix Market input
    m: int = 0
    tol: float = 1e-10
    eps_m: float = 1e-1
    seed: int = 0
    note: str = ""


PRESETS: dict[str, Preset] = {p.name: p for p in [
    Preset("fig1a", "decay", "exp", (-1j, 1j, -2), 1, 200, 127),
    Preset("fig1b", "decay", "exp", (1j, 3j, -1j, -1j), 1, 100, 67),
    Preset("fig2a", "decay", "invsqrt", (1j, 3 + 3j, -1j, -1j), 1, 100, 67, eps=0.05),
    Preset("fig2b", "decay", "invsqrt", (1, 5, 3), 1, 100, 67, eps=0.05),
    Preset("fig3", "decay", "phi1", (0.8, 3, -1, -3), 1, 200, 127, region="disk"),
    Preset("fig4a", "kron", "phi1", (-0.1, 4, 0.9j), 1, 30, 300, region="disk"),
    Preset("fig4b", "kron", "phi1", (-1, 4, 1, 0.5), 1, 30, 300, region="disk"),
    Preset("fig5-left", "krylov", "negexp", (1, 2, 0.1, -1), 1, 200, m=20, seed=20),
    Preset("fig5-right", "krylov", "negexp", mtx="pde225", m=31, seed=31),
    Preset("ex-inex-expsqrt", "krylov", "expnegsqrt", (-1, 1, 3, 0.1), 2, 200, m=35, seed=35),
]}


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, (tuple, list)):
        return [_jsonable(y) for y in x]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) if isinstance(v, float) else str(v) for v in row) + "\n")


PLOT_SCRIPT = '''"""Render {name}: log-scale {what}. Needs matplotlib."""
import csv
import sys

import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("{csv}", encoding="utf-8")))
x = [float(r["{x}"]) for r in rows]
fig, ax = plt.subplots()
for key, style in {series}:
    ys = [float(r[key]) for r in rows]
    ax.semilogy(x, [y if 0 < y < float("inf") else float("nan") for y in ys], style, label=key)
ax.set_xlabel("{x}")
ax.legend()
ax.set_title("{name}")
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else "{name}.png", dpi=150)
'''


def _plot_script(path: Path, name: str, csv_name: str, x: str, series, what: str) -> None:
    path.write_text(PLOT_SCRIPT.format(name=name, csv=csv_name, x=x, series=repr(series), what=what),
                    encoding="utf-8")


def load_matrix(p: Preset, mtx_path: str | None = None) -> np.ndarray:
    if p.mtx:
        path = mtx_path or os.environ.get(PDE225_ENV)
        if not path:
            raise PresetError(f"preset {p.name} needs {PDE225_SOURCE}; pass --mtx PATH or set {PDE225_ENV}")
        if not Path(path).is_file():
            raise PresetError(f"matrix file not found: {path}")
        return mtx_read(path)
    return toeplitz(p.stencil, p.diag_index, p.n).data


def _envelope(p: Preset, region):
    if p.function == "exp":
        return exp_bound(region)
    if p.function == "invsqrt":
        return invsqrt_bound(region, p.eps)
    if p.function == "phi1":
        return phi1_bound(region)
    raise PresetError(f"no envelope for {p.function}")


def _decay_rows(p: Preset, A: np.ndarray, region):
    beta, gamma = measured_bandwidths(A)
    env = _envelope(p, region)
    F = eval_matfun(p.function, A)
    rows, bad = [], []
    for k in range(1, A.shape[0] + 1):
        entry = float(abs(F[k - 1, p.column - 1]))
        if k == p.column:
            rows.append((k, 0, entry, math.inf, 0))
            continue
        xi = band_distance(k, p.column, beta, gamma)
        ok = env.valid(xi)
        bound = env(xi)
        rows.append((k, xi, entry, bound, int(ok)))
        if ok and entry > bound + DOMINANCE_SLACK:
            bad.append(k)
    return ["row", "xi", "abs_entry", "bound", "valid"], rows, bad, env.params


def _kron_rows(p: Preset, B: np.ndarray, disk):
    beta, gamma = measured_bandwidths(B)
    n = B.shape[0]
    F = eval_matfun(p.function, kron_sum(B, B))
    rows, bad = [], []
    for r in range(1, n * n + 1):
        entry = float(abs(F[r - 1, p.column - 1]))
        xi1, xi2 = kron_distances(r, p.column, n, beta, gamma)
        bound = kron_phi1_bound(disk, xi1, xi2)
        ok = math.isfinite(bound)
        rows.append((r, xi1, xi2, entry, bound, int(ok)))
        if ok and entry > bound + DOMINANCE_SLACK:
            bad.append(r)
    return ["row", "xi1", "xi2", "abs_entry", "bound", "valid"], rows, bad, {}


def _krylov(p: Preset, A: np.ndarray, E, out: Path) -> tuple[list, list, list, dict]:
    n = A.shape[0]
    v = np.ones(n) / math.sqrt(n)
    normA = spectral_norm(A)
    exact = arnoldi(ExactOperator(A), v, p.m)
    first_m = next((m for m in range(2, 500) if apriori_residual_bound(E, normA, m) < p.tol), None)
    s = decay_weights(p.function, E, p.m, p.eps_m)
    sched = relaxation_schedule(p.tol, p.eps_m, p.m, s)
    relaxed = inexact_arnoldi_run(PerturbedOperator(A, p.seed), v, p.function, sched, A)
    const = inexact_arnoldi_run(PerturbedOperator(A, p.seed + 1), v, p.function,
                                np.full(p.m, p.tol / p.m), A)
    h_bound = normA + p.eps_m
    hist = []
    for j in range(1, relaxed.decomposition.m + 1):
        r_exact = residual_rm(exact.truncated(j), p.function) if j <= exact.m else 0.0
        hist.append((j, float(relaxed.residuals[j - 1]), h_bound * float(s[j - 1]),
                     float(sched.eps_bar[j - 1]), float(relaxed.gap_bounds[j - 1]),
                     float(relaxed.true_residuals[j - 1]), float(const.residuals[j - 1]), r_exact))
    _write_csv(out / "history.csv", ["step", "r_m", "bound", "eps_bar", "gap_bound", "true_residual",
                                     "r_m_constant", "r_m_exact"], hist)
    _plot_script(out / "plot_history.py", p.name, "history.csv", "step",
                 [("r_m", "o-"), ("r_m_constant", "x--"), ("bound", "-"), ("eps_bar", ":")],
                 "residual histories")

    # decay of the first column of f(H_m) against the schedule weights s_j
    col = np.abs(eval_matfun(p.function, relaxed.decomposition.H)[:, 0])
    rows, bad = [], []
    for j in range(1, len(col) + 1):
        rows.append((j, j - 1, float(col[j - 1]), float(s[j - 1]), 1))
        if col[j - 1] > s[j - 1] + DOMINANCE_SLACK:
            bad.append(j)
    gap = np.abs(relaxed.true_residuals - relaxed.residuals)
    gap_fail = [j + 1 for j in np.flatnonzero(gap > relaxed.gap_bounds)]
    info = {
        "apriori_first_m": first_m, "norm_A": normA, "h_bound": h_bound,
        "inflated_region": inflate_for_perturbation(E, p.eps_m).to_dict(),
        "final_residual_relaxed": float(relaxed.residuals[-1]),
        "final_residual_constant": float(const.residuals[-1]),
        "budget_used": sched.budget_used, "gap_violations": gap_fail,
        "seeds": {"relaxed": p.seed, "constant": p.seed + 1},
    }
    return ["row", "xi", "abs_entry", "bound", "valid"], rows, bad + [f"gap@{j}" for j in gap_fail], info


def run_preset(name: str, out_dir: str | os.PathLike, mtx_path: str | None = None) -> int:
    """Run a preset and write its artifacts to ``out_dir``. Returns the exit
    status: 0 iff every valid entry is dominated by its bound."""
    if name not in PRESETS:
        raise PresetError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    p = PRESETS[name]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    timings = {}
    t0 = time.perf_counter()
    A = load_matrix(p, mtx_path)
    samples = fov_boundary(A)
    region = fit_disk(samples) if p.region == "disk" else fit_ellipse(samples)
    write_fov_csv(out / "fov.csv", samples, region)
    timings["fov"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    if p.mode == "decay":
        header, rows, bad, extra = _decay_rows(p, A, region)
    elif p.mode == "kron":
        header, rows, bad, extra = _kron_rows(p, A, region)
    else:
        header, rows, bad, extra = _krylov(p, A, region, out)
    timings["bounds_and_oracle"] = time.perf_counter() - t0

    _write_csv(out / "decay.csv", header, rows)
    _plot_script(out / "plot_decay.py", p.name, "decay.csv", "row",
                 [("abs_entry", "o"), ("bound", "-")], "entry magnitude against bound")
    record = {
        "preset": _jsonable(asdict(p)),
        "region": region.to_dict(),
        "n": int(A.shape[0]),
        "bandwidths": list(measured_bandwidths(A)),
        "seed": p.seed,
        "dominance_slack": DOMINANCE_SLACK,
        "violations": bad,
        "extra": _jsonable(extra),
        "timings_s": timings,
    }
    if p.mtx:
        record["mtx_path"] = str(mtx_path or os.environ.get(PDE225_ENV))
    (out / "run.json").write_text(json.dumps(record, indent=2, default=str) + "\n", encoding="utf-8")
    return 1 if bad else 0
