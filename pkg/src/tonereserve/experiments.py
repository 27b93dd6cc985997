"""Experiment orchestration: Monte-Carlo sweeps written to CSV tables.

Each experiment fans out over (algorithm, grid point) pairs, runs a symbol
ensemble through run_ensemble, and writes one CSV plus a small companion
matplotlib script.  Outputs are deterministic for a fixed seed.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from .metrics import AC_TR, ALGORITHMS, REFERENCE, ccdf, run_ensemble
from .ofdm import ConfigurationError, SystemConfig
from .pa import RappPa, lambda_analytic, v_sat_for_ibo

EXPERIMENTS = ("lambda_vs_ibo", "psd", "sdr_vs_ibo", "papr_ccdf", "iters_ops",
               "sdr_vs_p")

SOLVER_P_CAP = 10.0
_CCDF_THRESHOLDS = tuple(np.arange(4.0, 13.01, 0.25))


def benchmark_config(seed: int = 0) -> SystemConfig:
    """1024-point FFT, CP of 128, 200 occupied subcarriers, 11 reserved tones."""
    tr = (-100, -80, -60, -40, -20, -1, 20, 40, 60, 80, 100)
    occupied = [k for k in range(-100, 101) if k != 0]
    data = tuple(k for k in occupied if k not in tr)
    return SystemConfig(n_fft=1024, n_cp=128, data_indices=data, tr_indices=tr,
                        constellation="qpsk", seed=seed)


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    ibo_grid_db: tuple = (4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0)
    p_values: tuple = (4.0, 10.0)
    n_symbols: int = 1000
    algorithms: tuple = ALGORITHMS
    output_dir: str = "results"
    seed: int = 0

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise ConfigurationError(f"unknown experiment {self.name!r}")
        if self.n_symbols < 1:
            raise ConfigurationError("n_symbols must be >= 1")
        if not self.ibo_grid_db or not self.p_values:
            raise ConfigurationError("IBO and p grids must be nonempty")
        for alg in self.algorithms:
            if alg not in ALGORITHMS:
                raise ConfigurationError(f"unknown algorithm {alg!r}")


def _grid_point(cfg: SystemConfig, algorithm: str, p: float, ibo_db: float,
                n_symbols: int, compute_psd: bool = False):
    """One ensemble at a (p, reference IBO) grid point.

    The clipping threshold derives from the reference-system IBO with the
    analytic data power alpha/N, so every algorithm sees the same amplifier.
    """
    sigma2 = cfg.n_data / cfg.n_fft
    v_sat = v_sat_for_ibo(ibo_db, sigma2)
    pa = RappPa(p, v_sat)
    return run_ensemble(cfg, pa, algorithm, n_symbols,
                        solver_p_cap=SOLVER_P_CAP, compute_psd=compute_psd)


def _solver_p(algorithm: str, p: float) -> float:
    if algorithm != AC_TR:
        return float("nan")
    return min(p, SOLVER_P_CAP)


def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return f"{value:.10g}"
    return str(value)


def _write_csv(path: str, header: list, rows: list) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


_BASE_HEADER = ["algorithm", "p_true", "p_solver", "ref_ibo_db", "n_symbols",
                "seed", "lambda", "sdr_db", "mean_iters", "mean_ops_counted",
                "mean_ops_formula", "converged_fraction"]


def _base_row(spec: ExperimentSpec, algorithm: str, p: float, ibo_db: float,
              metrics) -> list:
    return [algorithm, p, _solver_p(algorithm, p), ibo_db, spec.n_symbols,
            spec.seed, metrics.lambda_emp, metrics.sdr_db, metrics.mean_iters,
            metrics.mean_ops_counted, metrics.mean_ops_formula,
            metrics.converged_fraction]


def run_experiment(spec: ExperimentSpec) -> list:
    """Run one named experiment; returns the list of CSV paths written."""
    os.makedirs(spec.output_dir, exist_ok=True)
    cfg = benchmark_config(seed=spec.seed)
    path = os.path.join(spec.output_dir, f"{spec.name}.csv")

    if spec.name in ("lambda_vs_ibo", "sdr_vs_ibo", "iters_ops"):
        header = list(_BASE_HEADER)
        if spec.name == "lambda_vs_ibo":
            header.append("lambda_analytic")
        rows = []
        for p in spec.p_values:
            for ibo in spec.ibo_grid_db:
                for alg in spec.algorithms:
                    m = _grid_point(cfg, alg, p, ibo, spec.n_symbols)
                    row = _base_row(spec, alg, p, ibo, m)
                    if spec.name == "lambda_vs_ibo":
                        row.append(lambda_analytic(min(p, 1e6), ibo))
                    rows.append(row)
        _write_csv(path, header, rows)

    elif spec.name == "papr_ccdf":
        header = _BASE_HEADER + ["threshold_db", "prob"]
        rows = []
        for p in spec.p_values:
            for ibo in spec.ibo_grid_db:
                for alg in spec.algorithms:
                    m = _grid_point(cfg, alg, p, ibo, spec.n_symbols)
                    thr, prob = ccdf(m.papr_samples, _CCDF_THRESHOLDS)
                    base = _base_row(spec, alg, p, ibo, m)
                    rows.extend(base + [t, pr] for t, pr in zip(thr, prob))
        _write_csv(path, header, rows)

    elif spec.name == "psd":
        ibo = spec.ibo_grid_db[0]
        header = _BASE_HEADER + ["freq", "psd_total_db", "psd_distortion_db"]
        rows = []
        for p in spec.p_values:
            results = {alg: _grid_point(cfg, alg, p, ibo, spec.n_symbols,
                                        compute_psd=True)
                       for alg in spec.algorithms}
            anchor = _inband_anchor(cfg, results.get(REFERENCE)
                                    or next(iter(results.values())))
            for alg, m in results.items():
                base = _base_row(spec, alg, p, ibo, m)
                rows.extend(
                    base + [f, pt - anchor, pd - anchor]
                    for f, pt, pd in zip(m.freq_grid, m.psd_total_db,
                                         m.psd_distortion_db))
        _write_csv(path, header, rows)

    elif spec.name == "sdr_vs_p":
        ibo = spec.ibo_grid_db[0]
        header = list(_BASE_HEADER)
        rows = []
        for p in spec.p_values:
            for alg in spec.algorithms:
                m = _grid_point(cfg, alg, p, ibo, spec.n_symbols)
                rows.append(_base_row(spec, alg, p, ibo, m))
        _write_csv(path, header, rows)

    plot_path = _emit_plot_script(spec, path)
    return [path, plot_path]


def _inband_anchor(cfg: SystemConfig, metrics) -> float:
    """Mean total-output PSD (dB) over the occupied band of the anchor run."""
    occupied = np.asarray(cfg.data_indices + cfg.tr_indices) / cfg.n_fft
    lo, hi = occupied.min(), occupied.max()
    mask = (metrics.freq_grid >= lo) & (metrics.freq_grid <= hi)
    return float(np.mean(metrics.psd_total_db[mask]))


_PLOT_TEMPLATE = """\
#!/usr/bin/env python3
\"\"\"Plot {name} from {csv_name} (one line per algorithm/p pair).\"\"\"
import csv
from collections import defaultdict

import matplotlib.pyplot as plt

X_COLUMN = {x_col!r}
Y_COLUMN = {y_col!r}

groups = defaultdict(list)
with open({csv_name!r}, newline="", encoding="utf-8") as fh:
    for row in csv.DictReader(fh):
        key = (row["algorithm"], row["p_true"])
        groups[key].append((float(row[X_COLUMN]), float(row[Y_COLUMN])))

for (alg, p), pts in sorted(groups.items()):
    pts.sort()
    plt.plot([x for x, _ in pts], [y for _, y in pts], label=f"{{alg}} p={{p}}")
plt.xlabel(X_COLUMN)
plt.ylabel(Y_COLUMN)
plt.grid(True)
plt.legend()
plt.savefig({png_name!r}, dpi=150, bbox_inches="tight")
"""

_PLOT_AXES = {
    "lambda_vs_ibo": ("ref_ibo_db", "lambda"),
    "sdr_vs_ibo": ("ref_ibo_db", "sdr_db"),
    "iters_ops": ("ref_ibo_db", "mean_iters"),
    "papr_ccdf": ("threshold_db", "prob"),
    "psd": ("freq", "psd_distortion_db"),
    "sdr_vs_p": ("p_true", "sdr_db"),
}


def _emit_plot_script(spec: ExperimentSpec, csv_path: str) -> str:
    x_col, y_col = _PLOT_AXES[spec.name]
    script = _PLOT_TEMPLATE.format(name=spec.name,
                                   csv_name=os.path.basename(csv_path),
                                   x_col=x_col, y_col=y_col,
                                   png_name=f"{spec.name}.png")
    path = os.path.join(spec.output_dir, f"plot_{spec.name}.py")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(script)
    return path
