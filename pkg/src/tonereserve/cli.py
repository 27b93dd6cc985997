"""Command line front end: ``tr-opt run <experiment> ...`` and ``tr-opt validate``."""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .experiments import EXPERIMENTS, ExperimentSpec, run_experiment
from .metrics import ALGORITHMS
from .ofdm import ConfigurationError


def _parse_float(token: str) -> float:
    return math.inf if token.strip().lower() in ("inf", "infinity") else float(token)


def _parse_list(text: str, conv=float) -> tuple:
    return tuple(conv(t) for t in text.split(",") if t.strip())


def read_config_file(path: str) -> dict:
    """Flat key=value overrides; '#' starts a comment."""
    overrides = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{lineno}: expected key=value")
            key, value = (t.strip() for t in line.split("=", 1))
            overrides[key] = value
    return overrides


_CONFIG_KEYS = {"ibo", "p", "symbols", "algorithms", "seed", "out"}


def build_spec(args: argparse.Namespace) -> ExperimentSpec:
    values = {
        "ibo": args.ibo,
        "p": args.p,
        "symbols": args.symbols,
        "algorithms": args.algorithms,
        "seed": args.seed,
        "out": args.out,
    }
    if args.config:
        for key, raw in read_config_file(args.config).items():
            if key not in _CONFIG_KEYS:
                raise ConfigurationError(f"unknown config key {key!r}")
            values[key] = raw
    return ExperimentSpec(
        name=args.experiment,
        ibo_grid_db=_parse_list(values["ibo"]) if isinstance(values["ibo"], str)
        else values["ibo"],
        p_values=_parse_list(values["p"], _parse_float)
        if isinstance(values["p"], str) else values["p"],
        n_symbols=int(values["symbols"]),
        algorithms=_parse_list(values["algorithms"], str)
        if isinstance(values["algorithms"], str) else values["algorithms"],
        output_dir=values["out"],
        seed=int(values["seed"]),
    )


def cmd_run(args: argparse.Namespace) -> int:
    spec = build_spec(args)
    for path in run_experiment(spec):
        print(path)
    return 0


def _check(name: str, ok: bool, failures: list) -> None:
    print(f"{'PASS' if ok else 'FAIL'}  {name}")
    if not ok:
        failures.append(name)


def cmd_validate(_args: argparse.Namespace) -> int:
    """Fast invariant suite over the numerical kernels."""
    from . import baselines, ofdm, pa, solver

    rng = np.random.default_rng(7)
    failures: list = []

    x = rng.normal(size=64) + 1j * rng.normal(size=64)
    _check("dft round trip", np.allclose(ofdm.idft(ofdm.dft(x)), x, atol=1e-12),
           failures)
    _check("dft Parseval",
           abs(np.sum(np.abs(x) ** 2) - np.sum(np.abs(ofdm.dft(x)) ** 2)) <
           1e-10 * np.sum(np.abs(x) ** 2), failures)

    amp = pa.RappPa(4.0, 1.0)
    r = np.linspace(0, 3, 300)
    out = np.abs(amp.amplify(r.astype(complex)))
    _check("Rapp AM-AM monotone and bounded",
           bool(np.all(np.diff(out) >= 0) and np.all(out < amp.gain * amp.v_sat)),
           failures)
    _check("lambda analytic in (0, 1)",
           0.0 < pa.lambda_analytic(4.0, 8.0) < 1.0, failures)

    cfg = ofdm.SystemConfig(64, 8, data_indices=tuple(range(1, 12)),
                            tr_indices=(-5, -9, 14), seed=3)
    sym = ofdm.random_frame(cfg, ofdm.symbol_rng(cfg, 0))
    frame = ofdm.modulate(cfg, sym)
    _check("cyclic prefix repeats symbol tail",
           np.array_equal(frame.samples[:8], frame.core[-8:]), failures)

    model = pa.RappPa(4.0, pa.v_sat_for_ibo(5.0, cfg.n_data / cfg.n_fft))
    y = frame.core
    gamma, lam = solver.gamma_lambda(y, model, 1.0, cfg.n_cp)
    fmat = solver.fourier_columns(cfg.n_fft, cfg.tr_indices)
    jf = solver.jacobian_fast(gamma, y, cfg.tr_bins())
    jd = solver.jacobian_direct(gamma, y, fmat)
    _check("fast Jacobian equals direct",
           np.allclose(jf, jd, rtol=1e-9, atol=1e-12), failures)
    hf = solver.hessian_fast(gamma, lam, y, cfg.tr_indices)
    hd = solver.hessian_direct(gamma, lam, y, fmat)
    _check("fast Hessian equals direct",
           np.allclose(hf, hd, rtol=1e-9, atol=1e-12), failures)
    eig = np.linalg.eigvalsh(hf)
    _check("Hessian positive semidefinite",
           eig.min() >= -1e-8 * np.linalg.norm(hf, 2), failures)

    _check("AC-TR op formula spot value",
           solver.count_ops_ac_tr(1024, 11) == 161716.0, failures)
    _check("NCC-TR op formula spot value",
           baselines.count_ops_baseline(baselines.NCC_TR, 1024, theta=0) == 81933.0,
           failures)

    opt, diag = solver.solve_ac_tr(cfg, model, sym)
    _check("AC-TR objective trace non-increasing",
           bool(np.all(np.diff(diag.objective_trace) <= 1e-9)), failures)
    _check("AC-TR preserves data symbols",
           np.array_equal(opt.d_dc, sym.d_dc), failures)

    if failures:
        print(f"{len(failures)} check(s) failed")
        return 1
    print("all checks passed")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="tr-opt",
        description="Tone-reservation experiments for OFDM nonlinear distortion")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment and write CSV tables")
    run_p.add_argument("experiment", choices=EXPERIMENTS)
    run_p.add_argument("--ibo", default="4,5,6,7,8,9,10,11,12",
                       help="comma-separated reference IBO grid in dB")
    run_p.add_argument("--p", default="4,10",
                       help="comma-separated Rapp smoothness values ('inf' allowed)")
    run_p.add_argument("--symbols", type=int, default=1000)
    run_p.add_argument("--algorithms", default=",".join(ALGORITHMS))
    run_p.add_argument("--seed", type=int, default=0)
    run_p.add_argument("--out", default="results")
    run_p.add_argument("--config", default=None,
                       help="flat key=value file overriding the options above")
    run_p.set_defaults(func=cmd_run)

    val_p = sub.add_parser("validate", help="run the fast invariant suite")
    val_p.set_defaults(func=cmd_validate)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
