"""The ``fibereq`` command-line driver.

Subcommands: ``simulate``, ``train``, ``evaluate``, ``complexity``,
``search``, ``sweep``. Every run is reproducible from the JSON experiment
config plus its seeds. Exit codes: 0 success, 2 configuration error,
3 numerical failure.

Metrics rows use the fixed CSV schema
``topology,rmps,q_db,q_gain_db,ber,seed,epochs`` (sweep rows gain a leading
``budget`` column). Floats are printed with 6 significant digits; an
error-free frame reports ``inf`` for Q. Sweep cells are cached under
``$FIBEREQ_CACHE`` (default ``.fibereq_cache``) keyed by the experiment
hash, so reruns emit identical CSV bytes without recomputation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .complexity import format_2sig, rmps, within_budget
from .config import ConfigError, ExperimentConfig
from .datafiles import load_dataset, save_dataset, simulate_dataset
from .dbp import DbpConfig, dbp_rmps, optimize_gamma_scale
from .neural import NumericalError, TrainConfig, load_model, save_model
from .pipeline import evaluate_dbp, gain_report, identity_report, train_equalizer
from .search import (
    ARCHITECTURES,
    BUDGET_TIERS,
    PRESET_TIERS,
    family_space,
    preset,
    search,
    spec_from_params,
)
from .serialization import config_hash
from .topologies import spec_from_dict, spec_to_dict

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

CSV_COLUMNS = "topology,rmps,q_db,q_gain_db,ber,seed,epochs"


def _fmt(x) -> str:
    if isinstance(x, float):
        if np.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".6g")
    return str(x)


def metrics_row(topology: str, rmps_value: int, report, seed: int, epochs: int) -> str:
    return ",".join([
        topology, str(int(rmps_value)), _fmt(report.q_db), _fmt(report.q_gain_db),
        _fmt(report.ber), str(seed), str(epochs),
    ])


def _load_config(path: str | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    return ExperimentConfig.from_json(path)


def _equalizer_spec(config: ExperimentConfig):
    eq = config.equalizer
    if "preset" in eq:
        tier, family = eq["preset"].split("/")
        return preset(tier, family)
    if "kind" in eq:
        return spec_from_dict(eq)
    raise ConfigError(f"equalizer config {eq} does not name a topology")


def cmd_simulate(args) -> int:
    config = _load_config(args.config)
    if args.seed_data is not None:
        config.seeds.data = args.seed_data
    if args.seed_noise is not None:
        config.seeds.noise = args.seed_noise
    frames = simulate_dataset(config)
    save_dataset(args.out, config, frames)
    for part, fr in frames.items():
        m = fr.cdc_metrics
        print(f"{part}: {len(fr.tx)} symbols, CDC ber={_fmt(m.ber)} "
              f"Q={_fmt(m.q_factor_db)} dB")
    print(f"wrote {args.out} (config hash {config.hash()})")
    return EXIT_OK


def cmd_train(args) -> int:
    config = _load_config(args.config)
    _, frames, _ = load_dataset(args.dataset)
    spec = _equalizer_spec(config)
    tcfg = config.train
    if args.seed_train is not None:
        tcfg.seed = args.seed_train
    if args.max_windows:
        frames["train"] = _truncate_frame(frames["train"], args.max_windows, spec)
    model, result, report = train_equalizer(
        spec, frames["train"], frames["test"], tcfg, config.pol
    )
    save_model(args.out, model, result.epochs_used, result.best_val_loss)
    print(CSV_COLUMNS)
    print(metrics_row(_label(spec), rmps(spec).total, report, tcfg.seed, result.epochs_used))
    print(f"wrote {args.out}")
    return EXIT_OK


def _truncate_frame(frame, max_windows: int, spec):
    """Head-truncate a frame so it yields at most ``max_windows`` windows."""
    from .dsp import SymbolFrame
    from .pipeline import FrameData
    from .receiver import EqualizedSymbols

    n = (spec.window_symbols - 1) // 2
    keep = min(len(frame.tx), max_windows + 2 * n)
    return FrameData(
        tx=SymbolFrame(frame.tx.x_pol[:keep], frame.tx.y_pol[:keep]),
        rx=EqualizedSymbols(frame.rx.x_pol[:keep], frame.rx.y_pol[:keep]),
        rx_wave_2sps=frame.rx_wave_2sps,
        cdc_metrics=frame.cdc_metrics,
    )


def _label(spec) -> str:
    d = spec_to_dict(spec)
    kind = d.pop("kind")
    d.pop("activation", None)
    d.pop("leaky_slope", None)
    inner = ";".join(f"{k}={v}" for k, v in sorted(d.items()))
    return f"{kind}({inner})"


def cmd_evaluate(args) -> int:
    config = _load_config(args.config)
    _, frames, _ = load_dataset(args.dataset)
    test = frames["test"]
    eq = config.equalizer
    print(CSV_COLUMNS)
    if args.identity or eq.get("identity"):
        report = identity_report(test.rx, test.tx, config.pol)
        print(metrics_row("identity", 0, report, config.seeds.train, 0))
        return EXIT_OK
    if args.dbp or "dbp" in eq:
        dcfg = DbpConfig(**eq.get("dbp", {}))
        if args.optimize_gamma:
            dcfg.gamma_scale = optimize_gamma_scale(
                frames["train"].rx_wave_2sps, config.link, dcfg,
                frames["train"].tx, config.tx.baud, config.tx.roll_off,
                pol=config.pol,
            )
            print(f"# optimized gamma_scale = {dcfg.gamma_scale:.4f}")
        report = evaluate_dbp(test, config.link, dcfg, config.tx.baud,
                              config.tx.roll_off, config.pol)
        cost = dbp_rmps(
            config.link.n_spans, dcfg.steps_per_span, dcfg.n_fft,
            dcfg.oversampling, config.tx.baud, config.link.spans[0],
            config.link.carrier_freq_hz,
        )
        label = f"dbp(steps_per_span={dcfg.steps_per_span};n_fft={dcfg.n_fft})"
        print(metrics_row(label, round(cost), report, config.seeds.noise, 0))
        return EXIT_OK
    if args.model:
        model, meta = load_model(args.model)
        report = gain_report(model, test.rx, test.tx, config.pol)
        print(metrics_row(_label(model.spec), rmps(model.spec).total, report,
                          meta["seed"], meta["epochs_used"]))
        return EXIT_OK
    raise ConfigError("evaluate needs --model, --dbp or --identity (or the same in the config)")


def cmd_complexity(args) -> int:
    if args.table1 or args.catalog:
        print("tier,family,topology,rmps,label_2sig,nominal,match")
        mismatches = 0
        for tier, row in PRESET_TIERS.items():
            for family, (spec, nominal) in row.items():
                total = rmps(spec).total
                got = format_2sig(total)
                ok = got == nominal
                mismatches += 0 if ok else 1
                print(f"{tier},{family},{_label(spec)},{total},{got},{nominal},"
                      f"{'pass' if ok else 'FAIL'}")
        print(f"# {mismatches} label mismatch(es)")
        return EXIT_OK
    if args.preset:
        tier, family = args.preset.split("/")
        spec = preset(tier, family)
    elif args.spec:
        spec = spec_from_dict(json.loads(Path(args.spec).read_text()))
    else:
        raise ConfigError("complexity needs --preset, --spec or --table1")
    report = rmps(spec)
    print(f"topology: {_label(spec)}")
    print(f"rmps: {report.total} ({format_2sig(report.total)})")
    for name, value in report.breakdown.items():
        print(f"  {name}: {value}")
    if args.budget is not None:
        ok = within_budget(spec, args.budget, args.budget_tolerance)
        print(f"within budget {args.budget:g} (x{args.budget_tolerance}): {ok}")
    return EXIT_OK


def _training_objective(frames, config, max_windows, max_epochs):
    tcfg_base = config.train

    def objective(spec, trial_seed):
        tcfg = TrainConfig(
            learning_rate=tcfg_base.learning_rate,
            max_epochs=max_epochs or tcfg_base.max_epochs,
            patience_epochs=tcfg_base.patience_epochs,
            batch_size=tcfg_base.batch_size,
            seed=trial_seed,
        )
        train_frame = frames["train"]
        if max_windows:
            train_frame = _truncate_frame(train_frame, max_windows, spec)
        _, result, report = train_equalizer(
            spec, train_frame, frames["test"], tcfg, config.pol
        )
        return report.q_gain_db, result.epochs_used

    return objective


def cmd_search(args) -> int:
    config = _load_config(args.config)
    _, frames, _ = load_dataset(args.dataset)
    objective = _training_objective(frames, config, args.max_windows, args.max_epochs)
    result = search(
        objective,
        family_space(args.family),
        n_trials=args.trials,
        seed=args.seed,
        strategy=args.strategy,
        budget=args.budget,
        budget_tolerance=args.budget_tolerance,
        spec_builder=lambda p: spec_from_params(args.family, p),
    )
    rows = [CSV_COLUMNS]
    for t in result.history:
        rows.append(metrics_row(
            _label(t.spec), t.rmps,
            _Report(t.score), t.seed, t.epochs_used,
        ))
    out = "\n".join(rows) + "\n"
    if args.out:
        _append_new_rows(args.out, rows)
        print(f"best: {_label(result.best.spec)} gain={_fmt(result.best.score)} dB")
    else:
        sys.stdout.write(out)
    return EXIT_OK


class _Report:
    """Adapter: search history stores only the score (= Q gain)."""

    def __init__(self, gain):
        self.q_db = float("nan")
        self.q_gain_db = gain
        self.ber = float("nan")


def _append_new_rows(path: str, rows: list) -> None:
    path = Path(path)
    existing = set()
    if path.exists():
        existing = set(path.read_text().splitlines())
    with path.open("a") as f:
        for row in rows:
            if row not in existing:
                f.write(row + "\n")
                existing.add(row)


def cmd_sweep(args) -> int:
    config = _load_config(args.config)
    _, frames, _ = load_dataset(args.dataset)
    budgets = [float(b) for b in args.budgets.split(",")]
    archs = args.archs.split(",")
    seeds = [int(s) for s in args.seeds.split(",")]
    for b in budgets:
        if b not in BUDGET_TIERS:
            raise ConfigError(f"budget {b:g} has no catalog tier (use 1e3..1e8 decades)")
    for a in archs:
        if a not in ARCHITECTURES:
            raise ConfigError(f"unknown architecture {a!r}")

    cache_dir = Path(os.environ.get("FIBEREQ_CACHE", ".fibereq_cache"))
    cache_dir.mkdir(parents=True, exist_ok=True)
    base_key = {
        "config": config.to_dict(),
        "max_windows": args.max_windows,
        "max_epochs": args.max_epochs,
        "mode": args.mode,
    }

    lines = ["budget," + CSV_COLUMNS]
    for budget in budgets:
        for arch in archs:
            for seed in seeds:
                cell_key = config_hash({**base_key, "cell": [budget, arch, seed]})
                cache_file = cache_dir / f"{cell_key}.json"
                if cache_file.exists():
                    row = json.loads(cache_file.read_text())["row"]
                else:
                    row = _sweep_cell(config, frames, budget, arch, seed, args)
                    cache_file.write_text(json.dumps({"row": row}))
                lines.append(row)
    csv_text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(csv_text)
        print(f"wrote {args.out} ({len(lines) - 1} rows)")
    else:
        sys.stdout.write(csv_text)
    return EXIT_OK


def _sweep_cell(config, frames, budget, arch, seed, args) -> str:
    if args.mode == "preset":
        spec = preset(BUDGET_TIERS[budget], arch)
    else:
        objective = _training_objective(frames, config, args.max_windows, args.max_epochs)
        result = search(
            objective, family_space(arch), n_trials=args.trials, seed=seed,
            strategy="surrogate", budget=budget,
            budget_tolerance=args.budget_tolerance,
            spec_builder=lambda p: spec_from_params(arch, p),
        )
        spec = result.best.spec
    tcfg = TrainConfig(
        learning_rate=config.train.learning_rate,
        max_epochs=args.max_epochs or config.train.max_epochs,
        patience_epochs=config.train.patience_epochs,
        batch_size=config.train.batch_size,
        seed=seed,
    )
    train_frame = frames["train"]
    if args.max_windows:
        train_frame = _truncate_frame(train_frame, args.max_windows, spec)
    _, result, report = train_equalizer(spec, train_frame, frames["test"], tcfg, config.pol)
    row = metrics_row(_label(spec), rmps(spec).total, report, seed, result.epochs_used)
    return f"{budget:g}," + row


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fibereq",
        description="Fiber-link simulation, equalizer training, and complexity auditing",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a train/test dataset file")
    sim.add_argument("--config", help="experiment config JSON (defaults if omitted)")
    sim.add_argument("--out", required=True)
    sim.add_argument("--seed-data", type=int)
    sim.add_argument("--seed-noise", type=int)
    sim.set_defaults(func=cmd_simulate)

    tr = sub.add_parser("train", help="train the configured equalizer on a dataset")
    tr.add_argument("--config")
    tr.add_argument("--dataset", required=True)
    tr.add_argument("--out", required=True, help="model checkpoint path")
    tr.add_argument("--seed-train", type=int)
    tr.add_argument("--max-windows", type=int, help="truncate training windows")
    tr.set_defaults(func=cmd_train)

    ev = sub.add_parser("evaluate", help="metrics and Q-gain vs the CDC baseline")
    ev.add_argument("--config")
    ev.add_argument("--dataset", required=True)
    ev.add_argument("--model", help="model checkpoint")
    ev.add_argument("--dbp", action="store_true", help="back-propagation baseline")
    ev.add_argument("--identity", action="store_true", help="pass-through equalizer")
    ev.add_argument("--optimize-gamma", action="store_true",
                    help="golden-section tune of the DBP nonlinear coefficient")
    ev.set_defaults(func=cmd_evaluate)

    cx = sub.add_parser("complexity", help="multiplications per recovered symbol")
    cx.add_argument("--preset", help="catalog entry, e.g. best/cnn_bilstm")
    cx.add_argument("--spec", help="topology spec JSON file")
    cx.add_argument("--table1", action="store_true",
                    help="print the full catalog with nominal-label pass/fail")
    cx.add_argument("--catalog", action="store_true", help="alias of --table1")
    cx.add_argument("--budget", type=float)
    cx.add_argument("--budget-tolerance", type=float, default=1.1)
    cx.set_defaults(func=cmd_complexity)

    se = sub.add_parser("search", help="hyper-parameter search for one architecture")
    se.add_argument("--config")
    se.add_argument("--dataset", required=True)
    se.add_argument("--family", required=True, choices=ARCHITECTURES)
    se.add_argument("--trials", type=int, default=20)
    se.add_argument("--seed", type=int, default=0)
    se.add_argument("--strategy", choices=("random", "surrogate"), default="surrogate")
    se.add_argument("--budget", type=float)
    se.add_argument("--budget-tolerance", type=float, default=1.1)
    se.add_argument("--max-windows", type=int, default=16384)
    se.add_argument("--max-epochs", type=int, default=30)
    se.add_argument("--out", help="append-only results CSV")
    se.set_defaults(func=cmd_search)

    sw = sub.add_parser("sweep", help="budget x architecture x seed grid")
    sw.add_argument("--config")
    sw.add_argument("--dataset", required=True)
    sw.add_argument("--budgets", default="1e3,1e4,1e5,1e6,1e7,1e8")
    sw.add_argument("--archs", default=",".join(ARCHITECTURES))
    sw.add_argument("--seeds", default="1,2,3")
    sw.add_argument("--mode", choices=("preset", "search"), default="preset")
    sw.add_argument("--trials", type=int, default=10, help="search mode trials per cell")
    sw.add_argument("--budget-tolerance", type=float, default=1.1)
    sw.add_argument("--max-windows", type=int, default=16384)
    sw.add_argument("--max-epochs", type=int, default=30)
    sw.add_argument("--out")
    sw.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
