"""``robust-lsq`` command line.

Exit codes: 0 success, 1 usage/configuration error, 2 data error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

import numpy as np

from .batch_model import as_coefficients, predict
from .data_io import load_dataset, save_dataset
from .datagen import Layout, SynthSpec, generate
from .errors import ConfigError, ContractError, DataFormatError, DatasetIOError, NumericalError
from .experiment import (
    ExperimentConfig,
    ResultRow,
    config_from_mapping,
    fit_algorithm,
    format_rows,
    read_config,
    run_experiment,
    write_rows,
)
from .metrics import l2_error, mae

log = logging.getLogger("robust_lsq")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _overrides(ns) -> dict:
    return {
        "seed": ns.seed,
        "repeats": ns.repeats,
        "threads": ns.threads,
        "corruption_ratio": ns.corruption_ratio,
        "batch_size": ns.batch_size,
        "batches": ns.batches,
    }


def _load_cfg(ns, extra=None) -> ExperimentConfig:
    values = read_config(ns.config) if getattr(ns, "config", None) else {}
    values.update({k: v for k, v in (extra or {}).items() if v is not None})
    values.update({k: v for k, v in _overrides(ns).items() if v is not None})
    return config_from_mapping(values)


def cmd_gen(ns) -> int:
    cfg = _load_cfg(ns)
    if len(cfg.n) != 1 or len(cfg.m) != 1 or len(cfg.gamma) != 1 or len(cfg.layouts) != 1:
        raise ConfigError("gen writes one dataset: give single values for n, m, gamma and layout")
    spec = SynthSpec(cfg.p, cfg.n[0], cfg.m[0], cfg.gamma[0], cfg.sigma,
                     Layout.parse(cfg.layouts[0]), cfg.seed)
    batches, truth = generate(spec)
    save_dataset(ns.out, batches, truth, spec)
    log.info("wrote %d batches (p=%d, n=%d) to %s", spec.m, spec.p, spec.n, ns.out)
    return EXIT_OK


def cmd_fit(ns) -> int:
    extra = {"algos": ns.algo}
    if ns.csv:
        if not ns.schema:
            raise ConfigError("--csv needs --schema")
        schema_values = read_config(ns.schema)
        extra.update(schema_values)
        extra.update({"source": "csv", "csv": ns.csv})
        extra.setdefault("corruption_ratio", "0")
    elif ns.data:
        extra.update({"source": "file", "data": ns.data})
    else:
        raise ConfigError("fit needs --data or --csv")
    cfg = replace(_load_cfg(ns, extra), repeats=ns.repeats or 1)
    run_experiment(cfg, ns.out)
    if ns.save_estimate:
        if cfg.source != "file":
            raise ConfigError("--save-estimate is only supported with --data")
        ds = load_dataset(cfg.data)
        beta = fit_algorithm(ns.algo, ds.batches, cfg, cfg.threads or 1)
        with open(ns.save_estimate, "w", encoding="utf-8") as fh:
            json.dump({"algo": ns.algo, "beta": [float(v) for v in beta]}, fh)
            fh.write("\n")
    return EXIT_OK


def cmd_sweep(ns) -> int:
    run_experiment(_load_cfg(ns), ns.out)
    return EXIT_OK


def cmd_eval(ns) -> int:
    try:
        with open(ns.estimate, encoding="utf-8") as fh:
            est = json.load(fh)
        beta = as_coefficients(est["beta"])
        algo = str(est.get("algo", "external"))
    except (OSError, ValueError, KeyError) as exc:
        raise DataFormatError(f"{ns.estimate}: cannot read estimate: {exc}") from None
    ds = load_dataset(ns.data)
    batches, truth = ds.batches, ds.truth
    p, n, m = batches[0].p, batches[0].n, len(batches)
    common = ("0", algo, p, n, m, ds.spec.gamma if ds.spec else 0.0,
              str(ds.spec.layout) if ds.spec else "file")
    rows = []
    if truth is not None:
        rows.append(ResultRow(*common, "l2_error", l2_error(beta, truth.beta_star)))
        clean = np.concatenate([b.y - u for b, u in zip(batches, truth.corruption_vectors)])
    else:
        clean = np.concatenate([b.y for b in batches])
    rows.append(ResultRow(*common, "mae",
                          mae(np.concatenate([predict(b, beta) for b in batches]), clean)))
    rows.sort(key=ResultRow.sort_key)
    if ns.out:
        write_rows(ns.out, rows)
    else:
        sys.stdout.write(format_rows(rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value experiment file")
    common.add_argument("--seed", type=int)
    common.add_argument("--repeats", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--corruption-ratio", help="one value or a comma-separated list")
    common.add_argument("--batch-size", help="samples per batch (n); list allowed in sweep")
    common.add_argument("--batches", help="number of batches (m); list allowed in sweep")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = _Parser(prog="robust-lsq", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="write a synthetic dataset file")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    f = sub.add_parser("fit", parents=[common], help="fit one algorithm on one dataset")
    f.add_argument("--algo", required=True, choices=["drlr", "orlr", "ols-avg", "hrr-avg"])
    f.add_argument("--data", help="dataset file written by 'gen'")
    f.add_argument("--csv", help="numeric CSV file (train/test split, optional injection)")
    f.add_argument("--schema", help="key = value file: target, features, delimiter, ...")
    f.add_argument("--out", required=True, help="result CSV")
    f.add_argument("--save-estimate", help="also write the fitted coefficients as JSON")
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("sweep", parents=[common], help="grid over corruption ratio / n / m")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sweep)

    e = sub.add_parser("eval", parents=[common], help="metrics for a saved estimate")
    e.add_argument("--estimate", required=True, help="JSON written by 'fit --save-estimate'")
    e.add_argument("--data", required=True)
    e.add_argument("--out", help="result CSV (default: stdout)")
    e.set_defaults(func=cmd_eval)
    return ap


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return ns.func(ns)
    except ConfigError as exc:
        print(f"robust-lsq: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"robust-lsq: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DataFormatError, DatasetIOError, ContractError) as exc:
        print(f"robust-lsq: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
