"""Experiment harness: seeded repeats over a parameter grid, emitted as metric rows."""
from __future__ import annotations

import configparser
import csv
import io
import itertools
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable

import numpy as np

from .batch_model import predict
from .consolidation import MedianConfig
from .data_io import CsvSchema, load_csv, load_dataset, split_batches
from .datagen import Layout, SynthSpec, generate, inject_corruption
from .drlr import default_threads, drlr_fit
from .errors import ConfigError
from .hrr import HrrConfig
from .metrics import baseline_hrr_avg, baseline_ols_avg, l2_error, mae
from .orlr import orlr_stream

__all__ = [
    "ALGORITHMS",
    "CSV_HEADER",
    "ExperimentConfig",
    "ResultRow",
    "fit_algorithm",
    "run_experiment",
    "summarize",
    "format_rows",
    "write_rows",
    "read_rows",
    "read_config",
    "config_from_mapping",
]

log = logging.getLogger(__name__)

ALGORITHMS = ("drlr", "orlr", "ols-avg", "hrr-avg")
METRICS = ("l2_error", "mae", "fit_seconds")
CSV_HEADER = ("run", "algo", "p", "n", "m", "gamma", "layout", "metric", "value")


@dataclass(frozen=True)
class ResultRow:
    run: str
    algo: str
    p: int
    n: int
    m: int
    gamma: float
    layout: str
    metric: str
    value: float

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        if not (np.isfinite(self.value) and self.value >= 0):
            raise ValueError(f"metric value must be finite and non-negative, got {self.value}")

    def sort_key(self):
        run = (0, int(self.run), "") if self.run.isdigit() else (1, 0, self.run)
        return (run, self.algo, self.p, self.n, self.m, self.gamma, self.layout, self.metric)


def _floats(v) -> tuple:
    if isinstance(v, (int, float)):
        return (float(v),)
    return tuple(float(t) for t in str(v).replace(" ", "").split(",") if t)


def _ints(v) -> tuple:
    if isinstance(v, int):
        return (v,)
    return tuple(int(t) for t in str(v).replace(" ", "").split(",") if t)


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative experiment; list-valued fields form the sweep grid."""

    source: str = "synthetic"
    algos: tuple = ALGORITHMS
    p: int = 20
    n: tuple = (1000,)
    m: tuple = (10,)
    gamma: tuple = (0.1, 0.2, 0.3, 0.4)
    sigma: float = 0.1
    layouts: tuple = ("uniform",)
    seed: int = 0
    repeats: int = 10
    capacity: int = 7
    threads: int | None = None
    data: str | None = None
    csv: str | None = None
    schema: CsvSchema | None = None
    train_fraction: float = 0.5
    order: str = "sequential"
    hrr: HrrConfig = field(default_factory=HrrConfig)
    median: MedianConfig = field(default_factory=MedianConfig)

    def __post_init__(self):
        if self.source not in ("synthetic", "file", "csv"):
            raise ConfigError(f"unknown data source {self.source!r}")
        bad = [a for a in self.algos if a not in ALGORITHMS]
        if bad or not self.algos:
            raise ConfigError(f"unknown algorithm(s) {bad}; choose from {ALGORITHMS}")
        if int(self.repeats) < 1:
            raise ConfigError("repeats must be at least 1")
        if int(self.capacity) < 1:
            raise ConfigError("ORLR pool capacity must be at least 1")
        if self.source == "file" and not self.data:
            raise ConfigError("file source needs a dataset path")
        if self.source == "csv" and (not self.csv or self.schema is None):
            raise ConfigError("csv source needs a CSV path and a schema")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("train_fraction must be in (0, 1)")
        for g in self.gamma:
            if not 0.0 <= g < (0.5 if self.source == "synthetic" else 1.0):
                raise ConfigError(f"corruption ratio {g} out of range")
        if self.source == "synthetic":
            for lay in self.layouts:
                Layout.parse(lay)


def _run_seed(seed: int, run: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(run)]).generate_state(1, np.uint64)[0])


def fit_algorithm(algo: str, batches, cfg: ExperimentConfig, threads: int = 1):
    if algo == "drlr":
        return drlr_fit(batches, cfg.hrr, cfg.median, threads=threads).consolidated
    if algo == "orlr":
        return orlr_stream(batches, cfg.capacity, cfg.hrr, cfg.median, threads)[0]
    if algo == "ols-avg":
        return baseline_ols_avg(batches)
    if algo == "hrr-avg":
        return baseline_hrr_avg(batches, cfg.hrr)
    raise ConfigError(f"unknown algorithm {algo!r}")


def _timed_fit(algo, batches, cfg, threads):
    t0 = time.perf_counter()
    beta = fit_algorithm(algo, batches, cfg, threads)
    return beta, time.perf_counter() - t0


def _tasks(cfg: ExperimentConfig):
    """One task per (grid point, repeat). Each yields a list of rows when run."""
    if cfg.source == "synthetic":
        for n, m, gamma, lay in itertools.product(cfg.n, cfg.m, cfg.gamma, cfg.layouts):
            for r in range(cfg.repeats):
                yield _synthetic_task, (n, m, gamma, lay, r)
    elif cfg.source == "file":
        for r in range(cfg.repeats):
            yield _file_task, (r,)
    else:
        for gamma in cfg.gamma:
            for r in range(cfg.repeats):
                yield _csv_task, (gamma, r)


def _synthetic_task(cfg, threads, n, m, gamma, lay, r):
    spec = SynthSpec(cfg.p, n, m, gamma, cfg.sigma, Layout.parse(lay), _run_seed(cfg.seed, r))
    batches, truth = generate(spec)
    rows = []
    for algo in cfg.algos:
        beta, secs = _timed_fit(algo, batches, cfg, threads)
        common = (str(r), algo, cfg.p, n, m, gamma, str(spec.layout))
        rows.append(ResultRow(*common, "l2_error", l2_error(beta, truth.beta_star)))
        rows.append(ResultRow(*common, "fit_seconds", secs))
    return rows


def _file_task(cfg, threads, r):
    ds = _load_cached(cfg.data)
    batches, truth = ds.batches, ds.truth
    p, n, m = batches[0].p, batches[0].n, len(batches)
    gamma = ds.spec.gamma if ds.spec else 0.0
    layout = str(ds.spec.layout) if ds.spec else "file"
    rows = []
    for algo in cfg.algos:
        beta, secs = _timed_fit(algo, batches, cfg, threads)
        common = (str(r), algo, p, n, m, gamma, layout)
        if truth is not None:
            rows.append(ResultRow(*common, "l2_error", l2_error(beta, truth.beta_star)))
            clean = np.concatenate([b.y - u for b, u in zip(batches, truth.corruption_vectors)])
        else:
            clean = np.concatenate([b.y for b in batches])
        pred = np.concatenate([predict(b, beta) for b in batches])
        rows.append(ResultRow(*common, "mae", mae(pred, clean)))
        rows.append(ResultRow(*common, "fit_seconds", secs))
    return rows


_CACHE: dict = {}


def _load_cached(path):
    key = ("dataset", str(path))
    if key not in _CACHE:
        _CACHE[key] = load_dataset(path)
    return _CACHE[key]


def _csv_split(cfg):
    key = ("csv", str(cfg.csv), cfg.schema, cfg.train_fraction)
    if key not in _CACHE:
        data = load_csv(cfg.csv, cfg.schema)
        cut = int(round(cfg.train_fraction * data.y.size))
        if cut < 1 or cut >= data.y.size:
            raise ConfigError("train/test split leaves an empty side")
        _CACHE[key] = (data.x[:, :cut], data.y[:cut], data.x[:, cut:], data.y[cut:])
    return _CACHE[key]


def _csv_task(cfg, threads, gamma, r):
    x_tr, y_tr, x_te, y_te = _csv_split(cfg)
    n = cfg.n[0]
    y_bad, _ = inject_corruption(y_tr, gamma, _run_seed(cfg.seed, r))
    batches = split_batches(x_tr, y_bad, n, cfg.order, _run_seed(cfg.seed, r))
    p, m = x_tr.shape[0], len(batches)
    rows = []
    for algo in cfg.algos:
        beta, secs = _timed_fit(algo, batches, cfg, threads)
        common = (str(r), algo, p, n, m, gamma, "inject")
        rows.append(ResultRow(*common, "mae", mae(x_te.T @ beta, y_te)))
        rows.append(ResultRow(*common, "fit_seconds", secs))
    return rows


def summarize(rows: Iterable[ResultRow]) -> list:
    """Mean and standard deviation rows over repeats of each (algo, grid point, metric)."""
    groups: dict = {}
    for row in rows:
        if row.run.isdigit():
            key = (row.algo, row.p, row.n, row.m, row.gamma, row.layout, row.metric)
            groups.setdefault(key, []).append(row.value)
    out = []
    for key, vals in groups.items():
        v = np.array(vals)
        out.append(ResultRow("mean", *key, float(np.mean(v))))
        out.append(ResultRow("std", *key, float(np.std(v, ddof=1)) if v.size > 1 else 0.0))
    return out


def run_experiment(cfg: ExperimentConfig, out=None) -> list:
    """Run every repeat of every grid point and return sorted per-run plus summary rows.

    With ``out``, rows are also written as CSV; if a run fails, the rows of
    the runs that finished are written before the error propagates.
    """
    budget = cfg.threads or default_threads()
    tasks = list(_tasks(cfg))
    rows: list = []
    _CACHE.clear()
    try:
        if budget > 1 and len(tasks) > 1:
            with ThreadPoolExecutor(budget) as ex:
                futures = [ex.submit(fn, cfg, 1, *args) for fn, args in tasks]
                for fut in futures:
                    rows.extend(fut.result())
        else:
            for fn, args in tasks:
                rows.extend(fn(cfg, budget, *args))
    except BaseException:
        if out is not None and rows:
            write_rows(out, sorted(rows, key=ResultRow.sort_key))
            log.error("run failed; %d completed row(s) flushed to %s", len(rows), out)
        raise
    finally:
        _CACHE.clear()
    rows = sorted(rows + summarize(rows), key=ResultRow.sort_key)
    if out is not None:
        write_rows(out, rows)
    return rows


def _fmt(v) -> str:
    return format(v, ".17g") if isinstance(v, float) else str(v)


def format_rows(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([r.run, r.algo, r.p, r.n, r.m, _fmt(float(r.gamma)), r.layout, r.metric,
                    _fmt(float(r.value))])
    return buf.getvalue()


def write_rows(path, rows) -> None:
    Path(path).write_text(format_rows(rows), encoding="utf-8", newline="")


def read_rows(path) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        rd = csv.DictReader(fh)
        return [ResultRow(d["run"], d["algo"], int(d["p"]), int(d["n"]), int(d["m"]),
                          float(d["gamma"]), d["layout"], d["metric"], float(d["value"]))
                for d in rd]


def read_config(path) -> dict:
    """Flat ``key = value`` file; an optional ``[section]`` header is ignored."""
    text = Path(path).read_text(encoding="utf-8")
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    if not text.lstrip().startswith("["):
        text = "[experiment]\n" + text
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    merged = {}
    for sec in parser.sections():
        merged.update(parser[sec])
    return merged


def config_from_mapping(d: dict, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Build a config from string values (config file entries or CLI overrides)."""
    cfg = base or ExperimentConfig()
    kw: dict = {}
    try:
        for key, val in d.items():
            if val is None:
                continue
            key = key.replace("-", "_")
            if key in ("source", "data", "csv", "order"):
                kw[key] = str(val)
            elif key in ("algos", "algo"):
                kw["algos"] = tuple(a.strip() for a in str(val).split(",") if a.strip())
            elif key in ("p", "seed", "repeats", "capacity", "threads"):
                kw[key] = int(val)
            elif key in ("n", "batch_size"):
                kw["n"] = _ints(val)
            elif key in ("m", "batches"):
                kw["m"] = _ints(val)
            elif key in ("gamma", "corruption_ratio", "corruption"):
                kw["gamma"] = _floats(val)
            elif key in ("layout", "layouts"):
                kw["layouts"] = tuple(t.strip() for t in str(val).split(",") if t.strip())
            elif key in ("sigma", "train_fraction"):
                kw[key] = float(val)
            elif key in ("tolerance_eps", "max_iterations"):
                kw["hrr"] = replace(kw.get("hrr", cfg.hrr), **{key: type(getattr(cfg.hrr, key))(val)})
            elif key in ("target", "features", "delimiter", "add_intercept"):
                continue
            else:
                raise ConfigError(f"unknown configuration key {key!r}")
        schema_keys = {k: v for k, v in d.items() if k in ("target", "features", "delimiter", "add_intercept")}
        if "target" in schema_keys:
            kw["schema"] = CsvSchema.from_mapping(schema_keys)
    except (ValueError, KeyError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad configuration value: {exc}") from None
    return replace(cfg, **kw)
