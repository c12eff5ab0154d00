"""Command-line front end.

    binclust fit --input table.csv --out results/
    binclust simulate --n 500 --seed 0 --out table.csv

Exit status: 0 on success, 1 for invalid input or flags, 2 for failures
while fitting or writing.  ``BINCLUST_LOG`` sets the log level.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from .estimators import conditional_density, default_grid, summarize_trace
from .files import parse_input, write_dataset, write_outputs
from .oracle import simulate_mixture_dataset
from .sampler import SamplerConfig, run_chain
from .types import BinclustError, BinLayout, BinnedDataset, Hyperparams, ValidationError, validate_dataset

log = logging.getLogger("binclust")

DEFAULTS = {
    "omega": 0.0,
    "c": 1.0,
    "a": 1.1,
    "b": 1.0,
    # the (1, 1.1) gamma prior on the total mass is read as (shape, rate)
    "alpha_shape": 1.0,
    "alpha_rate": 1.1,
    "iters": 30000,
    "burnin": 20000,
    "thin": 1,
    "seed": 0,
    "chains": 1,
    "grid": 512,
}


class UsageError(BinclustError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"{text} is not an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="binclust", description="Cluster binned univariate data with a gap-free random partition model.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    fit = sub.add_parser("fit", help="run the sampler on a frequency table")
    fit.add_argument("--input", type=Path, help="CSV table: center,frequency (or left,right,frequency)")
    fit.add_argument("--edges-format", action="store_true", help="input rows are left_edge,right_edge,frequency")
    fit.add_argument("--header", action="store_true", help="input has a header row")
    fit.add_argument("--config", type=Path, help="rerun from the config block of a summary JSON")
    fit.add_argument("--omega", type=float)
    fit.add_argument("--c", type=float, help="variance scale of the group-mean prior")
    fit.add_argument("--a", type=float)
    fit.add_argument("--b", type=float)
    fit.add_argument("--alpha-shape", type=float)
    fit.add_argument("--alpha-rate", type=float)
    fit.add_argument("--iters", type=int)
    fit.add_argument("--burnin", type=int)
    fit.add_argument("--thin", type=int)
    fit.add_argument("--seed", type=_u64)
    fit.add_argument("--chains", type=int)
    fit.add_argument("--grid", type=int, help="number of density grid points")
    fit.add_argument("--out", type=Path, default=Path("binclust_out"))

    sim = sub.add_parser("simulate", help="write a binned sample from the four-component test mixture")
    sim.add_argument("--n", type=int, default=500)
    sim.add_argument("--seed", type=_u64, default=0)
    sim.add_argument("--out", type=Path, required=True)
    sim.add_argument("--edges-format", action="store_true")
    return parser


def _settings(args) -> dict:
    settings = dict(DEFAULTS)
    settings.update(input=None, edges_format=False, header=False, data=None)
    if args.config is not None:
        try:
            record = json.loads(args.config.read_text())
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        settings.update(record.get("config", record))
    if args.input is not None:
        settings.update(input=str(args.input), edges_format=args.edges_format, header=args.header, data=None)
    for key in DEFAULTS:
        value = getattr(args, key)
        if value is not None:
            settings[key] = value
    return settings


def _load_dataset(settings: dict) -> BinnedDataset:
    # data embedded by a config rerun wins over the recorded input path
    if settings.get("data") is not None:
        data = settings["data"]
        dataset = BinnedDataset(BinLayout(tuple(data["edges"]), tuple(data["centers"]) if data.get("centers") else None), tuple(data["freqs"]))
        validate_dataset(dataset)
        return dataset
    if settings.get("input") is not None:
        path = Path(settings["input"])
        if not path.is_file():
            raise UsageError(f"input file not found: {path}")
        return parse_input(path, edges_format=settings["edges_format"], header=settings["header"])
    raise UsageError("fit needs --input (or --config with embedded data)")


def _config_echo(settings: dict, dataset: BinnedDataset) -> dict:
    echo = {key: settings[key] for key in DEFAULTS}
    echo.update(input=settings.get("input"), edges_format=settings["edges_format"], header=settings["header"])
    layout = dataset.layout
    echo["data"] = {
        "edges": list(layout.edges),
        "centers": list(layout.centers) if layout.centers is not None else None,
        "freqs": list(dataset.freqs),
    }
    return echo


def fit_one(dataset: BinnedDataset, settings: dict, chain: int, out_dir, echo: dict) -> dict:
    hyper = Hyperparams(
        omega=settings["omega"],
        c=settings["c"],
        a=settings["a"],
        b=settings["b"],
        alpha_shape=settings["alpha_shape"],
        alpha_rate=settings["alpha_rate"],
    )
    config = SamplerConfig(
        iterations=settings["iters"], burn_in=settings["burnin"], thin=settings["thin"], seed=settings["seed"]
    )
    start = time.perf_counter()
    trace = run_chain(dataset, hyper, config, chain=chain)
    summary = summarize_trace(trace, dataset.n)
    grid = default_grid(dataset.layout, settings["grid"])
    density = conditional_density(trace, summary.modal_partition, grid)
    runtime = time.perf_counter() - start
    record = dict(echo, chain=chain + 1)
    paths = write_outputs(
        trace, summary, grid, density, out_dir, settings["seed"], record, suffix=f"_chain{chain + 1}", runtime=runtime
    )
    log.info(
        "chain %d: modal partition %s (k=%d, %d of %d draws) in %.1fs",
        chain + 1,
        summary.modal_partition.token(),
        summary.k,
        summary.visits,
        summary.draws,
        runtime,
    )
    if summary.order_violations:
        log.warning("chain %d: group means not increasing at groups %s", chain + 1, summary.order_violations)
    return {"chain": chain + 1, "k": summary.k, "modal_partition": summary.modal_partition.token(), **{k: str(v) for k, v in paths.items()}}


def cmd_fit(args) -> int:
    settings = _settings(args)
    dataset = _load_dataset(settings)
    # fail before any work on bad numbers
    Hyperparams(settings["omega"], settings["c"], settings["a"], settings["b"], settings["alpha_shape"], settings["alpha_rate"])
    SamplerConfig(iterations=settings["iters"], burn_in=settings["burnin"], thin=settings["thin"], seed=settings["seed"])
    if settings["chains"] < 1:
        raise UsageError("--chains must be positive")
    if settings["grid"] < 2:
        raise UsageError("--grid must be at least 2")
    echo = _config_echo(settings, dataset)
    chains = range(settings["chains"])
    if settings["chains"] == 1:
        results = [fit_one(dataset, settings, 0, args.out, echo)]
    else:
        workers = min(settings["chains"], os.cpu_count() or 1)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(fit_one, dataset, settings, i, args.out, echo) for i in chains]
            results = [f.result() for f in futures]
    for r in results:
        print(f"chain {r['chain']}: k={r['k']} modal partition {r['modal_partition']} -> {r['summary']}")
    return 0


def cmd_simulate(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be positive")
    dataset = simulate_mixture_dataset(args.seed, args.n)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_dataset(dataset, args.out, edges_format=args.edges_format)
    print(f"wrote {dataset.m} bins, n={dataset.n} to {args.out}")
    return 0


def _configure_logging() -> None:
    level = os.environ.get("BINCLUST_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(name)s %(levelname)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "fit":
            return cmd_fit(args)
        return cmd_simulate(args)
    except (ValidationError, UsageError) as exc:
        print(f"binclust: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        log.debug("fit failed", exc_info=True)
        print(f"binclust: runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
