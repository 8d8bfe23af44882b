"""Command-line front end.

Every command writes its tables as CSV (17 significant digits) and a
``*_summary.json`` that echoes the fully resolved run configuration.
Errors exit with status 2 and a JSON object on stderr.
"""

import argparse
import csv
import json
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import _backend
from .bandwidth import DEFAULT_LAMBDAS, candidate_bandwidths, select_bandwidth
from .dimest import estimate_dimension
from .errors import BadConfig, LocregError
from .kernels import FAMILIES, KernelSpec
from .locpoly import Dataset, PolyBasis, fit_arrays, standardize
from .synth import (
    ON_MANIFOLD_ORIGIN,
    GenConfig,
    default_sweep,
    generate,
    middle_block,
    noise_sweep,
    rate_study,
    run_experiment,
)

COMMANDS = ("generate", "estimate-dim", "select-bandwidth", "fit", "experiment",
            "noise-sweep", "rate-study")


@dataclass
class RunConfig:
    command: str
    seed: int = 0
    n: int = 200
    sigma_prime: float = 0.0
    k: int = 15
    kernel: str = "epanechnikov"
    degree: int = 1
    lambdas: str = "default"
    block_size: int = 100
    block: Optional[List[int]] = None
    input: Optional[str] = None
    output_dir: str = "."
    reps: int = 20
    ns: List[int] = field(default_factory=lambda: [500, 1000, 2000, 4000, 8000])
    sweep: str = "0.02:0.20:0.02"
    lambda0: float = 1.0
    h: Optional[float] = None
    ks: Optional[List[int]] = None

    def validate(self):
        if self.command not in COMMANDS:
            raise BadConfig(f"unknown command {self.command!r}")
        if self.degree < 0:
            raise BadConfig("degree must be >= 0")
        if self.kernel not in FAMILIES:
            raise BadConfig(f"kernel must be one of {FAMILIES}")
        if self.reps < 1:
            raise BadConfig("reps must be >= 1")
        if self.h is not None and not self.h > 0:
            raise BadConfig("h must be positive")
        self.lambda_grid()
        self.sweep_values()
        return self

    def lambda_grid(self):
        if self.lambdas == "default":
            return list(DEFAULT_LAMBDAS)
        try:
            return [float(v) for v in self.lambdas.split(",") if v.strip()]
        except ValueError:
            raise BadConfig(f"cannot parse --lambdas {self.lambdas!r}") from None

    def sweep_values(self):
        try:
            parts = [float(v) for v in self.sweep.split(":")]
        except ValueError:
            raise BadConfig(f"cannot parse --sweep {self.sweep!r}") from None
        if len(parts) == 1:
            return parts
        if len(parts) != 3 or parts[2] <= 0:
            raise BadConfig("--sweep takes start:stop:step or a single value")
        start, stop, step = parts
        count = int(round((stop - start) / step)) + 1
        return [round(start + i * step, 12) for i in range(count)]

    def to_json(self):
        return asdict(self)

    @classmethod
    def from_json(cls, doc):
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise BadConfig(f"unknown config keys {sorted(unknown)}")
        return cls(**doc).validate()


# -- io -------------------------------------------------------------------

def fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    return format(float(v), ".17g")


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(_clean(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_dataset(path):
    """Read a CSV with columns x1..xD and y."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader if row]
    xcols = [i for i, name in enumerate(header) if name.startswith("x")]
    if "y" not in header or not xcols:
        raise BadConfig(f"{path}: expected columns x1..xD and y, got {header}")
    arr = np.array(rows, dtype=np.float64).reshape(-1, len(header))
    return Dataset(arr[:, xcols], arr[:, header.index("y")])


def write_dataset(path, data):
    header = [f"x{a + 1}" for a in range(data.D)] + ["y"]
    write_csv(path, header, (list(x) + [y] for x, y in zip(data.X.tolist(), data.Y.tolist())))


# -- commands ---------------------------------------------------------------

def _source(cfg):
    if cfg.input:
        return read_dataset(cfg.input)
    return generate(GenConfig(cfg.n, cfg.seed, cfg.sigma_prime)).dataset


def _block(cfg, data):
    if cfg.block:
        ids = np.array(cfg.block, dtype=np.int64)
        if ids.min() < 0 or ids.max() >= data.n:
            raise BadConfig("block id out of range")
        return ids
    return middle_block(data, cfg.block_size)


def _summary(cfg, out, name, result):
    doc = {"command": cfg.command, "config": cfg.to_json(), "backend": _backend.NAME,
           "result": result}
    write_json(out / name, doc)
    return doc


def cmd_generate(cfg, out):
    gen = generate(GenConfig(cfg.n, cfg.seed, cfg.sigma_prime))
    write_dataset(out / "data.csv", gen.dataset)
    write_csv(out / "truth.csv", ["m_true", "latent"], zip(gen.truth.tolist(), gen.latent.tolist()))
    return _summary(cfg, out, "generate_summary.json", {"n": cfg.n, "D": gen.dataset.D})


def cmd_estimate_dim(cfg, out):
    data, _ = standardize(_source(cfg))
    block = _block(cfg, data)
    est = estimate_dimension(data.X, block, cfg.k)
    write_csv(out / "dim_points.csv", ["id", "d_local"], zip(est.ids.tolist(), est.per_point.tolist()))
    result = {"k": est.k, "d_hat": est.d_hat, "block_size": int(block.size),
              "skipped": est.skipped.tolist()}
    if cfg.ks:
        sweep = [(k, estimate_dimension(data.X, block, k).d_hat) for k in cfg.ks]
        write_csv(out / "dim_ksweep.csv", ["k", "d_hat"], sweep)
        result["k_sweep"] = [{"k": k, "d_hat": d} for k, d in sweep]
    return _summary(cfg, out, "dim_summary.json", result)


def _selection(cfg, data, block):
    d_hat = estimate_dimension(data.X, block, cfg.k).d_hat
    grid = candidate_bandwidths(cfg.lambda_grid(), data.n, d_hat)
    sel = select_bandwidth(data, block, grid, PolyBasis(cfg.degree, data.D), cfg.kernel)
    return d_hat, grid, sel


def cmd_select_bandwidth(cfg, out):
    data, _ = standardize(_source(cfg))
    block = _block(cfg, data)
    d_hat, grid, sel = _selection(cfg, data, block)
    rows = [(lam, sc.h, sc.atr, sc.rss_block, sc.mgcv, sc.feasible)
            for lam, sc in zip(grid.lambdas.tolist(), sel.scores)]
    write_csv(out / "bandwidth_scores.csv", ["lambda", "h", "atr", "rss", "mgcv", "feasible"], rows)
    chosen = sel.scores[sel.chosen_index]
    return _summary(cfg, out, "bandwidth_summary.json", {
        "d_hat": d_hat, "h": sel.chosen, "lambda": float(grid.lambdas[sel.chosen_index]),
        "mgcv": chosen.mgcv, "atr": chosen.atr,
    })


def cmd_fit(cfg, out):
    raw = _source(cfg)
    data, st = standardize(raw)
    result = {}
    if cfg.h is None:
        block = _block(cfg, data)
        d_hat, _, sel = _selection(cfg, data, block)
        h = sel.chosen
        result["d_hat"] = d_hat
    else:
        h = cfg.h
    kernel = KernelSpec(cfg.kernel, h, data.D)
    coef, _, support, rank = fit_arrays(data, data.X, kernel, PolyBasis(cfg.degree, data.D))
    header = [f"x{a + 1}" for a in range(data.D)] + ["m_hat", "h", "support_count", "effective_rank"]
    rows = (list(x) + [c, h, s, r] for x, c, s, r in
            zip(raw.X.tolist(), coef[:, 0].tolist(), support.tolist(), rank.tolist()))
    write_csv(out / "predictions.csv", header, rows)
    result.update({"h": h, "no_support": int(np.sum(support == 0)),
                   "rank_deficient": int(np.sum((support > 0) & (rank < coef.shape[1])))})
    return _summary(cfg, out, "fit_summary.json", result)


def cmd_experiment(cfg, out):
    res = run_experiment(GenConfig(cfg.n, cfg.seed, cfg.sigma_prime), cfg.k, cfg.lambda_grid(),
                         cfg.block_size, cfg.kernel, cfg.degree)
    order = np.argsort(res.x1_std, kind="stable")
    write_csv(out / "experiment_curve.csv", ["id", "x1_std", "m_true", "fit_ull", "fit_mll"],
              zip(res.block[order].tolist(), res.x1_std[order].tolist(), res.truth[order].tolist(),
                  res.fit_ull[order].tolist(), res.fit_mll[order].tolist()))
    return _summary(cfg, out, "experiment_summary.json", res.summary())


def cmd_noise_sweep(cfg, out):
    seeds = list(range(cfg.seed, cfg.seed + cfg.reps))
    rows = noise_sweep(cfg.sweep_values(), seeds, cfg.k, cfg.lambda_grid(), cfg.n,
                       cfg.block_size, cfg.kernel, cfg.degree)
    write_csv(out / "noise_sweep.csv", ["sigma_prime", "mean_mse", "sd_mse"],
              ((r.sigma_prime, r.mean_mse, r.sd_mse) for r in rows))
    return _summary(cfg, out, "noise_sweep_summary.json", {
        "seeds": seeds,
        "rows": [{"sigma_prime": r.sigma_prime, "mean_mse": r.mean_mse, "sd_mse": r.sd_mse}
                 for r in rows],
    })


def cmd_rate_study(cfg, out):
    seeds = list(range(cfg.seed, cfg.seed + cfg.reps))
    study = rate_study(cfg.ns, seeds, cfg.lambda0, cfg.degree, ON_MANIFOLD_ORIGIN,
                       kernel_family=cfg.kernel)
    expo = -1.0 / (2 * (cfg.degree + 1) + 1)
    write_csv(out / "rate_study.csv", ["n", "h", "mse"],
              ((n, cfg.lambda0 * n ** expo, m) for n, m in zip(study.ns.tolist(), study.mse.tolist())))
    return _summary(cfg, out, "rate_summary.json", {
        "slope": study.slope, "degenerate": study.slope is None,
        "theory_slope": -2 * (cfg.degree + 1) / (2 * (cfg.degree + 1) + 1),
    })


HANDLERS = {
    "generate": cmd_generate,
    "estimate-dim": cmd_estimate_dim,
    "select-bandwidth": cmd_select_bandwidth,
    "fit": cmd_fit,
    "experiment": cmd_experiment,
    "noise-sweep": cmd_noise_sweep,
    "rate-study": cmd_rate_study,
}


def _int_list(text):
    return [int(v) for v in text.split(",") if v.strip()]


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON RunConfig; replaces all other flags")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--n", type=int, default=200)
    common.add_argument("--sigma-prime", type=float, default=0.0)
    common.add_argument("--k", type=int, default=15)
    common.add_argument("--kernel", choices=FAMILIES, default="epanechnikov")
    common.add_argument("--degree", type=int, default=1)
    common.add_argument("--lambdas", default="default", help='comma list or "default"')
    common.add_argument("--block-size", type=int, default=100)
    common.add_argument("--block", type=_int_list, help="explicit comma list of row ids")
    common.add_argument("--input", help="dataset CSV (x1..xD, y); otherwise data are generated")
    common.add_argument("--output-dir", default=".")
    common.add_argument("--reps", type=int, default=20, help="seeds per setting")
    common.add_argument("--ns", type=_int_list, default=[500, 1000, 2000, 4000, 8000])
    common.add_argument("--sweep", default="0.02:0.20:0.02", help="start:stop:step")
    common.add_argument("--lambda0", type=float, default=1.0)
    common.add_argument("--h", type=float, help="fixed bandwidth for fit (standardised units)")
    common.add_argument("--ks", type=_int_list, help="k values for a dimension-estimate sweep")

    parser = argparse.ArgumentParser(prog="locreg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def resolve_config(args):
    if args.config:
        with open(args.config) as fh:
            doc = json.load(fh)
        doc = doc.get("config", doc)
        if doc.get("command", args.command) != args.command:
            raise BadConfig(f"config is for {doc['command']!r}, not {args.command!r}")
        doc["command"] = args.command
        return RunConfig.from_json(doc)
    values = {f.name: getattr(args, f.name) for f in fields(RunConfig) if f.name != "command"}
    return RunConfig(command=args.command, **values).validate()


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        doc = HANDLERS[cfg.command](cfg, out)
    except (LocregError, OSError, ValueError) as exc:
        err = exc.to_dict() if isinstance(exc, LocregError) else {
            "error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(err), file=sys.stderr)
        return 2
    print(json.dumps(_clean(doc["result"]), sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
