"""Command-line entry point.

Every command reads an optional JSON config with three blocks,
``{"model": {...}, "job": {...}, "output": {...}}``; command-line flags
override file values.  Outputs are CSV (or JSON) files in
``output.path`` plus a ``manifest.json`` recording the resolved config,
the seed, a git-style SHA-1 of every output and the wall time.

Units: dot and chain commands take and report time in units of ``1/J``
(``1/J2`` for the chain), sizes as ``xi = 2s/N - 1``.  Diffusion-reaction
commands count time in units of ``1/lambda`` (``mc-dot --process dr``)
or in steps (``mc-dr``, ``scramblon-compare``), sizes as ``m/N``.

Exit codes: 0 success, 1 failed ``verify``, 2 invalid configuration,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from typing import Dict, List, Optional, Sequence

import numpy as np

from .analytics import LargeNJob, otoc_large_n, size_dist_finite_n, size_dist_large_n
from .errors import (ConfigurationError, DegeneracyError, DomainError, FitError, IntegrationError,
                     NumericError)
from .evolver import EvolveConfig, evolve_dot, otoc_curves
from .model import ChainModel, DotModel, SizeDistribution, SizeGrid
from .stochastic import (DRParams0d, DRParamsChain, euler_maruyama, front_position, mc_chain_master,
                         mc_dot_dr, mc_dr_chain, single_scramblon)
from .verify import run_all

__all__ = ["main", "run", "load_config", "COMMANDS"]

COMMANDS = ("otoc", "sizedist", "mc-dot", "mc-chain", "mc-dr", "scramblon-compare", "verify")

# block -> key -> (type, flag)
SCHEMA: Dict[str, Dict[str, tuple]] = {
    "model": {
        "N": (int, "--N"),
        "J": (float, "--J"),
        "J1": (float, "--J1"),
        "J2": (float, "--J2"),
        "L": (int, "--L"),
    },
    "job": {
        "r": (int, "--r"),
        "n": (int, "--n"),
        "s_star": (float, "--s-star"),
        "t_max": (float, "--t-max"),
        "dt": (float, "--dt"),
        "times": (list, "--times"),
        "method": (str, "--method"),
        "with_largeN": (bool, "--with-largeN"),
        "ensemble": (int, "--ensemble"),
        "seed": (int, "--seed"),
        "workers": (int, "--workers"),
        "process": (str, "--process"),
        "mode": (str, "--mode"),
        "m0": (int, "--m0"),
        "init": (list, "--init"),
        "lambda_dt": (float, "--lambda-dt"),
        "p_dt": (float, "--p-dt"),
        "steps": (int, "--steps"),
        "records": (int, "--records"),
    },
    "output": {
        "path": (str, "--out"),
        "format": (str, "--format"),
        "stride": (int, "--stride"),
    },
}

DEFAULTS = {
    "model": {"N": 1000, "J": 0.5, "J1": 1.0, "J2": 1.0, "L": 3},
    "job": {"r": 1, "n": 1, "s_star": None, "t_max": 4.0, "dt": None, "times": None,
            "method": "rk4", "with_largeN": False, "ensemble": 1000, "seed": 0,
            "workers": None, "process": "dr", "mode": None, "m0": None, "init": None,
            "lambda_dt": 0.2, "p_dt": 0.1, "steps": 60, "records": 100},
    "output": {"path": ".", "format": "csv", "stride": 1},
}


# ---------------------------------------------------------------------------
# configuration


def _coerce(block: str, key: str, value):
    kind = SCHEMA[block][key][0]
    if value is None:
        return None
    try:
        if kind is bool:
            if not isinstance(value, bool):
                raise TypeError
            return value
        if kind is list:
            if isinstance(value, str):
                value = [float(v) for v in value.split(",") if v.strip()]
            if not isinstance(value, list):
                raise TypeError
            return value
        if kind is int:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise TypeError
            return int(value)
        if kind is float:
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if not isinstance(value, str):
            raise TypeError
        return value
    except (TypeError, ValueError):
        raise ConfigurationError(
            f"{block}.{key}: expected {kind.__name__}, got {value!r}") from None


def load_config(path: Optional[str]) -> Dict[str, dict]:
    """Read and validate a JSON config; missing blocks are empty."""
    cfg = {b: {} for b in SCHEMA}
    if path is None:
        return cfg
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
    if not isinstance(raw, dict):
        raise ConfigurationError(f"{path}: top level must be an object")
    for block, body in raw.items():
        if block not in SCHEMA:
            raise ConfigurationError(f"{path}: unknown block {block!r}")
        if not isinstance(body, dict):
            raise ConfigurationError(f"{path}: block {block!r} must be an object")
        for key, value in body.items():
            if key not in SCHEMA[block]:
                raise ConfigurationError(f"{path}: unknown key {block}.{key}")
            cfg[block][key] = _coerce(block, key, value)
    return cfg


def resolve(file_cfg: Dict[str, dict], overrides: Dict[str, dict]) -> Dict[str, dict]:
    out = {}
    for block in SCHEMA:
        merged = dict(DEFAULTS[block])
        merged.update(file_cfg.get(block, {}))
        merged.update({k: v for k, v in overrides.get(block, {}).items() if v is not None})
        out[block] = merged
    fmt = out["output"]["format"]
    if fmt not in ("csv", "json"):
        raise ConfigurationError(f"output.format: must be 'csv' or 'json', got {fmt!r}")
    if out["output"]["stride"] < 1:
        raise ConfigurationError("output.stride: must be >= 1")
    return out


# ---------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def _git_blob_sha1(data: bytes) -> str:
    h = hashlib.sha1(b"blob %d\0" % len(data))
    h.update(data)
    return h.hexdigest()


class Writer:
    """Collects output tables and hashes what it writes."""

    def __init__(self, path: str, fmt: str):
        self.path = path
        self.fmt = fmt
        self.hashes: Dict[str, str] = {}
        try:
            os.makedirs(path, exist_ok=True)
        except OSError as exc:
            raise ConfigurationError(f"output.path: cannot create {path}: {exc.strerror}") from None

    def table(self, stem: str, header: Sequence[str], columns: Sequence[Sequence]) -> str:
        rows = list(zip(*columns))
        if self.fmt == "csv":
            name = stem + ".csv"
            with open(os.path.join(self.path, name), "w", encoding="utf-8", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(header)
                for row in rows:
                    w.writerow([_fmt(v) for v in row])
        else:
            name = stem + ".json"
            body = {"columns": list(header),
                    "rows": [[float(v) if not isinstance(v, (int, np.integer)) else int(v)
                              for v in row] for row in rows]}
            with open(os.path.join(self.path, name), "w", encoding="utf-8", newline="\n") as fh:
                json.dump(body, fh)
                fh.write("\n")
        with open(os.path.join(self.path, name), "rb") as fh:
            self.hashes[name] = _git_blob_sha1(fh.read())
        return name

    def manifest(self, command: str, cfg: dict, seed, wall_time: float) -> None:
        body = {"command": command, "config": cfg, "seed": seed,
                "outputs": dict(sorted(self.hashes.items())), "wall_time": wall_time}
        with open(os.path.join(self.path, "manifest.json"), "w", encoding="utf-8",
                  newline="\n") as fh:
            json.dump(body, fh, indent=2, sort_keys=True)
            fh.write("\n")


# ---------------------------------------------------------------------------
# commands


def _dot_cfg(job, stride):
    return EvolveConfig(job["t_max"], dt=job["dt"], method=job["method"], record_stride=stride)


def _cmd_otoc(cfg, out: Writer):
    m, job = cfg["model"], cfg["job"]
    model = DotModel(m["N"], m["J"])
    curves = otoc_curves(model, job["r"], [job["n"]], _dot_cfg(job, cfg["output"]["stride"]))
    c = curves[job["n"]]
    out.table("otoc", ("time", "value"), (c.times, c.values))
    if job["with_largeN"]:
        lj = LargeNJob(m["N"], m["J"], job["r"], job["n"], job["s_star"])
        out.table("otoc_largeN", ("time", "value"), (c.times, otoc_large_n(c.times, lj)))
    return None


def _snapshot_times(job):
    if job["times"]:
        return sorted(float(t) for t in job["times"])
    return [job["t_max"]]


def _cmd_sizedist(cfg, out: Writer):
    m, job = cfg["model"], cfg["job"]
    model = DotModel(m["N"], m["J"])
    N = model.N
    grid = SizeGrid(N, job["r"] % 2)
    init = SizeDistribution.delta(grid, job["r"])
    times = _snapshot_times(job)
    if any(t < 0 for t in times):
        raise DomainError("job.times: snapshot times must be >= 0")
    lj = LargeNJob(N, m["J"], job["r"], 1, job["s_star"]) if job["with_largeN"] else None
    width = 4.0 / N  # parity-grid spacing in xi
    cur, t_prev = init, 0.0
    for i, t in enumerate(times):
        if t > t_prev:
            cur = evolve_dot(model, cur, EvolveConfig(t - t_prev, dt=job["dt"],
                                                      method=job["method"],
                                                      record_stride=10 ** 9))[-1][1]
        t_prev = t
        xi = grid.xi
        out.table(f"sizedist_{i:03d}", ("xi", "density"), (xi, cur.probs / width))
        if lj is not None:
            inner = xi[(xi > -1.0) & (xi < 0.0)]
            out.table(f"sizedist_{i:03d}_largeN", ("xi", "density"),
                      (inner, np.atleast_1d(size_dist_large_n(inner, t, lj))))
            out.table(f"sizedist_{i:03d}_finiteN", ("xi", "density"),
                      (xi, np.atleast_1d(size_dist_finite_n(xi, t, lj))))
    out.table("sizedist_times", ("index", "time"), (list(range(len(times))), times))
    return None


def _cmd_mc_dot(cfg, out: Writer):
    m, job = cfg["model"], cfg["job"]
    N = m["N"]
    seed = job["seed"]
    if job["process"] == "dr":
        m0 = job["m0"] if job["m0"] is not None else max(1, N // 10)
        mode = job["mode"] or "gillespie"
        stats = mc_dot_dr(DRParams0d(1.0, N, job["dt"]), m0, job["t_max"], job["ensemble"],
                          seed, mode=mode, n_records=job["records"], workers=job["workers"])
        out.table("mc_dot", ("time", "value", "stderr"),
                  (stats.times, stats.mean[:, 0] / N, stats.stderr[:, 0] / N))
    elif job["process"] == "sde":
        J = m["J"]
        s_star = job["s_star"] if job["s_star"] is not None else max(1.0, N / 25.0)
        x0 = 2.0 * s_star / N - 1.0
        dt = job["dt"] if job["dt"] is not None else 1e-4 / (2.0 * J)
        stats = euler_maruyama("finiteN_dot", x0, 2.0 * J * dt, 2.0 * J * job["t_max"],
                               job["ensemble"], seed, N=N, n_records=job["records"],
                               workers=job["workers"])
        out.table("mc_dot", ("time", "value", "stderr"),
                  (stats.times / (2.0 * J), stats.mean[:, 0], stats.stderr[:, 0]))
    else:
        raise ConfigurationError(f"job.process: must be 'dr' or 'sde', got {job['process']!r}")
    return seed


def _long_format(out: Writer, stem, stats_times, mean, stderr):
    T, L = mean.shape
    xs = np.repeat(np.arange(L), T)
    ts = np.tile(stats_times, L)
    out.table(stem, ("x", "time", "value", "stderr"), (xs, ts, mean.T.ravel(), stderr.T.ravel()))


def _cmd_mc_chain(cfg, out: Writer):
    m, job = cfg["model"], cfg["job"]
    N, L = m["N"], m["L"]
    model = ChainModel(L, N, m["J1"], m["J2"])
    init = job["init"]
    if init is None:
        init = [1 - N // 2] + [-(N // 2)] * (L - 1)
    init = [int(v) for v in init]
    dt = job["dt"] if job["dt"] is not None else 1e-4
    stats = mc_chain_master(model, init, dt, job["t_max"], job["ensemble"], job["seed"],
                            mode=job["mode"] or "fixed_dt", n_records=job["records"],
                            workers=job["workers"])
    _long_format(out, "mc_chain", stats.times, 2.0 * stats.mean / N, 2.0 * stats.stderr / N)
    return job["seed"]


def _dr_chain_setup(cfg):
    m, job = cfg["model"], cfg["job"]
    L = m["L"]
    params = DRParamsChain(job["lambda_dt"], job["p_dt"], job["p_dt"], m["N"], L)
    init = job["init"]
    if init is None:
        init = [0] * L
        init[L // 2] = job["m0"] if job["m0"] is not None else 1
    return params, np.asarray([int(v) for v in init], dtype=np.int64)


def _cmd_mc_dr(cfg, out: Writer):
    job = cfg["job"]
    params, init = _dr_chain_setup(cfg)
    stats = mc_dr_chain(params, init, job["steps"], job["ensemble"], job["seed"],
                        record_every=cfg["output"]["stride"], workers=job["workers"])
    N = params.capacity
    _long_format(out, "mc_dr", stats.times, stats.mean / N, stats.stderr / N)
    return job["seed"]


def _cmd_scramblon(cfg, out: Writer):
    job = cfg["job"]
    params, init = _dr_chain_setup(cfg)
    N = params.capacity
    stats = mc_dr_chain(params, init, job["steps"], job["ensemble"], job["seed"],
                        workers=job["workers"])
    mc = stats.mean / N
    lin = single_scramblon(params, init / N, job["steps"])
    T, L = mc.shape
    xs = np.repeat(np.arange(L), T)
    ts = np.tile(stats.times, L)
    out.table("scramblon_compare", ("x", "time", "mc", "mc_stderr", "linear"),
              (xs, ts, mc.T.ravel(), (stats.stderr / N).T.ravel(), lin.T.ravel()))
    # half of the mean-field saturation value 1 + (p_l + p_r)/lambda
    thr = 0.5 * (1.0 + (params.p_left + params.p_right) / params.lambda_)
    center = int(np.argmax(init))
    fronts = np.array([front_position(p, center, thr) for p in mc])
    keep = ~np.isnan(fronts)
    out.table("front", ("time", "value"), (stats.times[keep], fronts[keep]))
    return job["seed"]


HANDLERS = {
    "otoc": _cmd_otoc,
    "sizedist": _cmd_sizedist,
    "mc-dot": _cmd_mc_dot,
    "mc-chain": _cmd_mc_chain,
    "mc-dr": _cmd_mc_dr,
    "scramblon-compare": _cmd_scramblon,
}


def run(command: str, cfg: Dict[str, dict]) -> int:
    """Execute ``command`` with a resolved config; returns the exit code."""
    if command == "verify":
        ok = True
        for name, passed, detail in run_all():
            print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
            ok &= passed
        return 0 if ok else 1
    out = Writer(cfg["output"]["path"], cfg["output"]["format"])
    t0 = time.perf_counter()
    seed = HANDLERS[command](cfg, out)
    out.manifest(command, cfg, seed, time.perf_counter() - t0)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="JSON config file")
    for block, keys in SCHEMA.items():
        for key, (kind, flag) in keys.items():
            dest = f"{block}.{key}"
            if kind is bool:
                common.add_argument(flag, dest=dest, action="store_const", const=True,
                                    default=None)
            elif kind is list:
                common.add_argument(flag, dest=dest, default=None, metavar="V1,V2,...")
            else:
                common.add_argument(flag, dest=dest, default=None,
                                    type=kind if kind is not str else str)
    parser = argparse.ArgumentParser(prog="chaos-lab",
                                     description="Operator-size dynamics: master equations, "
                                                 "closed forms and Monte Carlo.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    overrides: Dict[str, dict] = {b: {} for b in SCHEMA}
    try:
        for dest, value in vars(args).items():
            if "." in dest and value is not None:
                block, key = dest.split(".", 1)
                overrides[block][key] = _coerce(block, key, value)
        cfg = resolve(load_config(args.config), overrides)
        return run(args.command, cfg)
    except (DomainError, ConfigurationError) as exc:
        print(f"chaos-lab: configuration error: {exc}", file=sys.stderr)
        return 2
    except (IntegrationError, NumericError, DegeneracyError, FitError) as exc:
        print(f"chaos-lab: numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
