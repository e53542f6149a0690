"""Command-line surface: verify | sample | sweep | threshold | tradeoff | lattice.

Runs are driven by a flat ``key = value`` configuration file; command-line
``--set key=value`` overrides win over file values. Data goes to CSV/JSON
files written atomically (temp + rename); logs go to stderr, controlled by
the PHOCS_LOG environment variable (debug | info | warning; default info).
Exit codes: 0 success, 1 verification or validation failure, 2 I/O failure.
"""

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__, channel, decode, montecarlo, verification
from .channel import PhysicalParams
from .lattice import AXES, Lattice
from .montecarlo import PointSpec

log = logging.getLogger("phocs")

CSV_HEADER = ("d,p_C,p_L,R,mode,trials,failures,rate,ci_low,ci_high,seed,"
              "loss_policy")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

_FLOAT_LIST = "float_list"
_INT_LIST = "int_list"

CONFIG_SCHEMA = {
    # key: (type, default)
    "mode": (str, "photonic"),
    "loss_policy": (str, "blind"),
    "sizes": (_INT_LIST, [7, 9, 11]),
    "R": (int, 7),
    "p_C": (_FLOAT_LIST, [0.0]),
    "p_L": (_FLOAT_LIST, [0.0]),
    "p_flip": (_FLOAT_LIST, [0.0]),
    "p_lost": (_FLOAT_LIST, [0.0]),
    "trials": (int, 10000),
    "master_seed": (int, 20260808),
    "workers": (int, 0),
    "min_d": (int, 9),
    "max_d": (int, montecarlo.DEFAULT_MAX_D),
    "tradeoff_p_L": (_FLOAT_LIST, []),
    "out_dir": (str, "runs/latest"),
}


@dataclass
class RunConfig:
    mode: str = "photonic"
    loss_policy: str = "blind"
    sizes: list = field(default_factory=lambda: [7, 9, 11])
    R: int = 7
    p_C: list = field(default_factory=lambda: [0.0])
    p_L: list = field(default_factory=lambda: [0.0])
    p_flip: list = field(default_factory=lambda: [0.0])
    p_lost: list = field(default_factory=lambda: [0.0])
    trials: int = 10000
    master_seed: int = 20260808
    workers: int = 0
    min_d: int = 9
    max_d: int = montecarlo.DEFAULT_MAX_D
    tradeoff_p_L: list = field(default_factory=list)
    out_dir: str = "runs/latest"

    def validate(self):
        if self.mode not in ("photonic", "phenomenological"):
            raise ConfigError(f"mode must be photonic or phenomenological, "
                              f"got {self.mode!r}")
        if self.loss_policy not in decode.LOSS_POLICIES:
            raise ConfigError(f"loss_policy must be one of "
                              f"{decode.LOSS_POLICIES}, got "
                              f"{self.loss_policy!r}")
        if not self.sizes:
            raise ConfigError("sizes must not be empty")
        if any(d < 2 for d in self.sizes):
            raise ConfigError("every lattice size must be at least 2")
        if self.R < 0:
            raise ConfigError("R must be non-negative")
        if self.trials < 1:
            raise ConfigError("trials must be positive")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ConfigError("master_seed must fit in 64 bits")
        grids = (self.p_C, self.p_L) if self.mode == "photonic" \
            else (self.p_flip, self.p_lost)
        for g in grids:
            if not g:
                raise ConfigError("parameter grids must not be empty")
            if any(not 0 <= p <= 1 for p in g):
                raise ConfigError("probabilities must lie in [0, 1]")
        return self


class ConfigError(ValueError):
    pass


def _parse_value(key, raw, where):
    kind = CONFIG_SCHEMA[key][0]
    try:
        if kind is int:
            return int(raw)
        if kind is str:
            return raw
        if kind == _INT_LIST:
            return [int(x) for x in raw.replace(",", " ").split()]
        if kind == _FLOAT_LIST:
            return [float(x) for x in raw.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {key} value {raw!r} "
                          f"as {kind if isinstance(kind, str) else kind.__name__}")
    raise AssertionError(kind)


def load_config(path=None, overrides=()):
    """Flat key=value file, '#' comments; overrides are KEY=VALUE strings."""
    values = {}
    if path is not None:
        try:
            with open(path) as fh:
                lines = fh.readlines()
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}")
        for lineno, line in enumerate(lines, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ConfigError(
                    f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, raw = (s.strip() for s in body.split("=", 1))
            if key not in CONFIG_SCHEMA:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = _parse_value(key, raw, f"{path}:{lineno}")
    for ov in overrides:
        if "=" not in ov:
            raise ConfigError(f"--set needs KEY=VALUE, got {ov!r}")
        key, raw = (s.strip() for s in ov.split("=", 1))
        if key not in CONFIG_SCHEMA:
            raise ConfigError(f"--set: unknown key {key!r}")
        values[key] = _parse_value(key, raw, "--set")
    return RunConfig(**values).validate()


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _atomic_write(path, text):
    tmp = path + ".tmp"
    try:
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        with open(tmp, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as e:
        raise IOError(f"cannot write {path}: {e}")


def _csv_of(estimates):
    rows = [CSV_HEADER]
    for e in estimates:
        rows.append(
            f"{e.d},{e.p_C!r},{e.p_L!r},{e.R},{e.mode},{e.trials},"
            f"{e.failures},{e.failure_rate!r},{e.ci_low!r},{e.ci_high!r},"
            f"{e.master_seed},{e.loss_policy}")
    return "\n".join(rows) + "\n"


def _summary(cfg, extra, elapsed):
    return json.dumps(
        {"config": asdict(cfg), "version": __version__,
         "rng": montecarlo.RNG_ALGORITHM, "wall_time_s": round(elapsed, 3),
         **extra},
        indent=2, sort_keys=True) + "\n"


def _specs_for(cfg, d, p_c, p_l):
    if cfg.mode == "photonic":
        return PointSpec(
            d=d, mode="photonic",
            params=PhysicalParams.identified(p_c, p_l, cfg.R),
            loss_policy=cfg.loss_policy)
    return PointSpec(d=d, mode="phenomenological", p_flip=p_c, p_lost=p_l,
                     loss_policy=cfg.loss_policy)


def _grids(cfg):
    return (cfg.p_C, cfg.p_L) if cfg.mode == "photonic" \
        else (cfg.p_flip, cfg.p_lost)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_verify(args):
    all_ok = True
    for res in verification.run_all_checks():
        status = "ok" if res.passed else "FAIL"
        print(f"[{status}] {res.name}")
        for line in res.lines:
            print("   " + line)
        all_ok &= res.passed
    print("verification " + ("passed" if all_ok else "FAILED"))
    return 0 if all_ok else 1


def cmd_sample(args):
    cfg = load_config(args.config, args.set or [])
    d = args.d or cfg.sizes[0]
    pc, pl = (g[0] for g in _grids(cfg))
    spec = _specs_for(cfg, d, pc, pl)
    lat = Lattice(d)
    seed = montecarlo.point_seed(cfg.master_seed, spec)
    rng = np.random.Generator(np.random.Philox(
        key=np.array([seed, args.trial], dtype=np.uint64)))
    if spec.mode == "photonic":
        ecfg = channel.sample_error_config(lat, spec.params, rng)
    else:
        ecfg = channel.phenomenological_config(lat, spec.p_flip, spec.p_lost,
                                               rng)
    if args.inject is not None:
        for token in args.inject:
            if not token.startswith("face="):
                raise ConfigError(f"--inject expects face=IDX, got {token!r}")
            fi = int(token[5:])
            if not 0 <= fi < lat.n_faces:
                raise ConfigError(f"--inject face {fi} out of range")
            if ecfg.lost[fi]:
                ecfg.lost_outcomes[fi] ^= 1
            else:
                ecfg.flips[fi] ^= 1
    part = decode.build_supercells(lat, ecfg.lost)
    syn = decode.extract_syndrome(ecfg, part, lat)
    res = decode.decode_trial(ecfg, lat, cfg.loss_policy, detail=True)
    record = {
        "d": d, "mode": spec.mode, "loss_policy": cfg.loss_policy,
        "trial": args.trial, "master_seed": cfg.master_seed,
        "flips": np.nonzero(ecfg.flips)[0].tolist(),
        "lost": np.nonzero(ecfg.lost)[0].tolist(),
        "lost_outcomes": np.nonzero(ecfg.lost_outcomes)[0].tolist(),
        "supercells": {str(g): m for g, m in sorted(part.members.items())
                       if len(m) > 1},
        "syndrome_groups": syn.odd_groups,
        "defect_cells": int(res.defect_count),
        "matching_pairs": res.pairs,
        "matching_weight": res.matching_weight,
        "correction": np.nonzero(res.correction)[0].tolist(),
        "homology_class": list(res.homology),
        "failed": bool(res.failed),
    }
    text = json.dumps(record, indent=2, sort_keys=True) + "\n"
    if args.dump:
        sys.stdout.write(text)
    else:
        print(f"d={d} defects={res.defect_count} failed={res.failed} "
              f"class={tuple(res.homology)}")
    if args.dump_channel and spec.mode == "photonic":
        tables = channel.face_tables(lat, spec.params)
        lines = ["face_index,p_flip,p_lost"]
        for fi in range(lat.n_faces):
            lines.append(f"{fi},{tables.p_flip[fi]!r},"
                         f"{tables.p_lost[fi]!r}")
        _atomic_write(args.dump_channel, "\n".join(lines) + "\n")
        log.info("channel tables written to %s", args.dump_channel)
    return 0


def _run_sweep(cfg, out_dir):
    t0 = time.time()
    pcs, pls = _grids(cfg)
    specs = [_specs_for(cfg, d, pc, pl)
             for d in cfg.sizes for pc in pcs for pl in pls]
    log.info("sweep: %d points x %d trials", len(specs), cfg.trials)
    ests = montecarlo.sweep(specs, cfg.trials, cfg.master_seed,
                            workers=cfg.workers, max_d=cfg.max_d)
    _atomic_write(os.path.join(out_dir, "points.csv"), _csv_of(ests))
    _atomic_write(os.path.join(out_dir, "summary.json"),
                  _summary(cfg, {"points": len(ests)}, time.time() - t0))
    return ests


def cmd_sweep(args):
    cfg = load_config(args.config, args.set or [])
    out = args.out or cfg.out_dir
    _run_sweep(cfg, out)
    log.info("sweep written to %s", out)
    return 0


def _threshold_axis(cfg):
    pcs, pls = _grids(cfg)
    if len(pcs) > 1 and len(pls) > 1:
        raise ConfigError("threshold scans vary exactly one of the two "
                          "rate grids; both have several values")
    if len(pcs) <= 1 and len(pls) <= 1:
        raise ConfigError("threshold scans need a grid with at least "
                          "3 values on one axis")
    return "p_C" if len(pcs) > 1 else "p_L"


def _th_dict(th):
    return {
        "axis": th.axis, "fixed_value": th.fixed_value, "found": th.found,
        "p_th": th.p_th, "uncertainty": th.uncertainty,
        "d_values": th.d_values,
        "pair_crossings": {f"{a}-{b}": v
                           for (a, b), v in th.pair_crossings.items()},
        "reason": th.reason, "n_bootstrap": th.n_bootstrap,
    }


def cmd_threshold(args):
    cfg = load_config(args.config, args.set or [])
    out = args.out or cfg.out_dir
    t0 = time.time()
    axis = _threshold_axis(cfg)
    ests = _run_sweep(cfg, out)
    th = montecarlo.find_threshold(ests, axis=axis, min_d=cfg.min_d)
    _atomic_write(os.path.join(out, "threshold.json"),
                  json.dumps(_th_dict(th), indent=2, sort_keys=True) + "\n")
    _atomic_write(os.path.join(out, "summary.json"),
                  _summary(cfg, {"threshold": _th_dict(th)},
                           time.time() - t0))
    if th.found:
        log.info("threshold %s = %.3e +- %s", axis, th.p_th, th.uncertainty)
    else:
        log.warning("no crossing found: %s", th.reason)
    return 0


def cmd_tradeoff(args):
    cfg = load_config(args.config, args.set or [])
    out = args.out or cfg.out_dir
    t0 = time.time()
    if cfg.mode != "photonic":
        raise ConfigError("tradeoff runs in photonic mode")
    if len(cfg.p_C) < 3 or len(cfg.p_L) < 3:
        raise ConfigError("tradeoff needs scan grids on both axes")
    points = []
    details = {}

    # pure-computational endpoint
    sub = _replace_cfg(cfg, p_L=[0.0])
    ests = _run_sweep(sub, os.path.join(out, "axis_pC"))
    th_c = montecarlo.find_threshold(ests, axis="p_C", min_d=cfg.min_d)
    details["p_L=0"] = _th_dict(th_c)
    if th_c.found:
        points.append((0.0, th_c.p_th, th_c.uncertainty))

    # interior points at fixed loss
    for pl in cfg.tradeoff_p_L:
        sub = _replace_cfg(cfg, p_L=[pl])
        ests = _run_sweep(sub, os.path.join(out, f"interior_{pl:g}"))
        th = montecarlo.find_threshold(ests, axis="p_C", min_d=cfg.min_d)
        details[f"p_L={pl:g}"] = _th_dict(th)
        if th.found:
            points.append((pl, th.p_th, th.uncertainty))

    # pure-loss endpoint
    sub = _replace_cfg(cfg, p_C=[0.0])
    ests = _run_sweep(sub, os.path.join(out, "axis_pL"))
    th_l = montecarlo.find_threshold(ests, axis="p_L", min_d=cfg.min_d)
    details["p_C=0"] = _th_dict(th_l)
    if th_l.found:
        points.append((th_l.p_th, 0.0, th_l.uncertainty))

    result = {"points": points, "details": details}
    if len(points) >= 3:
        curve = montecarlo.tradeoff(points)
        result["quadratic_coefficients"] = list(curve.coefficients)
        result["residuals"] = curve.residuals.tolist()
        samples = np.linspace(curve.p_L_values.min(),
                              curve.p_L_values.max(), 101)
        lines = ["p_L,p_C_threshold"]
        for x in samples:
            lines.append(f"{x!r},{curve.threshold_at(x)!r}")
        _atomic_write(os.path.join(out, "curve.csv"),
                      "\n".join(lines) + "\n")
    else:
        result["error"] = "fewer than 3 thresholds found; no fit"
    _atomic_write(os.path.join(out, "tradeoff.json"),
                  json.dumps(result, indent=2, sort_keys=True) + "\n")
    _atomic_write(os.path.join(out, "summary.json"),
                  _summary(cfg, {"tradeoff": result}, time.time() - t0))
    return 0


def _replace_cfg(cfg, **kw):
    d = asdict(cfg)
    d.update(kw)
    return RunConfig(**d).validate()


def cmd_lattice(args):
    if args.action != "dump":
        raise ConfigError(f"unknown lattice action {args.action!r}")
    lat = Lattice(args.d)
    print(f"L={args.d} cells={lat.n_cells} faces={lat.n_faces}")
    for fi in range(lat.n_faces):
        f = lat.face_coord(fi)
        a, b = lat.face_cells[fi]
        print(f"face {fi} cell=({f.cell.i},{f.cell.j},{f.cell.k}) "
              f"axis={AXES[f.axis]} bonds={int(lat.fusion_bonds[fi])} "
              f"cells={a},{b}")
    return 0


# ---------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(
        prog="phocs",
        description=("Photonic cluster-state simulator: stabilizer "
                     "verification and fault-tolerance thresholds"))
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("verify", help="run the stabilizer regressions")

    sp = sub.add_parser("sample", help="decode one trial")
    sp.add_argument("--config", default=None)
    sp.add_argument("--set", action="append", metavar="KEY=VALUE")
    sp.add_argument("--d", type=int, default=None)
    sp.add_argument("--trial", type=int, default=0)
    sp.add_argument("--dump", action="store_true",
                    help="emit the full trial record as JSON")
    sp.add_argument("--inject", action="append", metavar="face=IDX",
                    help="toggle a face error before decoding")
    sp.add_argument("--dump-channel", metavar="PATH",
                    help="write per-face rate tables as CSV")

    for name, fn_help in (("sweep", "failure rates over a grid"),
                          ("threshold", "sweep plus crossing fit"),
                          ("tradeoff", "full loss/error tradeoff curve")):
        sp = sub.add_parser(name, help=fn_help)
        sp.add_argument("--config", default=None)
        sp.add_argument("--set", action="append", metavar="KEY=VALUE")
        sp.add_argument("--out", default=None)

    sp = sub.add_parser("lattice", help="geometry utilities")
    sp.add_argument("action", choices=["dump"])
    sp.add_argument("--d", type=int, default=3)
    return ap


def main(argv=None):
    level = os.environ.get("PHOCS_LOG", "info").upper()
    logging.basicConfig(stream=sys.stderr,
                        level=getattr(logging, level, logging.INFO),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    handlers = {
        "verify": cmd_verify,
        "sample": cmd_sample,
        "sweep": cmd_sweep,
        "threshold": cmd_threshold,
        "tradeoff": cmd_tradeoff,
        "lattice": cmd_lattice,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as e:
        log.error("%s", e)
        return 1
    except IOError as e:
        log.error("%s", e)
        return 2


if __name__ == "__main__":
    sys.exit(main())
