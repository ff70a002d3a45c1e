"""Command-line entry point.

Commands: generate, train, eval, gap, render, inspect. Configuration comes
from a plain-text key = value file (--config) with --set key=value overrides;
unknown keys are rejected. Every run writes a resolved-config snapshot next
to its outputs so any result can be reproduced bit-identically.

Exit codes: 0 ok, 2 config error, 3 data error, 4 numeric failure.
"""

import argparse
import os
import sys

import numpy as np

from . import dataset as ds_mod
from . import evaluate as eval_mod
from .dataset import DatasetSpec
from .model import load_model, save_model
from .pde import BurgersProblem, NavierStokesProblem, PoissonProblem
from .presets import PRESETS, build_model, build_train_config
from .training import history_to_csv, train

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


class ConfigError(Exception):
    pass


def parse_config_file(path):
    cfg = {}
    try:
        with open(path) as f:
            for lineno, raw in enumerate(f, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                key, sep, value = line.partition("=")
                if not sep:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                cfg[key.strip()] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return cfg


def resolve_config(args, allowed, required):
    cfg = parse_config_file(args.config) if args.config else {}
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        cfg[key.strip()] = value.strip()
    if args.seed is not None:
        cfg["seed"] = str(args.seed)
    unknown = set(cfg) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    missing = set(required) - set(cfg)
    if missing:
        raise ConfigError(f"missing config keys: {', '.join(sorted(missing))}")
    return cfg


def write_snapshot(cfg, command, out_path):
    lines = [f"command = {command}"]
    lines += [f"{k} = {cfg[k]}" for k in sorted(cfg)]
    with open(out_path + ".config", "w") as f:
        f.write("\n".join(lines) + "\n")


def _parse_int_list(text):
    return [int(t) for t in text.replace(",", " ").split()]


def _parse_float_list(text):
    return [float(t) for t in text.replace(",", " ").split()]


def _build_problem(cfg):
    name = cfg["problem"]
    kwargs = {}
    if name == "poisson":
        for key, cast in (("alpha", float), ("decay", float), ("K", int),
                          ("amplitude", float)):
            if key in cfg:
                kwargs[key] = cast(cfg[key])
        return PoissonProblem(**kwargs)
    if name == "burgers":
        for key, cast in (("nu", float), ("T", float), ("sigma", float),
                          ("tau", float), ("alpha", float), ("K", int),
                          ("K_solver", int), ("dt", float)):
            if key in cfg:
                kwargs[key] = cast(cfg[key])
        return BurgersProblem(**kwargs)
    if name == "navier_stokes":
        for key, cast in (("nu", float), ("T", float), ("sigma", float),
                          ("tau", float), ("alpha", float), ("K", int),
                          ("K_solver", int), ("dt", float)):
            if key in cfg:
                kwargs[key] = cast(cfg[key])
        if cfg.get("forcing") == "none":
            kwargs["forcing"] = None
        return NavierStokesProblem(**kwargs)
    raise ConfigError(f"unknown problem {name!r}")


GENERATE_KEYS = [
    "problem", "N", "resolutions", "proportions", "seed",
    "alpha", "decay", "K", "amplitude", "nu", "T", "sigma", "tau",
    "K_solver", "dt", "forcing",
]


def cmd_generate(args):
    cfg = resolve_config(args, GENERATE_KEYS, ["problem", "N", "resolutions"])
    problem = _build_problem(cfg)
    N = int(cfg["N"])
    resolutions = tuple(_parse_int_list(cfg["resolutions"]))
    if "proportions" in cfg:
        proportions = tuple(_parse_float_list(cfg["proportions"]))
    else:
        proportions = tuple([1.0 / len(resolutions)] * len(resolutions))
    seed = int(cfg.get("seed", 0))
    cfg.setdefault("proportions", " ".join(repr(p) for p in proportions))
    cfg.setdefault("seed", str(seed))
    try:
        spec = DatasetSpec(N=N, resolutions=resolutions, proportions=proportions)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        ds = ds_mod.assemble(problem, spec, seed)
    except FloatingPointError as exc:
        print(f"generation failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    ds_mod.save(ds, args.out)
    write_snapshot(cfg, "generate", args.out)
    print(f"wrote {args.out}: {ds.N} samples, resolutions {list(resolutions)}")
    return EXIT_OK


TRAIN_KEYS = ["preset", "dataset", "seed", "epochs", "loss"]


def cmd_train(args):
    cfg = resolve_config(args, TRAIN_KEYS, ["preset", "dataset"])
    if cfg["preset"] not in PRESETS:
        raise ConfigError(
            f"unknown preset {cfg['preset']!r}; available: {', '.join(sorted(PRESETS))}"
        )
    if "resume" in cfg:
        raise ConfigError("resume-from-checkpoint is not supported")
    preset = PRESETS[cfg["preset"]]
    seed = int(cfg.get("seed", 0))
    cfg.setdefault("seed", str(seed))
    cfg.setdefault("loss", "l1")
    try:
        ds = ds_mod.load(cfg["dataset"])
    except (OSError, ValueError) as exc:
        print(f"cannot load dataset: {exc}", file=sys.stderr)
        return EXIT_DATA
    model = build_model(preset, seed)
    epochs = int(cfg["epochs"]) if "epochs" in cfg else None
    tc = build_train_config(preset, seed, epochs=epochs, loss=cfg["loss"])
    cfg.setdefault("epochs", str(tc.epochs))
    try:
        model, history = train(model, ds, tc)
    except FloatingPointError as exc:
        print(f"training failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    save_model(model, args.out)
    history_to_csv(history, args.out + ".history.csv")
    write_snapshot(cfg, "train", args.out)
    print(f"wrote {args.out}; final mean loss {history.epoch_loss[-1]:.6g}")
    return EXIT_OK


EVAL_KEYS = ["checkpoint", "datasets", "train_resolutions", "statistic"]


def _load_eval_inputs(cfg):
    model = load_model(cfg["checkpoint"])
    datasets = [ds_mod.load(p) for p in cfg["datasets"].split()]
    train_res = (
        _parse_int_list(cfg["train_resolutions"]) if "train_resolutions" in cfg else []
    )
    return model, datasets, train_res


def cmd_eval(args):
    cfg = resolve_config(args, EVAL_KEYS, ["checkpoint", "datasets"])
    statistic = cfg.setdefault("statistic", "mean")
    if statistic not in ("mean", "median"):
        raise ConfigError("statistic must be mean or median")
    try:
        model, datasets, train_res = _load_eval_inputs(cfg)
    except (OSError, ValueError) as exc:
        print(f"cannot load inputs: {exc}", file=sys.stderr)
        return EXIT_DATA
    report = eval_mod.evaluate_model(model, datasets)
    eval_mod.report_to_csv(report, train_res, args.out, statistic=statistic)
    write_snapshot(cfg, "eval", args.out)
    print(eval_mod.report_summary(report, train_res, statistic=statistic))
    return EXIT_OK


def cmd_gap(args):
    cfg = resolve_config(
        args, EVAL_KEYS, ["checkpoint", "datasets", "train_resolutions"]
    )
    statistic = cfg.setdefault("statistic", "mean")
    try:
        model, datasets, train_res = _load_eval_inputs(cfg)
    except (OSError, ValueError) as exc:
        print(f"cannot load inputs: {exc}", file=sys.stderr)
        return EXIT_DATA
    report = eval_mod.evaluate_model(model, datasets)
    try:
        g = eval_mod.performance_gap(report, train_res, statistic=statistic)
    except ValueError as exc:
        print(f"gap undefined: {exc}", file=sys.stderr)
        return EXIT_DATA
    summary = eval_mod.report_summary(report, train_res, statistic=statistic)
    with open(args.out, "w") as f:
        f.write(summary + "\n")
    write_snapshot(cfg, "gap", args.out)
    print(f"performance gap = {g:.6g}")
    return EXIT_OK


RENDER_KEYS = ["checkpoint", "dataset", "sample", "vmin", "vmax"]


def _colormap(values, vmin, vmax):
    """Blue-white-red map; out-of-range values clamp to saturated marker
    colors (bright red above, dark blue below)."""
    t = (values - vmin) / (vmax - vmin)
    over = t > 1.0
    under = t < 0.0
    t = np.clip(t, 0.0, 1.0)
    r = np.where(t < 0.5, 2 * t, 1.0)
    b = np.where(t < 0.5, 1.0, 2 * (1 - t))
    g = 1.0 - np.abs(2 * t - 1)
    rgb = np.stack([r, g, b], axis=-1)
    rgb[over] = (1.0, 0.0, 0.0)
    rgb[under] = (0.0, 0.0, 0.3)
    return (rgb * 255).astype(np.uint8), int(over.sum() + under.sum())


def write_ppm(path, rgb):
    h, w, _ = rgb.shape
    with open(path, "wb") as f:
        f.write(f"P6\n{w} {h}\n255\n".encode())
        f.write(rgb.tobytes())


def cmd_render(args):
    cfg = resolve_config(args, RENDER_KEYS, ["checkpoint", "dataset"])
    idx = int(cfg.setdefault("sample", "0"))
    try:
        model = load_model(cfg["checkpoint"])
        ds = ds_mod.load(cfg["dataset"])
        inp, truth = ds.samples[idx]
    except (OSError, ValueError, IndexError) as exc:
        print(f"cannot load inputs: {exc}", file=sys.stderr)
        return EXIT_DATA
    from .model import forward

    try:
        pred = forward(model, inp, truth.grid)
    except FloatingPointError as exc:
        print(f"forward pass failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    err = pred.values - truth.values
    base = args.out
    panels = {"input": inp.values, "truth": truth.values,
              "prediction": pred.values, "error": err}
    R = truth.grid.R
    for name, vals in panels.items():
        np.savetxt(f"{base}.{name}.csv", vals.reshape(R, -1), delimiter=",")
    if ds.d == 2:
        span = float(np.max(np.abs(truth.values))) or 1.0
        vmin = float(cfg["vmin"]) if "vmin" in cfg else -span
        vmax = float(cfg["vmax"]) if "vmax" in cfg else span
        cfg.setdefault("vmin", repr(vmin))
        cfg.setdefault("vmax", repr(vmax))
        clipped_total = 0
        for name, vals in panels.items():
            rgb, n_clipped = _colormap(vals.reshape(R, R), vmin, vmax)
            clipped_total += n_clipped
            write_ppm(f"{base}.{name}.ppm", rgb)
        if clipped_total:
            print(f"note: {clipped_total} pixels outside [{vmin}, {vmax}] were marked")
    write_snapshot(cfg, "render", base)
    print(f"wrote {base}.*")
    return EXIT_OK


def cmd_inspect(args):
    cfg = resolve_config(args, ["dataset"], ["dataset"])
    try:
        fields = ds_mod.read_header(cfg["dataset"])
    except (OSError, ValueError) as exc:
        print(f"cannot read dataset: {exc}", file=sys.stderr)
        return EXIT_DATA
    for key in sorted(fields):
        if key == "sample_offsets":
            continue
        print(f"{key} = {fields[key]}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="oplearn")
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "generate": cmd_generate,
        "train": cmd_train,
        "eval": cmd_eval,
        "gap": cmd_gap,
        "render": cmd_render,
        "inspect": cmd_inspect,
    }
    for name, fn in commands.items():
        p = sub.add_parser(name)
        p.add_argument("--config", help="plain-text key = value config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--out", required=name != "inspect",
                       help="output path (prefix for render)")
        p.add_argument("--jobs", type=int, default=1,
                       help="worker cap (current implementation is single-threaded)")
        p.set_defaults(fn=fn)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
