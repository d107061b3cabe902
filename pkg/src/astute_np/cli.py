"""Command-line front end.

Every subcommand takes its parameters either as flags or from a flat
``key = value`` config file (``--config path``, ``#`` comments allowed);
explicit flags win over file values.  Config problems exit with code 2 and
a message naming the offending key; runtime failures exit with code 1.
"""

from __future__ import annotations

import argparse
import sys
from contextlib import contextmanager

import numpy as np

from .data import (LINF, Dataset, RandomStream, ScenarioSpec, generate,
                   read_csv, write_csv)
from .models import (GAUSSIAN, INVERSE_POLY, PLATEAU_EXAMPLE3, KernelSpec,
                     predict, train_histogram, train_kernel, train_knn)
from .attack import (AttackBudget, AttackMethodError, resolve_attack,
                     run_attack)
from .evaluation import (DEFAULT_SIZES, ProbeConfig, SweepConfig,
                         bayes_gap_demo, convergence_sweep,
                         empirical_astuteness, probe_far_weight,
                         probe_far_weight_pruned)
from .chart import sweep_chart
from .prune import adv_prune


class ConfigError(Exception):
    def __init__(self, key: str, reason: str):
        super().__init__(f"config error: key '{key}': {reason}")
        self.key = key


@contextmanager
def _cfg_guard(key: str = "parameters"):
    """Turn validation ValueErrors raised while building configs into
    ConfigError so they map to exit code 2."""
    try:
        yield
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(key, str(exc)) from exc


# ---------------------------------------------------------------------------
# parameter schemas


def _cast_int(s: str) -> int:
    return int(s)


def _cast_float(s: str) -> float:
    return float(s)


def _cast_str(s: str) -> str:
    return s


def _cast_bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _cast_opt_float(s: str):
    return None if s.strip().lower() in ("", "none") else float(s)


def _cast_opt_int(s: str):
    return None if s.strip().lower() in ("", "none") else int(s)


def _cast_int_list(s: str) -> tuple:
    vals = tuple(int(tok) for tok in s.split(",") if tok.strip())
    if not vals:
        raise ValueError("empty list")
    return vals


def _cast_float_list(s: str):
    if s.strip().lower() in ("", "none"):
        return None
    return tuple(float(tok) for tok in s.split(",") if tok.strip())


# (key, cast, default, required, help); default is the already-cast value
_MODEL_KEYS = [
    ("model", _cast_str, "knn", False, "classifier family: knn | histogram | kernel"),
    ("k", _cast_int, 1, False, "neighbor count for knn"),
    ("kn", _cast_opt_int, None, False, "histogram split threshold (default n^(1/3) rule)"),
    ("kernel", _cast_str, GAUSSIAN, False,
     f"kernel kind: {GAUSSIAN} | {PLATEAU_EXAMPLE3} | {INVERSE_POLY}"),
    ("hist-root", _cast_float_list, None, False,
     "histogram root cube: d min-corner coords then the side length "
     "(default: data bounding cube)"),
]

_SCHEMAS = {
    "gen": [
        ("scenario", _cast_str, None, True, "half_moons | example1 | example2 | example3"),
        ("n", _cast_int, None, True, "sample count"),
        ("sigma", _cast_float, 0.0, False, "half-moons noise level"),
        ("r", _cast_float, 0.1, False, "example1 oscillation scale"),
        ("seed", _cast_int, 0, False, "random seed"),
        ("out", _cast_str, None, True, "output CSV path"),
    ],
    "train-eval": [
        ("scenario", _cast_str, "half_moons", False, "scenario when generating data"),
        ("n", _cast_int, 1000, False, "training size when generating"),
        ("n-test", _cast_int, 1000, False, "test size when generating"),
        ("sigma", _cast_float, 0.0, False, "half-moons noise level"),
        ("scenario-r", _cast_float, 0.1, False, "example1 oscillation scale"),
        ("train-csv", _cast_str, None, False, "training data path (overrides generation)"),
        ("test-csv", _cast_str, None, False, "test data path (overrides generation)"),
        *_MODEL_KEYS,
        ("attack-r", _cast_float, 0.1, False, "robustness radius"),
        ("prune-r", _cast_opt_float, None, False, "prune training data at this radius"),
        ("method", _cast_str, "auto", False, "attack method: auto | histogram | nn1 | grid"),
        ("resolution", _cast_float, 1e-3, False, "grid attack resolution"),
        ("seed", _cast_int, 0, False, "random seed"),
        ("out", _cast_str, None, False, "also write the report to this path"),
    ],
    "prune": [
        ("data", _cast_str, None, True, "input CSV path"),
        ("r", _cast_float, None, True, "separation radius"),
        ("metric", _cast_str, LINF, False, "l2 | linf"),
        ("out", _cast_str, None, False, "write the kept subset to this CSV path"),
    ],
    "attack": [
        ("train-csv", _cast_str, None, True, "training data path"),
        ("test-csv", _cast_str, None, True, "points to attack"),
        *_MODEL_KEYS,
        ("r", _cast_float, None, True, "attack budget radius"),
        ("method", _cast_str, "auto", False, "auto | histogram | nn1 | grid"),
        ("resolution", _cast_float, 1e-3, False, "grid attack resolution"),
        ("out", _cast_str, None, True, "report CSV path"),
    ],
    "sweep": [
        ("scenario", _cast_str, "half_moons", False, "scenario"),
        ("sigma", _cast_float, 0.0, False, "noise level"),
        *_MODEL_KEYS,
        ("sizes", _cast_int_list, DEFAULT_SIZES, False, "comma-separated training sizes"),
        ("repeats", _cast_int, 5, False, "repeats per size"),
        ("n-test", _cast_int, 1000, False, "test size"),
        ("attack-r", _cast_float, 0.1, False, "robustness radius"),
        ("prune-r", _cast_opt_float, None, False, "prune radius (omit to disable)"),
        ("scenario-r", _cast_float, 0.1, False, "example1 oscillation scale"),
        ("resolution", _cast_float, 1e-3, False, "grid attack resolution"),
        ("seed", _cast_int, 0, False, "random seed"),
        ("out-csv", _cast_str, None, True, "results CSV path"),
        ("out-svg", _cast_str, None, False, "chart SVG path"),
        ("title", _cast_str, "", False, "chart title"),
    ],
    "probe": [
        ("scenario", _cast_str, "half_moons", False, "scenario"),
        ("sigma", _cast_float, 0.0, False, "noise level"),
        ("model", _cast_str, "knn", False, "knn | kernel | histogram"),
        ("k", _cast_int, 1, False, "neighbor count for knn"),
        ("kernel", _cast_str, GAUSSIAN, False, "kernel kind"),
        ("a", _cast_float, 0.05, False, "inner (perturbation) radius"),
        ("b", _cast_float, 0.1, False, "outer (far-point) radius"),
        ("sizes", _cast_int_list, (100, 1000), False, "training sizes to probe"),
        ("draws", _cast_int, 400, False, "Monte-Carlo draws per size"),
        ("boundary", _cast_int, 64, False, "ball boundary candidates"),
        ("interior", _cast_int, 16, False, "ball interior candidates"),
        ("pruned", _cast_bool, False, False, "probe the pruned-training condition"),
        ("prune-r", _cast_opt_float, None, False, "prune radius for the pruned probe"),
        ("fixed-x", _cast_float_list, None, False, "fixed query point (comma coords)"),
        ("scenario-r", _cast_float, 0.1, False, "example1 oscillation scale"),
        ("seed", _cast_int, 0, False, "random seed"),
        ("out", _cast_str, None, False, "results CSV path"),
    ],
    "demo-example1": [
        ("r", _cast_float, 0.1, False, "robustness radius / oscillation scale"),
        ("n", _cast_int, 2000, False, "test draw size"),
        ("seed", _cast_int, 0, False, "random seed"),
    ],
}


def _read_config_file(path: str) -> dict:
    values = {}
    with open(path, "r") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}", "expected 'key = value'")
            key, val = line.split("=", 1)
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def _merge_params(command: str, config_path, flag_values: dict) -> dict:
    schema = _SCHEMAS[command]
    by_key = {key.replace("-", "_"): (key, cast, default, required)
              for key, cast, default, required, _ in schema}

    params = {k: default for k, (_, _, default, _) in by_key.items()}
    raw = {}
    if config_path is not None:
        raw.update(_read_config_file(config_path))
    for key, val in flag_values.items():
        if val is not None:
            raw[key] = val

    for key, val in raw.items():
        if key not in by_key:
            raise ConfigError(key, "unknown key")
        _, cast, _, _ = by_key[key]
        try:
            params[key] = cast(val)
        except ValueError as exc:
            raise ConfigError(by_key[key][0], f"bad value {val!r} ({exc})") from exc

    for k, (key, _, _, required) in by_key.items():
        if required and params[k] is None:
            raise ConfigError(key, "required parameter missing")
    return params


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="astute-np",
        description="Robustness experiments for non-parametric classifiers.")
    sub = parser.add_subparsers(dest="command", required=True)
    for command, schema in _SCHEMAS.items():
        p = sub.add_parser(command)
        p.add_argument("--config", default=None, help="flat key = value config file")
        for key, _, default, required, help_text in schema:
            note = "(required)" if required else f"(default: {default})"
            p.add_argument(f"--{key}", dest=key.replace("-", "_"), default=None,
                           metavar="V", help=f"{help_text} {note}")
    return parser


# ---------------------------------------------------------------------------
# model construction shared by subcommands


def _train_model(params: dict, ds: Dataset):
    model = params["model"]
    if model == "knn":
        return train_knn(ds, k=params["k"])
    if model == "histogram":
        root = None
        raw_root = params.get("hist_root")
        if raw_root is not None:
            if len(raw_root) != ds.dim + 1:
                raise ConfigError("hist-root",
                                  f"need {ds.dim} min-corner coords plus a side length")
            root = (np.asarray(raw_root[:-1], dtype=float), float(raw_root[-1]))
        return train_histogram(ds, kn=params.get("kn"), root=root)
    if model == "kernel":
        return train_kernel(ds, KernelSpec(kind=params["kernel"]))
    raise ConfigError("model", f"unknown model {model!r}")


def _load_or_generate(params: dict, csv_key: str, n: int, stream: RandomStream) -> Dataset:
    path = params.get(csv_key)
    if path is not None:
        return read_csv(path)
    spec = ScenarioSpec(params["scenario"], n, sigma=params["sigma"],
                        r=params["scenario_r"])
    with _cfg_guard("scenario"):
        spec.validate()
    return generate(spec, stream)


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_gen(params: dict) -> int:
    spec = ScenarioSpec(params["scenario"], params["n"], sigma=params["sigma"],
                        r=params["r"])
    with _cfg_guard("scenario"):
        spec.validate()
    ds = generate(spec, RandomStream(params["seed"], 0))
    write_csv(ds, params["out"])
    print(f"wrote {len(ds)} points to {params['out']}")
    return 0


def _cmd_train_eval(params: dict) -> int:
    with _cfg_guard("attack-r"):
        budget = AttackBudget(params["attack_r"])
    train_ds = _load_or_generate(params, "train_csv", params["n"],
                                 RandomStream(params["seed"], 0))
    test_ds = _load_or_generate(params, "test_csv", params["n_test"],
                                RandomStream(params["seed"], 1))
    lines = [f"n_train = {len(train_ds)}"]
    if params["prune_r"] is not None:
        pruned = adv_prune(train_ds, params["prune_r"], metric=LINF)
        train_ds = train_ds.subset(pruned.kept)
        lines.append(f"kept = {len(train_ds)} ({pruned.kept_fraction:.4f})")
    model = _train_model(params, train_ds)
    report = empirical_astuteness(model, test_ds, budget,
                                  method=params["method"],
                                  resolution=params["resolution"])
    lines += [
        f"n_test = {report.n_test}",
        f"accuracy = {report.accuracy:.4f}",
        f"astuteness = {report.astuteness:.4f}",
        f"radius = {report.r:g}",
        f"method = {report.method}",
        f"approximate = {str(report.approximate).lower()}",
    ]
    text = "\n".join(lines)
    print(text)
    if params["out"] is not None:
        with open(params["out"], "w") as fh:
            fh.write(text + "\n")
    return 0


def _cmd_prune(params: dict) -> int:
    ds = read_csv(params["data"])
    with _cfg_guard("r"):
        if params["r"] <= 0:
            raise ValueError("r must be positive")
        result = adv_prune(ds, params["r"], metric=params["metric"])
    print(f"kept {len(result.kept)} of {result.n} "
          f"(fraction {result.kept_fraction:.4f}, matching {result.matching_size})")
    if params["out"] is not None:
        write_csv(ds.subset(result.kept), params["out"])
        print(f"wrote kept subset to {params['out']}")
    return 0


def attack_report(model, test: Dataset, budget: AttackBudget, out_path,
                  method: str = "auto", resolution: float = 1e-3) -> int:
    """Write one CSV row per test point; returns the non-astute count.

    Columns: index, label, prediction, astute, radius (blank when no attack
    was found), witness (semicolon-joined coordinates, blank likewise).
    """
    if method == "auto":
        method, _ = resolve_attack(model)
    lines = ["index,label,prediction,astute,radius,witness"]
    non_astute = 0
    for i in range(len(test)):
        x, y = test.points[i], int(test.labels[i])
        pred = predict(model, x)
        res = run_attack(model, x, y, budget, method=method, resolution=resolution)
        astute = pred == y and not res.found
        if not astute:
            non_astute += 1
        radius = f"{res.radius:.17g}" if res.found else ""
        witness = ";".join(f"{v:.17g}" for v in res.witness) if res.found else ""
        lines.append(f"{i},{y:+d},{pred:+d},{int(astute)},{radius},{witness}")
    with open(out_path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return non_astute


def _cmd_attack(params: dict) -> int:
    train_ds = read_csv(params["train_csv"])
    test_ds = read_csv(params["test_csv"])
    with _cfg_guard("r"):
        budget = AttackBudget(params["r"])
    model = _train_model(params, train_ds)
    method = params["method"]
    if method == "auto":
        method, _ = resolve_attack(model)
    elif method in ("histogram", "nn1"):
        auto_method, _ = resolve_attack(model)
        if auto_method != method:
            raise ConfigError("method", f"exact method {method!r} does not cover this model")
    non_astute = attack_report(model, test_ds, budget, params["out"],
                               method=method, resolution=params["resolution"])
    print(f"attacked {len(test_ds)} points, {non_astute} non-astute; "
          f"report at {params['out']}")
    return 0


def _cmd_sweep(params: dict) -> int:
    cfg = SweepConfig(scenario=params["scenario"], sigma=params["sigma"],
                      model=params["model"], k=params["k"], kn=params["kn"],
                      kernel=params["kernel"], sizes=tuple(params["sizes"]),
                      repeats=params["repeats"], n_test=params["n_test"],
                      attack_r=params["attack_r"], prune_r=params["prune_r"],
                      scenario_r=params["scenario_r"],
                      resolution=params["resolution"], seed=params["seed"])
    with _cfg_guard("sweep"):
        cfg.validate()
    result = convergence_sweep(cfg)
    result.to_csv(params["out_csv"])
    print(f"wrote {params['out_csv']}")
    if params["out_svg"] is not None:
        sweep_chart(result.sizes, result.accuracy_mean, result.accuracy_std,
                    result.astuteness_mean, result.astuteness_std,
                    params["out_svg"], title=params["title"])
        print(f"wrote {params['out_svg']}")
    for i, n in enumerate(result.sizes):
        print(f"n={n}: accuracy {result.accuracy_mean[i]:.4f} "
              f"astuteness {result.astuteness_mean[i]:.4f}")
    return 0


def _cmd_probe(params: dict) -> int:
    cfg = ProbeConfig(scenario=params["scenario"], sigma=params["sigma"],
                      model=params["model"], k=params["k"], kernel=params["kernel"],
                      a=params["a"], b=params["b"], sizes=tuple(params["sizes"]),
                      draws=params["draws"], boundary_candidates=params["boundary"],
                      interior_candidates=params["interior"],
                      prune_r=params["prune_r"], fixed_x=params["fixed_x"],
                      scenario_r=params["scenario_r"], seed=params["seed"])
    with _cfg_guard("probe"):
        cfg.validate()
        if params["pruned"] and cfg.prune_r is None:
            raise ValueError("prune-r is required when pruned = true")
    runner = probe_far_weight_pruned if params["pruned"] else probe_far_weight
    result = runner(cfg)
    lines = ["n,estimate,std_error"]
    for i, n in enumerate(result.sizes):
        print(f"n={n}: estimate {result.estimates[i]:.6f} "
              f"se {result.std_errors[i]:.6f}")
        lines.append(f"{n},{result.estimates[i]:.17g},{result.std_errors[i]:.17g}")
    if params["out"] is not None:
        with open(params["out"], "w") as fh:
            fh.write("\n".join(lines) + "\n")
    return 0


def _cmd_demo_example1(params: dict) -> int:
    with _cfg_guard("r"):
        report = bayes_gap_demo(params["r"], params["n"], seed=params["seed"])
    print(f"bayes accuracy = {report.bayes_accuracy:.4f}")
    print(f"bayes astuteness = {report.bayes_astuteness:.4f}")
    print(f"constant(+1) accuracy = {report.const_accuracy:.4f}")
    print(f"constant(+1) astuteness = {report.const_astuteness:.4f}")
    print(f"constant(+1) robust fraction = {report.const_robust_fraction:.4f}")
    return 0


_HANDLERS = {
    "gen": _cmd_gen,
    "train-eval": _cmd_train_eval,
    "prune": _cmd_prune,
    "attack": _cmd_attack,
    "sweep": _cmd_sweep,
    "probe": _cmd_probe,
    "demo-example1": _cmd_demo_example1,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    flag_values = {k: v for k, v in vars(args).items()
                   if k not in ("command", "config")}
    try:
        params = _merge_params(args.command, args.config, flag_values)
        return _HANDLERS[args.command](params)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except AttackMethodError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
