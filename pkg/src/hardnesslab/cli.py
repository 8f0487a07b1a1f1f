"""Command-line experiment runner.

Every command writes one result table (CSV with a header row, or JSON rows
with the same keys) and, when ``--out`` is given, a manifest next to it at
``<out>.manifest.json`` holding the resolved configuration, seed and
library versions.  Rerunning the recorded ``argv`` regenerates the table
byte for byte.

Exit status: 0 when every internal check passed, 1 for invalid parameters or
a failed check, 2 for usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import platform
import re
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np
import scipy

from . import __version__
from . import hermite as hm
from .constrained_pca import MAX_BRUTE_N, sk_ground_state_survey
from .detection import run_detection_experiment, spectral_detect
from .ensembles import sample_goe, spectral_ks_distance, top_eigenvalue
from .errors import HardnessLabError
from .lowdeg_lr import EXACT, METHODS, SCAN_COLUMNS, threshold_scan
from .quiet_planting import choose_parameters, plant, planted_quadratic_value
from .rng import SEED_ENV_VAR, default_seed, substream
from .spike_priors import SpikePrior, fit_local_chernoff
from .wishart import WishartParams, sample_null, sample_planted

COLUMNS = {
    "goe-spectrum": ("trial", "n", "lambda_min", "lambda_max", "ks_distance", "seed"),
    "sk-baselines": ("instance", "n", "optimum", "certificate", "rounding", "seed"),
    "wishart-detect": ("n", "N", "gamma", "beta", "prior", "trials", "type_i", "type_ii", "total_error", "seed"),
    "quiet-plant": ("trial", "input", "n", "N", "gamma", "beta", "lambda_max", "x_quad", "x_proj_sq", "decision", "seed"),
    "lowdeg-scan": SCAN_COLUMNS,
    "hermite-check": ("identity", "case", "residual", "tolerance", "passed"),
    "chernoff-fit": ("prior", "n", "trials", "eta", "delta", "C", "seed"),
}


class ConfigError(HardnessLabError, ValueError):
    pass


@dataclass
class RunResult:
    rows: list[dict]
    ok: bool = True
    extra: dict = field(default_factory=dict)


# -- value parsing ----------------------------------------------------------

def _float_list(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(t) for t in text]
    return [float(t) for t in str(text).split(",") if t.strip()]


def _int_list(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(t) for t in text]
    return [int(t) for t in str(text).split(",") if t.strip()]


def read_config(path: str) -> dict[str, str]:
    """Plain ``key = value`` lines; ``#`` starts a comment; dashes and underscores are interchangeable."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


# -- commands ---------------------------------------------------------------

def cmd_goe_spectrum(cfg: dict) -> RunResult:
    n, trials, seed = int(cfg["n"]), int(cfg["trials"]), cfg["seed"]
    rows = []
    for t in range(trials):
        eig = np.linalg.eigvalsh(sample_goe(n, substream(seed, "goe", t)))
        rows.append(
            {"trial": t, "n": n, "lambda_min": float(eig[0]), "lambda_max": float(eig[-1]),
             "ks_distance": spectral_ks_distance(eig), "seed": seed}
        )
    return RunResult(rows)


def cmd_sk_baselines(cfg: dict) -> RunResult:
    n, instances, seed = int(cfg["n"]), int(cfg["instances"]), cfg["seed"]
    if n > MAX_BRUTE_N:
        raise ConfigError(f"brute force requires n <= {MAX_BRUTE_N}, got n={n}")
    survey = sk_ground_state_survey(n, instances, seed)
    rows = [dict(r, seed=seed) for r in survey.rows()]
    ok = all(r["rounding"] <= r["optimum"] + 1e-10 and r["optimum"] <= r["certificate"] + 1e-10 for r in rows)
    return RunResult(rows, ok)


def cmd_wishart_detect(cfg: dict) -> RunResult:
    n, gamma, seed = int(cfg["n"]), float(cfg["gamma"]), cfg["seed"]
    prior = SpikePrior.parse(cfg["prior"])
    rows = []
    for beta in _float_list(cfg["beta"]):
        params = WishartParams(n, gamma, beta, prior)
        rep = run_detection_experiment(params, spectral_detect, int(cfg["trials"]), seed, workers=cfg["threads"])
        rows.append(
            {"n": n, "N": params.N, "gamma": gamma, "beta": beta, "prior": prior.label(), "trials": rep.trials,
             "type_i": rep.type_i, "type_ii": rep.type_ii, "total_error": rep.total_error, "seed": seed}
        )
    return RunResult(rows)


def cmd_quiet_plant(cfg: dict) -> RunResult:
    n, eps, trials, seed = int(cfg["n"]), float(cfg["eps"]), int(cfg["trials"]), cfg["seed"]
    pp = choose_parameters(eps)
    params = WishartParams(n, pp.gamma, pp.beta)
    threshold = 2.0 - eps / 2.0
    rows = []
    for t in range(trials):
        for label, sampler in (("null", sample_null), ("planted", sample_planted)):
            s = sampler(params, substream(seed, f"quiet-{label}", t))
            pm = plant(s, substream(seed, f"quiet-rotate-{label}", t))
            lam_max = top_eigenvalue(pm.W)
            x_quad = x_proj = ""
            if s.spike is not None:
                x_quad = planted_quadratic_value(pm.W, s.spike)
                x_proj = pm.projection_norm_sq(s.spike)
            rows.append(
                {"trial": t, "input": label, "n": n, "N": params.N, "gamma": pp.gamma, "beta": pp.beta,
                 "lambda_max": lam_max, "x_quad": x_quad, "x_proj_sq": x_proj,
                 "decision": "null" if lam_max <= threshold else "planted", "seed": seed}
            )
    return RunResult(rows, extra={"gamma": pp.gamma, "beta": pp.beta, "violations": pp.violations()})


def cmd_lowdeg_scan(cfg: dict) -> RunResult:
    rows = threshold_scan(
        float(cfg["gamma"]),
        _float_list(cfg["beta"]),
        int(cfg["D"]),
        _int_list(cfg["n"]),
        SpikePrior.parse(cfg["prior"]),
        method=cfg["method"],
        trials=int(cfg["trials"]),
        seed=cfg["seed"],
        workers=cfg["threads"],
    )
    return RunResult(rows, ok=all(r["lr_norm_sq"] >= 1.0 - 1e-12 for r in rows))


def cmd_hermite_check(cfg: dict) -> RunResult:
    rows = hm.identity_suite(cfg["seed"], int(cfg["mc_samples"]))
    return RunResult(rows, ok=all(r["passed"] for r in rows))


def cmd_chernoff_fit(cfg: dict) -> RunResult:
    prior = SpikePrior.parse(cfg["prior"])
    rows = []
    for n in _int_list(cfg["n"]):
        fit = fit_local_chernoff(prior, n, int(cfg["trials"]), substream(cfg["seed"], "chernoff", n))
        rows.append({"prior": prior.label(), "n": n, "trials": fit.trials, "eta": fit.eta, "delta": fit.delta,
                     "C": fit.C, "seed": cfg["seed"]})
    return RunResult(rows)


@dataclass(frozen=True)
class Command:
    run: Callable[[dict], RunResult]
    help: str
    params: dict  # name -> (default, help); default None means required


COMMANDS = {
    "goe-spectrum": Command(cmd_goe_spectrum, "extreme eigenvalues and semicircle KS distance of GOE draws",
                            {"n": (None, "matrix dimension"), "trials": (20, "number of draws")}),
    "sk-baselines": Command(cmd_sk_baselines, "brute-force optimum, spectral certificate and rounding survey",
                            {"n": (None, f"dimension (<= {MAX_BRUTE_N})"), "instances": (20, "GOE instances")}),
    "wishart-detect": Command(cmd_wishart_detect, "spectral detector error rates in the spiked Wishart model",
                              {"n": (None, "dimension"), "gamma": (None, "aspect ratio n/N"),
                               "beta": (None, "spike strength(s), comma separated"),
                               "trials": (200, "balanced trials per beta"), "prior": ("rademacher", "spike prior")}),
    "quiet-plant": Command(cmd_quiet_plant, "plant null and spiked samples into GOE spectra",
                           {"n": (None, "dimension"), "eps": (None, "certification gap"),
                            "trials": (20, "trials per input type")}),
    "lowdeg-scan": Command(cmd_lowdeg_scan, "low-degree likelihood-ratio norm over a (beta, n) grid",
                           {"gamma": (None, "aspect ratio n/N"), "beta": (None, "comma separated"),
                            "D": (None, "degree bound"), "n": (None, "comma separated dimensions"),
                            "method": (EXACT, f"one of {', '.join(METHODS)}"),
                            "trials": (200_000, "spike pairs for monte-carlo"), "prior": ("rademacher", "spike prior")}),
    "hermite-check": Command(cmd_hermite_check, "run every Hermite identity suite",
                             {"mc_samples": (1_000_000, "Monte Carlo samples for expectation checks")}),
    "chernoff-fit": Command(cmd_chernoff_fit, "fit a local Chernoff bound to the spike overlap tail",
                            {"n": (None, "comma separated dimensions"), "trials": (100_000, "spike pairs"),
                             "prior": ("rademacher", "spike prior")}),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hardnesslab",
        description="Reproducible experiments on spectral certification and spiked Wishart detection.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=f"The seed defaults to ${SEED_ENV_VAR}; one of the two is required.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, cmd in COMMANDS.items():
        p = sub.add_parser(name, help=cmd.help, description=cmd.help,
                           epilog="CSV columns: " + ",".join(COLUMNS[name]))
        for key, (default, text) in cmd.params.items():
            suffix = " (required)" if default is None else f" (default {default})"
            p.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None, help=text + suffix)
        p.add_argument("--seed", type=int, default=None, help=f"master seed (default ${SEED_ENV_VAR})")
        p.add_argument("--config", default=None, help="key = value file; flags override it")
        p.add_argument("--out", default=None, help="result path (stdout if omitted); manifest at <out>.manifest.json")
        p.add_argument("--format", dest="fmt", choices=("csv", "json"), default=None, help="output format (default csv)")
        p.add_argument("--threads", type=int, default=None, help="worker cap; results do not depend on it")
    return parser


def resolve_config(args: argparse.Namespace) -> dict[str, Any]:
    cmd = COMMANDS[args.command]
    file_cfg = read_config(args.config) if args.config else {}
    unknown = set(file_cfg) - set(cmd.params) - {"seed", "out", "format", "threads"}
    if unknown:
        raise ConfigError(f"unknown config keys for {args.command}: {', '.join(sorted(unknown))}")
    cfg: dict[str, Any] = {}
    for key, (default, _) in cmd.params.items():
        value = getattr(args, key)
        if value is None:
            value = file_cfg.get(key, default)
        if value is None:
            raise ConfigError(f"missing required parameter '{key}' for {args.command}")
        cfg[key] = value
    seed = args.seed if args.seed is not None else file_cfg.get("seed")
    if seed is None:
        seed = default_seed(fallback=-1)
    seed = int(seed)
    if seed < 0:
        raise ConfigError(f"a nonnegative seed is required (--seed, config file or ${SEED_ENV_VAR})")
    cfg["seed"] = seed
    threads = args.threads if args.threads is not None else int(file_cfg.get("threads", 1))
    if threads < 1:
        raise ConfigError("threads must be at least 1")
    cfg["threads"] = threads
    cfg["format"] = args.fmt or file_cfg.get("format", "csv")
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    cfg["out"] = args.out or file_cfg.get("out")
    return cfg


def _cell(value) -> Any:
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def render(rows: Sequence[dict], columns: Sequence[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{c: _cell(r[c]) for c in columns} for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in (_cell(r[c]) for c in columns)])
    return buf.getvalue()


def manifest(command: str, cfg: dict, argv: Sequence[str], result: RunResult) -> dict:
    return {
        "command": command,
        "argv": list(argv),
        "config": {k: v for k, v in cfg.items() if k != "out"},
        "seed": cfg["seed"],
        "columns": list(COLUMNS[command]),
        "checks_passed": result.ok,
        "derived": result.extra,
        "versions": {
            "hardnesslab": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
    }


_NEGATIVE = re.compile(r"^-[\d.][\d.,eE+-]*$")


def _attach_negative_values(argv: Sequence[str]) -> list[str]:
    """Rewrite ``--beta -0.9,-0.4`` as ``--beta=-0.9,-0.4``; argparse would read the value as a flag."""
    out: list[str] = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and _NEGATIVE.match(tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(_attach_negative_values(argv))  # exits with status 2 on usage errors
    try:
        cfg = resolve_config(args)
        result = COMMANDS[args.command].run(cfg)
    except (HardnessLabError, ValueError, OSError) as exc:
        print(f"hardnesslab {args.command}: error: {exc}", file=sys.stderr)
        return 1
    text = render(result.rows, COLUMNS[args.command], cfg["format"])
    if cfg["out"]:
        with open(cfg["out"], "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        with open(cfg["out"] + ".manifest.json", "w", encoding="utf-8", newline="\n") as fh:
            json.dump(manifest(args.command, cfg, argv, result), fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        sys.stdout.write(text)
    if not result.ok:
        print(f"hardnesslab {args.command}: one or more checks failed", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
