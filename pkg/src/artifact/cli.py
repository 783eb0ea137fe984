"""Batch command-line front end.

Every command resolves its configuration from built-in defaults, then an
optional JSON file (``--config``), then explicit flags, in that order.
Summaries are written as ``key=value`` lines; per-sample and per-row data
as CSV preceded by ``# key=value`` header lines.  Both embed the resolved
configuration and the package version, never timestamps, so fixed seeds
give byte-identical files.

Exit codes: 0 success, 2 configuration or input error, 3 too many Monte
Carlo rejections, 4 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Callable

import numpy as np

from . import __version__
from .bounds import (curvature_bound, icn_bound, icn_bound_orthogonal, lk2_bound_report,
                     min_distance, refined_lk2_bound, unknot_fraction_bound)
from .curves import (FourierSpec, PetalSpec, SpaceCurve, fourier_curve, orthogonal_fourier_pair,
                     petal_curve, petal_link_pair)
from .errors import ArtifactError, InvalidInput, NearSingular, TooManyRejections
from .invariants import QuadratureSpec, curvature_expectation, icn_expectation
from .kernels import AbCoords, ConfigPair, ijkl_consistency_report, lk2_kernel, lk2_oracle
from .mc_engine import MCSpec, lk2_mc_run, lk2_sampled
from .multidegree import (denominator_coefficients, fit_numerator, lk2_kernel_configs,
                          sample_configs)
from .sampling import FrameDistribution
from .streams import STREAM_CONFIGS, check_seed, derive_seed, make_rng

EXIT_OK, EXIT_CONFIG, EXIT_REJECTIONS, EXIT_VALIDATION = 0, 2, 3, 4

TABLE5_GUARD = 1e-4
DIVERGED_REL_STDERR = 0.2
DIVERGED_PEAK_SHARE = 0.1
OUTPUT_KEYS = ("out", "summary")  # destinations, not part of the computation


class ConfigError(ArtifactError, ValueError):
    """A command-line or config-file value is invalid."""


# ---------------------------------------------------------------------------
# curve specifications


def _floats(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as e:
        raise ConfigError(f"bad number list {text!r}") from e


def _petal_spec(body: str) -> PetalSpec:
    vals = _floats(body)
    if len(vals) != 2:
        raise ConfigError(f"petal spec needs k,epsilon, got {body!r}")
    return PetalSpec(vals[0], vals[1])


def parse_curve(text: str) -> tuple[SpaceCurve, FourierSpec | None]:
    """``fourier:c0,c1,...`` or ``petal:k,epsilon``; returns the curve and its Fourier spec."""
    kind, _, body = str(text).partition(":")
    if kind == "fourier":
        spec = FourierSpec(_floats(body))
        return fourier_curve(spec), spec
    if kind == "petal":
        return petal_curve(_petal_spec(body)), None
    raise ConfigError(f"unknown curve {text!r} (use fourier:... or petal:k,eps)")


def parse_pair(text: str) -> tuple[SpaceCurve, SpaceCurve, tuple | None]:
    """``petal-pair:k,epsilon`` or ``orthogonal-pair:c0,c1,.../d0,d1,...``."""
    kind, _, body = str(text).partition(":")
    if kind == "petal-pair":
        c1, c2 = petal_link_pair(_petal_spec(body))
        return c1, c2, None
    if kind == "orthogonal-pair":
        left, sep, right = body.partition("/")
        if not sep:
            raise ConfigError("orthogonal-pair needs c-coefficients/d-coefficients")
        c, d = FourierSpec(_floats(left)), FourierSpec(_floats(right))
        c1, c2 = orthogonal_fourier_pair(c, d)
        return c1, c2, (c, d)
    raise ConfigError(f"unknown pair {text!r} (use petal-pair:k,eps or orthogonal-pair:c/d)")


# ---------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(x) for x in v)
    return str(v)


def _header(command: str, cfg: dict) -> list:
    lines = [("artifact_version", __version__), ("command", command)]
    lines += [(f"config.{k}", cfg[k]) for k in sorted(cfg) if k not in OUTPUT_KEYS]
    return lines


def render_record(command: str, cfg: dict, record: dict) -> str:
    items = _header(command, cfg) + list(record.items())
    return "".join(f"{k}={_fmt(v)}\n" for k, v in items)


def render_csv(command: str, cfg: dict, columns: list, rows: list, extra: dict | None = None) -> str:
    buf = io.StringIO()
    for k, v in _header(command, cfg) + list((extra or {}).items()):
        buf.write(f"# {k}={_fmt(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def _write(path: str | None, text: str):
    if path in (None, "", "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# commands: each takes the resolved config and returns (text, exit code)


def _mc_spec(cfg, n_key) -> MCSpec:
    return MCSpec(int(cfg[n_key]), cfg["seed"], int(cfg["chunks"]), float(cfg["guard"]),
                  int(cfg["threads"]))


def cmd_curvature(cfg):
    curve, _ = parse_curve(cfg["curve"])
    kappa = curvature_expectation(curve, QuadratureSpec(int(cfg["quad"]), cfg["rule"]))
    return render_record("curvature", cfg, {"kappa_mean": kappa,
                                            "kappa_over_2pi": kappa / (2 * math.pi)}), EXIT_OK


def cmd_icn(cfg):
    c1, c2, coeffs = parse_pair(cfg["pair"])
    value = icn_expectation(c1, c2, QuadratureSpec(int(cfg["quad"]), cfg["rule"]), float(cfg["c_icn"]))
    rec = {"icn_mean": value}
    if coeffs is not None:
        rec["icn_bound"] = icn_bound_orthogonal(*coeffs, float(cfg["c_icn"])).bound_value
    return render_record("icn", cfg, rec), EXIT_OK


def cmd_bounds(cfg):
    which = cfg["which"]
    rec: dict = {"which": which}
    if which == "unknot":
        if cfg.get("kappa") is not None:
            kappa = float(cfg["kappa"])
        else:
            curve, _ = parse_curve(cfg["curve"])
            kappa = curvature_expectation(curve, QuadratureSpec(int(cfg["quad"])))
        rec.update(kappa_mean=kappa, bound=unknot_fraction_bound(kappa))
    elif which == "curvature":
        curve, spec = parse_curve(cfg["curve"])
        if spec is None:
            raise ConfigError("the curvature bound needs a fourier curve")
        rec.update(bound=curvature_bound(spec),
                   kappa_mean=curvature_expectation(curve, QuadratureSpec(int(cfg["quad"]))))
    elif which == "icn":
        c1, c2, coeffs = parse_pair(cfg["pair"])
        if coeffs is None:
            raise ConfigError("the ICN bound needs an orthogonal-pair")
        rep = icn_bound(*coeffs, min_distance(c1, c2), float(cfg["c_icn"]))
        rec.update(rep.as_record())
    elif which == "lk2":
        c1, c2, _ = parse_pair(cfg["pair"])
        rec.update(lk2_bound_report(c1, c2, _mc_spec(cfg, "mc_points")).as_record())
    elif which == "refined":
        c1, c2, _ = parse_pair(cfg["pair"])
        rec.update(refined_lk2_bound(c1, c2, grid=int(cfg["grid"])).as_record())
    else:
        raise ConfigError(f"--which must be unknot, curvature, icn, lk2 or refined, got {which!r}")
    return render_record("bounds", cfg, rec), EXIT_OK


def cmd_mc_lk2(cfg):
    c1, c2, _ = parse_pair(cfg["pair"])
    run = lk2_mc_run(c1, c2, _mc_spec(cfg, "mc_points"))
    e = run.estimate
    return render_record("mc-lk2", cfg, {"lk2": e.mean, "stderr": e.stderr, "n_used": e.n_used,
                                         "n_rejected": e.n_rejected,
                                         "peak_share": run.peak_share}), EXIT_OK


def cmd_sample_links(cfg):
    c1, c2, _ = parse_pair(cfg["pair"])
    n = int(cfg["n_links"])
    if n < 1:
        raise ConfigError("n_links must be >= 1")
    res = lk2_sampled(c1, c2, n, int(cfg["segments"]), FrameDistribution(cfg["dist"]),
                      cfg["seed"], int(cfg["threads"]))
    summary = {"mean": res.mean, "variance": res.variance, "lk2": res.estimate.mean,
               "stderr": res.estimate.stderr, "n_links": n, "n_resampled": res.n_resampled,
               "non_integer": res.non_integer, "min_turning": res.min_turning}
    rows = [{"sample_index": i, "linking_number": float(v), "frame_seed": int(s)}
            for i, (v, s) in enumerate(zip(res.linking, res.frame_seeds))]
    text = render_csv("sample-links", cfg, ["sample_index", "linking_number", "frame_seed"], rows,
                      {f"summary.{k}": v for k, v in summary.items()})
    if cfg.get("summary"):
        _write(cfg["summary"], render_record("sample-links", cfg, summary))
    return text, EXIT_OK


TABLE5_COLUMNS = ["k", "epsilon", "sampled_lk2", "sampled_stderr", "mc_lk2", "mc_stderr", "z",
                  "mc_rejected", "mc_peak_share", "diverged"]


def table5_rows(cfg) -> list:
    rows = []
    for k in (int(x) for x in _floats(str(cfg["ks"]))):
        c1, c2 = petal_link_pair(PetalSpec(k, float(cfg["epsilon"])))
        samp = lk2_sampled(c1, c2, int(cfg["n_links"]), int(cfg["segments"]),
                           FrameDistribution(cfg["dist"]), cfg["seed"], int(cfg["threads"]))
        run = lk2_mc_run(c1, c2, _mc_spec(cfg, "mc_points"))
        mc, sm = run.estimate, samp.estimate
        comb = math.hypot(mc.stderr, sm.stderr)
        diverged = (mc.stderr > DIVERGED_REL_STDERR * abs(mc.mean)
                    or run.peak_share > DIVERGED_PEAK_SHARE)
        rows.append({"k": k, "epsilon": float(cfg["epsilon"]), "sampled_lk2": sm.mean,
                     "sampled_stderr": sm.stderr, "mc_lk2": mc.mean, "mc_stderr": mc.stderr,
                     "z": (mc.mean - sm.mean) / comb if comb > 0 else 0.0,
                     "mc_rejected": mc.n_rejected, "mc_peak_share": run.peak_share,
                     "diverged": bool(diverged)})
    return rows


def cmd_table5(cfg):
    if not float(cfg["epsilon"]) > 0:
        raise ConfigError("epsilon must be positive")
    rows = table5_rows(cfg)
    return render_csv("table5", cfg, TABLE5_COLUMNS, rows), EXIT_OK


def cmd_fit_multidegree(cfg):
    n = int(cfg["samples"])
    if n < 200:
        raise ConfigError("samples must be >= 200")
    x = sample_configs(n, cfg["seed"])
    fit = fit_numerator(x, denominator_coefficients(), lk2_kernel_configs)
    rows = [{"edges": g.label, "coefficient": c} for g, c in sorted(fit.coefficients.items())]
    extra = {"residual_rms": fit.residual_rms, "relative_residual": fit.relative_residual,
             "rank": fit.rank, "d_coefficients": tuple(denominator_coefficients())}
    return render_csv("fit-multidegree", cfg, ["edges", "coefficient"], rows, extra), EXIT_OK


def random_kernel_configs(n: int, seed: int, min_rel_disc: float = 0.1) -> list:
    """``n`` standard-normal R^4 configuration pairs with relative discriminant above a floor."""
    rng = make_rng(seed, STREAM_CONFIGS)
    out = []
    while len(out) < n:
        p = ConfigPair.from_vectors(rng.standard_normal((6, 4)))
        if p.discriminant()[1] > min_rel_disc:
            out.append(p)
    return out


def cmd_validate_kernel(cfg):
    trials = int(cfg["trials"])
    if trials < 10:
        raise ConfigError("trials must be >= 10")
    rows = []
    for i, p in enumerate(random_kernel_configs(trials, cfg["seed"])):
        kern = lk2_kernel(p)
        orc = lk2_oracle(p, int(cfg["mc_points"]), derive_seed(cfg["seed"], STREAM_CONFIGS, 1, i),
                         int(cfg["chunks"]), int(cfg["threads"]))
        z = (kern - orc.mean) / orc.stderr
        rows.append({"trial": i, "kernel": kern, "oracle": orc.mean, "oracle_stderr": orc.stderr,
                     "z": z, "pass": abs(z) <= 4.0})
    rate = sum(r["pass"] for r in rows) / trials
    rep = ijkl_consistency_report(AbCoords.from_angle(float(cfg["ijkl_angle"])))
    extra = {"pass_rate": rate, "ijkl_tuples": rep.n_tuples, "ijkl_overlapping": rep.n_overlapping,
             "ijkl_discrepant": rep.n_discrepant}
    text = render_csv("validate-kernel", cfg, ["trial", "kernel", "oracle", "oracle_stderr", "z", "pass"],
                      rows, extra)
    return text, EXIT_OK if rate >= 0.95 else EXIT_VALIDATION


COMMON = {"seed": 0, "chunks": 1, "threads": 1, "out": None, "guard": 1e-12, "dist": "gaussian"}

COMMANDS: dict[str, tuple[Callable, dict, str]] = {
    "curvature": (cmd_curvature, {"curve": "fourier:0,1", "quad": 256, "rule": "midpoint"},
                  "mean total curvature of random projections of a curve"),
    "icn": (cmd_icn, {"pair": "orthogonal-pair:1,1/1,1", "quad": 64, "rule": "midpoint",
                      "c_icn": 1.0},
            "mean inter-crossing number of a pair by quadrature"),
    "bounds": (cmd_bounds, {"which": "unknot", "curve": "petal:3,0.5", "pair": "petal-pair:3,1",
                            "kappa": None, "quad": 256, "c_icn": 1.0, "mc_points": 200_000,
                            "grid": 24},
               "analytic bounds (unknot, curvature, icn, lk2, refined)"),
    "mc-lk2": (cmd_mc_lk2, {"pair": "petal-pair:3,1", "mc_points": 500_000},
               "kernel Monte Carlo of the mean squared linking number"),
    "sample-links": (cmd_sample_links, {"pair": "petal-pair:3,1", "n_links": 10_000,
                                        "segments": 64, "summary": None},
                     "sample projected links and their linking numbers"),
    "table5": (cmd_table5, {"epsilon": 1.0, "ks": "3,5,7,9", "n_links": 10_000,
                            "mc_points": 500_000, "segments": 64, "guard": TABLE5_GUARD},
               "compare both estimators on petal pairs"),
    "fit-multidegree": (cmd_fit_multidegree, {"samples": 500},
                        "least-squares fit of the kernel numerator"),
    "validate-kernel": (cmd_validate_kernel, {"trials": 100, "mc_points": 1_000_000,
                                              "ijkl_angle": 0.6},
                        "closed-form kernel against the Gaussian oracle"),
}

_FLAG_TYPES = {"seed": int, "chunks": int, "threads": int, "guard": float, "quad": int,
               "c_icn": float, "kappa": float, "mc_points": int, "grid": int, "n_links": int,
               "segments": int, "epsilon": float, "samples": int, "trials": int,
               "ijkl_angle": float}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="artifact", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, defaults, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, argument_default=argparse.SUPPRESS)
        p.add_argument("--config", help="JSON file of option values (flags override it)")
        for key, default in {**COMMON, **defaults}.items():
            flag = "--" + key.replace("_", "-")
            kw = {"type": _FLAG_TYPES.get(key, str),
                  "help": f"default: {default}" if default is not None else None}
            if key == "dist":
                kw["choices"] = ["gaussian", "uniform"]
            p.add_argument(flag, dest=key, **kw)
    return parser


def resolve_config(command: str, flags: dict) -> dict:
    """Defaults, then the JSON file named by ``--config``, then explicit flags."""
    _, defaults, _ = COMMANDS[command]
    cfg = {**COMMON, **defaults}
    path = flags.pop("config", None)
    if path:
        try:
            with open(path) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
    cfg.update(flags)
    try:
        cfg["seed"] = check_seed(cfg["seed"])
    except InvalidInput as e:
        raise ConfigError(str(e)) from e
    return cfg


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    try:
        cfg = resolve_config(command, args)
        text, code = COMMANDS[command][0](cfg)
        _write(cfg.get("out"), text)
        return code
    except (TooManyRejections, NearSingular) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_REJECTIONS
    except (ArtifactError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
