"""Command-line entry point.

Every subcommand reads an optional JSON config (``--config``), applies flag
overrides, writes its artifacts and a ``manifest.json`` into the output
directory and exits with

* 0 on success,
* 2 when the configuration fails validation,
* 3 on numerical-resolution failures,
* 4 when a desk-scale cap is exceeded.

The output directory defaults to ``$LANDAULAB_OUT`` or ``./landaulab_out``.
"""

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from landaulab import __version__

OUT_ENV = "LANDAULAB_OUT"

EXIT_CONFIG, EXIT_NUMERIC, EXIT_CAP = 2, 3, 4


class ConfigError(ValueError):
    """Invalid or missing configuration field."""


class CapExceeded(ValueError):
    """A desk-scale cap was exceeded."""


# --------------------------------------------------------------------------
# Parsing helpers


def _float_list(s):
    if isinstance(s, (list, tuple)):
        return [float(x) for x in s]
    if isinstance(s, (int, float)):
        return [float(s)]
    return [float(x) for x in str(s).split(",") if x.strip()]


def _int_list(s):
    if isinstance(s, (list, tuple)):
        return [int(x) for x in s]
    if isinstance(s, int):
        return [s]
    return [int(x) for x in str(s).split(",") if x.strip()]


def _auto_float(s):
    """Float, or None for ``"auto"``."""
    if isinstance(s, str) and s.strip().lower() == "auto":
        return None
    return float(s)


def parse_symbol(spec: str, b0: float = 0.3):
    """``gaussian[:z]``, ``cutoff-gaussian[:start,end[,z]]`` or ``constant:c``."""
    from landaulab.singlesite import gap_cutoff_gaussian
    from landaulab.symbols import Constant, CutoffGaussian, Gaussian

    name, _, arg = str(spec).partition(":")
    name = name.strip().lower()
    vals = _float_list(arg) if arg else []
    if name == "gaussian":
        return Gaussian(vals[0] if vals else 1.0)
    if name in ("cutoff-gaussian", "cutoff_gaussian"):
        if not vals:
            return gap_cutoff_gaussian(b0)
        if len(vals) not in (2, 3):
            raise ConfigError("cutoff-gaussian takes start,end[,z]")
        return CutoffGaussian(*vals)
    if name == "constant":
        return Constant(vals[0] if vals else 0.0)
    raise ConfigError(f"unknown symbol {spec!r}")


# field name -> (converter, default); default None means required
SCHEMAS = {
    "quantize": {"symbol": (str, "gaussian"), "h": (float, None), "basis": (int, 40),
                 "representation": (str, "hermite")},
    "mehler": {"profile": (str, "gaussian"), "h": (float, None), "kmax": (int, 30),
               "method": (str, "laguerre")},
    "gapcheck": {"family": (str, "gaussian"), "b0": (float, 0.3), "kappa": (float, 0.5),
                 "h": (_float_list, [0.2, 0.1, 0.05]), "n": (int, 0)},
    "grushin": {"potential": (str, "gaussian"), "h": (_float_list, [0.2, 0.1, 0.05, 0.025]),
                "n": (int, 0), "mu": (float, 0.5), "jmax": (int, 6), "Nx": (int, 8), "Ny": (int, 32),
                "omega": (_float_list, [0.5, 0.8]), "bellissard_h": (float, 0.1)},
    "wegner": {"family": (str, "gaussian:5"), "h": (_float_list, [0.1]), "L": (_int_list, [1, 2, 3]),
               "delta": (_float_list, [0.01, 0.02, 0.04]), "mu0": (_auto_float, "auto"), "b0": (float, 0.3),
               "trials": (int, 500), "density": (str, "uniform"), "levels": (int, 30)},
    "minami": {"family": (str, "gaussian:5"), "h": (_float_list, [0.1]), "L": (_int_list, [1, 2, 3]),
               "delta": (_float_list, [0.025, 0.05, 0.1]), "mu0": (_auto_float, "auto"), "b0": (float, 0.3),
               "trials": (int, 500), "density": (str, "uniform"), "levels": (int, 30)},
    "bandedge": {"family": (str, "gaussian:5"), "h": (_float_list, [0.1]), "L": (_int_list, [2, 3]),
                 "eps": (_float_list, [0.05, 0.1]), "trials": (int, 1000), "density": (str, "uniform"),
                 "levels": (int, 30)},
}

COMMON = {"seed": (int, 0), "workers": (int, 1)}


def resolve_config(command: str, file_cfg: dict, flags: dict) -> dict:
    schema = {**SCHEMAS[command], **COMMON}
    merged = {}
    for key, (conv, default) in schema.items():
        raw = flags.get(key)
        if raw is None:
            raw = file_cfg.get(key)
        if raw is None:
            raw = default
        if raw is None:
            raise ConfigError(f"missing required field '{key}'")
        try:
            merged[key] = conv(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"invalid value for field '{key}': {raw!r}") from None
    unknown = set(file_cfg) - set(schema)
    if unknown:
        raise ConfigError(f"unknown config field(s): {', '.join(sorted(unknown))}")
    return merged


def load_config_file(path):
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    if "config" in data and "command" in data:  # a manifest from an earlier run
        data = data["config"]
    return dict(data)


# --------------------------------------------------------------------------
# Output helpers


def _dump(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        return _clean(x.item())
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def write_manifest(out: Path, command: str, cfg: dict):
    _dump(out / "manifest.json", {"command": command, "config": cfg, "version": __version__,
                                  "seed": cfg.get("seed")})


# --------------------------------------------------------------------------
# Commands


def cmd_quantize(cfg, out: Path):
    from landaulab.weyl import quantize_grid, quantize_hermite, spectrum

    if not 0.0 < cfg["h"] < 1.0:
        raise ConfigError("field 'h' must lie in (0, 1)")
    if cfg["basis"] < 4:
        raise ConfigError("field 'basis' must be >= 4")
    if cfg["basis"] > 400:
        raise CapExceeded("basis size exceeds the desk cap of 400")
    sym = parse_symbol(cfg["symbol"])
    if cfg["representation"] == "hermite":
        op = quantize_hermite(sym, cfg["h"], cfg["basis"])
    elif cfg["representation"] == "grid":
        op = quantize_grid(sym, cfg["h"])
    else:
        raise ConfigError("field 'representation' must be 'hermite' or 'grid'")
    op.to_csv(out / "matrix.csv")
    rep = spectrum(op)
    with open(out / "spectrum.csv", "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["index", "eigenvalue"])
        for i, v in enumerate(rep.eigenvalues):
            wr.writerow([i, repr(float(v))])
    _dump(out / "spectrum.json", _clean(rep.to_dict()))


def cmd_mehler(cfg, out: Path):
    from landaulab.mehler import eigen_table, write_table_csv

    sym = parse_symbol(cfg["profile"])
    prof = sym.radial()
    if prof is None:
        raise ConfigError("field 'profile' must name a radial symbol")
    if cfg["method"] not in ("laguerre", "fourier"):
        raise ConfigError("field 'method' must be 'laguerre' or 'fourier'")
    rows = eigen_table(prof, cfg["h"], cfg["kmax"], cfg["method"])
    write_table_csv(out / "eigenvalues.csv", rows, cfg["profile"], cfg["h"])


def cmd_gapcheck(cfg, out: Path):
    from landaulab.singlesite import SiteSymbolFamily, check_gap_assumption

    fam = SiteSymbolFamily(parse_symbol(cfg["family"], cfg["b0"]), n=cfg["n"])
    reps = check_gap_assumption(fam, cfg["b0"], cfg["kappa"], cfg["h"])
    _dump(out / "gapcheck.json", _clean({"family": cfg["family"], "pass": all(r.passed for r in reps),
                                        "reports": [r.to_dict() for r in reps]}))


def cmd_grushin(cfg, out: Path):
    from landaulab.grushin import TensorBasisSpec, bellissard_check, residual_scaling, write_roots_csv
    from landaulab.symbols import Scaled

    V = parse_symbol(cfg["potential"])
    basis = TensorBasisSpec(cfg["Nx"], cfg["Ny"], cfg["n"])
    rs = residual_scaling(V, cfg["n"], cfg["mu"], cfg["h"], cfg["jmax"], basis)
    bell = []
    for w in cfg["omega"]:
        rep = bellissard_check(Scaled(V, w), cfg["n"], cfg["bellissard_h"], basis)
        write_roots_csv(out / f"roots_omega{w:g}.csv", rep)
        bell.append({"omega": w, "hausdorff": rep.distance, "roots": len(rep.roots), "band": len(rep.band)})
    _dump(out / "grushin.json", _clean({"potential": cfg["potential"], "slope": rs.slope,
                                       "residuals": rs.to_dict(), "bellissard": bell}))


def _mc(cfg, out: Path, statistic: str):
    from landaulab.ensemble import CouplingDensity, MCStudy, run_mc, scaling_svg
    from landaulab.singlesite import SiteSymbolFamily

    fam = SiteSymbolFamily(parse_symbol(cfg["family"], cfg.get("b0", 0.3)))
    if max(cfg["L"]) > 4:
        raise CapExceeded("lattice side exceeds the desk cap of 4")
    widths = cfg["eps"] if statistic == "bandedge" else cfg["delta"]
    kw = {}
    if statistic != "bandedge":
        mu0 = cfg["mu0"]
        if mu0 is None:
            from landaulab.ensemble import midpoint_mu0

            mu0 = midpoint_mu0(fam.with_h(cfg["h"][0]), cfg["b0"], cfg["levels"])
        kw = {"mu0": mu0, "b0": cfg["b0"]}
    try:
        study = MCStudy(statistic, fam, tuple(cfg["h"]), tuple(cfg["L"]), tuple(widths),
                        trials=cfg["trials"], seed=cfg["seed"], density=CouplingDensity(cfg["density"]),
                        levels=cfg["levels"], **kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    res = run_mc(study, workers=cfg["workers"])
    (out / f"{statistic}.csv").write_text(res.to_csv())
    summary = res.summary()
    if statistic == "bandedge":
        from landaulab.ensemble import band_edge_exact

        summary["exact"] = [{"cell": c.index, "eps": c.width, "sites": c.sites,
                             "exact": band_edge_exact(study.density, c.width, c.sites),
                             "p_hat": c.p_hat, "within_wilson": c.lo <= band_edge_exact(study.density, c.width, c.sites) <= c.hi}
                            for c in res.cells]
    _dump(out / f"{statistic}.json", _clean(summary))
    if statistic != "bandedge":
        for axis in ("volume", "interval"):
            (out / f"{statistic}_{axis}.svg").write_text(scaling_svg(res, axis))


def cmd_wegner(cfg, out):
    _mc(cfg, out, "wegner")


def cmd_minami(cfg, out):
    _mc(cfg, out, "minami")


def cmd_bandedge(cfg, out):
    _mc(cfg, out, "bandedge")


COMMANDS = {"quantize": cmd_quantize, "mehler": cmd_mehler, "gapcheck": cmd_gapcheck,
            "grushin": cmd_grushin, "wegner": cmd_wegner, "minami": cmd_minami, "bandedge": cmd_bandedge}


# --------------------------------------------------------------------------
# Entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="landaulab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, schema in SCHEMAS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="JSON config file (or a manifest)")
        sp.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV})")
        for key in list(schema) + list(COMMON):
            sp.add_argument(f"--{key}", dest=key, default=None)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "out")}
    try:
        cfg = resolve_config(args.command, load_config_file(args.config), flags)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out or os.environ.get(OUT_ENV, "landaulab_out"))
    out.mkdir(parents=True, exist_ok=True)
    code = run_command(args.command, cfg, out)
    if code == 0:
        write_manifest(out, args.command, cfg)
    return code


def run_command(command: str, cfg: dict, out: Path) -> int:
    from landaulab.ensemble import LatticeTooLarge
    from landaulab.grushin import BandLeakage, ResidualAtNoiseFloor, SeriesDivergent
    from landaulab.mehler import ProfileNotEvaluable, WindowInsufficient
    from landaulab.oscillator import QuadratureError
    from landaulab.weyl import GridUnderresolved, NoConvergence

    numeric = (QuadratureError, GridUnderresolved, NoConvergence, WindowInsufficient, ProfileNotEvaluable,
               SeriesDivergent, BandLeakage, ResidualAtNoiseFloor)
    try:
        COMMANDS[command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CapExceeded, LatticeTooLarge) as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except numeric as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        msg = str(exc)
        if "exceeds the cap" in msg or "desk cap" in msg:
            print(f"cap exceeded: {msg}", file=sys.stderr)
            return EXIT_CAP
        print(f"config error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
