"""Command-line front end: ``kerrchord <command> [flags]``.

Every command writes a CSV table, optionally a PPM heatmap, and a JSON
manifest next to the ``--out`` stem.  Values come from flags, then from the
INI file given by ``--config``, then from built-in defaults.  Config sections
are ``[core]`` (hbar, alpha_q, alpha_p, tail_tol) and ``[cli.<command>]`` for
command options, keyed by the long flag name with dashes as underscores.

Exit codes: 0 success, 2 usage error, 3 numerical diagnostic failure.
"""
from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .blindspots import (InterpolatedChord, classify_and_threshold, find_zeros, nodal_lines,
                         track_nearest)
from .classical import ehrenfest_time, min_winding_chord, twa_grid, winding_chord_geometric
from .core import CHORD_AXES, WIGNER_AXES, CoherentParams, ComplexField2D, Constants, GridSpec
from .observables import QuadratureResolutionError, StencilInstabilityError, local_correlation, moment_table
from .quantum import (ExactChord, GridCoverageError, TruncationError, chord_grid_exact, coherent_fock,
                      kerr_propagate, wigner_grid_exact)
from .transforms import BandLimitError, BoundaryMassError, TCAChord

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3

NUMERIC_ERRORS = (BandLimitError, BoundaryMassError, GridCoverageError, TruncationError,
                  StencilInstabilityError, QuadratureResolutionError, FloatingPointError)

CORE_DEFAULTS = {"hbar": 1.0, "alpha_q": 4.0, "alpha_p": 3.0, "tail_tol": 1e-16}

# per command: option -> (type, default)
COMMAND_DEFAULTS = {
    "wigner": {"mode": (str, "exact"), "t": (float, 0.0), "window": (str, "-8:8"),
               "res": (int, 512), "scale": (str, "linear")},
    "chord": {"mode": (str, "exact"), "t": (float, 0.0), "window": (str, "-6:6"),
              "res": (int, 512), "slice": (str, ""), "quantity": (str, "re"),
              "scale": (str, "linear")},
    "blindspots": {"t": (float, 0.071), "window": (str, "-4:4"), "res": (int, 512),
                   "modes": (str, "both"), "match_tol": (float, 0.05)},
    "moments": {"n_max": (int, 3), "t_max": (float, 0.12), "dt": (float, 0.001)},
    "correlate": {"t": (float, 0.013), "Q": (float, 2.0), "Delta": (float, 1.0),
                  "xi_q_range": (str, "-3:3"), "res": (int, 301), "modes": (str, "both")},
    "spiral": {"t_range": (str, "0.01:0.12"), "dt": (float, 0.005), "window": (str, "-4:4"),
               "res": (int, 256), "match_tol": (float, 0.05)},
}

CHOICES = {"wigner.mode": ("exact", "twa"), "chord.mode": ("exact", "tca"),
           "chord.quantity": ("re", "im", "abs", "arg"), "wigner.scale": ("linear", "symlog"),
           "chord.scale": ("linear", "symlog"), "blindspots.modes": ("exact", "tca", "both"),
           "correlate.modes": ("exact", "tca", "both")}


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------- parsing

def _flag(name):
    return "--" + name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kerrchord", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"kerrchord {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd, opts in COMMAND_DEFAULTS.items():
        p = sub.add_parser(cmd, help=f"{cmd} data")
        p.add_argument("--config", type=Path, default=None, help="INI file with defaults")
        p.add_argument("--out", type=str, default=None, help="output stem (no extension)")
        p.add_argument("--hbar", type=float, default=None)
        p.add_argument("--alpha-q", dest="alpha_q", type=float, default=None)
        p.add_argument("--alpha-p", dest="alpha_p", type=float, default=None)
        p.add_argument("--no-image", action="store_true", help="skip the PPM heatmap")
        for name, (typ, default) in opts.items():
            kw = {"dest": name, "type": typ, "default": None,
                  "help": f"default {default!r}"}
            key = f"{cmd}.{name}"
            if key in CHOICES:
                kw["choices"] = CHOICES[key]
            p.add_argument(_flag(name), **kw)
    return parser


RANGE_FLAGS = ("--window", "--xi-q-range", "--t-range")


def _join_ranges(argv):
    """Attach range values to their flag so argparse does not read ``-8:8`` as an option."""
    out = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a in RANGE_FLAGS and i + 1 < len(argv):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def resolve(args) -> dict:
    """Merge flags over config over defaults into one flat dict."""
    cfg = configparser.ConfigParser()
    cfg.optionxform = str
    if args.config is not None:
        if not args.config.is_file():
            raise UsageError(f"config file {args.config} not found")
        cfg.read(args.config)
    out = {}
    for key, default in CORE_DEFAULTS.items():
        val = getattr(args, key, None)
        if val is None and cfg.has_option("core", key):
            val = cfg.getfloat("core", key)
        out[key] = default if val is None else float(val)
    section = f"cli.{args.command}"
    for key, (typ, default) in COMMAND_DEFAULTS[args.command].items():
        val = getattr(args, key, None)
        if val is None and cfg.has_option(section, key):
            raw = cfg.get(section, key)
            try:
                val = typ(raw)
            except ValueError as exc:
                raise UsageError(f"[{section}] {key}: {exc}") from None
            choices = CHOICES.get(f"{args.command}.{key}")
            if choices and val not in choices:
                raise UsageError(f"[{section}] {key} must be one of {choices}")
        out[key] = default if val is None else val
    out["command"] = args.command
    out["out"] = args.out
    out["no_image"] = bool(args.no_image)
    out["config"] = str(args.config) if args.config else None
    return out


def parse_range(text: str, name: str):
    try:
        lo, hi = (float(x) for x in text.split(":"))
    except ValueError:
        raise UsageError(f"{name} must look like min:max, got {text!r}") from None
    if not hi > lo:
        raise UsageError(f"{name}: need max > min, got {text!r}")
    return lo, hi


def parse_slice(text: str):
    if not text:
        return None
    key, _, val = text.partition("=")
    if key.strip() != "xi_p" or not val:
        raise UsageError(f"--slice must look like xi_p=<float>, got {text!r}")
    try:
        return float(val)
    except ValueError:
        raise UsageError(f"--slice value {val!r} is not a number") from None


# ---------------------------------------------------------------- writers

def write_csv(path: Path, header, columns):
    data = np.column_stack([np.asarray(c, float) for c in columns])
    np.savetxt(path, data, delimiter=",", fmt="%.17g", header=",".join(header), comments="")


def _diverging(x):
    """x in [-1, 1] -> RGB floats in [0, 1]: blue, white, red."""
    x = np.clip(x, -1.0, 1.0)
    r = np.where(x < 0, 1.0 + x, 1.0)
    b = np.where(x > 0, 1.0 - x, 1.0)
    g = 1.0 - np.abs(x)
    return np.stack([r, g, b], axis=-1)


def _cyclic(phase):
    h = (phase + np.pi) / (2.0 * np.pi)
    k = np.stack([h, h + 1 / 3, h + 2 / 3], axis=-1)
    return 0.5 + 0.5 * np.cos(2.0 * np.pi * k)


def heatmap_rgb(values, kind: str, scale: str = "linear"):
    """Map a real (kind 'signed' or 'magnitude') or phase array to RGB floats.

    ``values[i, j]`` has axis a along i and axis b along j; the image puts
    the largest b in row 0 and the smallest a in column 0.
    """
    v = np.asarray(values, float)
    if kind == "phase":
        rgb = _cyclic(v)
    else:
        m = np.max(np.abs(v))
        m = m if m > 0 else 1.0
        x = v / m
        if scale == "symlog":
            lin = 1e-3
            x = np.sign(x) * np.log1p(np.abs(x) / lin) / np.log1p(1.0 / lin)
        if kind == "magnitude":
            g = 1.0 - np.clip(np.abs(x), 0, 1)
            rgb = np.stack([g, g, g], axis=-1)
        else:
            rgb = _diverging(x)
    return rgb.transpose(1, 0, 2)[::-1]


def write_ppm(path: Path, rgb):
    img = np.clip(np.round(np.asarray(rgb) * 255.0), 0, 255).astype(np.uint8)
    h, w, _ = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def write_manifest(path: Path, manifest: dict):
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _clean(obj):
    """Replace non-finite floats so the manifest stays strict JSON."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)) and not math.isfinite(obj):
        return None
    return obj


# ---------------------------------------------------------------- commands

def _setup(cfg):
    constants = Constants(hbar=cfg["hbar"])
    params = CoherentParams(alpha_q=cfg["alpha_q"], alpha_p=cfg["alpha_p"])
    return constants, params


def _square(window, res, labels):
    lo, hi = parse_range(window, "--window")
    if res < 2:
        raise UsageError("--res must be at least 2")
    return GridSpec.square(lo, hi, res, labels)


def _stem(cfg, default):
    return Path(cfg["out"] if cfg["out"] else default)


def _path(stem, suffix):
    # stems such as chord_t0.013 contain dots, so append rather than replace
    return Path(f"{stem}{suffix}")


def _grid_csv(path, field2d, names):
    a, b = field2d.spec.meshgrid()
    write_csv(path, list(names) + ["re", "im"],
              [a.ravel(), b.ravel(), field2d.values.real.ravel(), field2d.values.imag.ravel()])


def cmd_wigner(cfg) -> dict:
    constants, params = _setup(cfg)
    spec = _square(cfg["window"], cfg["res"], WIGNER_AXES)
    t = cfg["t"]
    info = {}
    if cfg["mode"] == "exact":
        state = kerr_propagate(coherent_fock(params, constants, cfg["tail_tol"]), t, constants)
        field2d = wigner_grid_exact(state, spec, constants)
        info["fock_n"] = state.truncation
        info["imag_ratio"] = field2d.imag_ratio()
    else:
        field2d = twa_grid(params, spec, t, constants)
    info["integral"] = field2d.integral().real
    stem = _stem(cfg, f"wigner_{cfg['mode']}_t{t:g}")
    outputs = [_path(stem, ".csv")]
    _grid_csv(outputs[0], field2d, WIGNER_AXES)
    if not cfg["no_image"]:
        outputs.append(_path(stem, ".ppm"))
        write_ppm(outputs[-1], heatmap_rgb(field2d.values.real, "signed", cfg["scale"]))
    info.update({"grid": spec.to_dict(), "mode": cfg["mode"], "t": t, "color_scale": cfg["scale"],
                 "heatmap_quantity": "re"})
    return {"stem": stem, "outputs": outputs, "info": info}


def _quantity(values, q):
    return {"re": values.real, "im": values.imag, "abs": np.abs(values), "arg": np.angle(values)}[q]


def cmd_chord(cfg) -> dict:
    constants, params = _setup(cfg)
    t = cfg["t"]
    lo, hi = parse_range(cfg["window"], "--window")
    if cfg["res"] < 2:
        raise UsageError("--res must be at least 2")
    xi_slice = parse_slice(cfg["slice"])
    info = {"mode": cfg["mode"], "t": t, "quantity": cfg["quantity"], "color_scale": cfg["scale"]}
    if cfg["mode"] == "exact":
        state = kerr_propagate(coherent_fock(params, constants, cfg["tail_tol"]), t, constants)
        ev = ExactChord(state, constants)
        info["fock_n"] = state.truncation
    else:
        ev = TCAChord(params, t, constants)
        info.update({k: v for k, v in ev.meta.items() if k != "route"})
    stem = _stem(cfg, f"chord_{cfg['mode']}_t{t:g}" + ("_slice" if xi_slice is not None else ""))
    outputs = [_path(stem, ".csv")]
    if xi_slice is not None:
        xq = np.linspace(lo, hi, cfg["res"])
        vals = ev.grid([xi_slice], xq)[0]
        write_csv(outputs[0], ["xi_q", "re", "im", "abs", "arg"],
                  [xq, vals.real, vals.imag, np.abs(vals), np.angle(vals)])
        info["slice"] = {"xi_p": xi_slice, "xi_q_min": lo, "xi_q_max": hi, "n": cfg["res"]}
    else:
        spec = GridSpec.square(lo, hi, cfg["res"], CHORD_AXES)
        if cfg["mode"] == "exact":
            field2d = chord_grid_exact(ev.state, spec, constants)
        else:
            field2d = ev.field(spec)
        _grid_csv(outputs[0], field2d, CHORD_AXES)
        info["grid"] = spec.to_dict()
        if not cfg["no_image"]:
            q = cfg["quantity"]
            kind = {"re": "signed", "im": "signed", "abs": "magnitude", "arg": "phase"}[q]
            outputs.append(_path(stem, ".ppm"))
            write_ppm(outputs[-1], heatmap_rgb(_quantity(field2d.values, q), kind, cfg["scale"]))
    return {"stem": stem, "outputs": outputs, "info": info}


def _zero_rows(mode, zs):
    return [(mode, z.chord.xi_p, z.chord.xi_q, z.distance, z.residual, z.classification) for z in zs.zeros]


def cmd_blindspots(cfg) -> dict:
    constants, params = _setup(cfg)
    t = cfg["t"]
    if not t > 0:
        raise UsageError("--t must be positive for blind spots")
    spec = _square(cfg["window"], cfg["res"], CHORD_AXES)
    modes = ("exact", "tca") if cfg["modes"] == "both" else (cfg["modes"],)
    xi_m = min_winding_chord(params, t, constants)
    fields, zero_sets = {}, {}
    if "exact" in modes:
        state = kerr_propagate(coherent_fock(params, constants, cfg["tail_tol"]), t, constants)
        fields["exact"] = chord_grid_exact(state, spec, constants)
        zero_sets["exact"] = find_zeros(ExactChord(state, constants), fields["exact"])
    if "tca" in modes:
        fields["tca"] = TCAChord(params, t, constants).field(spec)
        zero_sets["tca"] = find_zeros(InterpolatedChord(fields["tca"]), fields["tca"])
    summary = None
    if len(modes) == 2:
        zero_sets["exact"], summary = classify_and_threshold(zero_sets["exact"], zero_sets["tca"],
                                                            xi_m, cfg["match_tol"])
    stem = _stem(cfg, f"blindspots_t{t:g}")
    nodal_path = Path(f"{stem}_nodal.csv")
    zeros_path = _path(stem, ".csv")
    with open(nodal_path, "w") as fh:
        fh.write("mode,part,line,xi_p,xi_q\n")
        for mode, f2 in fields.items():
            for part in ("real", "imaginary"):
                for k, line in enumerate(nodal_lines(f2, part).polylines):
                    for a, b in line:
                        fh.write(f"{mode},{part},{k},{a:.17g},{b:.17g}\n")
    with open(zeros_path, "w") as fh:
        fh.write("mode,xi_p,xi_q,distance,residual,classification\n")
        for mode, zs in zero_sets.items():
            for row in _zero_rows(mode, zs):
                fh.write("{},{:.17g},{:.17g},{:.17g},{:.17g},{}\n".format(*row))
    info = {"t": t, "grid": spec.to_dict(), "modes": list(modes), "match_tol": cfg["match_tol"],
            "xi_m": xi_m, "summary": summary,
            "zeros": {m: {"count": len(z), "failed": len(z.failures), "outside": len(z.outside),
                          "residual_target": z.tolerance} for m, z in zero_sets.items()}}
    return {"stem": stem, "outputs": [zeros_path, nodal_path], "info": info}


def cmd_moments(cfg) -> dict:
    constants, params = _setup(cfg)
    if cfg["dt"] <= 0 or cfg["t_max"] < 0 or cfg["n_max"] < 1:
        raise UsageError("need --dt > 0, --t-max >= 0 and --n-max >= 1")
    te = ehrenfest_time(params)
    t = np.arange(0.0, cfg["t_max"] + 0.5 * cfg["dt"], cfg["dt"])
    t = np.round(t, 12)
    if te <= cfg["t_max"]:
        t = np.unique(np.append(t, te))
    cols = moment_table(params, t, cfg["n_max"], constants)
    names = ["t"] + [f"{w}{n}_{m}" for w in "qp" for n in range(1, cfg["n_max"] + 1)
                     for m in ("quantum", "twa")]
    marker = (t == te).astype(float)
    stem = _stem(cfg, "moments")
    write_csv(_path(stem, ".csv"), names + ["ehrenfest_marker"], [cols[k] for k in names] + [marker])
    info = {"ehrenfest_time": te, "n_max": cfg["n_max"], "t_max": cfg["t_max"], "dt": cfg["dt"],
            "rows": int(t.size), "classical_quadrature": "tensor Gauss-Hermite, auto node count"}
    return {"stem": stem, "outputs": [_path(stem, ".csv")], "info": info}


def cmd_correlate(cfg) -> dict:
    constants, params = _setup(cfg)
    t = cfg["t"]
    lo, hi = parse_range(cfg["xi_q_range"], "--xi-q-range")
    if cfg["Delta"] <= 0 or cfg["res"] < 2:
        raise UsageError("need --Delta > 0 and --res >= 2")
    xq = np.linspace(lo, hi, cfg["res"])
    modes = ("exact", "tca") if cfg["modes"] == "both" else (cfg["modes"],)
    nan = np.full(xq.size, np.nan, dtype=complex)
    exact = tca = nan
    info = {"t": t, "Q": cfg["Q"], "Delta": cfg["Delta"], "modes": list(modes)}
    if "exact" in modes:
        state = kerr_propagate(coherent_fock(params, constants, cfg["tail_tol"]), t, constants)
        exact = local_correlation(ExactChord(state, constants), xq, cfg["Q"], cfg["Delta"], constants)
        info["fock_n"] = state.truncation
    if "tca" in modes:
        ev = TCAChord(params, t, constants)
        tca = local_correlation(ev, xq, cfg["Q"], cfg["Delta"], constants)
        info["tca_source_grid"] = ev.source_spec.to_dict()
    stem = _stem(cfg, f"correlate_t{t:g}")
    write_csv(_path(stem, ".csv"), ["xi_q", "re_exact", "im_exact", "re_tca", "im_tca"],
              [xq, exact.real, exact.imag, tca.real, tca.imag])
    if len(modes) == 2:
        info["max_abs_difference"] = float(np.max(np.abs(exact - tca)))
    return {"stem": stem, "outputs": [_path(stem, ".csv")], "info": info}


def cmd_spiral(cfg) -> dict:
    constants, params = _setup(cfg)
    t0, t1 = parse_range(cfg["t_range"], "--t-range")
    if t0 <= 0 or cfg["dt"] <= 0:
        raise UsageError("need a positive --t-range start and --dt > 0")
    lo, hi = parse_range(cfg["window"], "--window")
    times = np.round(np.arange(t0, t1 + 0.5 * cfg["dt"], cfg["dt"]), 12)
    track = track_nearest(params, times, constants, window=max(abs(lo), abs(hi)), res=cfg["res"])
    spec = GridSpec.square(lo, hi, cfg["res"], CHORD_AXES)
    rows = []
    for t, tp in zip(times, track):
        geo = winding_chord_geometric(params, t, constants=constants)
        state = kerr_propagate(coherent_fock(params, constants, cfg["tail_tol"]), t, constants)
        qz = find_zeros(ExactChord(state, constants), chord_grid_exact(state, spec, constants))
        tf = TCAChord(params, t, constants).field(spec)
        tz = find_zeros(InterpolatedChord(tf), tf)
        _, summ = classify_and_threshold(qz, tz, min_winding_chord(params, t, constants), cfg["match_tol"])
        rows.append([t, geo.formula, geo.global_min, tp.distance,
                     _num(summ["nearest_quantum_only"]), _num(summ["farthest_classical_matched"]),
                     geo.vertical])
    rows = np.array(rows)
    names = ["t", "xi_m_formula", "xi_m_geometric", "nearest_zero_dist", "nearest_quantum_only_dist",
             "farthest_classical_matched_dist", "xi_m_vertical"]
    stem = _stem(cfg, "spiral")
    write_csv(_path(stem, ".csv"), names, rows.T)
    info = {"t_range": [t0, t1], "dt": cfg["dt"], "grid": spec.to_dict(), "match_tol": cfg["match_tol"],
            "track_errors": {f"{tp.t:g}": tp.diagnostics["error"] for tp in track if "error" in tp.diagnostics}}
    return {"stem": stem, "outputs": [_path(stem, ".csv")], "info": info}


def _num(x):
    return float("nan") if x is None else float(x)


COMMANDS = {"wigner": cmd_wigner, "chord": cmd_chord, "blindspots": cmd_blindspots,
            "moments": cmd_moments, "correlate": cmd_correlate, "spiral": cmd_spiral}


def run(cfg: dict) -> dict:
    """Run one command from a resolved config; returns the manifest written."""
    start = time.perf_counter()
    result = COMMANDS[cfg["command"]](cfg)
    manifest = {"command": cfg["command"], "version": __version__, "backend": kernels.BACKEND,
                "hbar": cfg["hbar"], "alpha_q": cfg["alpha_q"], "alpha_p": cfg["alpha_p"],
                "tail_tol": cfg["tail_tol"], "config": cfg["config"],
                "settings": {k: v for k, v in cfg.items() if k in COMMAND_DEFAULTS[cfg["command"]]},
                "outputs": [str(p) for p in result["outputs"]]}
    manifest.update(result["info"])
    manifest["wall_time_s"] = time.perf_counter() - start
    manifest = _clean(manifest)
    write_manifest(_path(result["stem"], ".json"), manifest)
    return manifest


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_join_ranges(argv))
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        cfg = resolve(args)
        manifest = run(cfg)
    except UsageError as exc:
        print(f"kerrchord {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERIC_ERRORS as exc:
        print(f"kerrchord {args.command}: numerical diagnostic: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # remaining domain errors come from flag values (hbar <= 0, t <= 0, ...)
        print(f"kerrchord {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for path in manifest["outputs"]:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
