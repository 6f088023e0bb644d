"""Configuration-driven command line front end.

Subcommands: ``levels``, ``wkb``, ``contours``, ``resonance-map``,
``splittings``, ``validate``.  Each reads a small INI-style configuration
with a ``[model]`` section (bare energies, couplings as either amplitudes or
dimensionless values, reference quantum number), a command-specific ``[run]``
section and an optional ``[output]`` section.  Outputs are deterministic CSV
files: identical configuration bytes produce identical output bytes.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .dressed import resonance_contour, wkb_levels
from .errors import TriladderError
from .fock import resonance_sharpness_map
from .splittings import compare_splittings
from .trilevel import ModelParams, eigenvalues_at


class ConfigError(ValueError):
    pass


class Config:
    def __init__(self, params, run, output, echo):
        self.params = params
        self.run = run
        self.output = output
        self.echo = echo              # ordered (key, value) pairs for provenance

    def precision(self):
        return int(self.output.get("precision", 15))


def load_config(source) -> Config:
    """Parse and validate a configuration file (path or open text stream)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        if hasattr(source, "read"):
            parser.read_file(source)
        else:
            with open(source) as fh:
                parser.read_file(fh)
    except (OSError, configparser.Error) as err:
        raise ConfigError(f"cannot read configuration: {err}") from err

    if "model" not in parser:
        raise ConfigError("missing [model] section")
    model = parser["model"]

    def need(key):
        if key not in model:
            raise ConfigError(f"[model] is missing required key {key!r}")
        try:
            return float(model[key])
        except ValueError as err:
            raise ConfigError(f"[model] {key} = {model[key]!r} is not a number") from err

    e1, e2, e3 = need("e1"), need("e2"), need("e3")
    n0 = model.get("n0")
    if n0 is None:
        raise ConfigError("[model] is missing required key 'n0'")
    n0 = int(float(n0))

    if ("u" in model) == ("g1" in model):
        raise ConfigError("[model] must set exactly one of 'u' and 'g1'")
    if ("v" in model) == ("g2" in model):
        raise ConfigError("[model] must set exactly one of 'v' and 'g2'")
    try:
        if "u" in model:
            u = float(model["u"])
        else:
            u = float(model["g1"]) * (e2 - e1) / np.sqrt(n0)
        if "v" in model:
            v = float(model["v"])
        else:
            v = float(model["g2"]) * (e3 - e2) / np.sqrt(n0)
        params = ModelParams(e1, e2, e3, u, v, n0)
    except ValueError as err:
        raise ConfigError(f"[model] rejected: {err}") from err

    run = dict(parser["run"]) if "run" in parser else {}
    output = dict(parser["output"]) if "output" in parser else {}
    for key, value in output.items():
        if key == "precision":
            if int(value) <= 0:
                raise ConfigError("[output] precision must be positive")

    echo = [("e1", params.e1), ("e2", params.e2), ("e3", params.e3),
            ("u", params.u), ("v", params.v),
            ("g1", params.g1), ("g2", params.g2), ("n0", params.n0)]
    echo += [(f"run.{k}", v) for k, v in run.items()]
    return Config(params, run, output, echo)


def _run_float(cfg, key, default=None):
    if key not in cfg.run:
        if default is None:
            raise ConfigError(f"[run] is missing required key {key!r}")
        return default
    try:
        return float(cfg.run[key])
    except ValueError as err:
        raise ConfigError(f"[run] {key} = {cfg.run[key]!r} is not a number") from err


def _run_int(cfg, key, default=None):
    return int(_run_float(cfg, key, default))


def _run_transition(cfg, default="1,2"):
    raw = cfg.run.get("transition", default)
    try:
        j, k = (int(part) for part in raw.split(","))
    except ValueError as err:
        raise ConfigError(f"[run] transition = {raw!r}; expected 'j,k'") from err
    return j, k


def _run_int_list(cfg, key):
    raw = cfg.run.get(key)
    if raw is None:
        raise ConfigError(f"[run] is missing required key {key!r}")
    try:
        return [int(part) for part in raw.replace(" ", "").split(",") if part]
    except ValueError as err:
        raise ConfigError(f"[run] {key} = {raw!r}; expected comma-separated integers") from err


def _format(value, precision):
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{value:.{precision}g}"


def _render(cfg, header, rows):
    precision = cfg.precision()
    out = []
    for key, value in cfg.echo:
        out.append(f"# {key} = {_format(value, 17)}")
    out.append(",".join(header))
    for row in rows:
        out.append(",".join(_format(v, precision) for v in row))
    return "\n".join(out) + "\n"


def render_levels(cfg) -> str:
    y = np.linspace(_run_float(cfg, "y_min"), _run_float(cfg, "y_max"),
                    _run_int(cfg, "y_points"))
    levels = eigenvalues_at(cfg.params, y)
    rows = [(y[i], levels[i, 0], levels[i, 1], levels[i, 2]) for i in range(y.size)]
    return _render(cfg, ("y", "E1", "E2", "E3"), rows)


def render_wkb(cfg) -> str:
    g1 = np.linspace(_run_float(cfg, "g1_min"), _run_float(cfg, "g1_max"),
                     _run_int(cfg, "g1_points"))
    g2 = np.linspace(_run_float(cfg, "g2_min"), _run_float(cfg, "g2_max"),
                     _run_int(cfg, "g2_points"))
    n = _run_int(cfg, "n", cfg.params.n0)
    nodes = _run_int(cfg, "nodes", 256)
    rows = []
    for b in g2:
        for a in g1:
            lv = wkb_levels(cfg.params.with_couplings(a, b), n, nodes)
            rows.append((a, b, lv[0], lv[1], lv[2]))
    return _render(cfg, ("g1", "g2", "E1", "E2", "E3"), rows)


def render_contours(cfg) -> str:
    j, k = _run_transition(cfg)
    dns = _run_int_list(cfg, "delta_n_list")
    rays = _run_int(cfg, "rays", 181)
    radius = _run_float(cfg, "radius", 1.25)
    scan = _run_int(cfg, "scan_points", 160)
    nodes = _run_int(cfg, "nodes", 256)
    tol = _run_float(cfg, "residual_tol", 1e-6)
    angles = np.linspace(0.0, np.pi / 2.0, rays)
    rows = []
    for dn in dns:
        contour = resonance_contour(cfg.params, (j, k), dn, angles=angles,
                                    radius=radius, scan_points=scan, nodes=nodes,
                                    residual_tol=tol)
        for i in range(len(contour.points)):
            rows.append((j, k, dn, contour.angles[i], contour.points[i, 0],
                         contour.points[i, 1], contour.residuals[i],
                         contour.multiple[i]))
    return _render(cfg, ("j", "k", "delta_n", "angle", "g1", "g2",
                         "residual", "multiple"), rows)


def render_resonance_map(cfg) -> str:
    """Rows are tracked sequentially; seeding vectors chain along the g2 axis."""
    j, k = _run_transition(cfg)
    g1 = np.linspace(_run_float(cfg, "g1_min", 0.0), _run_float(cfg, "g1_max", 1.0),
                     _run_int(cfg, "g1_points"))
    g2 = np.linspace(_run_float(cfg, "g2_min", 0.0), _run_float(cfg, "g2_max", 1.25),
                     _run_int(cfg, "g2_points"))
    width = _run_int(cfg, "half_width", 400)
    table = resonance_sharpness_map(cfg.params, (j, k), g1, g2,
                                    cfg.params.n0, width)
    rows = [(r["g1"], r["g2"], r["diff"], r["delta_n"], r["sharpness"], r["ok"])
            for r in table]
    return _render(cfg, ("g1", "g2", "diff", "delta_n", "sharpness", "ok"), rows)


def render_splittings(cfg, threads=1) -> str:
    j, k = _run_transition(cfg)
    dns = _run_int_list(cfg, "delta_n_list")
    ratio = _run_float(cfg, "ratio")
    width = _run_int(cfg, "half_width", 400)
    g1_max = _run_float(cfg, "g1_max", 1.05)
    mode = cfg.run.get("mode", "pair")
    vicinity = _run_float(cfg, "vicinity", 0.08)
    scan = _run_int(cfg, "scan_points", 101)

    def one(dn):
        return compare_splittings(cfg.params, ratio, [dn], (j, k),
                                  n0=cfg.params.n0, half_width=width,
                                  g1_max=g1_max, mode=mode, vicinity=vicinity,
                                  scan_points=scan)[0]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(one, sorted(dns)))
    else:
        records = [one(dn) for dn in sorted(dns)]
    rows = []
    for r in records:
        rows.append((r.transition[0], r.transition[1], r.delta_n, r.line_ratio,
                     r.g_contour[0], r.g_contour[1], r.g_star[0], r.g_star[1],
                     r.de_pt, r.de_exact, r.ratio, len(r.minima), r.ok))
    return _render(cfg, ("j", "k", "delta_n", "line_ratio", "g1_contour",
                         "g2_contour", "g1_star", "g2_star", "de_pt", "de_exact",
                         "pt_over_exact", "n_minima", "ok"), rows)


def _write(cfg, args, name, text):
    out_dir = Path(args.out or cfg.output.get("directory", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{name}.csv"
    path.write_text(text)
    print(f"wrote {path}")


def cmd_validate(args) -> int:
    from .validate import run_all
    results = run_all()
    width = max(len(r.name) for r in results)
    failed = 0
    for r in results:
        status = "pass" if r.passed else "FAIL"
        print(f"{r.name:<{width}}  {status}  {r.seconds:8.3f} s  {r.detail}")
        failed += not r.passed
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="triladder",
        description="Spectra of a three-level ladder system coupled to an "
                    "oscillator in the multiphoton regime.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    renderers = {
        "levels": lambda cfg, args: render_levels(cfg),
        "wkb": lambda cfg, args: render_wkb(cfg),
        "contours": lambda cfg, args: render_contours(cfg),
        "resonance-map": lambda cfg, args: render_resonance_map(cfg),
        "splittings": lambda cfg, args: render_splittings(cfg, args.threads),
    }
    for name in (*renderers, "validate"):
        cmd = sub.add_parser(name)
        if name != "validate":
            cmd.add_argument("--config", required=True)
        cmd.add_argument("--out", default=None)
        cmd.add_argument("--threads", type=int, default=1)
    args = parser.parse_args(argv)

    if args.command == "validate":
        return cmd_validate(args)
    try:
        cfg = load_config(args.config)
        text = renderers[args.command](cfg, args)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2
    except (TriladderError, ValueError) as err:
        print(f"computation failed: {err}", file=sys.stderr)
        return 1
    _write(cfg, args, args.command, text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
