"""Command-line front end.

Subcommands produce one tabular artifact each (CSV or JSON), an optional SVG
plot, and a sidecar manifest <out>.manifest.json recording the command, the
fully resolved configuration, and SHA-256 checksums of every file written.
`replay` re-runs a manifest and fails if any checksum changed, which is the
reproducibility check the manifest exists for.

Option precedence: explicit flags beat the --config file, which beats the
built-in defaults. The config file is a JSON object keyed by flag names
(underscore form, e.g. "rel_tol").

Exit codes: 0 success, 2 configuration error, 3 convergence or replay
mismatch.
"""

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from .analytics import (
    classical_entropy_curve,
    speedup_factor,
    verify_optimality,
)
from .continuum_sde import SCHEMES, SdeConfig
from .ensemble import EnsembleConfig, derive_stream, run_ensemble
from .errors import ConfigError, ConvergenceError
from .feedback import parse_strategy, run_discrete_protocol
from .measurement import MeasurementStrength

ARTIFACT_VERSION = 1

_DEFAULTS = {
    "discrete": {
        "p0": 0.5, "b": 0.2, "steps": 200, "seed": 0, "strategy": "optimal",
    },
    "sde": {
        "gamma": 1.0, "dt": 1e-4, "time": 1.0, "trajectories": 100, "seed": 0,
        "strategy": "optimal", "p0": 0.5, "scheme": "exact", "record_every": 1,
        "workers": 1,
    },
    "classical": {
        "gamma": 1.0, "time": 0.5, "steps": 100, "rel_tol": 1e-10,
    },
    "speedup": {
        "targets": "1e-1,1e-2,1e-3,1e-4", "gamma": 1.0, "rel_tol": 1e-10,
    },
    "verify-optimality": {
        "steps": 3, "b": 0.2, "grid": 37, "p0": 0.4, "budget": 2_000_000,
    },
}

_COMMON_DEFAULTS = {"out": None, "format": "csv", "plot": None}

# Merged config values are coerced through these, so a config file full of
# JSON strings or a stray float where an int belongs fails loudly.
_COERCERS = {
    "gamma": float, "dt": float, "time": float, "p0": float, "b": float,
    "rel_tol": float, "targets": str, "strategy": str, "scheme": str,
    "steps": int, "trajectories": int, "seed": int, "grid": int,
    "budget": int, "workers": int, "record_every": int,
    "out": str, "format": str, "plot": str,
}


def _coerce(key: str, value):
    if value is None and key in ("out", "plot"):
        return None
    coercer = _COERCERS[key]
    try:
        if coercer is int:
            # Reject 3.5 but accept 3.0 from JSON configs.
            as_float = float(value)
            as_int = int(as_float)
            if as_int != as_float:
                raise ValueError
            return as_int
        return coercer(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc


def _resolve_config(command: str, namespace: argparse.Namespace) -> dict:
    """defaults < config file < explicit flags, all coerced and key-checked."""
    merged = dict(_DEFAULTS[command])
    merged.update(_COMMON_DEFAULTS)
    explicit = {k: v for k, v in vars(namespace).items() if k not in ("command", "config")}
    config_path = getattr(namespace, "config", None)
    if config_path is not None:
        try:
            loaded = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {config_path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {config_path} must hold a JSON object")
        for key in loaded:
            if key not in merged:
                raise ConfigError(f"unknown config key {key!r} for command {command!r}")
        merged.update(loaded)
    merged.update(explicit)
    return {key: _coerce(key, value) for key, value in merged.items()}


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_artifacts(command: str, cfg: dict, result: dict) -> None:
    """Write table (CSV or JSON), optional plot, and the manifest."""
    columns = result["columns"]
    rows = result["rows"]
    if cfg["format"] == "csv":
        lines = [",".join(columns)]
        lines.extend(",".join(_format_cell(cell) for cell in row) for row in rows)
        text = "\n".join(lines) + "\n"
    else:
        payload = {
            "columns": columns,
            "rows": [[cell for cell in row] for row in rows],
            "meta": result.get("meta", {}),
        }
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"

    if cfg["out"] is None:
        sys.stdout.write(text)
        if cfg["plot"] is not None:
            raise ConfigError("--plot requires --out (the manifest must record the plot)")
        return

    out = Path(cfg["out"])
    out.write_text(text)
    outputs = {"artifact": {"path": str(out), "sha256": _sha256(out)}}
    if cfg["plot"] is not None:
        plot_path = Path(cfg["plot"])
        plot_path.write_text(_render_svg(**result["plot"]))
        outputs["plot"] = {"path": str(plot_path), "sha256": _sha256(plot_path)}
    manifest = {
        "artifact_version": ARTIFACT_VERSION,
        "command": command,
        "config": {k: v for k, v in cfg.items()},
        "outputs": outputs,
    }
    manifest_path = Path(str(out) + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def _render_svg(xs, ys, x_label: str, y_label: str, title: str) -> str:
    """Minimal deterministic line plot, no external renderer."""
    width, height = 640.0, 420.0
    left, right, top, bottom = 70.0, 20.0, 40.0, 50.0
    xs = [float(x) for x in xs]
    ys = [float(y) for y in ys]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0

    def sx(x: float) -> float:
        return left + (x - x_lo) / (x_hi - x_lo) * (width - left - right)

    def sy(y: float) -> float:
        return height - bottom - (y - y_lo) / (y_hi - y_lo) * (height - top - bottom)

    points = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
    tick_parts = []
    for i in range(5):
        xv = x_lo + (x_hi - x_lo) * i / 4
        yv = y_lo + (y_hi - y_lo) * i / 4
        tick_parts.append(
            f'<text x="{sx(xv):.2f}" y="{height - bottom + 18:.2f}" '
            f'text-anchor="middle" font-size="11">{xv:.4g}</text>'
        )
        tick_parts.append(
            f'<text x="{left - 6:.2f}" y="{sy(yv) + 4:.2f}" '
            f'text-anchor="end" font-size="11">{yv:.4g}</text>'
        )
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.0f} {height:.0f}" font-family="sans-serif">\n'
        f'<rect width="{width:.0f}" height="{height:.0f}" fill="white"/>\n'
        f'<text x="{width / 2:.0f}" y="24" text-anchor="middle" font-size="14">{title}</text>\n'
        f'<line x1="{left:.0f}" y1="{height - bottom:.0f}" x2="{width - right:.0f}" '
        f'y2="{height - bottom:.0f}" stroke="black"/>\n'
        f'<line x1="{left:.0f}" y1="{top:.0f}" x2="{left:.0f}" y2="{height - bottom:.0f}" '
        f'stroke="black"/>\n'
        + "\n".join(tick_parts)
        + f'\n<text x="{(left + width - right) / 2:.0f}" y="{height - 12:.0f}" '
        f'text-anchor="middle" font-size="12">{x_label}</text>\n'
        f'<text x="16" y="{(top + height - bottom) / 2:.0f}" text-anchor="middle" '
        f'font-size="12" transform="rotate(-90 16 {(top + height - bottom) / 2:.0f})">{y_label}</text>\n'
        f'<polyline points="{points}" fill="none" stroke="#1f5fa8" stroke-width="1.5"/>\n'
        "</svg>\n"
    )


def _run_discrete(cfg: dict) -> dict:
    strength = MeasurementStrength.from_b(cfg["b"])
    strategy = parse_strategy(cfg["strategy"])
    uniforms = derive_stream(cfg["seed"], 0).random(cfg["steps"])
    records = run_discrete_protocol(cfg["p0"], strength, strategy, uniforms)
    rows = [[r.step, r.sign, r.probability, r.alpha, r.entropy] for r in records]
    return {
        "columns": ["step[index]", "outcome[sign]", "probability[dimensionless]",
                    "alpha[rad]", "P[dimensionless]"],
        "rows": rows,
        "meta": {"b": cfg["b"], "p0": cfg["p0"], "strategy": cfg["strategy"]},
        "plot": {
            "xs": [r.step for r in records], "ys": [r.entropy for r in records],
            "x_label": "step", "y_label": "linear entropy P",
            "title": "Discrete protocol entropy",
        },
    }


def _run_sde(cfg: dict) -> dict:
    sde = SdeConfig(cfg["gamma"], cfg["dt"], cfg["time"])
    ensemble_cfg = EnsembleConfig(
        n_trajectories=cfg["trajectories"],
        master_seed=cfg["seed"],
        sde=sde,
        strategy=parse_strategy(cfg["strategy"]),
        record_every=cfg["record_every"],
        initial_p0=cfg["p0"],
        scheme=cfg["scheme"],
    )
    stats = run_ensemble(ensemble_cfg, n_workers=cfg["workers"])
    curve = stats.mean_curve
    rows = [
        [float(t), float(p), float(se)]
        for t, p, se in zip(curve.times, curve.values, stats.stderr_curve)
    ]
    return {
        "columns": ["t[time]", "P_mean[dimensionless]", "P_stderr[dimensionless]"],
        "rows": rows,
        "meta": {"clamp_events": stats.clamp_events, "scheme": cfg["scheme"],
                 "trajectories": cfg["trajectories"]},
        "plot": {
            "xs": list(curve.times), "ys": list(curve.values),
            "x_label": "t", "y_label": "mean linear entropy",
            "title": "Ensemble mean entropy",
        },
    }


def _run_classical(cfg: dict) -> dict:
    if cfg["steps"] < 1:
        raise ConfigError(f"steps must be >= 1, got {cfg['steps']!r}")
    times = np.linspace(0.0, cfg["time"], cfg["steps"] + 1)
    curve = classical_entropy_curve(cfg["gamma"], times, rel_tol=cfg["rel_tol"])
    rows = [[float(t), float(p)] for t, p in zip(curve.times, curve.values)]
    return {
        "columns": ["t[time]", "P_classical[dimensionless]"],
        "rows": rows,
        "meta": {"gamma": cfg["gamma"], "rel_tol": cfg["rel_tol"]},
        "plot": {
            "xs": list(curve.times), "ys": list(curve.values),
            "x_label": "t", "y_label": "classical mean entropy",
            "title": "Unmonitored register entropy",
        },
    }


def _parse_targets(text: str) -> list[float]:
    try:
        targets = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --targets list {text!r}") from exc
    if not targets:
        raise ConfigError("targets list is empty")
    return targets


def _run_speedup(cfg: dict) -> dict:
    rows = []
    for target in _parse_targets(cfg["targets"]):
        factor = speedup_factor(target, cfg["gamma"], rel_tol=cfg["rel_tol"])
        t_feedback = math.log(0.5 / target) / (8.0 * cfg["gamma"])
        rows.append([target, t_feedback, factor * t_feedback, factor])
    return {
        "columns": ["final_P[dimensionless]", "t_feedback[time]",
                    "t_classical[time]", "speedup[dimensionless]"],
        "rows": rows,
        "meta": {"gamma": cfg["gamma"], "rel_tol": cfg["rel_tol"]},
        "plot": {
            "xs": [math.log10(1.0 / row[0]) for row in rows],
            "ys": [row[3] for row in rows],
            "x_label": "log10(1 / final P)", "y_label": "speed-up factor",
            "title": "Purification speed-up",
        },
    }


def _run_verify(cfg: dict) -> dict:
    report = verify_optimality(
        cfg["steps"], cfg["b"], angle_grid=cfg["grid"], p0=cfg["p0"], budget=cfg["budget"],
    )
    rows = [[theta, value] for theta, value in report.first_node_values]
    print(
        f"min expected entropy {report.min_value:.17g} vs closed form "
        f"{report.closed_form:.17g}; bound satisfied: {report.bound_satisfied}; "
        f"minimizer always pi/2: {report.minimizer_always_half_pi}",
        file=sys.stderr,
    )
    return {
        "columns": ["theta[rad]", "expected_final_P[dimensionless]"],
        "rows": rows,
        "meta": report.to_dict(),
        "plot": {
            "xs": [row[0] for row in rows], "ys": [row[1] for row in rows],
            "x_label": "first-step theta [rad]", "y_label": "expected final P",
            "title": "Root angle scan",
        },
    }


_RUNNERS = {
    "discrete": _run_discrete,
    "sde": _run_sde,
    "classical": _run_classical,
    "speedup": _run_speedup,
    "verify-optimality": _run_verify,
}


def _run_replay(namespace: argparse.Namespace) -> int:
    manifest_path = Path(namespace.manifest)
    try:
        manifest = json.loads(manifest_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read manifest {manifest_path}: {exc}") from exc
    for key in ("command", "config", "outputs"):
        if key not in manifest:
            raise ConfigError(f"manifest {manifest_path} is missing {key!r}")
    command = manifest["command"]
    if command not in _RUNNERS:
        raise ConfigError(f"manifest names unknown command {command!r}")
    cfg = dict(manifest["config"])
    cfg["out"] = namespace.out
    if namespace.workers is not None:
        if "workers" not in cfg:
            raise ConfigError(f"command {command!r} does not take --workers")
        cfg["workers"] = namespace.workers
    if cfg.get("plot") is not None:
        cfg["plot"] = namespace.out + ".svg"
    cfg = {key: _coerce(key, value) for key, value in cfg.items()}

    result = _RUNNERS[command](cfg)
    _write_artifacts(command, cfg, result)
    new_manifest = json.loads(Path(cfg["out"] + ".manifest.json").read_text())
    mismatches = []
    for role, recorded in manifest["outputs"].items():
        fresh = new_manifest["outputs"].get(role)
        if fresh is None or fresh["sha256"] != recorded["sha256"]:
            mismatches.append(role)
    if mismatches:
        raise ConvergenceError(
            f"replay of {manifest_path} produced different {', '.join(mismatches)} checksums"
        )
    print(f"replay ok: {len(manifest['outputs'])} artifact(s) match {manifest_path}")
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default=argparse.SUPPRESS, help="output file (default stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default=argparse.SUPPRESS,
                        help="artifact format (default csv)")
    parser.add_argument("--plot", default=argparse.SUPPRESS, help="write an SVG plot here")
    parser.add_argument("--config", default=None, help="JSON file of option defaults")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qpurify",
        description="Qubit purification under continuous measurement with feedback.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("discrete", help="finite-strength measurement chain with feedback")
    p.add_argument("--p0", type=float, default=argparse.SUPPRESS)
    p.add_argument("--b", type=float, default=argparse.SUPPRESS,
                   help="per-step measurement strength in (0, 1)")
    p.add_argument("--steps", type=int, default=argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--strategy", default=argparse.SUPPRESS,
                   help="optimal | none | fixed-theta=X")
    _add_common(p)

    p = sub.add_parser("sde", help="trajectory ensemble of the continuous limit")
    p.add_argument("--gamma", type=float, default=argparse.SUPPRESS)
    p.add_argument("--dt", type=float, default=argparse.SUPPRESS)
    p.add_argument("--time", type=float, default=argparse.SUPPRESS)
    p.add_argument("--trajectories", type=int, default=argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--strategy", default=argparse.SUPPRESS)
    p.add_argument("--p0", type=float, default=argparse.SUPPRESS)
    p.add_argument("--scheme", choices=SCHEMES, default=argparse.SUPPRESS)
    p.add_argument("--record-every", dest="record_every", type=int, default=argparse.SUPPRESS)
    p.add_argument("--workers", type=int, default=argparse.SUPPRESS)
    _add_common(p)

    p = sub.add_parser("classical", help="no-measurement baseline entropy curve")
    p.add_argument("--gamma", type=float, default=argparse.SUPPRESS)
    p.add_argument("--time", type=float, default=argparse.SUPPRESS)
    p.add_argument("--steps", type=int, default=argparse.SUPPRESS,
                   help="number of curve intervals")
    p.add_argument("--rel-tol", dest="rel_tol", type=float, default=argparse.SUPPRESS)
    _add_common(p)

    p = sub.add_parser("speedup", help="feedback-vs-classical time-to-purity ratio")
    p.add_argument("--targets", default=argparse.SUPPRESS,
                   help="comma-separated final entropies")
    p.add_argument("--gamma", type=float, default=argparse.SUPPRESS)
    p.add_argument("--rel-tol", dest="rel_tol", type=float, default=argparse.SUPPRESS)
    _add_common(p)

    p = sub.add_parser("verify-optimality", help="exhaustive small-depth strategy scan")
    p.add_argument("--steps", type=int, default=argparse.SUPPRESS)
    p.add_argument("--b", type=float, default=argparse.SUPPRESS)
    p.add_argument("--grid", type=int, default=argparse.SUPPRESS)
    p.add_argument("--p0", type=float, default=argparse.SUPPRESS)
    p.add_argument("--budget", type=int, default=argparse.SUPPRESS)
    _add_common(p)

    p = sub.add_parser("replay", help="re-run a manifest and verify checksums")
    p.add_argument("manifest", help="path to a .manifest.json file")
    p.add_argument("--out", required=True, help="where to write the re-run artifact")
    p.add_argument("--workers", type=int, default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    namespace = parser.parse_args(argv)
    try:
        if namespace.command == "replay":
            return _run_replay(namespace)
        cfg = _resolve_config(namespace.command, namespace)
        result = _RUNNERS[namespace.command](cfg)
        _write_artifacts(namespace.command, cfg, result)
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
