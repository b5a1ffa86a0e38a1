"""Command-line sweep and reporting surface.

Emits plot-ready CSV (deterministic row order, `#`-prefixed metadata block)
for distance sweeps, 2-D distance/frequency maps, misalignment studies, and
the design/bias/report helpers.  Exit codes: 0 success, 2 validation
failure, 3 partial sweep (some points failed), 4 internal error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from typing import Any, Iterable

import numpy as np

from . import __version__
from . import link_model as lm
from . import presets, tuner
from .errors import UnmatchableError, UntunableError
from .geometry import Placement, mutual_inductance, mutual_inductance_coaxial

NA = "NA"
ERR = "ERR"

CSV_COLUMNS = (
    "d_m", "c_m", "theta_rad", "f_hz", "strategy", "eta", "gamma_sq",
    "regime", "mode",
    "bias_v_source_series", "bias_v_source_shunt",
    "bias_v_load_series", "bias_v_load_shunt",
    "m12_h",
)

# Published reference values for the stock loop preset: optimal port
# impedances and frequency-tuned plateau data at three design distances.
REFERENCE_PORT_IMPEDANCES = {
    0.20: (5.94 - 30.15j, 5.45 - 29.73j),
    0.35: (1.66 - 30.19j, 1.52 - 29.76j),
    0.50: (0.76 - 30.2j, 0.70 - 29.77j),
}
REFERENCE_PLATEAUS = {
    0.20: {"eta": 0.7937, "critical_m": 0.1913},
    0.35: {"eta": 0.4958, "critical_m": 0.2979},
    0.50: {"eta": 0.3114, "critical_m": 0.3495},
}


@dataclass(frozen=True)
class SweepSpec:
    """Validated description of one sweep run."""

    kind: str  # "distance" | "grid2d" | "misalign-lateral" | "misalign-angular"
    strategy: str  # "fixed" | "freq" | "imp"
    d_start_m: float
    d_stop_m: float
    d_points: int
    f_start_hz: float | None = None
    f_stop_hz: float | None = None
    f_points: int = 0
    delta_start: float = 0.0
    delta_stop: float = 0.0
    delta_points: int = 0
    design_m: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("distance", "grid2d", "misalign-lateral", "misalign-angular"):
            raise ValueError(f"unknown sweep kind {self.kind!r}")
        if self.strategy not in ("fixed", "freq", "imp"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if not (0.0 < self.d_start_m <= self.d_stop_m):
            raise ValueError("empty or negative distance range")
        if self.d_points < 2 and self.d_start_m != self.d_stop_m:
            raise ValueError("distance sweeps need at least 2 points")
        if self.kind == "grid2d":
            if not self.f_start_hz or not self.f_stop_hz or self.f_points < 2:
                raise ValueError("grid2d needs a frequency range with at least 2 points")
        if self.kind.startswith("misalign") and self.delta_points < 2:
            raise ValueError("misalignment sweeps need at least 2 offsets")
        if self.strategy in ("fixed", "freq") and not self.design_m:
            raise ValueError(f"strategy {self.strategy!r} needs a network design distance")


def _axis(start: float, stop: float, n: int) -> list[float]:
    if n <= 1 or start == stop:
        return [start]
    return [float(x) for x in np.linspace(start, stop, n)]


def _fmt(value: Any) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _system_config(cfg: dict, source_network=None, load_network=None) -> tuner.SystemConfig:
    return tuner.SystemConfig(
        loop1=(presets.resonator_from(cfg, "loop1"), presets.loop_geometry_from(cfg, "loop1")),
        loop2=(presets.resonator_from(cfg, "loop2"), presets.loop_geometry_from(cfg, "loop2")),
        placement=Placement(cfg.get("placement_d_m", 0.2)),
        source_network=source_network,
        load_network=load_network,
        z_source=cfg["z_reference_ohm"],
        z_load=cfg["z_reference_ohm"],
    )


def _designed_config(cfg: dict, d_design: float, omega: float) -> tuner.SystemConfig:
    base = _system_config(cfg)
    src, load, _ = tuner.design_static_network(base, d_design, omega)
    return dataclasses.replace(base, source_network=src, load_network=load)


def _m12_for(sc: tuner.SystemConfig, p: Placement) -> float:
    g1, g2 = sc.loop1[1], sc.loop2[1]
    if p.is_coaxial:
        return mutual_inductance_coaxial(g1.radius, g2.radius, p.d)
    return mutual_inductance(g1, g2, p)


def _row_template(p: Placement, f_hz, strategy: str) -> dict[str, Any]:
    row = {col: NA for col in CSV_COLUMNS}
    row["d_m"] = p.d
    row["c_m"] = p.c
    row["theta_rad"] = p.theta
    row["f_hz"] = f_hz
    row["strategy"] = strategy
    return row


def _fill_regime(row, sc, m12, w0):
    regime = tuner.classify_system(sc, m12, w0)
    row["regime"] = regime.tag


def run_sweep(spec: SweepSpec, cfg: dict) -> tuple[list[dict], int]:
    """Evaluate a sweep; returns (rows, failure count).  Never raises per-point."""
    omega_design = 2.0 * math.pi * cfg["frequency_design_hz"]
    failures = 0
    rows: list[dict] = []

    if spec.strategy == "imp":
        net = presets.varactor_network_from(cfg)
        sc = _system_config(cfg, net, net)
    else:
        sc = _designed_config(cfg, spec.design_m[0], omega_design)
    w0 = math.sqrt(sc.loop1[0].omega0 * sc.loop2[0].omega0)

    placements: Iterable[Placement]
    if spec.kind == "distance" or spec.kind == "grid2d":
        placements = [Placement(d) for d in _axis(spec.d_start_m, spec.d_stop_m, spec.d_points)]
    elif spec.kind == "misalign-lateral":
        placements = [
            Placement(d, c=delta)
            for d in _axis(spec.d_start_m, spec.d_stop_m, spec.d_points)
            for delta in _axis(spec.delta_start, spec.delta_stop, spec.delta_points)
        ]
    else:
        placements = [
            Placement(d, theta=delta)
            for d in _axis(spec.d_start_m, spec.d_stop_m, spec.d_points)
            for delta in _axis(spec.delta_start, spec.delta_stop, spec.delta_points)
        ]

    for p in placements:
        if spec.kind == "grid2d":
            freqs = _axis(spec.f_start_hz, spec.f_stop_hz, spec.f_points)
        elif spec.strategy == "fixed":
            freqs = [cfg["frequency_design_hz"]]
        else:
            freqs = [None]
        for f in freqs:
            row = _row_template(p, f if f is not None else NA, spec.strategy)
            try:
                m12 = _m12_for(sc, p)
                row["m12_h"] = m12
                if spec.strategy == "fixed":
                    _fill_regime(row, sc, m12, w0)
                    w = 2.0 * math.pi * f
                    row["eta"] = tuner.system_efficiency(sc, w, m12)
                    row["gamma_sq"] = tuner.system_reflection_sq(sc, w, m12)
                elif spec.strategy == "freq":
                    res = tuner.frequency_tune(sc, p)
                    row["f_hz"] = res.frequency_hz
                    row["eta"] = res.efficiency
                    row["gamma_sq"] = res.reflection_sq
                    row["regime"] = res.regime.tag
                    row["mode"] = res.mode_label
                else:
                    res = tuner.impedance_tune(sc, omega_design, p)
                    row["f_hz"] = res.frequency_hz
                    row["eta"] = res.efficiency
                    row["gamma_sq"] = res.reflection_sq
                    row["regime"] = res.regime.tag
                    row["mode"] = res.mode_label + ("+fallback" if res.fallback else "")
                    for key, value in (res.bias or {}).items():
                        row[f"bias_v_{key}"] = value
            except ValueError as exc:
                row["eta"] = ERR
                row["gamma_sq"] = ERR
                row.setdefault("m12_h", NA)
                row["mode"] = f"{ERR}:{type(exc).__name__}"
                failures += 1
            rows.append(row)
    return rows, failures


def misalign_study(
    cfg: dict,
    mode: str,
    d_fixed: tuple[float, ...] = (0.20, 0.35, 0.50),
    deltas: tuple[float, ...] | None = None,
) -> list[dict]:
    """M12 and efficiency (fixed-network vs impedance-tuned) vs misalignment.

    mode is "lateral" (offset sweep) or "angular" (tilt sweep); one block of
    rows per design distance in d_fixed, matching networks re-designed for
    each block's coaxial distance.
    """
    if mode not in ("lateral", "angular"):
        raise ValueError(f"unknown misalignment mode {mode!r}")
    if deltas is None:
        deltas = tuple(float(x) for x in np.linspace(0.0, 0.10, 6)) if mode == "lateral" \
            else tuple(float(x) for x in np.linspace(0.0, math.pi / 3, 7))
    omega = 2.0 * math.pi * cfg["frequency_design_hz"]
    net = presets.varactor_network_from(cfg)
    rows = []
    for d in d_fixed:
        fixed = _designed_config(cfg, d, omega)
        tunable = _system_config(cfg, net, net)
        link_loops = (fixed.loop1[0], fixed.loop2[0])
        for delta in deltas:
            p = Placement(d, c=delta) if mode == "lateral" else Placement(d, theta=delta)
            m12 = _m12_for(fixed, p)
            eta_fixed = tuner.system_efficiency(dataclasses.replace(fixed, placement=p), omega)
            res = tuner.impedance_tune(tunable, omega, p)
            rows.append(
                {
                    "d_m": d,
                    "delta": delta,
                    "mode": mode,
                    "m12_h": m12,
                    "eta_fixed": eta_fixed,
                    "eta_tuned": res.efficiency,
                    "eta_max": lm.max_efficiency(lm.Link(*link_loops, m12), omega),
                    "tuned_fallback": res.fallback,
                }
            )
    return rows


def report_tables(cfg: dict) -> dict:
    """Recompute the reference port impedances and plateau data.

    Returns a tree with computed values, reference values, and deviations;
    the text rendering prints one line per cell.
    """
    omega = 2.0 * math.pi * cfg["frequency_design_hz"]
    base = _system_config(cfg)
    report: dict[str, Any] = {"port_impedances": [], "plateaus": []}
    for d, (zs_ref, zl_ref) in REFERENCE_PORT_IMPEDANCES.items():
        try:
            _, _, (zs, zl) = tuner.design_static_network(base, d, omega)
            entry = {
                "design_m": d,
                "zs_computed": [zs.real, zs.imag],
                "zs_reference": [zs_ref.real, zs_ref.imag],
                "zl_computed": [zl.real, zl.imag],
                "zl_reference": [zl_ref.real, zl_ref.imag],
                "zs_re_dev": (zs.real - zs_ref.real) / abs(zs_ref.real),
                "zs_im_dev": (zs.imag - zs_ref.imag) / abs(zs_ref.imag),
                "zl_re_dev": (zl.real - zl_ref.real) / abs(zl_ref.real),
                "zl_im_dev": (zl.imag - zl_ref.imag) / abs(zl_ref.imag),
            }
        except ValueError as exc:
            entry = {"design_m": d, "error": f"{type(exc).__name__}: {exc}"}
        report["port_impedances"].append(entry)

    for d, ref in REFERENCE_PLATEAUS.items():
        try:
            sc = _designed_config(cfg, d, omega)
            etas = []
            flip = None
            prev = None
            for dd in np.linspace(0.08, 1.4 * d, 34):
                res = tuner.frequency_tune(sc, Placement(float(dd)))
                strong = res.regime.tag == lm.STRONG
                if prev is not None and prev[1] and not strong:
                    flip = 0.5 * (prev[0] + dd)
                if strong:
                    etas.append(res.efficiency)
                prev = (float(dd), strong)
            plateau = float(np.median(etas)) if etas else float("nan")
            entry = {
                "design_m": d,
                "plateau_computed": plateau,
                "plateau_reference": ref["eta"],
                "plateau_dev_pp": 100.0 * (plateau - ref["eta"]),
                "critical_computed_m": flip,
                "critical_reference_m": ref["critical_m"],
                "critical_dev": None if flip is None else (flip - ref["critical_m"]) / ref["critical_m"],
                "idealized_plateau_identity": _idealized_plateau(cfg, d, omega),
            }
        except ValueError as exc:
            entry = {"design_m": d, "error": f"{type(exc).__name__}: {exc}"}
        report["plateaus"].append(entry)
    return report


def _idealized_plateau(cfg: dict, d: float, omega: float) -> float:
    # Identical-loop idealization: plateau = (rl/(r+rl))^2 with the
    # loop-plane equivalent load of the designed network.
    sc = _designed_config(cfg, d, omega)
    rl_eq = tuner.loop_plane_load(sc, omega).real
    r_mean = 0.5 * (sc.loop1[0].r + sc.loop2[0].r)
    return lm.strong_coupling_constants(r_mean, rl_eq)[1]


def render_report(report: dict) -> str:
    lines = ["optimal port impedances (computed vs reference):"]
    for e in report["port_impedances"]:
        if "error" in e:
            lines.append(f"  d={e['design_m'] * 100:.0f}cm: {e['error']}")
            continue
        zs_c, zs_r = e["zs_computed"], e["zs_reference"]
        zl_c, zl_r = e["zl_computed"], e["zl_reference"]
        lines.append(
            f"  d={e['design_m'] * 100:.0f}cm: "
            f"Zs {zs_c[0]:+.3f}{zs_c[1]:+.3f}j vs {zs_r[0]:+.3f}{zs_r[1]:+.3f}j "
            f"(dev {e['zs_re_dev']:+.1%}/{e['zs_im_dev']:+.1%}) | "
            f"Zl {zl_c[0]:+.3f}{zl_c[1]:+.3f}j vs {zl_r[0]:+.3f}{zl_r[1]:+.3f}j "
            f"(dev {e['zl_re_dev']:+.1%}/{e['zl_im_dev']:+.1%})"
        )
    lines.append("frequency-tuned plateaus (computed vs reference):")
    for e in report["plateaus"]:
        if "error" in e:
            lines.append(f"  d={e['design_m'] * 100:.0f}cm: {e['error']}")
            continue
        crit = e["critical_computed_m"]
        crit_s = f"{crit:.4f}" if crit is not None else NA
        lines.append(
            f"  d={e['design_m'] * 100:.0f}cm: plateau {e['plateau_computed']:.4f} "
            f"vs {e['plateau_reference']:.4f} ({e['plateau_dev_pp']:+.1f}pp) | "
            f"critical {crit_s} vs {e['critical_reference_m']:.4f} m | "
            f"idealized identity {e['idealized_plateau_identity']:.4f}"
        )
    return "\n".join(lines)


def write_csv(path: str, rows: list[dict], cfg: dict, spec_echo: dict) -> None:
    lines = [
        f"# wptlink {__version__}",
        f"# config_sha256 {presets.config_sha256(cfg)}",
        f"# spec {json.dumps(spec_echo, sort_keys=True)}",
        ",".join(CSV_COLUMNS),
    ]
    for row in rows:
        lines.append(",".join(_fmt(row[col]) for col in CSV_COLUMNS))
    text = "\n".join(lines) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", default=None, help="JSON config overriding the preset")
    sub.add_argument("--out", default="-", help="output path ('-' for stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wptlink", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("sweep-distance", help="efficiency vs distance")
    _add_common(p)
    p.add_argument("--d-cm", nargs=2, type=float, default=(5.0, 100.0), metavar=("START", "STOP"))
    p.add_argument("--points", type=int, default=40)
    p.add_argument("--strategy", choices=("fixed", "freq", "imp"), default="fixed")
    p.add_argument("--network-design-cm", nargs="+", type=float, default=(35.0,))

    p = subs.add_parser("sweep2d", help="efficiency over a distance/frequency grid")
    _add_common(p)
    p.add_argument("--d-cm", nargs=2, type=float, default=(5.0, 60.0))
    p.add_argument("--points", type=int, default=30)
    p.add_argument("--f-mhz", nargs=2, type=float, default=(30.0, 46.0))
    p.add_argument("--f-points", type=int, default=81)
    p.add_argument("--network-design-cm", nargs="+", type=float, default=(20.0,))

    p = subs.add_parser("misalign", help="misalignment study at fixed distances")
    _add_common(p)
    p.add_argument("--mode", choices=("lateral", "angular"), default="lateral")
    p.add_argument("--d-cm", nargs="+", type=float, default=(20.0, 35.0, 50.0))
    p.add_argument("--delta-max", type=float, default=None,
                   help="max offset (m) or tilt (rad)")
    p.add_argument("--points", type=int, default=6)

    p = subs.add_parser("design", help="design static matching networks")
    _add_common(p)
    p.add_argument("--network-design-cm", nargs="+", type=float, default=(20.0, 35.0, 50.0))

    p = subs.add_parser("varactor-bias", help="bias voltages for a design distance")
    _add_common(p)
    p.add_argument("--network-design-cm", nargs="+", type=float, default=(20.0,))

    p = subs.add_parser("tables", help="recompute reference design/plateau tables")
    _add_common(p)
    p.add_argument("--json", action="store_true", help="emit the report as JSON")
    return parser


def _cmd_sweep_distance(args, cfg) -> int:
    spec = SweepSpec(
        kind="distance",
        strategy=args.strategy,
        d_start_m=args.d_cm[0] / 100.0,
        d_stop_m=args.d_cm[1] / 100.0,
        d_points=args.points,
        design_m=tuple(d / 100.0 for d in args.network_design_cm),
    )
    rows, failures = run_sweep(spec, cfg)
    write_csv(args.out, rows, cfg, dataclasses.asdict(spec))
    return 3 if failures else 0


def _cmd_sweep2d(args, cfg) -> int:
    spec = SweepSpec(
        kind="grid2d",
        strategy="fixed",
        d_start_m=args.d_cm[0] / 100.0,
        d_stop_m=args.d_cm[1] / 100.0,
        d_points=args.points,
        f_start_hz=args.f_mhz[0] * 1e6,
        f_stop_hz=args.f_mhz[1] * 1e6,
        f_points=args.f_points,
        design_m=tuple(d / 100.0 for d in args.network_design_cm),
    )
    rows, failures = run_sweep(spec, cfg)
    write_csv(args.out, rows, cfg, dataclasses.asdict(spec))
    return 3 if failures else 0


def _cmd_misalign(args, cfg) -> int:
    if args.delta_max is None:
        deltas = None
    else:
        deltas = tuple(float(x) for x in np.linspace(0.0, args.delta_max, args.points))
    rows = misalign_study(cfg, args.mode, tuple(d / 100.0 for d in args.d_cm), deltas)
    header = ["d_m", "delta", "mode", "m12_h", "eta_fixed", "eta_tuned", "eta_max", "tuned_fallback"]
    lines = [
        f"# wptlink {__version__}",
        f"# config_sha256 {presets.config_sha256(cfg)}",
        f"# spec {json.dumps({'kind': 'misalign-' + args.mode, 'd_m': [d / 100.0 for d in args.d_cm]}, sort_keys=True)}",
        ",".join(header),
    ]
    lines += [",".join(_fmt(r[h]) for h in header) for r in rows]
    text = "\n".join(lines) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return 0


def _cmd_design(args, cfg) -> int:
    omega = 2.0 * math.pi * cfg["frequency_design_hz"]
    base = _system_config(cfg)
    out = []
    status = 0
    for d_cm in args.network_design_cm:
        d = d_cm / 100.0
        try:
            src, load, (zs, zl) = tuner.design_static_network(base, d, omega)
            out.append(
                f"d={d_cm:.1f}cm: Zs={zs:.4f} Zl={zl:.4f} | "
                f"source Cs={src.c_series * 1e12:.2f}pF Cp={src.c_shunt * 1e12:.2f}pF | "
                f"load Cs={load.c_series * 1e12:.2f}pF Cp={load.c_shunt * 1e12:.2f}pF"
            )
        except (UnmatchableError, ValueError) as exc:
            out.append(f"d={d_cm:.1f}cm: {type(exc).__name__}: {exc}")
            status = 3
    print("\n".join(out))
    return status


def _cmd_varactor_bias(args, cfg) -> int:
    omega = 2.0 * math.pi * cfg["frequency_design_hz"]
    base = _system_config(cfg)
    net = presets.varactor_network_from(cfg)
    status = 0
    for d_cm in args.network_design_cm:
        d = d_cm / 100.0
        try:
            src, load, _ = tuner.design_static_network(base, d, omega)
            vs = net.biases_for(src)
            vl = net.biases_for(load)
            print(
                f"d={d_cm:.1f}cm: source series {vs[0]:.3f} V shunt {vs[1]:.3f} V | "
                f"load series {vl[0]:.3f} V shunt {vl[1]:.3f} V"
            )
        except (UnmatchableError, UntunableError) as exc:
            print(f"d={d_cm:.1f}cm: {type(exc).__name__}: {exc}")
            status = 3
    return status


def _cmd_tables(args, cfg) -> int:
    report = report_tables(cfg)
    if args.json:
        text = json.dumps(report, indent=2, sort_keys=True)
    else:
        text = render_report(report)
    if args.out == "-":
        print(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
    return 0


_COMMANDS = {
    "sweep-distance": _cmd_sweep_distance,
    "sweep2d": _cmd_sweep2d,
    "misalign": _cmd_misalign,
    "design": _cmd_design,
    "varactor-bias": _cmd_varactor_bias,
    "tables": _cmd_tables,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = presets.load_config(args.config)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](args, cfg)
    except ValueError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
