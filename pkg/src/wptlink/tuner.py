"""End-to-end tuning over the full cascade.

The system two-port is source termination -> source L-section -> feedline 1
-> coupled loops (T-equivalent) -> feedline 2 -> load L-section -> load
termination.  Three strategies operate on it: a static design (simultaneous
conjugate match at one distance), frequency tuning (track a split-mode
resonance with networks frozen), and impedance tuning (re-match by
re-biasing varactor stacks as the placement changes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from . import geometry as geo
from . import link_model as lm
from . import matching
from . import twoport
from .errors import (
    ConversionError,
    NoSolutionError,
    UnmatchableError,
    UntunableError,
)
from .solvers import bisect_root, golden_section_max

TUNE_FREQ_TOL_HZ = 1e3

MODE_EVEN = "even"
MODE_ODD = "odd"
MODE_OMEGA0 = "omega0"


@dataclass(frozen=True)
class SystemConfig:
    """Full link description: loops, placement, matching networks, terminations."""

    loop1: tuple[lm.Resonator, geo.LoopGeometry]
    loop2: tuple[lm.Resonator, geo.LoopGeometry]
    placement: geo.Placement
    source_network: matching.LSection | matching.VaractorNetwork | None = None
    load_network: matching.LSection | matching.VaractorNetwork | None = None
    z_source: float = 50.0
    z_load: float = 50.0

    def __post_init__(self):
        if self.z_source <= 0.0 or self.z_load <= 0.0:
            raise ValueError("external terminations must be positive and real")


@dataclass(frozen=True)
class TuneResult:
    """Operating point chosen by a tuning strategy."""

    frequency_hz: float
    bias: dict[str, float] | None
    efficiency: float
    reflection_sq: float
    regime: lm.CouplingRegime
    mode_label: str
    fallback: bool = False


def _fixed_lsection(
    network: matching.LSection | matching.VaractorNetwork | None, side: str
) -> matching.LSection | None:
    if network is None or isinstance(network, matching.LSection):
        return network
    raise ValueError(
        f"{side} network is bias-dependent; realize it with "
        "VaractorNetwork.lsection(v_series, v_shunt) first"
    )


def _mutual(cfg: SystemConfig, placement: geo.Placement) -> float:
    # Coaxial placements take the closed form; misaligned ones need quadrature.
    g1, g2 = cfg.loop1[1], cfg.loop2[1]
    if placement.is_coaxial:
        return geo.mutual_inductance_coaxial(g1.radius, g2.radius, placement.d)
    return geo.mutual_inductance(g1, g2, placement)


def _feed_abcd(g: geo.LoopGeometry, omega: float) -> twoport.TwoPortABCD:
    return twoport.tline_abcd(g.feed_z0, g.beta(omega), g.feed_length)


def _inner_abcd(cfg: SystemConfig, m12: float, omega: float) -> twoport.TwoPortABCD:
    """Feedline 1 -> coupled loops -> feedline 2 (no matching networks)."""
    res1, g1 = cfg.loop1
    res2, g2 = cfg.loop2
    z1, z2, z3 = twoport.coupled_loop_branches(res1, res2, m12, omega)
    middle = twoport.tnetwork_abcd(z1, z2, z3)
    return _feed_abcd(g1, omega) @ middle @ _feed_abcd(g2, omega)


def _cascade_abcd(cfg: SystemConfig, m12: float, omega: float) -> twoport.TwoPortABCD:
    m = _inner_abcd(cfg, m12, omega)
    src = _fixed_lsection(cfg.source_network, "source")
    load = _fixed_lsection(cfg.load_network, "load")
    if src is not None:
        m = matching.lsection_abcd(src, omega) @ m
    if load is not None:
        m = m @ twoport.flip(matching.lsection_abcd(load, omega))
    return m


def _transducer_gain(m: twoport.TwoPortABCD, z_s: float, z_l: float) -> float:
    denom = m.a * z_l + m.b + m.c * z_s * z_l + m.d * z_s
    return 4.0 * z_s * z_l / abs(denom) ** 2


def _input_reflection_sq(m: twoport.TwoPortABCD, z_s: float, z_l: float) -> float:
    zin = twoport.input_impedance_of(m, z_l)
    return abs((zin - z_s) / (zin + z_s)) ** 2


def system_efficiency(cfg: SystemConfig, omega: float, m12: float | None = None) -> float:
    """|s21|^2-style transducer gain of the full cascade at omega."""
    if m12 is None:
        m12 = _mutual(cfg, cfg.placement)
    if m12 == 0.0:
        return 0.0
    m = _cascade_abcd(cfg, m12, omega)
    return _transducer_gain(m, cfg.z_source, cfg.z_load)


def system_reflection_sq(cfg: SystemConfig, omega: float, m12: float | None = None) -> float:
    """|Gamma_in|^2 of the full cascade at its source port."""
    if m12 is None:
        m12 = _mutual(cfg, cfg.placement)
    if m12 == 0.0:
        res1, g1 = cfg.loop1
        chain = _feed_abcd(g1, omega)
        src = _fixed_lsection(cfg.source_network, "source")
        if src is not None:
            chain = matching.lsection_abcd(src, omega) @ chain
        z_lone = res1.r + 1j * res1.reactance(omega)
        zin = twoport.input_impedance_of(chain, z_lone)
        return abs((zin - cfg.z_source) / (zin + cfg.z_source)) ** 2
    m = _cascade_abcd(cfg, m12, omega)
    return _input_reflection_sq(m, cfg.z_source, cfg.z_load)


def loop_plane_load(cfg: SystemConfig, omega: float) -> complex:
    """Impedance seen from loop 2 into feedline + load network + z_load."""
    _, g2 = cfg.loop2
    chain = _feed_abcd(g2, omega)
    load = _fixed_lsection(cfg.load_network, "load")
    if load is not None:
        chain = chain @ twoport.flip(matching.lsection_abcd(load, omega))
    return twoport.input_impedance_of(chain, cfg.z_load)


def loop_plane_source(cfg: SystemConfig, omega: float) -> complex:
    """Impedance seen from loop 1 into feedline + source network + z_source."""
    _, g1 = cfg.loop1
    src = _fixed_lsection(cfg.source_network, "source")
    chain = _feed_abcd(g1, omega)
    if src is not None:
        chain = matching.lsection_abcd(src, omega) @ chain
    return twoport.input_impedance_of(twoport.flip(chain), cfg.z_source)


def _omega0(cfg: SystemConfig) -> float:
    return math.sqrt(cfg.loop1[0].omega0 * cfg.loop2[0].omega0)


def classify_system(cfg: SystemConfig, m12: float, omega0: float) -> lm.CouplingRegime:
    """Coupling regime from the loop-plane equivalent terminations at omega0.

    Uses the two-sided margin (w*m12)^2 - (r1 + rs_eq)(r2 + rl_eq), which
    reduces to the single-load form for symmetric systems and keeps a
    conjugately matched link weakly coupled even for unequal loop losses.
    """
    r1 = cfg.loop1[0].r
    r2 = cfg.loop2[0].r
    rs_eq = loop_plane_source(cfg, omega0).real
    rl_eq = loop_plane_load(cfg, omega0).real
    w_sq = (omega0 * m12) ** 2
    prod = (r1 + rs_eq) * (r2 + rl_eq)
    margin = w_sq - prod
    band = lm.CRITICAL_TOLERANCE * max(w_sq, prod)
    if margin > band:
        tag = lm.STRONG
    elif margin < -band:
        tag = lm.WEAK
    else:
        tag = lm.CRITICAL
    return lm.CouplingRegime(tag, margin)


def simultaneous_conjugate_match(
    m: twoport.TwoPortABCD, z_ref: float
) -> tuple[complex, complex]:
    """(Z_S, Z_L) solving Zin = Z_S*, Zout = Z_L* for a passive two-port."""
    s = twoport.abcd_to_s(m, z_ref)
    delta = s.s11 * s.s22 - s.s12 * s.s21
    if abs(s.s12 * s.s21) < 1e-30:
        # Uncoupled ports: match each side independently.
        gamma_s, gamma_l = s.s11.conjugate(), s.s22.conjugate()
    else:
        b1 = 1.0 + abs(s.s11) ** 2 - abs(s.s22) ** 2 - abs(delta) ** 2
        b2 = 1.0 + abs(s.s22) ** 2 - abs(s.s11) ** 2 - abs(delta) ** 2
        c1 = s.s11 - delta * s.s22.conjugate()
        c2 = s.s22 - delta * s.s11.conjugate()
        gamma_s = _match_root(b1, c1)
        gamma_l = _match_root(b2, c2)
    z_s = z_ref * (1.0 + gamma_s) / (1.0 - gamma_s)
    z_l = z_ref * (1.0 + gamma_l) / (1.0 - gamma_l)
    return z_s, z_l


def _match_root(b: float, c: complex) -> complex:
    if abs(c) < 1e-30:
        return 0j
    disc = b * b - 4.0 * abs(c) ** 2
    if disc < 0.0:
        raise NoSolutionError(
            "no simultaneous conjugate match (network not unconditionally stable)"
        )
    root = math.sqrt(disc)
    gamma = (b - root) / (2.0 * c) if b >= 0.0 else (b + root) / (2.0 * c)
    if abs(gamma) >= 1.0:
        raise NoSolutionError("conjugate-match reflection fell on/outside the unit circle")
    return gamma


def design_static_network(
    cfg: SystemConfig, d_design: float, omega: float
) -> tuple[matching.LSection, matching.LSection, tuple[complex, complex]]:
    """L-sections conjugate-matching the link at a coaxial design distance.

    Returns (source section, load section, (Z_S, Z_L)) where the impedances
    are the optimal port values the sections present to the feedline ports.
    """
    g1, g2 = cfg.loop1[1], cfg.loop2[1]
    m12 = geo.mutual_inductance_coaxial(g1.radius, g2.radius, d_design)
    inner = _inner_abcd(cfg, m12, omega)
    z_s_opt, z_l_opt = simultaneous_conjugate_match(inner, cfg.z_source)
    source = matching.synthesize_lsection(z_s_opt, cfg.z_source, omega)
    load = matching.synthesize_lsection(z_l_opt, cfg.z_load, omega)
    return source, load, (z_s_opt, z_l_opt)


def _bare_cascade(cfg: SystemConfig) -> bool:
    return (
        cfg.source_network is None
        and cfg.load_network is None
        and cfg.loop1[1].feed_length == 0.0
        and cfg.loop2[1].feed_length == 0.0
    )


def _effective_center(cfg: SystemConfig, w0: float) -> float:
    """Dressed resonance: where loop 2's total series reactance crosses zero.

    With feedlines and matching networks in place the un-split resonance
    shifts away from the bare w0; this zero crossing tracks that shift.
    """
    res2 = cfg.loop2[0]

    def x_total(w: float) -> float:
        return res2.reactance(w) + loop_plane_load(cfg, w).imag

    lo, hi = 0.8 * w0, 1.25 * w0
    if x_total(lo) >= 0.0 or x_total(hi) <= 0.0:
        return w0
    return bisect_root(x_total, lo, hi, rel_tol=1e-10)


def _grid_mode_peaks(eff, w_center: float, half_width: float, xtol: float):
    """Coarse-scan eff around w_center and golden-polish each local maximum.

    Returns [(w, eff(w), side)] with side < 0 for peaks below w_center.
    """
    n = 241
    lo = max(w_center - half_width, 1e-6 * w_center)
    hi = w_center + half_width
    step = (hi - lo) / (n - 1)
    ws = [lo + i * step for i in range(n)]
    ys = [eff(w) for w in ws]
    peaks = []
    for i in range(1, n - 1):
        if ys[i] >= ys[i - 1] and ys[i] >= ys[i + 1] and ys[i] > 0.0:
            w_ref, y_ref = golden_section_max(eff, ws[i - 1], ws[i + 1], xtol=xtol)
            side = -1 if w_ref < w_center - max(step, 0.002 * w_center) else (
                1 if w_ref > w_center + max(step, 0.002 * w_center) else 0
            )
            peaks.append((w_ref, y_ref, side))
    return peaks


def frequency_tune(
    cfg: SystemConfig, placement: geo.Placement | None = None
) -> TuneResult:
    """Operate fixed networks at the best split-mode frequency.

    Strongly coupled placements run at the odd (lower) mode, falling back to
    the even mode when no odd-side peak exists; critically and weakly coupled
    placements run at the (dressed) isolated-loop resonance.
    """
    if placement is None:
        placement = cfg.placement
    else:
        cfg = replace(cfg, placement=placement)
    m12 = _mutual(cfg, placement)
    w0 = _omega0(cfg)
    two_pi = 2.0 * math.pi
    if m12 == 0.0:
        regime = lm.CouplingRegime(
            lm.WEAK, -((cfg.loop2[0].r + loop_plane_load(cfg, w0).real) ** 2)
        )
        return TuneResult(
            w0 / two_pi, None, 0.0, system_reflection_sq(cfg, w0, m12),
            regime, MODE_OMEGA0,
        )
    regime = classify_system(cfg, m12, w0)
    res1, res2 = cfg.loop1[0], cfg.loop2[0]

    if _bare_cascade(cfg) and res1 == res2:
        # No dispersive elements: the closed-form operating points are exact.
        if regime.tag == lm.STRONG:
            rl_eq = loop_plane_load(cfg, w0).real
            seed = lm.mode_frequencies(lm.Link(res1, res2, m12), rl_eq)
            if seed is not None:
                w_op = seed.f_odd * two_pi
                return TuneResult(
                    seed.f_odd, None, system_efficiency(cfg, w_op, m12),
                    system_reflection_sq(cfg, w_op, m12), regime, MODE_ODD,
                )
        return TuneResult(
            w0 / two_pi, None, system_efficiency(cfg, w0, m12),
            system_reflection_sq(cfg, w0, m12), regime, MODE_OMEGA0,
        )

    w_c = _effective_center(cfg, w0)
    if regime.tag != lm.STRONG:
        return TuneResult(
            w_c / two_pi, None, system_efficiency(cfg, w_c, m12),
            system_reflection_sq(cfg, w_c, m12), regime, MODE_OMEGA0,
        )

    def eff(w: float) -> float:
        return system_efficiency(cfg, w, m12)

    # Dressed split estimate sizes the search window; the grid + polish
    # absorbs however far the cascade actually shifts the modes.
    l2 = res2.l
    w_m = w_c * m12
    r_eff = res2.r + loop_plane_load(cfg, w_c).real
    split = math.sqrt(w_m * w_m - r_eff * r_eff) / l2 if w_m > r_eff else 0.0
    half_width = min(max(3.0 * 0.5 * split, 0.06 * w_c), 0.45 * w_c)
    xtol = two_pi * TUNE_FREQ_TOL_HZ
    peaks = _grid_mode_peaks(eff, w_c, half_width, xtol)
    odd = [p for p in peaks if p[2] < 0]
    even = [p for p in peaks if p[2] > 0]
    if odd:
        w_best, eta_best, _ = max(odd, key=lambda p: p[1])
        label = MODE_ODD
    elif even:
        w_best, eta_best, _ = max(even, key=lambda p: p[1])
        label = MODE_EVEN
    else:
        # Modes merged into a single central peak: plain omega0 operation.
        w_best, eta_best, label = w_c, eff(w_c), MODE_OMEGA0
    return TuneResult(
        w_best / two_pi,
        None,
        eta_best,
        system_reflection_sq(cfg, w_best, m12),
        regime,
        label,
    )


def _clamp(value: float, lo: float, hi: float) -> float:
    return min(max(value, lo), hi)


def impedance_tune(
    cfg: SystemConfig, omega: float, placement: geo.Placement | None = None
) -> TuneResult:
    """Re-solve the conjugate match for a placement and bias the stacks to it.

    When the required capacitances leave the stacks' bands the result falls
    back to frequency tuning with every stack railed toward the unreachable
    target (its strongest-coupling setting), annotated via fallback=True.
    """
    if placement is None:
        placement = cfg.placement
    else:
        cfg = replace(cfg, placement=placement)
    src_net = cfg.source_network
    load_net = cfg.load_network
    if not isinstance(src_net, matching.VaractorNetwork) or not isinstance(
        load_net, matching.VaractorNetwork
    ):
        raise ValueError("impedance tuning needs varactor-backed networks on both sides")
    m12 = _mutual(cfg, placement)
    bare = replace(cfg, source_network=None, load_network=None)

    try:
        if m12 == 0.0:
            raise UnmatchableError("no coupling: conjugate match unattainable", None)
        inner = _inner_abcd(cfg, m12, omega)
        z_s_opt, z_l_opt = simultaneous_conjugate_match(inner, cfg.z_source)
        want_src = matching.synthesize_lsection(z_s_opt, cfg.z_source, omega)
        want_load = matching.synthesize_lsection(z_l_opt, cfg.z_load, omega)
        v_src = src_net.biases_for(want_src)
        v_load = load_net.biases_for(want_load)
    except (UnmatchableError, UntunableError, NoSolutionError):
        return _impedance_fallback(cfg, omega, m12)

    # Re-realize from the solved biases so the result reflects the hardware.
    src_ls = src_net.lsection(*v_src)
    load_ls = load_net.lsection(*v_load)
    tuned = replace(cfg, source_network=src_ls, load_network=load_ls)
    eta = system_efficiency(tuned, omega, m12)
    gamma = system_reflection_sq(tuned, omega, m12)
    # Classified at the operating frequency: a conjugately matched link is
    # weakly coupled there by construction.
    regime = classify_system(tuned, m12, omega)
    return TuneResult(
        omega / (2.0 * math.pi),
        {
            "source_series": v_src[0],
            "source_shunt": v_src[1],
            "load_series": v_load[0],
            "load_shunt": v_load[1],
        },
        eta,
        gamma,
        regime,
        MODE_OMEGA0,
    )


def _impedance_fallback(cfg: SystemConfig, omega: float, m12: float) -> TuneResult:
    # Best-effort operation when the exact match is out of band: rail the
    # series capacitor against its band edge, re-solve the shunt capacitor
    # for the residual susceptance, then frequency-tune the railed hardware.
    src_net: matching.VaractorNetwork = cfg.source_network
    load_net: matching.VaractorNetwork = cfg.load_network
    targets = _match_targets(cfg, omega, m12)
    biases: dict[str, float] = {}
    sections = {}
    for side, net, target, z_ref in (
        ("source", src_net, targets[0], cfg.z_source),
        ("load", load_net, targets[1], cfg.z_load),
    ):
        c_series, c_shunt = _railed_capacitances(net, target, z_ref, omega)
        v_series = matching.bias_for_capacitance(net.series_stack, c_series)
        v_shunt = matching.bias_for_capacitance(net.shunt_stack, c_shunt)
        biases[f"{side}_series"] = v_series
        biases[f"{side}_shunt"] = v_shunt
        sections[side] = net.lsection(v_series, v_shunt)
    railed = replace(
        cfg, source_network=sections["source"], load_network=sections["load"]
    )
    base = frequency_tune(railed)
    return TuneResult(
        base.frequency_hz,
        biases,
        base.efficiency,
        base.reflection_sq,
        base.regime,
        base.mode_label,
        fallback=True,
    )


def _railed_capacitances(
    net: matching.VaractorNetwork, target: complex | None, z_ref: float, omega: float
) -> tuple[float, float]:
    band_series = matching.stack_band(net.series_stack)
    band_shunt = matching.stack_band(net.shunt_stack)
    if target is None:
        return band_series[1], band_shunt[1]
    y_t = 1.0 / target
    g_t = y_t.real
    if 0.0 < g_t < 1.0 / z_ref:
        x_s = math.sqrt(z_ref / g_t - z_ref * z_ref)
        c_series = _clamp(1.0 / (omega * x_s), *band_series)
    else:
        # Conductance target at/above the branch maximum: rail high.
        c_series = band_series[1]
    x_real = 1.0 / (omega * c_series)
    b_branch = x_real / (z_ref * z_ref + x_real * x_real)
    c_shunt = _clamp((y_t.imag - b_branch) / omega, *band_shunt)
    return c_series, c_shunt


def _match_targets(
    cfg: SystemConfig, omega: float, m12: float
) -> tuple[complex | None, complex | None]:
    if m12 == 0.0:
        return None, None
    try:
        inner = _inner_abcd(cfg, m12, omega)
        return simultaneous_conjugate_match(inner, cfg.z_source)
    except (NoSolutionError, ConversionError):
        return None, None


