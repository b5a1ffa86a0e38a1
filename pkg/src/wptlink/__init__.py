"""Coupled-resonator wireless power link simulation and matching design."""

from .geometry import (
    LoopGeometry,
    Placement,
    distance_for_mutual,
    elliptic_e,
    elliptic_k,
    mutual_inductance,
    mutual_inductance_coaxial,
)
from .link_model import (
    CouplingRegime,
    Link,
    ModePair,
    Resonator,
    Termination,
    classify_coupling,
    current_ratio,
    efficiency_at_resonance,
    input_impedance,
    max_efficiency,
    mode_frequencies,
    mode_split_approx,
    optimal_terminations,
    output_impedance,
    power_gain,
    reflection_mag_sq,
    reflection_mag_sq_closed_form,
    strong_coupling_constants,
    total_efficiency,
    total_efficiency_closed_form,
)
from .matching import (
    LSection,
    VaractorDiode,
    VaractorNetwork,
    VaractorStack,
    bias_for_capacitance,
    lsection_abcd,
    power_limit_check,
    stack_capacitance,
    synthesize_lsection,
    varactor_capacitance,
)
from .tuner import (
    SystemConfig,
    TuneResult,
    design_static_network,
    frequency_tune,
    impedance_tune,
    system_efficiency,
)
from .twoport import (
    ImpedanceMatrix,
    ScatterMatrix,
    TwoPortABCD,
    abcd_to_s,
    abcd_to_z,
    cascade,
    coupled_loop_branches,
    input_impedance_of,
    tline_abcd,
    tnetwork_abcd,
)

__version__ = "0.1.0"
