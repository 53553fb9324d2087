"""ghzforge: linear-optical simulation of post-selected GHZ state preparation.

The package is organized as a small stack: sparse Fock states
(:mod:`ghzforge.states`), optical elements (:mod:`ghzforge.elements`),
measurements and post-selection (:mod:`ghzforge.measurement`), the protocol
compiler with its two executors (:mod:`ghzforge.protocol`), closed-form
analysis plus the brute-force cross-check (:mod:`ghzforge.analysis`), and a
pinned regression checklist (:mod:`ghzforge.golden`).
"""

from . import errors
from .analysis import (
    aux_count,
    aux_pairs,
    classify_terms,
    eta1,
    eta2,
    fidelity,
    ghz_reference,
    oracle_run,
    predicted_prob,
    resource_summary,
)
from .elements import (
    BDMerge,
    BDSplit,
    Circuit,
    HWP,
    Inject,
    PBS,
    Phase,
    apply_bd_merge,
    apply_bd_split,
    apply_hwp,
    apply_pbs,
    apply_phase,
    run_circuit,
)
from .measurement import (
    CoincidencePattern,
    CoincidenceSelect,
    OutcomeDistribution,
    PasPairSelect,
    feedforward,
    fourier_measure_path,
    postselect_coincidence,
    project_polarization_pair,
)
from .protocol import (
    FULL_FOURIER,
    SINGLE_OUTCOME,
    ProtocolOptions,
    ProtocolPlan,
    RunReport,
    build_aux_source,
    build_epr_source,
    compile_plan,
    execute,
    polarization_tag,
    reduce_to_odd,
    run,
)
from .states import (
    H,
    V,
    FockTerm,
    Mode,
    PhotonicState,
    eps,
    fock_term,
    inner_product,
    ket,
    make_state,
    normalize,
    tensor,
    vacuum,
)

__version__ = "0.1.0"

__all__ = [
    "H", "V", "Mode", "FockTerm", "PhotonicState",
    "eps", "fock_term", "ket", "make_state", "normalize", "tensor",
    "inner_product", "vacuum",
    "PBS", "HWP", "Phase", "BDMerge", "BDSplit", "Inject", "Circuit",
    "apply_pbs", "apply_hwp", "apply_phase", "apply_bd_merge", "apply_bd_split",
    "run_circuit",
    "CoincidencePattern", "CoincidenceSelect", "PasPairSelect",
    "OutcomeDistribution", "postselect_coincidence", "project_polarization_pair",
    "fourier_measure_path", "feedforward",
    "ProtocolOptions", "ProtocolPlan", "RunReport", "compile_plan", "execute",
    "run", "reduce_to_odd", "build_epr_source", "build_aux_source",
    "polarization_tag", "SINGLE_OUTCOME", "FULL_FOURIER",
    "ghz_reference", "fidelity", "aux_count", "aux_pairs", "eta1", "eta2",
    "predicted_prob", "classify_terms", "resource_summary", "oracle_run",
    "errors",
]
