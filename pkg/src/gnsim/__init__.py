"""Generalized Grover search, from abstract gates down to a simulated
two-spin NMR experiment with synthetic spectra."""

from .nmr_model import (
    DeviationDensityMatrix,
    PulseEvent,
    PulseSequence,
    SpinSystem,
    apply_sequence,
    builtin_sequence,
    compile_sequence,
    prepare_pseudo_pure,
    run_pulse_search,
    sign_swap,
)
from .search_core import (
    STATE_LABELS,
    SearchProblem,
    SearchReport,
    builtin_u,
    grover_q,
    iteration_count,
    reflection,
    run_search,
)
from .spectro import AcquisitionConfig, Spectrum, PeakList, classify_experiment, detect_peaks, readout

__version__ = "0.1.0"

__all__ = [
    "AcquisitionConfig", "DeviationDensityMatrix", "PeakList", "PulseEvent", "PulseSequence",
    "STATE_LABELS", "SearchProblem", "SearchReport", "SpinSystem", "Spectrum", "apply_sequence",
    "builtin_sequence", "builtin_u", "classify_experiment", "compile_sequence", "detect_peaks",
    "grover_q", "iteration_count", "prepare_pseudo_pure", "readout", "reflection",
    "run_pulse_search", "run_search", "sign_swap",
]
