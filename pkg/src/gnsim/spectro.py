"""Synthetic NMR readout: selective readout pulse, FID, spectrum, peaks.

Conventions are calibrated, not assumed. A single reference experiment
(pseudo-pure |uu>) fixes, per observed spin,

* the global phase that makes its one peak positive and real,
* the detection threshold (20% of the reference spectrum's max modulus),
* which side of the doublet (+J/2 or -J/2) means "partner spin up".

Every later spectrum is phased and classified with those constants, the
way relative signal phases are compared across identically acquired
experiments on a spectrometer.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.signal import find_peaks

from .nmr_model import (
    ZZ,
    DeviationDensityMatrix,
    SpinSystem,
    conjugate,
    prepare_pseudo_pure,
    rf,
    rf_propagator,
    spin_operator,
)
from .search_core import STATE_LABELS

AMBIGUOUS = "ambiguous"
THRESHOLD_FRACTION = 0.2


@dataclass(frozen=True)
class AcquisitionConfig:
    n_points: int = 4096
    dwell: float = 1 / 2000
    t2: float = 0.3
    observe_spin: int = 1
    noise: float = 0.0

    def __post_init__(self):
        if self.n_points <= 0 or self.dwell <= 0 or self.t2 <= 0:
            raise ValueError("n_points, dwell and t2 must be positive")
        if self.observe_spin not in (1, 2):
            raise ValueError("observe_spin must be 1 or 2")
        if self.noise < 0:
            raise ValueError("noise amplitude must be nonnegative")

    def check_against(self, s: SpinSystem) -> None:
        if not 1 / self.dwell > 2 * s.j:
            raise ValueError(
                f"spectral width {1 / self.dwell:g} Hz does not exceed 2J = {2 * s.j:g} Hz"
            )
        if self.n_points * self.dwell < 5 / s.j:
            raise ValueError("acquisition time shorter than 5/J; doublet not resolvable")

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_points) * self.dwell

    def for_spin(self, k: int) -> "AcquisitionConfig":
        return replace(self, observe_spin=k)


@dataclass(frozen=True)
class Spectrum:
    freqs: np.ndarray
    amps: np.ndarray
    observe_spin: int
    config: AcquisitionConfig | None = field(default=None, repr=False)
    system: SpinSystem | None = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.freqs) != len(self.amps):
            raise ValueError("freqs and amps differ in length")

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("freq_hz,real,imag\n")
        for f, a in zip(self.freqs, self.amps):
            buf.write(f"{float(f)!r},{float(a.real)!r},{float(a.imag)!r}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, observe_spin: int) -> "Spectrum":
        rows = np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1, ndmin=2)
        return cls(rows[:, 0].copy(), rows[:, 1] + 1j * rows[:, 2], observe_spin)


@dataclass(frozen=True)
class Peak:
    freq_hz: float
    amplitude: float


@dataclass(frozen=True)
class PeakList:
    peaks: tuple[Peak, ...]
    classification: str

    def to_dict(self) -> dict:
        return {
            "peaks": [{"freq_hz": p.freq_hz, "amplitude": p.amplitude} for p in self.peaks],
            "classification": self.classification,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


@dataclass(frozen=True)
class Calibration:
    """Per-spin constants fixed by the pseudo-pure |uu> reference.

    Each mapping is keyed by observed spin (1 or 2).
    """

    phase: dict
    threshold: dict
    partner_up_side: dict


def readout_pulse(k: int) -> np.ndarray:
    """Propagator of the selective readout pulse [-pi/2]_y on spin k."""
    return rf_propagator(rf(k, "y", -math.pi / 2))


def fid(rho: DeviationDensityMatrix, cfg: AcquisitionConfig, s: SpinSystem,
        seed: int | None = None) -> np.ndarray:
    """Free-induction decay after the readout pulse on ``cfg.observe_spin``.

    f(t) = tr(rho(t) (Ix^k + i Iy^k)) exp(-t/T2), where rho(t) evolves under
    the rotating-frame coupling 2 pi J Iz1 Iz2. That Hamiltonian is diagonal,
    so element (m, n) simply picks up exp(-i (E_m - E_n) t).
    """
    cfg.check_against(s)
    k = cfg.observe_spin
    r = conjugate(rho, readout_pulse(k)).m
    obs = spin_operator(k, "x") + 1j * spin_operator(k, "y")
    energies = 2 * math.pi * s.j * np.diag(ZZ).real
    weights = r * obs.T  # rho_mn * O_nm
    m_idx, n_idx = np.nonzero(np.abs(weights) > 0)
    t = cfg.times
    sig = np.zeros(cfg.n_points, dtype=complex)
    for m, n in zip(m_idx, n_idx):
        sig += weights[m, n] * np.exp(-1j * (energies[m] - energies[n]) * t)
    sig *= np.exp(-t / cfg.t2)
    if cfg.noise > 0:
        rng = np.random.default_rng(seed)
        sig += cfg.noise * (rng.standard_normal(cfg.n_points)
                            + 1j * rng.standard_normal(cfg.n_points))
    return sig


def transform(signal: np.ndarray, dwell: float) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized forward DFT, zero frequency centred."""
    freqs = np.fft.fftshift(np.fft.fftfreq(len(signal), d=dwell))
    amps = np.fft.fftshift(np.fft.fft(signal))
    return freqs, amps


def readout(rho: DeviationDensityMatrix, cfg: AcquisitionConfig | None = None,
            s: SpinSystem | None = None, seed: int | None = None) -> Spectrum:
    cfg = cfg or AcquisitionConfig()
    s = s or SpinSystem()
    freqs, amps = transform(fid(rho, cfg, s, seed), cfg.dwell)
    return Spectrum(freqs, amps, cfg.observe_spin, cfg, s)


@lru_cache(maxsize=32)
def calibrate(s: SpinSystem | None = None, cfg: AcquisitionConfig | None = None
              ) -> Calibration:
    s = s or SpinSystem()
    base = replace(cfg or AcquisitionConfig(), noise=0.0)
    ref, _ = prepare_pseudo_pure(0, s)
    phase, threshold, side = {}, {}, {}
    for k in (1, 2):
        sp = readout(ref, base.for_spin(k), s)
        i = int(np.argmax(np.abs(sp.amps)))
        phase[k] = float(np.angle(sp.amps[i]))
        threshold[k] = THRESHOLD_FRACTION * float(np.abs(sp.amps[i]))
        side[k] = 1 if sp.freqs[i] > 0 else -1
    return Calibration(phase, threshold, side)


def _label(spin1_up: bool, spin2_up: bool) -> str:
    return STATE_LABELS[(0 if spin1_up else 2) + (0 if spin2_up else 1)]


def phased(sp: Spectrum, cal: Calibration) -> np.ndarray:
    return (sp.amps * np.exp(-1j * cal.phase[sp.observe_spin])).real


def _refine(sp: Spectrum, i: int) -> float:
    """Parabolic interpolation of the magnitude around bin ``i``."""
    if i == 0 or i == len(sp.amps) - 1:
        return float(sp.freqs[i])
    a, b, c = np.abs(sp.amps[i - 1:i + 2])
    denom = a - 2 * b + c
    if denom == 0:
        return float(sp.freqs[i])
    offset = 0.5 * (a - c) / denom
    return float(sp.freqs[i] + offset * (sp.freqs[i + 1] - sp.freqs[i]))


def detect_peaks(sp: Spectrum, cal: Calibration | None = None) -> PeakList:
    """Pick signed peaks from the phased real spectrum and classify.

    The sign of a peak gives the observed spin's state and its side of the
    doublet gives the partner's state. Anything other than exactly one peak
    is ambiguous.
    """
    if cal is None:
        cal = calibrate(sp.system, sp.config and replace(sp.config, observe_spin=1))
    k = sp.observe_spin
    re = phased(sp, cal)
    thr = cal.threshold[k]
    pos, _ = find_peaks(re, height=thr)
    neg, _ = find_peaks(-re, height=thr)
    idx = sorted(np.concatenate([pos, neg]).tolist())
    peaks = tuple(Peak(_refine(sp, i), float(re[i])) for i in idx)
    if len(peaks) != 1:
        return PeakList(peaks, AMBIGUOUS)
    p = peaks[0]
    own_up = p.amplitude > 0
    partner_up = (1 if p.freq_hz > 0 else -1) == cal.partner_up_side[k]
    label = _label(own_up, partner_up) if k == 1 else _label(partner_up, own_up)
    return PeakList(peaks, label)


def fuse(spin1: PeakList, spin2: PeakList) -> str:
    """Combine both spins' verdicts; they must agree on one state."""
    a, b = spin1.classification, spin2.classification
    return a if a == b and a != AMBIGUOUS else AMBIGUOUS


@dataclass(frozen=True)
class ExperimentReadout:
    classification: str
    spectra: tuple[Spectrum, Spectrum]
    peak_lists: tuple[PeakList, PeakList]


def read_experiment(rho: DeviationDensityMatrix,
                    cfgs: tuple[AcquisitionConfig, AcquisitionConfig] | None = None,
                    s: SpinSystem | None = None, seed: int | None = None
                    ) -> ExperimentReadout:
    s = s or SpinSystem()
    if cfgs is None:
        cfgs = (AcquisitionConfig(observe_spin=1), AcquisitionConfig(observe_spin=2))
    cal = calibrate(s, replace(cfgs[0], observe_spin=1))
    spectra, lists = [], []
    for i, cfg in enumerate(cfgs):
        sub_seed = None if seed is None else seed + i
        sp = readout(rho, cfg, s, sub_seed)
        spectra.append(sp)
        lists.append(detect_peaks(sp, cal))
    return ExperimentReadout(fuse(*lists), tuple(spectra), tuple(lists))


def classify_experiment(rho: DeviationDensityMatrix,
                        cfgs: tuple[AcquisitionConfig, AcquisitionConfig] | None = None,
                        s: SpinSystem | None = None, seed: int | None = None) -> str:
    """Read out both spins and fuse them into one basis-state label."""
    return read_experiment(rho, cfgs, s, seed).classification
