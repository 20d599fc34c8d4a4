"""Pulse-level model of the 13C-1H two-spin system (chloroform).

Dynamics run in the doubly rotating frame, so free evolution is driven by
the J coupling alone. Pulses are ideal and instantaneous. Gradient pulses
dephase every density-matrix element of nonzero coherence order.

Sequences are always stored in chronological order (first event acts
first). The operator strings ``I0..I3``, ``U1..U3`` are printed in the
literature right-to-left; they are reversed once in :func:`builtin_sequence`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import qlinalg as ql
from .search_core import STATE_LABELS

HALF_PI = math.pi / 2
_ANGLE_TOL = 1e-12


@dataclass(frozen=True)
class SpinSystem:
    """Frequencies in MHz, coupling in Hz; ``gamma_ratio`` is gamma_1/gamma_2."""

    nu1: float = 125.76
    nu2: float = 500.13
    j: float = 215.0
    gamma_ratio: float = 125.76 / 500.13

    def __post_init__(self):
        if not self.j > 0:
            raise ValueError("J must be positive")
        if not (self.nu1 > 0 and self.nu2 > 0):
            raise ValueError("Larmor frequencies must be positive")
        # gamma_ratio = 1 is allowed as the homonuclear limit used in checks
        if not 0 < self.gamma_ratio <= 1:
            raise ValueError("gamma_ratio must lie in (0, 1]")

    @property
    def alpha(self) -> float:
        """First preparation flip angle, arccos(gamma_1 / 2 gamma_2)."""
        return math.acos(self.gamma_ratio / 2)


@dataclass(frozen=True)
class PulseEvent:
    kind: str
    spin: str | None = None
    axis: str | None = None
    angle: float = 0.0
    duration: float = 0.0

    def __post_init__(self):
        if self.kind == "rf":
            if self.spin not in ("1", "2", "both"):
                raise ValueError(f"rf target must be 1, 2 or both, got {self.spin!r}")
            if self.axis not in ("x", "y"):
                raise ValueError(f"rf axis must be x or y, got {self.axis!r}")
            if not math.isfinite(self.angle):
                raise ValueError("rf angle must be finite")
        elif self.kind == "delay":
            if not (math.isfinite(self.duration) and self.duration >= 0):
                raise ValueError("delay duration must be a finite nonnegative number")
        elif self.kind != "gradient":
            raise ValueError(f"unknown event kind {self.kind!r}")

    def to_line(self) -> str:
        if self.kind == "rf":
            return f"rf {self.spin} {self.axis} {self.angle!r}"
        if self.kind == "delay":
            return f"delay {self.duration!r}"
        return "grad"

    def __str__(self) -> str:
        return self.to_line()


def rf(spin, axis: str, angle: float) -> PulseEvent:
    return PulseEvent("rf", spin=str(spin), axis=axis, angle=float(angle))


def delay(duration: float) -> PulseEvent:
    """Free evolution for ``duration`` in units of 1/J."""
    return PulseEvent("delay", duration=float(duration))


def grad() -> PulseEvent:
    return PulseEvent("gradient")


@dataclass(frozen=True)
class PulseSequence:
    events: tuple[PulseEvent, ...] = ()
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def __add__(self, other: "PulseSequence") -> "PulseSequence":
        label = "+".join(x for x in (self.label, other.label) if x)
        return PulseSequence(self.events + other.events, label)

    @property
    def has_gradient(self) -> bool:
        return any(e.kind == "gradient" for e in self.events)

    def to_text(self) -> str:
        lines = [f"# {self.label}"] if self.label else []
        lines += [e.to_line() for e in self.events]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, label: str = "") -> "PulseSequence":
        """Parse the one-event-per-line format.

        Blank lines are skipped. A leading ``# ...`` line sets the label when
        none is given; other ``#`` lines and trailing ``#`` text are comments.
        """
        events = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if not events and not label:
                    label = line[1:].strip()
                continue
            parts = line.split("#", 1)[0].split()
            try:
                if parts[0] == "rf" and len(parts) == 4:
                    events.append(rf(parts[1], parts[2], float(parts[3])))
                elif parts[0] == "delay" and len(parts) == 2:
                    events.append(delay(float(parts[1])))
                elif parts[0] == "grad" and len(parts) == 1:
                    events.append(grad())
                else:
                    raise ValueError("unrecognised event")
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {raw!r}: {exc}") from None
        return cls(tuple(events), label)


@dataclass(frozen=True)
class DeviationDensityMatrix:
    """Traceless Hermitian 4x4 deviation density matrix."""

    m: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = ql.as_matrix(self.m)
        if m.shape != (4, 4):
            raise ValueError(f"deviation matrix must be 4x4, got {m.shape}")
        if not ql.is_hermitian(m):
            raise ValueError("deviation matrix is not Hermitian")
        if abs(np.trace(m)) > 1e-12:
            raise ValueError("deviation matrix is not traceless")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "m", m)

    @property
    def populations(self) -> np.ndarray:
        return np.diag(self.m).real.copy()

    def __add__(self, other):
        return DeviationDensityMatrix(self.m + other.m)

    def __rmul__(self, c: float):
        return DeviationDensityMatrix(float(c) * self.m)

    def __mul__(self, c: float):
        return DeviationDensityMatrix(float(c) * self.m)


def spin_operator(k: int, axis: str) -> np.ndarray:
    single = ql.SIGMA[axis] / 2
    if k == 1:
        return ql.kron(single, ql.ID2)
    if k == 2:
        return ql.kron(ql.ID2, single)
    raise ValueError(f"spin index must be 1 or 2, got {k!r}")


ZZ = spin_operator(1, "z") @ spin_operator(2, "z")

# total F_z of each basis state, used for coherence orders
_FZ = np.diag(spin_operator(1, "z") + spin_operator(2, "z")).real


def rf_propagator(e: PulseEvent) -> np.ndarray:
    if e.kind != "rf":
        raise ValueError(f"not an rf event: {e}")
    r = ql.exp_su2(e.axis, e.angle)
    if e.spin == "1":
        return ql.kron(r, ql.ID2)
    if e.spin == "2":
        return ql.kron(ql.ID2, r)
    return ql.kron(r, r)


def delay_propagator(t: float, s: SpinSystem | None = None) -> np.ndarray:
    """exp(-i 2 pi J t Iz1 Iz2) for ``t`` given in units of 1/J.

    With t expressed in units of 1/J the coupling constant cancels, so ``s``
    only matters to callers working in seconds.
    """
    if t < 0:
        raise ValueError("delay must be nonnegative")
    return ql.exp_diag_generator(ZZ, 2 * math.pi * t)


def event_propagator(e: PulseEvent, s: SpinSystem | None = None) -> np.ndarray:
    if e.kind == "rf":
        return rf_propagator(e)
    if e.kind == "delay":
        return delay_propagator(e.duration, s)
    raise ValueError("sequence is a channel, not a unitary; use apply_sequence")


def compile_sequence(seq: PulseSequence, s: SpinSystem | None = None) -> np.ndarray:
    if seq.has_gradient:
        raise ValueError("sequence is a channel, not a unitary; use apply_sequence")
    p = np.eye(4, dtype=complex)
    for e in seq.events:
        p = event_propagator(e, s) @ p
    return p


def gradient_crush(rho: DeviationDensityMatrix) -> DeviationDensityMatrix:
    keep = np.isclose(_FZ[:, None], _FZ[None, :])
    return DeviationDensityMatrix(np.where(keep, rho.m, 0.0))


def conjugate(rho: DeviationDensityMatrix, p: np.ndarray) -> DeviationDensityMatrix:
    m = p @ rho.m @ ql.dagger(p)
    # restore exact Hermiticity lost to rounding
    return DeviationDensityMatrix((m + ql.dagger(m)) / 2)


def apply_sequence(rho: DeviationDensityMatrix, seq: PulseSequence,
                   s: SpinSystem | None = None) -> DeviationDensityMatrix:
    for e in seq.events:
        if e.kind == "gradient":
            rho = gradient_crush(rho)
        else:
            rho = conjugate(rho, event_propagator(e, s))
    return rho


def equilibrium_state(s: SpinSystem) -> DeviationDensityMatrix:
    return DeviationDensityMatrix(
        s.gamma_ratio * spin_operator(1, "z") + spin_operator(2, "z")
    )


def pseudo_pure_reference(target: int) -> np.ndarray:
    """Pseudo-pure reference for a target: -(+-Iz1/2 +-Iz2/2 +-Iz1Iz2)."""
    s1 = 1 if target in (0, 1) else -1
    s2 = 1 if target in (0, 2) else -1
    iz1 = spin_operator(1, "z")
    iz2 = spin_operator(2, "z")
    return -(s1 * iz1 / 2 + s2 * iz2 / 2 + s1 * s2 * ZZ)


_FLIPS = {
    0: (),
    1: (rf(2, "x", math.pi),),
    2: (rf(1, "x", math.pi),),
    3: (rf(1, "x", math.pi), rf(2, "x", math.pi)),
}


def preparation_sequence(s: SpinSystem) -> PulseSequence:
    return PulseSequence(
        (
            rf(2, "x", s.alpha),
            grad(),
            rf(1, "x", math.pi / 4),
            delay(0.25),
            rf(1, "x", math.pi),
            rf(2, "x", math.pi),
            delay(0.25),
            rf(1, "y", -math.pi / 4),
            grad(),
        ),
        "PREP",
    )


def prepare_pseudo_pure(target: int | str, s: SpinSystem | None = None
                        ) -> tuple[DeviationDensityMatrix, PulseSequence]:
    s = s or SpinSystem()
    if isinstance(target, str):
        target = STATE_LABELS.index(target)
    if target not in _FLIPS:
        raise ValueError(f"target must be 0..3, got {target!r}")
    seq = preparation_sequence(s)
    if target:
        seq = PulseSequence(seq.events + _FLIPS[target],
                            f"PREP-{STATE_LABELS[target]}")
    return apply_sequence(equilibrium_state(s), seq, s), seq


def proportionality(rho: DeviationDensityMatrix, reference: np.ndarray,
                    tol: float = 1e-10) -> float | None:
    """Real scalar c with rho = c * reference, or None if there is none."""
    ref = ql.as_matrix(reference)
    c = float(np.vdot(ref, rho.m).real / np.vdot(ref, ref).real)
    if ql.max_norm(rho.m - c * ref) > tol:
        return None
    return c


def _reflection_string(a1: float, a2: float, name: str) -> PulseSequence:
    # printed: Y1(pi/2)Y2(pi/2) X1(a1)X2(a2) Y1(-pi/2)Y2(-pi/2) [1/2J]
    return PulseSequence(
        (
            delay(0.5),
            rf("both", "y", -HALF_PI),
            *_pair("x", a1, a2),
            rf("both", "y", HALF_PI),
        ),
        name,
    )


def _pair(axis: str, a1: float, a2: float) -> tuple[PulseEvent, ...]:
    if a1 == a2:
        return (rf("both", axis, a1),)
    return (rf(1, axis, a1), rf(2, axis, a2))


def _builtin_sequences() -> dict[str, PulseSequence]:
    return {
        "I0": _reflection_string(-HALF_PI, -HALF_PI, "I0"),
        "I1": _reflection_string(HALF_PI, -HALF_PI, "I1"),
        "I2": _reflection_string(-HALF_PI, HALF_PI, "I2"),
        "I3": _reflection_string(HALF_PI, HALF_PI, "I3"),
        # printed: X1(pi)X2(pi) Y1(-pi/2)Y2(-pi/2)
        "U1": PulseSequence((rf("both", "y", -HALF_PI), rf("both", "x", math.pi)), "U1"),
        "U2": PulseSequence((rf("both", "y", HALF_PI),), "U2"),
        "U3": PulseSequence((rf("both", "x", HALF_PI),), "U3"),
    }


BUILTIN_NAMES = ("I0", "I1", "I2", "I3", "U1", "U2", "U3", "PREP")


def builtin_sequence(name: str, s: SpinSystem | None = None) -> PulseSequence:
    if name == "PREP":
        return preparation_sequence(s or SpinSystem())
    try:
        return _builtin_sequences()[name]
    except KeyError:
        raise ValueError(f"unknown sequence {name!r}; expected one of {BUILTIN_NAMES}") from None


def sign_swap(seq: PulseSequence) -> PulseSequence:
    """Negate every rf angle of magnitude pi/2; leave other events alone."""
    out = []
    for e in seq.events:
        if e.kind == "rf" and abs(abs(e.angle) - HALF_PI) <= _ANGLE_TOL:
            e = replace(e, angle=-e.angle)
        out.append(e)
    return PulseSequence(tuple(out), seq.label)


def inverse_sequence(seq: PulseSequence) -> PulseSequence:
    """Pulse sequence realizing the inverse propagator (rf-only sequences)."""
    if any(e.kind != "rf" for e in seq.events):
        raise ValueError("only rf-only sequences can be inverted by pulse reversal")
    events = tuple(replace(e, angle=-e.angle) for e in reversed(seq.events))
    return PulseSequence(events, f"{seq.label}^-1" if seq.label else "")


def search_sequence(u_name: str, tau: int, gamma: int = 0, swapped: bool = False,
                    overrides: dict[str, PulseSequence] | None = None) -> PulseSequence:
    """Chronological pulse program for U Q = -U I_gamma U^-1 I_tau U.

    The overall minus sign is a global phase and is dropped.
    """
    overrides = overrides or {}

    def get(name):
        seq = overrides[name] if name in overrides else builtin_sequence(name)
        return sign_swap(seq) if swapped else seq

    u = get(u_name)
    seq = u + get(f"I{tau}") + inverse_sequence(u) + get(f"I{gamma}") + u
    label = f"{u_name}Q tau={STATE_LABELS[tau]} gamma={STATE_LABELS[gamma]}"
    return PulseSequence(seq.events, label + (" swapped" if swapped else ""))


def run_pulse_search(u_name: str, tau: int, gamma: int = 0, swapped: bool = False,
                     s: SpinSystem | None = None,
                     overrides: dict[str, PulseSequence] | None = None
                     ) -> DeviationDensityMatrix:
    """Prepare pseudo-pure |gamma>, run the search pulses, return the final state."""
    s = s or SpinSystem()
    rho, _ = prepare_pseudo_pure(gamma, s)
    return apply_sequence(rho, search_sequence(u_name, tau, gamma, swapped, overrides), s)
