"""Command-line driver: ``gnsim {prepare,search,verify,sweep}``.

Exit codes: 0 success, 1 verification or search failure, 2 usage error.
Outputs go to ``<out>/<experiment-id>/`` where ``<out>`` defaults to
``$GNSIM_OUT`` or ``./out``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import nmr_model as nm
from . import qlinalg as ql
from . import search_core as sc
from . import spectro

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULT_AMPS = (0.5, 0.2, 0.1, 0.05, 0.02)


class UsageError(Exception):
    pass


# -- configuration ---------------------------------------------------------

_SPIN_FLAGS = ("nu1", "nu2", "j", "gamma_ratio")
_ACQ_FLAGS = ("n_points", "dwell", "t2", "noise")


def load_config(args) -> tuple[nm.SpinSystem, spectro.AcquisitionConfig]:
    """Built-in defaults, then the JSON config file, then command-line flags."""
    spin_kw: dict = {}
    acq_kw: dict = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        unknown = set(data) - {"spin_system", "acquisition"}
        if unknown:
            raise UsageError(f"unknown config sections: {sorted(unknown)}")
        spin_kw.update(data.get("spin_system", {}))
        acq_kw.update(data.get("acquisition", {}))
    for key in _SPIN_FLAGS:
        if getattr(args, key, None) is not None:
            spin_kw[key] = getattr(args, key)
    for key in _ACQ_FLAGS:
        if getattr(args, key, None) is not None:
            acq_kw[key] = getattr(args, key)
    try:
        s = nm.SpinSystem(**spin_kw)
        acq = spectro.AcquisitionConfig(**acq_kw)
        acq.check_against(s)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid configuration: {exc}") from None
    return s, acq


def load_overrides(items) -> dict[str, nm.PulseSequence]:
    out = {}
    for item in items or ():
        name, sep, path = item.partition("=")
        if not sep or name not in nm.BUILTIN_NAMES or name == "PREP":
            raise UsageError(f"--sequence expects NAME=PATH with NAME in I0..I3, U1..U3; got {item!r}")
        try:
            out[name] = nm.PulseSequence.from_text(Path(path).read_text(), label=name)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot load sequence {item!r}: {exc}") from None
    return out


def out_root(args) -> Path:
    return Path(args.out or os.environ.get("GNSIM_OUT") or "out")


# -- serialization helpers -------------------------------------------------

def _complex(z) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def matrix_json(m) -> dict:
    m = np.asarray(m)
    return {"real": m.real.tolist(), "imag": m.imag.tolist()}


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write_readout(root: Path, exp_id: str, ex: spectro.ExperimentReadout) -> list[str]:
    paths = []
    for k, sp in zip((1, 2), ex.spectra):
        rel = f"{exp_id}/spin{k}.csv"
        _write(root / rel, sp.to_csv())
        paths.append(rel)
    return paths


def _acq_pair(acq):
    return acq.for_spin(1), acq.for_spin(2)


# -- gate level ------------------------------------------------------------

def gate_result(u_name: str, tau: int, gamma: int) -> dict:
    p = sc.SearchProblem(sc.builtin_u(u_name), gamma, tau)
    rep = sc.run_search(p)
    return {
        "amplitude_tau_gamma": _complex(rep.amplitude_tau_gamma),
        "k_opt": rep.k_opt,
        "success_probability": rep.success_probability,
        "per_iteration_probabilities": rep.per_iteration_probabilities,
        "final_amplitudes": [_complex(z) for z in rep.final_state],
        "classification": sc.STATE_LABELS[rep.most_likely_index],
    }


# -- commands --------------------------------------------------------------

def cmd_prepare(args) -> int:
    s, acq = load_config(args)
    target = sc.state_index(args.target)
    rho, seq = nm.prepare_pseudo_pure(target, s)
    ex = spectro.read_experiment(rho, _acq_pair(acq), s, args.seed)
    root = out_root(args)
    exp_id = f"prepare-{args.target}"
    artifacts = _write_readout(root, exp_id, ex)
    c = nm.proportionality(rho, nm.pseudo_pure_reference(target))
    report = {
        "experiment": exp_id,
        "target": args.target,
        "sequence": [e.to_line() for e in seq.events],
        "deviation_matrix": matrix_json(rho.m),
        "proportionality_constant": c,
        "peaks": {f"spin{k}": pl.to_dict() for k, pl in zip((1, 2), ex.peak_lists)},
        "classification": ex.classification,
        "artifacts": artifacts + [f"{exp_id}/report.json"],
    }
    _write(root / exp_id / "report.json", _dump(report))
    print(f"{exp_id}: classification {ex.classification}, "
          f"peaks per spin {[len(pl.peaks) for pl in ex.peak_lists]}")
    return EXIT_OK if ex.classification == args.target else EXIT_FAIL


def cmd_search(args) -> int:
    tau = sc.state_index(args.tau)
    gamma = sc.state_index(args.gamma)
    overrides = load_overrides(args.sequence)
    exp_id = f"search-{args.level}-{args.u}-{args.gamma}-to-{args.tau}"
    if args.sign_swapped:
        exp_id += "-swapped"
    spec = {
        "level": args.level, "u_name": args.u, "tau": args.tau,
        "gamma": args.gamma, "sign_swapped": bool(args.sign_swapped),
    }
    gate = gate_result(args.u, tau, gamma)
    report = {"experiment": exp_id, "spec": spec, "gate": gate}
    root = out_root(args)
    artifacts = []
    if args.level == "gate":
        classification = gate["classification"]
    else:
        s, acq = load_config(args)
        rho = nm.run_pulse_search(args.u, tau, gamma, args.sign_swapped, s, overrides)
        ex = spectro.read_experiment(rho, _acq_pair(acq), s, args.seed)
        artifacts = _write_readout(root, exp_id, ex)
        classification = ex.classification
        report["pulse"] = {
            "deviation_matrix": matrix_json(rho.m),
            "populations": rho.populations.tolist(),
            "peaks": {f"spin{k}": pl.to_dict() for k, pl in zip((1, 2), ex.peak_lists)},
            "classification": classification,
        }
        report["levels_agree"] = classification == gate["classification"]
    report["classification"] = classification
    report["artifacts"] = artifacts + [f"{exp_id}/report.json"]
    _write(root / exp_id / "report.json", _dump(report))
    if args.level == "gate":
        print(_dump(report), end="")
    else:
        print(f"{exp_id}: classification {classification} (target {args.tau})")
    return EXIT_OK if classification == args.tau else EXIT_FAIL


def verification_rows(s: nm.SpinSystem, overrides: dict | None = None) -> list[tuple[str, bool, str]]:
    """Every check run by ``verify`` as (name, passed, detail)."""
    overrides = overrides or {}
    rows = []

    def seq(name):
        return overrides[name] if name in overrides else nm.builtin_sequence(name)

    for i in range(4):
        name = f"I{i}"
        try:
            res = ql.equal_up_to_global_phase(nm.compile_sequence(seq(name), s),
                                              sc.reflection(i, 4), 1e-10)
        except ValueError as exc:
            rows.append((name, False, str(exc)))
            continue
        rows.append((name, res.equal, _phase_detail(res)))
    for u in ("U1", "U2", "U3"):
        try:
            res = ql.equal_up_to_global_phase(nm.compile_sequence(seq(u), s),
                                              sc.builtin_u(u), 1e-10)
        except ValueError as exc:
            rows.append((u, False, str(exc)))
            continue
        rows.append((u, res.equal, _phase_detail(res)))
    constants = []
    for t, label in enumerate(sc.STATE_LABELS):
        rho, _ = nm.prepare_pseudo_pure(t, s)
        c = nm.proportionality(rho, nm.pseudo_pure_reference(t))
        constants.append(c)
        ok = c is not None and abs(c) > 1e-12
        rows.append((f"PREP-{label}", ok, "not proportional" if c is None else f"c={c:.12g}"))
    consistent = all(c is not None for c in constants) and \
        max(constants) - min(constants) <= 1e-10
    rows.append(("PREP-constant", consistent,
                 "stable across targets" if consistent else f"constants {constants}"))
    failures = []
    for u in ("U1", "U2", "U3"):
        for g in range(4):
            for t in range(4):
                rep = sc.run_search(sc.SearchProblem(sc.builtin_u(u), g, t))
                if rep.k_opt != 1 or abs(rep.success_probability - 1) > 1e-12:
                    failures.append(f"{u}:{g}->{t}")
    rows.append(("gate-grid-48", not failures,
                 "all k_opt=1, P=1" if not failures else ", ".join(failures)))
    return rows


def _phase_detail(res: ql.PhaseMatch) -> str:
    if res.orthogonal:
        return "phase undefined, matrices orthogonal"
    if res.phase is None:
        return "zero matrix"
    return f"phase={res.phase:+.6f} rad"


def cmd_verify(args) -> int:
    s, _ = load_config(args)
    rows = verification_rows(s, load_overrides(args.sequence))
    width = max(len(r[0]) for r in rows)
    for name, ok, detail in rows:
        print(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}  {detail}")
    failed = [r[0] for r in rows if not r[1]]
    if failed:
        print(f"FAILED: {', '.join(failed)}")
        return EXIT_FAIL
    print("all checks passed")
    return EXIT_OK


def sweep_rows(amps, dim: int = 4) -> list[dict]:
    rows = []
    for a in amps:
        if a == 0:
            rows.append({"amplitude": a, "k_opt": "", "pi_over_4amp": "",
                         "classical_repetitions": "", "success_probability": "",
                         "status": "unreachable"})
            continue
        u = sc.unitary_with_amplitude(a, dim, 0, dim - 1)
        rep = sc.run_search(sc.SearchProblem(u, 0, dim - 1))
        rows.append({
            "amplitude": a,
            "k_opt": rep.k_opt,
            "pi_over_4amp": math.pi / (4 * a),
            "classical_repetitions": 1 / a**2,
            "success_probability": rep.success_probability,
            "status": "ok",
        })
    return rows


def cmd_sweep(args) -> int:
    try:
        amps = [float(x) for x in args.amps.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--amps must be comma-separated numbers, got {args.amps!r}") from None
    if not amps or any(not 0 <= a <= 1 for a in amps):
        raise UsageError("amplitudes must lie in [0, 1]")
    if args.dim < 2:
        raise UsageError("--dim must be at least 2")
    rows = sweep_rows(amps, args.dim)
    cols = list(rows[0])
    lines = [",".join(cols)]
    lines += [",".join(repr(r[c]) if isinstance(r[c], float) else str(r[c]) for c in cols)
              for r in rows]
    text = "\n".join(lines) + "\n"
    _write(out_root(args) / "sweep" / "sweep.csv", text)
    print(text, end="")
    return EXIT_OK


# -- parser ----------------------------------------------------------------

def _common(p: argparse.ArgumentParser, acquisition: bool = True) -> None:
    p.add_argument("--config", help="JSON file with spin_system / acquisition sections")
    p.add_argument("--out", help="output directory (default $GNSIM_OUT or ./out)")
    p.add_argument("--seed", type=int, default=None, help="seed for optional noise")
    g = p.add_argument_group("spin system")
    g.add_argument("--nu1", type=float, help="13C Larmor frequency, MHz")
    g.add_argument("--nu2", type=float, help="1H Larmor frequency, MHz")
    g.add_argument("--j", type=float, help="scalar coupling, Hz")
    g.add_argument("--gamma-ratio", dest="gamma_ratio", type=float)
    if acquisition:
        a = p.add_argument_group("acquisition")
        a.add_argument("--n-points", dest="n_points", type=int)
        a.add_argument("--dwell", type=float, help="seconds per sample")
        a.add_argument("--t2", type=float, help="line-broadening decay time, s")
        a.add_argument("--noise", type=float, help="additive Gaussian noise amplitude")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gnsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="prepare a pseudo-pure state and read it out")
    p.add_argument("--target", required=True, choices=sc.STATE_LABELS)
    _common(p)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("search", help="run one generalized search experiment")
    p.add_argument("--level", choices=("gate", "pulse"), default="pulse")
    p.add_argument("--u", required=True, choices=("U1", "U2", "U3"))
    p.add_argument("--tau", required=True, choices=sc.STATE_LABELS)
    p.add_argument("--gamma", default="uu", choices=sc.STATE_LABELS)
    p.add_argument("--sign-swapped", dest="sign_swapped", action="store_true")
    p.add_argument("--sequence", action="append", metavar="NAME=PATH",
                   help="replace a built-in I/U sequence with one read from PATH")
    _common(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("verify", help="cross-check pulse compilations and the gate grid")
    p.add_argument("--sequence", action="append", metavar="NAME=PATH")
    _common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="iteration count versus |U_tau,gamma|")
    p.add_argument("--amps", default=",".join(str(a) for a in DEFAULT_AMPS))
    p.add_argument("--dim", type=int, default=4)
    _common(p, acquisition=False)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"gnsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
