"""Command-line front end.

Exit codes: 0 claim verified / success, 1 claim falsified, 2 usage or
parameter error. Reports go to stdout as JSON; CSV only to ``--out``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import fulo
from .hidden_variables import ContextChoice, attempt_noncontextual_table
from .peres_mermin import PMLabel, build_square, exhaustive_assignment_search, verify_structure
from .protocol import random_states, run_protocol, sweep
from .quantum import KET_A, KET_B, KET_PLUS, SINGLET, SQRT1_2, DegenerateStateError, TwoQubitState, product_state

EXIT_OK, EXIT_FALSIFIED, EXIT_USAGE = 0, 1, 2
FIG2_QUANTILES = (0.1, 0.3, 0.7, 0.9)

TWO_QUBIT_PRESETS = {
    "singlet": lambda: SINGLET,
    "aa": lambda: TwoQubitState.basis("aa"),
    "ab": lambda: TwoQubitState.basis("ab"),
    "ba": lambda: TwoQubitState.basis("ba"),
    "bb": lambda: TwoQubitState.basis("bb"),
    "plus-y": lambda: product_state(KET_PLUS, KET_PLUS),
    "phi-plus": lambda: TwoQubitState((np.kron(KET_A, KET_A) + np.kron(KET_B, KET_B)) * SQRT1_2),
}

SPIN_PRESETS = {
    "a": ("x", 1),
    "b": ("x", -1),
    "plus-y": ("y", 1),
    "minus-y": ("y", -1),
    "plus-z": ("z", 1),
    "minus-z": ("z", -1),
}


class UsageError(Exception):
    pass


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def _parse_amps(text: str, n: int) -> np.ndarray:
    try:
        parts = [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"--amps must be {2 * n} comma-separated numbers") from None
    if len(parts) != 2 * n:
        raise UsageError(f"--amps needs {2 * n} numbers (re,im pairs), got {len(parts)}")
    return np.array(parts[0::2]) + 1j * np.array(parts[1::2])


def two_qubit_state(args) -> TwoQubitState:
    if args.amps is not None:
        try:
            return TwoQubitState.normalized(_parse_amps(args.amps, 4))
        except DegenerateStateError as exc:
            raise UsageError(str(exc)) from None
    try:
        return TWO_QUBIT_PRESETS[args.state]()
    except KeyError:
        raise UsageError(f"unknown state preset {args.state!r}; choose from {sorted(TWO_QUBIT_PRESETS)}") from None


def spin_state(args) -> fulo.SpinState2:
    if args.amps is not None:
        try:
            return fulo.SpinState2.normalized(_parse_amps(args.amps, 2))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    try:
        return fulo.SpinState2.eigen(*SPIN_PRESETS[args.state])
    except KeyError:
        raise UsageError(f"unknown spin preset {args.state!r}; choose from {sorted(SPIN_PRESETS)}") from None


def _kinematics(args) -> dict:
    return {"speed": args.speed, "half_duration": args.half_duration, "width": args.width}


def _quantiles(text: str) -> list[float]:
    try:
        qs = [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"bad quantile list {text!r}") from None
    if not all(0.0 < q < 1.0 for q in qs):
        raise UsageError("quantiles must lie strictly between 0 and 1")
    return qs


# -- commands ---------------------------------------------------------------


def cmd_pm_verify(args) -> int:
    negate = PMLabel[args.tamper] if args.tamper else None
    square = build_square(negate=negate)
    structure = verify_structure(square)
    nogo = exhaustive_assignment_search(square)
    _emit({"structure": structure.to_dict(), "no_go": nogo.to_dict(),
           "noncontextual_attempt": attempt_noncontextual_table(args.seed).to_dict()})
    ok = structure.passed and nogo.all_six_satisfiable == 0
    return EXIT_OK if ok else EXIT_FALSIFIED


def cmd_bits_run(args) -> int:
    state = two_qubit_state(args)
    transcript = run_protocol(state, ContextChoice.parse(args.context), args.seed)
    _emit(transcript.to_dict())
    ok = transcript.bit_matches_context and transcript.consistent
    return EXIT_OK if ok else EXIT_FALSIFIED


def cmd_bits_sweep(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    rng = np.random.default_rng(args.seed)
    if args.state is not None or args.amps is not None:
        states = [two_qubit_state(args)]
    else:
        states = random_states(args.n_states, rng)
    report = sweep(states, args.trials, rng)
    _emit(report.to_dict())
    return EXIT_OK if report.match_fraction in (1.0, None) and report.consistency_fraction in (1.0, None) else EXIT_FALSIFIED


def cmd_fulo_trajectory(args) -> int:
    device = fulo.FuloDevice.parse(args.device, **_kinematics(args))
    if args.p_up is not None:
        if not 0.0 <= args.p_up <= 1.0:
            raise UsageError("--p-up must lie in [0, 1]")
        p_up = args.p_up
    else:
        p_up, _ = fulo.device_weights(spin_state(args), device)
    model = fulo.PacketPairModel(p_up, device.speed, device.half_duration, device.width)
    qs = _quantiles(args.q)
    try:
        records = [
            fulo.integrate_trajectory(model, fulo.position_of(q, device.width), args.dt, device)
            for q in qs
        ]
    except fulo.StepSizeError as exc:
        raise UsageError(str(exc)) from None
    summaries = []
    for q, rec in zip(qs, records):
        entry = rec.summary()
        entry["arm_by_quantile"] = fulo.arm_by_quantile(q, p_up)
        if args.out:
            path = Path(args.out)
            if len(qs) > 1:
                path = path.with_name(f"{path.stem}_q{q:g}{path.suffix or '.csv'}")
            rec.write_csv(path)
            entry["csv"] = str(path)
        summaries.append(entry)
    _emit({"trajectories": summaries})
    return EXIT_OK


def cmd_fulo_sequence(args) -> int:
    spin = spin_state(args)
    devices = [fulo.FuloDevice.parse(d, **_kinematics(args)) for d in args.devices.split(",")]
    out = []
    for q in _quantiles(args.q):
        report = fulo.hv_stability_report(spin, q, devices, crosscheck=args.crosscheck)
        out.append(report.to_dict())
    _emit({"reports": out})
    return EXIT_OK


def cmd_fulo_fig2(args) -> int:
    qs = _quantiles(args.q) if args.q else list(FIG2_QUANTILES)
    reports = [fulo.fig2_preset(q, **_kinematics(args)) for q in qs]
    _emit({"devices": list(fulo.FIG2_DEVICES), "spin": "plus-y",
           "reports": [r.to_dict() for r in reports]})
    ok = all("x" in r.unstable_axes for r in reports)
    return EXIT_OK if ok else EXIT_FALSIFIED


# -- parser -----------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["json"], default="json")


def _state_flags(p: argparse.ArgumentParser, default: str | None, presets) -> None:
    p.add_argument("--state", default=default, help=f"preset: {', '.join(presets)}")
    p.add_argument("--amps", default=None, help="raw amplitudes as comma-separated re,im pairs")


def _fulo_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--speed", type=float, default=1.0)
    p.add_argument("--half-duration", type=float, default=10.0)
    p.add_argument("--width", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pmbits", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pm-verify", help="check the square and run the no-go search")
    _common(p)
    p.add_argument("--tamper", choices=[lab.name for lab in PMLabel], help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_pm_verify)

    bits = sub.add_parser("bits", help="the signalling protocol").add_subparsers(dest="bits_cmd", required=True)
    p = bits.add_parser("run", help="one protocol run")
    _common(p)
    _state_flags(p, "singlet", TWO_QUBIT_PRESETS)
    p.add_argument("--context", choices=["xxyy", "xyyx", "XXYY", "XYYX"], default="xxyy")
    p.set_defaults(func=cmd_bits_run)

    p = bits.add_parser("sweep", help="many runs over random states, both contexts")
    _common(p)
    _state_flags(p, None, TWO_QUBIT_PRESETS)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--n-states", type=int, default=10)
    p.set_defaults(func=cmd_bits_sweep)

    fl = sub.add_parser("fulo", help="Bohmian full-loop Stern-Gerlach runs").add_subparsers(dest="fulo_cmd", required=True)
    p = fl.add_parser("trajectory", help="integrate trajectories through one device")
    _common(p)
    _fulo_flags(p)
    _state_flags(p, "plus-y", SPIN_PRESETS)
    p.add_argument("--device", default="+x")
    p.add_argument("--p-up", type=float, default=None)
    p.add_argument("--q", default="0.9", help="comma-separated quantiles")
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--out", default=None, help="CSV path (t,z)")
    p.set_defaults(func=cmd_fulo_trajectory)

    p = fl.add_parser("sequence", help="arms and implied spin values through a device list")
    _common(p)
    _fulo_flags(p)
    _state_flags(p, "plus-y", SPIN_PRESETS)
    p.add_argument("--devices", default="+x,+y,+x")
    p.add_argument("--q", default="0.9")
    p.add_argument("--crosscheck", action="store_true", help="confirm each arm by RK4")
    p.set_defaults(func=cmd_fulo_sequence)

    p = fl.add_parser("fig2", help="+x then -x on |+>; exit 0 iff the x value flips")
    _common(p)
    _fulo_flags(p)
    p.add_argument("--q", default=None)
    p.set_defaults(func=cmd_fulo_fig2)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed < 0 or args.seed >= 2**64:
        parser.error("--seed must be an unsigned 64-bit integer")
    try:
        return args.func(args)
    except (UsageError, fulo.FuloParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
