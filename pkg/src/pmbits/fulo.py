"""Bohmian trajectories through full-loop Stern-Gerlach devices (FULOs).

A FULO splits a spin-1/2 packet into two spatial arms along z according to
the spin component along the device axis, then re-merges them. The packets
are modelled as frozen-width Gaussians whose centres move out at speed v
until T_half and back again, so the quantum state leaving the device equals
the one entering it.

The two arms carry orthogonal spinors, so the guidance velocity is the
density-weighted mean of the two centre velocities, with no interference
term. That field satisfies the continuity equation for the two-packet
density exactly. Trajectories therefore conserve their quantile
q = CDF(z), which gives the no-crossing rule used by :func:`arm_by_quantile`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Sequence

import numpy as np

from .quantum import KET_A, KET_B, KET_MINUS, KET_PLUS, SQRT1_2, STATE_TOL

UP, DOWN = "up", "down"
MIN_SEPARATION_WIDTHS = 6.0
UNDERFLOW = 1e-300

_EIGENSTATES = {
    ("x", 1): ("a", KET_A),
    ("x", -1): ("b", KET_B),
    ("y", 1): ("+", KET_PLUS),
    ("y", -1): ("-", KET_MINUS),
    ("z", 1): ("+z", np.array([SQRT1_2, 1j * SQRT1_2])),
    ("z", -1): ("-z", np.array([SQRT1_2, -1j * SQRT1_2])),
}


class FuloParameterError(ValueError):
    pass


class StepSizeError(ValueError):
    pass


def eigenstate(axis: str, eigenvalue: int) -> np.ndarray:
    return _EIGENSTATES[(axis, eigenvalue)][1].copy()


def eigenstate_name(axis: str, eigenvalue: int) -> str:
    return _EIGENSTATES[(axis, eigenvalue)][0]


@dataclass(frozen=True, eq=False)
class SpinState2:
    """Single spin over (|a>, |b>), the sigma_x eigenbasis."""

    amplitudes: np.ndarray

    def __post_init__(self):
        arr = np.array(self.amplitudes, dtype=complex)
        if arr.shape != (2,):
            raise ValueError(f"SpinState2 needs 2 amplitudes, got shape {arr.shape}")
        if abs(np.vdot(arr, arr).real - 1.0) > STATE_TOL:
            raise ValueError("spin state is not normalized")
        arr.setflags(write=False)
        object.__setattr__(self, "amplitudes", arr)

    @classmethod
    def normalized(cls, amplitudes, min_norm: float = 1e-6) -> "SpinState2":
        arr = np.asarray(amplitudes, dtype=complex)
        norm = float(np.linalg.norm(arr))
        if norm < min_norm:
            raise ValueError(f"spin norm {norm:g} is too small to normalize")
        return cls(arr / norm)

    @classmethod
    def eigen(cls, axis: str, eigenvalue: int) -> "SpinState2":
        return cls(eigenstate(axis, eigenvalue))

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpinState2):
            return NotImplemented
        return bool(np.array_equal(self.amplitudes, other.amplitudes))

    def __hash__(self):
        return hash(self.amplitudes.tobytes())

    def to_pairs(self) -> list[list[float]]:
        return [[float(z.real), float(z.imag)] for z in self.amplitudes]


@dataclass(frozen=True)
class FuloDevice:
    axis: str = "x"
    orientation: int = 1
    speed: float = 1.0
    half_duration: float = 10.0
    width: float = 1.0

    def __post_init__(self):
        if self.axis not in ("x", "y", "z"):
            raise FuloParameterError(f"axis must be x, y or z, got {self.axis!r}")
        if self.orientation not in (1, -1):
            raise FuloParameterError(f"orientation must be +1 or -1, got {self.orientation!r}")
        for name in ("speed", "half_duration", "width"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise FuloParameterError(f"{name} must be positive, got {value!r}")
        if self.speed * self.half_duration < MIN_SEPARATION_WIDTHS * self.width:
            raise FuloParameterError(
                f"arms not separated: speed*half_duration={self.speed * self.half_duration:g} "
                f"< {MIN_SEPARATION_WIDTHS:g}*width={MIN_SEPARATION_WIDTHS * self.width:g}"
            )

    @property
    def total_duration(self) -> float:
        return 2.0 * self.half_duration

    @property
    def name(self) -> str:
        return ("+" if self.orientation == 1 else "-") + self.axis

    @classmethod
    def parse(cls, text: str, **kinematics) -> "FuloDevice":
        """Parse ``+x``, ``-y``, ``z`` (orientation defaults to +)."""
        text = text.strip()
        sign = 1
        if text[:1] in "+-":
            sign = 1 if text[0] == "+" else -1
            text = text[1:]
        return cls(axis=text, orientation=sign, **kinematics)

    def implied_value(self, arm: str) -> int:
        """sigma_axis eigenvalue of the packet that travels in ``arm``."""
        return self.orientation if arm == UP else -self.orientation

    def to_dict(self) -> dict:
        return {
            "device": self.name,
            "axis": self.axis,
            "orientation": self.orientation,
            "speed": self.speed,
            "half_duration": self.half_duration,
            "width": self.width,
        }


def device_weights(spin: SpinState2, device: FuloDevice) -> tuple[float, int]:
    """Probability of the spatially-up arm, and the eigenvalue routed up."""
    up_label = device.orientation
    overlap = np.vdot(eigenstate(device.axis, up_label), spin.amplitudes)
    p_up = min(1.0, float(abs(overlap) ** 2))
    return p_up, up_label


@dataclass(frozen=True)
class PacketPairModel:
    p_up: float
    speed: float = 1.0
    half_duration: float = 10.0
    width: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.p_up <= 1.0:
            raise ValueError(f"p_up must lie in [0, 1], got {self.p_up}")

    @classmethod
    def for_device(cls, spin: SpinState2, device: FuloDevice) -> "PacketPairModel":
        p_up, _ = device_weights(spin, device)
        return cls(p_up, device.speed, device.half_duration, device.width)

    @property
    def total_duration(self) -> float:
        return 2.0 * self.half_duration

    def z_up(self, t):
        return self.speed * np.minimum(t, self.total_duration - t)

    def z_dn(self, t):
        return -self.z_up(t)

    def zdot_up(self, t, outbound: bool | None = None) -> float:
        """Centre speed of the up packet; at t == T_half the inbound branch applies
        unless ``outbound`` says otherwise."""
        if outbound is None:
            outbound = t < self.half_duration
        return self.speed if outbound else -self.speed


def _density(z, centre, width):
    return np.exp(-0.5 * ((z - centre) / width) ** 2) / (width * math.sqrt(2 * math.pi))


def velocity_field(model: PacketPairModel, z, t: float, outbound: bool | None = None):
    """Guidance velocity dz/dt at position(s) ``z`` and time ``t``."""
    if not 0.0 <= t <= model.total_duration:
        raise ValueError(f"t={t} outside [0, {model.total_duration}]")
    z = np.asarray(z, dtype=float)
    c = model.z_up(t)
    cdot = model.zdot_up(t, outbound)
    gu = model.p_up * _density(z, c, model.width)
    gd = (1.0 - model.p_up) * _density(z, -c, model.width)
    den = gu + gd
    tiny = (gu < UNDERFLOW) & (gd < UNDERFLOW)
    with np.errstate(invalid="ignore", divide="ignore"):
        v = cdot * (gu - gd) / den
    if np.any(tiny):
        # fall back to the nearer packet that carries any weight
        if model.p_up == 1.0:
            nearer_up = np.ones_like(z, dtype=bool)
        elif model.p_up == 0.0:
            nearer_up = np.zeros_like(z, dtype=bool)
        else:
            du, dd = np.abs(z - c), np.abs(z + c)
            nearer_up = np.where(du == dd, z > 0, du < dd)
        v = np.where(tiny, np.where(nearer_up, cdot, -cdot), v)
    return v if v.ndim else float(v)


def quantile_of(z0: float, width: float) -> float:
    return NormalDist(0.0, width).cdf(z0)


def position_of(q: float, width: float) -> float:
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile must lie in (0, 1), got {q}")
    return NormalDist(0.0, width).inv_cdf(q)


def default_dt(model: PacketPairModel) -> float:
    return model.half_duration / 2000.0


def _rk4_leg(model, z, t0, h, n, outbound, out, start):
    t_max = model.total_duration
    for i in range(n):
        t = t0 + i * h
        t_half, t_end = min(t + 0.5 * h, t_max), min(t0 + (i + 1) * h, t_max)
        k1 = velocity_field(model, z, t, outbound)
        k2 = velocity_field(model, z + 0.5 * h * k1, t_half, outbound)
        k3 = velocity_field(model, z + 0.5 * h * k2, t_half, outbound)
        k4 = velocity_field(model, z + h * k3, t_end, outbound)
        z = z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[start + i + 1] = z
    return z


def integrate_many(model: PacketPairModel, z0s, dt: float | None = None):
    """RK4 from t=0 to 2*T_half for many starting positions at once.

    The centre velocity jumps at T_half, so each leg is integrated
    separately on a grid that lands on T_half exactly. Returns
    ``(t, z)`` with ``z`` of shape ``(len(t), len(z0s))``.
    """
    T = model.half_duration
    if dt is None:
        dt = default_dt(model)
    if not (dt > 0 and dt <= T / 1000.0):
        raise StepSizeError(f"dt={dt} must be positive and <= T_half/1000={T / 1000.0}")
    n = math.ceil(T / dt - 1e-9)
    h = T / n
    z0s = np.atleast_1d(np.asarray(z0s, dtype=float))
    t = np.concatenate([np.arange(n + 1) * h, T + np.arange(1, n + 1) * h])
    t[-1] = 2 * T
    out = np.empty((2 * n + 1, z0s.size))
    out[0] = z0s
    z_mid = _rk4_leg(model, z0s, 0.0, h, n, True, out, 0)
    _rk4_leg(model, z_mid, T, h, n, False, out, n)
    return t, out


@dataclass
class TrajectoryRecord:
    t: np.ndarray
    z: np.ndarray
    z0: float
    q: float
    arm: str
    p_up: float
    device: FuloDevice | None = None

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.t.tolist(), self.z.tolist()))

    @property
    def z_final(self) -> float:
        return float(self.z[-1])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t", "z"])
            for t, z in zip(self.t, self.z):
                writer.writerow([f"{t:.12g}", f"{z:.12g}"])

    def summary(self) -> dict:
        return {
            "z0": self.z0,
            "q": self.q,
            "p_up": self.p_up,
            "arm": self.arm,
            "z_mid": float(self.z[len(self.z) // 2]),
            "z_final": self.z_final,
            "n_samples": int(len(self.t)),
            "device": self.device.to_dict() if self.device else None,
        }


def integrate_trajectory(
    model: PacketPairModel, z0: float, dt: float | None = None, device: FuloDevice | None = None
) -> TrajectoryRecord:
    t, z = integrate_many(model, [z0], dt)
    z = z[:, 0]
    mid = (len(t) - 1) // 2
    return TrajectoryRecord(
        t=t,
        z=z,
        z0=float(z0),
        q=quantile_of(z0, model.width),
        arm=UP if z[mid] > 0 else DOWN,
        p_up=model.p_up,
        device=device,
    )


def arm_by_quantile(q: float, p_up: float) -> str:
    """The top p_up of the probability mass ends up in the up arm; the tie goes down."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile must lie in (0, 1), got {q}")
    if not 0.0 <= p_up <= 1.0:
        raise ValueError(f"p_up must lie in [0, 1], got {p_up}")
    return UP if q > 1.0 - p_up else DOWN


@dataclass
class FuloStep:
    device: FuloDevice
    p_up: float
    arm: str
    implied_value: int
    rk4_arm: str | None = None

    def to_dict(self) -> dict:
        out = {
            "device": self.device.name,
            "p_up": self.p_up,
            "arm": self.arm,
            "implied_value": self.implied_value,
            "implied_eigenstate": eigenstate_name(self.device.axis, self.implied_value),
        }
        if self.rk4_arm is not None:
            out["rk4_arm"] = self.rk4_arm
        return out


@dataclass
class SequenceRecord:
    spin_in: SpinState2
    spin_out: SpinState2
    q: float
    steps: list[FuloStep] = field(default_factory=list)

    @property
    def arms(self) -> list[str]:
        return [s.arm for s in self.steps]

    @property
    def implied_values(self) -> list[int]:
        return [s.implied_value for s in self.steps]

    def to_dict(self) -> dict:
        return {
            "spin_in": self.spin_in.to_pairs(),
            "spin_out": self.spin_out.to_pairs(),
            "q": self.q,
            "steps": [s.to_dict() for s in self.steps],
        }


def run_fulo_sequence(
    spin: SpinState2,
    q: float,
    devices: Sequence[FuloDevice],
    crosscheck: bool = False,
    dt: float | None = None,
) -> SequenceRecord:
    """Pass one particle through ``devices`` in order.

    Each FULO is the identity on the spin state and maps the position
    quantile onto itself, so both carry over unchanged from device to
    device. With ``crosscheck`` the arm is also found by RK4 from the
    position at quantile ``q``.
    """
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile must lie in (0, 1), got {q}")
    record = SequenceRecord(spin_in=spin, spin_out=spin, q=q)
    for device in devices:
        p_up, _ = device_weights(spin, device)
        arm = arm_by_quantile(q, p_up)
        step = FuloStep(device, p_up, arm, device.implied_value(arm))
        if crosscheck:
            model = PacketPairModel.for_device(spin, device)
            step.rk4_arm = integrate_trajectory(model, position_of(q, device.width), dt).arm
        record.steps.append(step)
    return record


@dataclass
class StabilityReport:
    sequence: SequenceRecord
    values_by_axis: dict[str, list[int]]
    unstable_axes: list[str]

    @property
    def premise_holds(self) -> bool:
        return not self.unstable_axes

    def explanation(self) -> str:
        if self.premise_holds:
            return (
                "every axis read out the same spin value each time; "
                "hidden spin values look stable along this sequence"
            )
        axes = ", ".join(self.unstable_axes)
        return (
            f"implied spin value along {axes} changed between devices although each "
            "FULO is the identity on the quantum state; spin hidden values are not "
            "preserved, so the signalling protocol cannot rely on them"
        )

    def to_dict(self) -> dict:
        return {
            "sequence": self.sequence.to_dict(),
            "values_by_axis": self.values_by_axis,
            "unstable_axes": self.unstable_axes,
            "premise_stable_spin_values": self.premise_holds,
            "protocol_blocked": not self.premise_holds,
            "explanation": self.explanation(),
        }


def hv_stability_report(
    spin: SpinState2, q: float, devices: Sequence[FuloDevice], crosscheck: bool = False
) -> StabilityReport:
    seq = run_fulo_sequence(spin, q, devices, crosscheck=crosscheck)
    by_axis: dict[str, list[int]] = {}
    for step in seq.steps:
        by_axis.setdefault(step.device.axis, []).append(step.implied_value)
    unstable = [axis for axis, vals in by_axis.items() if len(set(vals)) > 1]
    return StabilityReport(seq, by_axis, unstable)


FIG2_DEVICES = ("+x", "-x")


def fig2_preset(q: float, **kinematics) -> StabilityReport:
    spin = SpinState2(KET_PLUS)
    devices = [FuloDevice.parse(d, **kinematics) for d in FIG2_DEVICES]
    return hv_stability_report(spin, q, devices)
