"""Semi-classical model of the multiplexed readout network.

Each channel is a readout resonator (qubit-state-dependent frequency) coupled
with strength J to a filter resonator, which couples to a shared readout line
with external linewidth kappa_p.  A parasitic shunt LC sits at the common
node.  The model is linear: qubits only shift their readout resonator by 2*chi.

Conventions
-----------
All public frequencies, linewidths and couplings are ordinary frequencies in
Hz.  The electrical-engineering phasor convention exp(+i w t) is canonical;
the input-output expressions are conjugated on ingestion, here and nowhere
else.  Time evolution is computed in the rotating frame of the drive; normal
modes are reported at absolute frequencies.  State strings list one of
'g'/'e' per channel, e.g. "gegg".
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.linalg import expm

from .errors import (CompositionPoleError, PassivityError,
                     SingularSystemError, ValidationError)
from .purcell import ShuntLC

TWO_PI = 2.0 * math.pi

# raised-cosine edges are sampled piecewise-constant at most this coarsely
EDGE_SAMPLE_MAX_S = 0.1e-9

MAX_CHANNELS = 8


@dataclass(frozen=True)
class ReadoutChannel:
    """Bare parameters of one readout/filter pair (all in Hz).

    f_r_g : readout-resonator frequency with the qubit in g
    chi : dispersive shift; f_r_e = f_r_g + 2 chi
    f_p : filter-resonator frequency
    j : readout-filter coupling
    kappa_p : filter external linewidth
    gamma_r, gamma_p : internal linewidths (default lossless)
    """

    name: str
    f_r_g: float
    chi: float
    f_p: float
    j: float
    kappa_p: float
    gamma_r: float = 0.0
    gamma_p: float = 0.0

    def __post_init__(self):
        if not self.kappa_p > 0:
            raise ValidationError("kappa_p must be > 0")
        if self.j < 0:
            raise ValidationError("j must be >= 0")
        if self.gamma_r < 0 or self.gamma_p < 0:
            raise ValidationError("internal linewidths must be >= 0")

    def f_r(self, state: str) -> float:
        """Readout frequency for qubit state 'g' or 'e'."""
        if state == "g":
            return self.f_r_g
        if state == "e":
            return self.f_r_g + 2.0 * self.chi
        raise ValidationError(f"state must be 'g' or 'e', got {state!r}")


@dataclass(frozen=True)
class QubitInfo:
    """Optional qubit metadata attached to a channel (Hz)."""

    f_q: float
    g: float
    alpha: float | None = None
    c_q: float | None = None


@dataclass(frozen=True)
class MuxNetwork:
    """Multiplexed channels sharing one line node and shunt."""

    channels: tuple[ReadoutChannel, ...]
    shunt: ShuntLC
    z0_line: float = 50.0
    qubits: dict[str, QubitInfo] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        n = len(self.channels)
        if not 1 <= n <= MAX_CHANNELS:
            raise ValidationError(f"1 to {MAX_CHANNELS} channels supported, got {n}")
        names = [ch.name for ch in self.channels]
        if len(set(names)) != n:
            raise ValidationError("channel names must be unique")
        if not self.z0_line > 0:
            raise ValidationError("z0_line must be > 0")

    @property
    def n(self) -> int:
        return len(self.channels)

    def index(self, name: str) -> int:
        for i, ch in enumerate(self.channels):
            if ch.name == name:
                return i
        raise ValidationError(f"no channel named {name!r}")


def validate_state(net: MuxNetwork, state: str) -> str:
    state = str(state)
    if len(state) != net.n or any(c not in "ge" for c in state):
        raise ValidationError(
            f"state must be a string over {{g,e}} of length {net.n}, got {state!r}")
    return state


def shunt_reflection(shunt: ShuntLC, z0: float, f) -> complex:
    """Reflection coefficient of the lossless shunt LC; |Gamma| = 1."""
    scalar = np.ndim(f) == 0
    f = np.atleast_1d(np.asarray(f, dtype=float))
    if np.any(f <= 0):
        raise ValidationError("frequency must be > 0")
    w = TWO_PI * f
    y = 1j * (w * shunt.c_shunt - 1.0 / (w * shunt.l_shunt))
    out = (1.0 - z0 * y) / (1.0 + z0 * y)
    return complex(out[0]) if scalar else out


def _branch_admittance(ch: ReadoutChannel, state: str, f):
    """Normalized load admittance (1 - Gamma_p)/(1 + Gamma_p) of one branch.

    Engineering-convention form of the input-output reflection: with
    w = gamma_r - 2i Delta_r, u = kappa_p w / ((gamma_p - 2i Delta_p) w + 4 J^2).
    Returns (u, pole_mask); pole_mask marks exact Gamma_p = -1 points.
    """
    f = np.asarray(f, dtype=float)
    d_r = TWO_PI * (ch.f_r(state) - f)
    d_p = TWO_PI * (ch.f_p - f)
    kap = TWO_PI * ch.kappa_p
    g_r = TWO_PI * ch.gamma_r
    g_p = TWO_PI * ch.gamma_p
    j4 = 4.0 * (TWO_PI * ch.j) ** 2
    wfac = g_r - 2j * d_r
    den = (g_p - 2j * d_p) * wfac + j4
    pole = den == 0.0
    safe_den = np.where(pole, 1.0, den)
    u = kap * wfac / safe_den
    if j4 == 0.0:
        # readout factor cancels; bare-filter admittance (removes 0/0 at w=0)
        bare_den = g_p - 2j * d_p
        bare_pole = bare_den == 0.0
        u = kap / np.where(bare_pole, 1.0, bare_den)
        pole = bare_pole
    u = np.where(pole, np.inf + 0j, u)
    return u, pole


def gamma_filter(ch: ReadoutChannel, state: str, f_d) -> complex:
    """Qubit-state-dependent reflection coefficient at one filter (engineering).

    Unimodular when the internal linewidths vanish.  The exact branch pole
    (bare over-coupled filter on resonance) returns the limit value -1.
    """
    scalar = np.ndim(f_d) == 0
    f = np.atleast_1d(np.asarray(f_d, dtype=float))
    if np.any(f <= 0):
        raise ValidationError("frequency must be > 0")
    u, pole = _branch_admittance(ch, state, f)
    with np.errstate(invalid="ignore"):
        out = np.where(pole, -1.0 + 0j, (1.0 - u) / (1.0 + u))
    return complex(out[0]) if scalar else out


def gamma_incident(net: MuxNetwork, state: str, f_d) -> complex:
    """Reflection coefficient of the full multiplexed network.

    Branch and shunt loads combine as parallel admittances:
    (1 - G)/(1 + G) = z0/Z_shunt + sum_j (1 - G_pj)/(1 + G_pj).
    A branch sitting exactly at Gamma_p = -1 makes the sum diverge and is
    reported as CompositionPoleError.
    """
    state = validate_state(net, state)
    scalar = np.ndim(f_d) == 0
    f = np.atleast_1d(np.asarray(f_d, dtype=float))
    if np.any(f <= 0):
        raise ValidationError("frequency must be > 0")
    w = TWO_PI * f
    y_sh = 1j * (w * net.shunt.c_shunt - 1.0 / (w * net.shunt.l_shunt))
    total = net.z0_line * y_sh + 0j
    for ch, s in zip(net.channels, state):
        u, pole = _branch_admittance(ch, s, f)
        if np.any(pole):
            raise CompositionPoleError(
                f"channel {ch.name!r} reflects with Gamma_p = -1 at the "
                "requested frequency")
        total = total + u
    if np.any(np.abs(1.0 + total) == 0.0):
        raise CompositionPoleError("total admittance sum hit -1 exactly")
    out = (1.0 - total) / (1.0 + total)
    return complex(out[0]) if scalar else out


def system_matrix(net: MuxNetwork, state: str, f_d: float,
                  absolute: bool = False,
                  gamma_shunt: complex | None = None):
    """Coupled-mode matrix and drive vector, engineering convention.

    The field vector x = (p_1..p_N, r_1..r_N) evolves as
    dx/dt = i A x + d s_in(t), with A in rad/s.  By default A carries drive
    detunings (rotating frame at f_d) and the shunt reflection evaluated at
    the carrier; absolute=True gives absolute frequencies and gamma_shunt
    overrides the shunt value (the normal-mode computation uses 1).
    """
    state = validate_state(net, state)
    n = net.n
    gs = (shunt_reflection(net.shunt, net.z0_line, f_d)
          if gamma_shunt is None else complex(gamma_shunt))
    a = np.zeros((2 * n, 2 * n), dtype=complex)
    kap = np.array([TWO_PI * ch.kappa_p for ch in net.channels])
    root_k = np.sqrt(kap)
    off = 0.25j * (1.0 + gs) * np.outer(root_k, root_k)
    a[:n, :n] = off
    for i, (ch, s) in enumerate(zip(net.channels, state)):
        w_p = TWO_PI * (ch.f_p - (0.0 if absolute else f_d))
        w_r = TWO_PI * (ch.f_r(s) - (0.0 if absolute else f_d))
        a[i, i] += w_p + 0.5j * TWO_PI * ch.gamma_p
        a[n + i, n + i] = w_r + 0.5j * TWO_PI * ch.gamma_r
        a[i, n + i] = TWO_PI * ch.j
        a[n + i, i] = TWO_PI * ch.j
    d = np.zeros(2 * n, dtype=complex)
    d[:n] = 0.5 * (1.0 + gs) * root_k
    return a, d


@dataclass(frozen=True)
class PulseSegment:
    """One envelope piece: hold `amplitude` for `duration`.

    edge "flat" holds the value; edge "raised_cosine" ramps from the previous
    segment's amplitude (or 0 at the start) to `amplitude` over the segment.
    Amplitudes are in sqrt(photons/s).
    """

    duration: float
    amplitude: complex
    edge: str = "flat"

    def __post_init__(self):
        if not self.duration > 0:
            raise ValidationError("segment duration must be > 0")
        if not np.isfinite(self.amplitude):
            raise ValidationError("segment amplitude must be finite")
        if self.edge not in ("flat", "raised_cosine"):
            raise ValidationError(f"unknown edge shape {self.edge!r}")


@dataclass(frozen=True)
class DrivePulse:
    """Carrier frequency plus a piecewise envelope."""

    f_d: float
    segments: tuple[PulseSegment, ...]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.f_d > 0:
            raise ValidationError("carrier frequency must be > 0")
        if not self.segments:
            raise ValidationError("pulse needs at least one segment")

    @property
    def duration(self) -> float:
        return sum(s.duration for s in self.segments)

    @classmethod
    def rectangular(cls, f_d: float, amplitude: complex,
                    duration: float) -> "DrivePulse":
        return cls(f_d, (PulseSegment(duration, amplitude),))

    @classmethod
    def two_step(cls, f_d: float, plateau_amplitude: complex,
                 plateau_duration: float, overshoot: float = 1.375,
                 flat_top: float = 14e-9, edge: float = 6e-9,
                 tail: float = 0.0) -> "DrivePulse":
        """Boosted two-step readout pulse.

        Raised-cosine rise to overshoot*plateau, a short flat top, a
        raised-cosine step down to the plateau, then the plateau itself (and
        an optional ring-down tail at zero drive).
        """
        if not 1.35 <= overshoot <= 1.4:
            raise ValidationError("overshoot ratio must lie in [1.35, 1.4]")
        a = complex(plateau_amplitude)
        segs = [
            PulseSegment(edge, overshoot * a, "raised_cosine"),
            PulseSegment(flat_top, overshoot * a, "flat"),
            PulseSegment(edge, a, "raised_cosine"),
            PulseSegment(plateau_duration, a, "flat"),
        ]
        if tail > 0:
            segs.append(PulseSegment(edge, 0.0, "raised_cosine"))
            segs.append(PulseSegment(tail, 0.0, "flat"))
        return cls(f_d, tuple(segs))

    def envelope(self, t):
        """Complex drive amplitude at time(s) t.

        Segments are half-open on the right; the value at exactly
        t = duration is the final segment amplitude (left-continuous end).
        Zero outside [0, duration].
        """
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = np.zeros(t.shape, dtype=complex)
        t0 = 0.0
        prev = 0.0 + 0.0j
        for seg in self.segments:
            t1 = t0 + seg.duration
            m = (t >= t0) & (t < t1)
            if seg.edge == "flat":
                out[m] = seg.amplitude
            else:
                tau = (t[m] - t0) / seg.duration
                out[m] = prev + (seg.amplitude - prev) * 0.5 * (1 - np.cos(np.pi * tau))
            prev = complex(seg.amplitude)
            t0 = t1
        out[t == t0] = prev
        out[t > t0] = 0.0
        return complex(out[0]) if scalar else out

    def sample_intervals(self):
        """Piecewise-constant sampling of the envelope.

        Yields (t0, t1, amplitude) covering [0, duration); raised-cosine
        edges are subdivided at <= 0.1 ns and sampled at interval midpoints.
        """
        t0 = 0.0
        prev = 0.0 + 0.0j
        for seg in self.segments:
            if seg.edge == "flat":
                yield t0, t0 + seg.duration, complex(seg.amplitude)
            else:
                nsub = max(1, math.ceil(seg.duration / EDGE_SAMPLE_MAX_S))
                h = seg.duration / nsub
                for k in range(nsub):
                    tau = (k + 0.5) / nsub
                    amp = prev + (seg.amplitude - prev) * 0.5 * (1 - math.cos(math.pi * tau))
                    yield t0 + k * h, t0 + (k + 1) * h, complex(amp)
            prev = complex(seg.amplitude)
            t0 += seg.duration


@dataclass(frozen=True)
class FieldTraces:
    """Propagated mode amplitudes and output field on a uniform time grid."""

    t: np.ndarray          # (T,) seconds
    p: np.ndarray          # (N, T) filter amplitudes
    r: np.ndarray          # (N, T) readout amplitudes
    s_out: np.ndarray      # (T,)
    s_in: np.ndarray       # (T,) drive envelope at the grid times
    f_d: float
    state: str

    def __post_init__(self):
        if not np.all(np.diff(self.t) > 0):
            raise ValidationError("time grid must be strictly increasing")
        nt = self.t.size
        for name in ("p", "r"):
            if getattr(self, name).shape[-1] != nt:
                raise ValidationError(f"{name} length must match the grid")
        if self.s_out.size != nt or self.s_in.size != nt:
            raise ValidationError("field traces must match the grid")


def _check_passivity(net: MuxNetwork, a: np.ndarray) -> None:
    kap_scale = max(TWO_PI * ch.kappa_p for ch in net.channels)
    lam = np.linalg.eigvals(a)
    if np.min(lam.imag) < -1e-6 * kap_scale:
        raise PassivityError(
            f"system matrix has a growing mode (Im lambda = {np.min(lam.imag):.3g})")


def propagate(net: MuxNetwork, state: str, pulse: DrivePulse,
              dt_out: float) -> FieldTraces:
    """Integrate the driven coupled-mode equations from zero initial state.

    The system is linear and time-invariant within each envelope sample, so
    each step applies the exact matrix exponential; there is no step-size
    error beyond the piecewise-constant envelope sampling.
    """
    state = validate_state(net, state)
    if not dt_out > 0:
        raise ValidationError("dt_out must be > 0")
    a, d = system_matrix(net, state, pulse.f_d)
    _check_passivity(net, a)
    m = 1j * a
    n = net.n
    dim = 2 * n

    t_end = pulse.duration
    n_out = int(math.floor(t_end / dt_out + 1e-9))
    out_times = np.arange(n_out + 1) * dt_out
    if out_times[-1] < t_end - 1e-15:
        out_times = np.append(out_times, t_end)

    # merge envelope-sample boundaries with output times
    bounds = set(float(x) for x in out_times)
    intervals = list(pulse.sample_intervals())
    for t0, t1, _ in intervals:
        bounds.add(float(t0))
        bounds.add(float(t1))
    cuts = np.array(sorted(bounds))
    cuts = cuts[(cuts >= 0) & (cuts <= t_end + 1e-15)]
    keep = np.ones(cuts.size, dtype=bool)
    keep[1:] = np.diff(cuts) > 1e-15
    cuts = cuts[keep]

    starts = np.array([iv[0] for iv in intervals])
    amps = [iv[2] for iv in intervals]

    def amp_at(tm: float) -> complex:
        i = int(np.searchsorted(starts, tm, side="right")) - 1
        return amps[max(i, 0)]

    cache: dict[float, tuple[np.ndarray, np.ndarray]] = {}

    def step_ops(h: float):
        key = round(h, 18)
        if key not in cache:
            aug = np.zeros((dim + 1, dim + 1), dtype=complex)
            aug[:dim, :dim] = m
            aug[:dim, dim] = d
            big = expm(aug * h)
            cache[key] = (big[:dim, :dim], big[:dim, dim])
        return cache[key]

    x = np.zeros(dim, dtype=complex)
    states = np.zeros((out_times.size, dim), dtype=complex)
    out_idx = 1
    for k in range(cuts.size - 1):
        t0, t1 = cuts[k], cuts[k + 1]
        h = t1 - t0
        e_h, f_h = step_ops(h)
        u = amp_at(0.5 * (t0 + t1))
        x = e_h @ x + f_h * u
        while out_idx < out_times.size and out_times[out_idx] <= t1 + 1e-15:
            states[out_idx] = x
            out_idx += 1

    gs = shunt_reflection(net.shunt, net.z0_line, pulse.f_d)
    s_in = np.asarray(pulse.envelope(out_times), dtype=complex)
    root_k = np.sqrt(np.array([TWO_PI * ch.kappa_p for ch in net.channels]))
    p = states[:, :n].T
    r = states[:, n:].T
    s_out = gs * s_in - 0.5 * (1.0 + gs) * (root_k @ p)
    return FieldTraces(t=out_times, p=p, r=r, s_out=s_out, s_in=s_in,
                       f_d=pulse.f_d, state=state)


def steady_state(net: MuxNetwork, state: str, f_d: float,
                 s_in: complex = 1.0) -> np.ndarray:
    """Steady-state field vector (p, r) under a constant drive."""
    a, d = system_matrix(net, state, f_d)
    try:
        return np.linalg.solve(1j * a, -d * s_in)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"steady state singular at f_d = {f_d}") from exc


def drive_for_photon_number(net: MuxNetwork, channel: str, state: str,
                            f_d: float, n_target: float) -> float:
    """Drive amplitude (sqrt(photons/s)) giving n_target photons in a readout mode."""
    if n_target < 0:
        raise ValidationError("photon number must be >= 0")
    idx = net.index(channel)
    x = steady_state(net, state, f_d, 1.0)
    r = abs(x[net.n + idx])
    if r == 0.0:
        raise SingularSystemError("readout mode does not respond at this drive")
    return math.sqrt(n_target) / r


@dataclass(frozen=True)
class NormalMode:
    """One hybridized mode: absolute frequency, external linewidth, identity."""

    channel: str
    character: str          # "readout" | "filter"
    f_hz: float
    kappa_hz: float
    weight: float           # eigenvector weight on the owning channel


def _eigensolve(net: MuxNetwork, state: str):
    a, _ = system_matrix(net, state, f_d=net.channels[0].f_p,
                         absolute=True, gamma_shunt=1.0)
    lam, vec = np.linalg.eig(a)
    vec = vec / np.linalg.norm(vec, axis=0, keepdims=True)
    return lam, vec


def _channel_weights(net: MuxNetwork, vec: np.ndarray) -> np.ndarray:
    n = net.n
    w = np.abs(vec[:n, :]) ** 2 + np.abs(vec[n:, :]) ** 2
    return w.T  # (mode, channel)


def _assign_channels(net: MuxNetwork, weights: np.ndarray) -> list[int]:
    """Greedy capacity-2 assignment of modes to channels by descending weight."""
    n_modes = weights.shape[0]
    order = sorted(
        ((float(weights[k, j]), k, j) for k in range(n_modes)
         for j in range(net.n)),
        key=lambda t: (-t[0], t[1], t[2]))
    cap = {j: 2 for j in range(net.n)}
    assigned: dict[int, int] = {}
    for wt, k, j in order:
        if k in assigned or cap[j] == 0:
            continue
        assigned[k] = j
        cap[j] -= 1
    for k in range(n_modes):
        best = int(np.argmax(weights[k]))
        if assigned[k] != best:
            warnings.warn(
                f"ambiguous mode-to-channel assignment for mode {k}: weights "
                f"{np.round(weights[k], 6).tolist()}", stacklevel=3)
    return [assigned[k] for k in range(n_modes)]


def _match_modes(vec_a: np.ndarray, vec_b: np.ndarray) -> list[int]:
    """Match columns of vec_a to columns of vec_b by eigenvector overlap."""
    n = vec_a.shape[1]
    ov = np.abs(vec_a.conj().T @ vec_b)  # (a, b)
    order = sorted(((float(ov[i, j]), i, j) for i in range(n) for j in range(n)),
                   key=lambda t: (-t[0], t[1], t[2]))
    used_a: set[int] = set()
    used_b: set[int] = set()
    match = [-1] * n
    for _, i, j in order:
        if i in used_a or j in used_b:
            continue
        match[i] = j
        used_a.add(i)
        used_b.add(j)
    return match


def _flip(state: str, idx: int) -> str:
    flipped = "e" if state[idx] == "g" else "g"
    return state[:idx] + flipped + state[idx + 1:]


def normal_modes(net: MuxNetwork, state: str) -> list[NormalMode]:
    """Hybridized modes of the drive-free network (shunt reflection set to 1).

    Modes pair to channels by eigenvector weight.  Within a channel the
    readout-like mode is the one whose frequency moves more when that
    channel's qubit state flips (the filter-like mode barely shifts); for a
    channel with chi = 0 the smaller external linewidth decides instead.
    """
    state = validate_state(net, state)
    lam, vec = _eigensolve(net, state)
    weights = _channel_weights(net, vec)
    owner = _assign_channels(net, weights)

    shifts = np.zeros(lam.size)
    for j, ch in enumerate(net.channels):
        members = [k for k in range(lam.size) if owner[k] == j]
        if ch.chi == 0.0:
            continue
        lam_f, vec_f = _eigensolve(net, _flip(state, j))
        match = _match_modes(vec, vec_f)
        for k in members:
            shifts[k] = abs(lam[k].real - lam_f[match[k]].real)

    modes: list[NormalMode] = []
    for j, ch in enumerate(net.channels):
        members = sorted(k for k in range(lam.size) if owner[k] == j)
        if ch.chi == 0.0:
            # smaller external linewidth marks the readout-like mode
            members.sort(key=lambda k: lam[k].imag)
        else:
            members.sort(key=lambda k: -shifts[k])
        for rank, k in enumerate(members):
            modes.append(NormalMode(
                channel=ch.name,
                character="readout" if rank == 0 else "filter",
                f_hz=lam[k].real / TWO_PI,
                kappa_hz=2.0 * lam[k].imag / TWO_PI,
                weight=float(weights[k, j]),
            ))
    return modes


def mode_dispersive_shifts(net: MuxNetwork, target: str) -> tuple[float, float]:
    """(chi_r, chi_p) of the hybridized modes for the target channel (Hz).

    Computed as half the frequency change of each mode when only the target
    qubit flips from g to e, all other qubits staying in g.
    """
    idx = net.index(target)
    state_g = "g" * net.n
    lam_g, vec_g = _eigensolve(net, state_g)
    lam_e, vec_e = _eigensolve(net, _flip(state_g, idx))
    weights = _channel_weights(net, vec_g)
    owner = _assign_channels(net, weights)
    match = _match_modes(vec_g, vec_e)
    members = [k for k in range(lam_g.size) if owner[k] == idx]
    shifts = {k: (lam_e[match[k]].real - lam_g[k].real) / 2.0 / TWO_PI
              for k in members}
    members.sort(key=lambda k: -abs(shifts[k]))
    return shifts[members[0]], shifts[members[1]]


@dataclass(frozen=True)
class SeparationResult:
    """Qubit-state output-field separation for a target channel."""

    t: np.ndarray
    s: np.ndarray             # |s_out^e - s_out^g| (t)
    s_target_only: np.ndarray  # single-channel approximation of s
    s_ss: float               # steady-state separation at the plateau drive
    gamma_m: float            # measurement-induced dephasing rate S_ss^2/2 (1/s)
    traces_g: FieldTraces
    traces_e: FieldTraces


def separation(net: MuxNetwork, target: str, pulse: DrivePulse,
               dt_out: float = 0.5e-9) -> SeparationResult:
    """Output-field separation S(t) between target-qubit g and e preparations.

    Two propagations differ only in the target qubit state (others in g).
    s is the exact output-field difference; s_target_only keeps only the
    target channel's filter amplitude and is accurate when spectator
    channels respond identically.  The steady-state value comes from the
    frequency domain, S_ss = |s_in| |Gamma^e - Gamma^g| at the carrier.
    """
    idx = net.index(target)
    state_g = "g" * net.n
    state_e = _flip(state_g, idx)
    tr_g = propagate(net, state_g, pulse, dt_out)
    tr_e = propagate(net, state_e, pulse, dt_out)
    s = np.abs(tr_e.s_out - tr_g.s_out)
    gs = shunt_reflection(net.shunt, net.z0_line, pulse.f_d)
    root_k = math.sqrt(TWO_PI * net.channels[idx].kappa_p)
    s_single = abs(0.5 * (1.0 + gs)) * root_k * np.abs(tr_e.p[idx] - tr_g.p[idx])
    # plateau amplitude: the last segment that actually drives the network
    amp_ss = 0.0 + 0.0j
    for seg in reversed(pulse.segments):
        if abs(seg.amplitude) > 0:
            amp_ss = seg.amplitude
            break
    g_g = gamma_incident(net, state_g, pulse.f_d)
    g_e = gamma_incident(net, state_e, pulse.f_d)
    s_ss = abs(amp_ss) * abs(g_e - g_g)
    return SeparationResult(t=tr_g.t, s=s, s_target_only=s_single, s_ss=s_ss,
                            gamma_m=0.5 * s_ss ** 2, traces_g=tr_g,
                            traces_e=tr_e)


def noise_photon_bound(net: MuxNetwork, target: str, gamma_phi: float) -> float:
    """Readout-resonator noise photons explaining a pure dephasing rate.

    n = 2 Gamma_phi / Int |Gamma^e(w) - Gamma^g(w)|^2 dw/2pi, the integral
    running over a window covering every mode +- 20 linewidths (adaptive
    Gauss-Kronrod quadrature, absolute tolerance 1e-6 of the peak integrand).
    """
    if gamma_phi < 0:
        raise ValidationError("gamma_phi must be >= 0")
    if gamma_phi == 0.0:
        return 0.0
    idx = net.index(target)
    state_g = "g" * net.n
    state_e = _flip(state_g, idx)

    def integrand(f):
        return abs(gamma_incident(net, state_e, f)
                   - gamma_incident(net, state_g, f)) ** 2

    freqs = [ch.f_p for ch in net.channels] + [ch.f_r_g for ch in net.channels]
    kmax = max(ch.kappa_p for ch in net.channels)
    lo = min(freqs) - 20.0 * kmax
    hi = max(freqs) + 20.0 * kmax
    scan = np.linspace(lo, hi, 4001)
    peak = float(np.max(integrand(scan)))
    val, _ = quad(integrand, lo, hi, points=sorted(freqs), limit=500,
                  epsabs=1e-6 * peak, epsrel=1e-9)
    if val < 1e-30:
        raise SingularSystemError(
            "reflection contrast integral vanishes; bound is unbounded")
    return 2.0 * gamma_phi / val


def critical_photon(g: float, f_q: float, f_r: float) -> float:
    """Critical photon number ((f_r - f_q)/(2 g))^2 of the dispersive regime."""
    if not g > 0:
        raise ValidationError("g must be > 0")
    if f_q == f_r:
        raise ValidationError("qubit and readout frequencies must differ")
    return ((f_r - f_q) / (2.0 * g)) ** 2
