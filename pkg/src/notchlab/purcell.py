"""Purcell-limited qubit relaxation through the filtered readout network.

The qubit (shunt capacitance C_q) couples through C_qr to port 1 of a
lossless two-port; port 2 couples through C_ext to the readout line.  The
relaxation limit is T1 = C_q / Re Y_in(w_q).  The notch enhancement factor
compares MTL-coupled and capacitively coupled networks at equal exchange
coupling J.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .equiv import LumpedPair, equivalent_pair, map_resonator, two_port_z
from .errors import ValidationError
from .mtl import CoupledPairGeometry, z21_auto

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class QubitCoupling:
    """Qubit-side and line-side capacitances of the relaxation model.

    c_q : qubit shunt capacitance (F)
    c_qr : qubit to readout-resonator coupling capacitance (F)
    c_ext : filter to readout-line coupling capacitance (F)
    z0_line : readout-line impedance (ohm)
    f_q : qubit frequency (Hz)
    """

    c_q: float
    c_qr: float
    c_ext: float
    z0_line: float
    f_q: float

    def __post_init__(self):
        for name in ("c_q", "c_qr", "c_ext", "z0_line", "f_q"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be > 0")


@dataclass(frozen=True)
class ShuntLC:
    """Parasitic shunt capacitance screened by a spiral inductor."""

    c_shunt: float
    l_shunt: float

    def __post_init__(self):
        if not (self.c_shunt > 0 and self.l_shunt > 0):
            raise ValidationError("shunt elements must be > 0")

    @property
    def f_screen(self) -> float:
        """Frequency where the shunt impedance diverges (Hz)."""
        return 1.0 / (TWO_PI * math.sqrt(self.l_shunt * self.c_shunt))

    def impedance(self, f) -> complex:
        scalar = np.ndim(f) == 0
        w = TWO_PI * np.atleast_1d(np.asarray(f, dtype=float))
        y = 1j * (w * self.c_shunt - 1.0 / (w * self.l_shunt))
        out = np.where(np.abs(y) == 0.0, np.inf + 0j, 1.0 / np.where(y == 0, 1, y))
        return complex(out[0]) if scalar else out


def _line_mods(f: float, z0_line: float, shunt: ShuntLC | None):
    """Z_ext addend and effective line resistance including the shunt."""
    if shunt is None:
        return 0.0 + 0.0j, z0_line
    z_sh = shunt.impedance(f)
    if not np.isfinite(z_sh):
        return 0.0 + 0.0j, z0_line
    z_ext_add = z_sh / (1.0 + abs(z_sh / z0_line) ** 2)
    z0_eff = z0_line / (1.0 + abs(z0_line / z_sh) ** 2)
    return z_ext_add, z0_eff


def re_input_admittance(z11: complex, z22: complex, z21: complex,
                        coupling: QubitCoupling, f: float,
                        shunt: ShuntLC | None = None) -> float:
    """Re Y_in seen by the qubit through the two-port at frequency f (S).

    Re Y_in = Z0 |Z21|^2 / |(Z11 + Z_qr)(Z22 + Z_ext + Z0)|^2, valid when
    |Z21| << |Z11|, |Z22| (warned otherwise).  A shunt, when present, adds
    Z_shunt/(1 + |Z_shunt/Z0|^2) to Z_ext and divides Z0 by
    (1 + |Z0/Z_shunt|^2).
    """
    if not f > 0:
        raise ValidationError("frequency must be > 0")
    small = min(abs(z11), abs(z22))
    if small > 0 and abs(z21) > 0.1 * small:
        warnings.warn(
            f"|Z21| = {abs(z21):.3g} is not small against |Z11|, |Z22|; the "
            "input-admittance formula degrades", stacklevel=2)
    w = TWO_PI * f
    z_qr = -1j / (w * coupling.c_qr)
    z_ext = -1j / (w * coupling.c_ext)
    z_ext_add, z0_eff = _line_mods(f, coupling.z0_line, shunt)
    z_ext = z_ext + z_ext_add
    denom = abs((z11 + z_qr) * (z22 + z_ext + z0_eff)) ** 2
    return z0_eff * abs(z21) ** 2 / denom


@dataclass(frozen=True)
class T1Result:
    """Purcell-limited relaxation time; notch_limited marks Re Y_in = 0."""

    t1_s: float
    notch_limited: bool = False


# predictions beyond this are numerically indistinguishable from a perfect
# notch (Re Y_in at round-off level) and are flagged as notch-limited
T1_NOTCH_CUTOFF_S = 1e12


def _two_port_at(network, f: float):
    if isinstance(network, LumpedPair):
        return two_port_z(network, f)
    if isinstance(network, CoupledPairGeometry):
        # geometry-direct path: exact distributed Z21, coupler-independent
        # lumped Z11/Z22 (valid at weak coupling)
        z21 = z21_auto(network, f)
        w = TWO_PI * f
        res_r = map_resonator(network.ell_r, network.line)
        res_p = map_resonator(network.ell_p, network.line)
        y11 = 1j * (w * res_r.c - 1.0 / (w * res_r.l))
        y22 = 1j * (w * res_p.c - 1.0 / (w * res_p.l))
        return 1.0 / y11, 1.0 / y22, z21
    raise ValidationError(
        f"unsupported network type {type(network).__name__}; pass a "
        "LumpedPair or CoupledPairGeometry")


def t1_purcell(network, coupling: QubitCoupling, f_q: float | None = None,
               shunt: ShuntLC | None = None) -> T1Result:
    """Purcell-limited relaxation time at the qubit frequency.

    network is a LumpedPair (nodal two-port) or a CoupledPairGeometry
    (distributed Z21 with lumped Z11/Z22).  A vanishing Re Y_in, as at the
    notch, yields an infinite, notch-limited result.
    """
    fq = coupling.f_q if f_q is None else f_q
    z11, z22, z21 = _two_port_at(network, fq)
    re_y = re_input_admittance(z11, z22, z21, coupling, fq, shunt)
    if re_y == 0.0 or coupling.c_q / re_y > T1_NOTCH_CUTOFF_S:
        return T1Result(t1_s=math.inf, notch_limited=True)
    return T1Result(t1_s=coupling.c_q / re_y, notch_limited=False)


def enhancement_factor(f_q: float, f_n: float, f_rp_bar: float) -> float:
    """Purcell-filtering enhancement of the notch over a plain capacitor.

    xi = (1/4) (w_q^2 / Delta_qn^2) (1 - w_n^2/w_bar^2)^2, diverging as the
    qubit approaches the notch; infinite at exact coincidence.
    """
    for name, val in (("f_q", f_q), ("f_n", f_n), ("f_rp_bar", f_rp_bar)):
        if not val > 0:
            raise ValidationError(f"{name} must be > 0")
    if abs(f_q - f_n) > 0.2 * f_n:
        warnings.warn("qubit-notch detuning exceeds 20% of f_n; the "
                      "enhancement expansion degrades", stacklevel=2)
    if f_q == f_n:
        return math.inf
    bracket = 1.0 - (f_n / f_rp_bar) ** 2
    return 0.25 * (f_q / (f_q - f_n)) ** 2 * bracket ** 2


def enhancement_bandwidth(xi_target: float, f_n: float, f_rp_bar: float) -> float:
    """Bandwidth around the notch with enhancement at least xi_target (Hz)."""
    if not xi_target > 0:
        raise ValidationError("xi_target must be > 0")
    return f_n / math.sqrt(xi_target) * abs(1.0 - (f_n / f_rp_bar) ** 2)


def notch_from_xi(xi: float, f_q: float, f_rp_bar: float) -> float:
    """Invert the enhancement factor for the notch frequency below f_q.

    Used to reconstruct per-qubit circuits when only the predicted
    enhancement is known.
    """
    if not xi > 1.0:
        raise ValidationError("xi must exceed 1")

    def fun(f_n):
        return enhancement_factor(f_q, f_n, f_rp_bar) - xi

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return brentq(fun, 0.3 * f_q, f_q * (1.0 - 1e-12), xtol=1.0)


def c_qr_from_g(g_hz: float, f_q: float, f_r: float, c_q: float,
                c_r: float) -> float:
    """Coupling capacitance reproducing a qubit-resonator coupling g (Hz).

    Standard weak-coupling relation g = C_qr sqrt(w_q w_r) / (2 sqrt(C_q C_r)).
    """
    if not g_hz > 0:
        raise ValidationError("g must be > 0")
    return (2.0 * TWO_PI * g_hz * math.sqrt(c_q * c_r)
            / math.sqrt(TWO_PI * f_q * TWO_PI * f_r))


def c_ext_from_kappa(kappa_hz: float, f_p: float, c_p: float,
                     z0_line: float) -> float:
    """Line coupling capacitance reproducing a filter linewidth kappa (Hz).

    kappa = w_p^2 C_ext^2 Z0 / C_p at weak line coupling.
    """
    if not kappa_hz > 0:
        raise ValidationError("kappa must be > 0")
    w_p = TWO_PI * f_p
    return math.sqrt(TWO_PI * kappa_hz * c_p / (w_p ** 2 * z0_line))


def constrained_pair(f_r: float, f_p: float, j_hz: float, f_n: float,
                     z0: float = 66.0) -> LumpedPair:
    """Lumped pair pinned to measured frequencies and coupling.

    Resonators carry the lambda/4 image impedance 4 Z0/pi; the notch branch
    impedance is solved from the exact coupling relation so the pair has
    exchange coupling j_hz and a transmission zero at f_n.
    """
    from .equiv import LumpedResonator, NotchLC

    z_char = 4.0 * z0 / math.pi
    w_r, w_p, w_n = TWO_PI * f_r, TWO_PI * f_p, TWO_PI * f_n
    readout = LumpedResonator(c=1.0 / (z_char * w_r), l=z_char / w_r)
    filt = LumpedResonator(c=1.0 / (z_char * w_p), l=z_char / w_p)
    sq = math.sqrt(w_r * w_p)
    z_n = z_char / (2.0 * TWO_PI * j_hz) * sq * abs(sq / w_n - w_n / sq)
    coupler = NotchLC(c_n=1.0 / (w_n * z_n), l_n=z_n / w_n)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return LumpedPair(readout=readout, filter=filt, coupler=coupler)


def capacitive_twin(pair: LumpedPair, j_hz: float) -> LumpedPair:
    """Capacitively coupled pair with the same resonators and coupling J."""
    from .equiv import EquivCap

    w_r = TWO_PI * pair.readout.f0
    w_p = TWO_PI * pair.filter.f0
    c_t = (2.0 * TWO_PI * j_hz
           / (math.sqrt(pair.readout.z * pair.filter.z) * w_r * w_p))
    return LumpedPair(readout=pair.readout, filter=pair.filter,
                      coupler=EquivCap(c_t))


def mtl_vs_cap_t1_ratio(geom: CoupledPairGeometry, coupling: QubitCoupling,
                        f_q: float | None = None) -> float:
    """Full-circuit T1 ratio of an MTL pair against its equal-J capacitive twin."""
    from .equiv import j_mtl

    pair = equivalent_pair(geom)
    twin = capacitive_twin(pair, j_mtl(geom, exact=True))
    t_mtl = t1_purcell(pair, coupling, f_q)
    t_cap = t1_purcell(twin, coupling, f_q)
    if t_mtl.notch_limited:
        return math.inf
    return t_mtl.t1_s / t_cap.t1_s
