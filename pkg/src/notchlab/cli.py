"""Command-line front end.

Every command is a pure function of its input files and flags: no clock, no
network, deterministic output bytes.  Exit codes: 0 success, 2 validation
error, 3 numerical error.  Sweep commands honour NOTCHLAB_THREADS for
row-parallel evaluation with ordered output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import equiv, metrics, mtl, mux, purcell, specfit
from .device import Device, device_to_dict, load_device
from .errors import NumericalError, ValidationError
from .io import write_csv, write_json

_MHZ = 1e6


def _threads() -> int:
    raw = os.environ.get("NOTCHLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValidationError(f"NOTCHLAB_THREADS must be an integer, got {raw!r}")


def _map_rows(fn, items):
    n = _threads()
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _grid(args) -> np.ndarray:
    if not args.fmax > args.fmin > 0:
        raise ValidationError("need 0 < fmin < fmax")
    if args.points < 2:
        raise ValidationError("points must be >= 2")
    return np.linspace(args.fmin, args.fmax, args.points)


def _load(args) -> Device:
    if not args.device:
        raise ValidationError("--device is required")
    return load_device(args.device)


# ------------------------------------------------------------------ commands

def _cmd_notch(args) -> int:
    dev = _load(args)
    f_n = mtl.notch_frequency(dev.pair(args.pair))
    print(f"{f_n / 1e9:.3f} GHz")
    return 0


def _cmd_z21(args) -> int:
    dev = _load(args)
    geom = dev.pair(args.pair)
    grid = _grid(args)
    guard = args.tol if args.tol else mtl.DEFAULT_POLE_GUARD_HZ
    vals = _map_rows(
        lambda f: mtl.z21_auto(geom, float(f), pole_guard_hz=guard).imag, grid)
    rows = [(float(f), v) for f, v in zip(grid, vals)]
    write_csv(args.out, ["freq_hz", "im_z21_ohm"], rows)
    return 0


def _cmd_design(args) -> int:
    dev = _load(args)
    names = [args.pair] if args.pair else sorted(dev.geometry)
    rows = []
    for name in names:
        g = dev.pair(name)
        if g.is_mtl:
            f_n = mtl.notch_frequency(g)
            j = equiv.j_mtl(g)
        else:
            f_n = float("nan")
            j = equiv.j_capacitive(g, g.c_j)
        rows.append((name, g.f_r, g.f_p, f_n, j))
    header = ["pair", "f_r_hz", "f_p_hz", "f_notch_hz", "j_hz"]
    if args.out:
        write_csv(args.out, header, rows)
    else:
        print(",".join(header))
        for row in rows:
            print(",".join(str(c) if isinstance(c, str) else f"{c:.9g}"
                           for c in row))
    return 0


def _cmd_modes(args) -> int:
    dev = _load(args)
    net = dev.mux_network()
    modes = mux.normal_modes(net, args.state)
    payload = [{"channel": m.channel, "character": m.character,
                "f_hz": m.f_hz, "kappa_hz": m.kappa_hz} for m in modes]
    if args.out:
        write_json(args.out, payload)
    else:
        print(json.dumps(payload, indent=2))
    return 0


def _cmd_reflect(args) -> int:
    dev = _load(args)
    net = dev.mux_network()
    grid = _grid(args)
    gam = mux.gamma_incident(net, args.state, grid)
    rows = [(float(f), g.real, g.imag, float(np.angle(g)))
            for f, g in zip(grid, gam)]
    write_csv(args.out, ["freq_hz", "re_gamma", "im_gamma", "phase_rad"], rows)
    return 0


def _parse_pulse(spec: str) -> mux.DrivePulse:
    if os.path.exists(spec):
        with open(spec, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    else:
        try:
            raw = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"--pulse is neither a file nor JSON: {exc}")
    try:
        f_d = raw["carrier_mhz"] * _MHZ
        if "two_step" in raw:
            ts = raw["two_step"]
            return mux.DrivePulse.two_step(
                f_d, ts["plateau_amplitude"], ts["plateau_duration_ns"] * 1e-9,
                overshoot=ts.get("overshoot", 1.375),
                flat_top=ts.get("flat_top_ns", 14.0) * 1e-9,
                edge=ts.get("edge_ns", 6.0) * 1e-9,
                tail=ts.get("tail_ns", 0.0) * 1e-9)
        if "rectangular" in raw:
            r = raw["rectangular"]
            return mux.DrivePulse.rectangular(
                f_d, r["amplitude"], r["duration_ns"] * 1e-9)
        segs = tuple(
            mux.PulseSegment(s["duration_ns"] * 1e-9,
                             complex(s["amplitude"]),
                             s.get("edge", "flat"))
            for s in raw["segments"])
        return mux.DrivePulse(f_d, segs)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed pulse description: {exc}")


def _trace_rows(tr: mux.FieldTraces):
    n = tr.p.shape[0]
    for k in range(tr.t.size):
        row = [float(tr.t[k])]
        for j in range(n):
            row += [tr.p[j, k].real, tr.p[j, k].imag,
                    tr.r[j, k].real, tr.r[j, k].imag]
        row += [tr.s_out[k].real, tr.s_out[k].imag]
        yield row


def _trace_header(net: mux.MuxNetwork) -> list[str]:
    header = ["time_s"]
    for ch in net.channels:
        header += [f"re_p_{ch.name}", f"im_p_{ch.name}",
                   f"re_r_{ch.name}", f"im_r_{ch.name}"]
    return header + ["re_sout", "im_sout"]


def _cmd_simulate(args) -> int:
    dev = _load(args)
    net = dev.mux_network()
    pulse = _parse_pulse(args.pulse)
    tr = mux.propagate(net, args.state, pulse, args.dt_ns * 1e-9)
    write_csv(args.out, _trace_header(net), _trace_rows(tr))
    return 0


def _cmd_separation(args) -> int:
    dev = _load(args)
    net = dev.mux_network()
    pulse = _parse_pulse(args.pulse)
    res = mux.separation(net, args.pair, pulse, args.dt_ns * 1e-9)
    if args.out:
        rows = [(float(t), float(s)) for t, s in zip(res.t, res.s)]
        write_csv(args.out, ["time_s", "separation"], rows)
    print(f"S_ss = {res.s_ss:.9g}")
    print(f"Gamma_m = {res.gamma_m:.9g} 1/s")
    return 0


def _cmd_purcell(args) -> int:
    dev = _load(args)
    geom = dev.pair(args.pair)
    if not geom.is_mtl:
        raise ValidationError("purcell sweep expects an MTL pair")
    ch = None
    for c in dev.channels:
        if c.name == args.pair:
            ch = c
    qi = dev.qubits.get(args.pair)
    pair = equiv.equivalent_pair(geom)
    j_hz = equiv.j_mtl(geom, exact=True)
    twin = purcell.capacitive_twin(pair, j_hz)
    c_q = (qi.c_q if qi and qi.c_q else None) or args.c_q_ff * 1e-15
    f_q_ref = qi.f_q if qi else 0.5 * (geom.f_r + geom.f_p)
    g_ref = qi.g if qi else 100e6
    kappa_ref = ch.kappa_p if ch else 50e6
    c_qr = purcell.c_qr_from_g(g_ref, f_q_ref, geom.f_r, c_q, pair.readout.c)
    c_ext = purcell.c_ext_from_kappa(kappa_ref, geom.f_p, pair.filter.c,
                                     dev.z0_line)
    shunt = None if args.no_shunt else dev.shunt
    f_n = mtl.notch_frequency(geom)
    f_bar = 0.5 * (geom.f_r + geom.f_p)
    grid = _grid(args)

    def row(f):
        f = float(f)
        coup = purcell.QubitCoupling(c_q=c_q, c_qr=c_qr, c_ext=c_ext,
                                     z0_line=dev.z0_line, f_q=f)
        t_mtl = purcell.t1_purcell(pair, coup, shunt=shunt)
        t_cap = purcell.t1_purcell(twin, coup, shunt=shunt)
        import warnings as _w
        with _w.catch_warnings():
            _w.simplefilter("ignore")
            xi = purcell.enhancement_factor(f, f_n, f_bar)
        return (f, t_mtl.t1_s, t_cap.t1_s, xi)

    write_csv(args.out, ["freq_hz", "t1_mtl_s", "t1_cap_s", "xi"],
              _map_rows(row, grid))
    return 0


def _read_spectrum(path, state: str) -> specfit.PhaseSpectrum:
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1)
    except OSError as exc:
        raise ValidationError(f"cannot read spectrum {path}: {exc}")
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValidationError(f"spectrum {path} must have columns freq_hz,phase_rad")
    return specfit.PhaseSpectrum(freq_hz=data[:, 0], phase_rad=data[:, 1],
                                 state=state)


def _cmd_fit(args) -> int:
    dev = _load(args)
    spec_g = _read_spectrum(args.spec_g, "g")
    spec_e = _read_spectrum(args.spec_e, "e") if args.spec_e else None
    tol = args.tol if args.tol else 1e-12
    cfg = specfit.FitConfig(initial=dev.mux_network(), theta0=args.theta0,
                            tau=args.tau_ns * 1e-9, seed=args.seed,
                            xtol=tol, ftol=tol, gtol=tol)
    result = specfit.fit_reflection(spec_g, spec_e, cfg)
    stderr = {}
    for key, val in result.stderr.items():
        if val is None:
            stderr[key] = None
        elif isinstance(val, float):
            stderr[key] = val
        else:
            stderr[key] = [float(v) for v in val]
    payload = {
        "channels": [{
            "name": c.name,
            "f_r_g_mhz": c.f_r_g / _MHZ,
            "chi_mhz": c.chi / _MHZ,
            "f_p_mhz": c.f_p / _MHZ,
            "j_mhz": c.j / _MHZ,
            "kappa_p_mhz": c.kappa_p / _MHZ,
        } for c in result.network.channels],
        "theta0_rad": result.theta0,
        "tau_s": result.tau,
        "residual": result.residual_norm,
        "converged": result.converged,
        "chi_reported": result.chi_reported,
        "stderr": stderr,
    }
    if args.out:
        write_json(args.out, payload)
    else:
        print(json.dumps(payload, indent=2, default=float))
    return 0


def _cmd_budget(args) -> int:
    snr = args.snr
    counts = None
    if args.shots:
        try:
            raw = np.genfromtxt(args.shots, delimiter=",", skip_header=1,
                                dtype=None, encoding="utf-8")
        except OSError as exc:
            raise ValidationError(f"cannot read shots {args.shots}: {exc}")
        labels = [r[0] for r in raw]
        iq = np.array([[float(r[1]), float(r[2])] for r in raw])
        ana = metrics.shot_analysis(iq, labels, n_train=args.train)
        snr = ana.stats.snr
    if args.counts:
        with open(args.counts, "r", encoding="utf-8") as fh:
            c = json.load(fh)
        counts = metrics.ReadoutCounts(
            no_pulse=np.array(c["no_pulse"]),
            pi_before_second=np.array(c["pi_before_second"]),
            pi_before_first=np.array(c["pi_before_first"]))
    if snr is None:
        raise ValidationError("budget needs --snr or --shots")
    budget = metrics.error_budget(snr, args.tau_meas_ns * 1e-9,
                                  args.tau_buffer_ns * 1e-9,
                                  args.t1_us * 1e-6, counts)
    payload = {
        "snr": budget.snr,
        "eps_sep": budget.eps_sep,
        "eps_cl": budget.eps_cl,
        "eps_cl_q": budget.eps_cl_q,
        "f": budget.f,
        "f_q": budget.f_q,
    }
    if args.out:
        write_json(args.out, payload)
    else:
        print(json.dumps(payload, indent=2))
    return 0


def _cmd_calibrate(args) -> int:
    payload = {}
    if args.stark:
        try:
            data = np.loadtxt(args.stark, delimiter=",", skiprows=1)
        except OSError as exc:
            raise ValidationError(f"cannot read stark file: {exc}")
        f_q, slope, err = metrics.stark_linear_fit(
            [(row[0], row[1]) for row in np.atleast_2d(data)])
        payload["f_q_hz"] = f_q
        payload["slope_hz_per_w"] = slope
        payload["stderr_f_q_hz"] = err
    if args.delta_ac_hz is not None:
        if args.chi_hz is None:
            raise ValidationError("--delta-ac-hz needs --chi-hz")
        payload["n_photons"] = metrics.photons_from_stark(args.delta_ac_hz,
                                                          args.chi_hz)
    if args.p_w is not None:
        if args.rabi_hz is None or args.f_d_hz is None:
            raise ValidationError("--p-w needs --rabi-hz and --f-d-hz")
        omega = metrics.rabi_to_omega(args.rabi_hz, args.transition)
        payload["t1_s"] = metrics.t1_from_drive(args.p_w, omega, args.f_d_hz)
    if not payload:
        raise ValidationError(
            "calibrate needs --stark, --delta-ac-hz or --p-w inputs")
    if args.out:
        write_json(args.out, payload)
    else:
        print(json.dumps(payload, indent=2))
    return 0


def _cmd_device(args) -> int:
    # canonical re-emission; also serves as validation
    dev = _load(args)
    if args.out:
        write_json(args.out, device_to_dict(dev))
    else:
        print(json.dumps(device_to_dict(dev), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="notchlab",
        description="Notch-filtered readout circuits: design, simulation, "
                    "fitting and error budgets.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, pair=False, state=False, sweep=False, out_required=False):
        p.add_argument("--device", required=True, help="device JSON file")
        if pair:
            p.add_argument("--pair", required=True, help="geometry/channel name")
        if state:
            p.add_argument("--state", default=None,
                           help="joint qubit state, e.g. gggg")
        if sweep:
            p.add_argument("--fmin", type=float, required=True)
            p.add_argument("--fmax", type=float, required=True)
            p.add_argument("--points", type=int, default=1001)
        p.add_argument("--out", required=out_required, default=None)
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("notch", help="notch frequency of a pair")
    common(p, pair=True)
    p.set_defaults(fn=_cmd_notch)

    p = sub.add_parser("z21", help="transfer-impedance sweep")
    common(p, pair=True, sweep=True, out_required=True)
    p.set_defaults(fn=_cmd_z21)

    p = sub.add_parser("design", help="per-pair design quantities")
    common(p)
    p.add_argument("--pair", default=None)
    p.set_defaults(fn=_cmd_design)

    p = sub.add_parser("modes", help="normal modes of the network")
    common(p, state=True)
    p.set_defaults(fn=_cmd_modes)

    p = sub.add_parser("reflect", help="reflection-coefficient sweep")
    common(p, state=True, sweep=True, out_required=True)
    p.set_defaults(fn=_cmd_reflect)

    p = sub.add_parser("simulate", help="time-domain field traces")
    common(p, state=True, out_required=True)
    p.add_argument("--pulse", required=True, help="pulse JSON (inline or file)")
    p.add_argument("--dt-ns", type=float, default=0.5)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("separation", help="output-field separation trace")
    common(p, pair=True)
    p.add_argument("--pulse", required=True)
    p.add_argument("--dt-ns", type=float, default=0.5)
    p.set_defaults(fn=_cmd_separation)

    p = sub.add_parser("purcell", help="Purcell-limited T1 sweep")
    common(p, pair=True, sweep=True, out_required=True)
    p.add_argument("--c-q-ff", type=float, default=90.0,
                   help="qubit capacitance in fF when not in the device file")
    p.add_argument("--no-shunt", action="store_true")
    p.set_defaults(fn=_cmd_purcell)

    p = sub.add_parser("fit", help="fit reflection phase spectra")
    common(p)
    p.add_argument("--spec-g", required=True, help="all-g spectrum CSV")
    p.add_argument("--spec-e", default=None, help="all-e spectrum CSV")
    p.add_argument("--theta0", type=float, default=0.0)
    p.add_argument("--tau-ns", type=float, default=0.0)
    p.set_defaults(fn=_cmd_fit)

    p = sub.add_parser("budget", help="readout error budget")
    p.add_argument("--snr", type=float, default=None)
    p.add_argument("--shots", default=None, help="CSV label,i,q")
    p.add_argument("--counts", default=None, help="counts JSON")
    p.add_argument("--train", type=int, default=20000)
    p.add_argument("--tau-meas-ns", type=float, required=True)
    p.add_argument("--tau-buffer-ns", type=float, default=116.0)
    p.add_argument("--t1-us", type=float, required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_budget)

    p = sub.add_parser("calibrate", help="ac-Stark power calibration chain")
    p.add_argument("--stark", default=None, help="CSV power_w,f_q_ac_hz")
    p.add_argument("--delta-ac-hz", type=float, default=None)
    p.add_argument("--chi-hz", type=float, default=None)
    p.add_argument("--p-w", type=float, default=None)
    p.add_argument("--rabi-hz", type=float, default=None)
    p.add_argument("--transition", choices=("ge", "ef"), default="ge")
    p.add_argument("--f-d-hz", type=float, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_calibrate)

    p = sub.add_parser("device", help="validate and canonically re-emit a device")
    common(p)
    p.set_defaults(fn=_cmd_device)

    return ap


def run(argv=None) -> int:
    """Entry point returning the exit code (0 ok, 2 validation, 3 numerical)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        if getattr(args, "state", "unset") is None:
            dev = load_device(args.device)
            args.state = "g" * len(dev.channels)
        return args.fn(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
