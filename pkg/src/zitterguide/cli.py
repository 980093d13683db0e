"""Command-line front end.

Commands: ``modes``, ``dispersion``, ``shifts``, ``matrix`` and ``dynamics``.
Exit status is 0 on success, 2 for invalid input and 3 for numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .dynamics import PairKind, SuperpositionSpec, beat_length, trajectory
from .errors import DomainError, NumericalError, ScopeError, ValidationError
from .medium import Profile, ramp, waveguide_parameter
from .modesolver import ModeIndex, ModeSolution, mode_from_root, lp_label, solve_mode, solve_pairs
from .perturb import (ModeBasis, assemble_matrix, check_conditions, delta_beta_step_closed_form,
                      diagonal_shift, second_order_shift)
from .scenario import Scenario, load_scenario

THREADS_ENV = "ZITTERGUIDE_THREADS"
# |m| scan limit when the caller does not bound it
_M_SCAN_LIMIT = 200


def fmt(value) -> str:
    """Fixed 12-significant-digit scientific format used in all tabular output."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    value = float(value)
    if math.isnan(value):
        return "nan"
    return f"{value:.11e}"


def fmt_complex(value: complex) -> str:
    return f"{fmt(value.real)}{'+' if value.imag >= 0 or math.isnan(value.imag) else '-'}{fmt(abs(value.imag))}j"


def write_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def write_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False, default=_json_default) + "\n"


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return min(8, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValidationError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


# --------------------------------------------------------------------------
# Shared helpers
# --------------------------------------------------------------------------


def _scenario(args) -> Scenario:
    scen = load_scenario(args.scenario)
    return scen.with_overrides(r_value=getattr(args, "R", None),
                               exaggeration=getattr(args, "exaggerate_so", None))


def _profile(args, scen: Scenario) -> Profile:
    if getattr(args, "ramp_width", None) is not None:
        return ramp(args.ramp_width)
    return scen.profile


def _particles(args):
    return ["photon", "electron"] if args.particle == "both" else [args.particle]


def _guided_roots(r_value, m_max):
    """``{m: [(kappa0_a, kappa_tilde0_a), ...]}`` for every guided |m| up to ``m_max`` (or until none)."""
    limit = _M_SCAN_LIMIT if m_max is None else m_max
    out = {}
    for m in range(limit + 1):
        roots = solve_pairs(r_value, m)
        if not roots:
            if m_max is None:
                break
            continue
        out[m] = roots
    return out


def _sign_classes(m_abs):
    # LP_{0n}: one state; LP_{mn}^{+/-}: sigma m_ell = +/-|m|, taken with m_ell = +|m|
    return [(0, 1)] if m_abs == 0 else [(m_abs, 1), (m_abs, -1)]


def _mode_for(args, scen, particle) -> ModeSolution:
    cfg = scen.config(particle)
    return solve_mode(cfg, ModeIndex(args.n, args.m, args.sigma))


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------

MODE_COLUMNS = ["particle", "R", "lp_label", "n", "m_abs", "m_ell", "sigma",
                "kappa0_a", "kappa_tilde0_a", "beta0", "N", "residual"]


def cmd_modes(args):
    scen = _scenario(args)
    records = []
    for particle in _particles(args):
        cfg = scen.config(particle)
        rv = waveguide_parameter(cfg).r_value
        roots = _guided_roots(rv, args.m_max)
        for m in sorted(roots):
            for n, (x, w) in enumerate(roots[m], start=1):
                if args.n_max is not None and n > args.n_max:
                    break
                base = mode_from_root(cfg, rv, ModeIndex(n, m, 1), x, w)
                for m_ell, sigma in _sign_classes(m):
                    mode = base.with_index(m_ell, sigma)
                    records.append((lp_label(mode.index), mode))
    if args.format == "json":
        docs = []
        for label, mode in records:
            doc = mode.to_dict()
            doc["lp_label"] = label
            doc["residual"] = mode.residual()
            docs.append(doc)
        return write_json({"scenario": scen.name, "modes": docs})
    rows = [[m.particle.value, m.r_value, label, m.index.n, m.m_abs, m.index.m_ell, m.index.sigma,
             m.kappa0_a, m.kappa_tilde0_a, m.beta0, m.norm_n, m.residual()] for label, m in records]
    return write_csv(MODE_COLUMNS, rows)


DISPERSION_COLUMNS = ["R", "lp_label", "m_abs", "n", "sigma_m_sign", "photon_uncorrected",
                      "beta0", "beta_photon", "delta_beta_darwin", "delta_beta_so",
                      "beta_corrected_exaggerated", "beta0_electron", "beta_electron"]


def _dispersion_rows(r_value, scen: Scenario, profile: Profile, m_max):
    photon = scen.photon(r_value)
    electron = scen.electron(r_value)
    rows = []
    roots = _guided_roots(r_value, m_max)
    for m in sorted(roots):
        for n, (x, w) in enumerate(roots[m], start=1):
            pbase = mode_from_root(photon, r_value, ModeIndex(n, m, 1), x, w)
            ebase = mode_from_root(electron, r_value, ModeIndex(n, m, 1), x, w)
            for m_ell, sigma in _sign_classes(m):
                idx = ModeIndex(n, m_ell, sigma)
                es = diagonal_shift(ebase.with_index(m_ell, sigma), profile)
                beta_e = ebase.beta0 + es.delta_beta
                if m == 1:
                    # photon LP_1n: no first-order correction in this basis
                    dd = dso = float("nan")
                    beta_p = beta_x = pbase.beta0
                    flag = True
                else:
                    ps = diagonal_shift(pbase.with_index(m_ell, sigma), profile)
                    dd, dso = ps.delta_beta_d, ps.delta_beta_so_signed
                    beta_p = pbase.beta0 + ps.delta_beta
                    beta_x = pbase.beta0 + dd + scen.exaggeration * dso
                    flag = False
                rows.append([r_value, lp_label(idx), m, n, idx.sigma_m_sign, flag, pbase.beta0,
                             beta_p, dd, dso, beta_x, ebase.beta0, beta_e])
    return rows


def cmd_dispersion(args):
    scen = _scenario(args)
    profile = _profile(args, scen)
    sweep = scen.sweep()
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        # map keeps input order, so output does not depend on scheduling
        chunks = list(pool.map(lambda r: _dispersion_rows(float(r), scen, profile, args.m_max), sweep))
    rows = [row for chunk in chunks for row in chunk]
    if args.format == "json":
        return write_json({"scenario": scen.name, "exaggeration": scen.exaggeration,
                           "columns": DISPERSION_COLUMNS,
                           "rows": [[None if isinstance(v, float) and math.isnan(v) else v for v in row]
                                    for row in rows]})
    return write_csv(DISPERSION_COLUMNS, rows)


def _shift_report(mode: ModeSolution, profile: Profile, n_max: int):
    shifts = diagonal_shift(mode, profile)
    doc = {"mode": mode.to_dict(), "lp_label": lp_label(mode.index), "profile": profile.to_dict(),
           "shifts": shifts.to_dict()}
    if profile.is_step:
        doc["closed_form_delta_beta"] = delta_beta_step_closed_form(mode)
    basis = ModeBasis(mode.config, mode.m_abs, n_max)
    doc["conditions"] = check_conditions(mode, profile, n_max, basis=basis).to_dict()
    if basis.radial_count(mode.m_abs) >= 2:
        doc["second_order_delta_beta_sq"] = second_order_shift(mode, profile, n_max, basis=basis)
    else:
        doc["second_order_delta_beta_sq"] = None
    doc["beat_length"] = beat_length(shifts) if shifts.delta_beta_so else None
    return doc


def _flatten(doc, prefix=""):
    out = {}
    for key, val in doc.items():
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            out.update(_flatten(val, name + "."))
        else:
            out[name] = val
    return out


def cmd_shifts(args):
    scen = _scenario(args)
    profile = _profile(args, scen)
    n_max = args.n_max if args.n_max is not None else 4
    reports = [_shift_report(_mode_for(args, scen, p), profile, n_max) for p in _particles(args)]
    if args.format == "json":
        return write_json({"scenario": scen.name, "reports": reports})
    flat = [_flatten(r) for r in reports]
    header = list(flat[0])
    return write_csv(header, [[f.get(h) for h in header] for f in flat])


def cmd_matrix(args):
    scen = _scenario(args)
    profile = _profile(args, scen)
    if args.particle == "both":
        raise ValidationError("matrix needs a single --particle")
    m_max = 4 if args.m_max is None else args.m_max
    n_max = 2 if args.n_max is None else args.n_max
    basis = ModeBasis(scen.config(args.particle), m_max, n_max)
    labels, mat = assemble_matrix(basis, profile)
    names = [lbl.label() for lbl in labels]
    if args.format == "json":
        return write_json({"scenario": scen.name, "particle": args.particle, "labels": names,
                           "real": mat.real, "imag": mat.imag})
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["bra\\ket"] + names)
    for name, row in zip(names, mat):
        writer.writerow([name] + [fmt_complex(v) for v in row])
    return buf.getvalue()


def cmd_dynamics(args):
    scen = _scenario(args)
    profile = _profile(args, scen)
    if args.particle == "both":
        raise ValidationError("dynamics needs a single --particle")
    mode = _mode_for(args, scen, args.particle)
    spec = SuperpositionSpec(mode, PairKind(args.pair), args.theta, args.phi)
    shifts = diagonal_shift(mode, profile)
    if args.steps < 1:
        raise ValidationError("--steps must be >= 1")
    if args.t_max is not None:
        trace = trajectory(spec, shifts, ts=np.linspace(0.0, args.t_max, args.steps + 1), z=args.z)
    else:
        z_max = beat_length(shifts) if args.z_max is None else args.z_max
        trace = trajectory(spec, shifts, zs=np.linspace(0.0, z_max, args.steps + 1))
    header = list(trace)
    if args.format == "json":
        return write_json({"scenario": scen.name, "beat_length": beat_length(shifts),
                           "shifts": shifts.to_dict(), "trace": trace})
    return write_csv(header, zip(*(trace[h] for h in header)))


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zitterguide",
        description="Guided-mode dispersion with Darwin and spin-orbit corrections "
                    "for electrons and photons in cylindrical waveguides.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", default="hene-smf", help="built-in scenario name or JSON file")
    common.add_argument("--R", type=float, help="normalized frequency (rescales the radius)")
    common.add_argument("--m-max", type=int, help="largest |m_ell| to include")
    common.add_argument("--n-max", type=int, help="largest radial index to include")
    common.add_argument("--out", help="write output to this path instead of stdout")
    common.add_argument("--format", choices=["csv", "json"], default=None)
    common.add_argument("--exaggerate-so", type=float, help="spin-orbit exaggeration factor for plotted columns")
    common.add_argument("--ramp-width", type=float, help="replace the step by a linear ramp of this width")
    common.add_argument("--particle", choices=["photon", "electron", "both"], default=None)

    mode_args = argparse.ArgumentParser(add_help=False)
    mode_args.add_argument("--n", type=int, default=1, help="radial index n >= 1")
    mode_args.add_argument("--m", type=int, default=0, help="orbital index m_ell")
    mode_args.add_argument("--sigma", type=int, choices=[-1, 1], default=1)

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("modes", parents=[common], help="list guided modes")
    p.set_defaults(func=cmd_modes, default_format="csv", default_particle="both")
    p = sub.add_parser("dispersion", parents=[common], help="corrected dispersion curves over the R sweep")
    p.set_defaults(func=cmd_dispersion, default_format="csv", default_particle="both")
    p = sub.add_parser("shifts", parents=[common, mode_args], help="first-order shift report for one mode")
    p.set_defaults(func=cmd_shifts, default_format="json", default_particle="photon")
    p = sub.add_parser("matrix", parents=[common], help="perturbation matrix over the mode basis")
    p.set_defaults(func=cmd_matrix, default_format="csv", default_particle="electron")
    p = sub.add_parser("dynamics", parents=[common, mode_args], help="two-state precession trace")
    p.add_argument("--pair", choices=[k.value for k in PairKind], default="sam")
    p.add_argument("--theta", type=float, default=math.pi / 2, help="Bloch polar angle")
    p.add_argument("--phi", type=float, default=0.0, help="Bloch azimuth")
    p.add_argument("--z-max", type=float, help="trace length in metres (default one beat length)")
    p.add_argument("--t-max", type=float, help="trace over time instead, up to this many seconds")
    p.add_argument("--z", type=float, default=0.0, help="fixed position for time traces")
    p.add_argument("--steps", type=int, default=200)
    p.set_defaults(func=cmd_dynamics, default_format="csv", default_particle="photon")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = args.default_format
    if args.particle is None:
        args.particle = args.default_particle
    try:
        text = args.func(args)
        if args.out:
            with open(args.out, "w", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except (ValidationError, DomainError, ScopeError) as exc:
        print(f"zitterguide: error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"zitterguide: numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"zitterguide: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
