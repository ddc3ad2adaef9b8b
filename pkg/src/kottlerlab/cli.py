"""Command-line verification harness and data exporter.

Subcommands
-----------
model       sample a closed-form solution to CSV + horizon JSON
verify-all  run every registered verification family, write reports
shoot       integrate from horizon data, write trajectory + diagnostics
sweep       parameter sweeps in long CSV format for plotting

Global flags: --out-dir, --config (JSON file; flags win over it),tolerance
scaling, worker count for sweeps, and a reserved --seedless flag that is
rejected (nothing in the package uses randomness).

Exit codes: 0 success, 1 I/O failure, 2 invalid parameters/config,
3 verification failure (reports still written), 4 integrator failure.

File contract: CSV is comma-separated with a mandatory header and 17
significant digits (bit round-trip for doubles); JSON is UTF-8 with sorted
keys and no bare NaN/Inf (non-finite values are encoded as strings with a
validity flag).  Files are written to a ``.partial`` path and renamed only
when complete.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import identities, models, shooting, verify
from .errors import (ConstraintBlowup, DomainError, KottlerLabError,
                     MassOutOfRange, StepSizeUnderflow)
from .geometry import RadialProfile
from .models import M_CRIT
from .pseudoradial import PseudoRadialMap

EXIT_OK = 0
EXIT_IO = 1
EXIT_BAD_PARAMS = 2
EXIT_VERIFY_FAILED = 3
EXIT_INTEGRATOR = 4

_CONFIG_KEYS = {
    "out_dir", "tolerance_scale", "threads", "mass", "genus", "r_max",
    "points", "out", "only", "k", "s_max", "tol", "masses", "k_values",
    "genus_list", "mode", "gnuplot",
}


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def _write_text(path: str, text: str) -> None:
    tmp = path + ".partial"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_csv(path: str, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    _write_text(path, "\n".join(lines) + "\n")


def _json_clean(obj):
    if isinstance(obj, dict):
        return {k: _json_clean(v) for k, v in sorted(obj.items())}
    if isinstance(obj, (list, tuple)):
        return [_json_clean(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, np.ndarray):
        return [_json_clean(v) for v in obj.tolist()]
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, float, str)):
        return obj
    return str(obj)


def write_json(path: str, obj) -> None:
    _write_text(path, json.dumps(_json_clean(obj), sort_keys=True, indent=2) + "\n")


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_model(args) -> int:
    if args.mass is None:
        print("error: --mass is required (flag or config)", file=sys.stderr)
        return EXIT_BAD_PARAMS
    try:
        model = models.KottlerModel.create(-1, args.mass, args.genus)
    except MassOutOfRange as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"admissible kappa=-1 masses: m >= -1/(3*sqrt(3)) = {M_CRIT:.17g}",
              file=sys.stderr)
        return EXIT_BAD_PARAMS
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_PARAMS
    r_h = model.horizon.radius
    if args.r_max <= r_h:
        print(f"error: --r-max must exceed the horizon radius {r_h:.17g}", file=sys.stderr)
        return EXIT_BAD_PARAMS
    r = np.linspace(r_h, args.r_max, args.points)
    u = model.u(r)
    f = model.f(r)
    phi = model.sqrt_w(r)          # |grad u|
    w = phi * phi
    # curvature and static residuals from the closed-form quantities,
    # finite at the horizon row
    R_scalar = -4.0 * phi / r - 2.0 * (f - model.kappa) / r ** 2
    phi_r = 1.0 - 2.0 * args.mass / r ** 3
    ric_ss = -2.0 * phi / r
    ric_tt = -phi / r + (model.kappa - u * u) / r ** 2
    res_tensor = np.maximum(np.abs(u * ric_ss - u * phi_r + 3.0 * u),
                            np.abs(u * ric_tt - (u / r) * phi + 3.0 * u))
    res_trace = np.abs(u * phi_r + 2.0 * u * phi / r - 3.0 * u)
    if args.mass <= 0.0:
        pr = PseudoRadialMap(args.mass)
        psi = pr.evaluate_many(u)
        w0 = pr.model_gradient_many(u)
    else:
        psi = np.full_like(r, np.nan)
        w0 = np.full_like(r, np.nan)
    header = ["r", "u", "f", "W", "psi", "W0", "R_scalar",
              "static_residual_1", "static_residual_2"]
    rows = zip(r, u, f, w, psi, w0, R_scalar, res_tensor, res_trace)
    base = os.path.join(args.out_dir, args.out or f"model_m{args.mass:g}")
    try:
        os.makedirs(args.out_dir, exist_ok=True)
        write_csv(base + ".csv", header, rows)
        write_json(base + ".json", {
            "kappa": model.kappa, "mass": model.mass, "genus": model.genus,
            "horizon": {
                "radius": model.horizon.radius,
                "surface_gravity": model.horizon.surface_gravity,
                "degenerate": model.horizon.degenerate,
                "area": model.horizon.area,
            }})
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {base}.csv and {base}.json")
    return EXIT_OK


def cmd_verify_all(args) -> int:
    reports, ok = verify.run_campaign(tolerance_scale=args.tolerance_scale,
                                      only=args.only)
    if args.only and not reports:
        print(f"error: no verification family matches '{args.only}'", file=sys.stderr)
        return EXIT_BAD_PARAMS
    table = verify.format_table(reports)
    try:
        os.makedirs(args.out_dir, exist_ok=True)
        write_json(os.path.join(args.out_dir, "reports.json"),
                   [r.to_json_dict() for r in reports])
        _write_text(os.path.join(args.out_dir, "reports.txt"), table + "\n")
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    print(table)
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def cmd_shoot(args) -> int:
    if args.k is None:
        print("error: --k is required (flag or config)", file=sys.stderr)
        return EXIT_BAD_PARAMS
    if not 0.0 <= args.k <= 1.0:
        print(f"error: surface gravity must lie in [0, 1]; got {args.k:g}",
              file=sys.stderr)
        return EXIT_BAD_PARAMS
    if args.genus < 2:
        print("error: genus must be >= 2", file=sys.stderr)
        return EXIT_BAD_PARAMS
    m0 = models.mass_from_surface_gravity(args.k)
    radius = models.horizon_radius(-1, m0)
    seed = shooting.HorizonSeed(kappa=-1, radius=radius,
                                surface_gravity=args.k, genus=args.genus)
    try:
        shot = shooting.integrate(seed, s_max=args.s_max, tol=args.tol)
    except (StepSizeUnderflow, ConstraintBlowup) as exc:
        print(f"error: integrator failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRATOR
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_PARAMS
    prof = shot.profile
    defect = shooting.constraint_defect(prof.u, prof.du, prof.rho, prof.drho,
                                        prof.kappa)
    mass_samples = 0.5 * (prof.kappa * prof.rho + prof.rho ** 3
                          - prof.u ** 2 * prof.rho)
    diagnostics = dict(shot.diagnostics)
    diagnostics["inferred_mass"] = shot.inferred_mass
    diagnostics["target_mass"] = m0
    if not seed.degenerate:
        model = models.KottlerModel.create(-1, m0, args.genus)
        r_oracle = models.radius_from_arclength(model, prof.grid)
        u_oracle = np.sqrt(model.f(r_oracle))
        diagnostics["closed_form_sup_error"] = float(
            max(np.max(np.abs(prof.u - u_oracle)),
                np.max(np.abs(prof.rho - r_oracle))))
    else:
        diagnostics["closed_form_sup_error"] = None
    base = os.path.join(args.out_dir, args.out or f"shot_k{args.k:g}")
    header = ["s", "u", "du", "rho", "drho", "inferred_mass", "constraint_defect"]
    rows = zip(prof.grid, prof.u, prof.du, prof.rho, prof.drho, mass_samples, defect)
    try:
        os.makedirs(args.out_dir, exist_ok=True)
        write_csv(base + ".csv", header, rows)
        write_json(base + ".json", diagnostics)
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    flag = " [degenerate]" if seed.degenerate else ""
    print(f"wrote {base}.csv and {base}.json{flag}; "
          f"inferred mass {shot.inferred_mass:.12g} (target {m0:.12g})")
    return EXIT_OK


def _parse_float_list(text: str) -> list[float]:
    items = [t for t in (s.strip() for s in text.split(",")) if t]
    return [float(t) for t in items]


def _sweep_mass_pair_point(pair):
    m, m0 = pair
    prof = RadialProfile.from_model(m, genus=2, r_max=10.0, n=512)
    r_h = models.horizon_radius(-1, m)
    spec = identities.AnnulusSpec(profile=prof, r_lo=r_h * (1.0 + 1.0e-6),
                                  r_hi=5.0, comparison_mass=m0)
    rep = identities.divergence_identity_check(spec)
    grad_rep = identities.gradient_comparison(prof, m0)
    return [
        (m, m0, "divergence_residual", rep.residual),
        (m, m0, "divergence_lhs", rep.lhs),
        (m, m0, "w_excess_sup", grad_rep.lhs),
    ]


def _sweep_k_genus_point(pair):
    k, genus = pair
    m0 = models.mass_from_surface_gravity(k)
    mono = identities.mono_check(models.genus_quotient_area(genus), genus)
    area = identities.area_bound_check(models.model_horizon_area(m0, genus), genus, m0)
    return [
        (k, genus, "mono_margin", mono.residual),
        (k, genus, "area_bound_margin", area.residual),
        (k, genus, "horizon_area", models.model_horizon_area(m0, genus)),
    ]


def cmd_sweep(args) -> int:
    try:
        if args.mode == "mass-pair":
            masses = _parse_float_list(args.masses) if args.masses is not None \
                else list(verify.DIVERGENCE_MASSES)
            if not masses:
                print("error: empty mass range", file=sys.stderr)
                return EXIT_BAD_PARAMS
            for m in masses:
                if not M_CRIT - 1.0e-13 <= m <= 0.0:
                    print(f"error: sweep masses must lie in [{M_CRIT:.17g}, 0]",
                          file=sys.stderr)
                    return EXIT_BAD_PARAMS
            pairs = [(m, m0) for m in masses for m0 in masses]
            worker = _sweep_mass_pair_point
            header = ["profile_mass", "comparison_mass", "check", "value"]
            name = "sweep_mass_pair"
        else:
            ks = _parse_float_list(args.k_values) if args.k_values is not None \
                else [0.25, 0.5, 0.75, 1.0]
            genera = [int(g) for g in _parse_float_list(args.genus_list)] \
                if args.genus_list is not None else [2, 3, 4, 5]
            if not ks or not genera:
                print("error: empty sweep range", file=sys.stderr)
                return EXIT_BAD_PARAMS
            for k in ks:
                if not 0.0 <= k <= 1.0:
                    print("error: surface gravities must lie in [0, 1]", file=sys.stderr)
                    return EXIT_BAD_PARAMS
            if any(g < 2 for g in genera):
                print("error: genus values must be >= 2", file=sys.stderr)
                return EXIT_BAD_PARAMS
            pairs = [(k, g) for k in ks for g in genera]
            worker = _sweep_k_genus_point
            header = ["surface_gravity", "genus", "check", "value"]
            name = "sweep_k_genus"
    except ValueError as exc:
        print(f"error: bad sweep parameter: {exc}", file=sys.stderr)
        return EXIT_BAD_PARAMS
    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            chunks = list(pool.map(worker, pairs))
    else:
        chunks = [worker(p) for p in pairs]
    rows = [row for chunk in chunks for row in chunk]
    base = os.path.join(args.out_dir, args.out or name)
    try:
        os.makedirs(args.out_dir, exist_ok=True)
        write_csv(base + ".csv", header, rows)
        if args.gnuplot:
            script = (f"set datafile separator ','\n"
                      f"set key autotitle columnhead\n"
                      f"plot '{os.path.basename(base)}.csv' "
                      f"using 1:4 with points\n")
            _write_text(base + ".gp", script)
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {base}.csv ({len(rows)} rows)")
    return EXIT_OK


# --------------------------------------------------------------------------
# argument plumbing
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kottlerlab",
        description="Verification harness for static vacuum metrics with "
                    "cosmological constant -3.")
    parser.add_argument("--out-dir", default=".", help="output directory")
    parser.add_argument("--config", default=None,
                        help="JSON file with default parameter values "
                             "(flags take precedence)")
    parser.add_argument("--tolerance-scale", type=float, default=1.0,
                        help="multiplies every verification tolerance")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for sweeps")
    parser.add_argument("--seedless", action="store_true",
                        help="reserved; rejected if set (no randomness is used)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_model = sub.add_parser("model", help="sample a closed-form solution")
    p_model.add_argument("--mass", type=float, default=None,
                         help="model mass (may come from --config)")
    p_model.add_argument("--genus", type=int, default=2)
    p_model.add_argument("--r-max", type=float, default=50.0)
    p_model.add_argument("--points", type=int, default=512)
    p_model.add_argument("--out", default=None, help="output basename")
    p_model.set_defaults(func=cmd_model)

    p_verify = sub.add_parser("verify-all", help="run the verification campaign")
    p_verify.add_argument("--only", default=None,
                          help="run only families whose name contains this string")
    p_verify.set_defaults(func=cmd_verify_all)

    p_shoot = sub.add_parser("shoot", help="integrate from horizon data")
    p_shoot.add_argument("--k", type=float, default=None,
                         help="surface gravity in [0, 1]; 0 is the degenerate case")
    p_shoot.add_argument("--genus", type=int, default=2)
    p_shoot.add_argument("--s-max", type=float, default=8.0)
    p_shoot.add_argument("--tol", type=float, default=1.0e-11)
    p_shoot.add_argument("--out", default=None, help="output basename")
    p_shoot.set_defaults(func=cmd_shoot)

    p_sweep = sub.add_parser("sweep", help="parameter sweeps to long CSV")
    p_sweep.add_argument("--mode", choices=("mass-pair", "k-genus"),
                         default="mass-pair")
    p_sweep.add_argument("--masses", default=None,
                         help="comma-separated profile/comparison masses")
    p_sweep.add_argument("--k-values", default=None,
                         help="comma-separated surface gravities")
    p_sweep.add_argument("--genus-list", default=None,
                         help="comma-separated genus values")
    p_sweep.add_argument("--gnuplot", action="store_true",
                         help="also emit a gnuplot script")
    p_sweep.add_argument("--out", default=None, help="output basename")
    p_sweep.set_defaults(func=cmd_sweep)
    # config defaults must reach the subparsers: they parse into a fresh
    # namespace and would otherwise clobber top-level set_defaults values
    parser._kl_subparsers = [p_model, p_verify, p_shoot, p_sweep]
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_BAD_PARAMS if exc.code not in (0, None) else 0
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                conf = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return EXIT_BAD_PARAMS
        if not isinstance(conf, dict):
            print("error: config must be a JSON object", file=sys.stderr)
            return EXIT_BAD_PARAMS
        unknown = set(conf) - _CONFIG_KEYS
        if unknown:
            print(f"error: unknown config keys: {sorted(unknown)}", file=sys.stderr)
            return EXIT_BAD_PARAMS
        parser.set_defaults(**conf)
        for sub in parser._kl_subparsers:
            sub.set_defaults(**conf)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return EXIT_BAD_PARAMS if exc.code not in (0, None) else 0
    if args.seedless:
        print("error: --seedless is reserved; no randomness is used anywhere",
              file=sys.stderr)
        return EXIT_BAD_PARAMS
    if args.tolerance_scale <= 0.0 or not math.isfinite(args.tolerance_scale):
        print("error: --tolerance-scale must be a positive finite number",
              file=sys.stderr)
        return EXIT_BAD_PARAMS
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_BAD_PARAMS
    try:
        return args.func(args)
    except KottlerLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_PARAMS


if __name__ == "__main__":
    sys.exit(main())
