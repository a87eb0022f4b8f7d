"""Command-line front end.

Commands: verify-zoll, extend, flat-potential, rigidity, figures.

Exit codes: 0 success / Zoll verdict; 1 mathematical negative (non-Zoll, or
rigidity regime refusal); 2 invalid input; 3 numerical failure.  Reports are
JSON with the run configuration embedded; per-sample data are CSV with 12
significant digits, byte-identical across reruns of the same configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, dynamics, flatmap, jets, multienergy, profiles, svgplot
from . import spectral_rigidity as spectral
from .errors import ZollkepError
from .geometry import RotSystem, to_besse

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_INVALID = 2
EXIT_NUMERIC = 3

_F12 = "{:.12g}"


@dataclass
class RunConfig:
    command: str
    args: dict
    seed: int
    version: str = __version__


def _config(ns: argparse.Namespace, command: str) -> RunConfig:
    args = {k: v for k, v in vars(ns).items() if k != "func" and v is not None}
    return RunConfig(command, args, getattr(ns, "seed", 0))


def _write_report(path, payload: dict, cfg: RunConfig) -> None:
    payload = dict(payload)
    payload["config"] = asdict(cfg)
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=1))


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_F12.format(v) if isinstance(v, float) else v for v in row])


def _load_deformation(path) -> profiles.DeformationProfile:
    p = profiles.load_profile(path)
    if not isinstance(p, profiles.DeformationProfile):
        raise ValueError(f"{path} is not a deformation profile")
    return p


def _load_seed(path):
    """Seed file: either a profile JSON (kind deformation) or a bare expression."""
    d = json.loads(Path(path).read_text())
    if "kind" in d:
        return profiles.profile_from_dict(d)
    return jets.from_dict(d)


def _parse_energies(text: str):
    """Comma list (3, 15/2, 2.5) or a path to a JSON array of numbers/strings."""
    path = Path(text)
    if path.is_file():
        data = json.loads(path.read_text())
        if not isinstance(data, list):
            raise ValueError(f"ladder file {text} must hold a JSON array")
        tokens = [str(v) for v in data]
    else:
        tokens = text.split(",")
    vals = []
    for tok in tokens:
        tok = tok.strip()
        if "/" in tok:
            vals.append(Fraction(tok))
        else:
            v = float(tok)
            vals.append(int(v) if v == int(v) else v)
    return vals


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_verify_zoll(ns) -> int:
    cfg = _config(ns, "verify-zoll")
    try:
        f = _load_deformation(ns.profile) if ns.profile else profiles.zero_profile()
        if ns.h <= 0:
            raise ValueError("--h must be positive")
    except (ValueError, KeyError, OSError, json.JSONDecodeError, ZollkepError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        sys_ = RotSystem.build(ns.h, f)
        report = dynamics.zoll_scan(sys_, grid_size=ns.grid, method=ns.method,
                                    tol=ns.tol)
    except ZollkepError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if report.failures:
        print(f"numerical failure at c={report.failures[0][0]}: "
              f"{report.failures[0][1]}", file=sys.stderr)
        return EXIT_NUMERIC
    verdict = "zoll" if report.is_zoll else "non-zoll"
    out = Path(ns.out) if ns.out else Path("zoll_report.json")
    _write_report(out, {
        "verdict": verdict,
        "method": report.method,
        "grid": int(ns.grid),
        "h": ns.h,
        "max_dtheta_dev": report.max_dtheta_dev,
        "max_period_dev": report.max_period_dev,
        "energy_drift": report.energy_drift,
        "tolerance": report.tolerance,
    }, cfg)
    rows = []
    for i, c in enumerate(report.c_grid):
        p = report.p_theta_grid[i] if report.p_theta_grid is not None else c / math.sqrt(ns.h)
        rows.append([i, float(c), float(p), float(report.delta_thetas[i]),
                     float(report.periods[i])])
    _write_csv(out.with_suffix(".csv"), ["index", "c", "p_theta", "delta_theta",
                                         "period"], rows)
    print(f"verdict: {verdict}  max|dtheta-2pi|={report.max_dtheta_dev:.3e}  "
          f"max|period-2pi|={report.max_period_dev:.3e}")
    return EXIT_OK if report.is_zoll else EXIT_VERDICT


def cmd_extend(ns) -> int:
    cfg = _config(ns, "extend")
    try:
        energies = _parse_energies(ns.energies)
        if ns.snap_rational is not None:
            energies = multienergy.snap_rational([float(h) for h in energies],
                                                 ns.snap_rational)
            print("snapped energies:", ", ".join(str(h) for h in energies))
        seed = _load_seed(ns.seed_file) if ns.seed_file else None
        diag = multienergy.diagnose_ladder(energies)
    except (ValueError, OSError, json.JSONDecodeError, ZollkepError) as exc:
        print(f"invalid ladder: {exc}", file=sys.stderr)
        return EXIT_INVALID

    if diag.rigid:
        i, j = diag.rigidity_pair
        print(f"rigidity regime: xi_{i} = {float(diag.xis[i - 1]):.12g} and "
              f"xi_{j} = {float(diag.xis[j - 1]):.12g} are rationally independent "
              f"with xi_{i} + xi_{j} < 1; only the zero profile is Zoll at all "
              f"levels (the metric is forced flat)", file=sys.stderr)
        return EXIT_VERDICT

    core = seed if isinstance(seed, profiles.DeformationProfile) else None
    seed_expr = seed if isinstance(seed, jets.SmoothFnExpr) else None
    hs = [float(h) for h in energies]
    try:
        if len(hs) == 2 and ns.mode in ("auto", "pair"):
            case = multienergy.classify_pair(hs[0], hs[1])
            if case is multienergy.Case.CASE3:
                ext = multienergy.extend_pair(hs[0], hs[1], seed=seed_expr)
            else:
                ext = multienergy.extend_pair(hs[0], hs[1], core=core)
        elif ns.mode == "chain" or (ns.mode == "auto" and core is not None and all(
                a >= 2 * b * (1 - 1e-12) for a, b in zip(hs, hs[1:]))):
            ext = multienergy.extend_chain(core, hs)
        else:
            ext = multienergy.build_multi_profile(seed_expr, energies)
            print(f"gamma = {ext.gamma}")
    except ZollkepError as exc:
        print(f"invalid ladder: {exc}", file=sys.stderr)
        return EXIT_INVALID
    out = Path(ns.out) if ns.out else Path("extended_profile.json")
    out.write_text(json.dumps(multienergy.extended_to_dict(ext), sort_keys=True,
                              indent=1))
    residuals = multienergy.verify_F_oddness(ext)
    print("per-level F-oddness residuals:",
          ", ".join(f"{r:.3e}" for r in residuals))
    print(f"wrote {out}")
    return EXIT_OK


def cmd_flat_potential(ns) -> int:
    cfg = _config(ns, "flat-potential")
    try:
        f = _load_deformation(ns.profile) if ns.profile else profiles.zero_profile()
        if ns.h <= 0:
            raise ValueError("--h must be positive")
    except (ValueError, OSError, json.JSONDecodeError, ZollkepError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        cmap = flatmap.solve_conformal_map(ns.h, f)
        pot = flatmap.exotic_potential(cmap)
    except ZollkepError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    out = Path(ns.out) if ns.out else Path("flat_potential.csv")
    pot.export_csv(out)
    pot.export_metadata(out.with_suffix(".json"),
                        profile_ref=str(ns.profile or "kepler"))
    print(f"wrote {out} (sigma_max = {pot.sigma_max:.12g})")
    if ns.verify:
        report = flatmap.verify_flat_zoll(pot, grid_size=ns.grid)
        _write_report(out.with_name(out.stem + "_zoll.json"), {
            "verdict": "zoll" if report.is_zoll else "non-zoll",
            "status": report.status,
            "max_dtheta_dev": report.max_dtheta_dev,
            "max_period_dev": report.max_period_dev,
            "energy_drift": report.energy_drift,
            "tolerance": report.tolerance,
        }, cfg)
        print(f"flat Zoll verdict: {report.status}, "
              f"max|dtheta-2pi| = {report.max_dtheta_dev:.3e}")
        if report.status != "complete":
            return EXIT_NUMERIC
        if not report.is_zoll:
            return EXIT_VERDICT
    return EXIT_OK


def cmd_rigidity(ns) -> int:
    cfg = _config(ns, "rigidity")
    if ns.mode == "matrix":
        try:
            m = spectral.rigidity_matrix(ns.order)
        except ValueError as exc:
            print(f"invalid input: {exc}", file=sys.stderr)
            return EXIT_INVALID
        rep = spectral.check_structure(m)
        out = Path(ns.out) if ns.out else Path(f"rigidity_matrix_{ns.order}.csv")
        spectral.export_csv(m, out)
        _write_report(out.with_suffix(".json"), {
            "order": m.n,
            "upper_triangular": rep.upper_triangular,
            "diagonal_ok": rep.diagonal_ok,
            "kernel_trivial": rep.kernel_trivial,
        }, cfg)
        print(f"N={m.n}: upper-triangular={rep.upper_triangular} "
              f"diagonal=1-2h: {rep.diagonal_ok} kernel trivial: {rep.kernel_trivial}")
        return EXIT_OK if rep.passed else EXIT_VERDICT
    # orbit mode
    try:
        orbit = multienergy.reflection_orbit(ns.xi_kappa, ns.xi_ell,
                                             ns.target_gap, ns.max_steps)
    except ZollkepError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    out = Path(ns.out) if ns.out else Path("reflection_orbit.csv")
    _write_csv(out, ["index", "point"],
               [[i, p] for i, p in enumerate(orbit.points)])
    _write_report(out.with_suffix(".json"), {
        "xi_kappa": orbit.xi_kappa,
        "xi_ell": orbit.xi_ell,
        "gap": orbit.gap,
        "steps": orbit.steps_taken,
        "reason": orbit.reason,
        "stalled": orbit.stalled,
        "gammas": orbit.gammas,
    }, cfg)
    print(f"orbit: {len(orbit.points)} points, gap={orbit.gap:.6g} ({orbit.reason})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------

def _default_core() -> profiles.DeformationProfile:
    fn = jets.scaled(jets.antisymmetrize(jets.normalized_bump(0.2, 0.7)), 0.05)
    return profiles.DeformationProfile(fn.with_domain(-1.0, 1.0))


def _grid_eval(fn, xs):
    return [fn(float(x)) for x in xs]


def _figure1(out_dir: Path) -> list:
    files = []
    # left: two-level extension with xi = 3/2 (ratio 5:2), zero padding
    ext = multienergy.extend_pair(5.0, 2.0, core=_default_core())
    xs = np.linspace(ext.domain[0], 1.0, 1201)
    ft = _grid_eval(ext.ftilde, xs)
    gv = _grid_eval(ext.G, xs)
    path = out_dir / "fig1_left.csv"
    _write_csv(path, ["x", "ftilde", "G"],
               [[float(x), f, g] for x, f, g in zip(xs, ft, gv)])
    svgplot.write_line_chart(out_dir / "fig1_left.svg",
                             [("ftilde", xs, ft), ("G", xs, gv)],
                             title="two-level extension, xi = 3/2", x_label="x")
    files.append(path)
    # right: close-energy pair with xi = 1/2 (ratio 3:2), periodic G
    seed = jets.scaled(jets.normalized_bump(-0.45, -0.05), 0.04)
    ext = multienergy.extend_pair(15.0, 10.0, seed=seed)
    xs = np.linspace(ext.domain[0], 1.0, 1201)
    ft = _grid_eval(ext.ftilde, xs)
    gv = _grid_eval(ext.G, xs)
    path = out_dir / "fig1_right.csv"
    _write_csv(path, ["x", "ftilde", "G"],
               [[float(x), f, g] for x, f, g in zip(xs, ft, gv)])
    svgplot.write_line_chart(out_dir / "fig1_right.svg",
                             [("ftilde", xs, ft), ("G", xs, gv)],
                             title="two-level extension, xi = 1/2", x_label="x")
    files.append(path)
    return files


def _figure2(out_dir: Path) -> list:
    files = []
    ladder = (8.0, 4.0, 2.0, 1.0)
    ext = multienergy.extend_chain(_default_core(), ladder)
    ys = np.linspace(-1.0, 1.0, 801)
    cols = {"core": _grid_eval(ext.restriction().fn, ys)}
    for i in range(2, len(ladder) + 1):
        cols[f"F{i}"] = _grid_eval(multienergy.induced_profile(ext, i).fn, ys)
    path = out_dir / "fig2_left.csv"
    _write_csv(path, ["y"] + list(cols),
               [[float(y)] + [cols[k][j] for k in cols] for j, y in enumerate(ys)])
    svgplot.write_line_chart(out_dir / "fig2_left.svg",
                             [(k, ys, v) for k, v in cols.items()],
                             title="chained extensions on [-1,1]", x_label="y")
    files.append(path)
    # right: the metric quotient of the last level as a function of rho
    h_last = ladder[-1]
    Fi = multienergy.induced_profile(ext, len(ladder))
    rhos = np.linspace(1e-3, 2.0 / h_last - 1e-3, 801)
    quot = [Fi.fn(1.0 - h_last * float(r)) / (2.0 - h_last * float(r)) for r in rhos]
    path = out_dir / "fig2_right.csv"
    _write_csv(path, ["rho", "F_quotient"],
               [[float(r), q] for r, q in zip(rhos, quot)])
    svgplot.write_line_chart(out_dir / "fig2_right.svg",
                             [("F(1-h rho)/(2-h rho)", rhos, quot)],
                             title="last-level metric quotient", x_label="rho")
    files.append(path)
    return files


def _fig34_profile():
    seed = jets.scaled(jets.normalized_bump(0.02, 0.23), 0.04)
    return seed, multienergy.build_multi_profile(seed, (15, 12, 10))


def _figure3(out_dir: Path) -> list:
    files = []
    seed, ext = _fig34_profile()
    xs = np.linspace(-2.0, 1.0, 1201)
    ft = _grid_eval(ext.ftilde, xs)
    sd = _grid_eval(seed, xs)
    path = out_dir / "fig3_left.csv"
    _write_csv(path, ["x", "ftilde", "seed"],
               [[float(x), f, s] for x, f, s in zip(xs, ft, sd)])
    svgplot.write_line_chart(out_dir / "fig3_left.svg",
                             [("ftilde", xs, ft), ("seed", xs, sd)],
                             title="three-level extension, gamma = 1/4", x_label="x")
    files.append(path)
    ys = np.linspace(-1.0, 1.0, 801)
    F2 = _grid_eval(multienergy.induced_profile(ext, 2).fn, ys)
    fv = _grid_eval(ext.restriction().fn, ys)
    path = out_dir / "fig3_right.csv"
    _write_csv(path, ["y", "F2", "f"],
               [[float(y), a, b] for y, a, b in zip(ys, F2, fv)])
    svgplot.write_line_chart(out_dir / "fig3_right.svg",
                             [("F2", ys, F2), ("f", ys, fv)],
                             title="second-level profile vs f", x_label="y")
    files.append(path)
    return files


def _figure4(out_dir: Path) -> list:
    files = []
    _, ext = _fig34_profile()
    ys = np.linspace(-1.0, 1.0, 801)
    F3 = _grid_eval(multienergy.induced_profile(ext, 3).fn, ys)
    fv = _grid_eval(ext.restriction().fn, ys)
    path = out_dir / "fig4_left.csv"
    _write_csv(path, ["y", "F3", "f"],
               [[float(y), a, b] for y, a, b in zip(ys, F3, fv)])
    svgplot.write_line_chart(out_dir / "fig4_left.svg",
                             [("F3", ys, F3), ("f", ys, fv)],
                             title="third-level profile vs f", x_label="y")
    files.append(path)
    xs = np.linspace(-2.0, 1.0, 1201)
    gv = _grid_eval(ext.G, xs)
    path = out_dir / "fig4_right.csv"
    _write_csv(path, ["x", "G"], [[float(x), g] for x, g in zip(xs, gv)])
    svgplot.write_line_chart(out_dir / "fig4_right.svg", [("G", xs, gv)],
                             title="G = ftilde/(1-x^2)", x_label="x")
    files.append(path)
    return files


def cmd_figures(ns) -> int:
    out_dir = Path(ns.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    builders = {1: _figure1, 2: _figure2, 3: _figure3, 4: _figure4}
    which = sorted(builders) if ns.which is None else [ns.which]
    if any(w not in builders for w in which):
        print(f"unknown figure id {ns.which}", file=sys.stderr)
        return EXIT_INVALID
    for w in which:
        for path in builders[w](out_dir):
            print(f"wrote {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="zollkep",
        description="Rotationally invariant Zoll deformations of the Kepler "
                    "problem: construction and numerical verification.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-zoll", help="scan return angles at one energy")
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--profile", help="deformation profile JSON (default: Kepler)")
    p.add_argument("--method", choices=("quadrature", "integration"),
                   default="quadrature")
    p.add_argument("--grid", type=int, default=32)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify_zoll)

    p = sub.add_parser("extend", help="multi-energy reflection extension")
    p.add_argument("--energies", required=True,
                   help="comma list, e.g. 15,12,10 or 15/2,3,1")
    p.add_argument("--seed-file", dest="seed_file",
                   help="core profile JSON or bare seed expression JSON")
    p.add_argument("--mode", choices=("auto", "pair", "chain", "periodic"),
                   default="auto")
    p.add_argument("--snap-rational", dest="snap_rational", type=float,
                   default=None, metavar="EPS",
                   help="replace energies by nearby rationals within EPS")
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("flat-potential", help="exotic flat-plane potential")
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--profile", help="deformation profile JSON (default: Kepler)")
    p.add_argument("--out", default=None)
    p.add_argument("--verify", action="store_true")
    p.add_argument("--grid", type=int, default=12)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_flat_potential)

    p = sub.add_parser("rigidity", help="truncated operator / reflection orbit")
    p.add_argument("--mode", choices=("matrix", "orbit"), default="matrix")
    p.add_argument("--order", type=int, default=40)
    p.add_argument("--xi-kappa", dest="xi_kappa", type=float)
    p.add_argument("--xi-ell", dest="xi_ell", type=float)
    p.add_argument("--target-gap", dest="target_gap", type=float, default=0.01)
    p.add_argument("--max-steps", dest="max_steps", type=int, default=100000)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_rigidity)

    p = sub.add_parser("figures", help="regenerate figure datasets (CSV + SVG)")
    p.add_argument("--which", type=int, default=None, choices=(1, 2, 3, 4))
    p.add_argument("--out-dir", dest="out_dir", default="figures")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_figures)
    return ap


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    return ns.func(ns)


if __name__ == "__main__":
    raise SystemExit(main())
