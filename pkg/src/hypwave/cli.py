"""Experiment driver: reproducible check suites with CSV reports.

Subcommands select a suite; a TOML config file adjusts parameters.  Every
run writes ``report.csv`` (fixed header, 17-significant-digit floats) and a
``run-manifest.json`` echoing the config, library versions, and the report
checksum, so identical config and seed reproduce byte-identical output.
Exit status is 0 iff every report row passes, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys

try:
    import tomllib
except ModuleNotFoundError:                       # Python < 3.11
    import tomli as tomllib

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .estimates import StrichartzPair, decay_fit, dispersion_ratio, strichartz_norm
from .geometry import Dimension, RadialField, RadialGrid
from .kernels import (DEFAULT_OSC_CONFIG, KernelRequest, kernel_point,
                      oscillatory_tail_integral, oscillatory_tail_integral_damped)
from .nls import NlsConfig, blowup_experiment, save_frame, small_mass_threshold
from .profiles import sample_profile
from .propagator import calibrate_plan, make_plan
from .specfun import fk_bound_check, fk_table, spherical_function, \
    spherical_function_integral
from .transform import forward_transform, inverse_transform, matched_spectral_grid

CSV_HEADER = "suite,check,n,value,reference,ratio,tolerance,pass"


@dataclass(frozen=True)
class ReportRow:
    suite: str
    check: str
    n: int
    value: float
    target: float
    tolerance: float
    passed: bool

    @property
    def ratio(self) -> float:
        return self.value / self.target if self.target != 0 else float("nan")

    def csv(self) -> str:
        return (f"{self.suite},{self.check},{self.n},{self.value:.17g},"
                f"{self.target:.17g},{self.ratio:.17g},{self.tolerance:.17g},"
                f"{self.passed}")


class ConfigError(Exception):
    pass


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        return tomllib.loads(p.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc


# --- suites --------------------------------------------------------------------

def _suite_fk(cfg: dict) -> list[ReportRow]:
    import mpmath

    m = int(cfg.get("m", 3))
    rows = []
    table = fk_table(m)
    mpmath.mp.dps = 40
    worst = 0.0
    for s in (0.1, 0.7, 2.3, 5.0):
        for t in (0.3, 1.0, 3.0):
            def f(x):
                return mpmath.e ** (1j * x**2 / (4 * t))

            g = f
            for _ in range(m):
                g = (lambda gg: lambda x: mpmath.diff(gg, x) / mpmath.sinh(x))(g)
            ref = complex(g(mpmath.mpf(s)))
            got = table.expansion(s, t)
            worst = max(worst, abs(got - ref) / abs(ref))
    rows.append(ReportRow("fk", f"ladder-expansion-m{m}", 0, worst, 0.0, 1e-6,
                          worst < 1e-6))
    rep0 = fk_bound_check(m, 0)
    rep1 = fk_bound_check(m, 1)
    finite = rep0.all_finite and rep1.all_finite
    rows.append(ReportRow("fk", f"bound-scan-finite-m{m}", 0,
                          max(rep0.constants + rep1.constants), 0.0,
                          float("inf"), finite))
    lead = rep0.constants[-1]
    rows.append(ReportRow("fk", f"leading-constant-m{m}", 0, lead, 1.0, 1e-10,
                          abs(lead - 1.0) < 1e-10))
    return rows


def _suite_spherical(cfg: dict) -> list[ReportRow]:
    n = int(cfg.get("n", 3))
    dim = Dimension(n)
    lams = np.linspace(0.3, 6.0, 20)
    rhos = np.linspace(0.1, 5.0, 20)
    ratios = []
    for lam in lams:
        phi = spherical_function(dim, float(lam), rhos)
        oracle = spherical_function_integral(dim, float(lam), rhos)
        ratios.append(np.real(oracle) / phi)
    ratios = np.asarray(ratios)
    spread = float((np.max(ratios) - np.min(ratios)) / np.abs(np.mean(ratios)))
    return [ReportRow("spherical", f"constancy-ratio-n{n}", n, spread, 0.0,
                      1e-6, spread < 1e-6)]


def _suite_kernel(cfg: dict) -> list[ReportRow]:
    rows = []
    for (t, rho) in ((1.0, 2.0), (0.3, 0.5)):
        a = oscillatory_tail_integral(t, rho)
        b = oscillatory_tail_integral_damped(t, rho)
        err = abs(a - b) / abs(a)
        rows.append(ReportRow("kernel", f"dual-quadrature-t{t}-rho{rho}", 0,
                              err, 0.0, 1e-4, err < 1e-4))
    for n in (2, 3, 4, 5):
        dim = Dimension(n)
        kp = kernel_point(KernelRequest(dim, 0.7, 1.3))
        km = kernel_point(KernelRequest(dim, -0.7, 1.3))
        err = abs(km - np.conj(kp)) / abs(kp)
        rows.append(ReportRow("kernel", f"conjugation-n{n}", n, err, 0.0,
                              1e-12, err < 1e-12))
    return rows


def _decay_grids(cfg: dict):
    r_max = float(cfg.get("r_max", 30.0))
    n_points = int(cfg.get("n_points", 512))
    return r_max, n_points


def _suite_decay(cfg: dict) -> list[ReportRow]:
    r_max, n_points = _decay_grids(cfg)
    window_small = tuple(cfg.get("window_small", (0.5, 3.0)))
    window_large = tuple(cfg.get("window_large", (2.0, 8.0)))
    if window_small[0] >= window_small[1] or window_large[0] >= window_large[1]:
        raise ConfigError("decay windows must satisfy t_min < t_max")
    rows = []
    rg3 = RadialGrid(Dimension(3), r_max, n_points)
    plan3 = make_plan(rg3)
    plan3k = calibrate_plan(make_plan(rg3, route="kernel_closed3"))
    u3 = sample_profile(rg3, "gaussian", sigma=0.4)
    fit = decay_fit(u3, "sup", window_small, plan3)
    rows.append(ReportRow("decay", "sup-small-time-n3", 3, fit.exponent, -1.5,
                          0.1, abs(fit.exponent + 1.5) < 0.1))
    u3w = sample_profile(rg3, "gaussian", sigma=0.5)
    fit = decay_fit(u3w, "sup", window_large, plan3k)
    rows.append(ReportRow("decay", "sup-large-time-n3", 3, fit.exponent, -1.5,
                          0.1, abs(fit.exponent + 1.5) < 0.1))
    fitw = decay_fit(u3, "weighted-sup", window_small, plan3)
    rows.append(ReportRow("decay", "weighted-sup-small-time-n3", 3,
                          fitw.exponent, -1.5, 0.1,
                          abs(fitw.exponent + 1.5) < 0.1))
    ratios = [dispersion_ratio(u3w, float(t), plan3)
              for t in np.geomspace(0.01, 1.0, 8)]
    cap = float(cfg.get("ratio_cap", 10.0))
    rows.append(ReportRow("decay", "dispersion-ratio-bounded-n3", 3,
                          max(ratios), cap, 0.0, max(ratios) < cap))
    rg2 = RadialGrid(Dimension(2), 16.0, int(cfg.get("n_points_2d", 320)))
    plan2 = make_plan(rg2, lam_max=float(cfg.get("lam_max_2d", 14.0)))
    u2 = sample_profile(rg2, "gaussian", sigma=0.35)
    fit2 = decay_fit(u2, "sup", (0.15, 0.7), plan2, tail_tol=1e-4)
    rows.append(ReportRow("decay", "sup-small-time-n2", 2, fit2.exponent,
                          -1.0, 0.1, abs(fit2.exponent + 1.0) < 0.1))
    return rows


def _suite_strichartz(cfg: dict, jobs: int = 1) -> list[ReportRow]:
    from concurrent.futures import ThreadPoolExecutor

    r_max, n_points = _decay_grids(cfg)
    rg = RadialGrid(Dimension(3), r_max, n_points)
    plan = make_plan(rg)
    cap = float(cfg.get("ratio_cap", 10.0))
    rows = []
    profiles = [("gaussian", {"sigma": 0.7}), ("bump", {"radius": 2.0}),
                ("ring", {})]
    pairs = ((2.0, 6.0), (4.0, 3.0), (np.inf, 2.0))
    tasks = [(p, q, name, kw) for (p, q) in pairs for (name, kw) in profiles]

    def one(task):
        p, q, name, kw = task
        u0 = sample_profile(rg, name, **kw)
        return strichartz_norm(u0, StrichartzPair(p, q, Dimension(3)), 1.0, plan)

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        norms = list(pool.map(one, tasks))
    for i, (p, q) in enumerate(pairs):
        worst = max(norms[3 * i: 3 * i + 3])
        label = "inf" if np.isinf(p) else f"{p:g}"
        if np.isinf(p) and q == 2:
            rows.append(ReportRow("strichartz", f"pair-{label}-{q:g}", 3,
                                  worst, 1.0, 1e-6, abs(worst - 1.0) < 1e-6))
        else:
            rows.append(ReportRow("strichartz", f"pair-{label}-{q:g}", 3,
                                  worst, cap, 0.0, worst < cap))
    return rows


def _suite_nls(cfg: dict, out_dir: Path) -> list[ReportRow]:
    from .estimates import gagliardo_nirenberg_scan

    profile = cfg.get("profile", "gaussian")
    if profile not in ("gaussian", "bump", "ring"):
        raise ConfigError(f"unknown profile {profile!r}")
    rg = RadialGrid(Dimension(3), float(cfg.get("r_max", 12.0)),
                    int(cfg.get("n_points", 512)))
    plan = make_plan(rg)
    p = 1.0 + 4.0 / 3.0
    rows = []
    u0 = sample_profile(rg, profile, amplitude=float(cfg.get("amplitude", 4.0)),
                        sigma=1.0) if profile == "gaussian" else \
        sample_profile(rg, profile)
    ncfg = NlsConfig(p=p, dt=float(cfg.get("dt", 1e-4)),
                     t_final=float(cfg.get("t_final", 1.0)),
                     snapshot_stride=10, blowup_gradient_threshold=50.0)
    v = blowup_experiment(u0, plan, ncfg)
    rows.append(ReportRow("nls", "criterion-blowup", 3,
                          1.0 if v.verdict == "blowup" else 0.0, 1.0, 0.0,
                          v.verdict == "blowup"))
    snap_dir = out_dir / "snapshots"
    snap_dir.mkdir(exist_ok=True)
    save_frame(u0, 0.0, snap_dir / "blowup-initial.bin")
    const = gagliardo_nirenberg_scan(rg, p)
    thr = small_mass_threshold(rg.dim, const)
    scale = 0.9 * thr / u0.l2_norm()
    u_small = RadialField(rg, scale * u0.values)
    gcfg = NlsConfig(p=p, dt=5e-3, t_final=float(cfg.get("t_global", 10.0)),
                     snapshot_stride=100, blowup_gradient_threshold=50.0)
    vg = blowup_experiment(u_small, plan, gcfg)
    rows.append(ReportRow("nls", "small-mass-global", 3,
                          1.0 if vg.verdict == "global" else 0.0, 1.0, 0.0,
                          vg.verdict == "global"))
    save_frame(u_small, 0.0, snap_dir / "global-initial.bin")
    return rows


def _suite_kernel_table(cfg: dict, out_dir: Path) -> list[ReportRow]:
    n = int(cfg.get("n", 3))
    dim = Dimension(n)
    ts = cfg.get("times", [0.25, 0.5, 1.0])
    rhos = cfg.get("radii", list(np.linspace(0.2, 6.0, 30)))
    lines = ["n,t,rho,re,im"]
    finite = True
    for t in ts:
        for rho in rhos:
            val = kernel_point(KernelRequest(dim, float(t), float(rho)),
                               DEFAULT_OSC_CONFIG)
            finite = finite and bool(np.isfinite(val))
            lines.append(f"{n},{float(t):.17g},{float(rho):.17g},"
                         f"{val.real:.17g},{val.imag:.17g}")
    (out_dir / "kernel-table.csv").write_text("\n".join(lines) + "\n")
    return [ReportRow("kernel-table", f"values-finite-n{n}", n,
                      float(len(lines) - 1), float(len(ts) * len(rhos)), 0.0,
                      finite and len(lines) - 1 == len(ts) * len(rhos))]


# --- driver --------------------------------------------------------------------

def _write_outputs(rows: list[ReportRow], out_dir: Path, args,
                   config: dict) -> None:
    rows = sorted(rows, key=lambda r: (r.suite, r.check, r.n))
    csv_text = CSV_HEADER + "\n" + "\n".join(r.csv() for r in rows) + "\n"
    (out_dir / "report.csv").write_text(csv_text)
    manifest = {
        "package_version": __version__,
        "numpy_version": np.__version__,
        "command": args.command,
        "seed": args.seed,
        "config": config,
        "report_sha256": hashlib.sha256(csv_text.encode()).hexdigest(),
    }
    (out_dir / "run-manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="hypwave",
        description="Linear and nonlinear Schrodinger experiments on "
                    "hyperbolic space (radial)")
    parser.add_argument("--config", default=None, help="TOML config file")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--jobs", type=int, default=1,
                        help="worker count for suite fan-out")
    parser.add_argument("--seed", type=int, default=0,
                        help="recorded in the manifest; suites are deterministic")
    sub = parser.add_subparsers(dest="command", required=True)
    p_verify = sub.add_parser("verify", help="identity suites")
    p_verify.add_argument("--suite", choices=["fk", "spherical", "kernel"],
                          required=True)
    p_verify.add_argument("--m", type=int, default=None)
    p_verify.add_argument("--n", type=int, default=None)
    sub.add_parser("decay", help="dispersion decay fits")
    sub.add_parser("strichartz", help="weighted space-time norms")
    sub.add_parser("nls", help="blow-up / global experiment")
    p_kt = sub.add_parser("kernel-table", help="tabulate the point kernel")
    p_kt.add_argument("--n", type=int, default=None)

    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "verify":
            section = dict(config.get("verify", {}))
            if getattr(args, "m", None) is not None:
                section["m"] = args.m
            if getattr(args, "n", None) is not None:
                section["n"] = args.n
            suite_fn = {"fk": _suite_fk, "spherical": _suite_spherical,
                        "kernel": _suite_kernel}[args.suite]
            rows = suite_fn(section)
        elif args.command == "decay":
            rows = _suite_decay(dict(config.get("decay", {})))
        elif args.command == "strichartz":
            rows = _suite_strichartz(dict(config.get("strichartz", {})),
                                     jobs=args.jobs)
        elif args.command == "nls":
            rows = _suite_nls(dict(config.get("nls", {})), out_dir)
        elif args.command == "kernel-table":
            section = dict(config.get("kernel_table", {}))
            if getattr(args, "n", None) is not None:
                section["n"] = args.n
            rows = _suite_kernel_table(section, out_dir)
        else:                                   # pragma: no cover
            raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    _write_outputs(rows, out_dir, args, config)
    for r in sorted(rows, key=lambda r: (r.suite, r.check, r.n)):
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.suite}/{r.check}: value={r.value:.6g} "
              f"target={r.target:.6g} tol={r.tolerance:.3g}")
    return 0 if all(r.passed for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
