"""Command-line front end: ``boundedjumps {roots,density,scale,validate}``.

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 numerical failure, 4 unsupported model case.
"""

from __future__ import annotations

import argparse
import io
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np
from scipy.integrate import simpson

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .errors import BoundedJumpsError, UnsupportedModelError
from .models import LatticeCompoundPoissonModel, SpectrallyNegativeModel
from .oracles import (GENERATOR_NAME, McConfig, bromwich_scale, closed_form_poisson, ks_statistic,
                      simulate_extrema)
from .roots import RootConfig, asymptotic_seed, assemble_roots, verify_simple
from .scale import build_scale_context, scale_function, scale_laplace_check
from .wienerhopf import compute_residues, phi_minus, phi_plus

log = logging.getLogger("boundedjumps")

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_NUMERIC, EXIT_UNSUPPORTED = 0, 1, 2, 3, 4


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


class CsvOut:
    """CSV text with a header row and a trailing ``#`` metadata block."""

    def __init__(self, header):
        self.buf = io.StringIO()
        self.buf.write(",".join(header) + "\n")
        self.meta = []

    def row(self, *vals):
        self.buf.write(",".join(_fmt(v) for v in vals) + "\n")

    def note(self, key, value):
        self.meta.append((key, value))

    def text(self):
        tail = "".join(f"# {k}={_fmt(v)}\n" for k, v in self.meta)
        return self.buf.getvalue() + tail


def _write(out_dir: Path, name: str, csv: CsvOut, cfg: RunConfig):
    csv.meta.insert(0, ("config_sha256", cfg.text_hash))
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(csv.text())
    return path


def _dist_to_seed(rs, count):
    """Seeds aligned with root indices (seed(n - m) next to zeta_n); None without a profile."""
    if rs.profile is None:
        return None
    n = np.arange(1, count + 1)
    j = n - rs.seed_offset
    seeds = np.full(count, np.nan + 1j * np.nan)
    ok = j >= 1
    seeds[ok] = asymptotic_seed(rs.profile, j[ok])
    return seeds


def cmd_roots(cfg: RunConfig, out_dir: Path, args):
    model = cfg.model()
    t0 = time.perf_counter()
    rs = assemble_roots(model, cfg.q, cfg.n_roots, RootConfig())
    elapsed = time.perf_counter() - t0
    seeds = _dist_to_seed(rs, len(rs.zetas))
    roots_csv = CsvOut(["n", "re", "im", "abs_residual", "dist_to_seed"])
    res0 = abs(float(np.real(model.psi(rs.zeta0))) - cfg.q)
    roots_csv.row(0, rs.zeta0, 0.0, res0, "")
    for i, z in enumerate(rs.zetas, start=1):
        d = "" if seeds is None or np.isnan(seeds[i - 1].real) else abs(z - seeds[i - 1])
        roots_csv.row(i, z.real, z.imag, rs.abs_residuals[i - 1], d)
    seeds_csv = CsvOut(["n", "re", "im"])
    if seeds is not None:
        for i, s in enumerate(seeds, start=1):
            if not np.isnan(s.real):
                seeds_csv.row(i, s.real, s.imag)
    for c in (roots_csv, seeds_csv):
        c.note("q", cfg.q)
        c.note("n_roots", len(rs.zetas))
        c.note("seed_offset", rs.seed_offset)
        c.note("relative_residual_sup", rs.residual_sup)
        if seeds is None:
            c.note("seeds", "none (no asymptotic profile; roots are exact lattice roots)")
        c.note("timing_roots_s", elapsed)
    _write(out_dir, "roots.csv", roots_csv, cfg)
    _write(out_dir, "seeds.csv", seeds_csv, cfg)
    print(f"zeta0 = {rs.zeta0!r}; {len(rs.zetas)} roots in {elapsed:.3f} s; seed offset m = {rs.seed_offset}")
    return EXIT_OK


def _require_grid(cfg, positive=True):
    if cfg.grid is None:
        raise ConfigError("grid.x_min, grid.x_max and grid.n_points are required")
    if positive and not cfg.grid.x_min > 0:
        raise ConfigError("grid.x_min: must be > 0 (the density is defined for x > 0)")
    return cfg.grid.points()


def cmd_density(cfg: RunConfig, out_dir: Path, args):
    model = cfg.model()
    if isinstance(model, SpectrallyNegativeModel):
        raise ConfigError("density needs a model with positive jumps, not a spectrally negative one")
    if getattr(model, "has_atom_at_zero", False):
        raise UnsupportedModelError("the supremum has an atom at 0 for this model; density refused")
    x = _require_grid(cfg)
    t0 = time.perf_counter()
    rs = assemble_roots(model, cfg.q, cfg.n_roots, RootConfig())
    t1 = time.perf_counter()
    sd = compute_residues(model, rs, cfg.n_roots)
    p, err = sd.density(x, with_error=True)
    t2 = time.perf_counter()
    mass_grid = float(simpson(p, x=x))
    mass = mass_grid + float(sd.cdf(x[0]))
    csv = CsvOut(["x", "p", "trunc_est"])
    for xi, pi, ei in zip(x, p, err):
        csv.row(float(xi), float(pi), float(ei))
    csv.note("q", cfg.q)
    csv.note("n_pairs", cfg.n_roots)
    csv.note("mass_simpson_grid", mass_grid)
    csv.note("mass", mass)
    csv.note("series_total_mass", sd.mass)
    csv.note("timing_roots_s", t1 - t0)
    csv.note("timing_density_s", t2 - t1)
    _write(out_dir, "density.csv", csv, cfg)
    print(f"mass = {mass:.6f} (Simpson over grid {mass_grid:.6f} plus F(x_min)); "
          f"roots {t1 - t0:.3f} s, density {t2 - t1:.3f} s")
    return EXIT_OK


def cmd_scale(cfg: RunConfig, out_dir: Path, args):
    model = cfg.model()
    if not isinstance(model, SpectrallyNegativeModel):
        raise ConfigError("model.family: spectrally negative required for the scale function")
    x = _require_grid(cfg, positive=False)
    t0 = time.perf_counter()
    ctx = build_scale_context(model, cfg.q, cfg.n_roots)
    t1 = time.perf_counter()
    w, err = scale_function(ctx, x, with_error=True)
    t2 = time.perf_counter()
    csv = CsvOut(["x", "Wq", "trunc_est"])
    for xi, wi, ei in zip(x, w, err):
        csv.row(float(xi), float(wi), float(ei))
    csv.note("q", cfg.q)
    csv.note("phi_q", ctx.phi_q)
    csv.note("n_terms", cfg.n_roots)
    csv.note("timing_roots_s", t1 - t0)
    csv.note("timing_scale_s", t2 - t1)
    _write(out_dir, "scale.csv", csv, cfg)
    print(f"Phi(q) = {ctx.phi_q!r}; roots {t1 - t0:.3f} s, {len(x)} values {t2 - t1:.3f} s")
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def _is_poisson(model):
    return (isinstance(model, LatticeCompoundPoissonModel) and model.is_pure_jump
            and list(model.masses) == [1] and model.masses[1] == 1.0)


def cmd_validate(cfg: RunConfig, out_dir: Path, args):
    model = cfg.model()
    checks = []

    def check(name, value, limit, ok):
        checks.append((name, value, limit, "PASS" if ok else "FAIL"))

    timings = {}
    t0 = time.perf_counter()
    if isinstance(model, SpectrallyNegativeModel):
        ctx = build_scale_context(model, cfg.q, cfg.n_roots)
        timings["timing_roots_s"] = time.perf_counter() - t0
        rs = ctx.dual_roots
        check("root_relative_residual", rs.residual_sup, 1e-9, rs.residual_sup <= 1e-9)
        rep = verify_simple(model.dual(), rs)
        check("min_abs_psi_prime", rep.min_prime, rep.floor, rep.ok)
        for dz in (1.0, 2.0, 5.0):
            num, ana = scale_laplace_check(ctx, ctx.phi_q + dz)
            gap = abs(num / ana - 1)
            check(f"laplace_gap_z=Phi+{dz:g}", gap, 1e-3, gap <= 1e-3)
        kw = {k: v for k, v in cfg.bromwich.items()}
        t1 = time.perf_counter()
        for x in (0.5, 1.5, 3.0):
            b = bromwich_scale(model, cfg.q, x, phi_q=ctx.phi_q, **kw)
            gap = abs(b - float(scale_function(ctx, x)))
            check(f"bromwich_gap_x={x:g}", gap, 1e-4, gap <= 1e-4)
        timings["timing_bromwich_s"] = time.perf_counter() - t1
    else:
        rs = assemble_roots(model, cfg.q, cfg.n_roots, RootConfig())
        timings["timing_roots_s"] = time.perf_counter() - t0
        check("root_relative_residual", rs.residual_sup, 1e-9, rs.residual_sup <= 1e-9)
        rep = verify_simple(model, rs)
        check("min_abs_psi_prime", rep.min_prime, rep.floor, rep.ok)
        if _is_poisson(model):
            ref = closed_form_poisson(cfg.q, model.k)
            exact = np.array([ref.root(n) for n in range(1, len(rs.zetas) + 1)])
            err = float(max(np.max(np.abs(rs.zetas - exact)), abs(rs.zeta0 - ref.root(0))))
            check("poisson_root_error", err, 1e-10, err <= 1e-10)
            zs = np.array([0.5, 2.0, 5.0])
            perr = float(np.max(np.abs(phi_plus(rs, zs) - ref.phi_plus_exact(zs))))
            check("poisson_phi_plus_error", perr, 1e-6, perr <= 1e-6)
        worst = 0.0
        for zr in (0.3, 1.0, 3.0):
            lhs = phi_plus(rs, -1j * zr) * phi_minus(model, rs, 1j * zr)
            rhs = cfg.q / (cfg.q - model.psi(1j * zr))
            worst = max(worst, abs(lhs / rhs - 1))
        check("wh_factorization_identity", worst, 1e-4, worst <= 1e-4)
        mc = cfg.mc or McConfig()
        mc = McConfig(n_paths=mc.n_paths, jump_cutoff_eps=mc.jump_cutoff_eps,
                      seed=args.seed if args.seed is not None else mc.seed,
                      antithetic=mc.antithetic, threads=args.threads or 1)
        t1 = time.perf_counter()
        sample = np.sort(simulate_extrema(model, cfg.q, mc).sup)
        timings["timing_mc_s"] = time.perf_counter() - t1
        e = np.exp(-sample)
        se = float(e.std(ddof=1) / math.sqrt(len(e)))
        gap = abs(float(e.mean()) - float(np.real(phi_plus(rs, 1.0))))
        check("mc_laplace_gap_in_se", gap / se, 3.0, gap <= 3 * se)
        if not model.has_atom_at_zero:
            # the supremum law is continuous only without an atom at 0
            sd = compute_residues(model, rs, len(rs.zetas))
            d = ks_statistic(sample, sd.cdf)
            crit = 3 * 1.3581 / math.sqrt(len(sample))
            check("ks_mc_vs_series_cdf", d, crit, d <= crit)

    csv = CsvOut(["check", "value", "threshold", "status"])
    for name, value, limit, status in checks:
        csv.row(name, float(value), float(limit), status)
        print(f"{status}  {name}: {value:.3e} (threshold {limit:.1e})")
    csv.note("q", cfg.q)
    csv.note("n_roots", cfg.n_roots)
    csv.note("generator", GENERATOR_NAME)
    for k, v in timings.items():
        csv.note(k, v)
    _write(out_dir, "report.csv", csv, cfg)
    return EXIT_OK if all(c[3] == "PASS" for c in checks) else EXIT_VALIDATION


COMMANDS = {"roots": cmd_roots, "density": cmd_density, "scale": cmd_scale, "validate": cmd_validate}


def build_parser():
    ap = argparse.ArgumentParser(prog="boundedjumps", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="key=value configuration file")
        sp.add_argument("--out", default=None, help="output directory (default: output_dir or .)")
        sp.add_argument("--roots", type=int, default=None, help="override n_roots")
        sp.add_argument("--threads", type=int, default=None, help="worker threads for simulation")
        sp.add_argument("--seed", type=int, default=None, help="PRNG seed for simulation")
        sp.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.roots is not None:
            if args.roots < 1:
                raise ConfigError("--roots: must be >= 1")
            cfg.n_roots = args.roots
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads: must be >= 1")
        if args.seed is not None and not 0 <= args.seed < 2 ** 64:
            raise ConfigError("--seed: must be an unsigned 64-bit integer")
        out_dir = Path(args.out or cfg.output_dir or ".")
        return COMMANDS[args.command](cfg, out_dir, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnsupportedModelError as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except BoundedJumpsError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
