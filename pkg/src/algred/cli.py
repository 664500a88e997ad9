"""Command-line interface.

Subcommands: simulate (FER sweep from an INI config), reduce (one channel
matrix from file or stdin), verify-domain (fundamental-domain checks),
step-stats, dist-checks, dump-generators.  Exit status: 0 success, 1
validation/usage error, 2 when verify-domain finds a failing row.  All file
outputs are written atomically (temp file + rename).
"""

from __future__ import annotations

import argparse
import configparser
import io
import os
import sys
import tempfile

import numpy as np


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(1)


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".algred-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fail(msg: str) -> int:
    sys.stderr.write(f"error: {msg}\n")
    return 1


def _parse_snr_grid(text: str) -> tuple[float, ...]:
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("snr_db range must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("snr_db step must be positive")
        grid = []
        v = start
        while v <= stop + 1e-9:
            grid.append(round(v, 9))
            v += step
        return tuple(grid)
    return tuple(float(p) for p in text.split(",") if p.strip())


def load_config(path: str):
    from .sim_engine import SimConfig

    cp = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cp.read_file(fh, source=path)
    except OSError as exc:
        raise ValueError(f"cannot read config: {exc}") from exc
    except configparser.Error as exc:
        raise ValueError(f"malformed config: {exc}") from exc
    if not cp.has_section("simulation"):
        raise ValueError(f"{path}: missing [simulation] section")
    sec = cp["simulation"]
    known = {"alphabet", "schemes", "snr_db", "frames_per_point",
             "min_errors", "seed", "chunk"}
    for key in sec:
        if key not in known:
            raise ValueError(f"{path}: unknown key '{key}' in [simulation]")
    try:
        cfg = SimConfig(
            alphabet=sec.getint("alphabet", 4),
            schemes=tuple(s.strip() for s in sec.get("schemes", "ar-zf").split(",")
                          if s.strip()),
            snr_grid_db=_parse_snr_grid(sec.get("snr_db", "0:20:2")),
            frames_per_point=sec.getint("frames_per_point", 100000),
            seed=sec.getint("seed", 1),
            min_errors=sec.getint("min_errors", 200),
            chunk=sec.getint("chunk", 4096),
        )
        cfg.validate()
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc
    return cfg


def _cmd_simulate(args) -> int:
    from dataclasses import replace

    from .sim_engine import run_sweep, write_fer_csv, write_steps_csv

    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
    except ValueError as exc:
        return _fail(str(exc))
    records = run_sweep(cfg, threads=args.threads)
    buf = io.StringIO()
    write_fer_csv(records, buf)
    _atomic_write(args.out, buf.getvalue())
    sbuf = io.StringIO()
    write_steps_csv(records, sbuf)
    root, ext = os.path.splitext(args.out)
    _atomic_write(root + ".steps" + (ext or ".csv"), sbuf.getvalue())
    return 0


def _cmd_reduce(args) -> int:
    from .unit_search import SingularChannelError, normalize_channel, reduce

    if args.matrix in (None, "-"):
        text = sys.stdin.read()
    else:
        try:
            with open(args.matrix) as fh:
                text = fh.read()
        except OSError as exc:
            return _fail(str(exc))
    vals = text.split()
    if len(vals) != 8:
        return _fail(f"expected 8 reals (row-major, re/im interleaved), got {len(vals)}")
    try:
        v = [float(t) for t in vals]
    except ValueError as exc:
        return _fail(str(exc))
    h = np.array([[v[0] + 1j * v[1], v[2] + 1j * v[3]],
                  [v[4] + 1j * v[5], v[6] + 1j * v[7]]])
    try:
        h1, _ = normalize_channel(h)
    except SingularChannelError as exc:
        return _fail(str(exc))
    res = reduce(h1)
    a, b, c, d = res.unit_exact.coeffs()
    print(f"word: {res.word}")
    print("unit coeffs over (1, θ, j, θj): "
          + " ".join(f"({g.re},{g.im})" for g in (a, b, c, d)))
    print("T:")
    for row in res.t.rows:
        print("  " + " ".join(f"{g.re}{g.im:+d}i" for g in row))
    print(f"residual ||E||^2_F: {res.residual_frob_sq:.12g}")
    print(f"steps: {res.steps}")
    return 0


def _cmd_verify_domain(args) -> int:
    from .fundamental_domain import (COSH_RMAX, COSH_RMIN, VOLUME_DOUBLE,
                                     VOLUME_TARGET, ball_radii, build_polyhedron,
                                     covering_bound, verify_tables, volume_mc)

    poly = build_polyhedron()
    report = verify_tables(poly)
    rows = list(report.rows)

    rmin, rmax, c_o = ball_radii(poly)
    rows.append(_row("radii", f"cosh R_min = {rmin:.6f}",
                     abs(rmin - COSH_RMIN) <= 1e-3))
    rows.append(_row("radii", f"cosh R_max = {rmax:.6f}",
                     abs(rmax - COSH_RMAX) <= 1e-3))

    vol = volume_mc(args.samples, seed=args.seed, poly=poly)
    rows.append(_row("volume",
                     f"MC volume = {vol.estimate:.5f} ± {vol.stderr:.5f}",
                     abs(vol.estimate - VOLUME_TARGET) <= 0.02 * VOLUME_TARGET))
    rows.append(_row("volume", f"volume below {VOLUME_DOUBLE} (single domain)",
                     vol.estimate < VOLUME_DOUBLE))

    ab = covering_bound()
    rows.append(_row("bound", f"sector volume = {ab.sector:.5f}",
                     abs(ab.sector - 36.2937) <= 1e-3))
    rows.append(_row("bound", f"cap(u2) = {ab.cap_u2:.5f}",
                     abs(ab.cap_u2 - 5.96793) <= 1e-3))
    rows.append(_row("bound", f"cap(u4) = {ab.cap_u4:.5f}",
                     abs(ab.cap_u4 - 5.34536) <= 1e-3))
    rows.append(_row("bound", f"total bound = {ab.total:.5f} < 9.77029",
                     abs(ab.total - 9.75746) <= 5e-3 and ab.total < VOLUME_DOUBLE))

    lines = []
    for r in rows:
        status = "PASS" if r.passed else "FAIL"
        detail = f"  [{r.detail}]" if r.detail else ""
        lines.append(f"{status}  {r.section:9s} {r.name}{detail}")
    n_fail = sum(1 for r in rows if not r.passed)
    lines.append(f"{len(rows) - n_fail}/{len(rows)} checks passed")
    text = "\n".join(lines) + "\n"
    if args.out:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return 2 if n_fail else 0


def _row(section, name, passed, detail=""):
    from .fundamental_domain import CheckRow
    return CheckRow(section=section, name=name, passed=passed, detail=detail)


def _cmd_step_stats(args) -> int:
    from .sim_engine import step_stats

    hist, mean = step_stats(args.trials, seed=args.seed)
    lines = ["steps,count"]
    for k, v in enumerate(hist):
        if v:
            lines.append(f"{k},{v}")
    text = "\n".join(lines) + "\n"
    if args.out:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    total = int(hist.sum())
    sys.stderr.write(f"trials: {total}  mean steps: {mean:.6f}\n")
    return 0


def _cmd_dist_checks(args) -> int:
    from .sim_engine import distribution_checks

    rep = distribution_checks(args.trials, seed=args.seed)
    lines = [
        f"samples: {rep.n}",
        f"T-density chi2 p-value: {rep.t_chi2_p:.4f} (require > 0.01)",
        f"Z-density chi2 p-value: {rep.z_chi2_p:.4f} (require > 0.01)",
        f"T-density quadrature normalization: {rep.t_norm_quadrature:.10f}",
        f"Z-density quadrature normalization: {rep.z_norm_quadrature:.10f}",
        f"T mean empirical/quadrature: {rep.t_mean_empirical:.4f} / "
        f"{rep.t_mean_quadrature:.4f}",
        f"P(initial size beyond 2cosh(2 R_min)): {rep.p_tail_rmin:.4f} "
        f"(band {rep.tail_rmin_band[0]}..{rep.tail_rmin_band[1]})",
        f"samples beyond 2cosh(10 R_min): {rep.tail_5rmin_count}",
        f"overall: {'PASS' if rep.passed else 'FAIL'}",
    ]
    text = "\n".join(lines) + "\n"
    if args.out:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_dump_generators(args) -> int:
    from .exact_order import GENERATOR_COEFFS, generator

    print("# unit: coefficients over (1, θ, j, θj) as (re,im) pairs")
    for k in range(1, 17):
        u = generator(k)
        name = f"u{k}" if k <= 8 else f"u{k - 8}^-1"
        coeffs = " ".join(f"({g.re},{g.im})" for g in u.coeffs())
        print(f"{name}: {coeffs}")
    assert len(GENERATOR_COEFFS) == 8
    return 0


def main(argv=None) -> int:
    parser = _Parser(prog="algred",
                     description="Algebraic reduction for the Golden Code: "
                                 "simulation, reduction, and domain verification.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a Monte-Carlo FER sweep")
    p.add_argument("--config", required=True, help="INI config file")
    p.add_argument("--out", required=True, help="output CSV (a .steps sidecar "
                                                "is written next to it)")
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("reduce", help="reduce one 2×2 channel matrix")
    p.add_argument("matrix", nargs="?", default="-",
                   help="file with 8 whitespace-separated reals "
                        "(row-major, re/im interleaved); '-' for stdin")
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("verify-domain",
                       help="verify relations, bisectors, vertices, cycles, "
                            "actions, volume, radii, and the volume bound")
    p.add_argument("--samples", type=int, default=2_000_000,
                   help="Monte-Carlo samples for the volume row")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="write the report to a file")
    p.set_defaults(func=_cmd_verify_domain)

    p = sub.add_parser("step-stats", help="histogram of unit-search lengths")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output CSV (steps,count)")
    p.set_defaults(func=_cmd_step_stats)

    p = sub.add_parser("dist-checks",
                       help="empirical checks of the size statistics")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_dist_checks)

    p = sub.add_parser("dump-generators",
                       help="print the compiled-in unit generator table")
    p.set_defaults(func=_cmd_dump_generators)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
