"""Command-line front end: ``jetcurv COMMAND SPECFILE [options]``.

Exit status is 0 when every assertion of the command passes, 1 when one
fails and 2 on input errors (bad spec file, bad slice, point outside the
domain).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from typing import List, Optional

from . import applications as apps
from . import curvature as curv
from .connection import (
    SliceError, VerificationError, adapted_slice, build_split_frame, check_eigen_equations,
    horizontal_coefficients, is_adapted, lemma1_residual, projector_products,
)
from .oracle import EIGEN_TOL, PointError, random_jet_points, verify_eigensplitting
from .secondorder import (
    BaseMetric, ChartError, CompatibilityError, MetricError, check_compatibility, d_minus_frame,
    d_minus_membership,
)
from .specfile import SpecError, load
from .symcore import DomainError, ParseError, ZeroResult, all_zero, numeric_tolerance, to_string
from .symcore.zero import SamplingError

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
COMMANDS = ("split", "curvature", "identities", "compatibility", "separability", "eigen-verify",
            "harmonic")
INPUT_ERRORS = (SpecError, ParseError, SliceError, ChartError, MetricError, PointError,
                DomainError, SamplingError, apps.ChartConditionError, OSError)


@dataclass
class Row:
    name: str
    status: str                      # "pass", "fail" or "info"
    value: object = None
    tolerance: Optional[float] = None
    residual: Optional[float] = None

    def to_dict(self):
        out = {"name": self.name, "status": self.status}
        for key in ("value", "tolerance", "residual"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        return out


@dataclass
class Report:
    command: str
    lines: List[str] = field(default_factory=list)
    rows: List[Row] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return any(r.status == "fail" for r in self.rows)

    def say(self, text: str = ""):
        self.lines.append(text)

    def value(self, name: str, expr):
        text = to_string(expr) if not isinstance(expr, str) else expr
        self.rows.append(Row(name, "info", text))
        self.say(f"{name} = {text}")

    def check(self, name: str, result: ZeroResult):
        status = "pass" if result else "fail"
        self.rows.append(Row(name, status, result.method, result.tolerance, result.residual))
        extra = f", residual {result.residual:.3g}" if result.method == "numeric" else ""
        self.say(f"[{status.upper()}] {name} ({result.method}{extra})")

    def measured(self, name: str, ok: bool, value, tolerance: float):
        self.rows.append(Row(name, "pass" if ok else "fail", value, tolerance))
        self.say(f"[{'PASS' if ok else 'FAIL'}] {name}: {value} (tolerance {tolerance:g})")

    def fail(self, name: str, message: str):
        self.rows.append(Row(name, "fail", message))
        self.say(f"[FAIL] {name}: {message}")

    def guarded(self, name: str, fn):
        """Run ``fn``; a VerificationError becomes a failed row."""
        try:
            return fn()
        except (VerificationError, CompatibilityError) as exc:
            self.fail(name, str(exc))
            return None


@dataclass
class Options:
    probes: int
    seed: int
    tol: Optional[float]
    slice: Optional[str]


# -- helpers ---------------------------------------------------------------


def _slices(spec, opts: Options):
    if opts.slice is not None:
        if opts.slice not in spec.slices:
            raise SpecError(f"no slice named {opts.slice!r}", key="--slice")
        names = [opts.slice]
    else:
        names = list(spec.slices)
    if not names:
        return [("default", adapted_slice(spec.context))]
    return [(nm, spec.slice(nm, opts.probes, opts.seed)) for nm in names]


def _describe(report: Report, name: str, s):
    phi = ", ".join(to_string(p) for p in s.phi)
    v = ", ".join(to_string(c) for c in s.v)
    report.say(f"-- slice {name}: phi = ({phi}), v = ({v})")


def _vertical_items(ctx, U):
    """(coordinate name, component) for the nonzero y^s_k components of U."""
    names = ctx.names
    return [(names[a], U[a]) for a in sorted(U.comps) if not U[a].is_zero_const]


def _show_operator(report: Report, label: str, entries, opts: Options):
    """Print ``label = 0`` or the nonzero components; entries is [(suffix, expr)]."""
    nonzero = [(k, e) for k, e in entries if not all_zero([e], opts.probes, opts.seed)]
    if not nonzero:
        report.value(label, "0")
        return
    for k, e in nonzero:
        report.value(f"{label}{k}", e)


def _riemann(spec, which):
    names = spec.x if which == "g" else spec.y
    return apps.christoffel(BaseMetric.create(names, spec.metric_entries(which)))


def system_connection(spec):
    """The [F] block, or the harmonic-map connection of a metric-only file."""
    if not spec.F and set(spec.metrics) == {"g", "h"}:
        return apps.harmonic_connection(_riemann(spec, "g"), _riemann(spec, "h"))
    return spec.connection()


# -- commands --------------------------------------------------------------


def cmd_split(spec, c, opts: Options, report: Report):
    ctx = c.ctx
    for name, s in _slices(spec, opts):
        _describe(report, name, s)
        frame = report.guarded(f"{name}: frame", lambda: build_split_frame(
            c, s, probe_points=opts.probes, seed=opts.seed))
        if frame is None:
            continue
        for (nu, sg, k), e in sorted(frame.H.items(), key=lambda kv: (kv[0][1], kv[0][0], kv[0][2])):
            report.value(f"H[{ctx.y_names[nu]}][{ctx.y_names[sg]}][{ctx.x_names[k]}]", e)
        for check, method in frame.checks.items():
            report.check(f"{name}: {check}", ZeroResult(True, method))


def cmd_curvature(spec, c, opts: Options, report: Report):
    ctx = c.ctx
    for name, s in _slices(spec, opts):
        _describe(report, name, s)
        frame = report.guarded(f"{name}: frame", lambda: build_split_frame(
            c, s, probe_points=opts.probes, seed=opts.seed))
        if frame is None:
            continue
        cache = curv._Cache(frame)
        phi = report.guarded(f"{name}: Phi cross-check", lambda: curv.jacobi_curvature(
            frame, cache, opts.probes, opts.seed))
        rh = report.guarded(f"{name}: R^H cross-check", lambda: curv.r_h(
            frame, cache, opts.probes, opts.seed))
        rp = report.guarded(f"{name}: r_+ display check", lambda: curv.r_plus_vertical(
            frame, cache, opts.probes, opts.seed))
        gb = curv.gamma_brackets(frame)
        entries = [(f"[{ctx.x_names[i]}][{ctx.x_names[j]}][{coord}]", e)
                   for (i, j), U in sorted(gb.items()) if i < j for coord, e in _vertical_items(ctx, U)]
        _show_operator(report, "R_Gamma", entries, opts)
        if rh is not None:
            hb = curv.h_brackets(frame)
            entries = [(f"[{ctx.y_names[a]}][{ctx.y_names[b]}][{coord}]", e)
                       for (a, b), U in sorted(hb.items()) if a < b for coord, e in _vertical_items(ctx, U)]
            _show_operator(report, "R_H", entries, opts)
        if phi is not None:
            vals = curv.jacobi_values(frame, phi)
            for (nu, i, sg, j), e in sorted(vals.items(), key=lambda kv: (kv[0][0], kv[0][2], kv[0][1], kv[0][3])):
                if ctx.m == 1:
                    label = f"Phi[{ctx.x_names[i]}][{ctx.x_names[j]}]"
                else:
                    label = (f"Phi[{ctx.y_names[nu]}][{ctx.x_names[i]}]"
                             f"[{ctx.y_names[sg]}][{ctx.x_names[j]}]")
                report.value(label, e)
        if rp is not None:
            entries = []
            for i in range(ctx.n):
                for (nu, p), W in sorted(frame.W.items()):
                    U = rp(frame.gamma_fields[i], W)
                    entries += [(f"[{ctx.x_names[i]}][{ctx.d_names[nu][p]}][{coord}]", e)
                                for coord, e in _vertical_items(ctx, U)]
            _show_operator(report, "r_plus", entries, opts)
        for label, A in (("Phi", phi), ("R^Gamma", curv.r_gamma(frame, cache)), ("R^H", rh)):
            if A is None:
                continue
            t, p = curv.decompose_plus_tilde(frame, A)
            report.check(f"{name}: {label}~ + {label}_+ = {label}",
                         all_zero((t + p - A).components(), opts.probes, opts.seed))


def cmd_identities(spec, c, opts: Options, report: Report):
    for name, s in _slices(spec, opts):
        _describe(report, name, s)
        report.check(f"{name}: Lemma 1", all_zero(lemma1_residual(c, s).components(),
                                                  opts.probes, opts.seed))
        H = horizontal_coefficients(c, s)
        r = report.guarded(f"{name}: eigen-equations", lambda: check_eigen_equations(
            c, s, H, opts.probes, opts.seed))
        if r is not None:
            report.check(f"{name}: eigen-equations", r)
        frame = report.guarded(f"{name}: frame", lambda: build_split_frame(
            c, s, probe_points=opts.probes, seed=opts.seed))
        if frame is None:
            continue
        for check, method in frame.checks.items():
            report.check(f"{name}: {check}", ZeroResult(True, method))
        for label, A in projector_products(frame).items():
            report.check(f"{name}: projector {label}", all_zero(A.components(), opts.probes, opts.seed))
        rep = report.guarded(f"{name}: curvature", lambda: curv.curvature_report(
            frame, True, opts.probes, opts.seed))
        if rep is None:
            continue
        for label, res in rep.residuals.items():
            report.check(f"{name}: {label}", res)


def cmd_compatibility(spec, c, opts: Options, report: Report):
    for name, s in _slices(spec, opts):
        _describe(report, name, s)
        res = check_compatibility(c, s, adapt=not is_adapted(s), probe_points=opts.probes,
                                  seed=opts.seed)
        cc, cs = res.connection, res.slice
        if cc is not c:
            report.say(f"   (checked in the linear chart {', '.join(cc.ctx.x_names)} with phi = dX1)")
        if not res:
            ctx = cc.ctx
            wit = "; ".join(f"dF[{ctx.y_names[sg]}][{ctx.x_names[p]}][{ctx.x_names[q]}]"
                            f"/d{ctx.d_names[nu][0]} != 0" for sg, p, q, nu in res.witness)
            report.fail(f"{name}: compatible", wit)
            continue
        report.rows.append(Row(f"{name}: compatible", "pass", "true"))
        report.say(f"[PASS] {name}: compatible")
        frame = report.guarded(f"{name}: D_- frame", lambda: d_minus_frame(
            cc, cs, True, opts.probes, opts.seed))
        if frame is None:
            continue
        ref = horizontal_coefficients(cc, cs)
        report.check(f"{name}: D_- frame = first-order frame",
                     all_zero([frame.H[k] - ref[k] for k in ref], opts.probes, opts.seed))
        report.check(f"{name}: H_s and Gamma_i lie in D_-", d_minus_membership(
            cc, cs, list(frame.h_fields) + list(frame.gamma_fields), opts.probes, opts.seed))


def cmd_separability(spec, c, opts: Options, report: Report):
    rep = apps.separability_check(c, opts.probes, opts.seed)
    if rep.hypothesis:
        report.rows.append(Row("separability hypothesis", "pass", "true"))
        report.say("[PASS] separability hypothesis")
    else:
        report.fail("separability hypothesis", "; ".join(rep.violations))
        report.say("   (slice results below are reported, not asserted)")
    for sl, rows in rep.slices.items():
        for label, res in rows.items():
            if rep.hypothesis:
                report.check(f"{sl}: {label}", res)
            else:
                report.rows.append(Row(f"{sl}: {label}", "info", res.method, res.tolerance, res.residual))
                report.say(f"[INFO] {sl}: {label} -> {bool(res)}")


def cmd_eigen_verify(spec, c, opts: Options, report: Report):
    tol = opts.tol if opts.tol is not None else EIGEN_TOL
    for name, s in _slices(spec, opts):
        _describe(report, name, s)
        from .connection import deformation

        L = deformation(c, s)
        points = random_jet_points(c.ctx, opts.probes, opts.seed, L.components())
        for k, p in enumerate(points, 1):
            m = verify_eigensplitting(c, s, p, L, tol)
            where = ", ".join(f"{a}={b:.4f}" for a, b in p.items())
            report.say(f"point {k}: {where}")
            pre = f"{name}: point {k}"
            report.measured(f"{pre}: |L^3 - L|", m.cube_residual <= tol, m.cube_residual, tol)
            report.measured(f"{pre}: trace L", abs(m.trace) <= tol, m.trace, tol)
            report.measured(f"{pre}: trace L^2 - 2m", abs(m.trace_sq - 2 * m.m) <= tol,
                            m.trace_sq - 2 * m.m, tol)
            report.measured(f"{pre}: ranks (L, L-I, L+I)", m.checks["ranks"],
                            [m.rank_L, m.rank_L_minus_I, m.rank_L_plus_I], tol)




def cmd_harmonic(spec, c, opts: Options, report: Report):
    g, h = _riemann(spec, "g"), _riemann(spec, "h")
    hc = apps.harmonic_connection(g, h)
    if spec.F:
        diffs = [c.F(*k) - hc.F(*k) for k in hc.entries]
        report.check("[F] agrees with the harmonic-map connection", all_zero(diffs, opts.probes, opts.seed))
    rep = apps.harmonic_curvature_check(g, h, opts.probes, opts.seed)
    for label, res in rep.residuals.items():
        report.check(f"{label} matches the closed form", res)


HANDLERS = {
    "split": cmd_split, "curvature": cmd_curvature, "identities": cmd_identities,
    "compatibility": cmd_compatibility, "separability": cmd_separability,
    "eigen-verify": cmd_eigen_verify, "harmonic": cmd_harmonic,
}


# -- entry point -----------------------------------------------------------


def _seed(text: str) -> int:
    try:
        return int(text, 16)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a hexadecimal seed: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jetcurv", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("specfile")
    p.add_argument("--slice", metavar="NAME", help="only this [slice NAME] block")
    p.add_argument("--json", metavar="PATH", help="write a JSON report")
    p.add_argument("--points", type=int, metavar="N", help="probe / jet point count")
    p.add_argument("--seed", type=_seed, metavar="HEX", help="PRNG seed (hex)")
    p.add_argument("--tol", type=float, metavar="FLOAT",
                   help="numeric tolerance (zero tests; matrix checks for eigen-verify)")
    p.add_argument("--quiet", action="store_true", help="no text report")
    return p


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        spec = load(args.specfile)
        if args.points is not None and args.points < 1:
            raise SpecError("must be at least 1", key="--points")
        if args.tol is not None and not args.tol > 0:
            raise SpecError("must be positive", key="--tol")
        seed = spec.seed
        env = os.environ.get("JETCURV_SEED")
        if env:
            try:
                seed = _seed(env)
            except argparse.ArgumentTypeError as exc:
                raise SpecError(str(exc), key="JETCURV_SEED") from None
        if args.seed is not None:
            seed = args.seed
        opts = Options(args.points or spec.probe_points, seed, args.tol, args.slice)
        report = Report(args.command)
        for w in spec.warnings:
            print(f"warning: {w}", file=sys.stderr)
        tol = spec.tol_num
        if args.tol is not None and args.command != "eigen-verify":
            tol = args.tol
        with numeric_tolerance(tol):
            HANDLERS[args.command](spec, system_connection(spec), opts, report)
    except INPUT_ERRORS as exc:
        print(f"jetcurv: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    header = f"jetcurv {args.command} {os.path.basename(args.specfile)} (seed 0x{opts.seed:X})"
    verdict = "FAILED" if report.failed else "OK"
    if not args.quiet:
        print(header, file=stdout)
        for line in report.lines:
            print(line, file=stdout)
        print(verdict, file=stdout)
    if args.json:
        doc = {"spec_hash": spec.digest, "seed": f"0x{opts.seed:X}", "command": args.command,
               "results": [r.to_dict() for r in report.rows]}
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    return EXIT_FAIL if report.failed else EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
