"""Command-line front end: sweep fronts, verify against the grid oracle,
and run the smoothing self-checks.

Outputs are deterministic for a fixed configuration: CSV rows are ordered
by cap value with six-decimal formatting, and the SVG is self-contained.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .checks import run_battery
from .dispatch import ProblemFormatError, builtin_instance_path, load_problem
from .front import FrontReport, build_front
from .oracle import default_grid, front_distance, grid_front
from .smoothing import SmoothParam

VERIFY_TOL_COST = 0.5
VERIFY_TOL_EMISSION = 0.5


def _add_common(sub):
    sub.add_argument("--problem", default=builtin_instance_path(),
                     help="problem definition file (default: bundled two-unit instance)")
    sub.add_argument("--points", type=int, default=70,
                     help="number of caps in the sweep (default 70)")
    sub.add_argument("--mu0", type=float, default=0.1,
                     help="initial smoothing parameter (default 0.1)")
    sub.add_argument("--alpha", type=float, default=0.1,
                     help="smoothing decay factor per continuation stage (default 0.1)")
    sub.add_argument("--mu-min", type=float, default=1e-6,
                     help="smoothing floor; raised mu0 follows if larger (default 1e-6)")
    sub.add_argument("--tol", type=float, default=1e-8,
                     help="stationarity tolerance of the barrier solver (default 1e-8)")
    sub.add_argument("--out", default=".", help="output directory (default .)")
    sub.add_argument("--seeds", type=int, default=8,
                     help="multi-start seed count per subproblem (default 8)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smoothdispatch",
        description="Bi-objective dispatch fronts via smoothing, cap sweeps "
                    "and an interior-point barrier solver.")
    subs = parser.add_subparsers(dest="command", required=True)

    front = subs.add_parser("front", help="sweep the front, write CSV/SVG/report")
    _add_common(front)
    front.add_argument("--plot", action="store_true", help="also write front.svg")

    verify = subs.add_parser("verify",
                             help="compare a sweep against the dense grid oracle")
    _add_common(verify)
    verify.add_argument("--resolution", type=float, default=0.01,
                        help="oracle grid resolution in MW (default 0.01)")

    check = subs.add_parser("check", help="run the smoothing property battery")
    check.add_argument("--problem", default=builtin_instance_path(),
                       help="problem used for the dispatch gradient checks")
    return parser


def _sweep(args) -> tuple[FrontReport, object]:
    problem = load_problem(args.problem)
    mu0 = max(args.mu0, args.mu_min)
    smooth = SmoothParam(mu=mu0, alpha=args.alpha, mu_min=args.mu_min)
    report = build_front(problem, args.points, smooth,
                         seeds=args.seeds, kkt_tol=args.tol)
    return report, problem


def cmd_front(args) -> int:
    try:
        report, problem = _sweep(args)
    except (ProblemFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_front_csv(out / "front.csv", report)
    write_report_txt(out / "report.txt", report)
    if getattr(args, "plot", False):
        write_front_svg(out / "front.svg", report)
    worst_stat = max((pt.akkt.stationarity_norm for pt in report.points),
                     default=0.0)
    print(f"solved {len(report.points)} of {report.schedule.n_points} caps "
          f"({len(report.infeasible_epsilons)} infeasible)")
    print(f"nondominated points: {len(report.nondominated_indices)}")
    print(f"max certificate stationarity: {worst_stat:.3e}")
    if report.monotonicity_violations:
        print(f"cost monotonicity violations at rows: "
              f"{list(report.monotonicity_violations)}")
    print(f"wrote {out / 'front.csv'}")
    return 0


def verify_front(report: FrontReport, oracle_points,
                 tol_cost: float = VERIFY_TOL_COST,
                 tol_emission: float = VERIFY_TOL_EMISSION):
    """Check that every swept point lies near the oracle front.

    Returns ``(ok, worst)`` where ``worst`` describes the farthest point.
    """
    solver_pts = np.array([[pt.cost_exact, pt.emission] for pt in report.points])
    dist = front_distance(solver_pts, oracle_points)
    ok = dist.cost <= tol_cost and dist.emission <= tol_emission
    worst = (f"directed distance to oracle front: {dist.cost:.4f} $ / "
             f"{dist.emission:.4f} kg/h (tolerance {tol_cost} / {tol_emission})")
    if not ok:
        b = np.asarray(oracle_points)
        gaps = [float(np.min(np.maximum(np.abs(b[:, 0] - c), np.abs(b[:, 1] - e))))
                for c, e in solver_pts]
        i = int(np.argmax(gaps))
        pt = report.points[i]
        worst += (f"; worst point eps={pt.epsilon:.6f} "
                  f"cost={pt.cost_exact:.6f} emission={pt.emission:.6f}")
    return ok, worst


def cmd_verify(args) -> int:
    try:
        report, problem = _sweep(args)
        oracle_points = grid_front(problem, default_grid(problem, args.resolution))
    except (ProblemFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    ok, worst = verify_front(report, oracle_points)
    print(worst)
    print("verify: PASS" if ok else "verify: FAIL")
    return 0 if ok else 1


def cmd_check(args) -> int:
    try:
        problem = load_problem(args.problem)
    except ProblemFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    results = run_battery(problem)
    failures = 0
    for res in results:
        tag = "PASS" if res.passed else "FAIL"
        print(f"{tag}  {res.name}: {res.detail}")
        failures += 0 if res.passed else 1
    return 0 if failures == 0 else 1


def write_front_csv(path, report: FrontReport):
    n_units = len(report.points[0].p) if report.points else 0
    header = (["l", "epsilon"] + [f"P{i+1}" for i in range(n_units)]
              + ["cost_exact", "cost_smoothed", "emission", "mu_final",
                 "akkt_stationarity", "status"])
    lines = [",".join(header)]
    eps_index = {eps: l for l, eps in enumerate(report.schedule.values, start=1)}
    for pt in report.points:
        row = [str(eps_index[pt.epsilon]), f"{pt.epsilon:.6f}"]
        row += [f"{v:.6f}" for v in pt.p]
        row += [f"{pt.cost_exact:.6f}", f"{pt.cost_smoothed:.6f}",
                f"{pt.emission:.6f}", f"{pt.mu_final:.6g}",
                f"{pt.akkt.stationarity_norm:.6e}", pt.solver_status.value]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_report_txt(path, report: FrontReport):
    sched = report.schedule
    lines = [
        f"problem digest: {report.problem_digest}",
        f"emission bounds: [{sched.e_min:.6f}, {sched.e_max:.6f}] kg/h, "
        f"tau={sched.tau:.6f}, caps={sched.n_points}",
        "mu stages: " + ", ".join(f"{m:.6g}" for m in report.mu_schedule),
        f"points solved: {len(report.points)}",
        f"infeasible caps: {len(report.infeasible_epsilons)}",
        f"nondominated: {len(report.nondominated_indices)} "
        f"(indices {list(report.nondominated_indices)})",
        f"cost monotonicity violations: {list(report.monotonicity_violations)}",
    ]
    if report.points:
        worst_stat = max(pt.akkt.stationarity_norm for pt in report.points)
        worst_comp = max(pt.akkt.complementarity_max for pt in report.points)
        worst_sum = max(abs(s) for s in report.complementarity_sums)
        converged = sum(pt.solver_status.value == "converged"
                        for pt in report.points)
        lines += [
            f"converged subproblems: {converged}/{len(report.points)}",
            f"max certificate stationarity: {worst_stat:.6e}",
            f"max certificate complementarity: {worst_comp:.6e}",
            f"max |sum(beta_j * g_j)| at final iterates: {worst_sum:.6e}",
            "note: certificates are necessary-condition diagnostics; the "
            "valve-point cost is nonconvex, so they do not establish global "
            "weak efficiency.",
        ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_front_svg(path, report: FrontReport, width: int = 640, height: int = 480):
    """Self-contained scatter of the front: one marker per solved point,
    emission on the x axis, cost on the y axis."""
    pts = [(pt.emission, pt.cost_exact) for pt in report.points]
    margin = 60
    if pts:
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        x_lo, x_hi = min(xs), max(xs)
        y_lo, y_hi = min(ys), max(ys)
    else:
        x_lo = x_hi = y_lo = y_hi = 0.0
    x_pad = 0.05 * (x_hi - x_lo) or 1.0
    y_pad = 0.05 * (y_hi - y_lo) or 1.0
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    def sx(v):
        return margin + (v - x_lo) / (x_hi - x_lo) * (width - 2 * margin)

    def sy(v):
        return height - margin - (v - y_lo) / (y_hi - y_lo) * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black" stroke-width="1"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
        f'y2="{height - margin}" stroke="black" stroke-width="1"/>',
        f'<text x="{width // 2}" y="{height - 15}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">Emission (kg/h)</text>',
        f'<text x="18" y="{height // 2}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14" '
        f'transform="rotate(-90 18 {height // 2})">Cost ($)</text>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        xv = x_lo + frac * (x_hi - x_lo)
        yv = y_lo + frac * (y_hi - y_lo)
        parts.append(
            f'<text x="{sx(xv):.2f}" y="{height - margin + 18}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="11">'
            f'{xv:.1f}</text>')
        parts.append(
            f'<text x="{margin - 6}" y="{sy(yv):.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{yv:.1f}</text>')
    for ex, cy in pts:
        parts.append(f'<circle cx="{sx(ex):.2f}" cy="{sy(cy):.2f}" r="3" '
                     f'fill="steelblue" fill-opacity="0.8"/>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "front":
        return cmd_front(args)
    if args.command == "verify":
        return cmd_verify(args)
    return cmd_check(args)


if __name__ == "__main__":
    sys.exit(main())
