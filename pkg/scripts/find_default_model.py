"""Search for the default synthetic model seed.

Scans mean-vector seeds and keeps the first model that
  1. shows strong baseline unfairness: |D(0)| > 0.35 for DD, DO, and PD;
  2. has delta=0 fair accuracies in a moderate band for all three kinds;
  3. admits equalized odds solutions at delta in {0.05, 0.1, 0.2} with
     closed-form max(|DO|, |PD|) <= delta + 10 * DEFAULT_TOL (delta=0 is
     excluded: with unequal group separation-to-noise ratios the exact
     joint-equality system has no interior solution);
  4. at delta in {0.05, 0.1}, has equalized odds solver risk within 1e-4 of
     a two-stage 2-D grid oracle over the admissible rectangle.

Run:  python3 scripts/find_default_model.py [--max-seed N] [--verbose]
Prints the winning seed and frozen literals for gaussian.default_model.
"""
from __future__ import annotations

import argparse
import sys
import time

from fairthresh.core import DisparityKind, DomainError
from fairthresh.extensions import eqodds_disparities, eqodds_risk, solve_eqodds
from fairthresh.gaussian import model_from_seed, risk_closed, theoretical_fair_classifier
from fairthresh.solver import DEFAULT_TOL, SolverError

ACC_BAND = (0.68, 0.80)
BASELINE_MIN = 0.35
EQODDS_DELTAS = (0.05, 0.1, 0.2)
GRID_DELTAS = (0.05, 0.1)
GRID_RTOL = 1e-4


def eqodds_grid_oracle(model, stats, delta, coarse=121, fine=121):
    """Best feasible risk on a coarse grid, refined around its argmin."""

    def best_on(t1s, t2s):
        top = (None, None, float("inf"))
        for t1 in t1s:
            for t2 in t2s:
                try:
                    do, pd = eqodds_disparities(model, stats, t1, t2)
                except DomainError:
                    continue
                if max(abs(do), abs(pd)) > delta + 1e-12:
                    continue
                risk = eqodds_risk(model, stats, t1, t2)
                if risk < top[2]:
                    top = (t1, t2, risk)
        return top

    def linspace(lo, hi, n):
        step = (hi - lo) / (n - 1)
        return [lo + i * step for i in range(n)]

    lo1, hi1 = -stats.p(0, 1), stats.p(1, 1)
    lo2, hi2 = -stats.p(1, 0), stats.p(0, 0)
    t1c, t2c, _ = best_on(linspace(lo1, hi1, coarse), linspace(lo2, hi2, coarse))
    if t1c is None:
        return None
    w1 = 2.0 * (hi1 - lo1) / (coarse - 1)
    w2 = 2.0 * (hi2 - lo2) / (coarse - 1)
    _, _, risk = best_on(
        linspace(max(lo1, t1c - w1), min(hi1, t1c + w1), fine),
        linspace(max(lo2, t2c - w2), min(hi2, t2c + w2), fine),
    )
    return risk


def check_seed(seed, verbose=False):
    """Return None if the seed passes every gate, else the failure reason."""
    model = model_from_seed(seed)
    stats = model.stats

    for kind in DisparityKind:
        base = theoretical_fair_classifier(model, kind, delta=1.0)
        if abs(base.disparity) <= BASELINE_MIN:
            return f"baseline |{kind.name}(0)| = {abs(base.disparity):.3f} <= {BASELINE_MIN}"
        try:
            fair = theoretical_fair_classifier(model, kind, delta=0.0)
        except SolverError as exc:
            return f"{kind.name} delta=0 unsolvable: {exc}"
        acc = 1.0 - fair.risk
        if not ACC_BAND[0] <= acc <= ACC_BAND[1]:
            return f"{kind.name} delta=0 accuracy {acc:.4f} outside {ACC_BAND}"
        if verbose:
            print(f"    {kind.name}: D(0)={base.disparity:+.3f}  acc(0)={acc:.4f}")

    for delta in EQODDS_DELTAS:
        try:
            sol = solve_eqodds(model, stats, delta)
        except SolverError as exc:
            return f"eqodds delta={delta} unsolvable: {exc}"
        do, pd = eqodds_disparities(model, stats, sol.t1, sol.t2)
        worst = max(abs(do), abs(pd))
        if worst > delta + 10 * DEFAULT_TOL:
            return f"eqodds delta={delta} residual {worst:.2e}"
        if verbose:
            print(f"    eqodds d={delta}: (t1,t2)=({sol.t1:+.4f},{sol.t2:+.4f}) worst={worst:.2e}")

    for delta in GRID_DELTAS:
        sol = solve_eqodds(model, stats, delta)
        solver_risk = eqodds_risk(model, stats, sol.t1, sol.t2)
        grid_risk = eqodds_grid_oracle(model, stats, delta)
        if grid_risk is None:
            return f"eqodds grid delta={delta}: no feasible grid point"
        gap = abs(solver_risk - grid_risk)
        if gap > GRID_RTOL:
            return f"eqodds grid delta={delta}: |risk gap| {gap:.2e} > {GRID_RTOL}"
        if verbose:
            print(f"    grid d={delta}: solver={solver_risk:.6f} grid={grid_risk:.6f} gap={gap:.1e}")
    return None


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-seed", type=int, default=200)
    parser.add_argument("--verbose", action="store_true")
    args = parser.parse_args(argv)

    start = time.time()
    for seed in range(args.max_seed):
        reason = check_seed(seed, verbose=args.verbose)
        if reason is not None:
            print(f"seed {seed:3d}: {reason}")
            continue
        model = model_from_seed(seed)
        print(f"\nseed {seed} passes all gates ({time.time() - start:.1f}s).")
        print("Frozen literals for gaussian.default_model:\n")
        print("    GaussianModel(")
        print("        stats=DEFAULT_STATS,")
        for name in ("mu_11", "mu_10", "mu_01", "mu_00"):
            vec = ", ".join(repr(v) for v in getattr(model, name))
            print(f"        {name}=({vec}),")
        print("        sigma=DEFAULT_SIGMA,")
        print(f"        seed={seed},")
        print("    )")
        for kind in DisparityKind:
            base = theoretical_fair_classifier(model, kind, delta=1.0)
            fair = theoretical_fair_classifier(model, kind, delta=0.0)
            print(
                f"  {kind.name}: D(0)={base.disparity:+.4f}  acc(delta=0)={1 - fair.risk:.4f}  "
                f"acc(t=0)={1 - risk_closed(model, kind, 0.0):.4f}"
            )
        return 0
    print(f"no seed below {args.max_seed} passes", file=sys.stderr)
    return 1


if __name__ == "__main__":
    raise SystemExit(main())
