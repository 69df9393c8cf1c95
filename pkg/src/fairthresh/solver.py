"""Monotone bisection over disparity curves.

The central solve: given a monotone non-increasing curve t -> D(t) and a
tolerance level delta, find the smallest |t| with |D(t)| <= delta.  Built on
top of it: Pareto-frontier tracing over a delta grid and a verifier for the
frontier's adjacent-point tradeoff bounds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

__all__ = [
    "DEFAULT_TOL",
    "SolverError",
    "BracketError",
    "DisparityCurve",
    "SolveResult",
    "FrontierRow",
    "TradeoffCheck",
    "solve_threshold",
    "trace_pareto",
    "check_tradeoff_bounds",
    "is_monotone_nonincreasing",
]

# Bracket-width target used throughout the experiment protocol.
DEFAULT_TOL = 2.0 ** -15

# Default outer bracket; intersected with each measure's natural domain.
_DEFAULT_BRACKET = (-1.0, 1.0)
_DOMAIN_SHRINK = 1e-9

# Attainment flag: returned disparity within this distance of the target
# counts as exact; step curves with larger jumps get exact=False.
_EXACT_SLACK = 1e-2


class SolverError(ValueError):
    """Base error for curve solving."""


class BracketError(SolverError):
    """The target disparity level is unreachable inside the bracket."""


@dataclass(frozen=True)
class DisparityCurve:
    """Evaluator t -> D(t) with the bracket on which it is defined.

    D must be monotone non-increasing on [t_lo, t_hi]; this is relied on,
    not enforced (use is_monotone_nonincreasing to audit).
    """

    fn: Callable[[float], float]
    t_lo: float
    t_hi: float
    name: str = ""

    def __post_init__(self) -> None:
        if not self.t_lo < self.t_hi:
            raise SolverError(f"empty bracket [{self.t_lo!r}, {self.t_hi!r}]")

    def __call__(self, t: float) -> float:
        return self.fn(t)

    @classmethod
    def from_domain(
        cls, fn: Callable[[float], float], domain: tuple[float, float], name: str = ""
    ) -> "DisparityCurve":
        """Intersect the default bracket with a natural domain, edges shrunk.

        The shrink keeps evaluations away from domain endpoints where group
        thresholds reach 0 or 1.
        """
        lo = max(_DEFAULT_BRACKET[0], domain[0] + _DOMAIN_SHRINK)
        hi = min(_DEFAULT_BRACKET[1], domain[1] - _DOMAIN_SHRINK)
        return cls(fn=fn, t_lo=lo, t_hi=hi, name=name)


@dataclass(frozen=True)
class SolveResult:
    """Outcome of solve_threshold.

    iterations counts midpoint evaluations only; evaluations additionally
    includes the probes at 0 and at the far bracket end.  exact=False flags
    step curves whose jump carried D past the target (the constraint still
    holds at the returned t).
    """

    t_star: float
    d_at_t: float
    iterations: int
    evaluations: int
    converged: bool
    exact: bool


class FrontierRow(NamedTuple):
    delta: float
    t: float
    risk: float
    disparity: float


class TradeoffCheck(NamedTuple):
    ok: bool
    worst_violation: float
    worst_pair: int | None


def solve_threshold(
    curve: DisparityCurve, delta: float, tol: float = DEFAULT_TOL
) -> SolveResult:
    """Smallest-|t| point of the curve with |D(t)| <= delta.

    Shortcut at t=0 when already feasible; otherwise bisect on the side where
    the constraint binds.  The returned endpoint always satisfies the
    constraint by loop invariant: on the positive branch D(hi) <= delta, on
    the negative branch D(lo) >= -delta.
    """
    if delta < 0.0:
        raise SolverError(f"delta must be nonnegative, got {delta!r}")
    if tol <= 0.0:
        raise SolverError(f"tol must be positive, got {tol!r}")
    if not curve.t_lo <= 0.0 <= curve.t_hi:
        raise BracketError(f"bracket [{curve.t_lo!r}, {curve.t_hi!r}] must contain 0")

    d0 = curve(0.0)
    if not math.isfinite(d0):
        raise SolverError(f"curve evaluated non-finite at t=0: {d0!r}")
    if abs(d0) <= delta:
        return SolveResult(0.0, d0, iterations=0, evaluations=1, converged=True, exact=True)

    if d0 > delta:
        # Positive branch: walk D down to +delta on [0, t_hi].
        target = delta
        lo, d_lo = 0.0, d0
        hi = curve.t_hi
        d_hi = curve(hi)
        if d_hi > delta:
            raise BracketError(
                f"D({hi!r}) = {d_hi!r} > delta = {delta!r}: target unreachable inside bracket"
            )
        iterations = 0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:  # float exhaustion below tol scale
                break
            d_mid = curve(mid)
            iterations += 1
            if d_mid > delta:
                lo, d_lo = mid, d_mid
            else:
                hi, d_hi = mid, d_mid
        t_star, d_star = hi, d_hi
    else:
        # Negative branch: walk D up to -delta on [t_lo, 0].
        target = -delta
        hi, d_hi = 0.0, d0
        lo = curve.t_lo
        d_lo = curve(lo)
        if d_lo < -delta:
            raise BracketError(
                f"D({lo!r}) = {d_lo!r} < -delta = {-delta!r}: target unreachable inside bracket"
            )
        iterations = 0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            d_mid = curve(mid)
            iterations += 1
            if d_mid < -delta:
                hi, d_hi = mid, d_mid
            else:
                lo, d_lo = mid, d_mid
        t_star, d_star = lo, d_lo

    converged = hi - lo <= tol
    exact = abs(d_star - target) <= max(_EXACT_SLACK, 100.0 * tol)
    return SolveResult(
        t_star=t_star,
        d_at_t=d_star,
        iterations=iterations,
        evaluations=iterations + 2,
        converged=converged,
        exact=exact,
    )


def trace_pareto(
    curve: DisparityCurve,
    risk_eval: Callable[[float], float],
    deltas: Sequence[float],
    tol: float = DEFAULT_TOL,
) -> list[FrontierRow]:
    """One frontier row per delta: (delta, t, risk at t, disparity at t)."""
    if list(deltas) != sorted(deltas):
        raise SolverError("delta grid must be sorted ascending")
    if deltas and deltas[0] < 0.0:
        raise SolverError("deltas must be nonnegative")
    rows = []
    for delta in deltas:
        res = solve_threshold(curve, delta, tol)
        rows.append(
            FrontierRow(
                delta=float(delta),
                t=res.t_star,
                risk=float(risk_eval(res.t_star)),
                disparity=res.d_at_t,
            )
        )
    return rows


def check_tradeoff_bounds(rows: Sequence[FrontierRow], tol: float = 1e-6) -> TradeoffCheck:
    """Adjacent-pair sandwich on the frontier's risk decrease.

    For delta_1 < delta_2 with thresholds t_1, t_2 >= 0 and risks T_1, T_2:
    t_2 * (delta_2 - delta_1) <= T_1 - T_2 <= t_1 * (delta_2 - delta_1).
    """
    if len(rows) < 2:
        raise SolverError("need at least two frontier rows")
    if any(r.t < 0.0 for r in rows):
        raise SolverError("tradeoff bounds apply on the t >= 0 branch only")
    worst = 0.0
    worst_pair = None
    for i in range(len(rows) - 1):
        r1, r2 = rows[i], rows[i + 1]
        gap = r2.delta - r1.delta
        drop = r1.risk - r2.risk
        lower_excess = r2.t * gap - drop
        upper_excess = drop - r1.t * gap
        violation = max(lower_excess, upper_excess, 0.0)
        if violation > worst:
            worst, worst_pair = violation, i
    return TradeoffCheck(ok=worst <= tol, worst_violation=worst, worst_pair=worst_pair)


def is_monotone_nonincreasing(
    curve: DisparityCurve, n_points: int = 64, slack: float = 0.0
) -> bool:
    """Sampled monotonicity audit over the curve's bracket."""
    ts = [curve.t_lo + (curve.t_hi - curve.t_lo) * i / (n_points - 1) for i in range(n_points)]
    values = [curve(t) for t in ts]
    return all(values[i + 1] <= values[i] + slack for i in range(len(values) - 1))
