"""Exact fair-optimal randomized classifiers on finite-support scores.

When the score distribution has atoms, group-fair classification may place
positive mass exactly on the decision boundary, and deterministic
thresholding cannot hit the disparity budget. The optimum then randomizes
on the boundary set. This module solves that problem exactly: every float
input is a binary rational, so all decisions (boundary membership, step
levels of the disparity envelope, the interpolated acceptance fractions)
are carried out in ``fractions.Fraction`` arithmetic with zero rounding
error, and reported risks and disparities are exact rationals.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .core import DisparityKind, DomainError, GroupStats
from .solver import SolverError

__all__ = [
    "FiniteDistribution",
    "RandomizedClassifier",
    "risk_exact",
    "disparity_exact",
    "dmin_dmax",
    "solve_randomized",
    "brute_force_oracle",
]

_ORACLE_ATOM_CAP = 12

Rational = Fraction


@dataclass(frozen=True)
class FiniteDistribution:
    """A finitely supported joint law of (score eta, group A).

    Each atom is ``(group, mass, eta)`` with unconditional mass: masses sum
    to one over both groups, and the per-group totals play the role of the
    group marginals.
    """

    atoms: tuple[tuple[int, float, float], ...]

    def __init__(self, atoms) -> None:
        object.__setattr__(self, "atoms", tuple((int(a), float(m), float(e)) for a, m, e in atoms))
        groups = {a for a, _, _ in self.atoms}
        if not self.atoms:
            raise DomainError("distribution needs at least one atom")
        if not groups <= {0, 1}:
            raise DomainError(f"group labels must be 0 or 1, got {sorted(groups)}")
        if groups != {0, 1}:
            raise DomainError("every group needs at least one atom")
        for a, m, e in self.atoms:
            if m <= 0.0:
                raise DomainError(f"atom mass {m!r} must be positive")
            if not 0.0 <= e <= 1.0:
                raise DomainError(f"atom score {e!r} outside [0, 1]")
        total = sum(Fraction(m) for _, m, _ in self.atoms)
        if abs(total - 1) > Fraction(1, 10**9):
            raise DomainError(f"atom masses sum to {float(total)!r}, expected 1")

    def group_mass(self, a: int) -> Fraction:
        return sum((Fraction(m) for g, m, _ in self.atoms if g == a), Fraction(0))

    def implied_stats(self) -> GroupStats:
        """Cell probabilities induced by the atoms: p_{a,1} = sum of m*eta
        over group a. Raises when a cell is empty (degenerate scores)."""
        cells = {(a, y): Fraction(0) for a in (0, 1) for y in (0, 1)}
        for a, m, e in self.atoms:
            mf, ef = Fraction(m), Fraction(e)
            cells[(a, 1)] += mf * ef
            cells[(a, 0)] += mf * (1 - ef)
        return GroupStats(
            p11=float(cells[(1, 1)]),
            p10=float(cells[(1, 0)]),
            p01=float(cells[(0, 1)]),
            p00=float(cells[(0, 0)]),
        )


@dataclass(frozen=True)
class RandomizedClassifier:
    """Per-atom acceptance probabilities, with the threshold parameter and
    boundary fractions that produced them (when built by a solver)."""

    accept: tuple[Rational, ...]
    t_star: Rational | None = None
    tau_plus: Rational = field(default=Fraction(0))
    tau_minus: Rational = field(default=Fraction(0))

    def __post_init__(self) -> None:
        for f in self.accept:
            if not 0 <= f <= 1:
                raise DomainError(f"acceptance probability {f!r} outside [0, 1]")


def _exact_coeffs(kind: DisparityKind, stats: GroupStats) -> tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]:
    """Bilinear weight coefficients (s, b) per group as exact rationals."""
    p11, p10 = Fraction(stats.p11), Fraction(stats.p10)
    p01, p00 = Fraction(stats.p01), Fraction(stats.p00)
    zero = Fraction(0)
    if kind is DisparityKind.DD:
        b1, b0 = 1 / (p11 + p10), -1 / (p01 + p00)
        return (zero, zero), (b0, b1)
    if kind is DisparityKind.DO:
        return (-1 / p01, 1 / p11), (zero, zero)
    return (1 / p00, -1 / p10), (-1 / p00, 1 / p10)


@dataclass(frozen=True)
class _Atom:
    mass: Fraction
    eta: Fraction
    w: Fraction
    ratio: Fraction | None  # (2*eta - 1) / w, None when w == 0


def _prepare(dist: FiniteDistribution, kind: DisparityKind, stats: GroupStats) -> list[_Atom]:
    (s0, s1), (b0, b1) = _exact_coeffs(kind, stats)
    out = []
    for a, m, e in dist.atoms:
        mf, ef = Fraction(m), Fraction(e)
        w = (s1 * ef + b1) if a == 1 else (s0 * ef + b0)
        ratio = (2 * ef - 1) / w if w != 0 else None
        out.append(_Atom(mass=mf, eta=ef, w=w, ratio=ratio))
    return out


def _envelope(atoms: list[_Atom], t: Fraction) -> tuple[Fraction, Fraction, Fraction]:
    """(D_min, D_zero, D_max) of the threshold family at parameter t.

    Atoms with positive weight are accepted when their boundary ratio
    exceeds t, atoms with negative weight when it falls below t; atoms
    sitting exactly at t contribute only to D_max (positive side) or only
    to D_min (negative side), and D_zero counts neither.
    """
    dmin = dzero = dmax = Fraction(0)
    for at in atoms:
        if at.w == 0:
            continue
        contrib = at.mass * at.w
        if at.w > 0:
            if at.ratio > t:
                dmin += contrib
                dzero += contrib
                dmax += contrib
            elif at.ratio == t:
                dmax += contrib
        else:
            if at.ratio < t:
                dmin += contrib
                dzero += contrib
                dmax += contrib
            elif at.ratio == t:
                dmin += contrib
    return dmin, dzero, dmax


def risk_exact(dist: FiniteDistribution, classifier: RandomizedClassifier) -> Fraction:
    """Misclassification rate sum of m*((1 - 2*eta)*f + eta), exactly."""
    if len(classifier.accept) != len(dist.atoms):
        raise DomainError(
            f"classifier covers {len(classifier.accept)} atoms, distribution has {len(dist.atoms)}"
        )
    total = Fraction(0)
    for (a, m, e), f in zip(dist.atoms, classifier.accept):
        mf, ef = Fraction(m), Fraction(e)
        total += mf * ((1 - 2 * ef) * Fraction(f) + ef)
    return total


def disparity_exact(
    dist: FiniteDistribution, kind: DisparityKind, stats: GroupStats, classifier: RandomizedClassifier
) -> Fraction:
    """Signed disparity sum of m*w*f of a randomized classifier, exactly."""
    if len(classifier.accept) != len(dist.atoms):
        raise DomainError(
            f"classifier covers {len(classifier.accept)} atoms, distribution has {len(dist.atoms)}"
        )
    atoms = _prepare(dist, kind, stats)
    return sum((at.mass * at.w * Fraction(f) for at, f in zip(atoms, classifier.accept)), Fraction(0))


def dmin_dmax(
    dist: FiniteDistribution, kind: DisparityKind, stats: GroupStats, t: float | Fraction
) -> tuple[Fraction, Fraction]:
    """Least and greatest disparity achievable by randomizing the boundary
    atoms of the threshold family at parameter t.

    As functions of t both envelopes are step functions, monotone
    non-increasing; the lower one is right-continuous, the upper one
    left-continuous, and the left limit of the lower equals the upper.
    Accepts an exact rational t to probe step edges without float rounding.
    """
    atoms = _prepare(dist, kind, stats)
    dmin, _, dmax = _envelope(atoms, Fraction(t))
    return dmin, dmax


def _accepts(atoms: list[_Atom], t: Fraction, tau_plus: Fraction, tau_minus: Fraction) -> tuple[Fraction, ...]:
    out = []
    for at in atoms:
        if at.w == 0:
            out.append(Fraction(1) if at.eta > Fraction(1, 2) else Fraction(0))
        elif at.w > 0:
            out.append(Fraction(1) if at.ratio > t else tau_plus if at.ratio == t else Fraction(0))
        else:
            out.append(Fraction(1) if at.ratio < t else tau_minus if at.ratio == t else Fraction(0))
    return tuple(out)


def solve_randomized(
    dist: FiniteDistribution, kind: DisparityKind, stats: GroupStats, delta: float
) -> RandomizedClassifier:
    """Risk-minimal classifier with |disparity| <= delta, exactly.

    The threshold parameter is the smallest |t| at which the envelope
    [D_min(t), D_max(t)] meets the budget; boundary atoms on one weight
    side are then accepted with the common fraction that lands the
    disparity exactly on its target. Finite support makes every budget
    attainable, so this never fails.
    """
    if delta < 0:
        raise SolverError(f"disparity budget {delta!r} must be nonnegative")
    deltaf = Fraction(delta)
    atoms = _prepare(dist, kind, stats)
    ratios = sorted({at.ratio for at in atoms if at.ratio is not None})

    dmin0, dzero0, dmax0 = _envelope(atoms, Fraction(0))
    if dmin0 > deltaf:
        # Shift right until the floor of the envelope drops to the budget;
        # the floor is right-continuous, so the first such step level wins.
        t_star = None
        for r in ratios:
            if r <= 0:
                continue
            if _envelope(atoms, r)[0] <= deltaf:
                t_star = r
                break
        assert t_star is not None  # floor tends to a nonpositive limit
        target = deltaf
    elif dmax0 < -deltaf:
        t_star = None
        for r in reversed(ratios):
            if r >= 0:
                continue
            if _envelope(atoms, r)[2] >= -deltaf:
                t_star = r
                break
        assert t_star is not None  # ceiling tends to a nonnegative limit
        target = -deltaf
    else:
        t_star = Fraction(0)
        target = min(deltaf, max(-deltaf, dzero0))

    dmin, dzero, dmax = _envelope(atoms, t_star)
    tau_plus = tau_minus = Fraction(0)
    if target < dzero:
        tau_minus = (dzero - target) / (dzero - dmin)
    elif target > dzero:
        tau_plus = (target - dzero) / (dmax - dzero)
    assert 0 <= tau_plus <= 1 and 0 <= tau_minus <= 1
    return RandomizedClassifier(
        accept=_accepts(atoms, t_star, tau_plus, tau_minus),
        t_star=t_star,
        tau_plus=tau_plus,
        tau_minus=tau_minus,
    )


def brute_force_oracle(
    dist: FiniteDistribution, kind: DisparityKind, stats: GroupStats, delta: float
) -> tuple[Fraction, RandomizedClassifier]:
    """Exhaustive reference optimum over the randomized threshold family.

    Enumerates every distinct boundary ratio, the midpoints between
    consecutive ratios, and sentinels beyond both ends. At each candidate
    parameter the two per-side boundary fractions form a linear program
    over the unit square cut by the band |disparity| <= delta, whose
    optimum sits at a vertex; all vertices are enumerated. Exact rational
    arithmetic end to end.
    """
    if delta < 0:
        raise SolverError(f"disparity budget {delta!r} must be nonnegative")
    if len(dist.atoms) > _ORACLE_ATOM_CAP:
        raise SolverError(
            f"oracle capped at {_ORACLE_ATOM_CAP} atoms, got {len(dist.atoms)}"
        )
    deltaf = Fraction(delta)
    atoms = _prepare(dist, kind, stats)
    ratios = sorted({at.ratio for at in atoms if at.ratio is not None})

    candidates: list[Fraction] = [Fraction(0)]
    if ratios:
        candidates.append(ratios[0] - 1)
        candidates.extend(ratios)
        candidates.extend((a + b) / 2 for a, b in zip(ratios, ratios[1:]))
        candidates.append(ratios[-1] + 1)

    best: tuple[Fraction, Fraction, Fraction, Fraction] | None = None  # risk, t, u, v
    for t in candidates:
        base_risk = sum((at.mass * at.eta for at in atoms), Fraction(0))
        d0 = Fraction(0)
        gain_plus = gain_minus = Fraction(0)  # disparity slopes of u, -v
        cost_plus = cost_minus = Fraction(0)  # risk slopes of u, v
        for at in atoms:
            slope = at.mass * (1 - 2 * at.eta)
            if at.w == 0:
                if at.eta > Fraction(1, 2):
                    base_risk += slope
            elif at.w > 0:
                if at.ratio > t:
                    base_risk += slope
                    d0 += at.mass * at.w
                elif at.ratio == t:
                    gain_plus += at.mass * at.w
                    cost_plus += slope
            else:
                if at.ratio < t:
                    base_risk += slope
                    d0 += at.mass * at.w
                elif at.ratio == t:
                    gain_minus -= at.mass * at.w
                    cost_minus += slope

        vertices: list[tuple[Fraction, Fraction]] = []
        for u in (Fraction(0), Fraction(1)):
            for v in (Fraction(0), Fraction(1)):
                if abs(d0 + u * gain_plus - v * gain_minus) <= deltaf:
                    vertices.append((u, v))
        for bound in (deltaf, -deltaf):
            if gain_minus != 0:
                for u in (Fraction(0), Fraction(1)):
                    v = (d0 + u * gain_plus - bound) / gain_minus
                    if 0 <= v <= 1:
                        vertices.append((u, v))
            if gain_plus != 0:
                for v in (Fraction(0), Fraction(1)):
                    u = (bound - d0 + v * gain_minus) / gain_plus
                    if 0 <= u <= 1:
                        vertices.append((u, v))

        for u, v in vertices:
            risk = base_risk + u * cost_plus + v * cost_minus
            if best is None or risk < best[0]:
                best = (risk, t, u, v)

    if best is None:
        raise SolverError("no feasible randomized classifier found")
    risk, t, u, v = best
    classifier = RandomizedClassifier(
        accept=_accepts(atoms, t, u, v), t_star=t, tau_plus=u, tau_minus=v
    )
    return risk, classifier
