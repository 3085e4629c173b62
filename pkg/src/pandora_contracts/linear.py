"""Optimal linear contracts by critical-value enumeration.

Under a commission ``alpha`` the agent values prize ``(i, j)`` at
``v_ij(alpha) = a_ij + alpha * b_ij`` and each positive-cost box gets a fair
cap ``phi_i(alpha)`` that is a monotone convex piecewise-linear function of
``alpha`` with at most ``2m + 1`` segments. Between consecutive "critical"
values of alpha the set of agent-optimal policies is constant and the
principal's utility is ``(1 - alpha) * const``, so the optimum is attained
at a critical value. The enumerated cases:

* ENDPOINT: alpha in {0, 1};
* CAP_CAP: two fair-cap curves cross (opening order changes);
* VALUE_CAP: a prize-value line crosses a fair-cap curve (acceptance or
  stopping behavior changes);
* CAP_ZERO: a fair cap hits zero (a box drops out of the search);
* VALUE_VALUE: prize-value lines of two different boxes cross (the final
  selection among observed prizes flips).

Intersections are over-included on purpose: a touching intersection or a
spurious extra alpha only adds an evaluation point, never an error.
"""

from __future__ import annotations

import csv
from typing import NamedTuple

from .model import EPS, Box, Contract, Instance, LinearContract
from .tie_breaking import contract_utilities
from .weitzman import UtilityPair, fair_cap

CASE_ENDPOINT = "ENDPOINT"
CASE_CAP_CAP = "CAP_CAP"
CASE_VALUE_CAP = "VALUE_CAP"
CASE_CAP_ZERO = "CAP_ZERO"
CASE_VALUE_VALUE = "VALUE_VALUE"

_TINY = 1e-12


class CurveSegment(NamedTuple):
    lo: float
    hi: float
    intercept: float
    slope: float
    active: frozenset[int]

    def value(self, alpha: float) -> float:
        return self.intercept + self.slope * alpha


class FairCapCurve(NamedTuple):
    segments: tuple[CurveSegment, ...]

    def value(self, alpha: float) -> float:
        alpha = min(max(alpha, 0.0), 1.0)
        for seg in self.segments:
            if alpha <= seg.hi + _TINY:
                return seg.value(alpha)
        return self.segments[-1].value(alpha)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(seg.lo for seg in self.segments[1:])


class CriticalValue(NamedTuple):
    alpha: float
    cases: frozenset[str]


class CriticalValueSet(NamedTuple):
    values: tuple[CriticalValue, ...]

    @property
    def alphas(self) -> tuple[float, ...]:
        return tuple(cv.alpha for cv in self.values)


def _live_prizes(box: Box) -> list[tuple[int, float, float, float]]:
    return [
        (j, p.probability, p.agent_value, p.principal_value)
        for j, p in enumerate(box.prizes)
        if p.probability > 0
    ]


def _affine_for(box: Box, active: frozenset[int]) -> tuple[float, float]:
    """phi(alpha) = intercept + slope*alpha while the active set is fixed."""
    mass = sum(box.prizes[j].probability for j in active)
    intercept = (
        sum(box.prizes[j].probability * box.prizes[j].agent_value for j in active) - box.cost
    ) / mass
    slope = sum(box.prizes[j].probability * box.prizes[j].principal_value for j in active) / mass
    return intercept, slope


def _active_set_at(box: Box, alpha: float) -> frozenset[int]:
    """Prizes whose value sits weakly above the cap just to the right of alpha.

    Prizes strictly above the cap always belong; boundary prizes join in
    decreasing slope order while their value line rises faster than the
    resulting cap (so the set is correct for the segment starting at alpha).
    """
    live = _live_prizes(box)
    transfers = [alpha * p.principal_value for p in box.prizes]
    phi = fair_cap(box, transfers)
    strict = {j for j, _, a, b in live if a + alpha * b > phi + EPS}
    boundary = [(j, b) for j, _, a, b in live if abs(a + alpha * b - phi) <= EPS]
    if not strict:
        top = max(live, key=lambda e: (e[2] + alpha * e[3], e[3]))
        strict = {top[0]}
        boundary = [(j, b) for j, b in boundary if j != top[0]]
    active = set(strict)
    boundary.sort(key=lambda jb: -jb[1])
    for j, b in boundary:
        _, slope = _affine_for(box, frozenset(active))
        if b > slope + _TINY:
            active.add(j)
    return frozenset(active)


def build_faircap_curve(box: Box) -> FairCapCurve:
    """Exact segment decomposition of phi(alpha) on [0, 1] for a positive-cost box."""
    if box.cost <= 0:
        raise ValueError("fair-cap curves are defined for positive-cost boxes")
    live = _live_prizes(box)
    segments: list[CurveSegment] = []
    alpha = 0.0
    guard = 4 * len(live) + 8
    while True:
        active = _active_set_at(box, alpha)
        intercept, slope = _affine_for(box, active)
        nxt = 1.0
        for j, _, a, b in live:
            denom = b - slope
            if abs(denom) <= _TINY:
                continue
            in_active = j in active
            if in_active and b >= slope:
                continue
            if not in_active and b <= slope:
                continue
            crossing = (intercept - a) / denom
            if alpha + _TINY < crossing < nxt:
                nxt = crossing
        segments.append(CurveSegment(alpha, nxt, intercept, slope, active))
        if nxt >= 1.0 - _TINY:
            break
        alpha = nxt
        guard -= 1
        if guard <= 0:
            raise RuntimeError("fair-cap curve did not stabilize (degenerate box?)")
    merged = [segments[0]]
    for seg in segments[1:]:
        last = merged[-1]
        if abs(seg.intercept - last.intercept) <= _TINY and abs(seg.slope - last.slope) <= _TINY:
            merged[-1] = CurveSegment(last.lo, seg.hi, last.intercept, last.slope, last.active)
        else:
            merged.append(seg)
    return FairCapCurve(tuple(merged))


def critical_values(instance: Instance) -> CriticalValueSet:
    """All alphas in [0, 1] at which the set of agent-optimal policies can change."""
    curves = {
        i: build_faircap_curve(box)
        for i, box in enumerate(instance.boxes)
        if box.cost > 0
    }
    events: list[tuple[float, str]] = [(0.0, CASE_ENDPOINT), (1.0, CASE_ENDPOINT)]

    def propose(alpha: float, lo: float, hi: float, case: str):
        if lo - _TINY <= alpha <= hi + _TINY and -_TINY <= alpha <= 1.0 + _TINY:
            events.append((min(max(alpha, 0.0), 1.0), case))

    # (c) cap hits zero
    for curve in curves.values():
        for seg in curve.segments:
            if abs(seg.slope) > _TINY:
                propose(-seg.intercept / seg.slope, seg.lo, seg.hi, CASE_CAP_ZERO)

    # (b) prize-value line crosses a fair-cap curve (any box's line, incl. zero-cost)
    lines = [
        (i, j, a, b)
        for i, box in enumerate(instance.boxes)
        for j, _, a, b in _live_prizes(box)
    ]
    for i, j, a, b in lines:
        for curve in curves.values():
            for seg in curve.segments:
                denom = b - seg.slope
                if abs(denom) <= _TINY:
                    continue
                propose((seg.intercept - a) / denom, seg.lo, seg.hi, CASE_VALUE_CAP)

    # (a) two fair-cap curves cross; identical curves never change order
    def same_curve(c1: FairCapCurve, c2: FairCapCurve) -> bool:
        if len(c1.segments) != len(c2.segments):
            return False
        return all(
            abs(s1.lo - s2.lo) <= _TINY
            and abs(s1.intercept - s2.intercept) <= _TINY
            and abs(s1.slope - s2.slope) <= _TINY
            for s1, s2 in zip(c1.segments, c2.segments)
        )

    indices = sorted(curves)
    for pos, i in enumerate(indices):
        for i2 in indices[pos + 1 :]:
            if same_curve(curves[i], curves[i2]):
                continue
            for seg1 in curves[i].segments:
                for seg2 in curves[i2].segments:
                    lo = max(seg1.lo, seg2.lo)
                    hi = min(seg1.hi, seg2.hi)
                    if lo > hi + _TINY:
                        continue
                    if abs(seg1.slope - seg2.slope) <= _TINY:
                        continue
                    alpha = (seg2.intercept - seg1.intercept) / (seg1.slope - seg2.slope)
                    propose(alpha, lo, hi, CASE_CAP_CAP)

    # prize-value lines of different boxes cross: the agent-best selection flips
    for first in range(len(lines)):
        i1, _, a1, b1 = lines[first]
        for second in range(first + 1, len(lines)):
            i2, _, a2, b2 = lines[second]
            if i1 == i2 or abs(b1 - b2) <= _TINY:
                continue
            propose((a2 - a1) / (b1 - b2), 0.0, 1.0, CASE_VALUE_VALUE)

    events.sort(key=lambda ec: ec[0])
    out: list[tuple[float, set[str]]] = []
    for alpha, case in events:
        if out and alpha - out[-1][0] <= EPS:
            out[-1][1].add(case)
        else:
            out.append((alpha, {case}))
    return CriticalValueSet(tuple(CriticalValue(a, frozenset(cs)) for a, cs in out))


def optimal_linear(instance: Instance) -> tuple[float, Contract, UtilityPair]:
    """Best commission rate: evaluate every critical value, keep the smallest maximizer."""
    best_alpha = 0.0
    best_contract: Contract | None = None
    best: UtilityPair | None = None
    for cv in critical_values(instance).values:
        contract = LinearContract(cv.alpha).to_contract(instance)
        utilities = contract_utilities(instance, contract)
        if best is None or utilities.principal > best.principal:
            best_alpha, best_contract, best = cv.alpha, contract, utilities
    assert best_contract is not None and best is not None
    return best_alpha, best_contract, best


def sweep_grid(step: float) -> list[float]:
    if step <= 0:
        raise ValueError("sweep step must be positive")
    grid = []
    k = 0
    while True:
        alpha = k * step
        if alpha >= 1.0 - _TINY:
            break
        grid.append(alpha)
        k += 1
    grid.append(1.0)
    return grid


def alpha_sweep(instance: Instance, step: float) -> list[tuple[float, float, float]]:
    """Table of (alpha, agent utility, principal utility) over a regular grid."""
    rows = []
    for alpha in sweep_grid(step):
        utilities = contract_utilities(instance, LinearContract(alpha).to_contract(instance))
        rows.append((alpha, utilities.agent, utilities.principal))
    return rows


def write_sweep_csv(rows, path, alpha_star: float | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["alpha", "agent_utility", "principal_utility"])
        for alpha, agent, principal in rows:
            writer.writerow([format(alpha, ".12g"), format(agent, ".12g"), format(principal, ".12g")])
        if alpha_star is not None:
            fh.write(f"# alpha_star={format(alpha_star, '.12g')}\n")
