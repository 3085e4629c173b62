"""Brute-force ground truths for small instances.

These deliberately avoid the production code paths: the lexicographic DP
enumerates every adaptive policy over subsets, the binary oracle scans all
orderings with their pointwise-cheapest contracts, and the i.i.d. oracle
scans structured payment multisets. Size guards raise instead of degrading.
"""

from __future__ import annotations

import itertools
import math

from .general import binary_views, canonical_contract, iid_view, lifted_cap_transfer
from .model import EPS, Contract, Instance, LinearContract
from .tie_breaking import contract_utilities
from .weitzman import UtilityPair


def lex_dp(instance: Instance, contract: Contract, max_boxes: int = 12) -> UtilityPair:
    """Exact (agent, principal) value of an agent-optimal, principal-favoring
    policy, by backward induction over (opened set, best observed pair).

    The lexicographic comparison applies the project tolerance on the agent
    component before comparing principal components, matching the pipeline's
    tie semantics.
    """
    n = instance.n
    if n > max_boxes:
        raise ValueError(f"lex_dp: instance has {n} boxes, guard is {max_boxes}")
    boxes = []
    for box, row in zip(instance.boxes, contract.transfers):
        outs = tuple(
            (p.probability, p.agent_value + t, p.principal_value - t)
            for p, t in zip(box.prizes, row)
            if p.probability > 0
        )
        boxes.append((box.cost, outs))
    memo: dict[tuple[int, tuple[float, float]], tuple[float, float]] = {}

    def solve(mask: int, best: tuple[float, float]) -> tuple[float, float]:
        key = (mask, best)
        cached = memo.get(key)
        if cached is not None:
            return cached
        value = best  # stopping keeps the best pair; (0, 0) stands for "take nothing"
        for i in range(n):
            bit = 1 << i
            if mask & bit:
                continue
            cost, outs = boxes[i]
            ea = -cost
            eb = 0.0
            for p, av, bv in outs:
                if av > best[0] + EPS or (av >= best[0] - EPS and bv > best[1]):
                    nbest = (av, bv)
                else:
                    nbest = best
                sa, sb = solve(mask | bit, nbest)
                ea += p * sa
                eb += p * sb
            if ea > value[0] + EPS or (ea >= value[0] - EPS and eb > value[1]):
                value = (ea, eb)
        memo[key] = value
        return value

    a, b = solve(0, (0.0, 0.0))
    return UtilityPair(a, b)


def _binary_order_value(instance: Instance, contract: Contract) -> float:
    """Principal utility of a binary contract under the first-positive-prize
    policy, recomputed from scratch (caps via t + a - c/p, caps equal within
    EPS tie-broken by net value descending)."""
    views, _ = binary_views(instance)
    caps = []
    nets = []
    for view in views:
        t = contract.transfers[view.box][view.positive_prize]
        caps.append(t + view.agent_value - view.cost / view.probability)
        nets.append(view.principal_value - t)
    snapped: dict[float, float] = {}
    rep = None
    for c in sorted(set(caps), reverse=True):
        if rep is None or rep - c > EPS:
            rep = c
        snapped[c] = rep
    order = sorted(
        range(len(views)), key=lambda r: (-snapped[caps[r]], -nets[r], views[r].box)
    )
    value = 0.0
    reach = 1.0
    for r in order:
        value += reach * views[r].probability * nets[r]
        reach *= 1.0 - views[r].probability
    return value


def enumerate_orderings_binary(instance: Instance, max_boxes: int = 7):
    """Best canonical contract over all orderings of the kept binary boxes."""
    views, _ = binary_views(instance)
    if len(views) > max_boxes:
        raise ValueError(f"enumerate_orderings_binary: {len(views)} boxes, guard is {max_boxes}")
    kept = [v.box for v in views]
    best = None
    for perm in itertools.permutations(kept):
        contract = canonical_contract(instance, perm)
        if contract is None:
            continue
        value = _binary_order_value(instance, contract)
        if best is None or value > best[2]:
            best = (perm, contract, value)
    if best is None:
        zero = Contract(tuple(tuple(0.0 for _ in box.prizes) for box in instance.boxes))
        return (), zero, 0.0
    return best


def iid_payment_candidates(instance: Instance) -> list[float]:
    """Structured per-box payments that can appear in an optimal contract."""
    view = iid_view(instance)
    if view.p <= 0 or view.v <= 0:
        return [0.0]
    floor = max(view.basic_cap, 0.0)
    cands = [0.0]
    if view.basic_cap >= -EPS and view.a0 < view.basic_cap - EPS:
        cands.append(view.basic_cap - view.a0)
        for _, a in view.others:
            if view.a0 + EPS < a <= view.basic_cap + EPS:
                cands.append(a - view.a0)
    if view.basic_cap < -EPS:
        cands.append(lifted_cap_transfer(view, 0.0))
    for _, a in view.others:
        if a > floor + EPS:
            cands.append(lifted_cap_transfer(view, a))
    cands = [t for t in cands if 0.0 <= t <= view.v + EPS]
    cands.sort()
    deduped = []
    for t in cands:
        if not deduped or t - deduped[-1] > 1e-12:
            deduped.append(t)
    return deduped


def enumerate_payments_iid(instance: Instance, max_boxes: int = 5):
    """Exhaustive search over payment multisets from the structured candidate
    set, each assignment evaluated by the lexicographic DP."""
    n = instance.n
    if n > max_boxes:
        raise ValueError(f"enumerate_payments_iid: {n} boxes, guard is {max_boxes}")
    view = iid_view(instance)
    candidates = iid_payment_candidates(instance)
    best = None
    for combo in itertools.combinations_with_replacement(sorted(candidates, reverse=True), n):
        rows = []
        for i, box in enumerate(instance.boxes):
            row = [0.0] * len(box.prizes)
            if view.prize0 >= 0:
                row[view.prize0] = combo[i]
            rows.append(tuple(row))
        contract = Contract(tuple(rows))
        value = lex_dp(instance, contract).principal
        if best is None or value > best[1]:
            best = (combo, value)
    assert best is not None
    return best


def grid_search_linear(instance: Instance, step: float):
    """Best commission on a regular grid, via the full tie-breaking pipeline."""
    if step <= 0:
        raise ValueError("grid_search_linear: step must be positive")
    best_alpha = 0.0
    best_value = -math.inf
    k = 0
    while True:
        alpha = min(k * step, 1.0)
        value = contract_utilities(instance, LinearContract(alpha).to_contract(instance)).principal
        if value > best_value:
            best_alpha, best_value = alpha, value
        if alpha >= 1.0:
            break
        k += 1
    return best_alpha, best_value
