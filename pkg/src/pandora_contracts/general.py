"""Optimal general (per-prize) contracts in three tractable regimes.

* ``solve_no_agent_value``: when every prize is worthless to the agent, the
  principal can delegate at zero loss by paying out exactly the part of each
  prize that exceeds her own reservation value; expected payments per box
  equal its opening cost and the delegated utility equals the undelegated
  first-best.
* ``solve_binary``: boxes holding one positive prize and a worthless
  "0-prize". After renormalizing each box so its zero-payment fair cap is
  nonnegative, a greedy pass over boxes in decreasing basic-cap order tries,
  for each box, every already-placed cap as a lift target and keeps the most
  profitable one. Correctness rests on canonical contracts: lifting a block
  of caps to the highest basic cap behind them is the pointwise-cheapest way
  to implement an ordering.
* ``solve_iid_single_prize``: identical boxes whose only principal-positive
  prize may be paid differently per box. An optimal contract splits into a
  lifted block (prize 0 accepted immediately above the basic cap), a block
  paid up to the basic cap (also accepted immediately, by tie-breaking), and
  a tail block with one common payment whose prize 0 is only claimed at the
  very end. All such splits are enumerated and evaluated exactly.
"""

from __future__ import annotations

import math
from typing import NamedTuple

from .model import EPS, Box, Contract, Instance, Prize, zero_contract
from .tie_breaking import contract_utilities
from .weitzman import UtilityPair, fair_cap, fair_cap_principal


# ---------------------------------------------------------------------------
# First-best baseline
# ---------------------------------------------------------------------------

def principal_view(instance: Instance) -> Instance:
    """The search problem the principal would solve herself (values b, no transfers)."""
    return Instance(
        "general",
        tuple(
            Box(
                box.cost,
                tuple(Prize(p.probability, p.principal_value, p.principal_value) for p in box.prizes),
            )
            for box in instance.boxes
        ),
    )


def first_best(instance: Instance) -> float:
    """Expected utility of the principal searching on her own at her own cost."""
    mirrored = principal_view(instance)
    return contract_utilities(mirrored, zero_contract(mirrored)).agent


# ---------------------------------------------------------------------------
# No intrinsic agent value
# ---------------------------------------------------------------------------

def solve_no_agent_value(instance: Instance) -> tuple[Contract, UtilityPair]:
    """Optimal contract when a_ij = 0 everywhere: pay the excess over the
    principal's own fair cap. Boxes not worth opening for the principal
    (negative cap) get zero transfers and stay closed."""
    for i, box in enumerate(instance.boxes):
        for j, prize in enumerate(box.prizes):
            if prize.probability > 0 and prize.agent_value != 0:
                raise ValueError(f"solve_no_agent_value: box {i} prize {j} has agent value != 0")
    rows = []
    for box in instance.boxes:
        cap = fair_cap_principal(box)
        if cap >= 0:
            rows.append(tuple(max(0.0, p.principal_value - cap) for p in box.prizes))
        else:
            rows.append(tuple(0.0 for _ in box.prizes))
    contract = Contract(tuple(rows))
    return contract, contract_utilities(instance, contract)


# ---------------------------------------------------------------------------
# Binary boxes
# ---------------------------------------------------------------------------

class BinaryBoxView(NamedTuple):
    box: int
    probability: float      # chance of the positive prize
    agent_value: float
    principal_value: float
    cost: float
    positive_prize: int     # index of the positive prize inside the box
    base_transfer: float    # payment needed before the agent opens at all
    norm_agent: float       # agent value after folding in the base transfer
    norm_principal: float   # principal value net of the base transfer
    basic_cap: float        # zero-extra-payment fair cap, >= 0 after renormalization


class BinarySolution(NamedTuple):
    contract: Contract
    order: tuple[int, ...]
    utilities: UtilityPair
    internal_value: float   # principal utility the greedy evaluator computed
    excluded: tuple[int, ...]


def binary_views(instance: Instance) -> tuple[list[BinaryBoxView], list[int]]:
    """Renormalized per-box summaries, sorted by (basic cap desc, net value desc).

    Boxes whose positive prize cannot cover the cost even when fully paid out
    (p*(a+b) <= c) are excluded: no contract makes the agent open them for a
    principal gain.
    """
    if instance.kind != "binary":
        raise ValueError("binary solver requires a binary-kind instance")
    kept = []
    excluded = []
    for i, box in enumerate(instance.boxes):
        live = [(j, p) for j, p in enumerate(box.prizes) if p.probability > 0]
        positive = [(j, p) for j, p in live if not (p.agent_value == 0 and p.principal_value == 0)]
        if not positive:
            # both prizes worthless: keep the more likely one as the "positive" slot
            positive = [max(live, key=lambda jp: jp[1].probability)]
        if len(positive) != 1:
            raise ValueError(f"binary solver: box {i} is not binary")
        j, prize = positive[0]
        p, a, b, c = prize.probability, prize.agent_value, prize.principal_value, box.cost
        if p * (a + b) <= c + EPS:
            excluded.append(i)
            continue
        base = max(0.0, c / p - a)
        kept.append(
            BinaryBoxView(
                box=i,
                probability=p,
                agent_value=a,
                principal_value=b,
                cost=c,
                positive_prize=j,
                base_transfer=base,
                norm_agent=a + base,
                norm_principal=b - base,
                basic_cap=max(a - c / p, 0.0),
            )
        )
    kept.sort(key=lambda v: (-v.basic_cap, -v.norm_principal, v.box))
    return kept, excluded


def cluster_caps(caps: list[float]) -> list[float]:
    """Snap caps that agree within EPS to a shared representative (the cluster
    maximum), so sorting respects the agent's indifference between them."""
    reps: dict[float, float] = {}
    rep = None
    for c in sorted(set(caps), reverse=True):
        if rep is None or rep - c > EPS:
            rep = c
        reps[c] = rep
    return [reps[c] for c in caps]


def _binary_order(views: list[BinaryBoxView], caps: list[float]) -> list[int]:
    snapped = cluster_caps(caps)
    return sorted(
        range(len(views)),
        key=lambda r: (-snapped[r], -(views[r].norm_principal - (caps[r] - views[r].basic_cap)), r),
    )


def binary_expected_utility(views: list[BinaryBoxView], caps: list[float]) -> float:
    """Principal utility when the agent opens in cap order (caps equal within
    EPS tie-broken by net value descending) and accepts the first positive
    prize."""
    value = 0.0
    reach = 1.0
    for r in _binary_order(views, caps):
        view = views[r]
        net = view.norm_principal - (caps[r] - view.basic_cap)
        value += reach * view.probability * net
        reach *= 1.0 - view.probability
    return value


def _binary_contract(instance: Instance, views: list[BinaryBoxView], caps: list[float]) -> Contract:
    rows = [[0.0] * len(box.prizes) for box in instance.boxes]
    for view, cap in zip(views, caps):
        rows[view.box][view.positive_prize] = view.base_transfer + (cap - view.basic_cap)
    return Contract(tuple(tuple(row) for row in rows))


def solve_binary(instance: Instance) -> BinarySolution:
    """Greedy cap placement over boxes in basic-cap order.

    Box k (in decreasing basic-cap order) tries the current cap of every box
    placed before it, plus its own basic cap, and keeps the candidate with
    the best exact principal utility; ties go to the earliest candidate,
    i.e. the highest cap.
    """
    views, excluded = binary_views(instance)
    caps = [v.basic_cap for v in views]
    for k in range(len(views)):
        best_e = None
        best_cap = caps[k]
        for j in range(k + 1):
            trial = caps[:k] + [caps[j]] + caps[k + 1 :]
            e = binary_expected_utility(views, trial)
            if best_e is None or e > best_e:
                best_e = e
                best_cap = caps[j]
        caps[k] = best_cap
    internal = binary_expected_utility(views, caps)
    order = tuple(views[r].box for r in _binary_order(views, caps))
    contract = _binary_contract(instance, views, caps)
    return BinarySolution(contract, order, contract_utilities(instance, contract), internal, tuple(excluded))


def canonical_contract(instance: Instance, order: tuple[int, ...]) -> Contract | None:
    """Pointwise-cheapest contract implementing ``order`` over the kept boxes.

    Every position is lifted to the largest basic cap appearing at or after
    it. Returns None when the required payments exceed a prize's value or
    when the agent's tie-breaking (net value descending among equal caps)
    would not follow ``order``.
    """
    views, _ = binary_views(instance)
    by_box = {v.box: v for v in views}
    if sorted(order) != sorted(by_box):
        raise ValueError("canonical_contract: order must be a permutation of the kept boxes")
    seq = [by_box[i] for i in order]
    targets = [0.0] * len(seq)
    running = -math.inf
    for r in range(len(seq) - 1, -1, -1):
        running = max(running, seq[r].basic_cap)
        targets[r] = running
    nets = []
    for view, target in zip(seq, targets):
        lift = target - view.basic_cap
        if view.base_transfer + lift > view.principal_value + EPS:
            return None
        nets.append(view.norm_principal - lift)
    for r in range(len(seq) - 1):
        if abs(targets[r] - targets[r + 1]) <= EPS and nets[r] < nets[r + 1] - EPS:
            return None
    return _binary_contract(instance, seq, targets)


# ---------------------------------------------------------------------------
# I.i.d. boxes with a single principal-positive prize
# ---------------------------------------------------------------------------

class IIDView(NamedTuple):
    n: int
    cost: float
    p: float                 # probability of the principal-positive prize
    v: float                 # its principal value
    a0: float                # its agent value
    prize0: int              # its index inside each box
    others: tuple[tuple[float, float], ...]   # (probability, agent value), agent value ascending
    basic_cap: float
    best_below_cap: float | None   # largest other agent value <= basic cap


class IIDPlan(NamedTuple):
    lifted_count: int
    lifted_cap: float | None
    lifted_transfer: float
    front_count: int
    front_transfer: float
    tail_count: int
    tail_transfer: float

    @property
    def phase1_len(self) -> int:
        """Boxes whose positive prize is accepted the moment it appears."""
        return self.lifted_count + self.front_count


class IIDSolution(NamedTuple):
    contract: Contract
    plan: IIDPlan
    utilities: UtilityPair


def iid_view(instance: Instance) -> IIDView:
    if instance.kind != "iid_single_prize":
        raise ValueError("iid solver requires an iid_single_prize instance")
    box = instance.boxes[0]
    live = [(j, p) for j, p in enumerate(box.prizes) if p.probability > 0]
    positives = [(j, p) for j, p in live if p.principal_value > 0]
    if len(positives) > 1:
        raise ValueError("iid solver: more than one principal-positive prize")
    if positives:
        prize0, pz = positives[0]
        p, v, a0 = pz.probability, pz.principal_value, pz.agent_value
    else:
        prize0, p, v, a0 = -1, 0.0, 0.0, 0.0
    merged: list[list[float]] = []
    for j, pr in live:
        if j == prize0:
            continue
        for entry in merged:
            if abs(entry[1] - pr.agent_value) <= 1e-12:
                entry[0] += pr.probability
                break
        else:
            merged.append([pr.probability, pr.agent_value])
    others = tuple(sorted(((q, a) for q, a in merged), key=lambda qa: qa[1]))
    cap = fair_cap(box)
    below = [a for _, a in others if a <= cap + EPS]
    return IIDView(
        n=instance.n,
        cost=box.cost,
        p=p,
        v=v,
        a0=a0,
        prize0=prize0,
        others=others,
        basic_cap=cap,
        best_below_cap=max(below) if below else None,
    )


def lifted_cap_transfer(view: IIDView, cap: float) -> float:
    """Unique payment for the positive prize that moves a box's fair cap to
    ``cap`` (> basic cap). At ``cap == basic_cap`` this degenerates to the
    payment that parks the prize exactly at the cap."""
    shortfall = view.cost - sum(q * max(0.0, a - cap) for q, a in view.others)
    return cap - view.a0 + shortfall / view.p


def phase2_success_probability(n: int, p: float, q_weaker: float, count_at_level: int, count_below: int = 0) -> float:
    """Chance that a held-back positive prize from one payment level wins.

    ``q_weaker`` is the per-box probability of drawing a worthless prize the
    agent values no more than the level's positive-prize value; ``count_
    at_level``/``count_below`` count tail boxes paid exactly/strictly less.
    Closed form: Q^n ((p/Q + 1)^N - (p/Q + 1)^N_prev) with N cumulative.
    """
    if count_at_level <= 0:
        return 0.0
    n_cum = count_below + count_at_level
    if q_weaker <= 0.0:
        return p ** n if n_cum == n else 0.0
    base = p / q_weaker + 1.0
    return q_weaker ** n * (base ** n_cum - base ** count_below)


def iid_candidate_plans(view: IIDView) -> list[IIDPlan]:
    """Every (lifted block, basic-cap-payment block, common tail payment) split.

    A negative basic cap means nothing is opened for free; the cheapest way
    to put a box in play is then the payment lifting its cap to exactly 0,
    which joins the lift-target set alongside the agent values above the
    effective floor.
    """
    n = view.n
    zero = IIDPlan(0, None, 0.0, 0, 0.0, n, 0.0)
    if view.p <= 0 or view.v <= 0:
        return [zero]

    floor = max(view.basic_cap, 0.0)
    front_transfer = view.basic_cap - view.a0
    front_ok = (
        view.basic_cap >= -EPS
        and view.a0 < view.basic_cap - EPS
        and front_transfer <= view.v + EPS
    )

    tail_options = [0.0]
    if view.basic_cap >= -EPS and view.a0 < view.basic_cap - EPS:
        for _, a in view.others:
            if a <= view.basic_cap + EPS and a > view.a0 + EPS and abs(a - view.basic_cap) > EPS:
                t = a - view.a0
                if t <= view.v + EPS:
                    tail_options.append(t)
    tail_options = sorted(set(tail_options))

    lift_targets = []
    if view.basic_cap < -EPS:
        t = lifted_cap_transfer(view, 0.0)
        if t <= view.v + EPS:
            lift_targets.append((0.0, t))
    for _, a in view.others:
        if a > floor + EPS:
            t = lifted_cap_transfer(view, a)
            if t <= view.v + EPS:
                lift_targets.append((a, t))

    plans = [zero]
    for lifted in range(n + 1):
        cap_options: list[tuple[float | None, float]] = [(None, 0.0)] if lifted == 0 else lift_targets
        for cap, lift_t in cap_options:
            front_range = range(0, n - lifted + 1) if front_ok else (0,)
            for front in front_range:
                tail = n - lifted - front
                for tail_t in tail_options if tail > 0 else (0.0,):
                    plan = IIDPlan(lifted, cap, lift_t, front, front_transfer if front else 0.0, tail, tail_t)
                    if plan != zero:
                        plans.append(plan)
    return plans


def iid_plan_contract(instance: Instance, view: IIDView, plan: IIDPlan) -> Contract:
    rows = []
    for i, box in enumerate(instance.boxes):
        row = [0.0] * len(box.prizes)
        if view.prize0 >= 0:
            if i < plan.lifted_count:
                row[view.prize0] = plan.lifted_transfer
            elif i < plan.lifted_count + plan.front_count:
                row[view.prize0] = plan.front_transfer
            else:
                row[view.prize0] = plan.tail_transfer
        rows.append(tuple(row))
    return Contract(tuple(rows))


def solve_iid_single_prize(instance: Instance) -> IIDSolution:
    """Exact enumeration of the structured candidate contracts.

    Utility ties (within EPS) prefer more immediately-accepting boxes, then a
    longer basic-cap-payment block, then the smaller tail payment.
    """
    view = iid_view(instance)
    best: tuple[UtilityPair, IIDPlan, Contract] | None = None
    for plan in iid_candidate_plans(view):
        contract = iid_plan_contract(instance, view, plan)
        utilities = contract_utilities(instance, contract)
        if best is None:
            best = (utilities, plan, contract)
            continue
        cur_u, cur_plan, _ = best
        if utilities.principal > cur_u.principal + EPS:
            best = (utilities, plan, contract)
        elif utilities.principal >= cur_u.principal - EPS:
            cand_key = (plan.phase1_len, plan.front_count, -plan.tail_transfer)
            cur_key = (cur_plan.phase1_len, cur_plan.front_count, -cur_plan.tail_transfer)
            if cand_key > cur_key:
                best = (utilities, plan, contract)
    assert best is not None
    utilities, plan, contract = best
    return IIDSolution(contract, plan, utilities)


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------

def iid_phase2_levels(view: IIDView, plan: IIDPlan) -> list[tuple[float, int]]:
    """Tail payment levels as (agent value of the paid prize, box count)."""
    return [(view.a0 + plan.tail_transfer, plan.tail_count)] if plan.tail_count else []
