"""Principal-optimal tie-breaking of the agent's index policy.

Under a contract the agent's optimal search is any index policy over fair
caps, which leaves four kinds of ties: caps of zero-cost boxes, the order of
equal caps, stop-vs-continue at agent values equal to a cap, and which of
several agent-equal prizes to select. Among those agent-optimal choices the
agent acts in the principal's favor. The resolution implemented here:

* zero-cost boxes are opened unconditionally at the very beginning;
* positive-cost boxes with equal caps form a phase, and each phase reduces
  to a classic Pandora's-box instance over principal values: the prizes the
  agent would immediately stop on merge into a single "stop" option, the
  agent-indifferent prizes keep their principal values, everything below
  cap merges into a worthless bottom option;
* each reduced box gets an index tau (the best prefix average of option
  values), boxes are opened in decreasing tau order, and the phase stops
  voluntarily once the best standing principal value among agent-indifferent
  options reaches the next tau.

The resulting ResolvedPolicy matches the exhaustive lexicographic optimum on
both the agent's and the principal's expected utility.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

from .model import EPS, Box, Contract, Instance
from .weitzman import (
    CONTINUE,
    NEVER_TAKE_YET,
    STOP_AND_TAKE,
    PolicyEntry,
    PolicyPhase,
    ResolvedPolicy,
    UtilityPair,
    evaluate_exact,
    fair_cap,
)


class Phase(NamedTuple):
    cap: float
    boxes: tuple[int, ...]


class ReducedBox(NamedTuple):
    box: int
    stop_probability: float                       # mass of prizes the agent must stop on
    stop_value: float                             # principal value conditioned on stopping
    indifferent: tuple[tuple[float, float, int], ...]  # (probability, principal value, prize)
    bottom_probability: float                     # mass the agent never takes mid-phase
    tau: float
    prefix_len: int
    reduced_cost: float
    actions: tuple[str, ...]


def _partition_with_caps(instance: Instance, contract: Contract):
    """Like partition_phases, but phases carry each member's own cap."""
    prefix = []
    openable = []
    never = []
    for i, box in enumerate(instance.boxes):
        if box.cost == 0.0:
            prefix.append(i)
            continue
        cap = fair_cap(box, contract.transfers[i])
        if cap < -EPS:
            never.append(i)
        else:
            openable.append((cap, i))
    openable.sort(key=lambda ci: (-ci[0], ci[1]))
    phases: list[list[tuple[float, int]]] = []
    group: list[tuple[float, int]] = []
    group_cap = 0.0
    for cap, i in openable:
        if group and group_cap - cap > EPS:
            phases.append(group)
            group = []
        if not group:
            group_cap = cap
        group.append((cap, i))
    if group:
        phases.append(group)
    return tuple(prefix), phases, tuple(never)


def partition_phases(instance: Instance, contract: Contract):
    """Group boxes by fair cap: (zero-cost prefix, phases by cap desc, never opened)."""
    prefix, raw, never = _partition_with_caps(instance, contract)
    phases = tuple(Phase(group[0][0], tuple(i for _, i in group)) for group in raw)
    return prefix, phases, never


def tau_index(options: Sequence[tuple[float, float]]) -> tuple[float, int]:
    """Best prefix average of (probability, value) options; ties take the longer prefix.

    Option 1 must be the merged stop option; the remaining values must be
    sorted in non-increasing order.
    """
    if not options or options[0][0] <= 0:
        raise ValueError("tau_index: merged stop option must carry positive probability")
    best = None
    best_k = 0
    cum_p = 0.0
    cum_pv = 0.0
    for k, (p, v) in enumerate(options, start=1):
        cum_p += p
        cum_pv += p * v
        avg = cum_pv / cum_p
        if best is None or avg > best + EPS:
            best = avg
            best_k = k
        elif avg >= best - EPS:
            best = avg
            best_k = k
    return best, best_k


def reduce_box(box: Box, transfers: Sequence[float], cap: float, box_index: int = -1) -> ReducedBox:
    """Reduce one phase member to its classic Pandora's-box form."""
    stop_p = 0.0
    stop_pv = 0.0
    indiff: list[tuple[float, float, int]] = []
    bottom_p = 0.0
    actions = []
    for j, (prize, t) in enumerate(zip(box.prizes, transfers)):
        if prize.probability <= 0:
            actions.append(NEVER_TAKE_YET)
            continue
        v = prize.agent_value + t
        net = prize.principal_value - t
        if v > cap + EPS:
            stop_p += prize.probability
            stop_pv += prize.probability * net
            actions.append(STOP_AND_TAKE)
        elif v >= cap - EPS:
            indiff.append((prize.probability, net, j))
            actions.append(CONTINUE)
        else:
            bottom_p += prize.probability
            actions.append(NEVER_TAKE_YET)
    if stop_p <= 0:
        raise ValueError(f"box {box_index}: no prize above the fair cap (positive-cost box expected)")
    stop_value = stop_pv / stop_p
    indiff.sort(key=lambda e: (-e[1], e[2]))
    tau, kstar = tau_index([(stop_p, stop_value)] + [(p, v) for p, v, _ in indiff])
    reduced_cost = max(0.0, stop_p * (tau - stop_value))
    return ReducedBox(
        box_index,
        stop_p,
        stop_value,
        tuple(indiff),
        bottom_p,
        tau,
        kstar,
        reduced_cost,
        tuple(actions),
    )


def optimal_policy(instance: Instance, contract: Contract) -> ResolvedPolicy:
    """Principal-optimal policy among the agent-optimal index policies."""
    prefix, phases, never = _partition_with_caps(instance, contract)
    out_phases = []
    for group in phases:
        reduced = []
        for cap_i, i in group:
            reduced.append((cap_i, reduce_box(instance.boxes[i], contract.transfers[i], cap_i, box_index=i)))
        reduced.sort(key=lambda cr: (-cr[1].tau, -cr[1].stop_value, cr[1].box))
        entries = tuple(
            PolicyEntry(red.box, cap_i, red.tau, red.actions) for cap_i, red in reduced
        )
        out_phases.append(PolicyPhase(group[0][0], entries))
    return ResolvedPolicy(prefix, tuple(out_phases), never)


def contract_utilities(instance: Instance, contract: Contract) -> UtilityPair:
    """Exact utilities of the agent's (principal-favoring) optimal policy."""
    return evaluate_exact(instance, contract, optimal_policy(instance, contract))
