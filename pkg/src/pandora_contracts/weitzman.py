"""Fair caps and exact/Monte-Carlo evaluation of resolved search policies.

The agent's reservation value ("fair cap") of a box solves
``sum_j p_ij * max(0, a_ij + t_ij - phi_i) = c_i``. A ResolvedPolicy is the
fully deterministic realization of the agent's index policy after all ties
have been broken: zero-cost boxes are opened up front, the remaining boxes
are grouped into phases of equal caps, and each phase carries an ordered box
list plus per-prize actions. Stop/continue decisions at agent-indifferent
states compare the best standing principal value against the per-box
voluntary-stop threshold recorded in the policy.

Evaluation tracks the lexicographic best observed pair (agent value including
transfer, principal value net of transfer); ties on the agent component are
resolved toward the principal, exact ties keep the earliest-opened prize.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .model import EPS, Box, Contract, Instance

STOP_AND_TAKE = "STOP_AND_TAKE"
CONTINUE = "CONTINUE"
NEVER_TAKE_YET = "NEVER_TAKE_YET"


class UtilityPair(NamedTuple):
    agent: float
    principal: float


class PolicyEntry(NamedTuple):
    box: int
    cap: float          # agent-side gate: open only while best agent value <= cap
    threshold: float    # principal-side gate at agent indifference (tau of the reduced box)
    actions: tuple[str, ...]


class PolicyPhase(NamedTuple):
    cap: float
    entries: tuple[PolicyEntry, ...]


class ResolvedPolicy(NamedTuple):
    zero_cost_prefix: tuple[int, ...]
    phases: tuple[PolicyPhase, ...]
    never_opened: tuple[int, ...]

    def opened_boxes(self) -> tuple[int, ...]:
        out = list(self.zero_cost_prefix)
        for phase in self.phases:
            out.extend(e.box for e in phase.entries)
        return tuple(out)

    def to_json_dict(self) -> dict:
        return {
            "zero_cost_prefix": list(self.zero_cost_prefix),
            "never_opened": list(self.never_opened),
            "phases": [
                {
                    "cap": phase.cap,
                    "boxes": [e.box for e in phase.entries],
                    "thresholds": {str(e.box): e.threshold for e in phase.entries},
                    "actions": {
                        f"{e.box}.{j}": act
                        for e in phase.entries
                        for j, act in enumerate(e.actions)
                    },
                }
                for phase in self.phases
            ],
        }


@dataclass(frozen=True)
class FairCapProfile:
    caps: tuple[float, ...]
    capped_values: tuple[tuple[float, ...], ...]   # kappa_ij = min(a_ij + t_ij, phi_i)


@dataclass(frozen=True)
class SimulationResult:
    utilities: UtilityPair
    agent_stderr: float
    principal_stderr: float
    trials: int
    seed: int


# ---------------------------------------------------------------------------
# Fair caps
# ---------------------------------------------------------------------------

def _cap_from_pairs(pairs: list[tuple[float, float]], cost: float, zero_cost: str) -> float:
    """Root of sum p*max(0, w - phi) = cost for (p, w) pairs with p > 0."""
    if cost == 0.0:
        if zero_cost == "inf":
            return math.inf
        if zero_cost == "max":
            return max(w for _, w in pairs)
        raise ValueError(f"unknown zero-cost convention '{zero_cost}'")
    if cost < 0:
        raise ValueError("fair cap needs a nonnegative cost")
    pairs = sorted(pairs, key=lambda pw: -pw[1])
    cum_p = 0.0
    cum_pw = 0.0
    m = len(pairs)
    for idx, (p, w) in enumerate(pairs):
        cum_p += p
        cum_pw += p * w
        cap = (cum_pw - cost) / cum_p
        nxt = pairs[idx + 1][1] if idx + 1 < m else -math.inf
        if cap >= nxt:
            return cap
    raise AssertionError("unreachable: prefix scan always terminates")


def fair_cap(box: Box, transfers: Sequence[float] | None = None, zero_cost: str = "max") -> float:
    """Agent's fair cap of a box under per-prize transfers (default zero).

    For ``cost == 0`` the cap is ambiguous; ``zero_cost`` picks the minimal
    consistent cap (``"max"``, the largest attainable agent value) or the
    ``"inf"`` sentinel used when such boxes are promoted to the opening
    prefix. The returned cap may be negative, which marks a box the agent
    never opens.
    """
    pairs = []
    for j, prize in enumerate(box.prizes):
        if prize.probability <= 0:
            continue
        t = transfers[j] if transfers is not None else 0.0
        pairs.append((prize.probability, prize.agent_value + t))
    if not pairs:
        raise ValueError("fair cap needs at least one positive-probability prize")
    return _cap_from_pairs(pairs, box.cost, zero_cost)


def fair_cap_principal(box: Box, zero_cost: str = "max") -> float:
    """Principal-side fair cap: the reservation value over b_ij at her own cost."""
    pairs = [(p.probability, p.principal_value) for p in box.prizes if p.probability > 0]
    if not pairs:
        raise ValueError("fair cap needs at least one positive-probability prize")
    return _cap_from_pairs(pairs, box.cost, zero_cost)


def fair_cap_profile(instance: Instance, contract: Contract, zero_cost: str = "max") -> FairCapProfile:
    caps = []
    capped = []
    for box, row in zip(instance.boxes, contract.transfers):
        cap = fair_cap(box, row, zero_cost=zero_cost)
        caps.append(cap)
        capped.append(tuple(min(p.agent_value + t, cap) for p, t in zip(box.prizes, row)))
    return FairCapProfile(tuple(caps), tuple(capped))


# ---------------------------------------------------------------------------
# Policy execution
# ---------------------------------------------------------------------------

def _compile_steps(instance: Instance, contract: Contract, policy: ResolvedPolicy):
    """Flatten (instance, contract, policy) into executable steps.

    Each step is (box, cost, cap, threshold, outcomes) with outcomes
    (probability, agent value incl. transfer, principal value net of
    transfer, stops, prize index); cap is None for the zero-cost prefix.
    """
    n = instance.n
    seen: set[int] = set()

    def outcomes_for(i: int, actions: tuple[str, ...] | None):
        box = instance.boxes[i]
        row = contract.transfers[i]
        if len(row) != len(box.prizes):
            raise ValueError(f"contract box {i}: transfer count mismatch")
        out = []
        for j, (prize, t) in enumerate(zip(box.prizes, row)):
            if prize.probability <= 0:
                continue
            stops = actions is not None and actions[j] == STOP_AND_TAKE
            out.append((prize.probability, prize.agent_value + t, prize.principal_value - t, stops, j))
        return tuple(out)

    steps = []
    for i in policy.zero_cost_prefix:
        if i in seen or not 0 <= i < n:
            raise ValueError(f"policy: box {i} repeated or out of range")
        seen.add(i)
        steps.append((i, instance.boxes[i].cost, None, 0.0, outcomes_for(i, None)))
    for phase in policy.phases:
        for entry in phase.entries:
            i = entry.box
            if i in seen or not 0 <= i < n:
                raise ValueError(f"policy: box {i} repeated or out of range")
            seen.add(i)
            if len(entry.actions) != len(instance.boxes[i].prizes):
                raise ValueError(f"policy: box {i} action table has wrong length")
            steps.append((i, instance.boxes[i].cost, entry.cap, entry.threshold, outcomes_for(i, entry.actions)))
    for i in policy.never_opened:
        if i in seen:
            raise ValueError(f"policy: box {i} repeated or out of range")
        seen.add(i)
    return steps


def evaluate_detailed(instance: Instance, contract: Contract, policy: ResolvedPolicy):
    """Exact expectations by forward DP over the best-observed pair.

    States are (agent value, principal value, origin box, origin prize) of
    the lexicographic best pair seen so far; at most n*m+1 states are
    reachable. Returns (UtilityPair, selection probabilities keyed by
    (box, prize) with (-1, -1) for stopping empty-handed, expected cost).
    """
    steps = _compile_steps(instance, contract, policy)
    states: dict[tuple[float, float, int, int], float] = {(0.0, 0.0, -1, -1): 1.0}
    agent = 0.0
    principal = 0.0
    cost_total = 0.0
    selection: dict[tuple[int, int], float] = {}

    def take(state, pr):
        nonlocal agent, principal
        a, b, oi, oj = state
        agent += pr * a
        principal += pr * b
        key = (oi, oj)
        selection[key] = selection.get(key, 0.0) + pr

    for box_i, cost, cap, threshold, outcomes in steps:
        nxt: dict[tuple[float, float, int, int], float] = {}
        for state, pr in states.items():
            a, b, oi, oj = state
            if cap is not None:
                if a > cap + EPS:
                    take(state, pr)
                    continue
                if a >= cap - EPS and b >= threshold - EPS:
                    take(state, pr)
                    continue
            agent -= pr * cost
            cost_total += pr * cost
            for p, av, bv, stops, j in outcomes:
                if av > a + EPS or (av >= a - EPS and bv > b):
                    nstate = (av, bv, box_i, j)
                else:
                    nstate = state
                w = pr * p
                if stops:
                    take(nstate, w)
                else:
                    nxt[nstate] = nxt.get(nstate, 0.0) + w
        states = nxt
    for state, pr in states.items():
        take(state, pr)
    return UtilityPair(agent, principal), selection, cost_total


def evaluate_exact(instance: Instance, contract: Contract, policy: ResolvedPolicy) -> UtilityPair:
    utilities, _, _ = evaluate_detailed(instance, contract, policy)
    return utilities


def simulate(
    instance: Instance,
    contract: Contract,
    policy: ResolvedPolicy,
    trials: int,
    seed: int,
) -> SimulationResult:
    """Unbiased Monte Carlo estimate of the policy's utilities.

    Trial ``t`` draws its prizes from Philox keyed (seed, t), one uniform per
    box in index order, so estimates are reproducible and independent of the
    policy's opening order.
    """
    if trials < 1:
        raise ValueError("simulate: trials must be >= 1")
    steps = _compile_steps(instance, contract, policy)
    n = instance.n
    cumulative = []
    for box in instance.boxes:
        acc = []
        total = 0.0
        for j, prize in enumerate(box.prizes):
            total += prize.probability
            acc.append((total, j))
        cumulative.append(acc)

    agent_samples = np.empty(trials)
    principal_samples = np.empty(trials)
    for t in range(trials):
        rng = np.random.Generator(np.random.Philox(key=[seed, t]))
        u = rng.random(n)
        drawn = []
        for i in range(n):
            pick = cumulative[i][-1][1]
            for threshold, j in cumulative[i]:
                if u[i] <= threshold:
                    pick = j
                    break
            drawn.append(pick)

        a, b = 0.0, 0.0
        agent_u = 0.0
        for box_i, cost, cap, threshold, outcomes in steps:
            if cap is not None:
                if a > cap + EPS or (a >= cap - EPS and b >= threshold - EPS):
                    break
            agent_u -= cost
            j = drawn[box_i]
            hit = next(o for o in outcomes if o[4] == j)
            _, av, bv, stops, _ = hit
            if av > a + EPS or (av >= a - EPS and bv > b):
                a, b = av, bv
            if stops:
                break
        agent_samples[t] = agent_u + a
        principal_samples[t] = b

    agent_mean = float(agent_samples.mean())
    principal_mean = float(principal_samples.mean())
    if trials > 1:
        agent_se = float(agent_samples.std(ddof=1) / math.sqrt(trials))
        principal_se = float(principal_samples.std(ddof=1) / math.sqrt(trials))
    else:
        agent_se = principal_se = 0.0
    return SimulationResult(UtilityPair(agent_mean, principal_mean), agent_se, principal_se, trials, seed)
