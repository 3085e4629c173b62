"""Instance generators for experiments and tests.

All randomness is drawn from numpy's Philox counter-based generator with an
explicit integer seed, so every generator is bit-reproducible across
platforms and processes. Documented ranges: prize values in [0, 10], opening
costs in [0, 2], probabilities from a normalized unit-exponential (Dirichlet)
draw.
"""

from __future__ import annotations

import math

import numpy as np

from .model import Box, Contract, Instance, Prize, normalize_instance


def make_rng(seed: int, stream: int | None = None) -> np.random.Generator:
    """Philox(4x64) generator keyed by (seed, stream)."""
    key = seed if stream is None else [seed, stream]
    return np.random.Generator(np.random.Philox(key=key))


def _dirichlet(rng: np.random.Generator, m: int) -> np.ndarray:
    g = rng.exponential(1.0, size=m)
    return g / g.sum()


def gen_random(n: int, m: int, seed: int, kind: str = "general") -> Instance:
    """Random instance of the requested kind; deterministic given the seed."""
    if n < 1 or m < 1:
        raise ValueError("gen_random: n and m must be >= 1")
    rng = make_rng(seed)
    if kind == "general":
        boxes = []
        for _ in range(n):
            cost = rng.uniform(0.0, 2.0)
            probs = _dirichlet(rng, m)
            agents = rng.uniform(0.0, 10.0, size=m)
            principals = rng.uniform(0.0, 10.0, size=m)
            boxes.append(
                Box(float(cost), tuple(Prize(float(p), float(a), float(b)) for p, a, b in zip(probs, agents, principals)))
            )
        return Instance("general", tuple(boxes))
    if kind == "binary":
        if m != 2:
            raise ValueError("gen_random: binary boxes have exactly two prizes (m=2)")
        boxes = []
        for _ in range(n):
            cost = rng.uniform(0.0, 2.0)
            p = rng.uniform(0.05, 0.95)
            a = rng.uniform(0.0, 10.0)
            b = rng.uniform(0.0, 10.0)
            boxes.append(Box(float(cost), (Prize(float(p), float(a), float(b)), Prize(float(1.0 - p), 0.0, 0.0))))
        return Instance("binary", tuple(boxes))
    if kind == "iid_single_prize":
        cost = rng.uniform(0.0, 2.0)
        probs = _dirichlet(rng, m)
        b0 = rng.uniform(0.5, 10.0)
        a0 = rng.uniform(0.0, 3.0)
        others = rng.uniform(0.0, 10.0, size=m - 1)
        prizes = [Prize(float(probs[0]), float(a0), float(b0))]
        prizes += [Prize(float(q), float(a), 0.0) for q, a in zip(probs[1:], others)]
        box = Box(float(cost), tuple(prizes))
        return normalize_instance(Instance("iid_single_prize", tuple(box for _ in range(n))))
    raise ValueError(f"gen_random: unsupported kind '{kind}'")


def gen_linear_gap_family(n: int, growth: float = 4.0) -> Instance:
    """Family on which linear contracts lose a growing factor to general ones.

    Geometric hard family for linear contracts, after the gap construction of
    Duetting, Roughgarden & Talgam-Cohen ("Simple versus Optimal Contracts"):
    box i (1-based) holds a single deterministic prize worth nothing to the
    agent and R_i = growth**(i-1) to the principal. Costs are set so that
    under a commission alpha the agent switches to box i exactly at
    alpha_i = 1 - growth**(1-i), where the principal's payoff (1-alpha_i)*R_i
    is always 1. Welfare R_i - c_i = 1 + (i-1)*(1 - 1/growth) keeps rising,
    so the best general contract beats every linear one by a factor that
    grows with n.
    """
    if n < 2:
        raise ValueError("gen_linear_gap_family: n must be >= 2")
    if growth <= 1:
        raise ValueError("gen_linear_gap_family: growth must exceed 1")
    boxes = []
    cost = 0.0
    reward_prev = None
    for i in range(1, n + 1):
        reward = growth ** (i - 1)
        if reward_prev is not None:
            alpha_i = 1.0 - growth ** (1 - i)
            cost += alpha_i * (reward - reward_prev)
        boxes.append(Box(cost, (Prize(1.0, 0.0, reward),)))
        reward_prev = reward
    return Instance("general", tuple(boxes))


def gen_paper_example_iid(n: int, k: int) -> tuple[Instance, float]:
    """Two-payment i.i.d. family with a tunable phase boundary.

    n identical boxes, cost 1/n each. Prize 0 is the only principal-positive
    prize: value pair (0, 1 + alpha) with probability 1/n, where
    alpha = (1-1/n)**k / (1 - (1-1/n)**k) for k in [1, n-1]. Prize 1 pays the
    agent 2 with probability 1/n; prize 2 pays nothing with the remaining
    mass. The basic fair cap of each box equals 1, and at this alpha the
    principal is exactly indifferent about paying 1 for immediate acceptance
    of prize 0 at the phase boundary.
    """
    if not 1 <= k <= n - 1:
        raise ValueError("gen_paper_example_iid: need 1 <= k <= n-1")
    decay = (1.0 - 1.0 / n) ** k
    alpha = decay / (1.0 - decay)
    q = 1.0 / n
    box = Box(
        1.0 / n,
        (
            Prize(q, 0.0, 1.0 + alpha),
            Prize(q, 2.0, 0.0),
            Prize(1.0 - 2.0 * q, 0.0, 0.0),
        ),
    )
    return Instance("iid_single_prize", tuple(box for _ in range(n))), alpha


def random_contract(instance: Instance, seed: int, stream: int | None = None) -> Contract:
    """Uniform random feasible contract: t_ij ~ U[0, b_ij]."""
    rng = make_rng(seed, stream)
    rows = []
    for box in instance.boxes:
        rows.append(tuple(float(rng.uniform(0.0, p.principal_value)) if p.principal_value > 0 else 0.0 for p in box.prizes))
    return Contract(tuple(rows))


def expected_box_value(box: Box) -> float:
    """Mean principal value of a box's prize draw (ignores cost)."""
    return math.fsum(p.probability * p.principal_value for p in box.prizes)
