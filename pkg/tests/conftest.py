"""Shared test helpers: independent oracles and corpus builders."""

import math

from pandora_contracts import Box, gen_random
from pandora_contracts.generators import make_rng


def bisect_fair_cap(box: Box, transfers=None, iters: int = 120) -> float:
    """Root of sum p*max(0, w - phi) = c by bisection; independent of the
    closed-form prefix construction."""
    pairs = []
    for j, p in enumerate(box.prizes):
        if p.probability <= 0:
            continue
        t = transfers[j] if transfers is not None else 0.0
        pairs.append((p.probability, p.agent_value + t))
    assert box.cost > 0

    def residual(phi):
        return math.fsum(p * max(0.0, w - phi) for p, w in pairs) - box.cost

    lo = min(w for _, w in pairs) - box.cost - 1.0
    hi = max(w for _, w in pairs)
    assert residual(lo) > 0 >= residual(hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if residual(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def policy_signature(policy):
    """Structure of a ResolvedPolicy without its float thresholds."""
    return (
        policy.zero_cost_prefix,
        tuple(
            (tuple(e.box for e in ph.entries), tuple(e.actions for e in ph.entries))
            for ph in policy.phases
        ),
        policy.never_opened,
    )


def random_general_corpus(count, seed0, n_max=6, m_max=4):
    out = []
    for i in range(count):
        rng = make_rng(seed0 + i)
        n = int(rng.integers(1, n_max + 1))
        m = int(rng.integers(1, m_max + 1))
        out.append(gen_random(n, m, seed0 + 10_000 + i, "general"))
    return out


def random_binary_corpus(count, seed0, n_max=7):
    out = []
    for i in range(count):
        rng = make_rng(seed0 + i)
        n = int(rng.integers(1, n_max + 1))
        out.append(gen_random(n, 2, seed0 + 10_000 + i, "binary"))
    return out


def random_iid_corpus(count, seed0, n_max=5, m_max=3):
    out = []
    for i in range(count):
        rng = make_rng(seed0 + i)
        n = int(rng.integers(1, n_max + 1))
        m = int(rng.integers(2, m_max + 1))
        out.append(gen_random(n, m, seed0 + 10_000 + i, "iid_single_prize"))
    return out
