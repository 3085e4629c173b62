import math

import pytest

from pandora_contracts import (
    alpha_sweep,
    build_faircap_curve,
    build_instance,
    contract_utilities,
    critical_values,
    fair_cap,
    gen_random,
    optimal_linear,
    optimal_policy,
)
from pandora_contracts.generators import make_rng
from pandora_contracts.linear import (
    CASE_CAP_CAP,
    CASE_CAP_ZERO,
    CASE_ENDPOINT,
    CASE_VALUE_CAP,
    CASE_VALUE_VALUE,
    sweep_grid,
    write_sweep_csv,
)
from pandora_contracts.model import EPS, LinearContract
from pandora_contracts.oracle import grid_search_linear

from conftest import policy_signature


def _random_positive_cost_box(seed, m_max=4):
    rng = make_rng(seed)
    m = int(rng.integers(1, m_max + 1))
    box = gen_random(1, m, seed + 100_000, "general").boxes[0]
    return box if box.cost > 0 else None


def test_curve_single_prize_closed_form():
    box = build_instance("general", [(0.4, [(1.0, 1.5, 2.0)])]).boxes[0]
    curve = build_faircap_curve(box)
    assert len(curve.segments) == 1
    seg = curve.segments[0]
    assert seg.intercept == pytest.approx(1.5 - 0.4, abs=1e-12)
    assert seg.slope == pytest.approx(2.0, abs=1e-12)


def test_curve_constant_when_principal_worthless():
    box = build_instance(
        "general", [(0.3, [(0.5, 2.0, 0.0), (0.5, 1.0, 0.0)])]
    ).boxes[0]
    curve = build_faircap_curve(box)
    assert len(curve.segments) == 1
    assert curve.segments[0].slope == pytest.approx(0.0, abs=1e-12)


def test_curve_requires_positive_cost():
    box = build_instance("general", [(0.0, [(1.0, 1.0, 1.0)])]).boxes[0]
    with pytest.raises(ValueError):
        build_faircap_curve(box)


def test_curve_pointwise_convexity_and_segment_count():
    rng = make_rng(123)
    for i in range(40):
        box = _random_positive_cost_box(200_000 + i)
        if box is None:
            continue
        curve = build_faircap_curve(box)
        live = sum(1 for p in box.prizes if p.probability > 0)
        assert len(curve.segments) <= 2 * live + 1
        slopes = [s.slope for s in curve.segments]
        for lo, hi in zip(slopes, slopes[1:]):
            assert hi >= lo - 1e-9
        for _ in range(40):
            alpha = float(rng.random())
            direct = fair_cap(box, [alpha * p.principal_value for p in box.prizes])
            assert curve.value(alpha) == pytest.approx(direct, abs=1e-9)


def test_critical_values_single_prize_box():
    # cap a + alpha*b - c crosses zero at (c - a)/b
    inst = build_instance("general", [(2.0, [(1.0, 1.0, 4.0)])])
    cvs = critical_values(inst)
    alphas = cvs.alphas
    assert alphas[0] == 0.0 and alphas[-1] == 1.0
    root = (2.0 - 1.0) / 4.0
    assert any(abs(a - root) <= 1e-9 for a in alphas)
    tagged = {a: cases for a, cases in cvs.values}
    assert CASE_CAP_ZERO in tagged[min(tagged, key=lambda a: abs(a - root))]


def test_identical_curves_make_no_cap_cap_values():
    row = (0.5, [(0.5, 2.0, 1.0), (0.5, 0.0, 3.0)])
    inst = build_instance("general", [row, row])
    for cv in critical_values(inst).values:
        assert CASE_CAP_CAP not in cv.cases


def test_value_value_crossing_detected():
    # selection between two held prizes flips although no cap is involved
    inst = build_instance(
        "general",
        [
            (0.15, [(0.5, 2.6, 0.0), (0.5, 1.05, 2.0)]),
            (0.25, [(0.5, 3.0, 0.0), (0.5, 1.0, 7.0)]),
        ],
    )
    cvs = critical_values(inst)
    hit = [cv for cv in cvs.values if abs(cv.alpha - 0.01) <= 1e-9]
    assert hit and CASE_VALUE_VALUE in hit[0].cases
    alpha, _, up = optimal_linear(inst)
    _, grid_val = grid_search_linear(inst, 1e-3)
    assert up.principal >= grid_val - 1e-6


def test_policy_structure_constant_between_criticals():
    for i in range(10):
        inst = gen_random(3, 2, 210_000 + i, "general")
        alphas = critical_values(inst).alphas
        for lo, hi in zip(alphas, alphas[1:]):
            if hi - lo < 1e-6:
                continue
            sigs = set()
            for frac in (0.13, 0.34, 0.52, 0.71, 0.93):
                alpha = lo + frac * (hi - lo)
                contract = LinearContract(alpha).to_contract(inst)
                sigs.add(policy_signature(optimal_policy(inst, contract)))
            assert len(sigs) == 1


def test_optimal_linear_prefers_zero_when_policy_constant():
    # the agent takes the single prize regardless of alpha: pay nothing
    inst = build_instance("general", [(1.0, [(1.0, 5.0, 1.0)])])
    alpha, contract, up = optimal_linear(inst)
    assert alpha == 0.0
    assert up.principal == pytest.approx(1.0, abs=1e-12)


def test_optimal_linear_boundary_box_worth_zero():
    # the sole valuable box opens only at alpha = 1, where the principal's
    # margin vanishes; every alpha is worth 0 and the tie rule keeps the
    # smallest one
    inst = build_instance("general", [(2.0, [(1.0, 0.0, 2.0)])])
    alpha, contract, up = optimal_linear(inst)
    assert up.principal == pytest.approx(0.0, abs=1e-12)
    assert alpha == 0.0


def test_optimal_linear_beats_grid_oracle():
    for i in range(12):
        rng = make_rng(220_000 + i)
        n = int(rng.integers(1, 6))
        m = int(rng.integers(1, 4))
        inst = gen_random(n, m, 221_000 + i, "general")
        _, _, up = optimal_linear(inst)
        _, grid_val = grid_search_linear(inst, 1e-3)
        assert up.principal >= grid_val - 1e-6


def test_interval_utility_is_linear_in_alpha():
    for i in range(8):
        inst = gen_random(3, 3, 230_000 + i, "general")
        alphas = critical_values(inst).alphas
        for lo, hi in zip(alphas, alphas[1:]):
            if hi - lo < 1e-5:
                continue
            vals = []
            for frac in (0.25, 0.5, 0.75):
                alpha = lo + frac * (hi - lo)
                vals.append(
                    contract_utilities(inst, LinearContract(alpha).to_contract(inst)).principal
                )
            assert abs(vals[0] - 2 * vals[1] + vals[2]) <= 1e-7


def test_alpha_sweep_grid_rows():
    inst = build_instance("general", [(0.5, [(1.0, 1.0, 1.0)])])
    rows = alpha_sweep(inst, 0.5)
    assert [r[0] for r in rows] == [0.0, 0.5, 1.0]
    assert sweep_grid(0.3) == [0.0, 0.3, 0.6, 0.8999999999999999, 1.0]
    with pytest.raises(ValueError):
        sweep_grid(0.0)


def test_sweep_monotone_within_intervals_and_bounded_by_optimum():
    inst = gen_random(3, 2, 240_001, "general")
    rows = alpha_sweep(inst, 0.01)
    _, _, up = optimal_linear(inst)
    assert max(r[2] for r in rows) <= up.principal + 1e-6
    alphas = critical_values(inst).alphas
    for lo, hi in zip(alphas, alphas[1:]):
        inside = [r for r in rows if lo + 1e-9 < r[0] < hi - 1e-9]
        for a, b in zip(inside, inside[1:]):
            assert b[2] <= a[2] + 1e-9


def test_sweep_csv_format(tmp_path):
    inst = build_instance("general", [(0.5, [(1.0, 1.0, 2.0)])])
    rows = alpha_sweep(inst, 0.5)
    path = tmp_path / "sweep.csv"
    write_sweep_csv(rows, path, alpha_star=0.25)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "alpha,agent_utility,principal_utility"
    assert len(lines) == 5
    assert lines[-1] == "# alpha_star=0.25"
