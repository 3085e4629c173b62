import json
import math

import pytest

from pandora_contracts import (
    build_instance,
    fair_cap,
    gen_linear_gap_family,
    gen_paper_example_iid,
    gen_random,
    load_json,
    save_json,
    validate,
)
from pandora_contracts.model import (
    instance_digest,
    instance_from_json_dict,
    instance_to_json_dict,
    normalize_instance,
)


def test_validate_minimal_instance():
    inst = build_instance("general", [(0.0, [(1.0, 0.0, 1.0)])])
    assert validate(inst) == []


def test_validate_prob_sum():
    inst = build_instance("general", [(0.1, [(0.5, 1.0, 1.0), (0.4, 0.0, 0.0)])])
    violations = validate(inst)
    assert violations == ["box 0: probabilities sum to 0.9"]


def test_validate_binary_kind_needs_zero_prize():
    inst = build_instance("binary", [(0.1, [(0.5, 0.0, 1.0), (0.5, 2.0, 3.0)])])
    assert any("box 0" in v and "binary" in v for v in validate(inst))


def test_validate_negative_values():
    inst = build_instance("general", [(-0.5, [(1.0, -1.0, 1.0)])])
    msgs = "\n".join(validate(inst))
    assert "negative cost" in msgs and "negative agent value" in msgs


def test_roundtrip_identity(tmp_path):
    inst = gen_random(4, 3, 11, "general")
    path = tmp_path / "inst.json"
    save_json(inst, path)
    back = load_json(path)
    assert back.kind == inst.kind
    for b1, b2 in zip(inst.boxes, back.boxes):
        assert b1.cost == pytest.approx(b2.cost, abs=1e-12)
        for p1, p2 in zip(b1.prizes, b2.prizes):
            assert p1.probability == pytest.approx(p2.probability, abs=1e-12)
            assert p1.agent_value == pytest.approx(p2.agent_value, abs=1e-12)
            assert p1.principal_value == pytest.approx(p2.principal_value, abs=1e-12)
    assert instance_digest(back) == instance_digest(inst)


def test_load_missing_field_names_it(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text(json.dumps({"kind": "general", "boxes": [{"prizes": []}]}))
    with pytest.raises(ValueError, match="box 0: missing field 'cost'"):
        load_json(path)


def test_load_syntax_error_reports_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"kind": "general",\n  "boxes": [}')
    with pytest.raises(ValueError, match="line 2"):
        load_json(path)


def test_load_rejects_invalid(tmp_path):
    path = tmp_path / "invalid.json"
    path.write_text(
        json.dumps({"kind": "general", "boxes": [{"cost": 1.0, "prizes": [{"p": 0.5, "agent": 1, "principal": 1}]}]})
    )
    with pytest.raises(ValueError, match="probabilities sum"):
        load_json(path)


def test_zero_probability_prizes_dropped():
    raw = {
        "kind": "general",
        "boxes": [{"cost": 1.0, "prizes": [
            {"p": 0.0, "agent": 9.0, "principal": 9.0},
            {"p": 1.0, "agent": 1.0, "principal": 1.0},
        ]}],
    }
    inst = instance_from_json_dict(raw)
    assert len(inst.boxes[0].prizes) == 1
    assert inst.boxes[0].prizes[0].agent_value == 1.0


def test_iid_merge_equal_agent_values_keeps_lowest_index():
    inst = build_instance(
        "iid_single_prize",
        [(0.5, [(0.2, 0.0, 3.0), (0.3, 2.0, 0.0), (0.25, 1.0, 0.0), (0.25, 2.0, 0.0)])],
    )
    merged = normalize_instance(inst)
    prizes = merged.boxes[0].prizes
    assert len(prizes) == 3
    # second prize absorbed the duplicate agent value 2.0
    assert prizes[1].agent_value == 2.0 and prizes[1].probability == pytest.approx(0.55)
    assert prizes[2].agent_value == 1.0


def test_gen_random_seed_determinism():
    a = gen_random(3, 2, 42, "general")
    b = gen_random(3, 2, 42, "general")
    assert a == b
    assert a != gen_random(3, 2, 43, "general")


def test_gen_random_binary_validates():
    inst = gen_random(4, 2, 7, "binary")
    assert validate(inst) == []


def test_gen_random_iid_identical_boxes():
    inst = gen_random(5, 3, 1, "iid_single_prize")
    assert validate(inst) == []
    assert all(box == inst.boxes[0] for box in inst.boxes)


def test_gen_random_rejects_bad_args():
    with pytest.raises(ValueError):
        gen_random(0, 2, 1, "general")
    with pytest.raises(ValueError):
        gen_random(2, 2, 1, "nope")


def test_generated_instances_validate():
    for kind, m in (("general", 4), ("binary", 2), ("iid_single_prize", 3)):
        for seed in range(5):
            assert validate(gen_random(3, m, seed, kind)) == []


def test_gap_family_shape():
    inst = gen_linear_gap_family(5)
    for box in inst.boxes:
        assert len(box.prizes) == 1
        prize = box.prizes[0]
        assert prize.agent_value == 0.0       # worthless to the agent
        assert prize.probability == 1.0       # deterministic outcome
    rewards = [box.prizes[0].principal_value for box in inst.boxes]
    assert rewards == sorted(rewards)
    assert validate(inst) == []


def test_paper_iid_example_basic_cap_is_one():
    inst, alpha = gen_paper_example_iid(6, 3)
    assert validate(inst) == []
    assert fair_cap(inst.boxes[0]) == pytest.approx(1.0, abs=1e-12)
    positives = [p for p in inst.boxes[0].prizes if p.principal_value > 0]
    assert len(positives) == 1
    # paying the basic cap for the top prize nets the principal exactly alpha
    assert positives[0].principal_value - 1.0 == pytest.approx(alpha, abs=1e-12)


def test_paper_iid_alpha_formula():
    _, alpha = gen_paper_example_iid(2, 1)
    assert alpha == pytest.approx(1.0)
    _, alpha63 = gen_paper_example_iid(6, 3)
    decay = (5 / 6) ** 3
    assert alpha63 == pytest.approx(decay / (1 - decay), abs=1e-12)


def test_paper_iid_roundtrips_as_iid(tmp_path):
    inst, _ = gen_paper_example_iid(5, 2)
    path = tmp_path / "iid.json"
    save_json(inst, path)
    back = load_json(path)
    assert back.kind == "iid_single_prize"
    assert validate(back) == []


def test_canonical_json_digest_stable():
    inst = gen_random(2, 2, 5, "general")
    d1 = instance_digest(inst)
    d2 = instance_digest(instance_from_json_dict(instance_to_json_dict(inst)))
    assert d1 == d2 and len(d1) == 64


def test_gap_family_needs_two_boxes():
    with pytest.raises(ValueError):
        gen_linear_gap_family(1)


def test_paper_iid_k_range():
    with pytest.raises(ValueError):
        gen_paper_example_iid(4, 4)
    with pytest.raises(ValueError):
        gen_paper_example_iid(4, 0)
