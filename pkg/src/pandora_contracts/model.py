"""Problem data: boxes with priced inspection and two-sided prize values.

An instance is a list of boxes. Opening box ``i`` costs ``c_i`` and reveals
one prize drawn from a known discrete distribution; prize ``j`` is worth
``a_ij`` to the searching agent and ``b_ij`` to the principal who delegated
the search. A contract promises the agent a nonnegative transfer ``t_ij``
(at most ``b_ij``) for the prize that ends up selected.

This module owns the data types, validation, JSON (de)serialization and the
canonical-JSON digest used for reproducibility checks.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

# Single project-wide absolute tolerance for float comparisons.
EPS = 1e-9

KINDS = ("general", "binary", "iid_single_prize")

# Tolerance used when merging/comparing structurally identical boxes.
_STRUCT_TOL = 1e-12


@dataclass(frozen=True)
class Prize:
    probability: float
    agent_value: float
    principal_value: float


@dataclass(frozen=True)
class Box:
    cost: float
    prizes: tuple[Prize, ...]


@dataclass(frozen=True)
class Instance:
    kind: str
    boxes: tuple[Box, ...]

    @property
    def n(self) -> int:
        return len(self.boxes)

    def prize_count(self, i: int) -> int:
        return len(self.boxes[i].prizes)


@dataclass(frozen=True)
class Contract:
    """Per-(box, prize) transfers, same ragged shape as the instance."""

    transfers: tuple[tuple[float, ...], ...]


@dataclass(frozen=True)
class LinearContract:
    """Commission contract: the agent receives ``alpha * b_ij``."""

    alpha: float

    def to_contract(self, instance: Instance) -> Contract:
        return Contract(
            tuple(
                tuple(self.alpha * p.principal_value for p in box.prizes)
                for box in instance.boxes
            )
        )


def build_instance(kind: str, boxes: Iterable[tuple[float, Iterable[tuple[float, float, float]]]]) -> Instance:
    """Assemble an Instance from plain ``(cost, [(p, agent, principal), ...])`` rows."""
    out = []
    for cost, prizes in boxes:
        out.append(Box(float(cost), tuple(Prize(float(p), float(a), float(b)) for p, a, b in prizes)))
    return Instance(kind, tuple(out))


def zero_contract(instance: Instance) -> Contract:
    return Contract(tuple(tuple(0.0 for _ in box.prizes) for box in instance.boxes))


def validate(instance: Instance) -> list[str]:
    """Collect invariant violations; an empty list means the instance is well formed."""
    violations: list[str] = []
    if instance.kind not in KINDS:
        violations.append(f"instance: unknown kind '{instance.kind}'")
    if instance.n < 1:
        violations.append("instance: needs at least one box")
        return violations

    for i, box in enumerate(instance.boxes):
        if box.cost < 0:
            violations.append(f"box {i}: negative cost {box.cost:.12g}")
        if not box.prizes:
            violations.append(f"box {i}: no prizes")
            continue
        total = 0.0
        for j, prize in enumerate(box.prizes):
            if not 0.0 <= prize.probability <= 1.0:
                violations.append(f"box {i} prize {j}: probability {prize.probability:.12g} outside [0,1]")
            if prize.agent_value < 0:
                violations.append(f"box {i} prize {j}: negative agent value")
            if prize.principal_value < 0:
                violations.append(f"box {i} prize {j}: negative principal value")
            total += prize.probability
        if abs(total - 1.0) > EPS:
            violations.append(f"box {i}: probabilities sum to {total:.12g}")

    if instance.kind == "binary":
        violations.extend(_validate_binary(instance))
    elif instance.kind == "iid_single_prize":
        violations.extend(_validate_iid(instance))
    return violations


def _validate_binary(instance: Instance) -> list[str]:
    out = []
    for i, box in enumerate(instance.boxes):
        live = [p for p in box.prizes if p.probability > 0]
        zeroes = [p for p in live if p.agent_value == 0 and p.principal_value == 0]
        # A positive prize drawn with probability one is the degenerate form of a
        # binary box (the 0-prize carries no probability mass).
        if len(live) == 1:
            continue
        if len(live) != 2 or not zeroes:
            out.append(f"box {i}: not a binary box (need a 0-prize plus one other prize)")
    return out


def _validate_iid(instance: Instance) -> list[str]:
    out = []
    ref = instance.boxes[0]
    for i, box in enumerate(instance.boxes):
        if len(box.prizes) != len(ref.prizes) or abs(box.cost - ref.cost) > _STRUCT_TOL:
            out.append(f"box {i}: differs from box 0 (iid kind)")
            continue
        for p, q in zip(box.prizes, ref.prizes):
            if (
                abs(p.probability - q.probability) > _STRUCT_TOL
                or abs(p.agent_value - q.agent_value) > _STRUCT_TOL
                or abs(p.principal_value - q.principal_value) > _STRUCT_TOL
            ):
                out.append(f"box {i}: differs from box 0 (iid kind)")
                break
        positive = [p for p in box.prizes if p.principal_value > 0 and p.probability > 0]
        if len(positive) != 1:
            out.append(
                f"box {i}: expected exactly one principal-positive prize, found {len(positive)}"
            )
    return out


def validate_contract(instance: Instance, contract: Contract) -> list[str]:
    """Limited liability and bounded transfers: 0 <= t_ij <= b_ij, matching shape."""
    violations = []
    if len(contract.transfers) != instance.n:
        return [f"contract: expected {instance.n} transfer rows, got {len(contract.transfers)}"]
    for i, (box, row) in enumerate(zip(instance.boxes, contract.transfers)):
        if len(row) != len(box.prizes):
            violations.append(f"contract box {i}: expected {len(box.prizes)} transfers, got {len(row)}")
            continue
        for j, (prize, t) in enumerate(zip(box.prizes, row)):
            if t < -EPS:
                violations.append(f"contract box {i} prize {j}: negative transfer")
            if t > prize.principal_value + EPS:
                violations.append(f"contract box {i} prize {j}: transfer exceeds principal value")
    return violations


# ---------------------------------------------------------------------------
# JSON instance schema
# ---------------------------------------------------------------------------

def _require(mapping: dict, field: str, where: str):
    if field not in mapping:
        raise ValueError(f"{where}: missing field '{field}'")
    return mapping[field]


def instance_from_json_dict(data: dict) -> Instance:
    if not isinstance(data, dict):
        raise ValueError("instance: top-level JSON value must be an object")
    kind = _require(data, "kind", "instance")
    boxes_raw = _require(data, "boxes", "instance")
    boxes = []
    for i, braw in enumerate(boxes_raw):
        cost = _require(braw, "cost", f"box {i}")
        prizes_raw = _require(braw, "prizes", f"box {i}")
        prizes = []
        for j, praw in enumerate(prizes_raw):
            prizes.append(
                Prize(
                    float(_require(praw, "p", f"box {i} prize {j}")),
                    float(_require(praw, "agent", f"box {i} prize {j}")),
                    float(_require(praw, "principal", f"box {i} prize {j}")),
                )
            )
        boxes.append(Box(float(cost), tuple(prizes)))
    return normalize_instance(Instance(kind, tuple(boxes)))


def normalize_instance(instance: Instance) -> Instance:
    """Canonical load-time form: drop zero-probability prizes; merge duplicate
    agent values among principal-worthless prizes of i.i.d. instances
    (probabilities added onto the lowest-index prize)."""
    boxes = []
    for box in instance.boxes:
        prizes = [p for p in box.prizes if p.probability > 0]
        if instance.kind == "iid_single_prize":
            merged: list[Prize] = []
            for p in prizes:
                if p.principal_value == 0:
                    for idx, q in enumerate(merged):
                        if q.principal_value == 0 and abs(q.agent_value - p.agent_value) <= _STRUCT_TOL:
                            merged[idx] = Prize(q.probability + p.probability, q.agent_value, q.principal_value)
                            break
                    else:
                        merged.append(p)
                else:
                    merged.append(p)
            prizes = merged
        boxes.append(Box(box.cost, tuple(prizes)))
    return Instance(instance.kind, tuple(boxes))


def instance_to_json_dict(instance: Instance) -> dict:
    return {
        "kind": instance.kind,
        "boxes": [
            {
                "cost": box.cost,
                "prizes": [
                    {"p": p.probability, "agent": p.agent_value, "principal": p.principal_value}
                    for p in box.prizes
                ],
            }
            for box in instance.boxes
        ],
    }


def load_json(path) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: JSON parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    instance = instance_from_json_dict(data)
    violations = validate(instance)
    if violations:
        raise ValueError(f"{path}: invalid instance: " + "; ".join(violations))
    return instance


def save_json(instance: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_json_dict(instance), fh, indent=2, sort_keys=True)
        fh.write("\n")


def contract_to_json_dict(contract: Contract | LinearContract) -> dict:
    if isinstance(contract, LinearContract):
        return {"alpha": contract.alpha}
    return {"transfers": [list(row) for row in contract.transfers]}


def contract_from_json_dict(data: dict) -> Contract | LinearContract:
    if "alpha" in data:
        return LinearContract(float(data["alpha"]))
    if "transfers" in data:
        return Contract(tuple(tuple(float(t) for t in row) for row in data["transfers"]))
    raise ValueError("contract: expected field 'alpha' or 'transfers'")


def load_contract_json(path) -> Contract | LinearContract:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: JSON parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return contract_from_json_dict(data)


# ---------------------------------------------------------------------------
# Canonical JSON and digests
# ---------------------------------------------------------------------------

def canonical_json(value) -> str:
    """Deterministic JSON text: sorted keys, floats rendered with %.17g."""
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if value is None:
        return "null"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        parts = (f"{json.dumps(str(k))}:{canonical_json(v)}" for k, v in sorted(value.items()))
        return "{" + ",".join(parts) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in value) + "]"
    raise TypeError(f"cannot canonicalize {type(value)!r}")


def instance_digest(instance: Instance) -> str:
    text = canonical_json(instance_to_json_dict(instance))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
