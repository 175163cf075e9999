"""Instance data model for the min-knapsack problem with compactness constraints.

An instance asks for a subset of ``n`` ordered items whose total weight
reaches the capacity ``q`` at minimum total cost, subject to a compactness
requirement: whenever two selected items ``i < j`` are more than ``delta``
apart, at least ``floor((j - i - 1) / delta)`` items strictly between them
must be selected as well.

Item indices are 1-based throughout the public API and the file format.
Weights are raw nonnegative integers (histogram counts); costs are
nonnegative reals.  All types in this module are immutable after
construction and safe to share across workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, NamedTuple

__all__ = [
    "Instance",
    "MaxKnapsack",
    "PairCoefficient",
    "Selection",
    "FeasibilityReport",
    "SolutionVector",
    "validate_instance",
    "compactness_pairs",
    "check_selection",
    "complement_instance",
    "instance_to_json",
    "instance_from_json",
    "save_instance",
    "load_instance",
]

#: A selection of items, stored as 1-based indices.
Selection = frozenset[int]


class PairCoefficient(NamedTuple):
    """A far-apart item pair (i, j) and the number of in-between items it forces."""

    i: int
    j: int
    kappa: int


@dataclass(frozen=True)
class Instance:
    """A min-knapsack instance with a compactness parameter.

    ``meta`` carries optional generator provenance (seed, parameters,
    normalization scale); it is not interpreted by the solvers and should be
    treated as read-only.
    """

    n: int
    weights: tuple[int, ...]
    costs: tuple[float, ...]
    capacity_q: float
    delta: int
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def total_weight(self) -> int:
        return sum(self.weights)


@dataclass(frozen=True)
class MaxKnapsack:
    """The classical maximization knapsack paired to an Instance by complement."""

    n: int
    weights: tuple[int, ...]
    costs: tuple[float, ...]
    capacity: float

    @property
    def total_weight(self) -> int:
        return sum(self.weights)


@dataclass(frozen=True)
class SolutionVector:
    """A point in [0, 1]^n together with its objective value and provenance."""

    x: tuple[float, ...]
    objective: float
    source: str = ""

    def __len__(self) -> int:
        return len(self.x)


@dataclass(frozen=True)
class FeasibilityReport:
    knapsack_ok: bool
    compactness_ok: bool
    violated_pairs: tuple[PairCoefficient, ...]
    total_weight: float

    @property
    def feasible(self) -> bool:
        return self.knapsack_ok and self.compactness_ok


def validate_instance(inst: Instance) -> list[str]:
    """Return every violated instance invariant, as human-readable reasons.

    An empty list means the instance is valid.  Validation never raises;
    instances with ``sum(weights) < q`` are storable but flagged here since
    they admit no feasible selection.
    """
    problems: list[str] = []
    if inst.n < 1:
        problems.append(f"n must be >= 1, got {inst.n}")
    if len(inst.weights) != inst.n:
        problems.append(f"weights has length {len(inst.weights)}, expected n={inst.n}")
    if len(inst.costs) != inst.n:
        problems.append(f"costs has length {len(inst.costs)}, expected n={inst.n}")
    for k, w in enumerate(inst.weights, start=1):
        if not isinstance(w, int) or isinstance(w, bool):
            problems.append(f"weight of item {k} is not an integer: {w!r}")
        elif w < 0:
            problems.append(f"weight of item {k} is negative: {w}")
    for k, c in enumerate(inst.costs, start=1):
        if c < 0:
            problems.append(f"cost of item {k} is negative: {c}")
    if not inst.capacity_q > 0:
        problems.append(f"capacity q must be > 0, got {inst.capacity_q}")
    if inst.delta < 1:
        problems.append(f"delta must be >= 1, got {inst.delta}")
    total = sum(w for w in inst.weights if isinstance(w, int) and w >= 0)
    if total < inst.capacity_q:
        problems.append(
            f"total weight {total} < q={inst.capacity_q}: no feasible selection exists"
        )
    return problems


def compactness_pairs(n: int, delta: int) -> list[PairCoefficient]:
    """All pairs (i, j) with j - i > delta, in lexicographic order.

    Each pair carries kappa = floor((j - i - 1) / delta) >= 1, the number of
    items that must be selected strictly between i and j whenever both are
    selected.
    """
    if n < 1 or delta < 1:
        raise ValueError(f"need n >= 1 and delta >= 1, got n={n}, delta={delta}")
    return [
        PairCoefficient(i, j, (j - i - 1) // delta)
        for i in range(1, n + 1)
        for j in range(i + delta + 1, n + 1)
    ]


def check_selection(inst: Instance, sel: Iterable[int]) -> FeasibilityReport:
    """Check a binary selection against the knapsack and compactness constraints.

    The knapsack holds iff the selected weight reaches ``q``; compactness
    holds iff every far-apart selected pair (i, j) has at least kappa
    selected items strictly between them.
    """
    chosen = frozenset(sel)
    bad = [k for k in chosen if not (1 <= k <= inst.n)]
    if bad:
        raise ValueError(f"selection indices out of range [1..{inst.n}]: {sorted(bad)}")
    total = sum(inst.weights[k - 1] for k in chosen)
    # prefix[k] = number of selected items among 1..k
    prefix = [0] * (inst.n + 1)
    for k in range(1, inst.n + 1):
        prefix[k] = prefix[k - 1] + (1 if k in chosen else 0)
    violated = tuple(
        pair
        for pair in compactness_pairs(inst.n, inst.delta)
        if pair.i in chosen
        and pair.j in chosen
        and prefix[pair.j - 1] - prefix[pair.i] < pair.kappa
    )
    return FeasibilityReport(
        knapsack_ok=total >= inst.capacity_q,
        compactness_ok=not violated,
        violated_pairs=violated,
        total_weight=total,
    )


def complement_instance(inst: Instance | MaxKnapsack) -> MaxKnapsack:
    """Map a min-knapsack instance to its complement maximization knapsack.

    The map sends capacity q to sum(w) - q; a selection x is feasible for the
    minimization problem iff its complement z = 1 - x is feasible for the
    returned maximization knapsack, and the objectives are linked by
    c'x = c'1 - c'z.  Applying the map twice restores the original capacity.
    """
    cap = inst.capacity_q if isinstance(inst, Instance) else inst.capacity
    return MaxKnapsack(
        n=inst.n,
        weights=inst.weights,
        costs=inst.costs,
        capacity=inst.total_weight - cap,
    )


# ---------------------------------------------------------------------------
# JSON instance format
# ---------------------------------------------------------------------------
#
# {"n": int, "weights": [int], "costs": [float], "q": float, "delta": int,
#  "meta": {"seed": int?, "generator": str?, "scale": float?, ...}}
#
# Field order is irrelevant; unknown meta keys are preserved verbatim.


def instance_to_json(inst: Instance) -> str:
    doc = {
        "n": inst.n,
        "weights": list(inst.weights),
        "costs": list(inst.costs),
        "q": inst.capacity_q,
        "delta": inst.delta,
        "meta": inst.meta,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def instance_from_json(text: str) -> Instance:
    doc = json.loads(text)
    try:
        weights = tuple(int(w) for w in doc["weights"])
        if any(int(w) != w for w in doc["weights"]):
            raise ValueError("weights must be integers")
        inst = Instance(
            n=int(doc["n"]),
            weights=weights,
            costs=tuple(float(c) for c in doc["costs"]),
            capacity_q=float(doc["q"]),
            delta=int(doc["delta"]),
            meta=dict(doc.get("meta", {})),
        )
    except KeyError as exc:
        raise ValueError(f"missing instance field: {exc}") from exc
    return inst


def save_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(instance_to_json(inst) + "\n")


def load_instance(path: str | Path) -> Instance:
    return instance_from_json(Path(path).read_text())
