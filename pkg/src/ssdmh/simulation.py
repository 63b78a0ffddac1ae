"""Synthetic item-response data with person classes and locally dependent item groups."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _default_mapping() -> dict[int, frozenset[int]]:
    # class 0 -> groups {0, 1}, class 1 -> {4, 5}, class 2 -> {2, 3}
    return {0: frozenset({0, 1}), 1: frozenset({4, 5}), 2: frozenset({2, 3})}


@dataclass
class SimDesign:
    """Class/group design.

    ``p11``: chance that an intended inside-class group is treated as inside;
    ``p21``: chance that an intended outside-class group stays outside;
    ``p12`` / ``p22``: success probability of a group's first item when the
    group is effectively inside / outside; ``rho``: chance of a correct answer
    following a correct answer on the previous item of the same group.
    Groups and classes are contiguous and equal-sized, 0-based.
    """

    n: int = 300
    p: int = 24
    groups: int = 6
    classes: int = 3
    class_to_inside_groups: dict[int, frozenset[int]] = field(default_factory=_default_mapping)
    p11: float = 0.7
    p12: float = 0.7
    p21: float = 0.5
    p22: float = 0.5
    rho: float = 0.8
    base_easiness: np.ndarray | float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.p < 2 or self.groups < 1 or self.classes < 1:
            raise ValueError("n, p, groups and classes must be positive (p >= 2)")
        if self.p % self.groups:
            raise ValueError(f"p={self.p} is not divisible by groups={self.groups}")
        if self.n % self.classes:
            raise ValueError(f"n={self.n} is not divisible by classes={self.classes}")
        for name in ("p11", "p12", "p21", "p22", "rho"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} is not a probability")
        if self.p21 > self.p11:
            raise ValueError(f"p21={self.p21} must not exceed p11={self.p11}")
        if self.p22 > self.p12:
            raise ValueError(f"p22={self.p22} must not exceed p12={self.p12}")
        self.class_to_inside_groups = {
            int(c): frozenset(int(g) for g in gs) for c, gs in self.class_to_inside_groups.items()
        }
        for c, gs in self.class_to_inside_groups.items():
            if not 0 <= c < self.classes or any(not 0 <= g < self.groups for g in gs):
                raise ValueError(f"class mapping {c} -> {sorted(gs)} out of range")
        ease = np.broadcast_to(np.asarray(self.base_easiness, dtype=float), (self.p,)).copy()
        if np.any((ease < 0) | (ease > 1)):
            raise ValueError("base_easiness values must be probabilities")
        self.base_easiness = ease

    @property
    def group_size(self) -> int:
        return self.p // self.groups

    def item_groups(self) -> np.ndarray:
        return np.repeat(np.arange(self.groups), self.group_size)

    def respondent_classes(self) -> np.ndarray:
        return np.repeat(np.arange(self.classes), self.n // self.classes)

    def inside(self) -> np.ndarray:
        """``classes x groups`` boolean matrix of intended inside-class groups."""
        m = np.zeros((self.classes, self.groups), dtype=bool)
        for c, gs in self.class_to_inside_groups.items():
            m[c, list(gs)] = True
        return m


@dataclass
class SimTruth:
    item_groups: np.ndarray
    respondent_classes: np.ndarray
    effective_inside: np.ndarray
    signed_adjacency: np.ndarray


def generate_dataset(design: SimDesign, uniforms: np.ndarray | None = None
                     ) -> tuple[np.ndarray, SimTruth]:
    """Simulate one ``n x p`` response matrix.

    ``uniforms`` (shape ``(n, groups + p)``) overrides the seeded generator;
    the first ``groups`` columns decide effective status, the rest the items.
    """
    d = design
    if uniforms is None:
        uniforms = np.random.default_rng(d.seed).random((d.n, d.groups + d.p))
    u_status, u_item = uniforms[:, : d.groups], uniforms[:, d.groups:]
    cls = d.respondent_classes()
    intended = d.inside()[cls]
    effective = np.where(intended, u_status < d.p11, u_status >= d.p21)

    x = np.zeros((d.n, d.p), dtype=np.uint8)
    size = d.group_size
    for g in range(d.groups):
        first = g * size
        lead = np.where(effective[:, g], d.p12, d.p22)
        x[:, first] = u_item[:, first] < lead
        for j in range(first + 1, first + size):
            prob = np.where(x[:, j - 1] == 1, d.rho, d.base_easiness[j])
            x[:, j] = u_item[:, j] < prob
    truth = SimTruth(d.item_groups(), cls, effective, true_signed_adjacency(d))
    return x, truth


def true_signed_adjacency(design: SimDesign) -> np.ndarray:
    """Expected sign of every item pair under the design.

    +1 within a group or for groups that are inside together for some class;
    -1 when every class that has either group inside has exactly one of them
    inside; 0 otherwise.
    """
    inside = design.inside()
    G = design.groups
    sign = np.zeros((G, G), dtype=np.int8)
    for a in range(G):
        for b in range(G):
            if a == b or np.any(inside[:, a] & inside[:, b]):
                sign[a, b] = 1
                continue
            involved = inside[:, a] | inside[:, b]
            if involved.any() and np.all(inside[involved, a] ^ inside[involved, b]):
                sign[a, b] = -1
    grp = design.item_groups()
    A = sign[np.ix_(grp, grp)].copy()
    np.fill_diagonal(A, 0)
    return A
