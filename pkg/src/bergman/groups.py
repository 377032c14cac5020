"""Finite unitary groups acting on the unit ball and their validation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import GroupError

MAX_GROUP_ORDER = 10_000
MATCH_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class FiniteUnitaryGroup:
    """A finite group of ``n x n`` matrices, stored as an explicit element list."""

    dimension: int
    elements: tuple
    determinants: tuple = field(init=False)

    def __post_init__(self):
        if len(self.elements) == 0:
            raise GroupError("a group needs at least one element")
        if len(self.elements) > MAX_GROUP_ORDER:
            raise GroupError(
                f"|Gamma| = {len(self.elements)} exceeds the cap {MAX_GROUP_ORDER}"
            )
        mats = []
        for g in self.elements:
            g = np.array(g, dtype=np.complex128)
            if g.shape != (self.dimension, self.dimension):
                raise GroupError(
                    f"element of shape {g.shape} in a group of dimension {self.dimension}"
                )
            g.flags.writeable = False
            mats.append(g)
        object.__setattr__(self, "elements", tuple(mats))
        object.__setattr__(
            self, "determinants", tuple(complex(np.linalg.det(g)) for g in mats)
        )

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def is_trivial(self) -> bool:
        return len(self.elements) == 1 and np.allclose(
            self.elements[0], np.eye(self.dimension), atol=MATCH_TOL, rtol=0
        )

    def find(self, matrix) -> int | None:
        """Index of the stored element within ``MATCH_TOL`` of ``matrix``."""
        for k, g in enumerate(self.elements):
            if np.max(np.abs(g - matrix)) <= MATCH_TOL:
                return k
        return None

    def to_json(self) -> dict:
        return {
            "type": "explicit",
            "matrices": [
                [[[float(x.real), float(x.imag)] for x in row] for row in g]
                for g in self.elements
            ],
        }


_QUARTER_TURNS = (1, 1j, -1, -1j)


def root_of_unity(m: int, k: int) -> complex:
    """``exp(2 pi i m / k)``, exact at multiples of a quarter turn."""
    m %= k
    if (4 * m) % k == 0:
        return _QUARTER_TURNS[4 * m // k]
    angle = 2 * math.pi * m / k
    return complex(math.cos(angle), math.sin(angle))


def trivial_group(n: int) -> FiniteUnitaryGroup:
    return FiniteUnitaryGroup(n, (np.eye(n),))


def _dedupe(mats):
    out = []
    for m in mats:
        if not any(np.max(np.abs(m - o)) <= MATCH_TOL for o in out):
            out.append(m)
    return out


def cyclic_diagonal(n: int, weights: Sequence[int], k: int) -> FiniteUnitaryGroup:
    """Cyclic group generated by ``diag(exp(2 pi i w_j / k))``.

    Duplicate powers (when ``gcd(k, w) > 1``) are dropped, so the result has
    ``k / gcd(k, w_1, ..., w_n)`` elements.
    """
    if k < 1:
        raise GroupError("cyclic order k must be >= 1")
    if len(weights) != n:
        raise GroupError(f"need {n} weights, got {len(weights)}")
    if k > MAX_GROUP_ORDER:
        raise GroupError(f"|Gamma| = {k} exceeds the cap {MAX_GROUP_ORDER}")
    w = np.asarray(weights, dtype=np.int64)
    mats = [np.diag([root_of_unity(int(p * wj), k) for wj in w]) for p in range(k)]
    return FiniteUnitaryGroup(n, tuple(_dedupe(mats)))


def from_matrices(matrices) -> FiniteUnitaryGroup:
    """Build a group from matrices given either as complex arrays or as
    nested ``[re, im]`` pairs (the JSON wire format)."""
    mats = []
    for m in matrices:
        a = np.asarray(m)
        if a.ndim == 3 and a.shape[-1] == 2 and not np.iscomplexobj(a):
            a = a[..., 0] + 1j * a[..., 1]
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise GroupError(f"group element must be square, got shape {a.shape}")
        mats.append(a.astype(np.complex128))
    if not mats:
        raise GroupError("explicit group needs at least one matrix")
    return FiniteUnitaryGroup(mats[0].shape[0], tuple(mats))


@dataclass(frozen=True)
class ValidationReport:
    contains_identity: bool
    unitary: bool
    closed: bool
    fixed_point_free: bool
    max_unitarity_defect: float
    max_closure_defect: float
    min_fixed_point_gap: float
    order: int

    @property
    def ok(self) -> bool:
        return (
            self.contains_identity and self.unitary and self.closed and self.fixed_point_free
        )

    def checks(self) -> list[tuple[str, bool, float]]:
        return [
            ("contains_identity", self.contains_identity, 0.0 if self.contains_identity else 1.0),
            ("unitary", self.unitary, self.max_unitarity_defect),
            ("closed", self.closed, self.max_closure_defect),
            ("fixed_point_free", self.fixed_point_free, self.min_fixed_point_gap),
        ]


def _nearest_distance(group: FiniteUnitaryGroup, m) -> float:
    return min(float(np.max(np.abs(g - m))) for g in group.elements)


def validate(group: FiniteUnitaryGroup) -> ValidationReport:
    """Check identity membership, unitarity, closure and fixed-point-freeness.

    Never raises on a bad group; failures are carried in the report.
    """
    n = group.dimension
    eye = np.eye(n)
    has_identity = group.find(eye) is not None

    unit_defect = max(
        float(np.max(np.abs(g.conj().T @ g - eye))) for g in group.elements
    )

    closure_defect = 0.0
    for a in group.elements:
        try:
            inv = np.linalg.inv(a)
        except np.linalg.LinAlgError:
            closure_defect = math.inf
            continue
        closure_defect = max(closure_defect, _nearest_distance(group, inv))
        for b in group.elements:
            closure_defect = max(closure_defect, _nearest_distance(group, a @ b))

    gap = math.inf
    for g in group.elements:
        if np.max(np.abs(g - eye)) <= MATCH_TOL:
            continue
        gap = min(gap, abs(complex(np.linalg.det(g - eye))))

    return ValidationReport(
        contains_identity=has_identity,
        unitary=unit_defect <= MATCH_TOL,
        closed=closure_defect <= MATCH_TOL,
        fixed_point_free=gap > MATCH_TOL,
        max_unitarity_defect=unit_defect,
        max_closure_defect=closure_defect,
        min_fixed_point_gap=gap,
        order=group.order,
    )


def element_det(group: FiniteUnitaryGroup, index: int) -> complex:
    if not 0 <= index < group.order:
        raise GroupError(f"element index {index} out of range for |Gamma|={group.order}")
    return group.determinants[index]


def group_from_config(spec: dict, n: int) -> FiniteUnitaryGroup:
    """Build a group from its JSON description."""
    kind = spec.get("type")
    if kind == "trivial":
        return trivial_group(n)
    if kind == "cyclic-diagonal":
        return cyclic_diagonal(n, spec["weights"], int(spec["order"]))
    if kind == "explicit":
        g = from_matrices(spec["matrices"])
        if g.dimension != n:
            raise GroupError(f"explicit matrices have dimension {g.dimension}, expected {n}")
        return g
    raise GroupError(f"unknown group type {kind!r}")
