"""Scenario data model: demand, hierarchy, reliability classes and common roots.

Levels are 1-based in every public field and message (level 1 is the top of
the hierarchy, e.g. a data center; level ``depth`` hosts the VMs). Internally
sequences are plain 0-based tuples, so ``spec.epsilon[c - 1]`` is the count
for level ``c``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

DEFAULT_LEVELS = ("DC", "rack", "server", "VM")


class ScenarioError(ValueError):
    """Raised when a scenario cannot be built, parsed or evaluated."""

    def __init__(self, message: str, violations: Sequence[str] = ()):
        super().__init__(message)
        self.violations = list(violations)


@dataclass(frozen=True)
class ServiceDemand:
    k: int
    r: int
    psi: int

    @property
    def n(self) -> int:
        return self.k + self.r


@dataclass(frozen=True)
class Hierarchy:
    level_names: tuple[str, ...] = DEFAULT_LEVELS

    @property
    def depth(self) -> int:
        return len(self.level_names)

    @classmethod
    def of_depth(cls, depth: int) -> Hierarchy:
        if depth == len(DEFAULT_LEVELS):
            return cls()
        return cls(tuple(f"L{c}" for c in range(1, depth + 1)))


@dataclass(frozen=True)
class ReliabilityClassSpec:
    """One reliability class: ``n_sub`` sub-SFCs placed the same way.

    ``epsilon[c-1]`` is the number of level-c components inside each
    level-(c-1) component (for c = 1, the number of top-level components).
    ``reliabilities[c-1]`` is the success probability of one level-c component.
    """

    n_sub: int
    epsilon: tuple[int, ...]
    delta: int
    reliabilities: tuple[float, ...]

    @property
    def depth(self) -> int:
        return len(self.epsilon)

    @property
    def shared_levels(self) -> range:
        """Levels (1-based) shared by all VNF types of one sub-SFC."""
        return range(1, self.depth - self.delta + 1)

    @property
    def disjoint_levels(self) -> range:
        return range(self.depth - self.delta + 1, self.depth + 1)

    def vnfs_per_component(self, level: int) -> int:
        """Same-type VNFs hosted below one level-``level`` component."""
        return math.prod(self.epsilon[level:])

    @property
    def heterogeneity(self) -> int:
        """Number of levels at which every same-type replica sits apart.

        Single-replica classes report the full depth.
        """
        deepest = max((c for c, n in enumerate(self.epsilon, 1) if n > 1), default=1)
        return self.depth - deepest + 1


@dataclass(frozen=True)
class CommonRoot:
    """A single component at ``level`` that is an ancestor of every class in ``classes``.

    Class indices are 1-based, as in scenario files.
    """

    level: int
    classes: frozenset[int]

    def __init__(self, level: int, classes):
        object.__setattr__(self, "level", level)
        object.__setattr__(self, "classes", frozenset(classes))


@dataclass(frozen=True)
class Scenario:
    demand: ServiceDemand
    classes: tuple[ReliabilityClassSpec, ...]
    hierarchy: Hierarchy = field(default_factory=Hierarchy)
    common_roots: tuple[CommonRoot, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        object.__setattr__(self, "common_roots", tuple(self.common_roots))

    @property
    def depth(self) -> int:
        return self.hierarchy.depth

    def root_ancestors(self, index: int) -> list[int]:
        """Indices of roots that contain root ``index`` (same or larger class set, higher up)."""
        root = self.common_roots[index]
        return [
            j
            for j, other in enumerate(self.common_roots)
            if j != index and other.level < root.level and root.classes <= other.classes
        ]

    def roots_of_class(self, xi: int) -> dict[int, int]:
        """Map level -> root index for the roots joining class ``xi`` (1-based)."""
        return {
            root.level: j for j, root in enumerate(self.common_roots) if xi in root.classes
        }


@dataclass(frozen=True)
class PlacementPreset:
    """Placement by heterogeneity degree ``nr`` and disjointedness ``delta``."""

    nr: int
    delta: int

    @property
    def label(self) -> str:
        # s: placement by SFC, v: placement by VNF type
        if self.nr == self.delta:
            return "v, s"
        return "s" if self.nr > self.delta else "v"


def expand_preset(
    preset: PlacementPreset,
    n_sub: int,
    reliabilities: Sequence[float],
    hierarchy: Hierarchy | None = None,
) -> ReliabilityClassSpec:
    """Build the class spec that puts all ``n_sub`` replicas apart at one level.

    The separating level is ``depth - nr + 1``; every other level holds one
    component per parent.
    """
    hierarchy = hierarchy or Hierarchy.of_depth(len(reliabilities))
    depth = hierarchy.depth
    if not 1 <= preset.nr <= depth:
        raise ScenarioError(f"preset.nr: {preset.nr} outside [1, {depth}]")
    if not 1 <= preset.delta <= depth:
        raise ScenarioError(f"preset.delta: {preset.delta} outside [1, {depth}]")
    if n_sub < 1:
        raise ScenarioError(f"n_sub: must be >= 1, got {n_sub}")
    if len(reliabilities) != depth:
        raise ScenarioError(
            f"reliabilities: expected {depth} values, got {len(reliabilities)}"
        )
    epsilon = [1] * depth
    epsilon[depth - preset.nr] = n_sub
    return ReliabilityClassSpec(
        n_sub=n_sub,
        epsilon=tuple(epsilon),
        delta=preset.delta,
        reliabilities=tuple(float(p) for p in reliabilities),
    )


def validate_scenario(s: Scenario) -> list[str]:
    """Return every violated invariant of ``s`` as a message; empty when valid."""
    out: list[str] = []
    d = s.demand
    depth = s.depth
    if d.k < 1:
        out.append(f"demand.k: must be >= 1, got {d.k}")
    if d.r < 0:
        out.append(f"demand.r: must be >= 0, got {d.r}")
    if d.psi < 1:
        out.append(f"demand.psi: must be >= 1, got {d.psi}")
    if depth < 1:
        out.append("hierarchy.levels: at least one level required")
        return out
    if not s.classes:
        out.append("classes: at least one reliability class required")
        return out

    for i, cls in enumerate(s.classes):
        where = f"classes[{i}]"
        if cls.n_sub < 1:
            out.append(f"{where}.n_sub: must be >= 1, got {cls.n_sub}")
        if len(cls.epsilon) != depth:
            out.append(f"{where}.epsilon: expected {depth} levels, got {len(cls.epsilon)}")
        elif any(n < 1 for n in cls.epsilon):
            out.append(f"{where}.epsilon: all counts must be >= 1")
        elif math.prod(cls.epsilon) != cls.n_sub:
            out.append(
                f"{where}.epsilon: product {math.prod(cls.epsilon)} != n_sub {cls.n_sub}"
            )
        if not 1 <= cls.delta <= depth:
            out.append(f"{where}.delta: {cls.delta} outside [1, {depth}]")
        if len(cls.reliabilities) != depth:
            out.append(
                f"{where}.reliabilities: expected {depth} values, got {len(cls.reliabilities)}"
            )
        elif any(not (0.0 <= p <= 1.0) or math.isnan(p) for p in cls.reliabilities):
            out.append(f"{where}.reliabilities: probabilities must lie in [0, 1]")

    total = sum(cls.n_sub for cls in s.classes)
    if total != d.n:
        out.append(f"classes: class counts do not cover n (sum n_sub = {total}, k + r = {d.n})")
    if len(s.classes) > max(d.n, 1):
        out.append(f"classes: {len(s.classes)} classes exceed n = {d.n}")

    if out:
        # root checks index into class fields that may be malformed
        return out
    out.extend(_root_violations(s))
    return out


def _root_violations(s: Scenario) -> list[str]:
    out: list[str] = []
    depth = s.depth
    n_classes = len(s.classes)
    roots = s.common_roots
    for j, root in enumerate(roots):
        where = f"common_roots[{j}]"
        if root.level >= depth:
            out.append(f"{where}.level: VM level cannot be a common root")
            continue
        if root.level < 1:
            out.append(f"{where}.level: must be >= 1, got {root.level}")
            continue
        if len(root.classes) < 2:
            out.append(f"{where}.classes: a common root joins at least two classes")
        bad = sorted(x for x in root.classes if not 1 <= x <= n_classes)
        if bad:
            out.append(f"{where}.classes: unknown class indices {bad}")
            continue
        probs = set()
        for x in sorted(root.classes):
            cls = s.classes[x - 1]
            if root.level > depth - cls.delta:
                out.append(
                    f"{where}: level {root.level} lies in the disjoint zone of class {x}"
                )
            if any(n != 1 for n in cls.epsilon[: root.level]):
                out.append(
                    f"{where}: class {x} must have one component per level down to level {root.level}"
                )
            probs.add(cls.reliabilities[root.level - 1])
        if len(probs) > 1:
            out.append(f"{where}: classes disagree on the root's reliability")
        if root.level > 1:
            parents = [
                i
                for i, other in enumerate(roots)
                if other.level == root.level - 1 and root.classes <= other.classes
            ]
            if not parents:
                out.append(
                    f"{where}: no common root at level {root.level - 1} contains classes "
                    f"{sorted(root.classes)}"
                )

    for a in range(len(roots)):
        for b in range(a + 1, len(roots)):
            ra, rb = roots[a], roots[b]
            shared = ra.classes & rb.classes
            if not shared:
                continue
            if ra.level == rb.level:
                out.append(
                    f"common_roots[{a}], common_roots[{b}]: two roots at level {ra.level} "
                    f"share classes {sorted(shared)}"
                )
            elif ra.level < rb.level and not rb.classes <= ra.classes:
                out.append(
                    f"common_roots[{a}], common_roots[{b}]: overlapping roots must be nested"
                )
            elif rb.level < ra.level:
                if not ra.classes <= rb.classes:
                    out.append(
                        f"common_roots[{a}], common_roots[{b}]: overlapping roots must be nested"
                    )
                else:
                    out.append(
                        f"common_roots[{b}]: ancestor roots must precede descendants"
                    )
    return out


def require_valid(s: Scenario) -> None:
    violations = validate_scenario(s)
    if violations:
        raise ScenarioError("invalid scenario: " + "; ".join(violations), violations)


# -- JSON ------------------------------------------------------------------


def _field(obj: dict, key: str, where: str):
    if not isinstance(obj, dict):
        raise ScenarioError(f"{where}: expected an object")
    if key not in obj:
        raise ScenarioError(f"{where}.{key}: missing")
    return obj[key]


def _int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{where}: expected an integer, got {value!r}")
    return value


def _probs(value, where: str) -> tuple[float, ...]:
    if not isinstance(value, list) or not all(
        isinstance(p, (int, float)) and not isinstance(p, bool) for p in value
    ):
        raise ScenarioError(f"{where}: expected a list of numbers")
    return tuple(float(p) for p in value)


def scenario_from_dict(data: dict[str, Any]) -> Scenario:
    """Build a scenario from its JSON form; preset classes are expanded here."""
    if not isinstance(data, dict):
        raise ScenarioError("scenario: expected a JSON object")
    dem = _field(data, "demand", "scenario")
    demand = ServiceDemand(
        k=_int(_field(dem, "k", "demand"), "demand.k"),
        r=_int(_field(dem, "r", "demand"), "demand.r"),
        psi=_int(_field(dem, "psi", "demand"), "demand.psi"),
    )
    hier = data.get("hierarchy")
    if hier is None:
        hierarchy = Hierarchy()
    else:
        levels = _field(hier, "levels", "hierarchy")
        if not isinstance(levels, list) or not levels:
            raise ScenarioError("hierarchy.levels: expected a non-empty list")
        hierarchy = Hierarchy(tuple(str(x) for x in levels))

    raw_classes = _field(data, "classes", "scenario")
    if not isinstance(raw_classes, list):
        raise ScenarioError("classes: expected a list")
    classes = []
    for i, raw in enumerate(raw_classes):
        where = f"classes[{i}]"
        n_sub = _int(_field(raw, "n_sub", where), f"{where}.n_sub")
        probs = _probs(_field(raw, "reliabilities", where), f"{where}.reliabilities")
        if "preset" in raw:
            pre = raw["preset"]
            preset = PlacementPreset(
                nr=_int(_field(pre, "nr", f"{where}.preset"), f"{where}.preset.nr"),
                delta=_int(
                    _field(pre, "delta", f"{where}.preset"), f"{where}.preset.delta"
                ),
            )
            try:
                classes.append(expand_preset(preset, n_sub, probs, hierarchy))
            except ScenarioError as exc:
                raise ScenarioError(f"{where}.{exc}") from None
        else:
            eps = _field(raw, "epsilon", where)
            if not isinstance(eps, list):
                raise ScenarioError(f"{where}.epsilon: expected a list of integers")
            classes.append(
                ReliabilityClassSpec(
                    n_sub=n_sub,
                    epsilon=tuple(_int(n, f"{where}.epsilon") for n in eps),
                    delta=_int(_field(raw, "delta", where), f"{where}.delta"),
                    reliabilities=probs,
                )
            )

    roots = []
    for j, raw in enumerate(data.get("common_roots") or []):
        where = f"common_roots[{j}]"
        members = _field(raw, "classes", where)
        if not isinstance(members, list):
            raise ScenarioError(f"{where}.classes: expected a list of class indices")
        roots.append(
            CommonRoot(
                level=_int(_field(raw, "level", where), f"{where}.level"),
                classes=[_int(x, f"{where}.classes") for x in members],
            )
        )
    return Scenario(demand, tuple(classes), hierarchy, tuple(roots))


def scenario_to_dict(s: Scenario) -> dict[str, Any]:
    return {
        "demand": {"k": s.demand.k, "r": s.demand.r, "psi": s.demand.psi},
        "hierarchy": {"levels": list(s.hierarchy.level_names)},
        "classes": [
            {
                "n_sub": c.n_sub,
                "epsilon": list(c.epsilon),
                "delta": c.delta,
                "reliabilities": list(c.reliabilities),
            }
            for c in s.classes
        ],
        "common_roots": [
            {"level": r.level, "classes": sorted(r.classes)} for r in s.common_roots
        ],
    }


def load_scenario(path: str | Path) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"{path}: cannot read scenario file ({exc.strerror})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from None
    return scenario_from_dict(data)
