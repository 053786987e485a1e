"""Closed-form SFC reliability by nested binomial summation.

Every summation slot picks how many of the currently available components of
one level fail. Its upper bound (the acceptable component failures) is the
number of those components whose loss still leaves at least ``k`` VNFs of
each type, given the failures already fixed by the outer slots.

Indices in this module follow the formulas: class ``xi``, level ``c`` and
root ``rho`` are all 1-based.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

from sfcrel.model import Scenario, ScenarioError, ServiceDemand, require_valid

DEFAULT_TERM_BUDGET = 10**9


class TermBudgetExceeded(RuntimeError):
    """The evaluation needed more leaf terms than the configured budget."""


@dataclass(frozen=True)
class ReliabilityValue:
    value: float
    term_count: int
    eval_time: float


def binom_pmf(available: int, failed: int, p: float) -> float:
    """Probability that exactly ``failed`` of ``available`` components fail.

    ``p`` is the success probability of one component.
    """
    if available < 0 or not 0 <= failed <= available:
        raise ValueError(f"need 0 <= failed <= available, got {failed} of {available}")
    alive = available - failed
    coeff = math.comb(available, failed)
    try:
        return float(coeff) * p**alive * (1.0 - p) ** failed
    except OverflowError:
        pass
    # coefficient beyond double range: combine in log space
    if p in (0.0, 1.0):
        return 0.0
    return math.exp(math.log(coeff) + alive * math.log(p) + failed * math.log1p(-p))


def phi_indicator(xi: int, c: int, scenario: Scenario) -> int:
    """0 when level ``c`` of class ``xi`` is a common root, else 1."""
    for root in scenario.common_roots:
        if xi in root.classes and root.level == c:
            return 0
    return 1


@dataclass
class SummationState:
    """Failure counts fixed by the outer summations of one evaluation.

    ``f[(xi, c)]`` holds class-level failures, ``root_f[rho]`` root failures.
    Slots that are not fixed yet count as zero failures.
    """

    scenario: Scenario
    f: dict[tuple[int, int], int] = field(default_factory=dict)
    root_f: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        s = self.scenario
        self._root_at = [s.roots_of_class(xi) for xi in range(1, len(s.classes) + 1)]
        self._ancestors = [
            [j + 1 for j in s.root_ancestors(i)] for i in range(len(s.common_roots))
        ]

    def failures(self, xi: int, c: int) -> int:
        """f_{c,xi}; root failures stand in for the root level of each joined class."""
        rho = self._root_at[xi - 1].get(c)
        if rho is not None:
            return self.root_f.get(rho + 1, 0)
        return self.f.get((xi, c), 0)

    def root_index(self, xi: int, c: int) -> int | None:
        rho = self._root_at[xi - 1].get(c)
        return None if rho is None else rho + 1

    def ancestors(self, rho: int) -> list[int]:
        return self._ancestors[rho - 1]


def failed_vnf_count(state: SummationState, xi: int, c: int) -> int:
    """Same-type VNFs of class ``xi`` lost through failures at levels 1..c."""
    cls = state.scenario.classes[xi - 1]
    total = 0
    for level in range(1, min(c, cls.depth) + 1):
        total += state.failures(xi, level) * cls.vnfs_per_component(level)
    return total


def root_availability(state: SummationState, rho: int) -> int:
    return int(sum(state.root_f.get(a, 0) for a in state.ancestors(rho)) == 0)


def available_components(state: SummationState, xi: int, c: int) -> int:
    """Components of level ``c`` in class ``xi`` still alive after failures above it."""
    rho = state.root_index(xi, c)
    if rho is not None:
        return root_availability(state, rho)
    cls = state.scenario.classes[xi - 1]
    if c == 1:
        return cls.epsilon[0]
    alive = available_components(state, xi, c - 1) - state.failures(xi, c - 1)
    return max(alive, 0) * cls.epsilon[c - 1]


def _shared_floor(state: SummationState, xi: int) -> int:
    cls = state.scenario.classes[xi - 1]
    return failed_vnf_count(state, xi, cls.depth - cls.delta)


def root_acf(state: SummationState, rho: int) -> int:
    """1 if root ``rho`` may fail without dropping below ``k`` VNFs of a type.

    Each class's loss is counted once, at its highest failed root.
    """
    s = state.scenario
    if not root_availability(state, rho):
        return 0
    lost = 0
    counted: set[int] = set()
    for j in range(1, rho + 1):
        f = 1 if j == rho else state.root_f.get(j, 0)
        if not f:
            continue
        root = s.common_roots[j - 1]
        for xi in sorted(root.classes - counted):
            lost += s.classes[xi - 1].vnfs_per_component(root.level)
        counted |= root.classes
    return int(s.demand.r >= lost)


def _bound(components: int, budget: int, per_component: int) -> int:
    if budget < 0:
        return 0
    return max(0, min(components, budget // per_component))


def acf_shared(state: SummationState, xi: int, c: int) -> int:
    """Acceptable failures at a level shared by all VNF types of class ``xi``.

    The remaining backup budget is reduced by the shared-level losses of the
    other classes (for later classes only their root failures are fixed yet)
    and by the losses of class ``xi`` above level ``c``.
    """
    s = state.scenario
    budget = s.demand.r - failed_vnf_count(state, xi, c - 1)
    for l in range(1, len(s.classes) + 1):
        if l != xi:
            budget -= _shared_floor(state, l)
    per = s.classes[xi - 1].vnfs_per_component(c)
    return _bound(available_components(state, xi, c), budget, per)


def acf_disjoint(state: SummationState, xi: int, c: int) -> int:
    """Acceptable failures at a level reserved for one VNF type of class ``xi``."""
    s = state.scenario
    budget = s.demand.r - failed_vnf_count(state, xi, c - 1)
    for l in range(1, len(s.classes) + 1):
        if l < xi:
            budget -= failed_vnf_count(state, l, s.depth)
        elif l > xi:
            budget -= _shared_floor(state, l)
    per = s.classes[xi - 1].vnfs_per_component(c)
    return _bound(available_components(state, xi, c), budget, per)


def reliability_placement_independent(
    demand: ServiceDemand, vm_classes: Sequence[tuple[int, float]]
) -> ReliabilityValue:
    """Reliability when only VMs can fail.

    ``vm_classes`` lists ``(n_sub, vm_reliability)`` per class in evaluation
    order.
    """
    for n, p in vm_classes:
        if not 0.0 <= p <= 1.0:
            raise ScenarioError(f"VM reliability {p} outside [0, 1]")
        if n < 1:
            raise ScenarioError(f"class size {n} must be >= 1")
    start = time.perf_counter()
    terms = 0

    def rec(i: int, spent: int) -> float:
        nonlocal terms
        if i == len(vm_classes):
            return 1.0
        n, p = vm_classes[i]
        bound = min(n, demand.r - spent)
        parts = []
        for f in range(bound + 1):
            terms += 1
            parts.append(binom_pmf(n, f, p) * rec(i + 1, spent + f))
        return math.fsum(parts)

    value = rec(0, 0) ** demand.psi
    return ReliabilityValue(value, terms, time.perf_counter() - start)


def reliability_single_class(scenario: Scenario) -> ReliabilityValue:
    """Reliability of one class without common roots.

    Shared levels are summed once; the disjoint levels form a per-type factor
    raised to the SFC length.
    """
    require_valid(scenario)
    if len(scenario.classes) != 1 or scenario.common_roots:
        raise ScenarioError("single-class evaluation needs exactly one class and no roots")
    start = time.perf_counter()
    cls = scenario.classes[0]
    r, psi = scenario.demand.r, scenario.demand.psi
    shared = tuple(cls.shared_levels)
    disjoint = tuple(cls.disjoint_levels)
    memo: dict[tuple, float] = {}
    terms = 0

    def level_sum(levels, j: int, alive: int, lost: int, leaf: Callable) -> float:
        nonlocal terms
        if j == len(levels):
            return leaf(alive, lost)
        key = (levels, j, alive, lost)
        if key in memo:
            return memo[key]
        c = levels[j]
        lam = cls.epsilon[0] if c == 1 else alive * cls.epsilon[c - 1]
        per = cls.vnfs_per_component(c)
        parts = []
        for f in range(_bound(lam, r - lost, per) + 1):
            terms += 1
            inner = level_sum(levels, j + 1, lam - f, lost + f * per, leaf)
            parts.append(binom_pmf(lam, f, cls.reliabilities[c - 1]) * inner)
        memo[key] = value = math.fsum(parts)
        return value

    def bracket(alive: int, lost: int) -> float:
        return level_sum(disjoint, 0, alive, lost, lambda *_: 1.0) ** psi

    value = level_sum(shared, 0, 0, 0, bracket)
    return ReliabilityValue(value, terms, time.perf_counter() - start)


class _Evaluator:
    """Depth-first evaluation of the general nested summation.

    Slot order: roots (scenario order), shared class levels (class order,
    top-down), then the disjoint bracket with the same ordering. Partial sums
    are memoized on the remaining budget and the surviving component counts,
    which together determine every later bound.
    """

    def __init__(self, scenario: Scenario, term_budget: int):
        self.s = scenario
        self.state = SummationState(scenario)
        self.term_budget = term_budget
        self.terms = 0
        self.memo: dict[tuple, float] = {}
        n_classes = len(scenario.classes)

        outer: list[tuple] = [("root", rho) for rho in range(1, len(scenario.common_roots) + 1)]
        inner: list[tuple] = []
        for xi, cls in enumerate(scenario.classes, 1):
            for c in cls.shared_levels:
                if phi_indicator(xi, c, scenario):
                    outer.append(("shared", xi, c))
            for c in cls.disjoint_levels:
                inner.append(("disjoint", xi, c))
        self.outer, self.inner = outer, inner

        # deepest fixed level per class before each slot, for the memo key
        def frontiers(slots, start):
            last = list(start)
            seen = []
            for slot in slots:
                seen.append(tuple(last))
                if slot[0] == "root":
                    root = scenario.common_roots[slot[1] - 1]
                    for xi in root.classes:
                        last[xi - 1] = max(last[xi - 1], root.level)
                else:
                    last[slot[1] - 1] = slot[2]
            seen.append(tuple(last))
            return seen

        self.outer_last = frontiers(outer, [0] * n_classes)
        self.inner_last = frontiers(inner, self.outer_last[-1])

    def _key(self, phase: str, i: int, last: tuple[int, ...]) -> tuple:
        st = self.state
        alive = []
        lost = 0
        for xi, c in enumerate(last, 1):
            if c == 0:
                alive.append(-1)
                continue
            alive.append(available_components(st, xi, c) - st.failures(xi, c))
            lost += failed_vnf_count(st, xi, c)
        roots = tuple(st.root_f.get(rho, 0) for rho in range(1, len(self.s.common_roots) + 1))
        return (phase, i, lost, tuple(alive), roots)

    def _slot_sum(self, phase: str, i: int) -> float:
        slots = self.outer if phase == "outer" else self.inner
        if i == len(slots):
            if phase == "outer":
                return self._slot_sum("inner", 0) ** self.s.demand.psi
            return 1.0
        last = (self.outer_last if phase == "outer" else self.inner_last)[i]
        key = self._key(phase, i, last)
        cached = self.memo.get(key)
        if cached is not None:
            return cached

        st = self.state
        slot = slots[i]
        if slot[0] == "root":
            rho = slot[1]
            root = self.s.common_roots[rho - 1]
            lam = root_availability(st, rho)
            bound = root_acf(st, rho)
            p = self.s.classes[min(root.classes) - 1].reliabilities[root.level - 1]
            store = st.root_f
            at = rho
        else:
            _, xi, c = slot
            lam = available_components(st, xi, c)
            bound = acf_shared(st, xi, c) if slot[0] == "shared" else acf_disjoint(st, xi, c)
            p = self.s.classes[xi - 1].reliabilities[c - 1]
            store = st.f
            at = (xi, c)

        parts = []
        for f in range(bound + 1):
            self.terms += 1
            if self.terms > self.term_budget:
                raise TermBudgetExceeded(
                    f"evaluation exceeded the term budget of {self.term_budget}"
                )
            store[at] = f
            parts.append(binom_pmf(lam, f, p) * self._slot_sum(phase, i + 1))
        store.pop(at, None)
        value = math.fsum(parts)
        self.memo[key] = value
        return value

    def run(self) -> float:
        return self._slot_sum("outer", 0)


def reliability_general(
    scenario: Scenario, term_budget: int = DEFAULT_TERM_BUDGET
) -> ReliabilityValue:
    """End-to-end reliability of an arbitrary valid scenario.

    Raises:
        ScenarioError: the scenario violates a model invariant.
        TermBudgetExceeded: more than ``term_budget`` leaf terms were needed.
    """
    require_valid(scenario)
    start = time.perf_counter()
    ev = _Evaluator(scenario, term_budget)
    value = ev.run()
    return ReliabilityValue(value, ev.terms, time.perf_counter() - start)
