"""
Joint-decoding rate regions of a Gaussian interference channel.

A region is the polytope {r >= 0 : sum_{i in S} r_i <= b_S for every nonempty S}.
Bounds are MAC bounds evaluated with independent full-power Gaussian inputs and a
constant time-sharing variable, which maximizes every bound at once.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog
from scipy.stats import qmc

from .config import SIZE_CAPS, TOLERANCES
from .errors import ArgumentError, NumericError, RegimeError, SizeCapError
from .measures import gaussian_mac_mi
from .model import GaussianIC, RateVector
from .regimes import gaussian_kuser_check

logger = logging.getLogger("icregime.regions")

Subset = FrozenSet[int]


def all_subsets(K: int) -> List[Subset]:
    """Nonempty subsets of 1..K ordered by size, then lexicographically."""
    users = range(1, K + 1)
    return [frozenset(c) for size in range(1, K + 1) for c in itertools.combinations(users, size)]


@dataclass(frozen=True)
class RegionSpec:
    K: int
    constraints: Mapping[Subset, float]
    provenance: Mapping[Subset, Tuple[int, ...]]

    def __post_init__(self):
        constraints = {frozenset(s): float(b) for s, b in self.constraints.items()}
        missing = [tuple(sorted(s)) for s in all_subsets(self.K) if s not in constraints]
        if missing:
            raise ArgumentError(f"constraints missing for subsets {missing}")
        negative = [tuple(sorted(s)) for s, b in constraints.items() if not b >= 0.0]
        if negative:
            raise ArgumentError(f"negative bounds for subsets {negative}")
        object.__setattr__(self, "constraints", constraints)
        object.__setattr__(self, "provenance",
                           {frozenset(s): tuple(r) for s, r in self.provenance.items()})

    def bound(self, subset: Iterable[int]) -> float:
        return self.constraints[frozenset(subset)]

    def subsets(self) -> List[Subset]:
        return all_subsets(self.K)

    def matrix(self) -> Tuple[List[Subset], np.ndarray, np.ndarray]:
        """(subsets, A, b) with A the 0/1 subset-indicator rows."""
        subsets = self.subsets()
        A = np.zeros((len(subsets), self.K))
        for row, s in enumerate(subsets):
            A[row, [i - 1 for i in s]] = 1.0
        return subsets, A, np.array([self.constraints[s] for s in subsets])


def _check_users(ic: GaussianIC) -> None:
    if ic.K > SIZE_CAPS["max_users"]:
        raise SizeCapError(f"K = {ic.K} exceeds the region cap of {SIZE_CAPS['max_users']} users")


def _min_over(ic: GaussianIC, receivers: Iterable[int], subset: Subset) -> Tuple[float, Tuple[int, ...]]:
    values = {j: gaussian_mac_mi(ic, j, subset) for j in receivers}
    best = min(values.values())
    return best, tuple(j for j, v in sorted(values.items()) if v <= best + TOLERANCES["membership"])


def region_full(ic: GaussianIC) -> RegionSpec:
    """b_S = min over every receiver of the MAC bound on S."""
    _check_users(ic)
    constraints, provenance = {}, {}
    for s in all_subsets(ic.K):
        constraints[s], provenance[s] = _min_over(ic, range(1, ic.K + 1), s)
    return RegionSpec(ic.K, constraints, provenance)


def region_simplified(ic: GaussianIC) -> RegionSpec:
    """b_S = min over the receivers in S only."""
    _check_users(ic)
    constraints, provenance = {}, {}
    for s in all_subsets(ic.K):
        constraints[s], provenance[s] = _min_over(ic, sorted(s), s)
    return RegionSpec(ic.K, constraints, provenance)


def mac_region(ic: GaussianIC, receiver: int) -> RegionSpec:
    """MAC polymatroid seen by one receiver decoding every message."""
    _check_users(ic)
    constraints = {s: gaussian_mac_mi(ic, receiver, s) for s in all_subsets(ic.K)}
    return RegionSpec(ic.K, constraints, {s: (receiver,) for s in constraints})


def sum_capacity(ic: GaussianIC) -> float:
    """
    min_j 0.5 log2(1 + sum_i a_ji^2 P_i), the full-set bound of region_full.

    This is the largest sum rate only when the full-set constraint binds; smaller
    subsets can cap the sum below it. max_sum_rate gives the attained value.
    """
    everyone = range(1, ic.K + 1)
    return min(gaussian_mac_mi(ic, j, everyone) for j in everyone)


def max_sum_rate(ic: GaussianIC) -> float:
    """support of region_full in the all-ones direction."""
    return support(region_full(ic), np.ones(ic.K))


@dataclass(frozen=True)
class Membership:
    inside: bool
    violated: Tuple[Tuple[int, ...], ...]

    def to_json(self) -> Dict[str, Any]:
        return {"inside": self.inside, "violated": [list(s) for s in self.violated]}


def _rates(r) -> np.ndarray:
    return r.rates if isinstance(r, RateVector) else np.asarray(r, dtype=float)


def membership(region: RegionSpec, r, tol: float = TOLERANCES["membership"]) -> Membership:
    rates = _rates(r)
    if rates.shape != (region.K,):
        raise ArgumentError(f"rate vector of length {rates.size} for a {region.K}-user region")
    subsets, A, b = region.matrix()
    failing = A @ rates > b + tol
    violated = tuple(tuple(sorted(s)) for s, bad in zip(subsets, failing) if bad)
    return Membership(not violated and bool(np.all(rates >= -tol)), violated)


def contains_batch(region: RegionSpec, points: np.ndarray, tol: float = TOLERANCES["membership"]) -> np.ndarray:
    """Membership of each row of `points`."""
    _, A, b = region.matrix()
    return np.all(points @ A.T <= b + tol, axis=1) & np.all(points >= -tol, axis=1)


def vertices(region: RegionSpec, dedup: float = TOLERANCES["vertex_dedup"]) -> List[RateVector]:
    """
    Vertices by brute force: every K-subset of the hyperplanes (subset sums and
    coordinate planes) that meets in a single feasible point.
    """
    K = region.K
    if K > SIZE_CAPS["max_vertex_users"]:
        raise ArgumentError(f"vertex enumeration capped at K={SIZE_CAPS['max_vertex_users']}")
    _, A, b = region.matrix()
    planes = np.vstack([A, -np.eye(K)])
    offsets = np.concatenate([b, np.zeros(K)])
    found: List[np.ndarray] = []
    for rows in itertools.combinations(range(len(planes)), K):
        M = planes[list(rows)]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        point = np.linalg.solve(M, offsets[list(rows)])
        if np.any(point < -dedup) or np.any(A @ point > b + dedup):
            continue
        point = np.maximum(point, 0.0)
        if not any(np.max(np.abs(point - q)) <= dedup for q in found):
            found.append(point)
    found.sort(key=tuple)
    return [RateVector(p) for p in found]


def _direction(region: RegionSpec, direction: Sequence[float]) -> np.ndarray:
    c = np.asarray(direction, dtype=float)
    if c.shape != (region.K,):
        raise ArgumentError(f"direction of length {c.size} for a {region.K}-user region")
    if np.any(c < 0):
        raise ArgumentError("direction entries must be nonnegative")
    if not np.any(c > 0):
        raise ArgumentError("direction must not be all zero")
    return c


def support(region: RegionSpec, direction: Sequence[float]) -> float:
    """max c.r over the region: vertex enumeration for K <= 3, HiGHS linear program above."""
    c = _direction(region, direction)
    if region.K > SIZE_CAPS["max_users"]:
        raise SizeCapError(f"support capped at K={SIZE_CAPS['max_users']}")
    if region.K <= SIZE_CAPS["max_vertex_users"]:
        return max(float(c @ v.rates) for v in vertices(region))
    _, A, b = region.matrix()
    res = linprog(-c, A_ub=A, b_ub=b, bounds=[(0.0, None)] * region.K, method="highs")
    if not res.success:
        raise NumericError(f"support LP failed: {res.message}")
    return float(-res.fun)


def support_point(region: RegionSpec, direction: Sequence[float]) -> np.ndarray:
    """A maximizer of c.r, always solved as a linear program."""
    c = _direction(region, direction)
    _, A, b = region.matrix()
    res = linprog(-c, A_ub=A, b_ub=b, bounds=[(0.0, None)] * region.K, method="highs")
    if not res.success:
        raise NumericError(f"support LP failed: {res.message}")
    return np.maximum(res.x, 0.0)


def induced_region(region: RegionSpec, fixed: Mapping[int, float]) -> Optional[Tuple[Tuple[int, ...], RegionSpec]]:
    """
    Cross-section after fixing some coordinates, as (free users, region over them).

    b'_T = min over S meeting the free users in T of b_S - sum_{i in S fixed} v_i.
    Returns None when the fixed values violate a constraint on fixed users only.
    """
    K = region.K
    fixed = {int(i): float(v) for i, v in fixed.items()}
    bad = [i for i in fixed if not 1 <= i <= K]
    if bad:
        raise ArgumentError(f"fixed coordinates {bad} outside 1..{K}")
    if any(v < 0 for v in fixed.values()):
        raise ArgumentError("fixed coordinates must be nonnegative")
    free = tuple(i for i in range(1, K + 1) if i not in fixed)
    if not free:
        raise ArgumentError("no free coordinate left")
    index = {u: k + 1 for k, u in enumerate(free)}
    tol = TOLERANCES["membership"]
    constraints: Dict[Subset, float] = {}
    provenance: Dict[Subset, Tuple[int, ...]] = {}
    for s in region.subsets():
        slack = region.constraints[s] - sum(fixed[i] for i in s if i in fixed)
        t = frozenset(index[i] for i in s if i not in fixed)
        if slack < -tol:
            return None
        if not t:
            continue
        if t not in constraints or slack < constraints[t]:
            constraints[t] = max(slack, 0.0)
            provenance[t] = region.provenance.get(s, ())
    return free, RegionSpec(len(free), constraints, provenance)


def slice_polygon(region: RegionSpec, fixed: Mapping[int, float]) -> List[Tuple[float, float]]:
    """Boundary of the 2-D cross-section, counterclockwise; [] when infeasible."""
    if len(fixed) != region.K - 2:
        raise ArgumentError(f"slice needs exactly {region.K - 2} fixed coordinates, got {len(fixed)}")
    induced = induced_region(region, fixed)
    if induced is None:
        return []
    _, plane = induced
    points = [tuple(float(x) for x in v.rates) for v in vertices(plane)]
    if len(points) < 3:
        return points
    cx = sum(p[0] for p in points) / len(points)
    cy = sum(p[1] for p in points) / len(points)
    return sorted(points, key=lambda p: math.atan2(p[1] - cy, p[0] - cx))


slice = slice_polygon


@dataclass(frozen=True)
class RedundancyResult:
    equivalent: bool
    counterexample: Optional[RateVector]
    max_bound_gap: float
    n_probes: int

    def to_json(self) -> Dict[str, Any]:
        return {"equivalent": self.equivalent,
                "counterexample": self.counterexample.rates.tolist() if self.counterexample is not None else None,
                "max_bound_gap": self.max_bound_gap, "n_probes": self.n_probes}


def redundancy_check(ic: GaussianIC, shift: int = 0, n_probes: int = 1000) -> RedundancyResult:
    """
    Compare region_full and region_simplified on an ic inside the shifted regime:
    subset bounds within 1e-9, and cross-membership on Halton probes filling the
    bounding box of the simplified region.
    """
    if not gaussian_kuser_check(ic, shift).passed:
        raise RegimeError("ic not in declared regime")
    full, simplified = region_full(ic), region_simplified(ic)
    gap = max(abs(simplified.constraints[s] - full.constraints[s]) for s in full.subsets())
    box = np.array([simplified.bound({i}) for i in range(1, ic.K + 1)])
    probes = qmc.Halton(d=ic.K, scramble=False).random(n_probes) * box
    disagree = np.flatnonzero(contains_batch(full, probes) != contains_batch(simplified, probes))
    counterexample = RateVector(probes[disagree[0]]) if disagree.size else None
    equivalent = gap <= TOLERANCES["bound_equality"] and counterexample is None
    logger.info("redundancy check K=%d shift=%d: max bound gap %.3e, %d disagreeing probes",
                ic.K, shift, gap, disagree.size)
    return RedundancyResult(equivalent, counterexample, float(gap), n_probes)


# ---------------- JSON ----------------

def region_to_json(region: RegionSpec) -> Dict[str, Any]:
    return {
        "K": region.K,
        "constraints": [
            {"subset": sorted(s), "bound": region.constraints[s],
             "argmin_receivers": list(region.provenance.get(s, ()))}
            for s in region.subsets()
        ],
    }


def region_from_json(data: Dict[str, Any]) -> RegionSpec:
    constraints = {frozenset(c["subset"]): float(c["bound"]) for c in data["constraints"]}
    provenance = {frozenset(c["subset"]): tuple(c.get("argmin_receivers", ())) for c in data["constraints"]}
    return RegionSpec(int(data["K"]), constraints, provenance)
