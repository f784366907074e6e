"""
Strong-interference condition sets and their closed-form Gaussian checks.

A condition set is a list of inequalities
    I(X_lhs; Y_smaller | X_cond) <= I(X_lhs; Y_larger | X_cond)
each required for every input law in a factorization family. For Gaussian
channels an inequality is certified by the ratio test: the left inputs' gains at
the smaller receiver are a common multiple alpha, |alpha| <= 1, of their gains at
the larger one, which makes the smaller receiver a degraded copy of the larger
one given the conditioning inputs.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .config import TOLERANCES
from .errors import ArgumentError, RegimeError
from .model import GaussianIC, TwoOutputSystem

logger = logging.getLogger("icregime.regimes")

Block = Tuple[int, ...]


def _block(users: Iterable[int]) -> Block:
    return tuple(sorted(set(int(u) for u in users)))


def _partition(blocks: Iterable[Iterable[int]]) -> Tuple[Block, ...]:
    return tuple(sorted((_block(b) for b in blocks), key=lambda b: (b[0] if b else 0, b)))


@dataclass(frozen=True)
class MIInequality:
    lhs: Block
    smaller_receiver: int
    larger_receiver: int
    cond: Block
    factorization: Tuple[Block, ...]

    def __post_init__(self):
        object.__setattr__(self, "lhs", _block(self.lhs))
        object.__setattr__(self, "cond", _block(self.cond))
        object.__setattr__(self, "factorization", _partition(self.factorization))
        if set(self.lhs) & set(self.cond):
            raise ArgumentError("lhs inputs and conditioning overlap")
        if not self.lhs:
            raise ArgumentError("lhs inputs empty")

    @property
    def users(self) -> Block:
        return _block(self.lhs + self.cond)

    def signature(self) -> Tuple[Block, int, int, Block]:
        """Identity of the inequality without its factorization family."""
        return (self.lhs, self.smaller_receiver, self.larger_receiver, self.cond)

    def relabel(self, mapping: Dict[int, int]) -> "MIInequality":
        return MIInequality(
            lhs=tuple(mapping[u] for u in self.lhs),
            smaller_receiver=mapping[self.smaller_receiver],
            larger_receiver=mapping[self.larger_receiver],
            cond=tuple(mapping[u] for u in self.cond),
            factorization=tuple(tuple(mapping[u] for u in b) for b in self.factorization),
        )

    def describe(self) -> str:
        xs = ", ".join(f"X{u}" for u in self.lhs)
        given = "|" + ", ".join(f"X{u}" for u in self.cond) if self.cond else ""
        law = " ".join("P_{" + "".join(f"X{u}" for u in b) + "}" for b in self.factorization)
        return (f"I({xs}; Y{self.smaller_receiver}{given}) <= I({xs}; Y{self.larger_receiver}{given})"
                f"  for all {law}")

    def to_json(self) -> Dict[str, Any]:
        return {
            "lhs": list(self.lhs),
            "cond": list(self.cond),
            "smaller_receiver": self.smaller_receiver,
            "larger_receiver": self.larger_receiver,
            "factorization": [list(b) for b in self.factorization],
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "MIInequality":
        return cls(tuple(data["lhs"]), int(data["smaller_receiver"]), int(data["larger_receiver"]),
                   tuple(data["cond"]), tuple(tuple(b) for b in data["factorization"]))


def diagnose_inequality(ineq: MIInequality, K: int) -> List[str]:
    everyone = set(range(1, K + 1))
    report = []
    if set(ineq.lhs) | set(ineq.cond) != everyone:
        report.append(f"{ineq.describe()}: lhs and conditioning do not cover users 1..{K}")
    covered = [u for b in ineq.factorization for u in b]
    if sorted(covered) != sorted(everyone):
        report.append(f"{ineq.describe()}: factorization is not a partition of 1..{K}")
    for r in (ineq.smaller_receiver, ineq.larger_receiver):
        if r not in everyone:
            report.append(f"{ineq.describe()}: receiver {r} outside 1..{K}")
    return report


@dataclass(frozen=True)
class ConditionSet:
    K: int
    inequalities: Tuple[MIInequality, ...]
    label: str

    def __post_init__(self):
        object.__setattr__(self, "inequalities", tuple(self.inequalities))
        report = [msg for q in self.inequalities for msg in diagnose_inequality(q, self.K)]
        if report:
            raise ArgumentError("; ".join(report))

    def __len__(self) -> int:
        return len(self.inequalities)

    def __iter__(self):
        return iter(self.inequalities)

    def relabel(self, mapping: Dict[int, int], label: Optional[str] = None) -> "ConditionSet":
        return ConditionSet(self.K, tuple(q.relabel(mapping) for q in self.inequalities), label or self.label)

    def signatures(self) -> List[Tuple[Block, int, int, Block]]:
        return [q.signature() for q in self.inequalities]

    def to_json(self) -> Dict[str, Any]:
        return {"K": self.K, "label": self.label, "inequalities": [q.to_json() for q in self.inequalities]}

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "ConditionSet":
        return cls(int(data["K"]), tuple(MIInequality.from_json(q) for q in data["inequalities"]), data["label"])


# ---------------- Generation ----------------

def cyclic_shift_map(K: int, shift: int) -> Dict[int, int]:
    return {i: (i - 1 + shift) % K + 1 for i in range(1, K + 1)}


def generate_cyclic_regime(order: Sequence[int], label: Optional[str] = None) -> ConditionSet:
    """
    Regime for the cyclic user order sigma = (s_1, ..., s_K): inequality r reads
    I(X_{not s_r}; Y_{s_(r-1)} | X_{s_r}) <= I(X_{not s_r}; Y_{s_r} | X_{s_r}), s_0 = s_K,
    with the left inputs jointly distributed and independent of X_{s_r}.
    """
    K = len(order)
    if K < 2:
        raise ArgumentError(f"K must be >= 2, got {K}")
    if sorted(order) != list(range(1, K + 1)):
        raise ArgumentError(f"order {tuple(order)} is not a permutation of 1..{K}")
    rows = []
    for r in range(K):
        own = order[r]
        rest = [u for u in range(1, K + 1) if u != own]
        rows.append(MIInequality(tuple(rest), order[r - 1], own, (own,), ((own,), tuple(rest))))
    return ConditionSet(K, tuple(rows), label or "cycle-" + "-".join(str(u) for u in order))


def generate_kuser_regime(K: int, shift: int = 0) -> ConditionSet:
    """The K-inequality regime on the natural cycle 1 -> 2 -> ... -> K, relabeled i -> i + shift (mod K)."""
    if K < 2:
        raise ArgumentError(f"K must be >= 2, got {K}")
    if not 0 <= shift < K:
        raise ArgumentError(f"shift must lie in [0, {K}), got {shift}")
    base = generate_cyclic_regime(tuple(range(1, K + 1)), label=f"cyclic-shift-{shift}")
    if shift == 0:
        return base
    return base.relabel(cyclic_shift_map(K, shift))


def cyclic_orders(K: int) -> List[Tuple[int, ...]]:
    """The (K-1)! cyclic orders of 1..K, each written starting from user 1."""
    if K < 2:
        raise ArgumentError(f"K must be >= 2, got {K}")
    return [(1,) + p for p in itertools.permutations(range(2, K + 1))]


def enumerate_cyclic_regimes(K: int) -> List[ConditionSet]:
    return [generate_cyclic_regime(o) for o in cyclic_orders(K)]


def _ineq(lhs, smaller, larger, cond, factorization) -> MIInequality:
    return MIInequality(tuple(lhs), smaller, larger, tuple(cond), tuple(tuple(b) for b in factorization))


_PRODUCT3 = ((1,), (2,), (3,))

# Per-receiver pairs whose union makes decoding everything optimal at that receiver.
_RECEIVER_CONDITIONS = {
    (1, "primary"): (
        _ineq((2,), 2, 3, (1, 3), _PRODUCT3),
        _ineq((2, 3), 3, 1, (1,), _PRODUCT3),
    ),
    (2, "primary"): (
        _ineq((3,), 3, 1, (1, 2), _PRODUCT3),
        _ineq((1, 3), 1, 2, (2,), ((1, 3), (2,))),
    ),
    (3, "primary"): (
        _ineq((1,), 1, 2, (2, 3), _PRODUCT3),
        _ineq((1, 2), 2, 3, (3,), ((1, 2), (3,))),
    ),
    (1, "exchanged"): (
        _ineq((3,), 3, 2, (1, 2), _PRODUCT3),
        _ineq((2, 3), 2, 1, (1,), _PRODUCT3),
    ),
}


def receiver_conditions(receiver: int, variant: str = "primary") -> ConditionSet:
    """
    Two-user-block conditions under which decoding all three messages at one
    receiver is optimal; "exchanged" swaps users 2 and 3 in the receiver-1 pair.
    """
    key = (receiver, variant)
    if key not in _RECEIVER_CONDITIONS:
        raise ArgumentError(f"no receiver conditions for receiver {receiver}, variant {variant!r}")
    return ConditionSet(3, _RECEIVER_CONDITIONS[key], f"receiver-{receiver}-{variant}")


def generate_3user_variant(which: str) -> ConditionSet:
    """'regime-41': the joint-input cyclic regime; 'regime-46': the four fully-product conditions."""
    name = str(which).replace("regime-", "")
    if name == "41":
        return generate_cyclic_regime((1, 2, 3), label="3user-variant-41")
    if name == "46":
        return ConditionSet(3, (
            _ineq((3,), 3, 2, (1, 2), _PRODUCT3),
            _ineq((2, 3), 2, 1, (1,), _PRODUCT3),
            _ineq((1, 3), 1, 2, (2,), _PRODUCT3),
            _ineq((1, 2), 2, 3, (3,), _PRODUCT3),
        ), "3user-variant-46")
    raise ArgumentError(f"unknown 3-user variant {which!r}; expected regime-41 or regime-46")


def corollary_consequences(ineq: MIInequality) -> List[MIInequality]:
    """Inequalities implied by moving any proper nonempty subset of the left inputs into the conditioning."""
    out = []
    for size in range(1, len(ineq.lhs)):
        for moved in itertools.combinations(ineq.lhs, size):
            rest = tuple(u for u in ineq.lhs if u not in moved)
            out.append(MIInequality(rest, ineq.smaller_receiver, ineq.larger_receiver,
                                    ineq.cond + moved, ineq.factorization))
    return out


def reduce_by_corollary(inequalities: Iterable[MIInequality], K: int, label: str) -> ConditionSet:
    """Drop every inequality that is a consequence of another one in the collection."""
    items = list(inequalities)
    implied = {c.signature() for q in items for c in corollary_consequences(q)}
    kept, seen = [], set()
    for q in items:
        if q.signature() in implied or q.signature() in seen:
            continue
        seen.add(q.signature())
        kept.append(q)
    return ConditionSet(K, tuple(kept), label)


# ---------------- Gaussian checks ----------------

@dataclass(frozen=True)
class RatioCheck:
    passed: bool
    alpha: Optional[float]
    reason: Optional[str] = None
    ratios: Tuple[Optional[float], ...] = ()

    def to_json(self) -> Dict[str, Any]:
        return {"pass": self.passed, "alpha": self.alpha, "reason": self.reason, "ratios": list(self.ratios)}


def ratio_condition_check(sys: TwoOutputSystem,
                          rel_tol: float = TOLERANCES["ratio_relative"],
                          slack: float = TOLERANCES["alpha_slack"]) -> RatioCheck:
    """
    a_i / b_i equal to a common alpha over the joint block, |alpha| <= 1.

    Inputs absent from both outputs (a_i = b_i = 0) are unconstrained. When no
    ratio is constrained the output Y1 does not see the joint block and alpha is 0.
    """
    ratios: List[Optional[float]] = []
    for ai, bi in zip(sys.a[:sys.mu1], sys.b[:sys.mu1]):
        if bi == 0.0:
            if ai != 0.0:
                ratios.append(None)
                return RatioCheck(False, None, "undefined ratio", tuple(ratios))
            ratios.append(None)
            continue
        ratios.append(float(ai / bi))
    defined = [r for r in ratios if r is not None]
    if not defined:
        return RatioCheck(True, 0.0, "no constrained ratio", tuple(ratios))
    first = defined[0]
    if not all(math.isclose(r, first, rel_tol=rel_tol, abs_tol=1e-15) for r in defined):
        return RatioCheck(False, None, "ratios differ", tuple(ratios))
    alpha = float(np.mean(defined))
    if abs(alpha) > 1.0 + slack:
        return RatioCheck(False, alpha, "|alpha| > 1", tuple(ratios))
    return RatioCheck(True, alpha, None, tuple(ratios))


@dataclass(frozen=True)
class DegradedConstruction:
    """Y1~ = alpha Y2 + sum_j x_coeffs[j] X_{mu1+j} + noise_scale Z~."""
    alpha: float
    x_coeffs: np.ndarray
    noise_scale: float

    def conditional_law(self, sys: TwoOutputSystem) -> Tuple[np.ndarray, float]:
        """(mean coefficients on all inputs, variance) of Y1~ given the inputs."""
        mean = self.alpha * np.asarray(sys.b, dtype=float)
        mean[sys.mu1:] += self.x_coeffs
        return mean, self.alpha ** 2 + self.noise_scale ** 2

    def to_json(self) -> Dict[str, Any]:
        return {"alpha": self.alpha, "x_coeffs": self.x_coeffs.tolist(), "noise_scale": self.noise_scale}


def degraded_equivalent(sys: TwoOutputSystem) -> DegradedConstruction:
    """
    Build Y1~ from Y2 with the same conditional law as Y1.

    Matching the conditional mean on a conditioning input j forces the correction
    a_j - alpha b_j; the noise fills the variance up to 1.
    """
    check = ratio_condition_check(sys)
    if not check.passed:
        raise RegimeError(f"system not ratio-degraded ({check.reason})")
    alpha = float(check.alpha)
    x_coeffs = np.asarray(sys.a[sys.mu1:], dtype=float) - alpha * np.asarray(sys.b[sys.mu1:], dtype=float)
    x_coeffs.setflags(write=False)
    return DegradedConstruction(alpha, x_coeffs, math.sqrt(max(0.0, 1.0 - alpha * alpha)))


def inequality_to_system(ic: GaussianIC, ineq: MIInequality) -> TwoOutputSystem:
    """
    Gaussian system of one inequality: Y1 is the smaller receiver, Y2 the larger,
    the left inputs form the joint block and the conditioning users the rest.
    """
    cols = np.array(ineq.lhs + ineq.cond) - 1
    a = ic.gains[ineq.smaller_receiver - 1, cols]
    b = ic.gains[ineq.larger_receiver - 1, cols]
    return TwoOutputSystem(len(ineq.lhs), len(ineq.cond), a, b)


@dataclass(frozen=True)
class GaussianCheck:
    passed: bool
    alphas: Optional[Tuple[float, ...]]
    failures: Tuple[Dict[str, Any], ...]
    label: str = ""
    notes: Tuple[str, ...] = ()

    def to_json(self) -> Dict[str, Any]:
        return {"pass": self.passed, "label": self.label,
                "alphas": list(self.alphas) if self.alphas is not None else None,
                "failures": list(self.failures), "notes": list(self.notes)}


def gaussian_condition_set_check(ic: GaussianIC, cs: ConditionSet,
                                 rel_tol: float = TOLERANCES["ratio_relative"],
                                 slack: float = TOLERANCES["alpha_slack"]) -> GaussianCheck:
    """Ratio test applied inequality by inequality."""
    if cs.K != ic.K:
        raise ArgumentError(f"condition set for K={cs.K} applied to a {ic.K}-user channel")
    alphas: List[Optional[float]] = []
    failures = []
    for idx, ineq in enumerate(cs.inequalities, start=1):
        check = ratio_condition_check(inequality_to_system(ic, ineq), rel_tol, slack)
        alphas.append(check.alpha)
        if not check.passed:
            failures.append({"chain": idx, "inequality": ineq.describe(), "reason": check.reason,
                             "ratios": list(check.ratios), "alpha": check.alpha})
    logger.debug("condition set %s: %d of %d chains failed", cs.label, len(failures), len(cs))
    complete = None if any(a is None for a in alphas) else tuple(alphas)
    return GaussianCheck(not failures, complete, tuple(failures), cs.label)


def gaussian_kuser_check(ic: GaussianIC, shift: int = 0,
                         rel_tol: float = TOLERANCES["ratio_relative"],
                         slack: float = TOLERANCES["alpha_slack"]) -> GaussianCheck:
    return gaussian_condition_set_check(ic, generate_kuser_regime(ic.K, shift), rel_tol, slack)


def regime_gains(free: Sequence[float], powers: Optional[Sequence[float]] = None) -> GaussianIC:
    """
    The gain matrix meeting every chain of the natural-cycle regime with free
    parameters f_r = a_{r, r-1} (f_1 = a_{1K}): a_ji is the product of f along
    the cycle from i + 1 to j.
    """
    f = [float(v) for v in free]
    K = len(f)
    if K < 2:
        raise ArgumentError("at least two free parameters required")
    gains = np.eye(K)
    for i in range(K):
        value = 1.0
        j = i
        for _ in range(K - 1):
            j = (j + 1) % K
            value *= f[j]
            gains[j, i] = value
    return GaussianIC(gains, np.ones(K) if powers is None else powers)


def _require_three_users(ic: GaussianIC) -> None:
    if ic.K != 3:
        raise ArgumentError(f"3-user check applied to a {ic.K}-user channel")


def _close(x: float, y: float, rel_tol: float) -> bool:
    return math.isclose(x, y, rel_tol=rel_tol, abs_tol=1e-15)


@dataclass(frozen=True)
class ThreeUserCheck:
    passed: bool
    witness: Tuple[float, float, float]
    alphas: Optional[Tuple[float, float, float]]
    failures: Tuple[str, ...]

    def to_json(self) -> Dict[str, Any]:
        return {"pass": self.passed, "witness": {"a13": self.witness[0], "a21": self.witness[1], "a32": self.witness[2]},
                "alphas": list(self.alphas) if self.alphas else None, "failures": list(self.failures)}


def gaussian_3user_check(ic: GaussianIC,
                         rel_tol: float = TOLERANCES["ratio_relative"],
                         slack: float = TOLERANCES["alpha_slack"]) -> ThreeUserCheck:
    """Free parameters a13, a21, a32 of magnitude >= 1; a12 = a13 a32, a31 = a21 a32, a23 = a21 a13."""
    _require_three_users(ic)
    g = ic.gain
    a13, a21, a32 = g(1, 3), g(2, 1), g(3, 2)
    failures = []
    for name, value in (("a13", a13), ("a21", a21), ("a32", a32)):
        if abs(value) * (1.0 + slack) < 1.0:
            failures.append(f"|{name}| = {abs(value):g} < 1")
    for name, actual, expected in (("a12 = a13*a32", g(1, 2), a13 * a32),
                                   ("a31 = a21*a32", g(3, 1), a21 * a32),
                                   ("a23 = a21*a13", g(2, 3), a21 * a13)):
        if not _close(actual, expected, rel_tol):
            failures.append(f"{name} violated: {actual:g} != {expected:g}")
    alphas = None
    if not failures:
        alphas = (1.0 / a13, 1.0 / a21, 1.0 / a32)
    return ThreeUserCheck(not failures, (a13, a21, a32), alphas, tuple(failures))


VARIANT46_NOTE = ("|alpha| = 1 is checked as printed; it coincides with requiring both "
                  "alpha (second condition) and 1/alpha (third condition) to have magnitude <= 1, "
                  "so a reading as '|alpha| <= 1' would be weaker than the conditions imply")


def _chain(values: Sequence[Tuple[str, float, float]], rel_tol: float) -> Tuple[Optional[float], Optional[str]]:
    """Common value of numerator/denominator pairs, or the reason there is none."""
    ratios = []
    for name, num, den in values:
        if den == 0.0:
            if num == 0.0:
                continue
            return None, f"undefined ratio {name}"
        ratios.append(num / den)
    if not ratios:
        return None, "no constrained ratio"
    if not all(_close(r, ratios[0], rel_tol) for r in ratios):
        return None, "ratios differ: " + ", ".join(f"{n}={num / den:g}" for n, num, den in values if den != 0.0)
    return float(np.mean(ratios)), None


def gaussian_variant46_check(ic: GaussianIC,
                             rel_tol: float = TOLERANCES["ratio_relative"],
                             slack: float = TOLERANCES["alpha_slack"]) -> GaussianCheck:
    """
    1 <= |a23|; a21 = 1/a12 = a23/a13 = alpha with |alpha| = 1;
    a21/a31 = 1/a32 = beta with |beta| <= 1.
    """
    _require_three_users(ic)
    g = ic.gain
    failures = []
    if abs(g(2, 3)) * (1.0 + slack) < 1.0:
        failures.append({"constraint": "1 <= |a23|", "reason": f"|a23| = {abs(g(2, 3)):g}"})
    alpha, why = _chain((("a21", g(2, 1), 1.0), ("1/a12", 1.0, g(1, 2)), ("a23/a13", g(2, 3), g(1, 3))), rel_tol)
    if alpha is None:
        failures.append({"constraint": "a21 = 1/a12 = a23/a13", "reason": why})
    elif abs(abs(alpha) - 1.0) > rel_tol:
        failures.append({"constraint": "|alpha| = 1", "reason": f"|alpha| = {abs(alpha):g}"})
    beta, why = _chain((("a21/a31", g(2, 1), g(3, 1)), ("1/a32", 1.0, g(3, 2))), rel_tol)
    if beta is None:
        failures.append({"constraint": "a21/a31 = 1/a32", "reason": why})
    elif abs(beta) > 1.0 + slack:
        failures.append({"constraint": "|beta| <= 1", "reason": f"|beta| = {abs(beta):g}"})
    logger.warning(VARIANT46_NOTE)
    alphas = (alpha, beta) if alpha is not None and beta is not None else None
    return GaussianCheck(not failures, alphas, tuple(failures), "3user-variant-46", (VARIANT46_NOTE,))


def condition_set_to_json(cs: ConditionSet) -> Dict[str, Any]:
    return cs.to_json()


def condition_set_from_json(data: Dict[str, Any]) -> ConditionSet:
    return ConditionSet.from_json(data)
