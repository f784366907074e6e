"""
Entropy and mutual-information kernels in bits.

Every mutual information is computed from entropies,
I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C),
so one entropy kernel carries all the numerics. Results within the clamp
tolerance below zero are returned as 0.
"""
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

from .config import TOLERANCES
from .errors import ArgumentError, ModelValidationError, NumericError
from .model import DiscretePMF, GaussianIC

LN2 = math.log(2.0)


def _plogp(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)


def _clamp(value, tol: float = TOLERANCES["mi_clamp"]):
    arr = np.asarray(value, dtype=float)
    if np.any(arr < -tol):
        raise NumericError(f"mutual information {float(arr.min()):.3e} below zero beyond round-off")
    clamped = np.maximum(arr, 0.0)
    return float(clamped) if clamped.ndim == 0 else clamped


def entropy(p: Union[DiscretePMF, Sequence[float], np.ndarray]) -> float:
    """H(p) in bits with 0 log 0 = 0."""
    probs = p.probs if isinstance(p, DiscretePMF) else np.asarray(p, dtype=float)
    return float(-np.sum(_plogp(probs.ravel())))


def binary_entropy(p: float) -> float:
    return entropy([p, 1.0 - p])


@dataclass(frozen=True)
class JointPMF:
    """Joint law over named variables; axis k of `probs` belongs to `axes[k]`."""
    axes: Tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        axes = tuple(self.axes)
        report = []
        if len(axes) != probs.ndim:
            report.append(f"axes: {len(axes)} labels for a {probs.ndim}-axis tensor")
        if len(set(axes)) != len(axes):
            report.append("axes: duplicate labels")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            report.append("probs: negative or non-finite entry")
        elif abs(float(probs.sum()) - 1.0) > TOLERANCES["pmf_internal"]:
            report.append(f"probs: total mass {float(probs.sum()):g} != 1")
        if report:
            raise ModelValidationError(report)
        probs.setflags(write=False)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "probs", probs)

    @property
    def sizes(self) -> Tuple[int, ...]:
        return self.probs.shape

    def _index(self, names: Iterable[str]) -> Tuple[int, ...]:
        idx = []
        for name in names:
            if name not in self.axes:
                raise KeyError(f"unknown axis '{name}'")
            idx.append(self.axes.index(name))
        return tuple(sorted(idx))

    def marginal(self, names: Iterable[str]) -> "JointPMF":
        keep = self._index(names)
        drop = tuple(i for i in range(self.probs.ndim) if i not in keep)
        return JointPMF(tuple(self.axes[i] for i in keep), self.probs.sum(axis=drop))

    def entropy_of(self, names: Iterable[str]) -> float:
        names = tuple(names)
        if not names:
            return 0.0
        return entropy(self.marginal(names).probs)


def conditional_mutual_information(j: JointPMF, group_a: Iterable[str], group_b: Iterable[str],
                                   group_c: Iterable[str] = ()) -> float:
    """I(A;B|C) in bits; axes outside A, B and C are marginalized out."""
    a, b, c = set(group_a), set(group_b), set(group_c)
    if (a & b) or (a & c) or (b & c):
        raise ArgumentError("axis groups not disjoint")
    value = (j.entropy_of(a | c) + j.entropy_of(b | c)
             - j.entropy_of(a | b | c) - j.entropy_of(c))
    return _clamp(value)


def _batch_entropy(p: np.ndarray, keep: Tuple[int, ...]) -> np.ndarray:
    """Entropy of the marginal on axes `keep` (1-based, axis 0 is the batch)."""
    drop = tuple(i for i in range(1, p.ndim) if i not in keep)
    marg = p.sum(axis=drop) if drop else p
    return -_plogp(marg.reshape(marg.shape[0], -1)).sum(axis=1)


def batch_conditional_mi(joint: np.ndarray) -> np.ndarray:
    """
    I(V;Y|C) for a batch of joints with axes (batch, V, C, Y).

    Same decomposition and clamping as conditional_mutual_information.
    """
    if joint.ndim != 4:
        raise ArgumentError(f"expected axes (batch, V, C, Y), got {joint.ndim} axes")
    value = (_batch_entropy(joint, (1, 2)) + _batch_entropy(joint, (2, 3))
             - _batch_entropy(joint, (1, 2, 3)) - _batch_entropy(joint, (2,)))
    return _clamp(value)


def mutual_information_channel(px: np.ndarray, w: np.ndarray) -> np.ndarray:
    """I(X;Y) for input law(s) px (shape (|X|,) or (B, |X|)) through stochastic matrix w."""
    px = np.asarray(px, dtype=float)
    single = px.ndim == 1
    batch = px[np.newaxis, :] if single else px
    row_entropy = -_plogp(w).sum(axis=1)
    h_y = -_plogp(batch @ w).sum(axis=1)
    value = _clamp(h_y - batch @ row_entropy)
    return float(value[0]) if single else value


def gaussian_mac_mi(ic: GaussianIC, receiver: int, subset: Iterable[int]) -> float:
    """
    0.5 log2(1 + sum_{i in S} a_ji^2 P_i): I(X_S; Y_j | X_{S^c}) for independent
    full-power Gaussian inputs. Users are 1-based.
    """
    users = sorted(set(subset))
    if not users:
        raise ArgumentError("empty subset")
    if not 1 <= receiver <= ic.K or users[0] < 1 or users[-1] > ic.K:
        raise ArgumentError(f"receiver/subset outside 1..{ic.K}")
    cols = np.array(users) - 1
    snr = float(np.sum(ic.gains[receiver - 1, cols] ** 2 * ic.powers[cols]))
    return 0.5 * math.log1p(snr) / LN2
