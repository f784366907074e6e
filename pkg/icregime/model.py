"""
Channel and distribution types shared by every other module.

All types are frozen dataclasses holding read-only numpy arrays. Constructors run
the same diagnostics as `validate` and raise ModelValidationError carrying that
report, so an instance in hand always validates cleanly.
"""
import json
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np

from .config import SIZE_CAPS, TOLERANCES
from .errors import ArgumentError, ModelValidationError, SchemaError, SizeCapError

CHANNEL_TYPES = ("gaussian_ic", "two_output_system", "discrete_two_output", "broadcast")


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _raise_if(report: List[str]) -> None:
    if report:
        raise ModelValidationError(report)


# ---------------- Gaussian types ----------------

def diagnose_gaussian_ic(gains: Any, powers: Any) -> List[str]:
    report = []
    try:
        g = np.asarray(gains, dtype=float)
        p = np.asarray(powers, dtype=float)
    except (TypeError, ValueError):
        return ["gains/powers: not numeric arrays"]
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        return [f"gains: expected a square matrix, got shape {g.shape}"]
    k = g.shape[0]
    if k < 2:
        report.append(f"K: user count {k} < 2")
    if not np.all(np.isfinite(g)):
        report.append("gains: non-finite entry")
    else:
        bad = [i + 1 for i in range(k) if g[i, i] != 1.0]
        if bad:
            report.append(f"gains: diagonal not 1 at users {bad}")
    if p.shape != (k,):
        report.append(f"powers: expected length {k}, got shape {p.shape}")
    elif not np.all(np.isfinite(p)):
        report.append("powers: non-finite entry")
    elif np.any(p <= 0):
        report.append("powers: entries must be strictly positive")
    return report


@dataclass(frozen=True)
class GaussianIC:
    """Standard-form Gaussian interference channel: unit direct gains, unit noise variance."""
    gains: np.ndarray
    powers: np.ndarray

    def __post_init__(self):
        _raise_if(diagnose_gaussian_ic(self.gains, self.powers))
        object.__setattr__(self, "gains", _frozen(self.gains))
        object.__setattr__(self, "powers", _frozen(self.powers))

    @property
    def K(self) -> int:
        return self.gains.shape[0]

    def gain(self, receiver: int, transmitter: int) -> float:
        """a_{ji} with 1-based receiver j and transmitter i."""
        return float(self.gains[receiver - 1, transmitter - 1])

    def relabel(self, mapping: Dict[int, int]) -> "GaussianIC":
        """Channel in which old user i is called mapping[i] (1-based)."""
        perm = np.empty(self.K, dtype=int)
        for old, new in mapping.items():
            perm[new - 1] = old - 1
        return GaussianIC(self.gains[np.ix_(perm, perm)], self.powers[perm])


def to_standard_form(gains: Any, noise_variances: Any, powers: Any) -> GaussianIC:
    """
    Rescale Y_j = sum_i h_ji X_i + N_j, Var(N_j) = s_j, E[X_i^2] <= P_i into standard form.

    Receiver j is divided by sqrt(s_j) and transmitter i absorbs h_ii / sqrt(s_i),
    giving a_ji = h_ji sqrt(s_i) / (h_ii sqrt(s_j)) and P_i' = h_ii^2 P_i / s_i.
    """
    h = np.asarray(gains, dtype=float)
    s = np.asarray(noise_variances, dtype=float)
    p = np.asarray(powers, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1] or s.shape != (h.shape[0],) or p.shape != (h.shape[0],):
        raise ModelValidationError([f"shapes: gains {h.shape}, noise {s.shape}, powers {p.shape} do not agree"])
    if np.any(s <= 0) or not np.all(np.isfinite(s)):
        raise ModelValidationError(["noise_variances: entries must be positive and finite"])
    direct = np.diag(h)
    if np.any(direct == 0):
        raise ModelValidationError(["gains: zero direct gain cannot be normalized"])
    sigma = np.sqrt(s)
    a = h * sigma[np.newaxis, :] / (direct[np.newaxis, :] * sigma[:, np.newaxis])
    np.fill_diagonal(a, 1.0)
    return GaussianIC(a, direct ** 2 * p / s)


def diagnose_two_output_system(mu1: Any, mu2: Any, a: Any, b: Any) -> List[str]:
    report = []
    if not isinstance(mu1, (int, np.integer)) or mu1 < 1:
        report.append(f"mu1: must be an integer >= 1, got {mu1!r}")
    if not isinstance(mu2, (int, np.integer)) or mu2 < 0:
        report.append(f"mu2: must be an integer >= 0, got {mu2!r}")
    if report:
        return report
    for name, vec in (("a", a), ("b", b)):
        v = np.asarray(vec, dtype=float)
        if v.shape != (mu1 + mu2,):
            report.append(f"{name}: expected length {mu1 + mu2}, got shape {v.shape}")
        elif not np.all(np.isfinite(v)):
            report.append(f"{name}: non-finite coefficient")
    return report


@dataclass(frozen=True)
class TwoOutputSystem:
    """Y1 = a.X + Z1, Y2 = b.X + Z2; the first mu1 inputs are jointly distributed, the rest condition."""
    mu1: int
    mu2: int
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        _raise_if(diagnose_two_output_system(self.mu1, self.mu2, self.a, self.b))
        object.__setattr__(self, "a", _frozen(self.a))
        object.__setattr__(self, "b", _frozen(self.b))


# ---------------- Discrete types ----------------

def diagnose_pmf(probs: Any, tol: float = TOLERANCES["pmf_internal"]) -> List[str]:
    try:
        p = np.asarray(probs, dtype=float)
    except (TypeError, ValueError):
        return ["probs: not numeric"]
    if p.ndim != 1 or p.size == 0:
        return [f"probs: expected a nonempty vector, got shape {p.shape}"]
    report = []
    if not np.all(np.isfinite(p)):
        return ["probs: non-finite entry"]
    if np.any(p < 0) or np.any(p > 1):
        report.append("probs: entries outside [0, 1]")
    total = float(p.sum())
    if abs(total - 1.0) > tol:
        report.append(f"probs: sum {total:g} != 1")
    return report


@dataclass(frozen=True)
class DiscretePMF:
    probs: np.ndarray

    def __post_init__(self):
        _raise_if(diagnose_pmf(self.probs))
        object.__setattr__(self, "probs", _frozen(self.probs))

    @classmethod
    def uniform(cls, size: int) -> "DiscretePMF":
        return cls(np.full(size, 1.0 / size))

    def __len__(self) -> int:
        return self.probs.size


def _diagnose_stochastic(name: str, tensor: np.ndarray, out_axes: int, tol: float) -> List[str]:
    if not np.all(np.isfinite(tensor)):
        return [f"{name}: non-finite entry"]
    report = []
    if np.any(tensor < 0):
        report.append(f"{name}: negative probability")
    sums = tensor.reshape(-1, int(np.prod(tensor.shape[tensor.ndim - out_axes:]))).sum(axis=1)
    worst = float(np.max(np.abs(sums - 1.0))) if sums.size else 0.0
    if worst > tol:
        report.append(f"{name}: conditional law does not sum to 1 (max deviation {worst:g})")
    return report


def diagnose_two_output_channel(transitions: Any, mu1: Any, letters: int = 1,
                                tol: float = TOLERANCES["pmf_internal"]) -> List[str]:
    try:
        t = np.asarray(transitions, dtype=float)
    except (TypeError, ValueError):
        return ["transitions: not numeric"]
    if t.ndim < 3:
        return [f"transitions: expected at least one input axis plus (y1, y2), got shape {t.shape}"]
    n_inputs = t.ndim - 2
    report = []
    if not isinstance(mu1, (int, np.integer)) or not 1 <= mu1 <= n_inputs:
        report.append(f"mu1: must be an integer in [1, {n_inputs}], got {mu1!r}")
    cap = SIZE_CAPS["max_alphabet"] ** letters
    too_big = [s for s in t.shape if s > cap or s < 1]
    if too_big:
        report.append(f"alphabets: sizes {too_big} outside [1, {cap}]")
    tuples = int(np.prod(t.shape[:n_inputs]))
    if tuples > SIZE_CAPS["max_input_tuples"]:
        report.append(f"alphabets: {tuples} input tuples exceed cap {SIZE_CAPS['max_input_tuples']}")
    return report + _diagnose_stochastic("transitions", t, 2, tol)


@dataclass(frozen=True)
class DiscreteTwoOutputChannel:
    """
    P(y1, y2 | x_1..x_n) stored as a tensor of shape (|X_1|, ..., |X_n|, |Y1|, |Y2|).

    Inputs 1..mu1 form the jointly distributed block, the remaining n - mu1 inputs
    are the independent conditioning block. `letters` > 1 marks a memoryless
    extension, whose per-variable caps scale accordingly.
    """
    transitions: np.ndarray
    mu1: int
    letters: int = 1

    def __post_init__(self):
        _raise_if(diagnose_two_output_channel(self.transitions, self.mu1, self.letters))
        object.__setattr__(self, "transitions", _frozen(self.transitions))

    @property
    def input_alphabets(self) -> Tuple[int, ...]:
        return tuple(self.transitions.shape[:-2])

    @property
    def n_inputs(self) -> int:
        return self.transitions.ndim - 2

    @property
    def mu2(self) -> int:
        return self.n_inputs - self.mu1

    @property
    def y1_size(self) -> int:
        return self.transitions.shape[-2]

    @property
    def y2_size(self) -> int:
        return self.transitions.shape[-1]

    def output_marginals(self) -> Tuple[np.ndarray, np.ndarray]:
        """(P(y1|x), P(y2|x)) with the input axes kept."""
        return self.transitions.sum(axis=-1), self.transitions.sum(axis=-2)

    def swap_outputs(self) -> "DiscreteTwoOutputChannel":
        return DiscreteTwoOutputChannel(np.swapaxes(self.transitions, -1, -2), self.mu1, self.letters)

    def reorder_inputs(self, order: Sequence[int], mu1: int) -> "DiscreteTwoOutputChannel":
        """Permute the input axes (0-based `order`) and declare a new block split."""
        n = self.n_inputs
        axes = list(order) + [n, n + 1]
        return DiscreteTwoOutputChannel(np.transpose(self.transitions, axes), mu1, self.letters)

    def n_letter_extension(self, letters: int = 2) -> "DiscreteTwoOutputChannel":
        """Memoryless product channel; super-symbols are encoded letter-1-major."""
        if letters < 1:
            raise ArgumentError("letters must be >= 1")
        tuples = int(np.prod(self.input_alphabets)) ** letters
        if tuples > SIZE_CAPS["max_input_tuples"]:
            raise SizeCapError(f"{letters}-letter extension has {tuples} input tuples, cap {SIZE_CAPS['max_input_tuples']}")
        tensor = self.transitions
        for _ in range(letters - 1):
            tensor = _letter_product(tensor, self.transitions)
        return DiscreteTwoOutputChannel(tensor, self.mu1, self.letters * letters)


def _letter_product(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    n = first.ndim - 2
    outer = np.multiply.outer(first, second)
    offset = first.ndim
    axes = []
    for i in range(n):
        axes += [i, offset + i]
    axes += [n, offset + n, n + 1, offset + n + 1]
    joined = np.transpose(outer, axes)
    shape = [first.shape[i] * second.shape[i] for i in range(n + 2)]
    return joined.reshape(shape)


def diagnose_broadcast(marginals: Any, tol: float = TOLERANCES["pmf_internal"]) -> List[str]:
    report = []
    if not marginals:
        return ["marginals: at least one receiver required"]
    x_size = None
    for k, m in enumerate(marginals, start=1):
        try:
            w = np.asarray(m, dtype=float)
        except (TypeError, ValueError):
            report.append(f"marginals[{k}]: not numeric")
            continue
        if w.ndim != 2:
            report.append(f"marginals[{k}]: expected a matrix, got shape {w.shape}")
            continue
        if x_size is None:
            x_size = w.shape[0]
        elif w.shape[0] != x_size:
            report.append(f"marginals[{k}]: {w.shape[0]} input rows, expected {x_size}")
        report += _diagnose_stochastic(f"marginals[{k}]", w, 1, tol)
    return report


@dataclass(frozen=True)
class DiscreteBroadcastChannel:
    marginals: Tuple[np.ndarray, ...]

    def __post_init__(self):
        _raise_if(diagnose_broadcast(self.marginals))
        object.__setattr__(self, "marginals", tuple(_frozen(m) for m in self.marginals))

    @property
    def x_size(self) -> int:
        return self.marginals[0].shape[0]

    @property
    def K(self) -> int:
        return len(self.marginals)


def diagnose_rates(rates: Any) -> List[str]:
    r = np.asarray(rates, dtype=float)
    if r.ndim != 1:
        return [f"rates: expected a vector, got shape {r.shape}"]
    if not np.all(np.isfinite(r)):
        return ["rates: non-finite entry"]
    if np.any(r < 0):
        return ["rates: negative entry"]
    return []


@dataclass(frozen=True)
class RateVector:
    rates: np.ndarray

    def __post_init__(self):
        _raise_if(diagnose_rates(self.rates))
        object.__setattr__(self, "rates", _frozen(self.rates))

    def __len__(self) -> int:
        return self.rates.size


# ---------------- Standard channels ----------------

def bsc(p: float) -> np.ndarray:
    return np.array([[1 - p, p], [p, 1 - p]])


def bec(eps: float) -> np.ndarray:
    """Outputs ordered (0, erasure, 1)."""
    return np.array([[1 - eps, eps, 0.0], [0.0, eps, 1 - eps]])


def noiseless(size: int) -> np.ndarray:
    return np.eye(size)


# ---------------- Validation ----------------

Model = Union[GaussianIC, TwoOutputSystem, DiscretePMF, DiscreteTwoOutputChannel,
              DiscreteBroadcastChannel, RateVector, Dict[str, Any]]


def validate(model: Model) -> List[str]:
    """
    List of violated invariants, empty on success. Side-effect free.

    Accepts a constructed model or a raw channel-spec dict (the JSON schema), so
    diagnostics are available for inputs a constructor would reject.
    """
    if isinstance(model, dict):
        return _diagnose_spec(model, TOLERANCES["pmf_internal"])
    if isinstance(model, GaussianIC):
        return diagnose_gaussian_ic(model.gains, model.powers)
    if isinstance(model, TwoOutputSystem):
        return diagnose_two_output_system(model.mu1, model.mu2, model.a, model.b)
    if isinstance(model, DiscretePMF):
        return diagnose_pmf(model.probs)
    if isinstance(model, DiscreteTwoOutputChannel):
        return diagnose_two_output_channel(model.transitions, model.mu1, model.letters)
    if isinstance(model, DiscreteBroadcastChannel):
        return diagnose_broadcast(model.marginals)
    if isinstance(model, RateVector):
        return diagnose_rates(model.rates)
    return [f"model: unsupported type {type(model).__name__}"]


# ---------------- JSON channel specs ----------------

def _require(spec: Dict[str, Any], key: str) -> Any:
    if key not in spec:
        raise SchemaError(key, "missing required field")
    return spec[key]


def _discrete_tensor(spec: Dict[str, Any]) -> np.ndarray:
    try:
        alphabets = [int(a) for a in _require(spec, "alphabets")]
        y1, y2 = int(_require(spec, "y1_size")), int(_require(spec, "y2_size"))
    except (TypeError, ValueError):
        raise SchemaError("alphabets", "sizes must be integers")
    try:
        flat = np.asarray(_require(spec, "transitions"), dtype=float)
    except (TypeError, ValueError):
        raise SchemaError("transitions", "not a numeric nested array")
    expected = tuple(alphabets) + (y1 * y2,)
    if flat.shape != expected:
        raise SchemaError("transitions", f"expected shape {expected}, got {flat.shape}")
    return flat.reshape(tuple(alphabets) + (y1, y2))


def _renormalize(tensor: np.ndarray, out_axes: int) -> np.ndarray:
    axes = tuple(range(tensor.ndim - out_axes, tensor.ndim))
    return tensor / tensor.sum(axis=axes, keepdims=True)


def _diagnose_spec(spec: Dict[str, Any], tol: float) -> List[str]:
    kind = spec.get("type")
    try:
        if kind == "gaussian_ic":
            return diagnose_gaussian_ic(_require(spec, "gains"), _require(spec, "powers"))
        if kind == "two_output_system":
            return diagnose_two_output_system(_require(spec, "mu1"), _require(spec, "mu2"),
                                              _require(spec, "a"), _require(spec, "b"))
        if kind == "discrete_two_output":
            return diagnose_two_output_channel(_discrete_tensor(spec), spec.get("mu1", 1), tol=tol)
        if kind == "broadcast":
            return diagnose_broadcast(_require(spec, "marginals"), tol=tol)
    except SchemaError as e:
        return [str(e)]
    return [f"type: expected one of {list(CHANNEL_TYPES)}, got {kind!r}"]


def load_channel_spec(source: Union[str, Dict[str, Any]]):
    """
    Build a model object from a JSON channel spec (path or parsed dict).

    File input is accepted at the looser file tolerance and renormalized, so the
    constructed object meets the strict internal tolerance.
    """
    if isinstance(source, str):
        try:
            with open(source, "r", encoding="utf-8") as f:
                spec = json.load(f)
        except json.JSONDecodeError as e:
            raise SchemaError("file", f"invalid JSON: {e}")
    else:
        spec = source
    if not isinstance(spec, dict):
        raise SchemaError("type", "top level must be an object")
    report = _diagnose_spec(spec, TOLERANCES["pmf_file"])
    if report:
        field_name = report[0].split(":", 1)[0]
        raise SchemaError(field_name, "; ".join(report))
    kind = spec["type"]
    if kind == "gaussian_ic":
        return GaussianIC(spec["gains"], spec["powers"])
    if kind == "two_output_system":
        return TwoOutputSystem(int(spec["mu1"]), int(spec["mu2"]), spec["a"], spec["b"])
    if kind == "discrete_two_output":
        return DiscreteTwoOutputChannel(_renormalize(_discrete_tensor(spec), 2), int(spec.get("mu1", 1)))
    return DiscreteBroadcastChannel(tuple(_renormalize(np.asarray(m, dtype=float), 1) for m in spec["marginals"]))


def channel_to_spec(model) -> Dict[str, Any]:
    """Inverse of load_channel_spec."""
    if isinstance(model, GaussianIC):
        return {"type": "gaussian_ic", "gains": model.gains.tolist(), "powers": model.powers.tolist()}
    if isinstance(model, TwoOutputSystem):
        return {"type": "two_output_system", "mu1": int(model.mu1), "mu2": int(model.mu2),
                "a": model.a.tolist(), "b": model.b.tolist()}
    if isinstance(model, DiscreteTwoOutputChannel):
        flat = model.transitions.reshape(model.input_alphabets + (model.y1_size * model.y2_size,))
        return {"type": "discrete_two_output", "alphabets": list(model.input_alphabets),
                "mu1": int(model.mu1), "y1_size": model.y1_size, "y2_size": model.y2_size,
                "transitions": flat.tolist()}
    if isinstance(model, DiscreteBroadcastChannel):
        return {"type": "broadcast", "marginals": [m.tolist() for m in model.marginals]}
    raise TypeError(f"no channel spec for {type(model).__name__}")
