"""
Brute-force verification of the degradedness lemmas on small discrete channels,
plus the more-capable broadcast results.

"For all input laws" is discretized two ways: a rational grid over the product
family, or seeded Dirichlet samples over the full joint simplex with the
auxiliaries D and U. A negative gap disproves an inequality; a nonnegative one is
evidence only. Every evaluation reduces by (gap, enumeration index), so any
worker count returns the same minimum and argmin.
"""
import itertools
import logging
import math
import time
from collections import deque
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Deque, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog
from tqdm import tqdm

from .config import ITERATION, SAMPLING, TOLERANCES, default_workers, progress_enabled
from .errors import ArgumentError, ConvergenceError, GridOverflowError, ModelValidationError, NumericError
from .icregime_types import GridSpec, SampleSpec, VerificationReport
from .measures import LN2, batch_conditional_mi, mutual_information_channel
from .model import DiscreteBroadcastChannel, DiscretePMF, DiscreteTwoOutputChannel
from .report_logger import channel_digest

logger = logging.getLogger("icregime.verifier")


# ---------------- Channel construction ----------------

def make_degraded_channel(base: np.ndarray, garble: np.ndarray, mu1: int = 1) -> DiscreteTwoOutputChannel:
    """P(y1, y2 | x) = P(y2 | x) G(y1 | y2); base has shape (*alphabets, |Y2|), garble (|Y2|, |Y1|)."""
    base = np.asarray(base, dtype=float)
    garble = np.asarray(garble, dtype=float)
    report = []
    if garble.ndim != 2 or garble.shape[0] != base.shape[-1]:
        report.append(f"garble: expected {base.shape[-1]} rows, got shape {garble.shape}")
    for name, arr in (("base", base), ("garble", garble)):
        if np.any(arr < 0) or not np.allclose(arr.sum(axis=-1), 1.0, rtol=0.0, atol=TOLERANCES["pmf_internal"]):
            report.append(f"{name}: not row-stochastic")
    if report:
        raise ModelValidationError(report)
    transitions = np.einsum("...b,ba->...ab", base, garble)
    return DiscreteTwoOutputChannel(transitions, mu1)


def random_degraded_channel(rng: np.random.Generator, alphabets: Sequence[int], mu1: int,
                            y2_size: int, y1_size: int) -> DiscreteTwoOutputChannel:
    """Random base channel and random garbling, both drawn row-wise from a flat Dirichlet."""
    base = rng.dirichlet(np.ones(y2_size), size=tuple(alphabets))
    garble = rng.dirichlet(np.ones(y1_size), size=y2_size)
    return make_degraded_channel(base, garble, mu1)


# ---------------- Gap kernels ----------------

def _partition_gap(ch: DiscreteTwoOutputChannel, laws: np.ndarray, lhs: Sequence[int],
                   rest: Sequence[int]) -> np.ndarray:
    """
    I(X_lhs; Y2 | D, X_rest) - I(X_lhs; Y1 | D, X_rest) for laws of shape (B, D, *alphabets).
    Input axes are 0-based.
    """
    alphabets = ch.input_alphabets
    B, D = laws.shape[:2]
    lhs_size = int(np.prod([alphabets[i] for i in lhs])) if lhs else 1
    rest_size = D * (int(np.prod([alphabets[i] for i in rest])) if rest else 1)
    order = [0] + [2 + i for i in lhs] + [1] + [2 + i for i in rest]
    values = []
    for w in reversed(ch.output_marginals()):
        joint = laws[..., np.newaxis] * w[np.newaxis, np.newaxis]
        joint = joint.transpose(order + [joint.ndim - 1]).reshape(B, lhs_size, rest_size, -1)
        values.append(batch_conditional_mi(joint))
    return values[0] - values[1]


def _auxiliary_gap(ch: DiscreteTwoOutputChannel, laws: np.ndarray) -> np.ndarray:
    """I(U; Y2 | D, X_cond) - I(U; Y1 | D, X_cond) for laws of shape (B, D, U, *alphabets)."""
    n, mu1 = ch.n_inputs, ch.mu1
    B, D, U = laws.shape[:3]
    cond_size = int(np.prod(ch.input_alphabets[mu1:])) if n > mu1 else 1
    joint_axes = tuple(3 + i for i in range(mu1))
    values = []
    for w in reversed(ch.output_marginals()):
        joint = (laws[..., np.newaxis] * w[np.newaxis, np.newaxis, np.newaxis]).sum(axis=joint_axes)
        joint = np.moveaxis(joint, 2, 1).reshape(B, U, D * cond_size, -1)
        values.append(batch_conditional_mi(joint))
    return values[0] - values[1]


def _as_joint(ch: DiscreteTwoOutputChannel, law: np.ndarray, extra_axes: int) -> np.ndarray:
    law = np.asarray(law, dtype=float)
    if law.ndim == ch.n_inputs + extra_axes - 1:
        law = law[np.newaxis]
    if law.shape[extra_axes:] != ch.input_alphabets or law.ndim != ch.n_inputs + extra_axes:
        raise ArgumentError(f"law of shape {law.shape} does not match inputs {ch.input_alphabets}")
    if np.any(law < 0) or abs(float(law.sum()) - 1.0) > TOLERANCES["pmf_internal"]:
        raise ArgumentError("law is not a probability mass function")
    return law


def lemma1_gap_at(ch: DiscreteTwoOutputChannel, law: np.ndarray) -> float:
    """Gap of one law of shape (*alphabets) or (D, *alphabets)."""
    joint = _as_joint(ch, law, 1)
    lhs, rest = range(ch.mu1), range(ch.mu1, ch.n_inputs)
    return float(_partition_gap(ch, joint[np.newaxis], list(lhs), list(rest))[0])


def corollary1_gap_at(ch: DiscreteTwoOutputChannel, moved: Iterable[int], law: np.ndarray) -> float:
    lhs, rest = _corollary_partition(ch, moved)
    return float(_partition_gap(ch, _as_joint(ch, law, 1)[np.newaxis], lhs, rest)[0])


def lemma3_gap_at(ch: DiscreteTwoOutputChannel, law2: np.ndarray) -> float:
    """Gap on the two-letter extension for a law over (D, *squared alphabets)."""
    return lemma1_gap_at(ch.n_letter_extension(2), law2)


def lemma4_gap_at(ch: DiscreteTwoOutputChannel, law: np.ndarray) -> float:
    """U-level gap of one law of shape (U, *alphabets) or (D, U, *alphabets)."""
    law = np.asarray(law, dtype=float)
    if law.ndim == ch.n_inputs + 1:
        law = law[np.newaxis]
    _as_joint(ch, law.reshape((-1,) + ch.input_alphabets), 1)
    return float(_auxiliary_gap(ch, law[np.newaxis])[0])


def product_law(joint: np.ndarray, conditioning: Sequence[np.ndarray] = ()) -> np.ndarray:
    """P(x_1..x_mu1) times independent marginals of the conditioning inputs."""
    law = np.asarray(joint, dtype=float)
    for marginal in conditioning:
        law = np.multiply.outer(law, np.asarray(marginal, dtype=float))
    return law


def letter_product(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """Independent pair of single-letter laws (*alphabets) as a law over the squared alphabets."""
    n = first.ndim
    outer = np.multiply.outer(first, second)
    axes = [a for i in range(n) for a in (i, n + i)]
    return outer.transpose(axes).reshape([first.shape[i] * second.shape[i] for i in range(n)])


def _corollary_partition(ch: DiscreteTwoOutputChannel, moved: Iterable[int]) -> Tuple[List[int], List[int]]:
    moved = sorted(set(int(i) for i in moved))
    bad = [i for i in moved if not 1 <= i <= ch.mu1]
    if bad:
        raise ArgumentError(f"L may only contain joint-block inputs 1..{ch.mu1}, got {bad}")
    lhs = [i for i in range(ch.mu1) if i + 1 not in moved]
    rest = [i - 1 for i in moved] + list(range(ch.mu1, ch.n_inputs))
    return lhs, rest


# ---------------- Reduction engine ----------------

def _chunk_rows(per_law: int) -> int:
    return max(1, min(SAMPLING["chunk_size"], SAMPLING["max_chunk_elements"] // max(1, per_law)))


@dataclass
class _Best:
    gap: float = math.inf
    index: int = -1
    law: Optional[np.ndarray] = None
    n: int = 0

    def offer(self, gap: float, index: int, law: np.ndarray, n: int) -> None:
        self.n += n
        if (gap, index) < (self.gap, self.index) or self.index < 0:
            self.gap, self.index, self.law = gap, index, law


def _reduce(chunks: Iterable[Tuple[int, np.ndarray]], evaluate: Callable[[np.ndarray], np.ndarray],
            total: int, desc: str, workers: Optional[int] = None,
            progress: Optional[bool] = None) -> _Best:
    """Minimum gap over (offset, laws) chunks, ties broken by the lower enumeration index."""
    workers = default_workers() if workers is None else max(1, int(workers))
    progress = progress_enabled() if progress is None else progress

    def run(item):
        offset, laws = item
        gaps = evaluate(laws)
        k = int(np.argmin(gaps))
        return float(gaps[k]), offset + k, laws[k].copy(), len(laws)

    best = _Best()
    with tqdm(total=total, desc=desc, disable=not progress) as bar:
        if workers == 1:
            for result in map(run, chunks):
                best.offer(*result)
                bar.update(result[3])
        else:
            # at most 2 * workers chunks in flight, drained in submission order
            with ThreadPoolExecutor(max_workers=workers) as pool:
                pending: Deque[Future] = deque()
                for item in chunks:
                    pending.append(pool.submit(run, item))
                    if len(pending) >= 2 * workers:
                        result = pending.popleft().result()
                        best.offer(*result)
                        bar.update(result[3])
                while pending:
                    result = pending.popleft().result()
                    best.offer(*result)
                    bar.update(result[3])
    logger.debug("%s: evaluated %d laws", desc, best.n)
    return best


def _dirichlet_chunks(size: int, spec: SampleSpec, rows: int) -> Iterator[Tuple[int, np.ndarray]]:
    """Seeded Dirichlet laws; law 0 is the uniform law."""
    rng = np.random.default_rng(spec.seed)
    alpha = np.full(size, spec.dirichlet_concentration)
    for offset in range(0, spec.n_samples, rows):
        laws = rng.dirichlet(alpha, size=min(rows, spec.n_samples - offset))
        if offset == 0:
            laws[0] = 1.0 / size
        yield offset, laws


def simplex_grid_count(size: int, m: int) -> int:
    return math.comb(m + size - 1, size - 1)


def simplex_grid(size: int, m: int, rows: Optional[int] = None) -> Iterator[np.ndarray]:
    """Laws with entries in {0, 1/m, ..., 1}, stars-and-bars order, in blocks of `rows`."""
    bars = itertools.combinations(range(m + size - 1), size - 1)
    rows = rows or simplex_grid_count(size, m)
    while True:
        block = list(itertools.islice(bars, rows))
        if not block:
            return
        cuts = np.array(block, dtype=int).reshape(len(block), size - 1)
        edges = np.hstack([np.full((len(block), 1), -1), cuts, np.full((len(block), 1), m + size - 1)])
        yield (np.diff(edges, axis=1) - 1) / m


def _finish(operation: str, ch, mode: str, best: _Best, seed: Optional[int], started: float,
            law_json: Any, **extra) -> VerificationReport:
    report = VerificationReport(operation, channel_digest(ch), mode, best.n, best.gap, law_json, seed,
                                round((time.perf_counter() - started) * 1000.0, 3), dict(extra))
    logger.info("%s (%s): min gap %.6g over %d laws", operation, mode, best.gap, best.n)
    if best.gap < -TOLERANCES["gap_dump"]:
        logger.warning("%s: gap %.6g below %.0e at law %s", operation, best.gap, TOLERANCES["gap_dump"], law_json)
    return report


# ---------------- Grid over the product family ----------------

def grid_size(ch: DiscreteTwoOutputChannel, m: int) -> int:
    joint = int(np.prod(ch.input_alphabets[:ch.mu1]))
    total = simplex_grid_count(joint, m)
    for n_k in ch.input_alphabets[ch.mu1:]:
        total *= simplex_grid_count(n_k, m)
    return total


def _product_law_json(ch: DiscreteTwoOutputChannel, flat: np.ndarray) -> Dict[str, Any]:
    law = flat.reshape(ch.input_alphabets)
    joint = law.sum(axis=tuple(range(ch.mu1, ch.n_inputs))) if ch.mu1 < ch.n_inputs else law
    conditioning = [law.sum(axis=tuple(a for a in range(ch.n_inputs) if a != k)).tolist()
                    for k in range(ch.mu1, ch.n_inputs)]
    return {"joint": joint.reshape(-1).tolist(), "conditioning": conditioning}


def grid_min_gap(ch: DiscreteTwoOutputChannel, grid: GridSpec, workers: Optional[int] = None,
                 progress: Optional[bool] = None, seed: int = SAMPLING["seed"]) -> VerificationReport:
    """
    Minimum of I(X_joint; Y2 | X_cond) - I(X_joint; Y1 | X_cond) over the product
    family: the joint block gridded on its simplex, each conditioning input on its own.
    """
    started = time.perf_counter()
    projected = grid_size(ch, grid.resolution)
    joint_size = int(np.prod(ch.input_alphabets[:ch.mu1]))
    cond_sizes = ch.input_alphabets[ch.mu1:]
    lhs, rest = list(range(ch.mu1)), list(range(ch.mu1, ch.n_inputs))

    def evaluate(flat):
        return _partition_gap(ch, flat.reshape((len(flat), 1) + ch.input_alphabets), lhs, rest)

    rows = _chunk_rows(int(np.prod(ch.input_alphabets)) * max(ch.y1_size, ch.y2_size))
    if projected > grid.max_points:
        if not grid.fallback:
            raise GridOverflowError(projected, grid.max_points)
        n = min(SAMPLING["fallback_samples"], grid.max_points)
        logger.warning("grid of %d points exceeds cap %d; sampling %d product laws instead",
                       projected, grid.max_points, n)
        best = _reduce(_product_samples(joint_size, cond_sizes, n, seed, rows), evaluate, n,
                       "grid-gap (sampled)", workers, progress)
        return _finish("grid-gap", ch, "sampled", best, seed, started, _product_law_json(ch, best.law),
                       resolution=grid.resolution, projected_grid=projected)

    joint_count = simplex_grid_count(joint_size, grid.resolution)

    def chunks():
        cond_grids = [list(simplex_grid(n_k, grid.resolution)) for n_k in cond_sizes]
        cond_points = itertools.product(*[np.vstack(g) for g in cond_grids]) if cond_sizes else [()]
        for outer, marginals in enumerate(cond_points):
            cond_law = product_law(np.ones(1), marginals).reshape(-1)
            inner = 0
            for block in simplex_grid(joint_size, grid.resolution, rows):
                yield outer * joint_count + inner, (block[:, :, np.newaxis] * cond_law).reshape(len(block), -1)
                inner += len(block)

    best = _reduce(chunks(), evaluate, projected, "grid-gap", workers, progress)
    return _finish("grid-gap", ch, "grid", best, None, started, _product_law_json(ch, best.law),
                   resolution=grid.resolution)


def _product_samples(joint_size: int, cond_sizes: Sequence[int], n: int, seed: int,
                     rows: int) -> Iterator[Tuple[int, np.ndarray]]:
    rng = np.random.default_rng(seed)
    for offset in range(0, n, rows):
        count = min(rows, n - offset)
        laws = rng.dirichlet(np.ones(joint_size), size=count)
        for n_k in cond_sizes:
            marginal = rng.dirichlet(np.ones(n_k), size=count)
            laws = (laws[:, :, np.newaxis] * marginal[:, np.newaxis, :]).reshape(count, -1)
        if offset == 0:
            laws[0] = 1.0 / laws.shape[1]
        yield offset, laws


# ---------------- Sampled lemma checks ----------------

def _sampled_partition(operation: str, ch: DiscreteTwoOutputChannel, d_size: int, spec: SampleSpec,
                       lhs: List[int], rest: List[int], workers, progress, report_ch=None,
                       **extra) -> VerificationReport:
    if d_size < 1:
        raise ArgumentError(f"d_size must be >= 1, got {d_size}")
    started = time.perf_counter()
    shape = (d_size,) + ch.input_alphabets
    size = int(np.prod(shape))

    def evaluate(flat):
        return _partition_gap(ch, flat.reshape((len(flat),) + shape), lhs, rest)

    rows = _chunk_rows(size * max(ch.y1_size, ch.y2_size))
    best = _reduce(_dirichlet_chunks(size, spec, rows), evaluate, spec.n_samples, operation, workers, progress)
    return _finish(operation, report_ch or ch, "sampled", best, spec.seed, started,
                   best.law.reshape(shape).tolist(), d_size=d_size, **extra)


def sample_lemma1_gap(ch: DiscreteTwoOutputChannel, d_size: int, spec: SampleSpec,
                      workers: Optional[int] = None, progress: Optional[bool] = None) -> VerificationReport:
    """I(X_joint; Y2 | X_cond, D) - I(X_joint; Y1 | X_cond, D) over sampled joints P(d, x)."""
    return _sampled_partition("lemma1", ch, d_size, spec, list(range(ch.mu1)),
                              list(range(ch.mu1, ch.n_inputs)), workers, progress)


def sample_lemma3_gap_n2(ch: DiscreteTwoOutputChannel, d_size: int, spec: SampleSpec,
                         workers: Optional[int] = None, progress: Optional[bool] = None) -> VerificationReport:
    """Lemma-1 gap on the two-letter memoryless extension, laws correlated across time."""
    ext = ch.n_letter_extension(2)
    return _sampled_partition("lemma3", ext, d_size, spec, list(range(ext.mu1)),
                              list(range(ext.mu1, ext.n_inputs)), workers, progress, report_ch=ch, letters=2)


def corollary1_gap(ch: DiscreteTwoOutputChannel, moved: Iterable[int], d_size: int, spec: SampleSpec,
                   workers: Optional[int] = None, progress: Optional[bool] = None) -> VerificationReport:
    """Lemma-1 gap with the joint-block inputs in `moved` (1-based) placed beside D in the conditioning."""
    lhs, rest = _corollary_partition(ch, moved)
    return _sampled_partition("corollary1", ch, d_size, spec, lhs, rest, workers, progress,
                              moved=sorted(set(int(i) for i in moved)))


def sample_lemma4_gap(ch: DiscreteTwoOutputChannel, u_size: int, d_size: int, spec: SampleSpec,
                      workers: Optional[int] = None, progress: Optional[bool] = None) -> VerificationReport:
    """I(U; Y2 | X_cond, D) - I(U; Y1 | X_cond, D) over sampled joints P(d, u, x)."""
    if u_size < 1 or d_size < 1:
        raise ArgumentError("u_size and d_size must be >= 1")
    started = time.perf_counter()
    shape = (d_size, u_size) + ch.input_alphabets
    size = int(np.prod(shape))

    def evaluate(flat):
        return _auxiliary_gap(ch, flat.reshape((len(flat),) + shape))

    rows = _chunk_rows(size * max(ch.y1_size, ch.y2_size))
    best = _reduce(_dirichlet_chunks(size, spec, rows), evaluate, spec.n_samples, "lemma4", workers, progress)
    return _finish("lemma4", ch, "sampled", best, spec.seed, started, best.law.reshape(shape).tolist(),
                   d_size=d_size, u_size=u_size)


# ---------------- Degradation and broadcast ----------------

@dataclass(frozen=True)
class DegradationResult:
    degraded: bool
    garble: Optional[np.ndarray]
    residual: Optional[float]

    def to_json(self) -> Dict[str, Any]:
        return {"degraded": self.degraded,
                "garble": self.garble.tolist() if self.garble is not None else None,
                "residual": self.residual}


def degradation_feasibility(p1: np.ndarray, p2: np.ndarray,
                            tol: float = TOLERANCES["lp_feasibility"]) -> DegradationResult:
    """Is P(y2|x) = sum_y1 P(y1|x) G(y2|y1) for some row-stochastic G?"""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    if p1.ndim != 2 or p2.ndim != 2 or p1.shape[0] != p2.shape[0]:
        raise ArgumentError(f"channels must share the input alphabet, got shapes {p1.shape} and {p2.shape}")
    n_x, n1 = p1.shape
    n2 = p2.shape[1]
    # variables G[a, b] flattened row-major
    matching = np.kron(p1, np.eye(n2))
    stochastic = np.kron(np.eye(n1), np.ones((1, n2)))
    A_eq = np.vstack([matching, stochastic])
    b_eq = np.concatenate([p2.reshape(-1), np.ones(n1)])
    res = linprog(np.zeros(n1 * n2), A_eq=A_eq, b_eq=b_eq, bounds=[(0.0, 1.0)] * (n1 * n2),
                  method="highs", options={"primal_feasibility_tolerance": 1e-10})
    if res.status == 2:
        return DegradationResult(False, None, None)
    if not res.success:
        raise NumericError(f"garbling LP failed: {res.message}")
    garble = np.clip(res.x.reshape(n1, n2), 0.0, 1.0)
    garble /= garble.sum(axis=1, keepdims=True)
    residual = float(np.max(np.abs(p1 @ garble - p2)))
    if residual > tol:
        logger.info("garbling LP solved with residual %.3e above %.0e; reporting not degraded", residual, tol)
        return DegradationResult(False, None, residual)
    return DegradationResult(True, garble, residual)


def _grid_laws(x_size: int, grid: GridSpec, seed: int) -> Tuple[np.ndarray, str]:
    projected = simplex_grid_count(x_size, grid.resolution)
    if projected <= grid.max_points:
        return np.vstack(list(simplex_grid(x_size, grid.resolution))), "grid"
    if not grid.fallback:
        raise GridOverflowError(projected, grid.max_points)
    n = min(SAMPLING["fallback_samples"], grid.max_points)
    logger.warning("input grid of %d points exceeds cap %d; sampling %d laws instead", projected, grid.max_points, n)
    laws = np.random.default_rng(seed).dirichlet(np.ones(x_size), size=n)
    laws[0] = 1.0 / x_size
    return laws, "sampled"


@dataclass(frozen=True)
class Margins:
    min_margin: float
    argmin_law: np.ndarray
    ties: int
    mode: str

    def to_json(self) -> Dict[str, Any]:
        return {"min_margin": self.min_margin, "argmin_law": self.argmin_law.tolist(),
                "ties": self.ties, "mode": self.mode}


def more_capable_margins(w_strong: np.ndarray, w_weak: np.ndarray, grid: GridSpec,
                         seed: int = SAMPLING["seed"]) -> Margins:
    """min over input laws of I(X; Y_strong) - I(X; Y_weak)."""
    laws, mode = _grid_laws(np.asarray(w_strong).shape[0], grid, seed)
    diff = mutual_information_channel(laws, np.asarray(w_strong)) - mutual_information_channel(laws, np.asarray(w_weak))
    k = int(np.argmin(diff))
    ties = int(np.count_nonzero((diff <= 0.0) & (diff >= -TOLERANCES["gap"])))
    return Margins(float(diff[k]), laws[k], ties, mode)


@dataclass(frozen=True)
class BroadcastOrder:
    order: Optional[Tuple[int, ...]]
    min_margins: np.ndarray
    ties: Dict[str, int]
    mode: str

    def to_json(self) -> Dict[str, Any]:
        return {"order": list(self.order) if self.order else None,
                "min_margins": self.min_margins.tolist(), "ties": self.ties, "mode": self.mode}


def bc_more_capable_order(bc: DiscreteBroadcastChannel, grid: GridSpec,
                          seed: int = SAMPLING["seed"]) -> BroadcastOrder:
    """
    A strongest-first order of the receivers whose mutual informations dominate at
    every grid law. min_margins[i, j] is the minimum of I(X;Y_{i+1}) - I(X;Y_{j+1});
    margins in [-1e-10, 0] count as ties.
    """
    laws, mode = _grid_laws(bc.x_size, grid, seed)
    mi = np.vstack([mutual_information_channel(laws, w) for w in bc.marginals])
    K = bc.K
    diffs = mi[:, np.newaxis, :] - mi[np.newaxis, :, :]
    margins = diffs.min(axis=2)
    tol = TOLERANCES["gap"]

    def valid(order: Sequence[int]) -> bool:
        return all(margins[a, b] >= -tol for a, b in itertools.combinations(order, 2))

    by_mean = tuple(int(i) for i in np.argsort(-mi.mean(axis=1), kind="stable"))
    candidates = [by_mean]
    if K <= 7:
        candidates += [p for p in itertools.permutations(range(K)) if p != by_mean]
    found = next((p for p in candidates if valid(p)), None)
    ties = {}
    if found is not None:
        for a, b in zip(found, found[1:]):
            ties[f"{a + 1}>{b + 1}"] = int(np.count_nonzero((diffs[a, b] <= 0.0) & (diffs[a, b] >= -tol)))
    order = tuple(i + 1 for i in found) if found is not None else None
    logger.info("more-capable order over %d %s laws: %s", len(laws), mode, order)
    return BroadcastOrder(order, margins, ties, mode)


@dataclass(frozen=True)
class CapacityResult:
    capacity: float
    argmax: DiscretePMF
    iterations: int

    def to_json(self) -> Dict[str, Any]:
        return {"capacity": self.capacity, "argmax": self.argmax.probs.tolist(), "iterations": self.iterations}


def _divergences(w: np.ndarray, q: np.ndarray) -> np.ndarray:
    """D(W(.|x) || q) in bits for every input x."""
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(w > 0, w * np.log(np.where(w > 0, w, 1.0) / np.where(q > 0, q, 1.0)), 0.0)
    return terms.sum(axis=1) / LN2


def channel_capacity(w: np.ndarray, tol: float = ITERATION["tolerance"],
                     max_iter: int = ITERATION["max_iter"]) -> CapacityResult:
    """
    Alternating maximization of I(X;Y). The estimate sum_x r(x) D(W(.|x)||q) must
    not decrease; max_x D(W(.|x)||q) bounds the capacity from above.
    """
    w = np.asarray(w, dtype=float)
    r = np.full(w.shape[0], 1.0 / w.shape[0])
    previous = -math.inf
    for iteration in range(1, max_iter + 1):
        d = _divergences(w, r @ w)
        lower, upper = float(r @ d), float(d.max())
        if lower < previous - TOLERANCES["pmf_internal"]:
            raise NumericError(f"capacity estimate decreased at iteration {iteration}: {previous} -> {lower}")
        if upper - lower < tol or abs(lower - previous) < tol:
            return CapacityResult(max(lower, 0.0), DiscretePMF(r), iteration)
        previous = lower
        r = r * np.exp2(d - d.max())
        r /= r.sum()
    raise ConvergenceError(f"capacity iteration did not converge in {max_iter} iterations",
                           last_iterate=r, last_value=previous)


def bc_sum_capacity(bc: DiscreteBroadcastChannel, strongest: int) -> CapacityResult:
    """max over P_X of I(X; Y_strongest); the sum capacity when `strongest` tops a more-capable order."""
    if not 1 <= strongest <= bc.K:
        raise ArgumentError(f"strongest receiver {strongest} outside 1..{bc.K}")
    result = channel_capacity(bc.marginals[strongest - 1])
    logger.info("sum capacity at receiver %d: %.6f bits after %d iterations",
                strongest, result.capacity, result.iterations)
    return result
