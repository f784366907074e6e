import argparse
import json
import math
import os
import sys
import time
from datetime import datetime
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

# Add the parent directory to sys.path to import the icregime package
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from icregime.icregime_types import GridSpec, SampleSpec
from icregime.measures import binary_entropy
from icregime.model import DiscreteBroadcastChannel, GaussianIC, TwoOutputSystem, bec, bsc
from icregime.regimes import degraded_equivalent, gaussian_3user_check, gaussian_kuser_check, regime_gains
from icregime.regions import contains_batch, redundancy_check, region_full, sum_capacity, support, vertices
from icregime.verifier import (bc_more_capable_order, bc_sum_capacity, corollary1_gap, degradation_feasibility,
                               grid_min_gap, make_degraded_channel, random_degraded_channel, sample_lemma1_gap,
                               sample_lemma3_gap_n2, sample_lemma4_gap)

Check = Callable[[], Tuple[bool, Dict[str, Any]]]

GAP_TOL = 1e-10


class AcceptanceCase:
    """One end-to-end acceptance scenario."""

    def __init__(self, name: str, check: Check, description: str = "", budget_seconds: Optional[float] = None):
        """
        Initialize an acceptance case.

        Args:
            name: A unique identifier for the case
            check: Callable returning (passed, details)
            description: What the case establishes
            budget_seconds: Runtime the case is expected to stay under
        """
        self.name = name
        self.check = check
        self.description = description
        self.budget_seconds = budget_seconds

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "description": self.description, "budget_seconds": self.budget_seconds}


class AcceptanceResult:
    """Result of running an acceptance case."""

    def __init__(self, case: AcceptanceCase, passed: bool, details: Dict[str, Any],
                 errors: List[str] = None, execution_time: float = 0.0):
        self.case = case
        self.passed = passed
        self.details = details
        self.errors = errors or []
        self.execution_time = execution_time

    def to_dict(self) -> Dict[str, Any]:
        return {
            "case": self.case.to_dict(),
            "passed": self.passed,
            "details": self.details,
            "errors": self.errors,
            "execution_time": self.execution_time,
        }


class AcceptanceRunner:
    """Runs acceptance cases and writes a JSON summary."""

    def __init__(self, output_path: str = None):
        self.output_path = output_path or f"acceptance_results_{datetime.now().strftime('%Y%m%d_%H%M%S')}.json"

    def run_case(self, case: AcceptanceCase) -> AcceptanceResult:
        """
        Run a single acceptance case.

        Args:
            case: The case to run

        Returns:
            The result, failed with the exception text if the check raised
        """
        print(f"Running case: {case.name}")
        start_time = time.time()
        errors = []
        try:
            passed, details = case.check()
        except Exception as e:
            errors.append(f"Exception during case execution: {str(e)}")
            passed, details = False, {}
        execution_time = time.time() - start_time
        if case.budget_seconds is not None and execution_time > case.budget_seconds:
            errors.append(f"runtime {execution_time:.1f}s over budget {case.budget_seconds:g}s")
            passed = False
        print(f"Case {case.name} {'passed' if passed else 'failed'}")
        for error in errors:
            print(f"  - {error}")
        return AcceptanceResult(case, passed, details, errors, execution_time)

    def run_cases(self, cases: List[AcceptanceCase]) -> List[AcceptanceResult]:
        return [self.run_case(case) for case in cases]

    def save_results(self, results: List[AcceptanceResult]) -> Dict[str, Any]:
        """
        Save results to the output path.

        Args:
            results: Results to save

        Returns:
            The written summary
        """
        directory = os.path.dirname(self.output_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        total = len(results)
        passed = sum(1 for r in results if r.passed)
        pass_rate = passed / total if total > 0 else 0
        report = {
            "timestamp": datetime.now().isoformat(),
            "total_cases": total,
            "passed_cases": passed,
            "pass_rate": pass_rate,
            "results": [r.to_dict() for r in results],
        }
        with open(self.output_path, "w") as f:
            json.dump(report, f, indent=2, default=float)
        print(f"Acceptance results saved to {self.output_path}")
        print(f"Pass rate: {passed}/{total} ({pass_rate:.2%})")
        return report


# ---------------- Scenarios ----------------

def two_user_reduction() -> Tuple[bool, Dict[str, Any]]:
    values = (0.25, 0.5, 1.0, 1.5, 2.0, 4.0)
    mismatches = []
    for a in values:
        for b in values:
            ic = GaussianIC([[1.0, a], [b, 1.0]], [1.0, 1.0])
            if gaussian_kuser_check(ic, 0).passed is not (abs(a) >= 1 and abs(b) >= 1):
                mismatches.append([a, b])
    return not mismatches, {"cells": len(values) ** 2, "mismatches": mismatches}


def three_user_example() -> Tuple[bool, Dict[str, Any]]:
    a13, a21, a32 = 2.0, 3.0, 2.0
    gains = [[1.0, a13 * a32, a13], [a21, 1.0, a21 * a13], [a21 * a32, a32, 1.0]]
    ic = GaussianIC(gains, [1.0, 1.0, 1.0])
    capacity = sum_capacity(ic)
    expected = 0.5 * math.log2(22.0)
    ok = gaussian_3user_check(ic).passed and gaussian_kuser_check(ic, 0).passed and abs(capacity - expected) <= 1e-9
    return ok, {"sum_capacity": capacity, "expected": expected}


def region_redundancy(instances: int = 100, seed: int = 0) -> Tuple[bool, Dict[str, Any]]:
    rng = np.random.default_rng(seed)
    failures, worst = [], 0.0
    for k in range(instances):
        K = 3 if k % 2 == 0 else 4
        free = rng.uniform(1.0, 3.0, size=K) * rng.choice([-1.0, 1.0], size=K)
        result = redundancy_check(regime_gains(free), 0, n_probes=1000)
        worst = max(worst, result.max_bound_gap)
        if not result.equivalent:
            failures.append({"K": K, "free": free.tolist()})
    return not failures, {"instances": instances, "max_bound_gap": worst, "failures": failures}


def _random_shape(rng) -> Tuple[Tuple[int, ...], int]:
    mu1 = int(rng.integers(1, 3))
    mu2 = int(rng.integers(0, 2))
    return tuple(int(a) for a in rng.integers(2, 4, size=mu1 + mu2)), mu1


def lemma_suite(channels: int = 50, seed: int = 0) -> Tuple[bool, Dict[str, Any]]:
    rng = np.random.default_rng(seed)
    worst: Dict[str, float] = {}
    for k in range(channels):
        alphabets, mu1 = _random_shape(rng)
        ch = random_degraded_channel(rng, alphabets, mu1, int(rng.integers(2, 4)), int(rng.integers(2, 4)))
        spec = SampleSpec(200, seed=k)
        reports = {
            "grid": grid_min_gap(ch, GridSpec(8), progress=False),
            "lemma1": sample_lemma1_gap(ch, 3, spec, progress=False),
            "lemma3": sample_lemma3_gap_n2(ch, 3, spec, progress=False),
            "lemma4": sample_lemma4_gap(ch, 2, 3, spec, progress=False),
        }
        if mu1 > 1:
            reports["corollary1"] = corollary1_gap(ch, [1], 3, spec, progress=False)
        for name, report in reports.items():
            worst[name] = min(worst.get(name, math.inf), report.min_gap)
    witness = make_degraded_channel(bsc(0.1), bsc(0.125)).swap_outputs()
    witness_gap = grid_min_gap(witness, GridSpec(8), progress=False).min_gap
    ok = all(v >= -GAP_TOL for v in worst.values()) and witness_gap <= -0.25
    return ok, {"worst_gaps": worst, "witness_gap": witness_gap,
                "witness_oracle": binary_entropy(0.1) - binary_entropy(0.2)}


def broadcast_sum_capacity() -> Tuple[bool, Dict[str, Any]]:
    chain = DiscreteBroadcastChannel((bsc(0.1), bsc(0.2), bsc(0.3)))
    order = bc_more_capable_order(chain, GridSpec(64)).order
    capacity = bc_sum_capacity(chain, order[0]).capacity if order else float("nan")
    erasure = bc_sum_capacity(DiscreteBroadcastChannel((bec(0.25), bec(0.5))), 1).capacity
    ok = (order == (1, 2, 3) and abs(capacity - (1.0 - binary_entropy(0.1))) <= 1e-5
          and abs(erasure - 0.75) <= 1e-5)
    return ok, {"order": order, "capacity": capacity, "erasure_capacity": erasure}


def more_capable_not_degraded() -> Tuple[bool, Dict[str, Any]]:
    result = bc_more_capable_order(DiscreteBroadcastChannel((bsc(0.1), bec(0.4))), GridSpec(128))
    forward = degradation_feasibility(bsc(0.1), bec(0.4)).degraded
    backward = degradation_feasibility(bec(0.4), bsc(0.1)).degraded
    ok = result.order == (2, 1) and not forward and not backward
    return ok, {"order": result.order, "degraded_either_way": forward or backward}


def degraded_equivalent_match(systems: int = 100, seed: int = 0) -> Tuple[bool, Dict[str, Any]]:
    rng = np.random.default_rng(seed)
    worst_mean, worst_var = 0.0, 0.0
    for _ in range(systems):
        mu1, mu2 = int(rng.integers(1, 4)), int(rng.integers(0, 3))
        b = rng.uniform(0.1, 3.0, size=mu1 + mu2) * rng.choice([-1.0, 1.0], size=mu1 + mu2)
        alpha = (1.0 - rng.uniform(0.0, 1.0)) * rng.choice([-1.0, 1.0])
        a = np.concatenate([alpha * b[:mu1], rng.normal(size=mu2)])
        system = TwoOutputSystem(mu1, mu2, a, b)
        mean, variance = degraded_equivalent(system).conditional_law(system)
        worst_mean = max(worst_mean, float(np.max(np.abs(mean - a))))
        worst_var = max(worst_var, abs(variance - 1.0))
    ok = worst_mean <= 1e-12 and worst_var <= 1e-12
    return ok, {"systems": systems, "max_mean_error": worst_mean, "max_variance_error": worst_var}


def geometry_oracles(directions: int = 20, seed: int = 0) -> Tuple[bool, Dict[str, Any]]:
    region = region_full(GaussianIC(np.ones((2, 2)), [1.0, 1.0]))
    c = 0.5 * math.log2(3.0) - 0.5
    expected = np.array(sorted([(0.0, 0.0), (0.0, 0.5), (0.5, 0.0), (0.5, c), (c, 0.5)]))
    found = np.array(sorted(tuple(v.rates) for v in vertices(region)))
    vertices_ok = found.shape == expected.shape and bool(np.all(np.abs(found - expected) <= 1e-9))
    # 1001 x 1001 brute-force grid over the bounding box
    axis = np.linspace(0.0, region.bound({1}), 1001)
    xs, ys = np.meshgrid(axis, np.linspace(0.0, region.bound({2}), 1001))
    points = np.column_stack([xs.ravel(), ys.ravel()])
    points = points[contains_batch(region, points)]
    rng = np.random.default_rng(seed)
    worst = 0.0
    for direction in rng.uniform(0.0, 1.0, size=(directions, 2)):
        worst = max(worst, abs(support(region, direction) - float(np.max(points @ direction))))
    return vertices_ok and worst <= 1e-3, {"vertices_ok": vertices_ok, "max_support_error": worst,
                                           "feasible_points": len(points)}


def get_acceptance_cases() -> List[AcceptanceCase]:
    """The acceptance scenarios, cheapest first."""
    return [
        AcceptanceCase("two_user_reduction", two_user_reduction,
                       "K=2 check passes exactly when both cross gains have magnitude >= 1", 1),
        AcceptanceCase("three_user_example", three_user_example,
                       "free parameters (2, 3, 2) pass both 3-user checks; sum capacity 0.5 log2 22", 1),
        AcceptanceCase("degraded_equivalent_match", degraded_equivalent_match,
                       "constructed output matches the conditional mean and variance", 1),
        AcceptanceCase("broadcast_sum_capacity", broadcast_sum_capacity,
                       "degraded BSC chain ordered; capacity at the strongest receiver", 10),
        AcceptanceCase("more_capable_not_degraded", more_capable_not_degraded,
                       "BSC(0.1)/BEC(0.4) ordered though neither is a garbling of the other", 10),
        AcceptanceCase("geometry_oracles", geometry_oracles,
                       "hand-derived vertices; support against a brute-force grid", 30),
        AcceptanceCase("region_redundancy", region_redundancy,
                       "full and simplified regions agree inside the regime", 30),
        AcceptanceCase("lemma_suite", lemma_suite,
                       "no negative gap on degraded channels; the anti-degraded witness is caught", 300),
    ]


def main(argv: Optional[List[str]] = None) -> int:
    """Run the acceptance cases and save the results."""
    parser = argparse.ArgumentParser(description="icregime acceptance scenarios")
    parser.add_argument("--output", default=os.path.join(os.path.dirname(os.path.abspath(__file__)),
                                                         "acceptance_results.json"))
    parser.add_argument("--only", action="append", default=[], help="run only the named case")
    args = parser.parse_args(argv)
    cases = [c for c in get_acceptance_cases() if not args.only or c.name in args.only]
    runner = AcceptanceRunner(output_path=args.output)
    results = runner.run_cases(cases)
    runner.save_results(results)
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
