"""Seeded synthetic users and the batch experiment harness.

Simulated users click according to the same outcome model the engine
assumes (optionally with their own noise level, to study misspecification).
All randomness flows from named 64-bit seeds through numpy's default
PCG64 generator, so every trial and summary is reproducible bit for bit.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, replace
from typing import Any, Sequence

import numpy as np

from .design import Bundle
from .inference import Feedback, NoiseConfig, outcome_distribution
from .session import SessionConfig, SessionTrace, start_session, submit_feedback
from .taxonomy import KnowledgeGraph

__all__ = [
    "SimulatedUser",
    "TrialResult",
    "simulate_click",
    "run_trial",
    "compare_policies",
    "trial_rows",
]

# Stream tags keeping the user's clicks and the random policy's picks on
# disjoint substreams of the same trial seed.
_USER_STREAM = 101


@dataclass(frozen=True)
class SimulatedUser:
    true_node: str
    noise: NoiseConfig
    seed: int


def simulate_click(
    user: SimulatedUser,
    kg: KnowledgeGraph,
    bundle: Bundle | Sequence[str],
    call_index: int = 0,
) -> Feedback:
    """Sample one outcome from the user's true-node outcome distribution.

    Deterministic given (seed, call_index).
    """
    products = tuple(bundle.products if isinstance(bundle, Bundle) else bundle)
    dist = outcome_distribution(kg, user.true_node, products, user.noise)
    outcomes = list(dist)
    probs = np.array([dist[y] for y in outcomes])
    rng = np.random.default_rng([user.seed, _USER_STREAM, call_index])
    idx = int(rng.choice(len(outcomes), p=probs / probs.sum()))
    return outcomes[idx]


@dataclass(frozen=True)
class TrialResult:
    seed: int
    policy: str
    steps_to_termination: int
    final_status: str
    true_node_mass: float
    trace: SessionTrace


def run_trial(
    kg: KnowledgeGraph,
    query: str,
    true_node: str,
    config: SessionConfig,
    seed: int,
    user_noise: NoiseConfig | None = None,
) -> TrialResult:
    """Drive one full session against a simulated user; deterministic in seed."""
    kg.node(true_node)
    config = replace(config, seed=seed)
    user = SimulatedUser(
        true_node=true_node, noise=user_noise or config.noise, seed=seed
    )
    trace = start_session(kg, query, config)
    clicks = 0
    while trace.status == "active":
        pending = trace.pending_step
        assert pending is not None
        y = simulate_click(user, kg, pending.bundle, call_index=clicks)
        clicks += 1
        trace = submit_feedback(kg, trace, y)
    return TrialResult(
        seed=seed,
        policy=config.policy,
        steps_to_termination=clicks,
        final_status=trace.status,
        true_node_mass=trace.belief[true_node],
        trace=trace,
    )


def _summarize(results: Sequence[TrialResult]) -> dict[str, Any]:
    steps = [r.steps_to_termination for r in results]
    return {
        "n_trials": len(results),
        "mean_steps": statistics.fmean(steps),
        "median_steps": statistics.median(steps),
        "convergence_rate": sum(r.final_status == "converged" for r in results)
        / len(results),
        "mean_true_node_mass": statistics.fmean(r.true_node_mass for r in results),
    }


def compare_policies(
    kg: KnowledgeGraph,
    query: str,
    true_node: str,
    config: SessionConfig,
    n_trials: int,
    base_seed: int,
    user_noise: NoiseConfig | None = None,
    policies: Sequence[str] = ("eig", "random"),
) -> dict[str, Any]:
    """Paired policy comparison: trial i uses seed base_seed + i under every policy."""
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    per_policy: dict[str, Any] = {}
    for policy in policies:
        pconfig = replace(config, policy=policy)
        results = [
            run_trial(kg, query, true_node, pconfig, base_seed + i, user_noise)
            for i in range(n_trials)
        ]
        per_policy[policy] = {
            "summary": _summarize(results),
            "results": results,
        }
    return {
        "kg_id": kg.id,
        "query": query,
        "true_node": true_node,
        "base_seed": base_seed,
        "n_trials": n_trials,
        "config": config.to_dict(),
        "policies": {p: d["summary"] for p, d in per_policy.items()},
        "_results": {p: d["results"] for p, d in per_policy.items()},
    }


def trial_rows(summary: dict[str, Any]) -> list[dict[str, Any]]:
    """Flat per-trial rows (seed, policy, steps, status, true_node_mass) for CSV."""
    rows = []
    for policy, results in summary["_results"].items():
        for r in results:
            rows.append(
                {
                    "seed": r.seed,
                    "policy": policy,
                    "steps": r.steps_to_termination,
                    "status": r.final_status,
                    "true_node_mass": r.true_node_mass,
                }
            )
    rows.sort(key=lambda row: (row["policy"], row["seed"]))
    return rows
