"""Exact Bayesian belief maintenance over taxonomy nodes.

The hypothesis space is the node set of a knowledge graph, which is small
and finite, so the posterior is computed by exact enumeration. The prior
favors ontologically distinctive nodes; the likelihood follows the size
principle (smaller extensions explain a consistent click better) with an
additive noise floor for erratic behavior, normalized into a proper
distribution over the bundle's click outcomes plus an explicit no-click.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .taxonomy import DEFAULT_OD_MIN, KnowledgeGraph, ontological_distinctiveness

__all__ = [
    "NOCLICK_KEY",
    "NORMALIZATION_TOL",
    "NoiseConfig",
    "Feedback",
    "NOCLICK",
    "BeliefState",
    "prior",
    "click_weight",
    "outcome_likelihood",
    "outcome_distribution",
    "update",
    "update_batch",
]

# Serialized name of the no-click outcome in predictive tables and logs.
NOCLICK_KEY = "__noclick__"

NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class NoiseConfig:
    """Noise floor for click outcomes and the weight of clicking nothing."""

    epsilon: float = 0.05
    epsilon_noclick: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0,1), got {self.epsilon}")
        if self.epsilon_noclick is None:
            object.__setattr__(self, "epsilon_noclick", self.epsilon)
        elif not 0.0 < self.epsilon_noclick < 1.0:
            raise ValueError(
                f"epsilon_noclick must be in (0,1), got {self.epsilon_noclick}"
            )


@dataclass(frozen=True)
class Feedback:
    """User outcome for one bundle: a clicked product id, or None for no click."""

    clicked: str | None

    @property
    def is_click(self) -> bool:
        return self.clicked is not None

    @property
    def key(self) -> str:
        return self.clicked if self.clicked is not None else NOCLICK_KEY

    @classmethod
    def from_key(cls, key: str) -> "Feedback":
        return cls(None) if key == NOCLICK_KEY else cls(key)


NOCLICK = Feedback(None)


@dataclass(frozen=True)
class BeliefState:
    """Normalized probability distribution over the nodes of one KG."""

    kg_id: str
    mass: Mapping[str, float]

    def __post_init__(self) -> None:
        total = sum(self.mass.values())
        if any(m < 0 for m in self.mass.values()):
            raise ValueError("belief mass must be nonnegative")
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"belief mass sums to {total}, expected 1")

    def __getitem__(self, node_id: str) -> float:
        return self.mass[node_id]

    def argmax(self) -> str:
        # Ties broken by node id for determinism.
        return max(sorted(self.mass), key=lambda n: self.mass[n])

    def max_mass(self) -> float:
        return max(self.mass.values())

    def to_dict(self) -> dict[str, float]:
        return dict(self.mass)


def prior(kg: KnowledgeGraph, od_min: float = DEFAULT_OD_MIN) -> BeliefState:
    """Prior over nodes proportional to ontological distinctiveness."""
    od = {n: ontological_distinctiveness(kg, n, od_min) for n in kg.nodes}
    total = sum(od.values())
    return BeliefState(kg_id=kg.id, mass={n: v / total for n, v in od.items()})


def click_weight(
    kg: KnowledgeGraph, node_id: str, product_id: str, noise: NoiseConfig
) -> float:
    """Unnormalized weight of clicking a product under one node hypothesis.

    Size principle plus additive noise floor: 1/|ext| + epsilon for products
    the node covers, bare epsilon otherwise.
    """
    extension = kg.node(node_id).extension
    kg.product(product_id)
    if product_id in extension:
        return 1.0 / len(extension) + noise.epsilon
    return noise.epsilon


def _outcome_weights(
    kg: KnowledgeGraph, node_id: str, bundle_products: Sequence[str], noise: NoiseConfig
) -> list[float]:
    weights = [click_weight(kg, node_id, x, noise) for x in bundle_products]
    weights.append(noise.epsilon_noclick)  # type: ignore[arg-type]
    return weights


def outcome_distribution(
    kg: KnowledgeGraph,
    node_id: str,
    bundle_products: Sequence[str],
    noise: NoiseConfig,
) -> dict[Feedback, float]:
    """Probability of each of the |bundle|+1 outcomes under one node."""
    weights = _outcome_weights(kg, node_id, bundle_products, noise)
    total = sum(weights)
    dist = {Feedback(x): w / total for x, w in zip(bundle_products, weights)}
    dist[NOCLICK] = weights[-1] / total
    return dist


def outcome_likelihood(
    kg: KnowledgeGraph,
    node_id: str,
    bundle_products: Sequence[str],
    y: Feedback,
    noise: NoiseConfig,
) -> float:
    """P(y | node, bundle): one entry of the normalized outcome distribution."""
    if y.is_click and y.clicked not in bundle_products:
        raise ValueError(
            f"feedback clicks {y.clicked!r} which is not in the bundle {list(bundle_products)}"
        )
    weights = _outcome_weights(kg, node_id, bundle_products, noise)
    total = sum(weights)
    if y.is_click:
        idx = list(bundle_products).index(y.clicked)
        return weights[idx] / total
    return weights[-1] / total


def update(
    belief: BeliefState,
    kg: KnowledgeGraph,
    bundle_products: Sequence[str],
    y: Feedback,
    noise: NoiseConfig,
) -> BeliefState:
    """Posterior after observing one outcome; the input belief is unchanged."""
    return update_batch(belief, kg, [(bundle_products, y)], noise)


def update_batch(
    belief: BeliefState,
    kg: KnowledgeGraph,
    observations: Iterable[tuple[Sequence[str], Feedback]],
    noise: NoiseConfig,
) -> BeliefState:
    """Posterior after a sequence of observations, accumulated in log space."""
    log_mass = {
        n: (math.log(m) if m > 0 else -math.inf) for n, m in belief.mass.items()
    }
    for bundle_products, y in observations:
        for n in log_mass:
            lik = outcome_likelihood(kg, n, bundle_products, y, noise)
            log_mass[n] += math.log(lik)
    peak = max(log_mass.values())
    if peak == -math.inf:
        raise ArithmeticError("all posterior mass vanished; epsilon must be > 0")
    unnorm = {n: math.exp(v - peak) for n, v in log_mass.items()}
    total = sum(unnorm.values())
    return BeliefState(kg_id=belief.kg_id, mass={n: v / total for n, v in unnorm.items()})
