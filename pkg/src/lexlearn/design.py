"""Optimal experiment selection over product bundles.

Enumerates every size-n bundle, scores each by expected information gain
(expected KL divergence from the current belief to the posterior, averaged
over the predictive distribution of feedback), and returns the argmax
deterministically with the full table for explainability.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .inference import (
    BeliefState,
    Feedback,
    NOCLICK,
    NoiseConfig,
    outcome_distribution,
    update,
)
from .taxonomy import KnowledgeGraph

__all__ = [
    "MAX_CANDIDATES",
    "Bundle",
    "EigReport",
    "enumerate_bundles",
    "kl_divergence",
    "predictive",
    "expected_information_gain",
    "select_bundle",
]

# Exhaustive enumeration only; beyond this many candidates we refuse rather
# than silently subsample.
MAX_CANDIDATES = 100_000


@dataclass(frozen=True, order=True)
class Bundle:
    """An unordered set of distinct products, stored in canonical sorted order."""

    products: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.products:
            raise ValueError("a bundle must contain at least one product")
        if len(set(self.products)) != len(self.products):
            raise ValueError(f"duplicate products in bundle: {self.products}")
        object.__setattr__(self, "products", tuple(sorted(self.products)))

    @classmethod
    def of(cls, products: Iterable[str]) -> "Bundle":
        return cls(tuple(products))

    def __contains__(self, product_id: str) -> bool:
        return product_id in self.products

    def __iter__(self):
        return iter(self.products)

    def __len__(self) -> int:
        return len(self.products)


@dataclass(frozen=True)
class EigReport:
    bundle: Bundle
    eig: float
    predictive: Mapping[Feedback, float]

    def to_dict(self) -> dict:
        return {
            "bundle": list(self.bundle.products),
            "eig": self.eig,
            "predictive": {y.key: p for y, p in self.predictive.items()},
        }


def enumerate_bundles(kg: KnowledgeGraph, n: int) -> list[Bundle]:
    """All C(|products|, n) size-n bundles in lexicographic canonical order."""
    product_ids = sorted(kg.products)
    if not 1 <= n <= len(product_ids):
        raise ValueError(
            f"bundle size must be in [1, {len(product_ids)}], got {n}"
        )
    count = math.comb(len(product_ids), n)
    if count > MAX_CANDIDATES:
        raise ValueError(
            f"{count} candidate bundles exceed the cap of {MAX_CANDIDATES}"
        )
    return [Bundle(c) for c in itertools.combinations(product_ids, n)]


def kl_divergence(p: BeliefState, q: BeliefState) -> float:
    """Sum of p * ln(p/q) in nats, with 0 * ln(0/q) = 0."""
    if set(p.mass) != set(q.mass):
        raise ValueError("belief states are over different node sets")
    total = 0.0
    for n, pn in p.mass.items():
        if pn == 0.0:
            continue
        qn = q.mass[n]
        if qn == 0.0:
            raise ValueError(f"support violation: q({n!r}) = 0 but p({n!r}) > 0")
        total += pn * math.log(pn / qn)
    return max(total, 0.0)


def predictive(
    belief: BeliefState,
    kg: KnowledgeGraph,
    bundle: Bundle | Sequence[str],
    noise: NoiseConfig,
) -> dict[Feedback, float]:
    """Marginal probability of each outcome: sum over nodes of P(y|node) P(node)."""
    products = tuple(bundle.products if isinstance(bundle, Bundle) else bundle)
    outcomes = [Feedback(x) for x in products] + [NOCLICK]
    result = {y: 0.0 for y in outcomes}
    for node_id, mass in belief.mass.items():
        if mass == 0.0:
            continue
        dist = outcome_distribution(kg, node_id, products, noise)
        for y in outcomes:
            result[y] += mass * dist[y]
    return result


def expected_information_gain(
    belief: BeliefState,
    kg: KnowledgeGraph,
    bundle: Bundle | Sequence[str],
    noise: NoiseConfig,
) -> EigReport:
    """Expected KL from current belief to posterior over possible feedback."""
    if not isinstance(bundle, Bundle):
        bundle = Bundle.of(bundle)
    pred = predictive(belief, kg, bundle, noise)
    eig = 0.0
    for y, py in pred.items():
        if py == 0.0:
            continue
        posterior = update(belief, kg, bundle.products, y, noise)
        eig += py * kl_divergence(posterior, belief)
    return EigReport(bundle=bundle, eig=max(eig, 0.0), predictive=pred)


def select_bundle(
    belief: BeliefState,
    kg: KnowledgeGraph,
    n: int,
    noise: NoiseConfig,
) -> tuple[Bundle, list[EigReport]]:
    """The EIG-maximizing bundle plus the full table sorted by descending EIG.

    Ties go to the lexicographically first bundle, so the result is
    deterministic.
    """
    reports = [
        expected_information_gain(belief, kg, b, noise)
        for b in enumerate_bundles(kg, n)
    ]
    reports.sort(key=lambda r: (-r.eig, r.bundle.products))
    return reports[0].bundle, reports
