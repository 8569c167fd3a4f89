"""Per-word session state machine: the turn-taking loop.

A session alternates bundle selection and belief update for one unknown
query word, stops when the posterior concentrates past a threshold (or a
step cap), and records every step so the whole interaction can be replayed
deterministically.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, replace
from typing import Any, Literal, Mapping, Sequence

import numpy as np

from .design import Bundle, enumerate_bundles, select_bundle
from .inference import BeliefState, Feedback, NoiseConfig, prior, update
from .taxonomy import KnowledgeGraph

__all__ = [
    "Policy",
    "SessionConfig",
    "SessionStep",
    "SessionTrace",
    "SessionError",
    "start_session",
    "submit_feedback",
    "lexicon_entry",
    "replay_session",
    "ensure_pending",
]

Policy = Literal["eig", "random"]

ACTIVE = "active"
CONVERGED = "converged"
EXHAUSTED = "exhausted"


class SessionError(ValueError):
    """Invalid session operation (bad config, wrong state, invalid feedback)."""


@dataclass(frozen=True)
class SessionConfig:
    bundle_size: int = 2
    noise: NoiseConfig = NoiseConfig()
    convergence_threshold: float = 0.95
    max_steps: int = 20
    policy: Policy = "eig"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.bundle_size < 1:
            raise SessionError(f"bundle_size must be positive, got {self.bundle_size}")
        if not 0.5 < self.convergence_threshold <= 1.0:
            raise SessionError(
                f"convergence_threshold must be in (0.5, 1], got {self.convergence_threshold}"
            )
        if self.max_steps < 1:
            raise SessionError(f"max_steps must be positive, got {self.max_steps}")
        if self.policy not in ("eig", "random"):
            raise SessionError(f"unknown policy {self.policy!r}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "bundle_size": self.bundle_size,
            "epsilon": self.noise.epsilon,
            "epsilon_noclick": self.noise.epsilon_noclick,
            "convergence_threshold": self.convergence_threshold,
            "max_steps": self.max_steps,
            "policy": self.policy,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "SessionConfig":
        return cls(
            bundle_size=doc["bundle_size"],
            noise=NoiseConfig(
                epsilon=doc["epsilon"], epsilon_noclick=doc.get("epsilon_noclick")
            ),
            convergence_threshold=doc["convergence_threshold"],
            max_steps=doc["max_steps"],
            policy=doc["policy"],
            seed=doc["seed"],
        )


@dataclass(frozen=True)
class SessionStep:
    index: int
    bundle: Bundle
    feedback: Feedback | None  # None while the step is pending
    belief_after: BeliefState | None

    @property
    def pending(self) -> bool:
        return self.feedback is None


@dataclass(frozen=True)
class SessionTrace:
    session_id: str
    kg_id: str
    query: str
    config: SessionConfig
    belief: BeliefState
    steps: tuple[SessionStep, ...]
    status: str
    converged_node: str | None = None

    @property
    def pending_step(self) -> SessionStep | None:
        if self.steps and self.steps[-1].pending:
            return self.steps[-1]
        return None

    def to_dict(self) -> dict[str, Any]:
        return {
            "session_id": self.session_id,
            "kg_id": self.kg_id,
            "query": self.query,
            "config": self.config.to_dict(),
            "status": self.status,
            "converged_node": self.converged_node,
            "belief": self.belief.to_dict(),
            "steps": [
                {
                    "index": s.index,
                    "bundle": list(s.bundle.products),
                    "feedback": None if s.feedback is None else s.feedback.key,
                    "belief": None if s.belief_after is None else s.belief_after.to_dict(),
                }
                for s in self.steps
            ],
        }


def _choose_bundle(
    kg: KnowledgeGraph, belief: BeliefState, config: SessionConfig, step_index: int
) -> Bundle:
    if config.policy == "eig":
        bundle, _ = select_bundle(belief, kg, config.bundle_size, config.noise)
        return bundle
    candidates = enumerate_bundles(kg, config.bundle_size)
    # Stateless per-step stream keyed on (seed, step) so choices replay
    # identically after crash recovery.
    rng = np.random.default_rng([config.seed, step_index])
    return candidates[int(rng.integers(len(candidates)))]


def start_session(
    kg: KnowledgeGraph,
    query: str,
    config: SessionConfig | None = None,
    session_id: str | None = None,
) -> SessionTrace:
    """Open a session: prior belief plus the policy's first pending bundle."""
    if not query:
        raise SessionError("query word must be non-empty")
    config = config or SessionConfig()
    belief = prior(kg)
    trace = SessionTrace(
        session_id=session_id or uuid.uuid4().hex,
        kg_id=kg.id,
        query=query,
        config=config,
        belief=belief,
        steps=(),
        status=ACTIVE,
    )
    if belief.max_mass() >= config.convergence_threshold:
        return replace(trace, status=CONVERGED, converged_node=belief.argmax())
    bundle = _choose_bundle(kg, belief, config, 0)
    return replace(trace, steps=(SessionStep(0, bundle, None, None),))


def submit_feedback(kg: KnowledgeGraph, trace: SessionTrace, y: Feedback) -> SessionTrace:
    """Score the pending bundle's feedback and advance the state machine."""
    if trace.status != ACTIVE:
        raise SessionError(f"session {trace.session_id} is {trace.status}, not active")
    pending = trace.pending_step
    if pending is None:
        raise SessionError(f"session {trace.session_id} has no pending step")
    if y.is_click and y.clicked not in pending.bundle:
        raise SessionError(
            f"clicked product {y.clicked!r} is not in the shown bundle "
            f"{list(pending.bundle.products)}"
        )
    belief = update(trace.belief, kg, pending.bundle.products, y, trace.config.noise)
    done = replace(pending, feedback=y, belief_after=belief)
    steps = trace.steps[:-1] + (done,)
    trace = replace(trace, belief=belief, steps=steps)

    if belief.max_mass() >= trace.config.convergence_threshold:
        return replace(trace, status=CONVERGED, converged_node=belief.argmax())
    if len(steps) >= trace.config.max_steps:
        return replace(trace, status=EXHAUSTED)
    next_bundle = _choose_bundle(kg, belief, trace.config, len(steps))
    return replace(trace, steps=steps + (SessionStep(len(steps), next_bundle, None, None),))


def lexicon_entry(trace: SessionTrace) -> tuple[str, float] | None:
    """The learned (node, confidence) mapping, present only after convergence."""
    if trace.status != CONVERGED:
        return None
    node = trace.converged_node
    assert node is not None
    return node, trace.belief[node]


def replay_session(
    kg: KnowledgeGraph,
    session_id: str,
    query: str,
    config: SessionConfig,
    observations: Sequence[tuple[Bundle, Feedback]],
    pending_bundle: Bundle | None = None,
) -> SessionTrace:
    """Rebuild a trace from recorded (bundle, feedback) pairs.

    Bundles come from the record, not the policy, so a replayed trace is
    faithful to what was actually shown.
    """
    belief = prior(kg)
    steps: list[SessionStep] = []
    status = ACTIVE
    converged_node: str | None = None
    if belief.max_mass() >= config.convergence_threshold:
        status, converged_node = CONVERGED, belief.argmax()
        if observations or pending_bundle is not None:
            raise SessionError("log has steps for a session that converged at start")
    for i, (bundle, y) in enumerate(observations):
        if status != ACTIVE:
            raise SessionError("log has feedback after a terminal state")
        belief = update(belief, kg, bundle.products, y, config.noise)
        steps.append(SessionStep(i, bundle, y, belief))
        if belief.max_mass() >= config.convergence_threshold:
            status, converged_node = CONVERGED, belief.argmax()
        elif len(steps) >= config.max_steps:
            status = EXHAUSTED
    if pending_bundle is not None:
        if status != ACTIVE:
            raise SessionError("log has a pending bundle after a terminal state")
        steps.append(SessionStep(len(steps), pending_bundle, None, None))
    return SessionTrace(
        session_id=session_id,
        kg_id=kg.id,
        query=query,
        config=config,
        belief=belief,
        steps=tuple(steps),
        status=status,
        converged_node=converged_node,
    )


def ensure_pending(kg: KnowledgeGraph, trace: SessionTrace) -> SessionTrace:
    """Reopen the pending step for an active trace that lacks one.

    A crash can land between scoring feedback and choosing the next bundle;
    the policy choice is deterministic in (seed, step), so regenerating it
    here yields the bundle the service would have shown.
    """
    if trace.status != ACTIVE or trace.pending_step is not None:
        return trace
    bundle = _choose_bundle(kg, trace.belief, trace.config, len(trace.steps))
    return replace(
        trace, steps=trace.steps + (SessionStep(len(trace.steps), bundle, None, None),)
    )
