"""Human-in-the-loop lexical learning for product search.

Treats the nodes of a product taxonomy as meaning hypotheses for an unknown
query word, maintains an exact Bayesian posterior over them from click
feedback, and picks each product bundle shown to the user by maximizing
expected information gain.
"""

from .design import (
    Bundle,
    EigReport,
    enumerate_bundles,
    expected_information_gain,
    kl_divergence,
    predictive,
    select_bundle,
)
from .inference import (
    NOCLICK,
    BeliefState,
    Feedback,
    NoiseConfig,
    click_weight,
    outcome_likelihood,
    prior,
    update,
    update_batch,
)
from .session import (
    SessionConfig,
    SessionTrace,
    lexicon_entry,
    start_session,
    submit_feedback,
)
from .simulator import SimulatedUser, compare_policies, run_trial, simulate_click
from .taxonomy import (
    KnowledgeGraph,
    ext,
    jaccard_distance,
    load_kg,
    ontological_distinctiveness,
    siblings,
)

__version__ = "0.1.0"
