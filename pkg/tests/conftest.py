import json
from pathlib import Path

import numpy as np
import pytest

from lexlearn.taxonomy import KnowledgeGraph, kg_from_dict, load_kg

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def figure2_path() -> Path:
    return FIXTURES / "figure2.json"


@pytest.fixture(scope="session")
def figure2(figure2_path: Path) -> KnowledgeGraph:
    return load_kg(figure2_path.read_bytes())


@pytest.fixture(scope="session")
def figure2_doc(figure2_path: Path) -> dict:
    return json.loads(figure2_path.read_text())


def random_kg(rng: np.random.Generator, max_nodes: int = 6, max_products: int = 5) -> KnowledgeGraph:
    """A small random valid KG: random tree, nested extensions, random features."""
    n_products = int(rng.integers(2, max_products + 1))
    n_nodes = int(rng.integers(2, max_nodes + 1))
    pool = [f"f{i}" for i in range(8)]

    def feats() -> list[str]:
        k = int(rng.integers(1, 4))
        return sorted(rng.choice(pool, size=k, replace=False).tolist())

    products = [
        {"id": f"p{i}", "label": f"Product {i}", "features": feats()}
        for i in range(n_products)
    ]
    all_ids = [p["id"] for p in products]
    nodes = [
        {"id": "n0", "label": "root", "parent": None, "features": feats(), "extension": all_ids}
    ]
    exts = {"n0": list(all_ids)}
    for i in range(1, n_nodes):
        parent = f"n{int(rng.integers(0, i))}"
        parent_ext = exts[parent]
        k = int(rng.integers(1, len(parent_ext) + 1))
        extension = sorted(rng.choice(parent_ext, size=k, replace=False).tolist())
        nid = f"n{i}"
        exts[nid] = extension
        nodes.append(
            {"id": nid, "label": nid, "parent": parent, "features": feats(), "extension": extension}
        )
    return kg_from_dict({"id": f"random-{rng.integers(1 << 30)}", "products": products, "nodes": nodes})
