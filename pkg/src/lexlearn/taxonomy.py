"""Knowledge-graph data model and the structural quantities behind the prior.

A knowledge graph here is a rooted tree of nodes. Every node carries a
feature set and an extension (the products it covers). Nodes act as the
hypothesis space for the meaning of an unknown query word, so validation is
strict: a graph that loads is guaranteed to be a usable hypothesis space.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Any, Iterable, Mapping

__all__ = [
    "DEFAULT_OD_MIN",
    "KGError",
    "KGParseError",
    "KGValidationError",
    "Product",
    "Node",
    "KnowledgeGraph",
    "load_kg",
    "kg_from_dict",
    "kg_to_dict",
    "serialize_kg",
    "ext",
    "siblings",
    "jaccard_distance",
    "ontological_distinctiveness",
]

# Floor applied to ontological distinctiveness so no node ever gets zero
# prior mass (a zero-prior hypothesis could never be learned).
DEFAULT_OD_MIN = 0.01


class KGError(ValueError):
    """Base class for knowledge-graph loading failures."""


class KGParseError(KGError):
    """The document is not well-formed (bad JSON or missing/mistyped fields)."""


class KGValidationError(KGError):
    """The document parsed but violates a structural invariant."""


@dataclass(frozen=True)
class Product:
    id: str
    label: str
    features: frozenset[str]


@dataclass(frozen=True)
class Node:
    id: str
    label: str
    parent: str | None
    features: frozenset[str]
    extension: frozenset[str]


@dataclass(frozen=True)
class KnowledgeGraph:
    id: str
    products: Mapping[str, Product]
    nodes: Mapping[str, Node]
    root_id: str = field(compare=False)

    def node(self, node_id: str) -> Node:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise KeyError(f"unknown node id: {node_id!r}") from None

    def product(self, product_id: str) -> Product:
        try:
            return self.products[product_id]
        except KeyError:
            raise KeyError(f"unknown product id: {product_id!r}") from None

    def children(self, node_id: str) -> frozenset[str]:
        self.node(node_id)
        return frozenset(n.id for n in self.nodes.values() if n.parent == node_id)


def _require(doc: Mapping[str, Any], key: str, kind: type, where: str) -> Any:
    if key not in doc:
        raise KGParseError(f"{where}: missing field {key!r}")
    value = doc[key]
    if not isinstance(value, kind):
        raise KGParseError(f"{where}: field {key!r} must be {kind.__name__}")
    return value


def _feature_set(raw: Any, where: str) -> frozenset[str]:
    if not isinstance(raw, list) or not all(isinstance(f, str) for f in raw):
        raise KGParseError(f"{where}: 'features' must be an array of strings")
    return frozenset(raw)


def kg_from_dict(doc: Mapping[str, Any]) -> KnowledgeGraph:
    """Build and validate a KnowledgeGraph from a parsed KG document."""
    if not isinstance(doc, Mapping):
        raise KGParseError("KG document must be a JSON object")
    kg_id = _require(doc, "id", str, "document")

    products: dict[str, Product] = {}
    for raw in _require(doc, "products", list, "document"):
        if not isinstance(raw, Mapping):
            raise KGParseError("each product must be an object")
        pid = _require(raw, "id", str, "product")
        if not pid:
            raise KGValidationError("product id must be non-empty")
        if pid in products:
            raise KGValidationError(f"duplicate product id {pid!r}")
        features = _feature_set(raw.get("features"), f"product {pid!r}")
        if not features:
            raise KGValidationError(f"product {pid!r} has an empty feature set")
        products[pid] = Product(id=pid, label=_require(raw, "label", str, f"product {pid!r}"), features=features)

    nodes: dict[str, Node] = {}
    for raw in _require(doc, "nodes", list, "document"):
        if not isinstance(raw, Mapping):
            raise KGParseError("each node must be an object")
        nid = _require(raw, "id", str, "node")
        if not nid:
            raise KGValidationError("node id must be non-empty")
        if nid in nodes:
            raise KGValidationError(f"duplicate node id {nid!r}")
        parent = raw.get("parent")
        if parent is not None and not isinstance(parent, str):
            raise KGParseError(f"node {nid!r}: 'parent' must be a string or null")
        features = _feature_set(raw.get("features"), f"node {nid!r}")
        if not features:
            raise KGValidationError(f"node {nid!r} has an empty feature set")
        extension_raw = _require(raw, "extension", list, f"node {nid!r}")
        if not all(isinstance(p, str) for p in extension_raw):
            raise KGParseError(f"node {nid!r}: 'extension' must be an array of product ids")
        nodes[nid] = Node(
            id=nid,
            label=_require(raw, "label", str, f"node {nid!r}"),
            parent=parent,
            features=features,
            extension=frozenset(extension_raw),
        )

    _validate(kg_id, products, nodes)
    root_id = next(n.id for n in nodes.values() if n.parent is None)
    return KnowledgeGraph(id=kg_id, products=products, nodes=nodes, root_id=root_id)


def _validate(kg_id: str, products: dict[str, Product], nodes: dict[str, Node]) -> None:
    if not products:
        raise KGValidationError(f"KG {kg_id!r} has no products")
    if not nodes:
        raise KGValidationError(f"KG {kg_id!r} has no nodes")

    roots = [n.id for n in nodes.values() if n.parent is None]
    if len(roots) == 0:
        raise KGValidationError("no root node (every node has a parent)")
    if len(roots) > 1:
        raise KGValidationError(f"multiple roots: {sorted(roots)}")
    root = roots[0]

    for node in nodes.values():
        if node.parent is not None and node.parent not in nodes:
            raise KGValidationError(f"node {node.id!r} references unknown parent {node.parent!r}")
        if not node.extension:
            raise KGValidationError(f"node {node.id!r} has an empty extension")
        missing = node.extension - products.keys()
        if missing:
            raise KGValidationError(
                f"node {node.id!r} extension names unknown products: {sorted(missing)}"
            )

    # Acyclicity: walking parents from any node must reach the root.
    for node in nodes.values():
        seen: set[str] = set()
        cur: str | None = node.id
        while cur is not None:
            if cur in seen:
                raise KGValidationError(f"parent cycle involving node {cur!r}")
            seen.add(cur)
            cur = nodes[cur].parent

    for node in nodes.values():
        if node.parent is not None:
            parent_ext = nodes[node.parent].extension
            if not node.extension <= parent_ext:
                raise KGValidationError(
                    f"node {node.id!r} extension is not a subset of its parent's"
                )

    if nodes[root].extension != frozenset(products):
        raise KGValidationError(
            f"root {root!r} extension must equal the full product set"
        )


def load_kg(source: bytes | str | IO[bytes] | IO[str]) -> KnowledgeGraph:
    """Parse and validate a KG document from bytes, text, or a file object."""
    if hasattr(source, "read"):
        source = source.read()  # type: ignore[union-attr]
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise KGParseError(f"malformed KG document: {exc}") from exc
    return kg_from_dict(doc)


def kg_to_dict(kg: KnowledgeGraph) -> dict[str, Any]:
    return {
        "id": kg.id,
        "products": [
            {"id": p.id, "label": p.label, "features": sorted(p.features)}
            for p in kg.products.values()
        ],
        "nodes": [
            {
                "id": n.id,
                "label": n.label,
                "parent": n.parent,
                "features": sorted(n.features),
                "extension": sorted(n.extension),
            }
            for n in kg.nodes.values()
        ],
    }


def serialize_kg(kg: KnowledgeGraph) -> str:
    return json.dumps(kg_to_dict(kg), indent=2, sort_keys=False)


def ext(kg: KnowledgeGraph, node_id: str) -> frozenset[str]:
    """The set of product ids a node covers."""
    return kg.node(node_id).extension


def siblings(kg: KnowledgeGraph, node_id: str) -> frozenset[str]:
    """All nodes sharing the node's parent, excluding the node itself."""
    node = kg.node(node_id)
    if node.parent is None:
        return frozenset()
    return frozenset(
        n.id for n in kg.nodes.values() if n.parent == node.parent and n.id != node_id
    )


def jaccard_distance(a: Iterable[str], b: Iterable[str]) -> float:
    """1 - |a ∩ b| / |a ∪ b| for non-empty feature sets."""
    sa, sb = frozenset(a), frozenset(b)
    if not sa or not sb:
        raise ValueError("jaccard_distance requires non-empty sets")
    return 1.0 - len(sa & sb) / len(sa | sb)


def ontological_distinctiveness(
    kg: KnowledgeGraph, node_id: str, od_min: float = DEFAULT_OD_MIN
) -> float:
    """Mean Jaccard distance between a node's features and each sibling's.

    Sibling-less nodes (the root, only children) score 1.0. The result is
    floored at od_min so every node keeps strictly positive prior mass.
    """
    node = kg.node(node_id)
    sibs = siblings(kg, node_id)
    if not sibs:
        return 1.0
    mean = sum(jaccard_distance(node.features, kg.node(s).features) for s in sibs) / len(sibs)
    return max(mean, od_min)
