import itertools
import math

import numpy as np
import pytest

from lexlearn.design import (
    MAX_CANDIDATES,
    Bundle,
    enumerate_bundles,
    expected_information_gain,
    kl_divergence,
    predictive,
    select_bundle,
)
from lexlearn.inference import NOCLICK, BeliefState, Feedback, NoiseConfig, outcome_distribution, prior
from lexlearn.taxonomy import kg_from_dict

from conftest import random_kg
from oracles import oracle_mutual_information

NOISE = NoiseConfig(epsilon=0.05)


def entropy(mass):
    return -sum(p * math.log(p) for p in mass if p > 0)


class TestBundle:
    def test_canonical_order(self):
        assert Bundle.of(["P4", "P1"]).products == ("P1", "P4")

    def test_rejects_duplicates(self):
        with pytest.raises(ValueError, match="duplicate"):
            Bundle.of(["P1", "P1"])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            Bundle.of([])


class TestEnumerateBundles:
    def test_figure2_pairs(self, figure2):
        bundles = enumerate_bundles(figure2, 2)
        assert len(bundles) == 6
        assert [b.products for b in bundles] == [
            ("P1", "P2"), ("P1", "P3"), ("P1", "P4"),
            ("P2", "P3"), ("P2", "P4"), ("P3", "P4"),
        ]

    def test_full_size_single_bundle(self, figure2):
        bundles = enumerate_bundles(figure2, 4)
        assert len(bundles) == 1
        assert bundles[0].products == ("P1", "P2", "P3", "P4")

    @pytest.mark.parametrize("n", [0, 5, -1])
    def test_out_of_range(self, figure2, n):
        with pytest.raises(ValueError, match="bundle size"):
            enumerate_bundles(figure2, n)

    def test_candidate_cap(self):
        products = [
            {"id": f"p{i:02d}", "label": f"P{i}", "features": ["f"]} for i in range(25)
        ]
        kg = kg_from_dict({
            "id": "big",
            "products": products,
            "nodes": [{
                "id": "root", "label": "root", "parent": None, "features": ["r"],
                "extension": [p["id"] for p in products],
            }],
        })
        assert math.comb(25, 12) > MAX_CANDIDATES
        with pytest.raises(ValueError, match="exceed the cap"):
            enumerate_bundles(kg, 12)


def belief(**mass):
    return BeliefState(kg_id="kg", mass=mass)


class TestKlDivergence:
    def test_identical_is_zero(self):
        p = belief(a=0.3, b=0.7)
        assert kl_divergence(p, p) == 0.0

    def test_point_mass_vs_uniform(self):
        p = belief(a=1.0, b=0.0)
        q = belief(a=0.5, b=0.5)
        assert kl_divergence(p, q) == pytest.approx(math.log(2))

    def test_hand_computed(self):
        p = belief(a=0.75, b=0.25)
        q = belief(a=0.5, b=0.5)
        expected = 0.75 * math.log(1.5) + 0.25 * math.log(0.5)
        assert kl_divergence(p, q) == pytest.approx(expected)
        assert kl_divergence(p, q) == pytest.approx(0.130812, abs=1e-6)

    def test_mismatched_nodes_rejected(self):
        with pytest.raises(ValueError, match="different node sets"):
            kl_divergence(belief(a=1.0), belief(b=1.0))

    def test_support_violation_rejected(self):
        with pytest.raises(ValueError, match="support"):
            kl_divergence(belief(a=0.5, b=0.5), belief(a=1.0, b=0.0))

    def test_nonnegative_on_random_pairs(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            k = int(rng.integers(2, 6))
            raw_p = rng.random(k) + 1e-9
            raw_q = rng.random(k) + 1e-9
            names = [f"n{i}" for i in range(k)]
            p = BeliefState("kg", dict(zip(names, raw_p / raw_p.sum())))
            q = BeliefState("kg", dict(zip(names, raw_q / raw_q.sum())))
            d = kl_divergence(p, q)
            assert d >= 0.0
            if max(abs(p.mass[n] - q.mass[n]) for n in names) > 1e-12:
                assert d > 0.0


class TestPredictive:
    def test_single_node_kg(self):
        kg = kg_from_dict({
            "id": "one",
            "products": [
                {"id": "p1", "label": "P1", "features": ["a"]},
                {"id": "p2", "label": "P2", "features": ["b"]},
            ],
            "nodes": [{"id": "root", "label": "root", "parent": None,
                       "features": ["r"], "extension": ["p1", "p2"]}],
        })
        pred = predictive(prior(kg), kg, ("p1", "p2"), NOISE)
        assert pred == outcome_distribution(kg, "root", ("p1", "p2"), NOISE)

    def test_sums_to_one(self, figure2):
        pred = predictive(prior(figure2), figure2, ("P3", "P4"), NOISE)
        assert len(pred) == 3
        assert sum(pred.values()) == pytest.approx(1.0, abs=1e-9)

    def test_is_mixture(self, figure2):
        p = prior(figure2)
        pred = predictive(p, figure2, ("P3", "P4"), NOISE)
        for y in pred:
            expected = sum(
                p.mass[n] * outcome_distribution(figure2, n, ("P3", "P4"), NOISE)[y]
                for n in figure2.nodes
            )
            assert pred[y] == pytest.approx(expected, abs=1e-15)


class TestExpectedInformationGain:
    def test_identical_likelihoods_give_zero(self):
        # every node has the same extension, so no outcome separates them
        kg = kg_from_dict({
            "id": "flat",
            "products": [
                {"id": "p1", "label": "P1", "features": ["a"]},
                {"id": "p2", "label": "P2", "features": ["b"]},
            ],
            "nodes": [
                {"id": "root", "label": "root", "parent": None, "features": ["r"],
                 "extension": ["p1", "p2"]},
                {"id": "a", "label": "a", "parent": "root", "features": ["x"],
                 "extension": ["p1", "p2"]},
            ],
        })
        report = expected_information_gain(prior(kg), kg, ("p1", "p2"), NOISE)
        assert report.eig == pytest.approx(0.0, abs=1e-12)

    def test_point_mass_belief_gives_zero(self, figure2):
        mass = {n: 0.0 for n in figure2.nodes}
        mass["shoes"] = 1.0
        b = BeliefState(figure2.id, mass)
        report = expected_information_gain(b, figure2, ("P3", "P4"), NOISE)
        assert report.eig == pytest.approx(0.0, abs=1e-12)

    def test_matches_mutual_information_figure2(self, figure2):
        p = prior(figure2)
        for bundle in enumerate_bundles(figure2, 2):
            report = expected_information_gain(p, figure2, bundle, NOISE)
            mi = oracle_mutual_information(dict(p.mass), figure2, bundle.products, 0.05, 0.05)
            assert report.eig == pytest.approx(mi, abs=1e-9)

    def test_matches_mutual_information_random(self):
        rng = np.random.default_rng(17)
        for _ in range(30):
            kg = random_kg(rng)
            p = prior(kg)
            n = int(rng.integers(1, len(kg.products) + 1))
            bundle = enumerate_bundles(kg, n)[0]
            report = expected_information_gain(p, kg, bundle, NOISE)
            mi = oracle_mutual_information(dict(p.mass), kg, bundle.products, 0.05, 0.05)
            assert report.eig == pytest.approx(mi, abs=1e-9)

    def test_bounded_by_entropies(self, figure2):
        p = prior(figure2)
        for bundle in enumerate_bundles(figure2, 2):
            report = expected_information_gain(p, figure2, bundle, NOISE)
            assert 0.0 <= report.eig
            assert report.eig <= entropy(p.mass.values()) + 1e-12
            assert report.eig <= entropy(report.predictive.values()) + 1e-12

    def test_relabeling_invariance(self, figure2, figure2_doc):
        import json

        doc = json.loads(json.dumps(figure2_doc))
        pmap = {"P1": "Q7", "P2": "Q3", "P3": "Q9", "P4": "Q5"}
        nmap = {n["id"]: f"node_{i}" for i, n in enumerate(doc["nodes"])}
        for prod in doc["products"]:
            prod["id"] = pmap[prod["id"]]
        for node in doc["nodes"]:
            node["id"] = nmap[node["id"]]
            node["parent"] = None if node["parent"] is None else nmap[node["parent"]]
            node["extension"] = [pmap[p] for p in node["extension"]]
        kg2 = kg_from_dict(doc)
        r1 = expected_information_gain(prior(figure2), figure2, ("P3", "P4"), NOISE)
        r2 = expected_information_gain(prior(kg2), kg2, ("Q5", "Q9"), NOISE)
        assert r1.eig == pytest.approx(r2.eig, abs=1e-12)


class TestSelectBundle:
    def test_deterministic(self, figure2):
        p = prior(figure2)
        first = select_bundle(p, figure2, 2, NOISE)
        second = select_bundle(p, figure2, 2, NOISE)
        assert first[0] == second[0]
        assert [r.bundle for r in first[1]] == [r.bundle for r in second[1]]
        assert [r.eig for r in first[1]] == [r.eig for r in second[1]]

    def test_table_exhaustive_and_sorted(self, figure2):
        _, table = select_bundle(prior(figure2), figure2, 2, NOISE)
        assert len(table) == math.comb(4, 2)
        eigs = [r.eig for r in table]
        assert eigs == sorted(eigs, reverse=True)

    def test_point_mass_ties_break_lexicographically(self, figure2):
        mass = {n: 0.0 for n in figure2.nodes}
        mass["shoes"] = 1.0
        b = BeliefState(figure2.id, mass)
        best, table = select_bundle(b, figure2, 2, NOISE)
        assert best.products == ("P1", "P2")
        assert all(r.eig == pytest.approx(0.0, abs=1e-12) for r in table)

    def test_symmetric_bundles_have_equal_eig(self):
        # two leaves that mirror each other under swapping p1 <-> p2
        kg = kg_from_dict({
            "id": "sym",
            "products": [
                {"id": "p1", "label": "P1", "features": ["a"]},
                {"id": "p2", "label": "P2", "features": ["b"]},
                {"id": "p3", "label": "P3", "features": ["c"]},
            ],
            "nodes": [
                {"id": "root", "label": "root", "parent": None, "features": ["r"],
                 "extension": ["p1", "p2", "p3"]},
                {"id": "a", "label": "a", "parent": "root", "features": ["x"],
                 "extension": ["p1"]},
                {"id": "b", "label": "b", "parent": "root", "features": ["y"],
                 "extension": ["p2"]},
            ],
        })
        p = prior(kg)
        r13 = expected_information_gain(p, kg, ("p1", "p3"), NOISE)
        r23 = expected_information_gain(p, kg, ("p2", "p3"), NOISE)
        assert r13.eig == pytest.approx(r23.eig, abs=1e-12)

    def test_report_serialization_uses_noclick_key(self, figure2):
        _, table = select_bundle(prior(figure2), figure2, 2, NOISE)
        row = table[0].to_dict()
        assert set(row) == {"bundle", "eig", "predictive"}
        assert "__noclick__" in row["predictive"]
        assert sum(row["predictive"].values()) == pytest.approx(1.0, abs=1e-9)
