"""Shared fixtures: memoized artifacts and random finite trees."""

import random
from fractions import Fraction

import pytest

import treeshift as ts

_ARTIFACTS = {}


def get_artifact(n, kappa, q=None):
    """Generate-once cache; artifacts are deterministic and immutable."""
    q = q if q is not None else ts.LINEAR_Q
    key = (n, "inf" if kappa is ts.INF else kappa, q)
    if key not in _ARTIFACTS:
        _ARTIFACTS[key] = ts.generate(ts.CounterexampleRequest(n=n, kappa=kappa, q=q))
    return _ARTIFACTS[key]


@pytest.fixture(scope="session")
def artifact_n1():
    return get_artifact(1, 0)


@pytest.fixture(scope="session")
def artifact_n1_k3():
    return get_artifact(1, 3)


@pytest.fixture(scope="session")
def artifact_n2():
    return get_artifact(2, 0)


def random_weighted_tree(rng: random.Random, max_vertices=200):
    """Random finite explicit tree with rational squared weights in [0, 4]."""
    size = rng.randint(2, max_vertices)
    vertices = [ts.Explicit(i) for i in range(size)]
    edges = []
    for i in range(1, size):
        parent = vertices[rng.randrange(i)]
        edges.append((parent, vertices[i]))
    tree = ts.ExplicitTree(edges)
    weights = {}
    for v in vertices[1:]:
        weights[v] = Fraction(rng.randint(0, 400), 100) if rng.random() > 0.05 else Fraction(0)
    return tree, ts.ExplicitWeights.for_tree(tree, weights)
