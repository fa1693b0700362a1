"""Shared model builders for the test suite."""

from __future__ import annotations

import random

from treedim import TreeModel, Variable


def build_model(var_specs, edges) -> TreeModel:
    """Build a model from (name, cardinality, observed) triples and name pairs."""
    variables = tuple(
        Variable(i, name, card, observed)
        for i, (name, card, observed) in enumerate(var_specs)
    )
    ids = {v.name: v.id for v in variables}
    return TreeModel(variables, tuple((ids[a], ids[b]) for a, b in edges))


def two_branch_hierarchy(root_cardinality: int = 2) -> TreeModel:
    """Nine-variable hierarchy: a root over two latent hubs, three ternary
    leaves each.  With a binary root: ds 45, de 43."""
    return build_model(
        [("X1", root_cardinality, False), ("X2", 3, False), ("X3", 3, False)]
        + [(f"Y{i}", 3, True) for i in range(1, 7)],
        [
            ("X1", "X2"),
            ("X1", "X3"),
            ("X2", "Y1"),
            ("X2", "Y2"),
            ("X2", "Y3"),
            ("X3", "Y4"),
            ("X3", "Y5"),
            ("X3", "Y6"),
        ],
    )


def collapsed_hierarchy() -> TreeModel:
    """Eight-variable hierarchy: two adjacent latent hubs, three ternary
    leaves each.  ds 44, de 44."""
    return build_model(
        [("X2", 3, False), ("X3", 3, False)]
        + [(f"Y{i}", 3, True) for i in range(1, 7)],
        [
            ("X2", "Y1"),
            ("X2", "Y2"),
            ("X2", "Y3"),
            ("X2", "X3"),
            ("X3", "Y4"),
            ("X3", "Y5"),
            ("X3", "Y6"),
        ],
    )


def latent_class_model(latent_card: int, leaf_cards) -> TreeModel:
    """One latent hub with observed leaves."""
    specs = [("Z", latent_card, False)] + [
        (f"Y{i}", card, True) for i, card in enumerate(leaf_cards)
    ]
    edges = [("Z", f"Y{i}") for i in range(len(leaf_cards))]
    return build_model(specs, edges)


def random_tree_model(
    rng: random.Random, max_vars: int = 7, max_latent: int = 3
) -> TreeModel:
    """Random valid tree with cards <= 3 and at most max_latent latent nodes."""
    n = rng.randint(1, max_vars)
    cards = []
    latent = []
    for _ in range(n):
        cards.append(rng.randint(1, 3) if rng.random() < 0.2 else rng.randint(2, 3))
        latent.append(rng.random() < 0.45)
    latent_idx = [i for i, flag in enumerate(latent) if flag]
    while len(latent_idx) > max_latent:
        latent[latent_idx.pop(rng.randrange(len(latent_idx)))] = False
    if all(latent):
        latent[rng.randrange(n)] = False
    variables = tuple(
        Variable(i, f"V{i}", cards[i], not latent[i]) for i in range(n)
    )
    edges = tuple((rng.randrange(i), i) for i in range(1, n))
    return TreeModel(variables, edges)


def structural_signature(model: TreeModel):
    """Name-based structure, independent of variable ids."""
    names = {v.id: v.name for v in model.variables}
    return (
        frozenset((v.name, v.cardinality, v.observed) for v in model.variables),
        frozenset(frozenset((names[a], names[b])) for a, b in model.edges),
    )
