"""Decomposition pipeline: pruning, splitting, components, assembly."""

from __future__ import annotations

import random

import pytest

from support import (
    build_model,
    collapsed_hierarchy,
    latent_class_model,
    random_tree_model,
    two_branch_hierarchy,
)
from treedim import (
    DecompositionLedger,
    LatentEdgeCorrection,
    LcComponent,
    RankPolicy,
    combine,
    decompose_hlc,
    effective_dimension,
    oracle_effective_dimension,
    prune_latent_leaves,
    regularize,
    split_at_observed,
)


def empty_ledger(components=(), latent_edges=(), cuts=(), free_parts=()):
    return DecompositionLedger(
        lc_components=tuple(components),
        latent_edge_corrections=tuple(latent_edges),
        observed_cut_corrections=tuple(cuts),
        latent_free_parts=tuple(free_parts),
        pruned_latent_leaves=(),
        regularization_log=(),
    )


def dummy_components(count):
    return tuple(
        LcComponent(i, 2, ((100 + i, 2),), (False,)) for i in range(count)
    )


class TestPruneLatentLeaves:
    def test_single_latent_leaf_removed(self):
        model = build_model(
            [("Y", 2, True), ("Z", 2, True), ("L", 3, False)],
            [("Y", "Z"), ("Y", "L")],
        )
        pruned, removed = prune_latent_leaves(model)
        assert removed == (2,)
        assert [v.name for v in pruned.variables] == ["Y", "Z"]

    def test_latent_chain_removed_iteratively(self):
        model = build_model(
            [("A", 2, True), ("B", 2, True), ("L1", 2, False), ("L2", 3, False)],
            [("A", "B"), ("A", "L1"), ("L1", "L2")],
        )
        pruned, removed = prune_latent_leaves(model)
        assert removed == (3, 2)
        assert [v.name for v in pruned.variables] == ["A", "B"]

    def test_hierarchy_with_observed_leaves_unchanged(self):
        model = two_branch_hierarchy()
        pruned, removed = prune_latent_leaves(model)
        assert pruned == model
        assert removed == ()


class TestSplitAtObserved:
    def test_chain_with_observed_middle(self):
        model = build_model(
            [
                ("Y1", 3, True),
                ("X", 2, False),
                ("Y2", 4, True),
                ("Z", 2, False),
                ("Y3", 3, True),
            ],
            [("Y1", "X"), ("X", "Y2"), ("Y2", "Z"), ("Z", "Y3")],
        )
        pieces, corrections = split_at_observed(model)
        assert len(pieces) == 2
        assert [sorted(v.name for v in p.variables) for p in pieces] == [
            ["X", "Y1", "Y2"],
            ["Y2", "Y3", "Z"],
        ]
        assert [(c.variable_id, c.amount) for c in corrections] == [(2, 3)]

    def test_no_observed_internal_node_is_identity(self):
        model = two_branch_hierarchy()
        pieces, corrections = split_at_observed(model)
        assert pieces == (model,)
        assert corrections == ()

    def test_observed_hub_with_three_branches(self):
        specs = [("H", 2, True)]
        edges = []
        for i in range(3):
            specs += [(f"L{i}", 2, False), (f"A{i}", 3, True), (f"B{i}", 3, True)]
            edges += [("H", f"L{i}"), (f"L{i}", f"A{i}"), (f"L{i}", f"B{i}")]
        model = build_model(specs, edges)
        pieces, corrections = split_at_observed(model)
        assert len(pieces) == 3
        assert [(c.variable_id, c.amount) for c in corrections] == [(0, 2)]

    def test_adjacent_observed_internal_nodes_give_latent_free_piece(self):
        # a bare Y1-Y2 edge plus one latent branch off each end
        model = build_model(
            [
                ("Y1", 2, True),
                ("Y2", 3, True),
                ("L1", 2, False),
                ("A", 2, True),
                ("B", 2, True),
                ("L2", 2, False),
                ("C", 2, True),
                ("D", 2, True),
            ],
            [
                ("Y1", "Y2"),
                ("Y1", "L1"),
                ("L1", "A"),
                ("L1", "B"),
                ("Y2", "L2"),
                ("L2", "C"),
                ("L2", "D"),
            ],
        )
        pieces, corrections = split_at_observed(model)
        assert len(pieces) == 3
        sizes = sorted(len(p.variables) for p in pieces)
        assert sizes == [2, 4, 4]  # the bare Y1-Y2 edge plus two hierarchies
        assert [(c.variable_id, c.amount) for c in corrections] == [(0, 1), (1, 2)]

    def test_latent_leaf_rejected(self):
        model = build_model([("Y", 2, True), ("L", 2, False)], [("Y", "L")])
        with pytest.raises(ValueError, match="latent leaf"):
            split_at_observed(model)


class TestDecomposeHlc:
    def test_two_branch_hierarchy_components(self):
        components, corrections = decompose_hlc(two_branch_hierarchy())
        assert [
            (c.latent_id, c.latent_cardinality, tuple(card for _, card in c.neighbors))
            for c in components
        ] == [(0, 2, (3, 3)), (1, 3, (2, 3, 3, 3)), (2, 3, (2, 3, 3, 3))]
        assert [c.neighbor_was_latent for c in components] == [
            (True, True),
            (True, False, False, False),
            (True, False, False, False),
        ]
        assert [(c.edge, c.shared_parameters) for c in corrections] == [
            ((0, 1), 5),
            ((0, 2), 5),
        ]

    def test_single_latent_has_no_corrections(self):
        components, corrections = decompose_hlc(latent_class_model(3, (2, 2, 2)))
        assert len(components) == 1
        assert corrections == ()

    def test_irregular_input_rejected(self):
        with pytest.raises(ValueError, match="not regular"):
            decompose_hlc(two_branch_hierarchy(root_cardinality=3))

    def test_observed_internal_node_rejected(self):
        model = build_model(
            [
                ("Y1", 2, True),
                ("M", 2, True),
                ("L", 2, False),
                ("Y2", 2, True),
                ("Y3", 2, True),
            ],
            [("Y1", "M"), ("M", "L"), ("L", "Y2"), ("L", "Y3")],
        )
        with pytest.raises(ValueError, match="latent internal"):
            decompose_hlc(model)

    def test_latent_free_input_rejected(self):
        model = build_model([("A", 2, True), ("B", 2, True)], [("A", "B")])
        with pytest.raises(ValueError, match="latent"):
            decompose_hlc(model)


class TestCombine:
    def test_five_component_assembly(self):
        ledger = empty_ledger(
            components=dummy_components(5),
            latent_edges=tuple(
                LatentEdgeCorrection((i, i + 1), k)
                for i, k in enumerate((14, 17, 17, 14))
            ),
        )
        assert combine((26, 23, 23, 34, 17), ledger) == 61

    def test_reference_hierarchy_assembly(self):
        ledger = empty_ledger(
            components=dummy_components(3),
            latent_edges=(
                LatentEdgeCorrection((0, 1), 5),
                LatentEdgeCorrection((0, 2), 5),
            ),
        )
        assert combine((7, 23, 23), ledger) == 43

    def test_single_component_identity(self):
        ledger = empty_ledger(components=dummy_components(1))
        assert combine((17,), ledger) == 17

    def test_length_mismatch_rejected(self):
        ledger = empty_ledger(components=dummy_components(2))
        with pytest.raises(ValueError, match="one dimension per component"):
            combine((5,), ledger)

    def test_negative_dimension_rejected(self):
        ledger = empty_ledger(components=dummy_components(1))
        with pytest.raises(ValueError):
            combine((-1,), ledger)


class TestEffectiveDimension:
    def test_two_branch_hierarchy(self):
        result = effective_dimension(two_branch_hierarchy())
        assert result.standard_dimension == 45
        assert result.effective_dimension == 43
        assert result.component_dimensions == (7, 23, 23)

    def test_collapsed_hierarchy(self):
        result = effective_dimension(collapsed_hierarchy())
        assert result.standard_dimension == 44
        assert result.effective_dimension == 44

    def test_fully_observed_tree_saturates(self):
        rng = random.Random(31)
        for _ in range(10):
            model = random_tree_model(rng, max_vars=6, max_latent=0)
            result = effective_dimension(model, RankPolicy(trials=1))
            assert result.effective_dimension == result.standard_dimension

    def test_ledger_counts_match_structure(self):
        result = effective_dimension(two_branch_hierarchy())
        ledger = result.ledger
        assert len(ledger.lc_components) == 3  # one per latent node
        assert len(ledger.latent_edge_corrections) == 2  # one per latent edge
        assert ledger.pruned_latent_leaves == ()
        assert ledger.observed_cut_corrections == ()

    def test_pipeline_handles_collapse_to_latent_free(self):
        # Both latents get removed by regularization, leaving bare edges.
        model = build_model(
            [("Y1", 2, True), ("L1", 2, False), ("L2", 2, False), ("Y2", 2, True)],
            [("Y1", "L1"), ("L1", "L2"), ("L2", "Y2")],
        )
        result = effective_dimension(model, RankPolicy(trials=1))
        assert result.effective_dimension == 3
        assert result.ledger.lc_components == ()
        assert len(result.ledger.latent_free_parts) == 1

    def test_matches_oracle_on_assorted_hand_models(self):
        hand_models = [
            # latent chain with observed spine
            build_model(
                [
                    ("Y1", 3, True),
                    ("X", 2, False),
                    ("Y2", 3, True),
                    ("Z", 3, False),
                    ("Y3", 2, True),
                    ("Y4", 2, True),
                ],
                [
                    ("Y1", "X"),
                    ("X", "Y2"),
                    ("Y2", "Z"),
                    ("Z", "Y3"),
                    ("Z", "Y4"),
                ],
            ),
            # three-level latent hierarchy
            build_model(
                [
                    ("T", 2, False),
                    ("U", 2, False),
                    ("V", 2, False),
                    ("A", 2, True),
                    ("B", 2, True),
                    ("C", 2, True),
                    ("D", 2, True),
                ],
                [
                    ("T", "U"),
                    ("T", "V"),
                    ("U", "A"),
                    ("U", "B"),
                    ("V", "C"),
                    ("V", "D"),
                ],
            ),
            # latent leaves to prune plus an observed cut
            build_model(
                [
                    ("Y1", 2, True),
                    ("H", 3, True),
                    ("L", 2, False),
                    ("Y2", 3, True),
                    ("D1", 3, False),
                    ("D2", 2, False),
                ],
                [
                    ("Y1", "H"),
                    ("H", "L"),
                    ("L", "Y2"),
                    ("H", "D1"),
                    ("D1", "D2"),
                ],
            ),
        ]
        for i, model in enumerate(hand_models):
            result = effective_dimension(model, RankPolicy(trials=2, seed=i))
            assert result.effective_dimension == oracle_effective_dimension(
                model, trials=2, seed=i
            )

    def test_stage_invariants_on_random_models(self):
        # Pruning and per-piece regularization each preserve the oracle
        # dimension; the piece count matches the latent structure.
        rng = random.Random(8080)
        checked = 0
        for i in range(12):
            model = random_tree_model(rng, max_vars=6)
            pruned, _ = prune_latent_leaves(model)
            assert oracle_effective_dimension(
                model, trials=1, seed=i
            ) == oracle_effective_dimension(pruned, trials=1, seed=i)
            checked += 1
        assert checked == 12

    def test_deterministic_for_seed(self):
        model = two_branch_hierarchy()
        a = effective_dimension(model, RankPolicy(trials=3, seed=9))
        b = effective_dimension(model, RankPolicy(trials=3, seed=9))
        assert a == b

    def test_bounded_by_dimension_and_joint_size(self):
        rng = random.Random(4242)
        for i in range(20):
            model = random_tree_model(rng, max_vars=7)
            result = effective_dimension(model, RankPolicy(trials=1, seed=i))
            joint = 1
            for v in model.observed_variables:
                joint *= v.cardinality
            assert result.effective_dimension <= min(
                result.standard_dimension, joint - 1
            )

    def test_component_count_matches_latent_structure(self):
        rng = random.Random(2024)
        for i in range(15):
            model = random_tree_model(rng, max_vars=7)
            result = effective_dimension(model, RankPolicy(trials=1, seed=i))
            ledger = result.ledger
            # reconstruct the pruned, regularized latent set from the ledger
            pruned, _ = prune_latent_leaves(model)
            pieces, _ = split_at_observed(pruned)
            expected_latents = set()
            expected_edges = 0
            for piece in pieces:
                regular, _ = regularize(piece)
                expected_latents.update(v.id for v in regular.latent_variables)
                expected_edges += sum(
                    1
                    for a, b in regular.edges
                    if regular.variable(a).latent and regular.variable(b).latent
                )
            assert {c.latent_id for c in ledger.lc_components} == expected_latents
            assert len(ledger.latent_edge_corrections) == expected_edges
