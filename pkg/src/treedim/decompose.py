"""Reduction of a tree model to latent-class components plus corrections.

The effective dimension of a tree model is assembled from pieces that
are each cheap to rank:

* latent leaves contribute nothing to the observed joint and are pruned;
* every observed internal node splits the tree into per-edge pieces,
  over-counting the node's own distribution once per extra piece, which
  the observed-cut correction subtracts back out;
* inside a regular latent-internal piece, each latent node becomes one
  latent-class component over its neighbors, and each latent-latent edge
  contributes a shared-parameter correction equal to the size of the
  pair's joint table minus one;
* pieces without latent nodes contribute their standard dimension as is.

``effective_dimension`` runs the whole pipeline and keeps an audit trail
of every component and correction in a :class:`DecompositionLedger`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .model import (
    RegularizationStep,
    TreeModel,
    check_regular,
    regularize,
    require_valid,
    standard_dimension,
)
from .rank import DEFAULT_NUMERATOR_BOUND, DEFAULT_TRIALS, derive_seed, lc_rank_trials

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LcComponent:
    """A single latent variable with its neighbors treated as observed."""

    latent_id: int
    latent_cardinality: int
    neighbors: tuple[tuple[int, int], ...]  # (variable id, cardinality)
    neighbor_was_latent: tuple[bool, ...]

    def __post_init__(self) -> None:
        if self.latent_cardinality < 1:
            raise ValueError("latent cardinality must be >= 1")
        if not self.neighbors:
            raise ValueError("a latent-class component needs at least one neighbor")
        if any(card < 1 for _, card in self.neighbors):
            raise ValueError("neighbor cardinalities must be >= 1")
        if len(self.neighbor_was_latent) != len(self.neighbors):
            raise ValueError("one latent flag per neighbor required")

    def standard_dimension(self) -> int:
        c = self.latent_cardinality
        return (c - 1) + c * sum(card - 1 for _, card in self.neighbors)


@dataclass(frozen=True)
class LatentEdgeCorrection:
    """Shared parameters of a cut latent-latent edge: |X|*|Z| - 1."""

    edge: tuple[int, int]
    shared_parameters: int


@dataclass(frozen=True)
class ObservedCutCorrection:
    """Over-count at a split observed node: (pieces - 1) * (card - 1)."""

    variable_id: int
    amount: int


@dataclass(frozen=True)
class LatentFreePart:
    """A piece with no latent node; contributes its standard dimension."""

    variable_ids: tuple[int, ...]
    contribution: int


@dataclass(frozen=True)
class DecompositionLedger:
    lc_components: tuple[LcComponent, ...]
    latent_edge_corrections: tuple[LatentEdgeCorrection, ...]
    observed_cut_corrections: tuple[ObservedCutCorrection, ...]
    latent_free_parts: tuple[LatentFreePart, ...]
    pruned_latent_leaves: tuple[int, ...]
    regularization_log: tuple[RegularizationStep, ...]


@dataclass(frozen=True)
class RankPolicy:
    """Knobs of the randomized component rank computation."""

    trials: int = DEFAULT_TRIALS
    seed: int = 0
    numerator_bound: int = DEFAULT_NUMERATOR_BOUND


@dataclass(frozen=True)
class DimensionResult:
    standard_dimension: int
    effective_dimension: int
    ledger: DecompositionLedger
    component_dimensions: tuple[int, ...]
    component_trial_ranks: tuple[tuple[int, ...], ...]


def prune_latent_leaves(model: TreeModel) -> tuple[TreeModel, tuple[int, ...]]:
    """Drop latent leaves until none remain.

    A latent leaf is summed out of the observed joint entirely, so its
    conditional table never moves any observed probability; removing it
    leaves the effective dimension unchanged.  Removal can expose new
    latent leaves, so passes repeat until a fixpoint.
    """
    require_valid(model)
    variables = {v.id: v for v in model.variables}
    edges = set(model.edges)
    removed: list[int] = []

    def degree(vid: int) -> int:
        return sum(1 for a, b in edges if vid in (a, b))

    while True:
        leaves = [
            vid
            for vid in sorted(variables)
            if variables[vid].latent and degree(vid) <= 1
        ]
        if not leaves:
            break
        for vid in leaves:
            edges = {e for e in edges if vid not in e}
            del variables[vid]
            removed.append(vid)

    pruned = TreeModel(
        tuple(variables[k] for k in sorted(variables)), tuple(sorted(edges))
    )
    return pruned, tuple(removed)


def split_at_observed(
    model: TreeModel,
) -> tuple[tuple[TreeModel, ...], tuple[ObservedCutCorrection, ...]]:
    """Cut the tree at every observed internal node.

    Each observed node of degree d is copied into the d pieces holding
    its incident edges, so edges sharing only an observed endpoint land
    in different pieces.  In every resulting piece all observed nodes
    are leaves, hence each piece containing a latent node is a latent-
    internal hierarchy.  The correction for a degree-d observed node of
    cardinality r is (d - 1) * (r - 1).
    """
    require_valid(model)
    for var in model.latent_variables:
        if model.degree(var.id) <= 1:
            raise ValueError(
                f"latent leaf {var.name!r} present; prune latent leaves first"
            )

    if not model.edges:
        return (model,), ()

    # Union-find over edges; edges sharing a latent endpoint stay together.
    parent = list(range(len(model.edges)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri

    incident: dict[int, list[int]] = {}
    for idx, (a, b) in enumerate(model.edges):
        incident.setdefault(a, []).append(idx)
        incident.setdefault(b, []).append(idx)
    for var in model.latent_variables:
        touching = incident.get(var.id, [])
        for other in touching[1:]:
            union(touching[0], other)

    groups: dict[int, list[int]] = {}
    for idx in range(len(model.edges)):
        groups.setdefault(find(idx), []).append(idx)

    pieces = []
    for indices in groups.values():
        edge_subset = [model.edges[i] for i in indices]
        ids = sorted({v for e in edge_subset for v in e})
        pieces.append(
            TreeModel(
                tuple(model.variable(i) for i in ids), tuple(sorted(edge_subset))
            )
        )
    pieces.sort(key=lambda piece: piece.variables[0].id)

    corrections = []
    for var in sorted(model.observed_variables, key=lambda v: v.id):
        d = model.degree(var.id)
        if d >= 2:
            corrections.append(
                ObservedCutCorrection(var.id, (d - 1) * (var.cardinality - 1))
            )
    return tuple(pieces), tuple(corrections)


def _is_latent_internal_hierarchy(model: TreeModel) -> bool:
    for var in model.variables:
        internal = model.degree(var.id) >= 2
        if internal and var.observed:
            return False
        if not internal and var.latent:
            return False
    return True


def decompose_hlc(
    hlc: TreeModel,
) -> tuple[tuple[LcComponent, ...], tuple[LatentEdgeCorrection, ...]]:
    """Split a regular latent-internal hierarchy into latent-class parts.

    Cutting a latent-latent edge separates the tree into two halves that
    share exactly the joint table of the edge's pair, i.e. |X|*|Z| - 1
    parameters; iterating over all such edges isolates every latent node
    together with its full neighbor set.  The input must be regular so
    that every intermediate cut stays regular as well.
    """
    require_valid(hlc)
    latents = sorted(hlc.latent_variables, key=lambda v: v.id)
    if not latents:
        raise ValueError("expected at least one latent node")
    if not _is_latent_internal_hierarchy(hlc):
        raise ValueError(
            "expected a tree with observed leaves and latent internal nodes"
        )
    if check_regular(hlc):
        raise ValueError("model is not regular; regularize it first")

    components = []
    for var in latents:
        nbr_ids = hlc.neighbors(var.id)
        neighbors = tuple((x, hlc.variable(x).cardinality) for x in nbr_ids)
        flags = tuple(hlc.variable(x).latent for x in nbr_ids)
        components.append(
            LcComponent(var.id, var.cardinality, neighbors, flags)
        )

    corrections = []
    for a, b in hlc.edges:
        va, vb = hlc.variable(a), hlc.variable(b)
        if va.latent and vb.latent:
            corrections.append(
                LatentEdgeCorrection((a, b), va.cardinality * vb.cardinality - 1)
            )
    return tuple(components), tuple(corrections)


def combine(component_dimensions, ledger: DecompositionLedger) -> int:
    """Assemble the model's effective dimension from its pieces."""
    dims = tuple(int(d) for d in component_dimensions)
    if len(dims) != len(ledger.lc_components):
        raise ValueError(
            f"need one dimension per component: got {len(dims)} for "
            f"{len(ledger.lc_components)} components"
        )
    if any(d < 0 for d in dims):
        raise ValueError("component dimensions must be non-negative")
    total = sum(dims)
    total += sum(part.contribution for part in ledger.latent_free_parts)
    total -= sum(c.shared_parameters for c in ledger.latent_edge_corrections)
    total -= sum(c.amount for c in ledger.observed_cut_corrections)
    return total


def effective_dimension(
    model: TreeModel, policy: RankPolicy = RankPolicy()
) -> DimensionResult:
    """Standard and effective dimension of a tree model, with audit trail.

    Pipeline: prune latent leaves, split at observed internal nodes,
    then per piece either record its standard dimension (no latents) or
    regularize it and decompose it into latent-class components; rank
    each component at random interior points and combine.
    """
    require_valid(model)
    ds = standard_dimension(model)
    pruned, removed = prune_latent_leaves(model)
    pieces, cut_corrections = split_at_observed(pruned)

    lc_components: list[LcComponent] = []
    edge_corrections: list[LatentEdgeCorrection] = []
    free_parts: list[LatentFreePart] = []
    reg_log: list[RegularizationStep] = []

    for piece in pieces:
        if not piece.latent_variables:
            free_parts.append(
                LatentFreePart(
                    tuple(v.id for v in piece.variables), standard_dimension(piece)
                )
            )
            continue
        regular, steps = regularize(piece)
        reg_log.extend(steps)
        if not regular.latent_variables:
            # Regularization can collapse a piece down to a single
            # observed-observed edge.
            free_parts.append(
                LatentFreePart(
                    tuple(v.id for v in regular.variables),
                    standard_dimension(regular),
                )
            )
            continue
        components, corrections = decompose_hlc(regular)
        lc_components.extend(components)
        edge_corrections.extend(corrections)

    lc_components.sort(key=lambda c: c.latent_id)
    edge_corrections.sort(key=lambda c: c.edge)
    free_parts.sort(key=lambda p: p.variable_ids)

    ledger = DecompositionLedger(
        lc_components=tuple(lc_components),
        latent_edge_corrections=tuple(edge_corrections),
        observed_cut_corrections=tuple(cut_corrections),
        latent_free_parts=tuple(free_parts),
        pruned_latent_leaves=tuple(removed),
        regularization_log=tuple(reg_log),
    )

    dims = []
    trial_ranks = []
    for index, component in enumerate(ledger.lc_components):
        component_seed = derive_seed(policy.seed, "component", index)
        ranks = lc_rank_trials(
            component, policy.trials, component_seed, policy.numerator_bound
        )
        if len(set(ranks)) > 1:
            log.warning(
                "rank trials disagreed for latent id %s: %s (keeping the max)",
                component.latent_id,
                ranks,
            )
        dims.append(max(ranks))
        trial_ranks.append(ranks)

    de = combine(dims, ledger)
    return DimensionResult(ds, de, ledger, tuple(dims), tuple(trial_ranks))
