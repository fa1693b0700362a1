"""Tree-structured models of observed and latent variables.

A model is an undirected tree whose nodes carry a cardinality and an
observed/latent flag.  This module provides structural validation, the
standard (parameter-count) dimension of the rooted parameterization, the
latent-cardinality regularity check, and the regularization transform
that shrinks an irregular model without changing the set of joint
distributions it can represent over its observed variables.

Everything here is a pure function of immutable values; transformed
models are new objects and never alias their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional


class InvalidModelError(ValueError):
    """Raised when an operation requires a structurally valid model."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


@dataclass(frozen=True)
class Variable:
    """One node of a tree model."""

    id: int
    name: str
    cardinality: int
    observed: bool

    @property
    def latent(self) -> bool:
        return not self.observed


@dataclass(frozen=True)
class TreeModel:
    """An undirected tree of variables.

    Edges are normalized to sorted id pairs in sorted order, so models
    built from the same structure compare equal regardless of the edge
    order used at construction time.  Variable ids are stable across
    transformations: removed ids are retired, never reused.
    """

    variables: tuple[Variable, ...]
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "variables", tuple(self.variables))
        normalized = sorted((min(a, b), max(a, b)) for a, b in self.edges)
        object.__setattr__(self, "edges", tuple(normalized))

    def variable(self, var_id: int) -> Variable:
        for var in self.variables:
            if var.id == var_id:
                return var
        raise KeyError(f"unknown variable id {var_id}")

    def by_name(self, name: str) -> Variable:
        for var in self.variables:
            if var.name == name:
                return var
        raise KeyError(f"unknown variable name {name!r}")

    def neighbors(self, var_id: int) -> tuple[int, ...]:
        out = []
        for a, b in self.edges:
            if a == var_id:
                out.append(b)
            elif b == var_id:
                out.append(a)
        return tuple(sorted(out))

    def degree(self, var_id: int) -> int:
        return len(self.neighbors(var_id))

    @property
    def observed_variables(self) -> tuple[Variable, ...]:
        return tuple(v for v in self.variables if v.observed)

    @property
    def latent_variables(self) -> tuple[Variable, ...]:
        return tuple(v for v in self.variables if v.latent)


@dataclass(frozen=True)
class RegularityViolation:
    """A latent node whose cardinality breaks the neighbor-product bound.

    ``allowed_max`` is the product of the node's neighbor cardinalities
    divided by the largest one (always an exact integer).  ``kind`` is
    ``"bound"`` when the cardinality exceeds that value and ``"strict"``
    when it merely equals it but the node has exactly two neighbors, one
    of them latent, where strict inequality is required.
    """

    variable_id: int
    kind: str
    allowed_max: int


def validate(model: TreeModel) -> list[str]:
    """Return every violated structural invariant (empty when valid)."""
    errors: list[str] = []
    if not model.variables:
        return ["model has no variables"]

    seen_ids: set[int] = set()
    seen_names: set[str] = set()
    for var in model.variables:
        if var.cardinality < 1:
            errors.append(f"variable {var.name!r}: cardinality must be >= 1")
        if var.id in seen_ids:
            errors.append(f"duplicate variable id {var.id}")
        seen_ids.add(var.id)
        if var.name in seen_names:
            errors.append(f"duplicate variable name {var.name!r}")
        seen_names.add(var.name)

    usable: set[tuple[int, int]] = set()
    for a, b in model.edges:
        if a == b:
            errors.append(f"self-loop at variable id {a}")
            continue
        if a not in seen_ids or b not in seen_ids:
            errors.append(f"edge ({a}, {b}) references an unknown variable id")
            continue
        if (a, b) in usable:
            errors.append(f"duplicate edge ({a}, {b})")
        usable.add((a, b))

    n = len(seen_ids)
    if len(usable) != n - 1:
        errors.append(f"not a tree: {len(usable)} distinct edges for {n} variables")
    reached = _reachable(min(seen_ids), usable)
    if len(reached) < n:
        errors.append(f"disconnected: only {len(reached)} of {n} variables reachable")

    if not any(v.observed for v in model.variables):
        errors.append("no observed variable")
    return errors


def _reachable(start: int, edges: set[tuple[int, int]]) -> set[int]:
    adjacency: dict[int, list[int]] = {}
    for a, b in edges:
        adjacency.setdefault(a, []).append(b)
        adjacency.setdefault(b, []).append(a)
    seen = {start}
    stack = [start]
    while stack:
        node = stack.pop()
        for other in adjacency.get(node, ()):
            if other not in seen:
                seen.add(other)
                stack.append(other)
    return seen


def require_valid(model: TreeModel) -> None:
    errors = validate(model)
    if errors:
        raise InvalidModelError(errors)


def standard_dimension(model: TreeModel, root: Optional[int] = None) -> int:
    """Count the free parameters of the rooted conditional-table form.

    The count is ``(|root| - 1)`` plus ``|parent| * (|child| - 1)`` over
    all parent-child edges, and is the same for every choice of root.
    ``root`` defaults to the lowest variable id.
    """
    require_valid(model)
    ids = sorted(v.id for v in model.variables)
    if root is None:
        root = ids[0]
    elif root not in set(ids):
        raise ValueError(f"unknown root id {root}")
    card = {v.id: v.cardinality for v in model.variables}

    total = card[root] - 1
    seen = {root}
    stack = [root]
    while stack:
        parent = stack.pop()
        for child in model.neighbors(parent):
            if child in seen:
                continue
            seen.add(child)
            stack.append(child)
            total += card[parent] * (card[child] - 1)
    return total


def _neighbor_bound(cards: list[int]) -> int:
    # Product of neighbor cardinalities divided by the largest one; exact
    # because the largest factor is simply left out of the product.
    biggest = max(cards)
    dropped = False
    prod = 1
    for c in cards:
        if c == biggest and not dropped:
            dropped = True
            continue
        prod *= c
    return prod


def check_regular(model: TreeModel) -> list[RegularityViolation]:
    """Report every latent node whose cardinality exceeds its bound.

    A latent node with neighbors of cardinalities ``c_1..c_k`` may be at
    most ``prod(c_i) / max(c_i)``; when it has exactly two neighbors and
    at least one of them is latent the inequality must be strict.
    Observed nodes are never checked.
    """
    require_valid(model)
    violations: list[RegularityViolation] = []
    for var in sorted(model.variables, key=lambda v: v.id):
        if var.observed:
            continue
        nbr_ids = model.neighbors(var.id)
        if not nbr_ids:
            continue
        cards = [model.variable(x).cardinality for x in nbr_ids]
        bound = _neighbor_bound(cards)
        if var.cardinality > bound:
            violations.append(RegularityViolation(var.id, "bound", bound))
        elif (
            var.cardinality == bound
            and len(nbr_ids) == 2
            and any(model.variable(x).latent for x in nbr_ids)
        ):
            violations.append(RegularityViolation(var.id, "strict", bound))
    return violations


@dataclass(frozen=True)
class RegularizationStep:
    """One applied transformation: a node removal or a cardinality cut."""

    kind: str  # "remove" | "reduce"
    variable_id: int
    variable_name: str
    joined: Optional[tuple[int, int]] = None
    old_cardinality: Optional[int] = None
    new_cardinality: Optional[int] = None


def regularize(model: TreeModel) -> tuple[TreeModel, tuple[RegularizationStep, ...]]:
    """Shrink a model until no latent node violates its cardinality bound.

    Two rewrite rules are applied repeatedly, scanning latent nodes in
    ascending id and restarting the scan after every change:

    * a latent node with exactly two neighbors whose cardinality is at
      least the smaller neighbor cardinality is removed and its two
      neighbors joined by a new edge;
    * otherwise, a latent node whose cardinality exceeds the neighbor
      bound has its cardinality reduced to that bound.

    The output represents exactly the same set of observed-variable
    joint distributions as the input and never has more parameters.
    """
    require_valid(model)
    variables = {v.id: v for v in model.variables}
    edges = set(model.edges)
    log: list[RegularizationStep] = []

    def neighbors_of(vid: int) -> list[int]:
        out = []
        for a, b in edges:
            if a == vid:
                out.append(b)
            elif b == vid:
                out.append(a)
        return sorted(out)

    changed = True
    while changed:
        changed = False
        for vid in sorted(variables):
            var = variables[vid]
            if var.observed:
                continue
            nbrs = neighbors_of(vid)
            if not nbrs:
                continue
            cards = [variables[x].cardinality for x in nbrs]
            if len(nbrs) == 2 and var.cardinality >= min(cards):
                a, b = nbrs
                edges.discard((min(vid, a), max(vid, a)))
                edges.discard((min(vid, b), max(vid, b)))
                edges.add((min(a, b), max(a, b)))
                del variables[vid]
                log.append(
                    RegularizationStep(
                        "remove", vid, var.name, joined=(min(a, b), max(a, b))
                    )
                )
                changed = True
                break
            bound = _neighbor_bound(cards)
            if var.cardinality > bound:
                variables[vid] = replace(var, cardinality=bound)
                log.append(
                    RegularizationStep(
                        "reduce",
                        vid,
                        var.name,
                        old_cardinality=var.cardinality,
                        new_cardinality=bound,
                    )
                )
                changed = True
                break

    result = TreeModel(
        tuple(variables[k] for k in sorted(variables)), tuple(sorted(edges))
    )
    return result, tuple(log)
