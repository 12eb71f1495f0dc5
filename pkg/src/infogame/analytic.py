"""Closed-form predictors for equilibrium structure and efficiency.

Every function here has a brute-force counterpart in :mod:`infogame.equilibrium`
against which it can be cross-validated. Cost-model coverage follows the
available theory: homogeneous and recipient-dependent costs are supported,
general cost matrices are rejected.

Boundary conventions. Homogeneous classification puts c = c_l in the
connected region and c = c_u in the isolated region; when c_l = c_u the
connected label wins. Recipient-dependent membership in the connected region
quantifies its per-agent inequality over every agent, which is what actually
guarantees that all equilibria are connected (the argmin-only variant does
not). The cross-component condition of the component checker is oriented as
"a strictly profitable cross link refutes equilibrium" for both cost models.
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .entropy import TOL, EntropicVector, full_mask, subset_agents, subset_mask
from .formation_game import (
    BenefitFunction,
    CostModel,
    GameConfig,
    LinkProfile,
    component_masks,
    undirected_adjacency,
)

K_C = "K_C"
K_I = "K_I"
K_M = "K_M"


@dataclass(frozen=True)
class ConnectivityRegion:
    """Region label plus the numbers that decided it.

    Homogeneous games carry the two thresholds. Recipient-dependent games
    carry per-agent connectivity margins (positive for all agents puts the
    game in K_C) and the isolation margin (positive puts it in K_I).
    """

    label: str
    c_l: float | None = None
    c_u: float | None = None
    kc_margins: tuple[float, ...] | None = None
    ki_margin: float | None = None


def _require_min_agents(ev: EntropicVector) -> None:
    if ev.n_agents < 2:
        raise ValueError("connectivity analysis needs at least two agents")


def thresholds_homogeneous(ev: EntropicVector, f: BenefitFunction) -> tuple[float, float]:
    """Cost thresholds (c_l, c_u) separating the connectivity regions.

    Below c_l every equilibrium is connected; above c_u the unique
    equilibrium is the empty network. c_l = f(H(all)) - f(min_i H(all\\{i}))
    and c_u = f(H(all)) - f(min_i H({i})).
    """
    _require_min_agents(ev)
    n = ev.n_agents
    top = full_mask(n)
    fj = f(ev.h(top))
    c_l = fj - f(min(ev.h(top ^ (1 << i)) for i in range(n)))
    c_u = fj - f(min(ev.singletons))
    return c_l, c_u


def classify_homogeneous(ev: EntropicVector, f: BenefitFunction, c: float) -> ConnectivityRegion:
    """Label a homogeneous link cost as K_C (c <= c_l), K_I (c >= c_u) or K_M."""
    c_l, c_u = thresholds_homogeneous(ev, f)
    if c <= c_l:
        label = K_C
    elif c >= c_u:
        label = K_I
    else:
        label = K_M
    return ConnectivityRegion(label, c_l=c_l, c_u=c_u)


def region_heterogeneous(ev: EntropicVector, f: BenefitFunction, costs: CostModel) -> ConnectivityRegion:
    """Classify a recipient-dependent cost vector.

    K_C requires c_i < f(H(all)) - f(H(all\\{i})) for every agent i; that is
    the universal-quantifier form, which is what actually forces every
    equilibrium to be connected (the argmin-only form does not). K_I
    requires f(H(all)) - f(H({i})) < min_{k != i} c_k for every agent i: no
    agent can cover even the cheapest link with even the maximal
    information gain, so every sponsored link anywhere is strictly
    droppable and the empty network is the unique equilibrium. An
    argmin-based variant of this test is unsound: it can compare one
    agent's gain against a cost that agent never pays while a cheaper
    recipient sustains a link.
    """
    _require_min_agents(ev)
    if costs.kind != "recipient":
        raise ValueError("heterogeneous regions need a recipient-dependent cost model")
    n = ev.n_agents
    if len(costs.values) != n:
        raise ValueError("cost vector length does not match the game")
    top = full_mask(n)
    fj = f(ev.h(top))
    margins = tuple(fj - f(ev.h(top ^ (1 << i))) - costs.values[i] for i in range(n))
    ki_margin = min(
        min(costs.values[k] for k in range(n) if k != i) - (fj - f(ev.h(1 << i)))
        for i in range(n))
    if all(m > 0.0 for m in margins):
        label = K_C
    elif ki_margin > 0.0:
        label = K_I
    else:
        label = K_M
    return ConnectivityRegion(label, kc_margins=margins, ki_margin=ki_margin)


def _partition_masks(n: int, partition: Iterable[Iterable[int]]) -> list[int]:
    masks = []
    covered = 0
    for block in partition:
        mask = subset_mask(block)
        if mask == 0:
            raise ValueError("partition blocks must be nonempty")
        if mask & covered:
            raise ValueError("partition blocks overlap")
        covered |= mask
        masks.append(mask)
    if covered != full_mask(n):
        raise ValueError("partition does not cover all agents")
    return masks


def _spanning_trees(members: tuple[int, ...]):
    """Spanning trees of a labelled vertex set, as edge lists (Pruefer decode)."""
    m = len(members)
    if m == 1:
        yield []
        return
    if m == 2:
        yield [(members[0], members[1])]
        return
    for seq in itertools.product(range(m), repeat=m - 2):
        degree = [1] * m
        for v in seq:
            degree[v] += 1
        heap = [v for v in range(m) if degree[v] == 1]
        heapq.heapify(heap)
        edges = []
        for v in seq:
            leaf = heapq.heappop(heap)
            edges.append((members[min(leaf, v)], members[max(leaf, v)]))
            degree[v] -= 1
            if degree[v] == 1:
                heapq.heappush(heap, v)
        u = heapq.heappop(heap)
        v = heapq.heappop(heap)
        edges.append((members[min(u, v)], members[max(u, v)]))
        yield edges


def _block_supports_ne(cfg: GameConfig, mask: int, other_masks: list[int]) -> bool:
    """Does some sponsored spanning tree of the block survive its members' best
    responses, with the other blocks abstracted to their information masks?

    An agent's deviation payoffs depend on the other components only through
    their joint entropies, so blocks can be certified independently: wire the
    other blocks as arbitrary trees, try every sponsored spanning tree of this
    block, and demand that every member's current row stays within tolerance
    of its best response.
    """
    from .equilibrium import _compress_row, _cost_rows, _fh_table, _row_utilities

    n = cfg.n_agents
    members = subset_agents(mask)
    fh = _fh_table(cfg)
    cost_rows = _cost_rows(cfg)
    # index-order paths inside the other blocks; shape is irrelevant to this block
    filler: list[tuple[int, int]] = []
    for om in other_masks:
        agents = subset_agents(om)
        filler += [(agents[t], agents[t + 1]) for t in range(len(agents) - 1)]
    for edges in _spanning_trees(members):
        for orient in range(1 << len(edges)):
            rows = [0] * n
            for b, (i, j) in enumerate(edges):
                if orient >> b & 1:
                    rows[j] |= 1 << i
                else:
                    rows[i] |= 1 << j
            for i, j in filler:
                rows[i] |= 1 << j
            ok = True
            for i in members:
                utils = _row_utilities(n, rows, i, fh, cost_rows[i])
                if utils[_compress_row(rows[i], i)] < max(utils) - TOL:
                    ok = False
                    break
            if ok:
                return True
    return False


def check_component_structure_ne(cfg: GameConfig, partition: Iterable[Iterable[int]]) -> bool:
    """Can a network whose components are exactly ``partition`` arise in equilibrium?

    True when every block supports a sponsored spanning tree in which no
    member gains more than 1e-9 from any rewiring, given the information held
    by the other blocks. Singleton blocks reduce to the cross-component test
    that no outgoing link is strictly profitable. The certification is exact:
    viable trees for each block combine into an equilibrium realizing the
    partition, and any equilibrium restricts to viable trees blockwise.

    A simpler per-member test (each member either profits from staying
    connected or makes the rest profit from reaching it) is necessary only
    for star-shaped components; chains routing information through a member
    whose information is jointly redundant escape it, so the constructive
    characterization is used instead. Supports homogeneous and
    recipient-dependent costs; general cost matrices are rejected.
    """
    if cfg.costs.kind not in ("homogeneous", "recipient"):
        raise ValueError("component checker supports homogeneous or recipient costs only")
    n = cfg.n_agents
    masks = _partition_masks(n, partition)
    for mask in masks:
        others = [m for m in masks if m != mask]
        if not _block_supports_ne(cfg, mask, others):
            return False
    return True


def check_strict_ne_structure(cfg: GameConfig, profile: LinkProfile) -> bool:
    """Is ``profile`` shaped like a strict equilibrium?

    Requires homogeneous costs. The profile's partition must pass
    :func:`check_component_structure_ne`, every non-singleton component must
    be a star whose core sponsors all of its links, and each periphery agent
    j must make the core's link to it strictly worthwhile:
    f(H(C)) - f(H(C\\{j})) > c. At least M - 1 members of an M-agent
    component must clear that bar.
    """
    if cfg.costs.kind != "homogeneous":
        raise ValueError("strict-structure checker supports homogeneous costs only")
    n = cfg.n_agents
    if profile.n_agents != n:
        raise ValueError("profile size does not match the game")
    c = cfg.costs.values[0]
    f = cfg.benefit
    h = cfg.ev.h
    comp_of = component_masks(undirected_adjacency(profile))
    masks = sorted({comp_of[i] for i in range(n)})
    for mask in masks:
        members = subset_agents(mask)
        if len(members) < 2:
            continue
        sponsors = [i for i in members if profile.rows[i] & mask]
        if len(sponsors) != 1:
            return False
        core = sponsors[0]
        periphery = mask ^ (1 << core)
        if profile.rows[core] & mask != periphery:
            return False
        fc = f(h(mask))
        zeta = {j for j in members if fc - f(h(mask ^ (1 << j))) > c + TOL}
        if len(zeta) < len(members) - 1:
            return False
        for j in subset_agents(periphery):
            if j not in zeta:
                return False
    return check_component_structure_ne(cfg, [subset_agents(m) for m in masks])


@dataclass(frozen=True)
class Prediction:
    """An efficiency prediction: an exact value or a strict upper bound."""

    value: float
    is_bound: bool
    region: str


def _connected_poa_closed_form(n: int, f_joint: float, costs: Sequence[float]) -> float:
    cmin = min(costs)
    num = n * f_joint - (n - 1) * cmin
    den = n * f_joint - sum(costs) + cmin
    return num / den


def _welfare_optimum(cfg: GameConfig) -> float:
    """Planner's optimum by the welfare formula over partitions.

    Cycles and duplicate sponsorships only add cost, so the optimum ranges
    over partitions of the agents with each block wired as a minimum-cost
    spanning tree: welfare = sum over blocks of |B| f(H(B)) - MST cost.
    """
    from .equilibrium import social_optimum

    return social_optimum(cfg)[0]


def poa_predict(cfg: GameConfig) -> Prediction:
    """Price-of-anarchy prediction from the region classification.

    Homogeneous: exactly 1 in K_C; in K_M a strict upper bound
    N f(H(all)) / sum_i f(H({i})). Recipient-dependent: the closed form
    (N f - (N-1) min c) / (N f - sum c + min c) in K_C, and the same K_M
    bound.

    In K_I (both cost models) the unique equilibrium is the empty network,
    so the exact value is the welfare optimum over sum_i f(H({i})). The
    optimum internalizes both endpoints' benefits and need not itself be
    empty for costs just above the isolation threshold, in which case the
    value exceeds 1; it collapses to 1 once links are socially unaffordable.
    """
    n = cfg.n_agents
    f = cfg.benefit
    ev = cfg.ev
    f_joint = f(ev.joint_entropy)
    km_bound = n * f_joint / sum(f(v) for v in ev.singletons)
    if cfg.costs.kind == "homogeneous":
        region = classify_homogeneous(ev, f, cfg.costs.values[0])
        if region.label == K_C:
            return Prediction(1.0, False, K_C)
        if region.label == K_I:
            empty_welfare = sum(f(v) for v in ev.singletons)
            return Prediction(_welfare_optimum(cfg) / empty_welfare, False, K_I)
        return Prediction(km_bound, True, K_M)
    if cfg.costs.kind == "recipient":
        region = region_heterogeneous(ev, f, cfg.costs)
        if region.label == K_I:
            empty_welfare = sum(f(v) for v in ev.singletons)
            return Prediction(_welfare_optimum(cfg) / empty_welfare, False, K_I)
        if region.label == K_C:
            return Prediction(_connected_poa_closed_form(n, f_joint, cfg.costs.values), False, K_C)
        return Prediction(km_bound, True, K_M)
    raise ValueError("PoA prediction supports homogeneous or recipient costs only")


def mil_predict(cfg: GameConfig) -> Prediction:
    """Maximum-information-loss prediction: 0 in K_C and K_I, else the bound
    H(all) - min_i H({i})."""
    ev = cfg.ev
    f = cfg.benefit
    if cfg.costs.kind == "homogeneous":
        region = classify_homogeneous(ev, f, cfg.costs.values[0])
    elif cfg.costs.kind == "recipient":
        region = region_heterogeneous(ev, f, cfg.costs)
    else:
        raise ValueError("MIL prediction supports homogeneous or recipient costs only")
    if region.label in (K_C, K_I):
        return Prediction(0.0, False, region.label)
    return Prediction(ev.joint_entropy - min(ev.singletons), True, K_M)


def poa_monotonicity_sweep(
    f: BenefitFunction,
    costs: CostModel,
    family: Callable[[float], EntropicVector],
    kl_values: Sequence[float],
) -> list[tuple[float, float]]:
    """Closed-form K_C price of anarchy along a redundancy grid.

    ``family`` maps a redundancy level to an entropic vector; the per-agent
    entropies must stay fixed across the grid and every point must remain in
    K_C, otherwise the sweep raises. With recipient-dependent costs the
    resulting series is nondecreasing in the redundancy, strictly increasing
    when the costs are not all equal.
    """
    if costs.kind != "recipient":
        raise ValueError("the monotonicity sweep needs recipient-dependent costs")
    out = []
    base_singletons = None
    for kl in kl_values:
        ev = family(kl)
        if base_singletons is None:
            base_singletons = ev.singletons
        elif any(abs(a - b) > TOL for a, b in zip(base_singletons, ev.singletons)):
            raise ValueError("per-agent entropies must stay fixed across the sweep")
        region = region_heterogeneous(ev, f, costs)
        if region.label != K_C:
            raise ValueError(f"grid point kl={kl} leaves the connected region ({region.label})")
        out.append((float(kl), _connected_poa_closed_form(ev.n_agents, f(ev.joint_entropy), costs.values)))
    return out
