"""Seeded synthetic merge scenarios.

A scenario is a target taxonomy, a source taxonomy that reuses part of the
target's concepts under a perturbed hierarchy, and a 1:1 equivalence
mapping between the reused concepts, optionally enriched with is-a and
inverse-is-a correspondences.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .filters import Predicate
from .model import Concept, Correspondence, CorrespondenceKind, InputMapping, Instance, Taxonomy

BRANDS = ("HP", "Dell", "Acme", "Zed")


@dataclass(frozen=True)
class ScenarioParams:
    concepts: int = 30
    source_concepts: int | None = None
    depth: int = 5
    fanout: int = 4
    multi_parent_prob: float = 0.0
    overlap_ratio: float = 0.5
    instance_count: int = 0
    identical_shape: bool = False
    isa_rate: float = 0.0
    invisa_rate: float = 0.0
    # chance that a reused concept ignores the target order when picking a source parent
    shuffle_prob: float = 0.3

    def validate(self) -> None:
        if self.concepts < 1 or (self.source_concepts is not None and self.source_concepts < 1):
            raise ValueError("scenarios need at least one concept per taxonomy")
        if self.depth < 1 or self.fanout < 1:
            raise ValueError("depth and fanout must be positive")
        for name in ("multi_parent_prob", "overlap_ratio", "isa_rate", "invisa_rate", "shuffle_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.instance_count < 0:
            raise ValueError("instance_count must be non-negative")
        capacity = sum(self.fanout ** k for k in range(self.depth + 1))
        if self.concepts > capacity:
            raise ValueError(
                f"{self.concepts} concepts do not fit depth {self.depth} with fanout {self.fanout}"
            )


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    params: ScenarioParams
    source: Taxonomy
    target: Taxonomy
    mapping: InputMapping
    extra: dict = field(default_factory=dict, compare=False)


def _random_tree(rng: random.Random, n: int, depth: int, fanout: int) -> list[int | None]:
    """Parent index per node (None for the root); node i's parent is < i."""
    parent: list[int | None] = [None]
    level = [0]
    kids = [0]
    open_nodes = [0] if depth > 0 else []
    for i in range(1, n):
        k = rng.randrange(len(open_nodes))
        p = open_nodes[k]
        parent.append(p)
        level.append(level[p] + 1)
        kids.append(0)
        kids[p] += 1
        if kids[p] >= fanout:
            open_nodes[k] = open_nodes[-1]
            open_nodes.pop()
        if level[i] < depth:
            open_nodes.append(i)
    return parent


def _extra_parents(rng: random.Random, n: int, prob: float, base: list[int | None]) -> list[list[int]]:
    parents = [[p] if p is not None else [] for p in base]
    if prob <= 0:
        return parents
    for i in range(2, n):
        if parents[i] and rng.random() < prob:
            p = rng.randrange(i)
            if p not in parents[i]:
                parents[i].append(p)
    return parents


def _leaves(n: int, parents: list[list[int]]) -> list[int]:
    inner = {p for ps in parents for p in ps}
    return [i for i in range(n) if i not in inner]


def gen_scenario(seed: int, params: ScenarioParams | None = None, name: str | None = None) -> Scenario:
    """Deterministic per ``(seed, params)``.

    ``overlap_ratio`` is the share of source concepts that have an
    equivalent target concept. With ``identical_shape`` the source is a
    relabelled copy of the target and every concept is matched.
    """
    params = params or ScenarioParams()
    params.validate()
    rng = random.Random(seed)
    n_t = params.concepts

    t_parents = _extra_parents(rng, n_t, params.multi_parent_prob,
                               _random_tree(rng, n_t, params.depth, params.fanout))
    t_ids = [f"t{i}" for i in range(n_t)]
    t_label = [f"C{i}" for i in range(n_t)]

    if params.identical_shape:
        n_s = n_t
        matched = list(range(n_t))  # source i copies target i
        s_parents = [list(ps) for ps in t_parents]
        s_label = list(t_label)
        partner: dict[int, int] = {i: i for i in range(n_t)}
    else:
        n_s = params.source_concepts or n_t
        m = min(n_t, n_s, round(params.overlap_ratio * n_s))
        picked = sorted(rng.sample(range(n_t), m))
        # source order: reused concepts in target order (with some swaps), source-only ones spliced in
        order: list[tuple[str, int]] = [("t", i) for i in picked]
        for j in range(len(order) - 1):
            if rng.random() < params.shuffle_prob / 2:
                order[j], order[j + 1] = order[j + 1], order[j]
        for k in range(n_s - m):
            order.insert(rng.randrange(len(order) + 1), ("s", k))
        s_label, partner, s_parents = [], {}, []
        t_anc_cache: dict[int, list[int]] = {}

        def target_ancestors(i: int) -> list[int]:
            if i not in t_anc_cache:
                seen, stack, out = set(), list(t_parents[i]), []
                while stack:
                    x = stack.pop()
                    if x not in seen:
                        seen.add(x)
                        out.append(x)
                        stack.extend(t_parents[x])
                t_anc_cache[i] = out
            return t_anc_cache[i]

        pos_of_target: dict[int, int] = {}
        for pos, (kind, ref) in enumerate(order):
            if kind == "t":
                partner[pos] = ref
                pos_of_target[ref] = pos
                s_label.append(t_label[ref])
            else:
                s_label.append(f"S{ref}")
            if pos == 0:
                s_parents.append([])
                continue
            choice = None
            if kind == "t" and rng.random() >= params.shuffle_prob:
                mirrored = [pos_of_target[a] for a in target_ancestors(ref) if a in pos_of_target]
                if mirrored:
                    choice = max(mirrored)  # nearest reused ancestor
            if choice is None:
                # bias towards recent concepts so the hierarchy gets some depth
                lo = max(0, pos - 2 * params.fanout)
                choice = rng.randrange(lo, pos) if rng.random() < 0.7 else rng.randrange(pos)
            ps = [choice]
            if params.multi_parent_prob and pos > 1 and rng.random() < params.multi_parent_prob:
                extra = rng.randrange(pos)
                if extra != choice:
                    ps.append(extra)
            s_parents.append(ps)
        matched = [partner[p] for p in sorted(partner)]

    s_ids = [f"s{i}" for i in range(n_s)]
    s_leaves = set(_leaves(n_s, s_parents))
    t_leaves = set(_leaves(n_t, t_parents))

    # instances on leaves only, values drawn from a small brand vocabulary
    inst: dict[tuple[str, int], list[Instance]] = {}
    leaf_pool = [("s", i) for i in sorted(s_leaves)] + [("t", i) for i in sorted(t_leaves)]
    for k in range(params.instance_count):
        side, i = leaf_pool[rng.randrange(len(leaf_pool))]
        inst.setdefault((side, i), []).append(Instance(f"i{k}", {"brand": rng.choice(BRANDS)}))

    target = Taxonomy.build(
        [Concept(t_ids[i], t_label[i], ("brand",), tuple(inst.get(("t", i), ()))) for i in range(n_t)],
        [(t_ids[i], t_ids[p]) for i in range(n_t) for p in t_parents[i]],
    )
    source = Taxonomy.build(
        [Concept(s_ids[i], s_label[i], ("brand",), tuple(inst.get(("s", i), ()))) for i in range(n_s)],
        [(s_ids[i], s_ids[p]) for i in range(n_s) for p in s_parents[i]],
    )

    corrs: list[Correspondence] = []
    for s_pos, t_idx in sorted(partner.items()):
        corrs.append(Correspondence(CorrespondenceKind.EQ_CONCEPT, s_ids[s_pos], t_ids[t_idx]))
        if rng.random() < 0.5:
            corrs.append(
                Correspondence(
                    CorrespondenceKind.EQ_ATTRIBUTE, (s_ids[s_pos], "brand"), (t_ids[t_idx], "brand")
                )
            )

    if params.isa_rate:
        for i in range(n_s):
            if i not in partner and rng.random() < params.isa_rate:
                corrs.append(Correspondence(CorrespondenceKind.ISA, s_ids[i], t_ids[rng.randrange(n_t)]))

    if params.invisa_rate:
        t_children: dict[int, list[int]] = {}
        for c in range(n_t):
            for p in t_parents[c]:
                t_children.setdefault(p, []).append(c)
        t_leaf_list = sorted(t_leaves)
        for i in sorted(s_leaves):
            if rng.random() >= params.invisa_rate:
                continue
            own = partner.get(i)
            kids = [c for c in t_children.get(own, []) if c in t_leaves] if own is not None else []
            pool = kids if len(kids) >= 2 else [c for c in t_leaf_list if c != own]
            if len(pool) < 2:
                continue
            brands = rng.sample(BRANDS, 2)
            for c, brand in zip(rng.sample(pool, 2), brands):
                corrs.append(
                    Correspondence(
                        CorrespondenceKind.INV_ISA,
                        s_ids[i],
                        t_ids[c],
                        Predicate(s_label[i], "brand", brand),
                    )
                )

    label = name or f"seed{seed}"
    return Scenario(label, seed, params, source, target, InputMapping.build(corrs), {"matched": len(matched)})


def tree_pair(n: int, seed: int = 0, overlap_ratio: float = 0.955) -> Scenario:
    """Two trees of ``n`` concepts each, sized like a large product-catalog merge."""
    depth, fanout = 7, 8
    while sum(fanout ** k for k in range(depth + 1)) < n:
        fanout += 1
    params = ScenarioParams(
        concepts=n,
        source_concepts=n,
        depth=depth,
        fanout=fanout,
        overlap_ratio=overlap_ratio,
        shuffle_prob=0.1,
    )
    return gen_scenario(seed, params, name=f"tree-{n}")
