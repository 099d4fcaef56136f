"""Built-in fibration models and deterministic random generators.

Recipes: sub_finset(n), triv(base), chain_doctrine(sizes), sum_free(base,
sizes).  Random fibrations live over chains (the only meet-semilattices with
top on up to three objects), with random poset fibres and monotone
reindexing, so splitness holds by construction.
"""

from __future__ import annotations

import itertools
import random

from .adjunctions import AdjunctionData
from .cat import (ChosenStructure, FinCategory, Functor, chain_category,
                  discrete_category, enumerate_functors, finset_skeleton,
                  finset_structure, monoid_category, parallel_pair_category,
                  poset_category, poset_structure, powerset_poset)
from .completions import sum_completion
from .errors import SizeExceeded, UnknownRecipe
from .fibration import IndexedFibration

MAX_BASE = 4
MAX_FIBRE = 6


def base_by_name(name):
    name = str(name).lower()
    if name in ("one", "c1", "1"):
        return chain_category(1, name="one")
    if name in ("c2", "2"):
        return chain_category(2, name="c2")
    if name in ("c3", "3"):
        return chain_category(3, name="c3")
    raise UnknownRecipe(f"unknown base category {name!r}")


def thin_adjunction(left_ob, G: Functor, name="") -> AdjunctionData:
    """Adjunction data between thin categories from the left adjoint's
    object map (all structure is unique there)."""
    C, D = G.source, G.target   # G: C -> D, L: D -> C

    def L_ar(f):
        return C.hom(left_ob(D.dom(f)), left_ob(D.cod(f)))[0]

    L = Functor(D, C, left_ob, L_ar, name=name)
    unit = {d: D.hom(d, G.ob(left_ob(d)))[0] for d in D.objects}
    counit = {c: C.hom(left_ob(G.ob(c)), c)[0] for c in C.objects}
    return AdjunctionData(L, G, unit, counit, name=name)


def thin_right_adjunction(right_ob, F: Functor, name="") -> AdjunctionData:
    """F ⊣ R between thin categories from the right adjoint's object map."""
    D, C = F.source, F.target   # F: D -> C, R: C -> D

    def R_ar(f):
        return D.hom(right_ob(C.dom(f)), right_ob(C.cod(f)))[0]

    R = Functor(C, D, right_ob, R_ar, name=name)
    unit = {d: D.hom(d, right_ob(F.ob(d)))[0] for d in D.objects}
    counit = {c: C.hom(F.ob(right_ob(c)), c)[0] for c in C.objects}
    return AdjunctionData(F, R, unit, counit, name=name)


# ---------------------------------------------------------------------------
# sub_finset


def _closure_size(n):
    best = n
    for a in range(n + 1):
        for b in range(n + 1):
            best = max(best, a * b, a + b, b ** a)
    return best


def sub_finset(n) -> IndexedFibration:
    """The subobject fibration over the FinSet skeleton: fibre over a set is
    its powerset poset, reindexing is preimage.  Objects are materialized up
    to the closure of 0..n under ×, +, ^ so that every rank-n structure
    operation exists; sweeps default to rank bound n."""
    if n > 2:
        raise SizeExceeded("sub_finset materialization is only tractable for n <= 2")
    N = _closure_size(n)
    base = finset_skeleton(N, rank=n, name=f"finset<={n}")
    bst = finset_structure(base, N)
    fibres = {m: powerset_poset(m) for m in range(N + 1)}
    for f in fibres.values():
        f.rank_bound = None

    def reindex_fn(u):
        m, k = base.dom(u), base.cod(u)
        t = base.arrow_data[u]
        src, tgt = fibres[k], fibres[m]

        def ob(mask):
            out = 0
            for i in range(m):
                if mask >> t[i] & 1:
                    out |= 1 << i
            return out

        def ar(h):
            return tgt.arrow_of_pair[(ob(src.dom(h)), ob(src.cod(h)))]

        return Functor(src, tgt, ob, ar, name=f"preim({base.arrow_label(u)})")

    p = IndexedFibration(base, bst, fibres, reindex_fn=reindex_fn,
                         fibre_structures={m: poset_structure(fibres[m])
                                           for m in range(N + 1)},
                         name=f"sub_finset({n})", partial=True)

    def image_along(t, m, k):
        def ob(mask):
            out = 0
            for i in range(m):
                if mask >> i & 1:
                    out |= 1 << t[i]
            return out
        return ob

    def forall_along(t, m, k):
        def ob(mask):
            out = 0
            for j in range(k):
                pre = [i for i in range(m) if t[i] == j]
                if all(mask >> i & 1 for i in pre):
                    out |= 1 << j
            return out
        return ob

    # genuine ∃ / ∀ along projections (keyed by pair) and injections
    for (a, b), (prod, pa, pb) in bst.products.items():
        t = base.arrow_data[pa]
        psa = p.reindex_along(pa)
        p.coproduct_pair[(a, b)] = thin_adjunction(
            image_along(t, prod, a), psa, name=f"exists_pi({a};{b})")
        p.coproduct_along.setdefault(pa, p.coproduct_pair[(a, b)])
        p.product_pair[(a, b)] = thin_right_adjunction(
            forall_along(t, prod, a), psa, name=f"forall_pi({a};{b})")
        p.product_along.setdefault(pa, p.product_pair[(a, b)])
    for (a, b), (cop, ja, jb) in bst.coproducts.items():
        for pos, j in ((0, ja), (1, jb)):
            src_obj = (a, b)[pos]
            t = base.arrow_data[j]
            jstar = p.reindex_along(j)
            key = ("inj", ((a, b), pos))
            p.coproduct_along[key] = thin_adjunction(
                image_along(t, src_obj, cop), jstar,
                name=f"exists_j({a}+{b};{pos})")
            p.product_along[key] = thin_right_adjunction(
                forall_along(t, src_obj, cop), jstar,
                name=f"forall_j({a}+{b};{pos})")
    return p


# ---------------------------------------------------------------------------
# other builtins


def triv(base, structure=None) -> IndexedFibration:
    """All fibres terminal."""
    if isinstance(base, str):
        base = base_by_name(base)
        structure = poset_structure(base)
    one = chain_category(1, name="unit-fibre")
    fibres = {a: one for a in base.objects}

    def reindex_fn(u):
        return Functor(one, one, lambda x: x, lambda f: f, name="id")

    return IndexedFibration(base, structure or ChosenStructure(), fibres,
                            reindex_fn=reindex_fn,
                            fibre_structures={a: poset_structure(one)
                                              for a in base.objects},
                            name=f"triv({getattr(base, 'name', '?')})")


def chain_doctrine(sizes) -> IndexedFibration:
    """Chain fibres over a chain base; reindexing truncates, so the fibre
    sizes must be nondecreasing.  chain_doctrine([1, 2]) is the two-point
    doctrine over c2 used throughout the test corpus (alias: s0)."""
    sizes = list(sizes)
    if sizes != sorted(sizes):
        raise UnknownRecipe("chain_doctrine needs nondecreasing fibre sizes")
    n = len(sizes)
    base = chain_category(n, name=f"chain{n}")
    fibres = {i: chain_category(sizes[i], name=f"fibre{i}") for i in range(n)}

    def reindex_fn(u):
        i, j = base.dom(u), base.cod(u)
        src, tgt = fibres[j], fibres[i]

        def ob(x):
            return min(x, sizes[i] - 1)

        def ar(h):
            return tgt.arrow_of_pair[(ob(src.dom(h)), ob(src.cod(h)))]

        return Functor(src, tgt, ob, ar)

    return IndexedFibration(base, poset_structure(base), fibres,
                            reindex_fn=reindex_fn,
                            fibre_structures={i: poset_structure(fibres[i])
                                              for i in range(n)},
                            name=f"chain_doctrine({sizes})")


def s0() -> IndexedFibration:
    return chain_doctrine([1, 2])


def discrete_fibration(base, sizes) -> IndexedFibration:
    """Discrete fibres with truncating reindexing (sizes nondecreasing)."""
    sizes = list(sizes)
    if isinstance(base, str):
        base = base_by_name(base)
    if base.n_objects != len(sizes) or sizes != sorted(sizes):
        raise UnknownRecipe("discrete fibration needs one nondecreasing size per base object")
    fibres = {i: discrete_category(sizes[i]) for i in range(len(sizes))}

    def reindex_fn(u):
        i, j = base.dom(u), base.cod(u)
        src, tgt = fibres[j], fibres[i]

        def ob(x):
            return min(x, sizes[i] - 1)

        return Functor(src, tgt, ob, lambda h: tgt.identity(ob(src.dom(h))))

    return IndexedFibration(base, poset_structure(base), fibres,
                            reindex_fn=reindex_fn,
                            fibre_structures={},
                            name=f"discrete({sizes})")


def sum_free(base, sizes) -> IndexedFibration:
    """Simple coproducts freely added to a discrete fibration: every object
    of the result is quantifier-free-covered by construction."""
    return sum_completion(discrete_fibration(base, sizes),
                          name=f"sum_free({sizes})")


def builtin_fibration(name, params=None) -> IndexedFibration:
    params = dict(params or {})
    name = str(name).lower()
    if name == "sub_finset":
        return sub_finset(int(params.get("n", 2)))
    if name == "triv":
        return triv(str(params.get("base", "c2")))
    if name == "chain_doctrine":
        sizes = params.get("sizes", [1, 2])
        if isinstance(sizes, str):
            sizes = [int(s) for s in sizes.split(",")]
        return chain_doctrine(sizes)
    if name == "s0":
        return s0()
    if name == "sum_free":
        sizes = params.get("sizes", [1, 1])
        if isinstance(sizes, str):
            sizes = [int(s) for s in sizes.split(",")]
        return sum_free(str(params.get("base", "c2")), sizes)
    raise UnknownRecipe(f"unknown builtin fibration {name!r}")


BUILTIN_NAMES = ("sub_finset", "triv", "chain_doctrine", "s0", "sum_free")


# ---------------------------------------------------------------------------
# random models


def random_poset(rng, size) -> FinCategory:
    """Random poset as a thin category: random DAG on 0..size-1 (edges only
    upward), closed reflexively and transitively."""
    le = [[i == j for j in range(size)] for i in range(size)]
    for i in range(size):
        for j in range(i + 1, size):
            if rng.random() < 0.5:
                le[i][j] = True
    for k in range(size):
        for i in range(size):
            for j in range(size):
                if le[i][k] and le[k][j]:
                    le[i][j] = True
    return poset_category(size, lambda i, j: le[i][j], name=f"poset{size}")


_NONTHIN_POOL = (
    lambda: parallel_pair_category(),
    lambda: monoid_category([[0, 1], [1, 0]], name="z2"),
    lambda: monoid_category([[0, 1], [1, 1]], name="idem"),
)


def random_fibration(seed, base_size, fibre_size, *, allow_nonthin=False
                     ) -> IndexedFibration:
    """Deterministic-in-seed fibration over a chain base: random poset
    fibres (optionally small non-thin fibres) and monotone reindexing along
    the covering relations; composites are forced, so splitness holds by
    construction."""
    if base_size > MAX_BASE or fibre_size > MAX_FIBRE:
        raise SizeExceeded(f"sizes capped at base {MAX_BASE}, fibre {MAX_FIBRE}")
    rng = random.Random(seed)
    base = chain_category(base_size, name=f"chain{base_size}")
    fibres = {}
    for i in range(base_size):
        if allow_nonthin and rng.random() < 0.4:
            fibres[i] = _NONTHIN_POOL[rng.randrange(len(_NONTHIN_POOL))]()
        else:
            fibres[i] = random_poset(rng, rng.randint(1, fibre_size))
    covers = {}
    for i in range(base_size - 1):
        cands = enumerate_functors(fibres[i + 1], fibres[i])
        if not cands:
            # constant functor always exists for inhabited fibres
            raise SizeExceeded("no functor between generated fibres")
        covers[i] = cands[rng.randrange(len(cands))]

    table = {}

    def functor_for(i, j):
        # reindex along i <= j (functor fibre(j) -> fibre(i))
        got = table.get((i, j))
        if got is not None:
            return got
        if i == j:
            F = Functor.identity_functor(fibres[i])
        else:
            from .cat import compose_functors
            F = covers[i]
            for k in range(i + 1, j):
                F = compose_functors(F, covers[k])
        table[(i, j)] = F
        return F

    def reindex_fn(u):
        return functor_for(base.dom(u), base.cod(u))

    return IndexedFibration(base, poset_structure(base), fibres,
                            reindex_fn=reindex_fn,
                            fibre_structures={i: poset_structure(fibres[i])
                                              for i in range(base_size)},
                            name=f"random({seed},{base_size},{fibre_size})")
