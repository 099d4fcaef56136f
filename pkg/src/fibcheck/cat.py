"""Finite and rank-bounded categories with chosen structure.

Two category representations share one duck-typed protocol:

* :class:`FinCategory` stores explicit tables (objects and arrows are dense
  integer ids).
* :class:`LazyCategory` produces hom-sets on demand from callbacks; arrows
  are :class:`LArr` tuples carrying dom, cod and a hashable payload.

Every operation downstream only uses ``objects``, ``hom``, ``identity``,
``compose``, ``dom``, ``cod`` and iteration order, so both kinds (and the
:class:`OpCategory` view) are interchangeable.

Determinism: hom-sets are always enumerated in a fixed canonical order and
ties are broken by position in that order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, NamedTuple, Optional

from .errors import MalformedModel, MissingStructure, SizeExceeded


class LArr(NamedTuple):
    """Arrow of a lazy category: (dom, cod, payload)."""

    dom: int
    cod: int
    tag: Any


# ---------------------------------------------------------------------------
# explicit categories


class FinCategory:
    """A finite category given by explicit tables.

    Arrows are dense integer ids.  ``compose`` must be defined exactly on
    composable pairs; this is validated by :func:`check_category_laws`, not
    by the constructor (which only rejects dangling ids).
    """

    def __init__(self, n_objects, dom, cod, identity, compose, *, name="",
                 object_labels=None, arrow_labels=None, object_data=None,
                 arrow_data=None, rank_bound=None):
        self.n_objects = int(n_objects)
        self._dom = list(dom)
        self._cod = list(cod)
        self._identity = list(identity)
        self._compose = dict(compose)
        self.name = name
        self.object_labels = object_labels
        self.arrow_labels = arrow_labels
        self.object_data = object_data
        self.arrow_data = arrow_data
        self.rank_bound = rank_bound
        n_arr = len(self._dom)
        if len(self._cod) != n_arr:
            raise MalformedModel("dom/cod tables differ in length")
        if len(self._identity) != self.n_objects:
            raise MalformedModel("identity table must cover every object")
        for f in range(n_arr):
            if not (0 <= self._dom[f] < self.n_objects):
                raise MalformedModel(f"arrow {f} has unknown dom {self._dom[f]}")
            if not (0 <= self._cod[f] < self.n_objects):
                raise MalformedModel(f"arrow {f} has unknown cod {self._cod[f]}")
        for a, i in enumerate(self._identity):
            if not (0 <= i < n_arr):
                raise MalformedModel(f"identity of object {a} is unknown arrow {i}")
        for (g, f), h in self._compose.items():
            for x in (g, f, h):
                if not (0 <= x < n_arr):
                    raise MalformedModel(f"compose entry ({g},{f})->{h} references unknown arrow {x}")
        hom = {}
        for f in range(n_arr):
            hom.setdefault((self._dom[f], self._cod[f]), []).append(f)
        self._hom = {k: tuple(v) for k, v in hom.items()}

    # -- protocol ----------------------------------------------------------
    @property
    def objects(self):
        return range(self.n_objects)

    @property
    def n_arrows(self):
        return len(self._dom)

    def dom(self, f):
        return self._dom[f]

    def cod(self, f):
        return self._cod[f]

    def identity(self, a):
        return self._identity[a]

    def is_identity(self, f):
        return self._identity[self._dom[f]] == f and self._dom[f] == self._cod[f]

    def hom(self, a, b):
        return self._hom.get((a, b), ())

    def compose(self, g, f):
        """Return g∘f; raises MalformedModel if the pair is not in the table."""
        try:
            return self._compose[(g, f)]
        except KeyError:
            raise MalformedModel(
                f"compose undefined for ({g},{f}) "
                f"[{self.arrow_label(g)} after {self.arrow_label(f)}]") from None

    def try_compose(self, g, f):
        return self._compose.get((g, f))

    def all_arrows(self):
        return range(len(self._dom))

    def object_label(self, a):
        if self.object_labels:
            return self.object_labels[a]
        return str(a)

    def arrow_label(self, f):
        if self.arrow_labels:
            return self.arrow_labels[f]
        return f"{self._dom[f]}->{self._cod[f]}#{f}"

    def object_key(self, a):
        if self.object_data is not None:
            return self.object_data[a]
        return a

    def equal_presentation(self, other):
        """Structural equality of the raw tables."""
        if isinstance(other, OpCategory):
            return False
        return (self.n_objects == other.n_objects
                and self._dom == other._dom and self._cod == other._cod
                and self._identity == other._identity
                and self._compose == other._compose)

    def __repr__(self):
        return f"FinCategory({self.name or 'anon'}: {self.n_objects} objects, {self.n_arrows} arrows)"


# ---------------------------------------------------------------------------
# lazy categories


class LazyCategory:
    """Category whose hom-sets are computed on demand and cached.

    ``hom_fn(a, b)`` yields payloads in canonical order, ``compose_fn(g, f)``
    takes two :class:`LArr` and returns the composite payload, and
    ``identity_fn(a)`` returns the identity payload of object ``a`` (which
    must also appear in ``hom_fn(a, a)``).
    """

    def __init__(self, object_keys, hom_fn, compose_fn, identity_fn, *,
                 name="", label_fn=None, rank_bound=None):
        self._keys = list(object_keys)
        self._key_id = {}
        for i, k in enumerate(self._keys):
            if k in self._key_id:
                raise MalformedModel(f"duplicate object key {k!r}")
            self._key_id[k] = i
        self._hom_fn = hom_fn
        self._compose_fn = compose_fn
        self._identity_fn = identity_fn
        self.name = name
        self._label_fn = label_fn
        self.rank_bound = rank_bound
        self._hom = {}
        self._comp = {}
        self._ids = {}

    @property
    def objects(self):
        return range(len(self._keys))

    @property
    def n_objects(self):
        return len(self._keys)

    def object_key(self, a):
        return self._keys[a]

    def id_of_key(self, key):
        return self._key_id[key]

    def has_key(self, key):
        return key in self._key_id

    def dom(self, f):
        return f.dom

    def cod(self, f):
        return f.cod

    def identity(self, a):
        arr = self._ids.get(a)
        if arr is None:
            arr = LArr(a, a, self._identity_fn(a))
            self._ids[a] = arr
        return arr

    def is_identity(self, f):
        return f.dom == f.cod and f == self.identity(f.dom)

    def hom(self, a, b):
        key = (a, b)
        got = self._hom.get(key)
        if got is None:
            got = tuple(LArr(a, b, t) for t in self._hom_fn(a, b))
            self._hom[key] = got
        return got

    def compose(self, g, f):
        if f.cod != g.dom:
            raise MalformedModel("composing non-composable lazy arrows")
        key = (g, f)
        got = self._comp.get(key)
        if got is None:
            got = LArr(f.dom, g.cod, self._compose_fn(g, f))
            self._comp[key] = got
        return got

    def all_arrows(self):
        for a in self.objects:
            for b in self.objects:
                yield from self.hom(a, b)

    def object_label(self, a):
        if self._label_fn:
            return self._label_fn(self._keys[a])
        return str(self._keys[a])

    def arrow_label(self, f):
        return f"{self.object_label(f.dom)}->{self.object_label(f.cod)}:{f.tag}"

    def __repr__(self):
        return f"LazyCategory({self.name or 'anon'}: {len(self._keys)} objects)"


# ---------------------------------------------------------------------------
# opposite view


def _flip(f):
    return LArr(f.cod, f.dom, f.tag) if isinstance(f, LArr) else f


class OpCategory:
    """Opposite of a category as a view; ``opposite`` unwraps, so the double
    opposite is structurally the original object."""

    def __init__(self, base):
        self.base = base
        self.name = f"op({getattr(base, 'name', '')})"

    @property
    def objects(self):
        return self.base.objects

    @property
    def n_objects(self):
        return self.base.n_objects

    @property
    def rank_bound(self):
        return getattr(self.base, "rank_bound", None)

    def object_key(self, a):
        return self.base.object_key(a) if hasattr(self.base, "object_key") else a

    def dom(self, f):
        return self.base.cod(f) if not isinstance(f, LArr) else f.dom

    def cod(self, f):
        return self.base.dom(f) if not isinstance(f, LArr) else f.cod

    def identity(self, a):
        return _flip(self.base.identity(a))

    def is_identity(self, f):
        return self.base.is_identity(_flip(f))

    def hom(self, a, b):
        return tuple(_flip(f) for f in self.base.hom(b, a))

    def compose(self, g, f):
        # f: a->b, g: b->c here means base arrows b->a and c->b
        return _flip(self.base.compose(_flip(f), _flip(g)))

    def all_arrows(self):
        return (_flip(f) for f in self.base.all_arrows())

    def object_label(self, a):
        return self.base.object_label(a)

    def arrow_label(self, f):
        return "op:" + self.base.arrow_label(_flip(f))

    def __repr__(self):
        return f"OpCategory({self.base!r})"


def opposite(cat):
    if isinstance(cat, OpCategory):
        return cat.base
    return OpCategory(cat)


# ---------------------------------------------------------------------------
# functors


class Functor:
    """Functor backed by callables, with per-object/per-arrow caches."""

    def __init__(self, source, target, ob_fn, ar_fn, name=""):
        self.source = source
        self.target = target
        self._ob_fn = ob_fn
        self._ar_fn = ar_fn
        self.name = name
        self._ob = {}
        self._ar = {}

    def ob(self, a):
        got = self._ob.get(a)
        if got is None:
            got = self._ob_fn(a)
            self._ob[a] = got
        return got

    def ar(self, f):
        got = self._ar.get(f)
        if got is None:
            got = self._ar_fn(f)
            self._ar[f] = got
        return got

    @staticmethod
    def identity_functor(cat):
        return Functor(cat, cat, lambda a: a, lambda f: f, name="id")

    @staticmethod
    def from_tables(source, target, ob_map, ar_map, name=""):
        return Functor(source, target, lambda a: ob_map[a], lambda f: ar_map[f], name=name)

    def __repr__(self):
        return f"Functor({self.name or 'anon'})"


def compose_functors(second, first, name=""):
    """second ∘ first."""
    return Functor(first.source, second.target,
                   lambda a: second.ob(first.ob(a)),
                   lambda f: second.ar(first.ar(f)),
                   name=name or f"{second.name}∘{first.name}")


def op_functor(F):
    """The same functor between the opposite categories."""
    return Functor(opposite(F.source), opposite(F.target),
                   F.ob, lambda f: _flip(F.ar(_flip(f))), name=f"op({F.name})")


def check_functor(F, bound=None, objects=None):
    """Violations of identity/composition preservation (and typing)."""
    out = []
    src, tgt = F.source, F.target
    objs = list(objects) if objects is not None \
        else [a for a in src.objects if bound is None or a <= bound]
    for a in objs:
        fa = F.ob(a)
        ia = F.ar(src.identity(a))
        if ia != tgt.identity(fa):
            out.append({"kind": "functor-identity", "object": a})
    bad = set()
    for a in objs:
        for b in objs:
            for f in src.hom(a, b):
                ff = F.ar(f)
                if tgt.dom(ff) != F.ob(a) or tgt.cod(ff) != F.ob(b):
                    out.append({"kind": "functor-typing", "arrow": f})
                    bad.add(f)
    for a in objs:
        for b in objs:
            for f in src.hom(a, b):
                if f in bad:
                    continue
                for c in objs:
                    for g in src.hom(b, c):
                        if g in bad:
                            continue
                        if F.ar(src.compose(g, f)) != tgt.compose(F.ar(g), F.ar(f)):
                            out.append({"kind": "functor-composition", "pair": (g, f)})
    return out


def functors_equal(F, G, bound=None, objects=None):
    """On-the-nose equality, object- and arrow-wise."""
    src = F.source
    objs = list(objects) if objects is not None \
        else [a for a in src.objects if bound is None or a <= bound]
    for a in objs:
        if F.ob(a) != G.ob(a):
            return False
    for a in objs:
        for b in objs:
            for f in src.hom(a, b):
                if F.ar(f) != G.ar(f):
                    return False
    return True


def enumerate_functors(src, tgt):
    """All functors src -> tgt, brute force.  Only for very small categories."""
    objs = list(src.objects)
    arrows = [f for f in src.all_arrows() if not src.is_identity(f)]
    results = []
    for ob_choice in itertools.product(list(tgt.objects), repeat=len(objs)):
        ob_map = dict(zip(objs, ob_choice))
        cands = []
        ok = True
        for f in arrows:
            cand = tgt.hom(ob_map[src.dom(f)], ob_map[src.cod(f)])
            if not cand:
                ok = False
                break
            cands.append(cand)
        if not ok:
            continue
        for choice in itertools.product(*cands):
            ar_map = dict(zip(arrows, choice))
            for a in objs:
                ar_map[src.identity(a)] = tgt.identity(ob_map[a])
            good = True
            for f in list(ar_map):
                for g in list(ar_map):
                    if src.dom(g) == src.cod(f):
                        h = src.compose(g, f)
                        if tgt.compose(ar_map[g], ar_map[f]) != ar_map[h]:
                            good = False
                            break
                if not good:
                    break
            if good:
                om, am = dict(ob_map), dict(ar_map)
                results.append(Functor(src, tgt, lambda a, om=om: om[a],
                                       lambda f, am=am: am[f]))
    return results


# ---------------------------------------------------------------------------
# law checking


@dataclass
class LawReport:
    violations: list = field(default_factory=list)
    checked: dict = field(default_factory=dict)
    bounded: bool = False

    @property
    def ok(self):
        return not self.violations

    def to_json(self):
        return {"ok": self.ok, "bounded": self.bounded,
                "checked": self.checked, "violations": self.violations}


def check_category_laws(cat, bound=None) -> LawReport:
    """Identity neutrality, associativity, and (for explicit categories)
    exactness of the compose table.  Every violated instance is listed."""
    if bound is None:
        bound = getattr(cat, "rank_bound", None)
    rep = LawReport()
    objs = [a for a in cat.objects if bound is None or a <= bound]
    rep.bounded = len(objs) < cat.n_objects
    if isinstance(cat, FinCategory):
        composable = set()
        for f in cat.all_arrows():
            for g in cat.all_arrows():
                if cat.dom(g) == cat.cod(f):
                    composable.add((g, f))
        table = set(cat._compose.keys())
        for pair in sorted(composable - table):
            rep.violations.append({"kind": "compose-missing", "pair": list(pair)})
        for pair in sorted(table - composable):
            rep.violations.append({"kind": "compose-extra", "pair": list(pair)})
        for (g, f), h in sorted(cat._compose.items()):
            if (g, f) in composable and (cat.dom(h) != cat.dom(f) or cat.cod(h) != cat.cod(g)):
                rep.violations.append({"kind": "compose-typing", "pair": [g, f], "result": h})
    n_id = n_assoc = 0
    for a in objs:
        ia = cat.identity(a)
        if cat.dom(ia) != a or cat.cod(ia) != a:
            rep.violations.append({"kind": "identity-typing", "object": a})
    for a in objs:
        for b in objs:
            for f in cat.hom(a, b):
                n_id += 1
                gf = cat.try_compose(f, cat.identity(a)) if isinstance(cat, FinCategory) \
                    else cat.compose(f, cat.identity(a))
                if gf != f:
                    rep.violations.append({"kind": "right-identity", "arrow": _arr_json(f)})
                fg = cat.try_compose(cat.identity(b), f) if isinstance(cat, FinCategory) \
                    else cat.compose(cat.identity(b), f)
                if fg != f:
                    rep.violations.append({"kind": "left-identity", "arrow": _arr_json(f)})
    for a in objs:
        for b in objs:
            for f in cat.hom(a, b):
                for c in objs:
                    for g in cat.hom(b, c):
                        gf = cat.try_compose(g, f) if isinstance(cat, FinCategory) else cat.compose(g, f)
                        if gf is None:
                            continue
                        for d in objs:
                            for h in cat.hom(c, d):
                                n_assoc += 1
                                hg = cat.try_compose(h, g) if isinstance(cat, FinCategory) else cat.compose(h, g)
                                if hg is None:
                                    continue
                                lhs = cat.try_compose(h, gf) if isinstance(cat, FinCategory) else cat.compose(h, gf)
                                rhs = cat.try_compose(hg, f) if isinstance(cat, FinCategory) else cat.compose(hg, f)
                                if lhs != rhs:
                                    rep.violations.append({
                                        "kind": "associativity",
                                        "triple": [_arr_json(h), _arr_json(g), _arr_json(f)]})
    rep.checked = {"identity_instances": n_id, "associativity_instances": n_assoc}
    return rep


def _arr_json(f):
    if isinstance(f, LArr):
        return [f.dom, f.cod, repr(f.tag)]
    return f


# ---------------------------------------------------------------------------
# chosen structure


@dataclass
class ChosenStructure:
    """Explicitly chosen limits/colimits/exponentials/points.

    All entries are data to be verified, never synthesized silently.  With
    ``partial_ok`` set, a missing entry means "out of the materialized
    range" rather than "absent".
    """

    terminal: Optional[int] = None
    terminal_maps: dict = field(default_factory=dict)     # A -> (A -> 1)
    initial: Optional[int] = None
    initial_maps: dict = field(default_factory=dict)      # A -> (0 -> A)
    products: dict = field(default_factory=dict)          # (A,B) -> (P, pA, pB)
    coproducts: dict = field(default_factory=dict)        # (A,B) -> (C, jA, jB)
    exponentials: dict = field(default_factory=dict)      # (A,B) -> (B^A, ev: A×B^A -> B)
    points: dict = field(default_factory=dict)            # A -> (1 -> A)
    weak_products: set = field(default_factory=set)
    weak_coproducts: set = field(default_factory=set)
    partial_ok: bool = False

    def register_unit_products(self, cat):
        """Force the strict-unital entries A×1 = A and 1×A = A."""
        if self.terminal is None:
            return
        one = self.terminal
        for a in cat.objects:
            bang = self.terminal_maps.get(a)
            if bang is None:
                continue
            self.products.setdefault((a, one), (a, cat.identity(a), bang))
            self.products.setdefault((one, a), (a, bang, cat.identity(a)))

    def register_unit_coproducts(self, cat):
        if self.initial is None:
            return
        zero = self.initial
        for a in cat.objects:
            inc = self.initial_maps.get(a)
            if inc is None:
                continue
            self.coproducts.setdefault((a, zero), (a, cat.identity(a), inc))
            self.coproducts.setdefault((zero, a), (a, inc, cat.identity(a)))


class StructOps:
    """Cached helpers around a category with chosen structure: pairing,
    copairing, exponential transposes, n-fold products, the distributivity
    iso theta and the four-fold iso omega."""

    def __init__(self, cat, structure: ChosenStructure):
        self.cat = cat
        self.st = structure
        self._pairs = {}
        self._copairs = {}
        self._inverses = {}

    # -- lookups -----------------------------------------------------------
    def product(self, a, b):
        got = self.st.products.get((a, b))
        if got is None:
            raise MissingStructure(f"no chosen product of objects {a},{b}")
        return got

    def try_product(self, a, b):
        return self.st.products.get((a, b))

    def coproduct(self, a, b):
        got = self.st.coproducts.get((a, b))
        if got is None:
            raise MissingStructure(f"no chosen coproduct of objects {a},{b}")
        return got

    def try_coproduct(self, a, b):
        return self.st.coproducts.get((a, b))

    def exponential(self, a, b):
        got = self.st.exponentials.get((a, b))
        if got is None:
            raise MissingStructure(f"no chosen exponential ({b})^({a})")
        return got

    def try_exponential(self, a, b):
        return self.st.exponentials.get((a, b))

    def terminal(self):
        if self.st.terminal is None:
            raise MissingStructure("no chosen terminal object")
        return self.st.terminal

    def terminal_map(self, a):
        got = self.st.terminal_maps.get(a)
        if got is None:
            raise MissingStructure(f"no chosen map from {a} to the terminal object")
        return got

    def initial(self):
        if self.st.initial is None:
            raise MissingStructure("no chosen initial object")
        return self.st.initial

    def initial_map(self, a):
        got = self.st.initial_maps.get(a)
        if got is None:
            raise MissingStructure(f"no chosen map from the initial object to {a}")
        return got

    def point(self, a):
        got = self.st.points.get(a)
        if got is None:
            raise MissingStructure(f"no chosen point of object {a}")
        return got

    # -- mediating arrows ---------------------------------------------------
    def pair(self, f, g, a=None, b=None):
        """The unique <f,g>: dom(f) -> A×B for f: C->A, g: C->B."""
        cat = self.cat
        a = cat.cod(f) if a is None else a
        b = cat.cod(g) if b is None else b
        key = (f, g, a, b)
        got = self._pairs.get(key)
        if got is not None:
            return got
        p, pa, pb = self.product(a, b)
        c = cat.dom(f)
        for m in cat.hom(c, p):
            if cat.compose(pa, m) == f and cat.compose(pb, m) == g:
                self._pairs[key] = m
                return m
        raise MissingStructure(
            f"no mediating arrow into product ({a},{b}); chosen product unverified?")

    def copair(self, f, g, a=None, b=None):
        """The unique [f,g]: A+B -> cod(f) for f: A->C, g: B->C."""
        cat = self.cat
        a = cat.dom(f) if a is None else a
        b = cat.dom(g) if b is None else b
        key = (f, g, a, b)
        got = self._copairs.get(key)
        if got is not None:
            return got
        c_obj, ja, jb = self.coproduct(a, b)
        c = cat.cod(f)
        for m in cat.hom(c_obj, c):
            if cat.compose(m, ja) == f and cat.compose(m, jb) == g:
                self._copairs[key] = m
                return m
        raise MissingStructure(
            f"no mediating arrow out of coproduct ({a},{b}); chosen coproduct unverified?")

    def swap(self, a, b):
        """The symmetry A×B -> B×A."""
        _, pa, pb = self.product(a, b)
        return self.pair(pb, pa, b, a)

    def find_inverse(self, f):
        got = self._inverses.get(f)
        if got is not None:
            return got
        cat = self.cat
        a, b = cat.dom(f), cat.cod(f)
        for g in cat.hom(b, a):
            if cat.compose(g, f) == cat.identity(a) and cat.compose(f, g) == cat.identity(b):
                self._inverses[f] = g
                return g
        return None

    # -- exponentials --------------------------------------------------------
    def transpose(self, k, c, a, b):
        """lambda(k): C -> B^A for k: C×A -> B, against ev: A×B^A -> B."""
        cat = self.cat
        e, ev = self.exponential(a, b)
        _, pc, pa = self.product(c, a)
        for m in cat.hom(c, e):
            if cat.compose(ev, self.pair(pa, cat.compose(m, pc), a, e)) == k:
                return m
        raise MissingStructure(f"no exponential transpose into ({b})^({a})")

    def untranspose(self, m, c, a, b):
        """ev∘<pi_A, m pi_C>: C×A -> B for m: C -> B^A."""
        cat = self.cat
        e, ev = self.exponential(a, b)
        _, pc, pa = self.product(c, a)
        return cat.compose(ev, self.pair(pa, cat.compose(m, pc), a, e))

    def transpose_ac(self, k, a, c, b):
        """lambda(k): C -> B^A for k: A×C -> B (product on the other side)."""
        cat = self.cat
        e, ev = self.exponential(a, b)
        _, pa, pc = self.product(a, c)
        for m in cat.hom(c, e):
            if cat.compose(ev, self.pair(pa, cat.compose(m, pc), a, e)) == k:
                return m
        raise MissingStructure(f"no exponential transpose into ({b})^({a})")

    def untranspose_ac(self, m, a, c, b):
        cat = self.cat
        e, ev = self.exponential(a, b)
        _, pa, pc = self.product(a, c)
        return cat.compose(ev, self.pair(pa, cat.compose(m, pc), a, e))

    # -- n-fold products (left-nested) ---------------------------------------
    def prodn(self, factors):
        if not factors:
            return self.terminal()
        acc = factors[0]
        for x in factors[1:]:
            acc = self.product(acc, x)[0]
        return acc

    def projn(self, factors, i):
        """Projection prodn(factors) -> factors[i] of the left-nested product."""
        cat = self.cat
        n = len(factors)
        if n == 1:
            return cat.identity(factors[0])
        objs = [factors[0]]
        for x in factors[1:]:
            objs.append(self.product(objs[-1], x)[0])
        if i == n - 1:
            _, _, pb = self.product(objs[-2], factors[-1])
            return pb
        arr = self.product(objs[-2], factors[-1])[1]  # top -> objs[-2]
        for j in range(n - 2, 0, -1):
            if i == j:
                _, _, pb = self.product(objs[j - 1], factors[j])
                return cat.compose(pb, arr)
            arr = cat.compose(self.product(objs[j - 1], factors[j])[1], arr)
        return arr

    def pairn(self, arrows, factors):
        """<f0,...,fk>: common dom -> prodn(factors), left-nested."""
        acc = arrows[0]
        acc_obj = factors[0]
        for f, x in zip(arrows[1:], factors[1:]):
            acc = self.pair(acc, f, acc_obj, x)
            acc_obj = self.product(acc_obj, x)[0]
        return acc

    # -- canonical isos -------------------------------------------------------
    def theta(self, i, x, y):
        """The canonical (I×X)+(I×Y) -> I×(X+Y) with a verified inverse."""
        cat = self.cat
        _, pix_i, pix_x = self.product(i, x)
        _, piy_i, piy_y = self.product(i, y)
        xy, jx, jy = self.coproduct(x, y)
        left = self.pair(pix_i, cat.compose(jx, pix_x), i, xy)
        right = self.pair(piy_i, cat.compose(jy, piy_y), i, xy)
        ix = self.product(i, x)[0]
        iy = self.product(i, y)[0]
        th = self.copair(left, right, ix, iy)
        inv = self.find_inverse(th)
        if inv is None:
            raise MissingStructure(
                f"theta({i};{x},{y}) is not invertible: base not distributive there")
        return th, inv

    def theta_left(self, a, b, c):
        """The canonical (A×C)+(B×C) -> (A+B)×C with a verified inverse."""
        cat = self.cat
        _, pac_a, pac_c = self.product(a, c)
        _, pbc_b, pbc_c = self.product(b, c)
        ab, ja, jb = self.coproduct(a, b)
        left = self.pair(cat.compose(ja, pac_a), pac_c, ab, c)
        right = self.pair(cat.compose(jb, pbc_b), pbc_c, ab, c)
        ac = self.product(a, c)[0]
        bc = self.product(b, c)[0]
        th = self.copair(left, right, ac, bc)
        inv = self.find_inverse(th)
        if inv is None:
            raise MissingStructure(
                f"theta_left({a},{b};{c}) is not invertible: base not distributive there")
        return th, inv

    def omega(self, i, y, a, b):
        """The canonical (I+Y)×(A+B) -> ((I×A)+(I×B)) + ((Y×A)+(Y×B)),
        with verified inverse.  Returns (omega, inverse, c4, injections)
        where injections are the four composite injections into c4."""
        cat = self.cat
        iy, j_i, j_y = self.coproduct(i, y)
        ab, j_a, j_b = self.coproduct(a, b)
        ia = self.product(i, a)[0]
        ib = self.product(i, b)[0]
        ya = self.product(y, a)[0]
        yb = self.product(y, b)[0]
        left, l1, l2 = self.coproduct(ia, ib)
        right, r1, r2 = self.coproduct(ya, yb)
        c4, jl, jr = self.coproduct(left, right)

        def leg(src_i, src_a, ji, ja):
            _, p1, p2 = self.product(src_i, src_a)
            return self.pair(cat.compose(ji, p1), cat.compose(ja, p2), iy, ab)

        inv = self.copair(
            self.copair(leg(i, a, j_i, j_a), leg(i, b, j_i, j_b), ia, ib),
            self.copair(leg(y, a, j_y, j_a), leg(y, b, j_y, j_b), ya, yb),
            left, right)
        om = self.find_inverse(inv)
        if om is None:
            raise MissingStructure("omega is not invertible: base not distributive there")
        injections = (cat.compose(jl, l1), cat.compose(jl, l2),
                      cat.compose(jr, r1), cat.compose(jr, r2))
        return om, inv, c4, injections

    # -- strictness ------------------------------------------------------------
    def strict_coherence_violations(self, bound=None):
        """Chosen products must be strictly associative and unital for the
        quantifier-completion formulas; list every violated instance."""
        cat = self.cat
        out = []
        objs = [o for o in cat.objects if bound is None or o <= bound]
        one = self.st.terminal
        if one is not None:
            for a in objs:
                pa1 = self.st.products.get((a, one))
                if pa1 is not None and (pa1[0] != a or pa1[1] != cat.identity(a)):
                    out.append({"kind": "unit-product", "object": a})
        for a in objs:
            for b in objs:
                ab = self.st.products.get((a, b))
                if ab is None:
                    continue
                for c in objs:
                    left_inner = self.st.products.get((a, b))
                    left = self.st.products.get((left_inner[0], c))
                    inner_r = self.st.products.get((b, c))
                    if left is None or inner_r is None:
                        continue
                    right = self.st.products.get((a, inner_r[0]))
                    if right is None:
                        continue
                    if left[0] != right[0]:
                        out.append({"kind": "assoc-object", "triple": [a, b, c],
                                    "left": left[0], "right": right[0]})
                        continue
                    # projections must agree componentwise
                    try:
                        pa_l = cat.compose(left_inner[1], left[1])
                        pb_l = cat.compose(left_inner[2], left[1])
                        pc_l = left[2]
                        pa_r = right[1]
                        pb_r = cat.compose(inner_r[1], right[2])
                        pc_r = cat.compose(inner_r[2], right[2])
                    except MalformedModel:
                        out.append({"kind": "assoc-ill-typed", "triple": [a, b, c]})
                        continue
                    if (pa_l, pb_l, pc_l) != (pa_r, pb_r, pc_r):
                        out.append({"kind": "assoc-projections", "triple": [a, b, c]})
        return out


# ---------------------------------------------------------------------------
# iso search (public op)


def iso_search(cat, a, b):
    """First (f, g) with g∘f = id_a and f∘g = id_b in hom-enumeration order,
    or None.  Tie-break: lexicographic on (position of f, position of g)."""
    for f in cat.hom(a, b):
        for g in cat.hom(b, a):
            if cat.compose(g, f) == cat.identity(a) and cat.compose(f, g) == cat.identity(b):
                return (f, g)
    return None


def canonical_map(cat, structure, spec):
    """Structural morphisms determined by universal properties.

    ``spec`` is a tuple: ("pair", f, g) | ("copair", f, g) |
    ("theta", I, X, Y) | ("omega", I, Y, A, B) | ("swap", A, B) |
    ("ev_transpose", k, C, A, B).  theta/omega return (arrow, inverse).
    """
    ops = StructOps(cat, structure)
    kind = spec[0]
    if kind == "pair":
        return ops.pair(spec[1], spec[2])
    if kind == "copair":
        return ops.copair(spec[1], spec[2])
    if kind == "theta":
        return ops.theta(spec[1], spec[2], spec[3])[:2]
    if kind == "omega":
        om, inv, _, _ = ops.omega(spec[1], spec[2], spec[3], spec[4])
        return om, inv
    if kind == "swap":
        return ops.swap(spec[1], spec[2])
    if kind == "ev_transpose":
        return ops.transpose(spec[1], spec[2], spec[3], spec[4])
    raise MissingStructure(f"unknown canonical map spec {kind!r}")


# ---------------------------------------------------------------------------
# base classification


@dataclass
class Verdict:
    ok: bool
    up_to_bound: bool = False
    witness: Any = None
    counterexample: Any = None
    note: str = ""

    def to_json(self):
        out = {"ok": self.ok}
        if self.up_to_bound:
            out["up_to_bound"] = True
        if self.witness is not None:
            out["witness"] = self.witness
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class BaseReport:
    has_terminal: Verdict = None
    has_initial: Verdict = None
    has_products: Verdict = None
    has_coproducts: Verdict = None
    is_distributive: Verdict = None
    exponentials: Verdict = None
    has_points: Verdict = None
    products_strict_coherent: Verdict = None
    bound: Optional[int] = None

    @property
    def cartesian_closed(self):
        return (self.has_terminal.ok and self.has_products.ok and self.exponentials.ok)

    def to_json(self):
        return {k: v.to_json() if isinstance(v, Verdict) else v
                for k, v in self.__dict__.items() if v is not None}


def _verify_product_entry(cat, entry, objs, pair=None):
    p, pa, pb = entry
    if pair is not None:
        a, b = pair
        if cat.dom(pa) != p or cat.cod(pa) != a or \
                cat.dom(pb) != p or cat.cod(pb) != b:
            return {"reason": "ill-typed projections"}
    for c in objs:
        for f in cat.hom(c, cat.cod(pa)):
            for g in cat.hom(c, cat.cod(pb)):
                n = 0
                for m in cat.hom(c, p):
                    if cat.compose(pa, m) == f and cat.compose(pb, m) == g:
                        n += 1
                if n != 1:
                    return {"cone": [_arr_json(f), _arr_json(g)], "mediating_count": n}
    return None


def _verify_coproduct_entry(cat, entry, objs, pair=None):
    c_obj, ja, jb = entry
    if pair is not None:
        a, b = pair
        if cat.dom(ja) != a or cat.cod(ja) != c_obj or \
                cat.dom(jb) != b or cat.cod(jb) != c_obj:
            return {"reason": "ill-typed injections"}
    for c in objs:
        for f in cat.hom(cat.dom(ja), c):
            for g in cat.hom(cat.dom(jb), c):
                n = 0
                for m in cat.hom(c_obj, c):
                    if cat.compose(m, ja) == f and cat.compose(m, jb) == g:
                        n += 1
                if n != 1:
                    return {"cocone": [_arr_json(f), _arr_json(g)], "mediating_count": n}
    return None


def classify_base(cat, structure: ChosenStructure, bound=None) -> BaseReport:
    """Verify the chosen structure exhaustively (up to bound on virtual
    categories) and report verdicts with witnesses or counterexamples."""
    if bound is None:
        bound = getattr(cat, "rank_bound", None)
    objs = [a for a in cat.objects if bound is None or a <= bound]
    up = len(objs) < cat.n_objects
    st = structure
    rep = BaseReport(bound=bound)

    # terminal / initial
    if st.terminal is None:
        rep.has_terminal = Verdict(False, note="no chosen terminal")
    else:
        bad = None
        for c in objs:
            h = cat.hom(c, st.terminal)
            if len(h) != 1 or st.terminal_maps.get(c) != h[0]:
                bad = {"object": c, "hom_size": len(h)}
                break
        rep.has_terminal = Verdict(bad is None, up, witness=st.terminal, counterexample=bad)
    if st.initial is None:
        rep.has_initial = Verdict(False, note="no chosen initial")
    else:
        bad = None
        for c in objs:
            h = cat.hom(st.initial, c)
            if len(h) != 1 or st.initial_maps.get(c) != h[0]:
                bad = {"object": c, "hom_size": len(h)}
                break
        rep.has_initial = Verdict(bad is None, up, witness=st.initial, counterexample=bad)

    # products / coproducts
    missing, broken = [], []
    for a in objs:
        for b in objs:
            entry = st.products.get((a, b))
            if entry is None:
                if not st.partial_ok:
                    missing.append([a, b])
                continue
            bad = _verify_product_entry(cat, entry, objs, pair=(a, b))
            if bad is not None:
                broken.append({"pair": [a, b], **bad})
    ok = not missing and not broken
    rep.has_products = Verdict(ok, up or st.partial_ok,
                               counterexample=(missing + broken) or None)
    missing, broken = [], []
    for a in objs:
        for b in objs:
            entry = st.coproducts.get((a, b))
            if entry is None:
                if not st.partial_ok:
                    missing.append([a, b])
                continue
            bad = _verify_coproduct_entry(cat, entry, objs, pair=(a, b))
            if bad is not None:
                broken.append({"pair": [a, b], **bad})
    ok = not missing and not broken
    rep.has_coproducts = Verdict(ok, up or st.partial_ok,
                                 counterexample=(missing + broken) or None)

    # distributivity via theta
    ops = StructOps(cat, st)
    bad = None
    n_checked = 0
    if rep.has_products.ok and rep.has_coproducts.ok:
        for i in objs:
            for x in objs:
                for y in objs:
                    need = (st.products.get((i, x)) and st.products.get((i, y))
                            and st.coproducts.get((x, y)))
                    if not need:
                        continue
                    if st.products.get((i, st.coproducts[(x, y)][0])) is None:
                        continue
                    try:
                        ops.theta(i, x, y)
                        n_checked += 1
                    except (MissingStructure, MalformedModel):
                        bad = {"triple": [i, x, y]}
                        break
                if bad:
                    break
            if bad:
                break
        rep.is_distributive = Verdict(bad is None, up or st.partial_ok,
                                      witness={"instances": n_checked}, counterexample=bad)
    else:
        rep.is_distributive = Verdict(False, note="needs products and coproducts")

    # exponentials: transposition bijection hom(C×A,B) ≅ hom(C,B^A)
    missing, broken = [], []
    for a in objs:
        for b in objs:
            entry = st.exponentials.get((a, b))
            if entry is None:
                if not st.partial_ok:
                    missing.append([a, b])
                continue
            e, ev = entry
            ae = st.products.get((a, e))
            if ae is None:
                if not st.partial_ok:
                    broken.append({"pair": [a, b], "reason": "no product A×B^A for ev"})
                continue
            if cat.dom(ev) != ae[0] or cat.cod(ev) != b:
                broken.append({"pair": [a, b], "reason": "ev-typing"})
                continue
            for c in objs:
                if st.products.get((c, a)) is None:
                    continue
                ca = st.products[(c, a)][0]
                images = set()
                try:
                    for m in cat.hom(c, e):
                        images.add(ops.untranspose(m, c, a, b))
                except (MissingStructure, MalformedModel):
                    broken.append({"pair": [a, b], "at": c,
                                   "reason": "ill-typed ev"})
                    break
                if len(images) != len(cat.hom(c, e)) or len(images) != len(cat.hom(ca, b)):
                    broken.append({"pair": [a, b], "at": c,
                                   "hom_CE": len(cat.hom(c, e)),
                                   "hom_CAB": len(cat.hom(ca, b)),
                                   "image": len(images)})
                    break
    ok = not missing and not broken
    rep.exponentials = Verdict(ok, up or st.partial_ok,
                               counterexample=(missing + broken) or None)

    # points
    bad = None
    if st.terminal is None:
        rep.has_points = Verdict(False, note="needs a terminal object")
    else:
        for a in objs:
            if st.initial is not None and a == st.initial:
                continue
            pt = st.points.get(a)
            if pt is None or cat.dom(pt) != st.terminal or cat.cod(pt) != a:
                bad = a
                break
        rep.has_points = Verdict(bad is None, up, counterexample=bad)

    viols = ops.strict_coherence_violations(bound)
    rep.products_strict_coherent = Verdict(not viols, up or st.partial_ok,
                                           counterexample=viols or None)
    return rep


# ---------------------------------------------------------------------------
# materialization


def materialize(cat, max_arrows=200_000, name=None):
    """Explicit FinCategory copy of any protocol category."""
    if isinstance(cat, FinCategory):
        return cat
    objs = list(cat.objects)
    arrows = []
    index = {}
    for a in objs:
        for b in objs:
            for f in cat.hom(a, b):
                index[f] = len(arrows)
                arrows.append(f)
                if len(arrows) > max_arrows:
                    raise SizeExceeded(f"materialization exceeds {max_arrows} arrows")
    dom = [cat.dom(f) for f in arrows]
    cod = [cat.cod(f) for f in arrows]
    identity = [index[cat.identity(a)] for a in objs]
    compose = {}
    for f in arrows:
        for g in arrows:
            if cat.dom(g) == cat.cod(f):
                compose[(index[g], index[f])] = index[cat.compose(g, f)]
                if len(compose) > 40 * max_arrows:
                    raise SizeExceeded("compose table too large to materialize")
    labels = [cat.object_label(a) for a in objs]
    return FinCategory(len(objs), dom, cod, identity, compose,
                       name=name or f"mat({getattr(cat, 'name', '')})",
                       object_labels=labels,
                       object_data=[cat.object_key(a) if hasattr(cat, "object_key") else a
                                    for a in objs])


def full_subcategory(cat, keep_objects, name=""):
    """Full subcategory on the given object ids (lazy view, payload = the
    ambient arrow)."""
    keep = list(keep_objects)
    back = {o: i for i, o in enumerate(keep)}

    def hom_fn(a, b):
        return cat.hom(keep[a], keep[b])

    def compose_fn(g, f):
        return cat.compose(g.tag, f.tag)

    def identity_fn(a):
        return cat.identity(keep[a])

    sub = LazyCategory(keep, hom_fn, compose_fn, identity_fn,
                       name=name or f"sub({getattr(cat, 'name', '')})",
                       label_fn=lambda k: cat.object_label(k))
    sub.ambient = cat
    sub.ambient_object = lambda a: keep[a]
    sub.ambient_id = back
    return sub


def sub_embed_arrow(sub, f):
    """Ambient arrow underlying a full-subcategory arrow."""
    return f.tag


def sub_restrict_arrow(sub, f, a, b):
    """View an ambient arrow as a subcategory arrow between sub ids a, b."""
    return LArr(a, b, f)


# ---------------------------------------------------------------------------
# builders


def poset_category(n, le, *, name="", object_labels=None):
    """Thin category from a reflexive-transitive relation le(i,j)."""
    dom, cod = [], []
    ids = {}
    arrow_of = {}
    for i in range(n):
        for j in range(n):
            if le(i, j):
                arrow_of[(i, j)] = len(dom)
                dom.append(i)
                cod.append(j)
    identity = [arrow_of[(i, i)] for i in range(n)]
    compose = {}
    for (i, j), f in arrow_of.items():
        for (j2, k), g in arrow_of.items():
            if j2 == j:
                compose[(g, f)] = arrow_of[(i, k)]
    labels = [f"{i}<={j}" for (i, j) in arrow_of]
    c = FinCategory(n, dom, cod, identity, compose, name=name,
                    object_labels=object_labels,
                    arrow_labels=labels,
                    arrow_data=list(arrow_of.keys()))
    c.arrow_of_pair = arrow_of
    return c


def poset_structure(cat) -> ChosenStructure:
    """Meets/joins/top/bottom of a thin category, where they exist."""
    st = ChosenStructure()
    n = cat.n_objects

    def le(a, b):
        return bool(cat.hom(a, b))

    tops = [t for t in range(n) if all(le(a, t) for a in range(n))]
    if tops:
        st.terminal = tops[0]
        st.terminal_maps = {a: cat.hom(a, tops[0])[0] for a in range(n)}
    bots = [b for b in range(n) if all(le(b, a) for a in range(n))]
    if bots:
        st.initial = bots[0]
        st.initial_maps = {a: cat.hom(bots[0], a)[0] for a in range(n)}
    for a in range(n):
        for b in range(n):
            meets = [m for m in range(n) if le(m, a) and le(m, b)
                     and all(le(x, m) for x in range(n) if le(x, a) and le(x, b))]
            if meets:
                m = meets[0]
                st.products[(a, b)] = (m, cat.hom(m, a)[0], cat.hom(m, b)[0])
            joins = [j for j in range(n) if le(a, j) and le(b, j)
                     and all(le(j, x) for x in range(n) if le(a, x) and le(b, x))]
            if joins:
                j = joins[0]
                st.coproducts[(a, b)] = (j, cat.hom(a, j)[0], cat.hom(b, j)[0])
    # Heyting implication where it exists: a=>b = max{c : c∧a <= b}
    for a in range(n):
        for b in range(n):
            cand = [c for c in range(n)
                    if (c, a) in st.products and le(st.products[(c, a)][0], b)]
            best = [c for c in cand if all(le(x, c) for x in cand)]
            if best and all((c, a) in st.products for c in range(n)):
                e = best[0]
                ea = st.products.get((a, e))
                if ea is not None:
                    ev = cat.hom(ea[0], b)
                    if ev:
                        st.exponentials[(a, b)] = (e, ev[0])
    if st.terminal is not None:
        for a in range(n):
            if st.initial is not None and a == st.initial:
                continue
            h = cat.hom(st.terminal, a)
            if h:
                st.points[a] = h[0]
    return st


def chain_category(n, name=None):
    """The n-object chain 0 <= 1 <= ... <= n-1."""
    c = poset_category(n, lambda i, j: i <= j, name=name or f"chain{n}")
    return c


def discrete_category(n, name=None):
    dom = list(range(n))
    cod = list(range(n))
    identity = list(range(n))
    compose = {(i, i): i for i in range(n)}
    return FinCategory(n, dom, cod, identity, compose, name=name or f"disc{n}")


def parallel_pair_category():
    """Two objects, two parallel non-identity arrows x ⇉ y."""
    dom = [0, 1, 0, 0]
    cod = [0, 1, 1, 1]
    identity = [0, 1]
    compose = {(0, 0): 0, (1, 1): 1, (2, 0): 2, (1, 2): 2, (3, 0): 3, (1, 3): 3}
    return FinCategory(2, dom, cod, identity, compose, name="parallel_pair",
                       arrow_labels=["id_x", "id_y", "a", "b"])


def monoid_category(table, name=""):
    """One-object category from a monoid multiplication table; element 0 is
    the unit."""
    n = len(table)
    dom = [0] * n
    cod = [0] * n
    identity = [0]
    compose = {(g, f): table[g][f] for g in range(n) for f in range(n)}
    return FinCategory(1, dom, cod, identity, compose, name=name)


def finset_skeleton(max_size, rank=None, name=None):
    """Skeleton of FinSet on objects 0..max_size; arrows are all functions,
    identified with tuples, enumerated in (dom, cod, graph-lex) order."""
    n = max_size + 1
    dom, cod, data, labels = [], [], [], []
    arrow_id = {}
    for m in range(n):
        for k in range(n):
            for t in itertools.product(range(k), repeat=m):
                arrow_id[(m, k, t)] = len(dom)
                dom.append(m)
                cod.append(k)
                data.append(t)
                labels.append(f"{m}->{k}{t}")
    identity = [arrow_id[(m, m, tuple(range(m)))] for m in range(n)]
    compose = {}
    for f in range(len(dom)):
        for g in range(len(dom)):
            if dom[g] == cod[f]:
                comp = tuple(data[g][x] for x in data[f])
                compose[(g, f)] = arrow_id[(dom[f], cod[g], comp)]
    c = FinCategory(n, dom, cod, identity, compose,
                    name=name or f"finset<={max_size}",
                    arrow_labels=labels, arrow_data=data,
                    rank_bound=rank if rank is not None else max_size)
    c.fn_arrow = lambda m, k, t: arrow_id[(m, k, tuple(t))]
    return c


def finset_structure(cat, max_size) -> ChosenStructure:
    """Chosen products (row-major pairing), coproducts, exponentials and
    points on a FinSet skeleton, defined where results stay in range."""
    st = ChosenStructure(partial_ok=True)
    fn = cat.fn_arrow
    n = max_size + 1
    st.terminal = 1
    st.terminal_maps = {a: fn(a, 1, (0,) * a) for a in range(n)}
    st.initial = 0
    st.initial_maps = {a: fn(0, a, ()) for a in range(n)}
    for a in range(n):
        for b in range(n):
            if a * b < n:
                p = a * b
                pa = fn(p, a, tuple(x // b for x in range(p)) if b else ())
                pb = fn(p, b, tuple(x % b for x in range(p)) if b else ())
                st.products[(a, b)] = (p, pa, pb)
            if a + b < n:
                c = a + b
                ja = fn(a, c, tuple(range(a)))
                jb = fn(b, c, tuple(a + x for x in range(b)))
                st.coproducts[(a, b)] = (c, ja, jb)
    for a in range(n):
        for b in range(n):
            e = b ** a
            if e < n:
                tables = list(itertools.product(range(b), repeat=a))
                if a * e < n:
                    ev = fn(a * e, b, tuple(tables[x % e][x // e] for x in range(a * e)))
                    st.exponentials[(a, b)] = (e, ev)
    for a in range(1, n):
        st.points[a] = fn(1, a, (0,))
    return st


def powerset_poset(n_elements, name=None):
    """Inclusion poset of subsets of {0..n-1}; object id = bitmask."""
    n = 1 << n_elements

    def le(s, t):
        return s & t == s

    labels = ["{" + ",".join(str(i) for i in range(n_elements) if s >> i & 1) + "}"
              for s in range(n)]
    return poset_category(n, le, name=name or f"P({n_elements})", object_labels=labels)


def product_category(c1, c2, name=""):
    """Product of two categories (lazy; payload = arrow pair)."""
    keys = [(a, b) for a in c1.objects for b in c2.objects]

    def hom_fn(a, b):
        (a1, a2), (b1, b2) = keys[a], keys[b]
        return tuple((f, g) for f in c1.hom(a1, b1) for g in c2.hom(a2, b2))

    def compose_fn(g, f):
        return (c1.compose(g.tag[0], f.tag[0]), c2.compose(g.tag[1], f.tag[1]))

    def identity_fn(a):
        (a1, a2) = keys[a]
        return (c1.identity(a1), c2.identity(a2))

    return LazyCategory(keys, hom_fn, compose_fn, identity_fn,
                        name=name or "product")
