"""Finite posets of commutative contexts and context-selection maps.

A context is stored as its partition of unity (the minimal projections of the
commutative algebra). Inclusion V' <= V means every atom of V' is a sum of
atoms of V. Inside a :class:`ContextPoset` contexts are referred to by integer
ids; the ids are a linear extension of the inclusion order, so id 0 is the
trivial context and smaller ids never sit above larger ones.
"""
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import operators as ops
from . import tolerance
from .errors import (
    DimMismatch,
    InvalidSelector,
    NoDominatingAtom,
    NonCommutingGenerators,
    NotIncluded,
    SelectorImageOutsidePoset,
    SelectorNotIdempotent,
    UnknownContext,
)


def _atom_key(p):
    grid = np.round(np.asarray(p) * 1e6) + 0.0
    return (ops.rank(p),) + tuple(zip(grid.real.ravel().tolist(), grid.imag.ravel().tolist()))


class Context:
    """A partition of unity into nonzero, pairwise orthogonal projections."""

    __slots__ = ("atoms", "dim", "_key")

    def __init__(self, atoms, check=True):
        atoms = [ops.as_matrix(a) for a in atoms]
        if not atoms:
            raise ValueError("a context needs at least one atom")
        dim = atoms[0].shape[0]
        if check:
            for a in atoms:
                if a.shape[0] != dim:
                    raise DimMismatch("atoms of different dimension")
                if not ops.is_projection(a) or ops.rank(a) < 1:
                    raise ValueError("atoms must be nonzero projections")
            for a, b in combinations(atoms, 2):
                if np.linalg.norm(a @ b) > tolerance.eps():
                    raise ValueError("atoms are not orthogonal")
            if not ops.close(sum(atoms), ops.identity(dim)):
                raise ValueError("atoms do not sum to the identity")
        keyed = sorted(((_atom_key(a), a) for a in atoms), key=lambda t: t[0])
        frozen = []
        for _, a in keyed:
            a = a.copy()
            a.flags.writeable = False
            frozen.append(a)
        self.atoms = tuple(frozen)
        self.dim = dim
        self._key = tuple(k for k, _ in keyed)

    @classmethod
    def trivial(cls, dim):
        return cls([ops.identity(dim)])

    def __len__(self):
        return len(self.atoms)

    def __hash__(self):
        return hash(self._key)

    def __eq__(self, other):
        if not isinstance(other, Context):
            return NotImplemented
        return (
            self.dim == other.dim
            and len(self) == len(other)
            and all(ops.close(a, b) for a, b in zip(self.atoms, other.atoms))
        )

    def __repr__(self):
        return f"Context(dim={self.dim}, ranks={[ops.rank(a) for a in self.atoms]})"

    def projection(self, atom_ids):
        out = ops.zeros(self.dim)
        for i in atom_ids:
            out = out + self.atoms[i]
        return out

    def atoms_below(self, p):
        """Atom ids whose atoms lie under ``p``."""
        return frozenset(i for i, a in enumerate(self.atoms) if ops.proj_leq(a, p))

    def contains_projection(self, p):
        return ops.close(self.projection(self.atoms_below(p)), p)

    def contains_operator(self, a):
        """True if ``a`` is a complex combination of the atoms."""
        a = ops.as_matrix(a)
        if a.shape[0] != self.dim:
            raise DimMismatch("operator and context dimensions differ")
        approx = sum((np.trace(q @ a) / ops.rank(q)) * q for q in self.atoms)
        return ops.close(approx, a)


def _refine(partition, projections):
    out = []
    for p in partition:
        for q in projections:
            m = p @ q
            if ops.rank(m) >= 1 and np.linalg.norm(m) > tolerance.eps():
                out.append(ops._nearest_projection(m))
    return out


def generate_context(operators, dim=None):
    """Common refinement of the spectral partitions of commuting Hermitian operators."""
    mats = [ops.as_matrix(a) for a in operators]
    if dim is None:
        if not mats:
            raise ValueError("dim is required for an empty generating set")
        dim = mats[0].shape[0]
    for m in mats:
        if m.shape[0] != dim:
            raise DimMismatch("generator dimension mismatch")
    for a, b in combinations(mats, 2):
        if not ops.commute(a, b):
            raise NonCommutingGenerators("generating operators do not commute")
    partition = [ops.identity(dim)]
    for m in mats:
        partition = _refine(partition, ops.spectral_decompose(m).projections)
    return Context(partition)


def includes(small, big):
    """True iff ``small`` is a subcontext of ``big``."""
    if small.dim != big.dim:
        raise DimMismatch("contexts live on different spaces")
    return all(big.contains_projection(a) for a in small.atoms)


def meet_context(a, b):
    """Largest context contained in both, from overlap components of the atoms."""
    n = len(a)
    parent = list(range(n + len(b)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, p in enumerate(a.atoms):
        for k, q in enumerate(b.atoms):
            if np.linalg.norm(p @ q) > tolerance.eps():
                parent[find(i)] = find(n + k)
    groups = {}
    for i, p in enumerate(a.atoms):
        groups.setdefault(find(i), []).append(p)
    return Context([sum(ps) for ps in groups.values()])


@dataclass(frozen=True)
class SpectrumElement:
    context: Context
    index: int

    def __post_init__(self):
        if not 0 <= self.index < len(self.context):
            raise IndexError("atom index out of range")

    @property
    def atom(self):
        return self.context.atoms[self.index]


def gelfand_restrict(sigma, target):
    """Restrict a spectrum element to a subcontext: the target atom above it."""
    if not includes(target, sigma.context):
        raise NotIncluded("target is not a subcontext")
    for k, q in enumerate(target.atoms):
        if ops.proj_leq(sigma.atom, q):
            return SpectrumElement(target, k)
    raise NoDominatingAtom("no atom of the subcontext dominates the element")


class ContextPoset:
    """A finite set of contexts ordered by inclusion, with the trivial context as bottom."""

    def __init__(self, contexts, labels=None):
        contexts = list(contexts)
        labels = list(labels) if labels is not None else [f"V{i}" for i in range(len(contexts))]
        if len(labels) != len(contexts) or len(set(labels)) != len(labels):
            raise ValueError("labels must be unique, one per context")
        if not contexts:
            raise ValueError("empty poset")
        dim = contexts[0].dim
        if any(c.dim != dim for c in contexts):
            raise DimMismatch("contexts on different spaces")
        if Context.trivial(dim) not in contexts:
            raise ValueError("poset must contain the trivial context")
        order = sorted(range(len(contexts)), key=lambda i: (len(contexts[i]), i))
        self.contexts = tuple(contexts[i] for i in order)
        self.labels = tuple(labels[i] for i in order)
        self.dim = dim
        n = len(self.contexts)
        leq = np.zeros((n, n), dtype=bool)
        for i in range(n):
            for k in range(n):
                leq[i, k] = i == k or (
                    len(self.contexts[i]) < len(self.contexts[k])
                    and includes(self.contexts[i], self.contexts[k])
                )
        self._leq = leq
        self._down = tuple(tuple(i for i in range(n) if leq[i, k]) for k in range(n))
        self._up = tuple(tuple(k for k in range(n) if leq[i, k]) for i in range(n))
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        self._restrict = {}
        for k in range(n):
            big = self.contexts[k]
            for i in self._down[k]:
                small = self.contexts[i]
                table = []
                for a in big.atoms:
                    hit = [q for q, b in enumerate(small.atoms) if ops.proj_leq(a, b)]
                    if len(hit) != 1:
                        raise NoDominatingAtom("broken atom restriction table")
                    table.append(hit[0])
                self._restrict[(k, i)] = tuple(table)

    def __len__(self):
        return len(self.contexts)

    def __iter__(self):
        return iter(range(len(self.contexts)))

    @property
    def bottom(self):
        return 0

    def leq(self, i, k):
        return bool(self._leq[i, k])

    def down(self, k):
        return self._down[k]

    def up(self, i):
        return self._up[i]

    def id_of(self, ref):
        if isinstance(ref, (int, np.integer)):
            if not 0 <= ref < len(self):
                raise UnknownContext(ref)
            return int(ref)
        if isinstance(ref, Context):
            for i, c in enumerate(self.contexts):
                if c == ref:
                    return i
            raise UnknownContext("context not in poset")
        if ref in self._index:
            return self._index[ref]
        raise UnknownContext(ref)

    def label(self, i):
        return self.labels[i]

    def n_atoms(self, i):
        return len(self.contexts[i])

    def atom(self, i, a):
        return self.contexts[i].atoms[a]

    def restrict_atom(self, k, a, i):
        """Index of the atom of context ``i`` above atom ``a`` of context ``k``."""
        try:
            return self._restrict[(k, i)][a]
        except KeyError:
            raise NotIncluded(f"{self.labels[i]} is not below {self.labels[k]}") from None

    def restrict_atoms(self, k, atoms, i):
        table = self._restrict.get((k, i))
        if table is None:
            raise NotIncluded(f"{self.labels[i]} is not below {self.labels[k]}")
        return frozenset(table[a] for a in atoms)

    def projection(self, i, atoms):
        return self.contexts[i].projection(atoms)

    def hasse_edges(self, domain=None):
        """Covering pairs (upper, lower) within ``domain`` (default: everything)."""
        dom = sorted(domain) if domain is not None else list(self)
        inside = set(dom)
        edges = []
        for k in dom:
            below = [i for i in self._down[k] if i != k and i in inside]
            for i in below:
                if not any(m != i and self._leq[i, m] for m in below):
                    edges.append((k, i))
        return edges

    def summary(self):
        return [
            {
                "label": self.labels[i],
                "atoms": len(self.contexts[i]),
                "ranks": [ops.rank(a) for a in self.contexts[i].atoms],
                "below": [self.labels[k] for k in self._down[i] if k != i],
            }
            for i in self
        ]


class Selector:
    """An endomap of a context poset, given by the image id of every context.

    Construction does not validate; call :func:`validate_selector` or
    :meth:`validated` for that, so that broken maps can still be inspected.
    """

    __slots__ = ("poset", "image")

    def __init__(self, poset, image):
        image = tuple(int(x) for x in image)
        if len(image) != len(poset):
            raise InvalidSelector("selector must be total on the poset")
        if any(not 0 <= x < len(poset) for x in image):
            raise SelectorImageOutsidePoset("selector image outside the poset")
        self.poset = poset
        self.image = image

    @classmethod
    def identity(cls, poset):
        return cls(poset, range(len(poset)))

    @classmethod
    def constant_bottom(cls, poset):
        return cls(poset, [poset.bottom] * len(poset))

    @classmethod
    def explicit(cls, poset, mapping):
        img = list(range(len(poset)))
        for src, dst in mapping.items():
            img[poset.id_of(src)] = poset.id_of(dst)
        return cls(poset, img)

    def __call__(self, i):
        return self.image[i]

    def __eq__(self, other):
        return isinstance(other, Selector) and self.poset is other.poset and self.image == other.image

    def __hash__(self):
        return hash(self.image)

    @property
    def fixpoints(self):
        return tuple(i for i in self.poset if self.image[i] == i)

    def is_fixpoint(self, i):
        return self.image[i] == i

    def is_identity(self):
        return all(self.image[i] == i for i in self.poset)

    def as_labels(self):
        return {self.poset.label(i): self.poset.label(self.image[i]) for i in self.poset}

    def validated(self):
        problems = validate_selector(self)
        if problems:
            kinds = {p["law"] for p in problems}
            cls = SelectorNotIdempotent if kinds == {"idempotent"} else InvalidSelector
            raise cls("; ".join(p["detail"] for p in problems), problems)
        return self


def validate_selector(sel, poset=None):
    """List every violation of deflation, idempotence and monotonicity."""
    poset = poset or sel.poset
    lab = poset.label
    out = []
    for v in poset:
        f = sel(v)
        if not poset.leq(f, v):
            out.append({"law": "deflationary", "context": lab(v),
                        "detail": f"flat({lab(v)}) = {lab(f)} is not contained in {lab(v)}"})
        if sel(f) != f:
            out.append({"law": "idempotent", "context": lab(v),
                        "detail": f"flat(flat({lab(v)})) = {lab(sel(f))} differs from {lab(f)}"})
        for w in poset.down(v):
            if not poset.leq(sel(w), f):
                out.append({"law": "monotone", "context": lab(v),
                            "detail": f"{lab(w)} <= {lab(v)} but flat images are not ordered"})
    return out


def _hermitian_parts(a):
    h = (a + a.conj().T) / 2
    k = (a - a.conj().T) / 2j
    return [m for m in (h, k) if np.linalg.norm(m) > tolerance.eps()]


def selector_image(operator_set, context):
    """Context generated by the members of S and S* that lie in ``context``."""
    gens = []
    for a in operator_set:
        a = ops.as_matrix(a)
        for b in (a, a.conj().T):
            if context.contains_operator(b):
                gens.extend(_hermitian_parts(b))
    return generate_context(gens, dim=context.dim)


def selector_from_operators(operator_set, poset):
    img = []
    for v in poset:
        ctx = selector_image(operator_set, poset.contexts[v])
        try:
            img.append(poset.id_of(ctx))
        except UnknownContext:
            raise SelectorImageOutsidePoset(
                f"selector image of {poset.label(v)} is not in the poset") from None
    return Selector(poset, img).validated()


def _add(contexts, labels, ctx, label):
    for i, c in enumerate(contexts):
        if c == ctx:
            return i, False
    base, n = label, 1
    while label in labels:
        n += 1
        label = f"{base}#{n}"
    contexts.append(ctx)
    labels.append(label)
    return len(contexts) - 1, True


def build_poset(generator_sets, selector_sets=(), dim=None, bottom_label="V_I"):
    """Close the generated contexts under pairwise meets and selector images.

    ``generator_sets`` is a list of operator lists or a mapping label -> list.
    ``selector_sets`` holds operator lists whose selector images must be present.
    """
    if isinstance(generator_sets, dict):
        named = list(generator_sets.items())
    else:
        named = [(f"V{k + 1}", g) for k, g in enumerate(generator_sets)]
    if dim is None:
        mats = [m for _, g in named for m in g] + [m for s in selector_sets for m in s]
        if not mats:
            raise ValueError("dim is required when no operators are given")
        dim = ops.as_matrix(mats[0]).shape[0]
    contexts, labels = [], []
    _add(contexts, labels, Context.trivial(dim), bottom_label)
    for label, gens in named:
        _add(contexts, labels, generate_context(gens, dim=dim), label)
    changed = True
    while changed:
        changed = False
        for i, k in combinations(range(len(contexts)), 2):
            m = meet_context(contexts[i], contexts[k])
            _, new = _add(contexts, labels, m, f"{labels[i]}^{labels[k]}")
            changed |= new
        for s in selector_sets:
            for i in range(len(contexts)):
                _, new = _add(contexts, labels, selector_image(s, contexts[i]), f"flat({labels[i]})")
                changed |= new
    return ContextPoset(contexts, labels)
