"""Exact calculus of sieves on the probability interval [0, 1].

A sieve on a level r is a down-set of [0, r]: empty, [0, t] or [0, t). These
form a chain, so meet and join are min and max of a sort key. Endpoints are
floats compared exactly.
"""
from dataclasses import dataclass

from .errors import MalformedStep

EMPTY, CLOSED, OPEN = "empty", "closed", "open"


@dataclass(frozen=True, order=False)
class DownSet:
    kind: str
    t: float = 0.0

    def __post_init__(self):
        if self.kind not in (EMPTY, CLOSED, OPEN):
            raise ValueError(f"unknown down-set kind {self.kind!r}")
        if self.kind == EMPTY:
            object.__setattr__(self, "t", 0.0)
        elif not 0.0 <= self.t <= 1.0:
            raise ValueError(f"endpoint {self.t} outside [0, 1]")
        if self.kind == OPEN and self.t == 0.0:
            object.__setattr__(self, "kind", EMPTY)

    def __repr__(self):
        if self.kind == EMPTY:
            return "Empty"
        return f"{'Closed' if self.kind == CLOSED else 'Open'}({self.t:g})"

    @property
    def key(self):
        return {EMPTY: (0.0, 0), OPEN: (self.t, 0), CLOSED: (self.t, 1)}[self.kind]

    def contains(self, x):
        if self.kind == EMPTY:
            return False
        return 0.0 <= x <= self.t if self.kind == CLOSED else 0.0 <= x < self.t

    def as_dict(self):
        return {"kind": self.kind, "t": self.t}


def Empty():
    return DownSet(EMPTY)


def Closed(t):
    return DownSet(CLOSED, float(t))


def Open(t):
    return DownSet(OPEN, float(t))


def leq(a, b):
    return a.key <= b.key


def meet(a, b):
    return a if a.key <= b.key else b


def join(a, b):
    return a if a.key >= b.key else b


def sup(d):
    """Supremum of the set; the empty set gets 0."""
    return d.t


def restrict(d, r):
    return meet(d, Closed(r))


def j_prob(d):
    """Close a down-set: [0, t) and [0, t] both go to [0, t]; the empty set to [0, 0]."""
    return Closed(sup(d))


def covering_J_prob(r, d):
    return d == Closed(r) or d == Open(r)


def omega_prob_member(r, d):
    return d.kind == CLOSED and d.t <= r


@dataclass(frozen=True)
class ProbTruth:
    """The global truth value r |-> [0, min(p, r)]."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("probability outside [0, 1]")

    def at(self, r):
        return Closed(min(self.p, r))


def ell_prime(p):
    return ProbTruth(float(p))


@dataclass(frozen=True)
class StepFunction:
    """A function on [0, end] that is constant between consecutive breakpoints.

    ``breaks`` = (0 = b0 < b1 < ... < bk = end); ``pieces[i]`` is the value on
    the open interval (b_i, b_{i+1}); ``points[i]`` is the value at b_i. A
    left-continuous function has points[i+1] == pieces[i].
    """

    breaks: tuple
    pieces: tuple
    points: tuple

    def __post_init__(self):
        b = self.breaks
        if len(b) < 1 or b[0] != 0.0:
            raise MalformedStep("breakpoints must start at 0")
        if any(not x < y for x, y in zip(b, b[1:])):
            raise MalformedStep("breakpoints must increase strictly")
        if b[-1] > 1.0:
            raise MalformedStep("breakpoints must lie in [0, 1]")
        if len(self.pieces) != len(b) - 1 or len(self.points) != len(b):
            raise MalformedStep("need one value per piece and per breakpoint")

    @classmethod
    def left_continuous(cls, breaks, pieces, at_zero):
        breaks = tuple(float(x) for x in breaks)
        pieces = tuple(pieces)
        return cls(breaks, pieces, (at_zero,) + pieces)

    @classmethod
    def constant(cls, value, end=1.0, at_zero=None):
        if end == 0.0:
            return cls((0.0,), (), (value if at_zero is None else at_zero,))
        return cls((0.0, float(end)), (value,), (value if at_zero is None else at_zero, value))

    @property
    def end(self):
        return self.breaks[-1]

    def __call__(self, r):
        if not 0.0 <= r <= self.end:
            raise ValueError(f"level {r} outside [0, {self.end}]")
        for i, b in enumerate(self.breaks):
            if r == b:
                return self.points[i]
            if r < b:
                return self.pieces[i - 1]
        raise AssertionError("unreachable")

    def left_limit(self, r):
        """Value just below r (r > 0)."""
        for i, b in enumerate(self.breaks[1:]):
            if r <= b:
                return self.pieces[i]
        raise ValueError(f"level {r} outside (0, {self.end}]")

    def sample_levels(self):
        """Breakpoints and piece midpoints: enough to see every value."""
        b = self.breaks
        return sorted(set(b) | {(x + y) / 2 for x, y in zip(b, b[1:])})

    def is_left_continuous(self, full):
        return self.points[0] == full and all(
            self.points[i + 1] == self.pieces[i] for i in range(len(self.pieces)))

    def map(self, f):
        return StepFunction(self.breaks, tuple(map(f, self.pieces)), tuple(map(f, self.points)))

    def truncate(self, end):
        """Restriction to [0, end]."""
        if end == self.end:
            return self
        if not 0.0 <= end <= self.end:
            raise ValueError("truncation level outside the domain")
        k = next(i for i, b in enumerate(self.breaks) if b >= end)
        if self.breaks[k] == end:
            return StepFunction(self.breaks[:k + 1], self.pieces[:k], self.points[:k + 1])
        return StepFunction(self.breaks[:k] + (end,), self.pieces[:k],
                            self.points[:k] + (self.pieces[k - 1],))

    def normalized(self):
        """Drop breakpoints that change nothing."""
        keep = [0]
        for i in range(1, len(self.breaks) - 1):
            if not (self.pieces[i - 1] == self.points[i] == self.pieces[i]):
                keep.append(i)
        if len(self.breaks) > 1:
            keep.append(len(self.breaks) - 1)
        return StepFunction(
            tuple(self.breaks[i] for i in keep),
            tuple(self.pieces[keep[n]] for n in range(len(keep) - 1)),
            tuple(self.points[i] for i in keep),
        )


def a_prob_step(f, full):
    """Left-limit regularisation; the value at 0 becomes ``full``."""
    return StepFunction(f.breaks, f.pieces, (full,) + f.pieces)
