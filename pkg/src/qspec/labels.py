"""Structured labels: values, the refinement preorder and the label algebra.

Three kinds of label structure are supported:

* ``discrete`` -- symbols with an optional declared partial order,
* ``weighted`` -- an action name paired with a real interval, e.g. ``grant[0,5]``,
* ``set`` -- nonempty subsets of a declared finite set of implementation labels.

Extended reals are plain floats; ``math.inf`` is the top value and float
addition already saturates (``inf + x == inf``).
"""
import itertools
import logging
import math
import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import CapabilityError, KindMismatchError, ParseError

log = logging.getLogger(__name__)

INF = math.inf

KINDS = ("discrete", "weighted", "set")
SYNC_OPS = ("csp", "plus", "max", "cap")


def _fmt_num(x):
    if x == INF:
        return "inf"
    if x == -INF:
        return "-inf"
    if float(x).is_integer():
        return str(int(x))
    return repr(float(x))


def _diff(a, b):
    """a - b on extended reals, with equal infinities cancelling to 0."""
    if a == b:
        return 0.0
    return a - b


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_open: bool = False
    hi_open: bool = False

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval endpoints must be numbers")
        if lo == INF or hi == -INF:
            raise ValueError(f"bad interval endpoints {lo}, {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        # unbounded ends are never attained
        if lo == -INF:
            object.__setattr__(self, "lo_open", True)
        if hi == INF:
            object.__setattr__(self, "hi_open", True)
        if lo > hi or (lo == hi and (self.lo_open or self.hi_open)):
            raise ValueError(f"empty interval {self._text(lo, hi)}")

    def _text(self, lo, hi):
        return ("(" if self.lo_open else "[") + _fmt_num(lo) + "," + _fmt_num(hi) + (
            ")" if self.hi_open else "]")

    def __str__(self):
        return self._text(self.lo, self.hi)

    @staticmethod
    def make(lo, hi, lo_open=False, hi_open=False) -> Optional["Interval"]:
        """Like the constructor, but returns None for an empty interval."""
        lo, hi = float(lo), float(hi)
        if lo == -INF:
            lo_open = True
        if hi == INF:
            hi_open = True
        if lo == INF or hi == -INF or lo > hi or (lo == hi and (lo_open or hi_open)):
            return None
        return Interval(lo, hi, lo_open, hi_open)

    @staticmethod
    def point(x):
        return Interval(x, x)

    @staticmethod
    def everything():
        return Interval(-INF, INF, True, True)

    @property
    def is_point(self):
        return self.lo == self.hi

    def starts_after_or_at(self, other):
        """True iff this interval's lower end is not below ``other``'s."""
        if self.lo != other.lo:
            return self.lo > other.lo
        return self.lo_open or not other.lo_open

    def ends_before_or_at(self, other):
        if self.hi != other.hi:
            return self.hi < other.hi
        return self.hi_open or not other.hi_open

    def issubset(self, other):
        return self.starts_after_or_at(other) and self.ends_before_or_at(other)

    def intersect(self, other):
        if self.lo > other.lo or (self.lo == other.lo and self.lo_open):
            lo, lo_open = self.lo, self.lo_open
        else:
            lo, lo_open = other.lo, other.lo_open
        if self.hi < other.hi or (self.hi == other.hi and self.hi_open):
            hi, hi_open = self.hi, self.hi_open
        else:
            hi, hi_open = other.hi, other.hi_open
        return Interval.make(lo, hi, lo_open, hi_open)

    def plus(self, other):
        return Interval(self.lo + other.lo, self.hi + other.hi,
                        self.lo_open or other.lo_open, self.hi_open or other.hi_open)

    def maximum(self, other):
        # image of max over the two intervals
        if self.lo != other.lo:
            lo, lo_open = (self.lo, self.lo_open) if self.lo > other.lo else (other.lo, other.lo_open)
        else:
            lo, lo_open = self.lo, self.lo_open or other.lo_open
        if self.hi != other.hi:
            hi, hi_open = (self.hi, self.hi_open) if self.hi > other.hi else (other.hi, other.hi_open)
        else:
            hi, hi_open = self.hi, self.hi_open and other.hi_open
        return Interval(lo, hi, lo_open, hi_open)

    def sort_key(self):
        return (self.lo, self.lo_open, self.hi, not self.hi_open)


@dataclass(frozen=True)
class Discrete:
    name: str

    def __str__(self):
        return self.name

    def sort_key(self):
        return (0, self.name)


@dataclass(frozen=True)
class Weighted:
    action: str
    interval: Interval

    def __str__(self):
        return f"{self.action}{self.interval}"

    def sort_key(self):
        return (1, self.action) + self.interval.sort_key()


@dataclass(frozen=True)
class LabelSet:
    members: frozenset

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))

    def __str__(self):
        return "{" + ",".join(sorted(self.members)) + "}"

    def sort_key(self):
        return (2, len(self.members), tuple(sorted(self.members)))


Label = Union[Discrete, Weighted, LabelSet]


def label_key(label):
    return label.sort_key()


_KIND_TYPE = {"discrete": Discrete, "weighted": Weighted, "set": LabelSet}


def _closure(symbols, pairs):
    below = {s: {s} for s in symbols}
    for a, b in pairs:
        below[b].add(a)
    changed = True
    while changed:
        changed = False
        for b in symbols:
            extra = set()
            for a in below[b]:
                extra |= below[a]
            if not extra <= below[b]:
                below[b] |= extra
                changed = True
    return below


@dataclass(frozen=True)
class LabelStructure:
    """A label structure: which labels exist and how they refine, conjoin and synchronize.

    ``alphabet`` holds the symbols (discrete), the action names (weighted) or the
    implementation labels Gamma (set).  ``preorder`` is stored reflexively and
    transitively closed, and only used for the discrete kind.
    """
    kind: str
    alphabet: frozenset
    preorder: frozenset = frozenset()
    sync_op: str = "csp"
    _below: dict = field(default=None, init=False, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown label kind {self.kind!r}")
        if self.sync_op not in SYNC_OPS:
            raise ValueError(f"unknown synchronization {self.sync_op!r}")
        alphabet = frozenset(self.alphabet)
        object.__setattr__(self, "alphabet", alphabet)
        pairs = frozenset(tuple(p) for p in self.preorder)
        if pairs and self.kind != "discrete":
            raise ValueError("a label preorder can only be declared for discrete labels")
        for a, b in pairs:
            if a not in alphabet or b not in alphabet:
                raise ValueError(f"preorder pair {a} <= {b} uses undeclared symbols")
        if self.kind == "discrete" and self.sync_op != "csp":
            raise ValueError("discrete labels only support csp synchronization")
        if self.kind == "set" and self.sync_op not in ("csp", "cap"):
            raise ValueError("set labels support csp or cap synchronization")
        below = None
        if self.kind == "discrete":
            below = _closure(alphabet, pairs)
            for a in alphabet:
                for b in below[a]:
                    if a != b and a in below[b]:
                        raise ValueError(f"label preorder is not antisymmetric: {a} and {b}")
            pairs = frozenset((a, b) for b in alphabet for a in below[b])
            object.__setattr__(self, "_below", {b: frozenset(v) for b, v in below.items()})
            self._warn_ambiguous_conjunctions()
        object.__setattr__(self, "preorder", pairs)

    # -- construction helpers ------------------------------------------------

    @classmethod
    def discrete(cls, symbols, order=()):
        return cls("discrete", frozenset(symbols), frozenset(order), "csp")

    @classmethod
    def weighted(cls, actions, sync_op="plus"):
        return cls("weighted", frozenset(actions), frozenset(), sync_op)

    @classmethod
    def sets(cls, gamma, sync_op="cap"):
        return cls("set", frozenset(gamma), frozenset(), sync_op)

    @property
    def sync_monotone(self):
        """False when equality synchronization meets a non-trivial label order."""
        return not (self.sync_op == "csp" and any(a != b for a, b in self.preorder))

    def with_sync(self, sync_op):
        return LabelStructure(self.kind, self.alphabet, self.preorder, sync_op)

    def _warn_ambiguous_conjunctions(self):
        for a, b in itertools.combinations(sorted(self.alphabet), 2):
            lower = self._below[a] & self._below[b]
            if len(self._maximal(lower)) > 1:
                log.warning("labels %s and %s have several maximal common lower bounds; "
                            "their conjunction is left undefined", a, b)

    def _maximal(self, symbols):
        return [s for s in symbols if not any(s != t and s in self._below[t] for t in symbols)]

    # -- membership ----------------------------------------------------------

    def check(self, label):
        typ = _KIND_TYPE[self.kind]
        if not isinstance(label, typ):
            raise KindMismatchError(f"{label!r} is not a {self.kind} label")
        if self.kind == "discrete":
            ok = label.name in self.alphabet
        elif self.kind == "weighted":
            ok = label.action in self.alphabet
        else:
            ok = bool(label.members) and label.members <= self.alphabet
        if not ok:
            raise KindMismatchError(f"label {label} is not over the declared alphabet")
        return label

    def _pair(self, a, b):
        typ = _KIND_TYPE[self.kind]
        if not isinstance(a, typ) or not isinstance(b, typ):
            raise KindMismatchError(f"cannot compare {a!r} and {b!r} in a {self.kind} structure")

    # -- the algebra ---------------------------------------------------------

    def refines(self, a, b):
        self._pair(a, b)
        if self.kind == "discrete":
            return a == b or a.name in self._below.get(b.name, ())
        if self.kind == "weighted":
            return a.action == b.action and a.interval.issubset(b.interval)
        return a.members <= b.members

    def is_implementation(self, a):
        if self.kind == "discrete":
            return self._below.get(a.name, frozenset({a.name})) == {a.name}
        if self.kind == "weighted":
            return a.interval.is_point
        return len(a.members) == 1

    def conj(self, a, b):
        self._pair(a, b)
        if self.kind == "discrete":
            if a == b:
                return a
            lower = self._below[a.name] & self._below[b.name]
            top = self._maximal(lower)
            return Discrete(top[0]) if len(top) == 1 else None
        if self.kind == "weighted":
            if a.action != b.action:
                return None
            iv = a.interval.intersect(b.interval)
            return None if iv is None else Weighted(a.action, iv)
        common = a.members & b.members
        return LabelSet(common) if common else None

    def sync(self, a, b):
        self._pair(a, b)
        op = self.sync_op
        if op == "cap":
            return self.conj(a, b)
        if op == "csp":
            return a if a == b else None
        if a.action != b.action:
            return None
        if op == "plus":
            return Weighted(a.action, a.interval.plus(b.interval))
        return Weighted(a.action, a.interval.maximum(b.interval))

    def distance(self, a, b):
        self._pair(a, b)
        if self.kind == "weighted":
            if a.action != b.action:
                return INF
            i, j = a.interval, b.interval
            return max(_diff(j.lo, i.lo), _diff(i.hi, j.hi), 0.0)
        return 0.0 if self.refines(a, b) else INF

    def residuals(self, a1, a3):
        """Maximal labels x such that ``a1 (sync) x`` is defined and refines ``a3``."""
        self._pair(a1, a3)
        op = self.sync_op
        if op == "csp":
            return frozenset({a1}) if self.refines(a1, a3) else frozenset()
        if self.kind == "set":
            common = a1.members & a3.members
            if not common:
                return frozenset()
            return frozenset({LabelSet((self.alphabet - a1.members) | common)})
        if self.kind != "weighted":
            raise CapabilityError(f"no residuals for {self.kind} labels with {op} synchronization")
        if a1.action != a3.action:
            return frozenset()
        i1, i3 = a1.interval, a3.interval
        if op == "plus":
            iv = _plus_residual(i1, i3)
        elif op == "max":
            iv = _max_residual(i1, i3)
        else:
            iv = _cap_residual(i1, i3)
        return frozenset() if iv is None else frozenset({Weighted(a1.action, iv)})

    def tops(self):
        """The maximal labels; every label refines one of them."""
        if self.kind == "weighted":
            return frozenset(Weighted(u, Interval.everything()) for u in self.alphabet)
        if self.kind == "set":
            return frozenset({LabelSet(self.alphabet)}) if self.alphabet else frozenset()
        return frozenset(Discrete(s) for s in self._maximal(self.alphabet))

    def finite_labels(self):
        """All labels of a finite structure (discrete or set kind)."""
        if self.kind == "discrete":
            return sorted((Discrete(s) for s in self.alphabet), key=label_key)
        if self.kind == "set":
            gamma = sorted(self.alphabet)
            return [LabelSet(c) for n in range(1, len(gamma) + 1)
                    for c in itertools.combinations(gamma, n)]
        raise CapabilityError("weighted label structures are infinite")

    def implementation_labels(self):
        if self.kind == "weighted":
            raise CapabilityError("weighted label structures have infinitely many implementation labels")
        return [a for a in self.finite_labels() if self.is_implementation(a)]

    def label(self, text):
        """Parse one label in surface syntax, e.g. ``grant[0,5]`` or ``{a,b}``."""
        lab, pos = parse_label_at(text, 0, self)
        if text[pos:].strip():
            raise ParseError(f"trailing input after label: {text[pos:]!r}")
        return lab


def _plus_residual(i1, i3):
    if i3.lo == -INF:
        lo, lo_open = -INF, True
    elif i1.lo == -INF:
        return None
    else:
        lo, lo_open = i3.lo - i1.lo, i3.lo_open and not i1.lo_open
    if i3.hi == INF:
        hi, hi_open = INF, True
    elif i1.hi == INF:
        return None
    else:
        hi, hi_open = i3.hi - i1.hi, i3.hi_open and not i1.hi_open
    return Interval.make(lo, hi, lo_open, hi_open)


def _max_residual(i1, i3):
    # every max(x1, x) must stay below i3's upper end, so i1 must already fit there
    if not i1.ends_before_or_at(i3):
        return None
    if i1.starts_after_or_at(i3):
        lo, lo_open = -INF, True
    else:
        lo, lo_open = i3.lo, i3.lo_open
    return Interval.make(lo, i3.hi, lo_open, i3.hi_open)


def _cap_residual(i1, i3):
    if i1.intersect(i3) is None:
        return None
    # grow x in both directions until it would pick up a point of i1 outside i3
    if i1.starts_after_or_at(i3):
        lo, lo_open = -INF, True
    else:
        lo, lo_open = i3.lo, i3.lo_open
    if i1.ends_before_or_at(i3):
        hi, hi_open = INF, True
    else:
        hi, hi_open = i3.hi, i3.hi_open
    return Interval.make(lo, hi, lo_open, hi_open)


# -- free-function surface ---------------------------------------------------

def refines_label(a, b, ls):
    return ls.refines(a, b)


def is_implementation_label(a, ls):
    return ls.is_implementation(a)


def conj_label(a, b, ls):
    return ls.conj(a, b)


def sync_label(a, b, ls):
    return ls.sync(a, b)


def label_distance(a, b, ls):
    return ls.distance(a, b)


def residual_labels(a1, a3, ls):
    return ls.residuals(a1, a3)


# -- surface syntax ------------------------------------------------------------

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.']*")
_NUM_RE = re.compile(r"\s*([+-]?(?:inf|(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?))\s*")
_WS_RE = re.compile(r"\s*")


def _skip(text, pos):
    return _WS_RE.match(text, pos).end()


def _number(text, pos):
    m = _NUM_RE.match(text, pos)
    if not m:
        raise ParseError(f"expected a number at offset {pos}")
    return float(m.group(1)), m.end()


def parse_label_at(text, pos, ls):
    """Parse a label starting at ``pos``; returns ``(label, end_pos)``.

    A bare action name in a weighted structure stands for weight ``[0,0]``; in a
    set structure it stands for the singleton set.
    """
    pos = _skip(text, pos)
    if ls.kind == "set" and text.startswith("{", pos):
        names = []
        pos += 1
        while True:
            pos = _skip(text, pos)
            m = IDENT_RE.match(text, pos)
            if not m:
                raise ParseError(f"expected a label name at offset {pos}")
            names.append(m.group())
            pos = _skip(text, m.end())
            if text.startswith(",", pos):
                pos += 1
                continue
            if text.startswith("}", pos):
                pos += 1
                break
            raise ParseError(f"expected ',' or '}}' at offset {pos}")
        return ls.check(LabelSet(frozenset(names))), pos
    m = IDENT_RE.match(text, pos)
    if not m:
        raise ParseError(f"expected a label at offset {pos}")
    name, pos = m.group(), m.end()
    if ls.kind == "discrete":
        return ls.check(Discrete(name)), pos
    if ls.kind == "set":
        return ls.check(LabelSet(frozenset({name}))), pos
    if pos < len(text) and text[pos] in "[(":
        lo_open = text[pos] == "("
        lo, pos = _number(text, pos + 1)
        if not text.startswith(",", pos):
            raise ParseError(f"expected ',' in interval at offset {pos}")
        hi, pos = _number(text, pos + 1)
        if pos >= len(text) or text[pos] not in "])":
            raise ParseError(f"expected ']' or ')' at offset {pos}")
        hi_open = text[pos] == ")"
        pos += 1
        try:
            iv = Interval(lo, hi, lo_open, hi_open)
        except ValueError as err:
            raise ParseError(str(err)) from None
        return ls.check(Weighted(name, iv)), pos
    return ls.check(Weighted(name, Interval.point(0.0))), pos


def format_label(label):
    return str(label)
