"""Conditional expectations induced by partitions, filtrations and independence checks."""
import numpy as np

from . import _kernels
from .lattice import BandProjection, LatticeElement, multiply
from .report import CheckReport, DimensionError, PreconditionError, merge

IDENTITY_TOL = 1e-12


class Partition:
    """Partition of the atoms of ``space`` into nonempty disjoint blocks.

    Stored as a label per atom, relabelled to 0..k-1 in order of first
    appearance so equal partitions have equal labels.
    """

    __slots__ = ("space", "labels", "nblocks")

    def __init__(self, space, labels):
        lab = np.asarray(labels)
        if lab.shape != (space.size,):
            raise DimensionError(f"{lab.size} labels for space of size {space.size}")
        _, first, inverse = np.unique(lab, return_index=True, return_inverse=True)
        order = np.argsort(np.argsort(first))
        canon = order[inverse.ravel()].astype(np.int64)
        canon.setflags(write=False)
        self.space = space
        self.labels = canon
        self.nblocks = int(first.size)

    @classmethod
    def from_blocks(cls, space, blocks):
        labels = np.full(space.size, -1, dtype=np.int64)
        for b, block in enumerate(blocks):
            block = list(block)
            if not block:
                raise ValueError(f"block {b} is empty")
            if np.any(labels[block] >= 0):
                raise ValueError(f"block {b} overlaps an earlier block")
            labels[block] = b
        if np.any(labels < 0):
            raise ValueError(f"atoms {np.flatnonzero(labels < 0).tolist()} are not covered")
        return cls(space, labels)

    @classmethod
    def trivial(cls, space):
        return cls(space, np.zeros(space.size, dtype=np.int64))

    @classmethod
    def discrete(cls, space):
        return cls(space, np.arange(space.size))

    def blocks(self):
        return [np.flatnonzero(self.labels == b) for b in range(self.nblocks)]

    def refines(self, other):
        """True when every block of ``self`` sits inside a block of ``other``."""
        pairs = np.unique(np.stack([self.labels, other.labels]), axis=1)
        return pairs.shape[1] == self.nblocks

    def join_labels(self, other):
        """Labels of the common refinement (blockwise intersections)."""
        return self.labels * other.nblocks + other.labels

    def is_measurable(self, f, tol=IDENTITY_TOL):
        """Whether ``f`` is constant on every block."""
        v = np.asarray(f.values)
        lo = np.full(self.nblocks, np.inf)
        hi = np.full(self.nblocks, -np.inf)
        np.minimum.at(lo, self.labels, v)
        np.maximum.at(hi, self.labels, v)
        return bool(np.max(hi - lo) <= tol)

    def __repr__(self):
        return f"Partition(nblocks={self.nblocks}, size={self.space.size})"


class CondExpectation:
    """Weighted block averaging T_A over the blocks of a partition."""

    __slots__ = ("partition",)

    def __init__(self, partition):
        self.partition = partition

    @classmethod
    def trivial(cls, space):
        return cls(Partition.trivial(space))

    @property
    def space(self):
        return self.partition.space

    def __repr__(self):
        return f"CondExpectation({self.partition!r})"

    def __call__(self, f):
        if not self.space.same(f.space):
            raise DimensionError("operator and element live on different spaces")
        return LatticeElement(self.space, self.average(f.values))

    def average(self, values):
        """Raw array version of :meth:`__call__`; accepts (n_atoms,) or (n_atoms, k)."""
        p = self.partition
        return _kernels.block_average(values, p.space.weights, p.labels, p.nblocks)

    def in_range(self, f, tol=IDENTITY_TOL):
        return self.partition.is_measurable(f, tol)


def apply(T, f):
    return T(f)


class Filtration:
    """Conditional expectations T_i on the index window [index_low, index_high].

    ``global_op`` is the compatible operator T.  Indices below the window map
    to T, indices above it to the last stored operator.  Refinement is not
    enforced here; see :func:`verify_filtration`.
    """

    def __init__(self, index_low, partitions, global_op=None):
        partitions = list(partitions)
        if not partitions:
            raise ValueError("a filtration needs at least one partition")
        space = partitions[0].space
        if any(not p.space.same(space) for p in partitions):
            raise DimensionError("filtration partitions live on different spaces")
        if global_op is None:
            global_op = CondExpectation.trivial(space)
        self.index_low = int(index_low)
        self.index_high = self.index_low + len(partitions) - 1
        self.ops = [CondExpectation(p) for p in partitions]
        self.global_op = global_op
        self.space = space

    def __repr__(self):
        return f"Filtration([{self.index_low}, {self.index_high}], size={self.space.size})"

    def at(self, i):
        if i < self.index_low:
            return self.global_op
        if i > self.index_high:
            return self.ops[-1]
        return self.ops[i - self.index_low]

    __getitem__ = at

    def indices(self):
        return range(self.index_low, self.index_high + 1)


def filtration_at(F, i):
    return F.at(i)


def _probe_matrix(space, probes, rng):
    if space.size <= probes:
        return np.eye(space.size)
    return rng.standard_normal((space.size, probes))


def _gap(a, b):
    return float(np.max(np.abs(a - b), initial=0.0))


def verify_filtration(F, tol=IDENTITY_TOL, probes=256, seed=0):
    """Tower-property check for every stored pair i <= j and against the global T.

    Uses the standard basis when the space has at most ``probes`` atoms,
    otherwise ``probes`` seeded Gaussian elements.
    """
    X = _probe_matrix(F.space, probes, np.random.default_rng(seed))
    T = F.global_op
    images = {i: F.at(i).average(X) for i in F.indices()}
    TX = T.average(X)
    worst, where = 0.0, {}
    for i in F.indices():
        Ti = F.at(i)
        for j in F.indices():
            if j < i:
                continue
            Tj = F.at(j)
            g = max(_gap(Ti.average(images[j]), images[i]), _gap(Tj.average(images[i]), images[i]))
            if g > worst:
                worst, where = g, {"i": i, "j": j}
        g = max(_gap(Ti.average(TX), TX), _gap(T.average(images[i]), TX))
        if g > worst:
            worst, where = g, {"i": i, "j": "global"}
    return CheckReport("filtration tower property", worst <= tol, worst, where)


def averaging_check(T, f, g, tol=IDENTITY_TOL):
    """T(f g) = f T g for block-constant f."""
    if not T.in_range(f):
        raise PreconditionError("f is not constant on the blocks of T")
    lhs = multiply(f, T(g))
    rhs = T(multiply(f, g))
    gap = _gap(lhs.values, rhs.values)
    return CheckReport("averaging property", gap <= tol, gap, detail={"lhs": lhs, "rhs": rhs})


def independence_check(P, Q, T, tol=IDENTITY_TOL):
    """T-conditional independence of band projections: TPTQe = TPQe = TQTPe."""
    Pe, Qe = P.e(), Q.e()
    tptq = T(P(T(Qe)))
    tpq = T((P @ Q).e())
    tqtp = T(Q(T(Pe)))
    g1 = _gap(tptq.values, tpq.values)
    g2 = _gap(tpq.values, tqtp.values)
    worst = max(g1, g2)
    side = "TPTQe vs TPQe" if g1 >= g2 else "TPQe vs TQTPe"
    return CheckReport(
        "conditional independence of projections",
        worst <= tol,
        worst,
        {"side": side} if worst > tol else {},
        {"TPTQe": tptq, "TPQe": tpq, "TQTPe": tqtp},
    )


def _union_masks(blocks, space, cap, rng, samples):
    """Block-union masks: all of them when the block count is at most ``cap``."""
    k = len(blocks)
    if k <= cap:
        for bits in range(1, 2 ** k):
            mask = np.zeros(space.size, dtype=bool)
            for b in range(k):
                if bits >> b & 1:
                    mask[blocks[b]] = True
            yield f"union{bits:#x}", mask
        return
    for b, block in enumerate(blocks):
        mask = np.zeros(space.size, dtype=bool)
        mask[block] = True
        yield f"block{b}", mask
    for s in range(samples):
        pick = rng.random(k) < 0.5
        mask = np.zeros(space.size, dtype=bool)
        for b in np.flatnonzero(pick):
            mask[blocks[b]] = True
        yield f"random{s}", mask


def subspace_independence_check(A, B, T, tol=IDENTITY_TOL, cap=12, samples=16, seed=0):
    """Independence of every projection generated by A-blocks with every one from B-blocks.

    A and B are read as the Riesz subspaces of elements measurable with
    respect to their common refinement with T's partition, so projections
    range over unions of those refined blocks.
    """
    space = T.space
    rng = np.random.default_rng(seed)
    refined = []
    for part in (A, B):
        joined = Partition(space, part.join_labels(T.partition))
        refined.append(list(_union_masks(joined.blocks(), space, cap, rng, samples)))
    worst = CheckReport("subspace independence", True, 0.0)
    count = 0
    for name_p, mp in refined[0]:
        P = BandProjection(space, mp)
        for name_q, mq in refined[1]:
            r = independence_check(P, BandProjection(space, mq), T, tol)
            count += 1
            if r.max_violation > worst.max_violation or not r.passed:
                worst = r
                worst.worst = {"P": name_p, "Q": name_q}
    return CheckReport(
        "subspace independence", worst.passed, worst.max_violation, worst.worst, {"pairs": count}
    )


def operator_axioms(T, f, g, tol=IDENTITY_TOL):
    """Positivity, idempotence, Te = e and T|f| >= |Tf| on sample elements."""
    e = T.space.unit()
    Tf = T(f)
    parts = [
        CheckReport("Te = e", True, _gap(T(e).values, e.values)),
        CheckReport("T idempotent", True, _gap(T(Tf).values, Tf.values)),
        CheckReport("T linear", True, _gap(T(f + 2.0 * g).values, (Tf + 2.0 * T(g)).values)),
        CheckReport("T positive", True, float(max(0.0, -np.min(T(abs(f)).values)))),
        CheckReport("T|f| >= |Tf|", True, float(max(0.0, np.max(abs(Tf).values - T(abs(f)).values)))),
    ]
    for p in parts:
        p.passed = p.max_violation <= tol
    return merge("conditional expectation axioms", parts)

