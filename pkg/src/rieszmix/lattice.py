"""Vector lattice of real functions on a finite weighted sample space.

Order, lattice operations and the f-algebra product are all componentwise.
Band projections are atom masks.
"""
import numpy as np

from .report import DimensionError, PreconditionError

WEIGHT_TOL = 1e-12


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


class SampleSpace:
    """Finite set of atoms with strictly positive probability weights.

    ``atoms`` is any sequence of identifiers, or an integer array whose first
    axis runs over atoms (product spaces store innovation paths there).
    """

    __slots__ = ("weights", "atoms")

    def __init__(self, weights, atoms=None):
        w = _frozen(weights, np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("a sample space needs at least one atom")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("atom weights must be finite and strictly positive")
        if abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError(f"atom weights sum to {w.sum()!r}, not 1")
        if atoms is None:
            atoms = np.arange(w.size)
        if len(atoms) != w.size:
            raise ValueError(f"{len(atoms)} atom ids for {w.size} weights")
        if isinstance(atoms, np.ndarray):
            atoms = _frozen(atoms, atoms.dtype)
        self.weights = w
        self.atoms = atoms

    @classmethod
    def uniform(cls, n, atoms=None):
        return cls(np.full(n, 1.0 / n), atoms)

    @property
    def size(self):
        return self.weights.size

    def __len__(self):
        return self.size

    def __repr__(self):
        return f"SampleSpace(size={self.size})"

    def same(self, other):
        return self is other or (
            self.size == other.size and np.array_equal(self.weights, other.weights)
        )

    def element(self, values):
        return LatticeElement(self, values)

    def zero(self):
        return LatticeElement(self, np.zeros(self.size))

    def unit(self):
        """The weak order unit e (all ones)."""
        return LatticeElement(self, np.ones(self.size))

    def constant(self, c):
        return LatticeElement(self, np.full(self.size, float(c)))

    def indicator(self, atoms_idx):
        v = np.zeros(self.size)
        v[np.asarray(atoms_idx, dtype=np.intp)] = 1.0
        return LatticeElement(self, v)


def _check_same(f, g):
    if not f.space.same(g.space):
        raise DimensionError(f"elements live on different spaces ({f.space!r} vs {g.space!r})")


class LatticeElement:
    """Immutable real vector indexed by the atoms of a :class:`SampleSpace`.

    Arithmetic: ``f + g``, ``f - g``, ``-f``, ``a * f``, ``f / a``.  The
    f-algebra product of two elements is ``f * g`` (same as :func:`multiply`).
    """

    __slots__ = ("space", "values")
    __array_priority__ = 100

    def __init__(self, space, values):
        v = np.array(values, dtype=np.float64)
        if v.shape != (space.size,):
            raise DimensionError(f"expected {space.size} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("lattice elements must have finite entries")
        v.setflags(write=False)
        self.space = space
        self.values = v

    def _new(self, values):
        return LatticeElement(self.space, values)

    def _other(self, g):
        if isinstance(g, LatticeElement):
            _check_same(self, g)
            return g.values
        return None

    def __repr__(self):
        return f"LatticeElement({np.array2string(self.values, precision=6)})"

    def __len__(self):
        return self.space.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __add__(self, g):
        gv = self._other(g)
        if gv is None:
            return NotImplemented
        return self._new(self.values + gv)

    def __sub__(self, g):
        gv = self._other(g)
        if gv is None:
            return NotImplemented
        return self._new(self.values - gv)

    def __neg__(self):
        return self._new(-self.values)

    def __mul__(self, g):
        gv = self._other(g)
        if gv is not None:
            return self._new(self.values * gv)
        if np.isscalar(g):
            return self._new(self.values * float(g))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, a):
        if np.isscalar(a):
            return self._new(self.values / float(a))
        return NotImplemented

    def __abs__(self):
        return self._new(np.abs(self.values))

    def __pow__(self, k):
        if k != 2:
            raise ValueError("only squares are supported")
        return self._new(self.values * self.values)

    def sup(self, g):
        return self._new(np.maximum(self.values, self._other(g)))

    def inf(self, g):
        return self._new(np.minimum(self.values, self._other(g)))

    def pos(self):
        return self._new(np.maximum(self.values, 0.0))

    def neg(self):
        return self._new(np.maximum(-self.values, 0.0))

    def le(self, g, tol=0.0):
        """Componentwise ``self <= g + tol``."""
        gv = self._other(g) if isinstance(g, LatticeElement) else float(g)
        return bool(np.all(self.values <= gv + tol))

    def is_positive(self, tol=0.0):
        return bool(np.all(self.values >= -tol))

    def allclose(self, g, atol=1e-12):
        return bool(np.max(np.abs(self.values - self._other(g)), initial=0.0) <= atol)

    def max_abs(self):
        return float(np.max(np.abs(self.values)))

    def max(self):
        return float(np.max(self.values))


def sup(f, g):
    return f.sup(g)


def inf(f, g):
    return f.inf(g)


def pos(f):
    return f.pos()


def neg(f):
    return f.neg()


def multiply(f, g):
    """f-algebra product; componentwise with unit e."""
    _check_same(f, g)
    return f._new(f.values * g.values)


class BandProjection:
    """Projection onto the band of elements supported on ``mask``."""

    __slots__ = ("space", "mask")

    def __init__(self, space, mask):
        m = np.array(mask, dtype=bool)
        if m.shape != (space.size,):
            raise DimensionError(f"mask of shape {m.shape} for space of size {space.size}")
        m.setflags(write=False)
        self.space = space
        self.mask = m

    @classmethod
    def identity(cls, space):
        return cls(space, np.ones(space.size, dtype=bool))

    @classmethod
    def zero(cls, space):
        return cls(space, np.zeros(space.size, dtype=bool))

    def __repr__(self):
        return f"BandProjection({self.mask.astype(int)})"

    def __call__(self, f):
        _check_same(self, f)
        return f._new(np.where(self.mask, f.values, 0.0))

    def __matmul__(self, other):
        if not self.space.same(other.space):
            raise DimensionError("projections on different spaces")
        return BandProjection(self.space, self.mask & other.mask)

    def __eq__(self, other):
        return isinstance(other, BandProjection) and np.array_equal(self.mask, other.mask)

    def __hash__(self):
        return hash(self.mask.tobytes())

    def complement(self):
        """I - P."""
        return BandProjection(self.space, ~self.mask)

    def e(self):
        """The component P e of the unit."""
        return LatticeElement(self.space, self.mask.astype(np.float64))


def band_from_element(g):
    """Projection onto the principal band generated by ``g``."""
    return BandProjection(g.space, g.values != 0.0)


def truncation_band(f, c):
    """P onto the band of (|f| - c e)^+, i.e. atoms with |f| strictly above c."""
    if c < 0:
        raise PreconditionError(f"truncation level must be nonnegative, got {c}")
    return BandProjection(f.space, np.abs(f.values) > c)


def signum_projection(f):
    """J e with J = P_{f+} - (I - P_{f+}): +1 where f > 0, -1 elsewhere."""
    return f._new(np.where(f.values > 0.0, 1.0, -1.0))
