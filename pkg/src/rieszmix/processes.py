"""Adapted sequences on product spaces of innovation paths.

Every built-in process has finite memory: term i is a function of the
innovation window (eps_{i-r+1}, ..., eps_i).  Coordinates before time 1 are
absent and contribute nothing.  Two backends share that description:

* exhaustive: all paths of the horizon with product weights, conditional
  expectations as block averages over path-prefix partitions;
* Monte-Carlo: seeded path samples, with T_k f_i evaluated per path by
  integrating the unobserved window coordinates against the innovation law.
"""
from dataclasses import dataclass
from itertools import product

import numpy as np

from .conditional import CondExpectation, Filtration, Partition
from .lattice import SampleSpace
from .report import CheckReport, PreconditionError

KINDS = ("independent-innovations", "moving-average", "martingale-difference", "custom")
DEFAULT_ATOM_CAP = 2 ** 20
ADAPTED_TOL = 1e-12
RNG_NAME = "numpy.random.Generator(PCG64)"


class AtomCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class ProcessSpec:
    """Description of a process driven by i.i.d. finitely supported innovations.

    ``theta`` means, per kind:

    * moving-average: coefficients theta_0..theta_q, f_i = sum_k theta_k eps_{i-k};
    * martingale-difference: (a, b) with g_i = eps_i (a + b eps_{i-1});
    * independent-innovations: optional scale theta_0 (default 1);
    * custom: unused; terms are seeded random tables over windows of length
      ``memory``, drawn in [-amplitude, amplitude] and centred so T f_i = 0.
    """

    kind: str
    horizon: int
    theta: tuple = (1.0,)
    support: tuple = (1.0, -1.0)
    probs: tuple = (0.5, 0.5)
    seed: int = 0
    memory: int = 1
    amplitude: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown process kind {self.kind!r}; expected one of {KINDS}")
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if len(self.support) != len(self.probs) or not self.support:
            raise ValueError("support and probs must be nonempty and of equal length")
        p = np.asarray(self.probs, dtype=float)
        if np.any(p <= 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("innovation probabilities must be positive and sum to 1")
        if self.kind == "martingale-difference" and len(self.theta) != 2:
            raise ValueError("martingale-difference needs theta = (a, b)")
        if self.kind == "custom" and self.memory < 1:
            raise ValueError("custom processes need memory >= 1")
        object.__setattr__(self, "theta", tuple(float(t) for t in self.theta))
        object.__setattr__(self, "support", tuple(float(v) for v in self.support))
        object.__setattr__(self, "probs", tuple(float(q) for q in self.probs))

    @property
    def k(self):
        return len(self.support)

    @property
    def innovation_mean(self):
        return float(np.dot(self.support, self.probs))


class WindowProcess:
    """Term evaluation and analytic conditional expectations for a :class:`ProcessSpec`."""

    def __init__(self, spec):
        self.spec = spec
        # trailing 0.0 is the value of an absent (pre-time-1) coordinate, index -1
        self.values = np.append(np.asarray(spec.support), 0.0)
        self.probs = np.asarray(spec.probs)
        kind = spec.kind
        if kind == "moving-average":
            self.memory = len(spec.theta)
        elif kind == "martingale-difference":
            self.memory = 2
        elif kind == "custom":
            self.memory = spec.memory
        else:
            self.memory = 1
        self._tables = {}

    def table(self, i):
        """Random table of term i for the custom kind, indexed by window codes.

        Seeded by (seed, i) so a prefix of a long horizon matches a short one.
        Entries are uniform in [-amplitude, amplitude] before centring, so
        |f_i| <= 2 amplitude.
        """
        t = self._tables.get(i)
        if t is None:
            k, r = self.spec.k, self.memory
            rng = np.random.default_rng([self.spec.seed, i])
            t = rng.uniform(-self.spec.amplitude, self.spec.amplitude, (k + 1) ** r)
            # centre under the innovation law so that T f_i = 0
            present = min(r, i)
            combos = np.array(list(product(range(k), repeat=present)), dtype=np.int64).reshape(-1, present)
            codes = np.full(combos.shape[0], 0, dtype=np.int64)
            for col in range(r):
                digit = k if col < r - present else combos[:, col - (r - present)]
                codes = codes * (k + 1) + digit
            t = t - np.dot(np.prod(self.probs[combos], axis=1), t[codes])
            self._tables[i] = t
        return t

    def term(self, i, window):
        """Values of f_i given window indices (N, memory); -1 marks absent coordinates."""
        spec = self.spec
        v = self.values[window]
        if spec.kind == "independent-innovations":
            return spec.theta[0] * v[:, -1]
        if spec.kind == "moving-average":
            # column -1 is eps_i, column -1-l is eps_{i-l}
            return v[:, ::-1] @ np.asarray(spec.theta)
        if spec.kind == "martingale-difference":
            a, b = spec.theta
            return v[:, 1] * (a + b * v[:, 0])
        k1 = spec.k + 1
        code = np.zeros(window.shape[0], dtype=np.int64)
        for col in range(self.memory):
            code = code * k1 + np.where(window[:, col] < 0, spec.k, window[:, col])
        return self.table(i)[code]

    def window(self, paths, i):
        """Innovation indices of coordinates i-r+1..i for each path; -1 before time 1."""
        r = self.memory
        n = paths.shape[0]
        out = np.full((n, r), -1, dtype=np.int64)
        for col in range(r):
            coord = i - r + 1 + col
            if 1 <= coord <= paths.shape[1]:
                out[:, col] = paths[:, coord - 1]
        return out

    def conditional(self, i, level, window):
        """Per-path T_level f_i: average over window coordinates later than ``level``."""
        r = self.memory
        coords = [i - r + 1 + col for col in range(r)]
        hidden = [col for col, c in enumerate(coords) if c >= 1 and c > level]
        if not hidden:
            return self.term(i, window)
        out = np.zeros(window.shape[0])
        filled = window.copy()
        for combo in product(range(self.spec.k), repeat=len(hidden)):
            w = 1.0
            for col, idx in zip(hidden, combo):
                filled[:, col] = idx
                w *= self.probs[idx]
            out += w * self.term(i, filled)
        return out


def build_product_space(spec, atom_cap=None):
    """All innovation paths of length ``horizon`` with product weights.

    Atoms are stored as an (N, horizon) array of innovation indices in
    lexicographic order, first coordinate most significant.  Filtration index
    i in [0, horizon] partitions by the first i coordinates; the global T is
    the trivial partition.
    """
    cap = DEFAULT_ATOM_CAP if atom_cap is None else atom_cap
    n_atoms = spec.k ** spec.horizon
    if n_atoms > cap:
        raise AtomCapExceeded(
            f"{spec.k}^{spec.horizon} = {n_atoms} atoms exceeds the cap of {cap}; "
            "use the Monte-Carlo backend"
        )
    idx = np.arange(n_atoms)
    place = spec.k ** np.arange(spec.horizon - 1, -1, -1)
    paths = ((idx[:, None] // place[None, :]) % spec.k).astype(np.int8)
    probs = np.asarray(spec.probs)
    weights = np.prod(probs[paths], axis=1)
    weights = weights / weights.sum()
    space = SampleSpace(weights, atoms=paths)
    partitions = [Partition(space, idx // spec.k ** (spec.horizon - i)) for i in range(spec.horizon + 1)]
    return space, Filtration(0, partitions, CondExpectation(partitions[0]))


def coordinate_elements(space, spec):
    """eps_1..eps_horizon as lattice elements."""
    values = np.asarray(spec.support)
    return [space.element(values[space.atoms[:, j]]) for j in range(space.atoms.shape[1])]


def coordinate_partition(space, i):
    """Partition generated by the i-th coordinate (1-based)."""
    return Partition(space, space.atoms[:, i - 1])


class AdaptedSequence:
    """Terms f_1..f_n with f_i in the range of T_i.

    ``terms[0]`` is f_1.  Construction fails if a term is not adapted.
    """

    def __init__(self, filtration, terms, check=True):
        self.filtration = filtration
        self.terms = list(terms)
        if check:
            for i, f in enumerate(self.terms, start=1):
                if not filtration.at(i).in_range(f, ADAPTED_TOL):
                    raise PreconditionError(f"term {i} is not measurable for T_{i}")

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def term(self, i):
        return self.terms[i - 1]

    @property
    def space(self):
        return self.filtration.space


def sequence_from_spec(spec, atom_cap=None):
    """Build the product space and the process terms exhaustively."""
    space, F = build_product_space(spec, atom_cap)
    proc = WindowProcess(spec)
    paths = np.asarray(space.atoms, dtype=np.int64)
    terms = [space.element(proc.term(i, proc.window(paths, i))) for i in range(1, spec.horizon + 1)]
    return AdaptedSequence(F, terms)


def moving_average(spec, atom_cap=None):
    if spec.kind != "moving-average":
        raise ValueError("moving_average needs a moving-average spec")
    return sequence_from_spec(spec, atom_cap)


def independent_sequence(spec, atom_cap=None):
    if spec.kind != "independent-innovations":
        raise ValueError("independent_sequence needs an independent-innovations spec")
    return sequence_from_spec(spec, atom_cap)


def random_adapted(filtration, horizon, bound, rng):
    """f_i uniform in [-bound, bound] independently per block of T_i."""
    terms = []
    for i in range(1, horizon + 1):
        p = filtration.at(i).partition
        block_vals = rng.uniform(-bound, bound, p.nblocks)
        terms.append(filtration.space.element(block_vals[p.labels]))
    return AdaptedSequence(filtration, terms)


def martingale_difference_from(adapted):
    """g_i = f_i - T_{i-1} f_i."""
    F = adapted.filtration
    out = []
    for i, f in enumerate(adapted.terms, start=1):
        if not F.at(i).in_range(f, ADAPTED_TOL):
            raise PreconditionError(f"term {i} is not measurable for T_{i}")
        g = f - F.at(i - 1)(f)
        residual = F.at(i - 1)(g).max_abs()
        if residual > ADAPTED_TOL * max(1.0, f.max_abs()):
            raise ArithmeticError(f"T_{i - 1} g_{i} = {residual:.3e}, expected 0")
        out.append(g)
    return AdaptedSequence(F, out, check=False)


def partial_sums(g):
    """[s_1, ..., s_n]; s_0 = 0 is ``g.space.zero()``."""
    terms = g.terms if isinstance(g, AdaptedSequence) else list(g)
    sums = []
    acc = None
    for t in terms:
        acc = t if acc is None else acc + t
        sums.append(acc)
    return sums


def is_martingale(f, tol=ADAPTED_TOL):
    """f_i = T_i f_j for all i <= j."""
    F = f.filtration
    worst, where = 0.0, {}
    n = len(f)
    for j in range(1, n + 1):
        fj = f.term(j)
        for i in range(1, j + 1):
            gap = float(np.max(np.abs(F.at(i)(fj).values - f.term(i).values)))
            if gap > worst:
                worst, where = gap, {"i": i, "j": j}
    return CheckReport("martingale property", worst <= tol, worst, where)


def sample_paths(spec, n_paths, rng):
    """Innovation-index paths (n_paths, horizon) drawn i.i.d. from the innovation law."""
    cdf = np.cumsum(spec.probs)
    cdf[-1] = 1.0
    u = rng.random((n_paths, spec.horizon))
    return np.searchsorted(cdf, u, side="right").astype(np.int8)
