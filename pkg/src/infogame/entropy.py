"""Entropic vectors: joint entropies of every nonempty subset of agents.

Subsets of the agent set {0, ..., n-1} are represented as bitmasks (bit i set
means agent i belongs to the subset). An entropic vector of order n stores
2**n - 1 entries indexed by ``mask - 1``; all entropies are in bits.

Construction never enforces the polymatroid inequalities, so that invalid
vectors can be built and then diagnosed with :func:`validate_shannon`. The
validator checks the elemental form of monotonicity and submodularity, which
cuts out exactly the Shannon outer bound. Vectors inside that bound but
outside the true entropic region are accepted; deciding genuine entropicity
is not possible in general for n >= 4.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

TOL = 1e-9
MAX_AGENTS = 16


def full_mask(n_agents: int) -> int:
    """Bitmask of the whole agent set."""
    return (1 << n_agents) - 1


def subset_mask(agents) -> int:
    """Bitmask for an iterable of agent indices."""
    mask = 0
    for a in agents:
        mask |= 1 << a
    return mask


def subset_agents(mask: int) -> tuple[int, ...]:
    """Agent indices contained in a bitmask, ascending."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return tuple(out)


def _mask_str(mask: int) -> str:
    return "{" + ",".join(str(a) for a in subset_agents(mask)) + "}"


@dataclass(frozen=True)
class EntropicVector:
    """Joint entropies (bits) for every nonempty subset of n agents.

    ``entries[mask - 1]`` is the joint entropy of the subset ``mask``.
    Instances are immutable; all operations on them are pure functions.
    """

    n_agents: int
    entries: tuple[float, ...]

    def __post_init__(self):
        if not 1 <= self.n_agents <= MAX_AGENTS:
            raise ValueError(f"n_agents must be in 1..{MAX_AGENTS}, got {self.n_agents}")
        want = (1 << self.n_agents) - 1
        if len(self.entries) != want:
            raise ValueError(f"expected {want} entries for n_agents={self.n_agents}, got {len(self.entries)}")
        if any(not math.isfinite(v) for v in self.entries):
            raise ValueError("entropy entries must be finite")

    def h(self, mask: int) -> float:
        """Joint entropy of a nonempty subset given as a bitmask."""
        if mask <= 0 or mask > full_mask(self.n_agents):
            raise ValueError(f"subset mask {mask} out of range for n_agents={self.n_agents}")
        return self.entries[mask - 1]

    @property
    def joint_entropy(self) -> float:
        """Entropy of the full agent set."""
        return self.entries[-1]

    @property
    def singletons(self) -> tuple[float, ...]:
        return tuple(self.entries[(1 << i) - 1] for i in range(self.n_agents))


class JointPmf:
    """Discrete joint distribution over outcome tuples of n agents.

    The probability table has one axis per agent; axis length is that agent's
    alphabet size. Probabilities must be nonnegative and sum to 1 within
    1e-12.
    """

    __slots__ = ("table",)

    def __init__(self, table):
        arr = np.asarray(table, dtype=float)
        if arr.ndim < 1 or arr.ndim > MAX_AGENTS:
            raise ValueError(f"pmf must have 1..{MAX_AGENTS} axes, got {arr.ndim}")
        if any(s < 1 for s in arr.shape):
            raise ValueError("every agent needs a nonempty alphabet")
        if float(arr.min(initial=0.0)) < -1e-12:
            raise ValueError("pmf has negative probabilities")
        total = float(arr.sum())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"pmf sums to {total!r}, expected 1 within 1e-12")
        arr = np.clip(arr, 0.0, None)
        arr.flags.writeable = False
        self.table = arr

    @property
    def n_agents(self) -> int:
        return self.table.ndim

    @property
    def alphabet_sizes(self) -> tuple[int, ...]:
        return self.table.shape

    def marginal(self, mask: int) -> np.ndarray:
        """Marginal table over the agents in ``mask``."""
        keep = set(subset_agents(mask))
        drop = tuple(i for i in range(self.n_agents) if i not in keep)
        return self.table.sum(axis=drop) if drop else self.table

    @classmethod
    def from_csv(cls, text: str) -> "JointPmf":
        """Parse a pmf from CSV with columns x1,...,xN,prob (one outcome per row).

        Outcome symbols are nonnegative integers; alphabet sizes are inferred
        as max symbol + 1 per agent. Missing outcome tuples get probability 0.
        """
        reader = csv.reader(io.StringIO(text))
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("empty pmf CSV") from None
        header = [h.strip() for h in header]
        if len(header) < 2 or header[-1] != "prob":
            raise ValueError("pmf CSV header must be x1,...,xN,prob")
        n = len(header) - 1
        if header[:n] != [f"x{i + 1}" for i in range(n)]:
            raise ValueError("pmf CSV header must be x1,...,xN,prob")
        rows = []
        for line in reader:
            if not line or all(not cell.strip() for cell in line):
                continue
            if len(line) != n + 1:
                raise ValueError(f"pmf CSV row has {len(line)} cells, expected {n + 1}")
            outcome = tuple(int(cell) for cell in line[:n])
            if any(v < 0 for v in outcome):
                raise ValueError("outcome symbols must be nonnegative integers")
            rows.append((outcome, float(line[n])))
        if not rows:
            raise ValueError("pmf CSV has no data rows")
        sizes = tuple(max(r[0][i] for r in rows) + 1 for i in range(n))
        table = np.zeros(sizes, dtype=float)
        seen = set()
        for outcome, p in rows:
            if outcome in seen:
                raise ValueError(f"duplicate outcome row {outcome}")
            seen.add(outcome)
            table[outcome] = p
        return cls(table)


def _entropy_bits(table: np.ndarray) -> float:
    p = np.asarray(table, dtype=float).ravel()
    p = p[p > 0.0]
    if p.size == 0:
        return 0.0
    return float(-np.sum(p * np.log2(p)))


def from_joint_pmf(pmf: JointPmf) -> EntropicVector:
    """Entropic vector realized by a joint pmf: H(S) of every marginal, in bits."""
    n = pmf.n_agents
    entries = [0.0] * ((1 << n) - 1)
    for mask in range(1, 1 << n):
        entries[mask - 1] = _entropy_bits(pmf.marginal(mask))
    return EntropicVector(n, tuple(entries))


@dataclass(frozen=True)
class ShannonViolation:
    kind: str                 # "monotonicity" | "submodularity" | "nonnegativity"
    subsets: tuple[int, ...]  # witnessing masks
    slack: float              # negative amount by which the inequality fails

    def describe(self) -> str:
        if self.kind == "monotonicity":
            sub, sup = self.subsets
            return f"H({_mask_str(sub)}) <= H({_mask_str(sup)}) violated by {-self.slack:.3g}"
        if self.kind == "nonnegativity":
            (m,) = self.subsets
            return f"H({_mask_str(m)}) >= 0 violated by {-self.slack:.3g}"
        a, b, union, inter = self.subsets
        lhs = f"H({_mask_str(a)}) + H({_mask_str(b)})"
        rhs = f"H({_mask_str(union)})" + (f" + H({_mask_str(inter)})" if inter else "")
        return f"{lhs} >= {rhs} violated by {-self.slack:.3g}"


@dataclass(frozen=True)
class ShannonReport:
    n_agents: int
    violations: tuple[ShannonViolation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def describe(self) -> str:
        if self.ok:
            return "all Shannon inequalities satisfied"
        return "; ".join(v.describe() for v in self.violations)


def validate_shannon(ev: EntropicVector) -> ShannonReport:
    """Check the elemental monotonicity and submodularity inequalities.

    The elemental inequalities generate the full family of monotonicity
    (A subset of B implies H(A) <= H(B)) and submodularity
    (H(A) + H(B) >= H(A|B) + H(A&B)) constraints, so an empty report is
    equivalent to membership in the Shannon outer bound. Each violation is
    reported with the witnessing subsets. Comparisons use tolerance 1e-9.
    """
    n = ev.n_agents
    h = (0.0,) + ev.entries  # h[mask], with h[0] = 0
    out = []
    if n == 1:
        if h[1] < -TOL:
            out.append(ShannonViolation("nonnegativity", (1,), h[1]))
        return ShannonReport(n, tuple(out))
    full = full_mask(n)
    # H(all) >= H(all minus one agent)
    for i in range(n):
        sub = full ^ (1 << i)
        slack = h[full] - h[sub]
        if slack < -TOL:
            out.append(ShannonViolation("monotonicity", (sub, full), slack))
    # H(K+i) + H(K+j) >= H(K+i+j) + H(K) for i < j and K avoiding both
    for i in range(n):
        for j in range(i + 1, n):
            bi, bj = 1 << i, 1 << j
            rest = full ^ bi ^ bj
            k = rest
            while True:  # iterate all submasks of rest, including 0
                a, b = k | bi, k | bj
                slack = h[a] + h[b] - h[a | bj] - h[k]
                if slack < -TOL:
                    out.append(ShannonViolation("submodularity", (a, b, a | bj, k), slack))
                if k == 0:
                    break
                k = (k - 1) & rest
    return ShannonReport(n, tuple(out))


def subset_entropy(ev: EntropicVector, mask: int) -> float:
    """H of a nonempty agent subset, in bits."""
    return ev.h(mask)


def _check_disjoint(ev: EntropicVector, a: int, b: int) -> None:
    if a <= 0 or b <= 0:
        raise ValueError("subsets must be nonempty")
    top = full_mask(ev.n_agents)
    if a > top or b > top:
        raise ValueError("subset mask out of range")
    if a & b:
        raise ValueError(f"subsets overlap: {_mask_str(a)} and {_mask_str(b)}")


def cond_entropy(ev: EntropicVector, a: int, b: int) -> float:
    """H(a | b) = H(a+b) - H(b) for disjoint nonempty subsets; small negatives clamp to 0."""
    _check_disjoint(ev, a, b)
    value = ev.h(a | b) - ev.h(b)
    if -TOL <= value < 0.0:
        return 0.0
    return value


def mutual_info(ev: EntropicVector, a: int, b: int) -> float:
    """I(a; b) = H(a) + H(b) - H(a+b) for disjoint nonempty subsets; small negatives clamp to 0."""
    _check_disjoint(ev, a, b)
    value = ev.h(a) + ev.h(b) - ev.h(a | b)
    if -TOL <= value < 0.0:
        return 0.0
    return value


def kl_total(ev: EntropicVector) -> float:
    """Total redundancy: sum of singleton entropies minus the joint entropy.

    Zero exactly when the agents' variables are mutually independent.
    """
    return sum(ev.singletons) - ev.joint_entropy


def _check_nonnegative(h) -> tuple[float, ...]:
    vals = tuple(float(v) for v in h)
    if any(v < 0 for v in vals):
        raise ValueError("per-agent entropies must be nonnegative")
    return vals


def family_independent(h) -> EntropicVector:
    """Vector with no redundancy: H(S) is the sum of member entropies."""
    vals = _check_nonnegative(h)
    n = len(vals)
    entries = [0.0] * ((1 << n) - 1)
    for mask in range(1, 1 << n):
        entries[mask - 1] = sum(vals[a] for a in subset_agents(mask))
    return EntropicVector(n, tuple(entries))


def family_max_correlated(h) -> EntropicVector:
    """Fully redundant vector: H(S) is the maximum member entropy."""
    vals = _check_nonnegative(h)
    n = len(vals)
    entries = [0.0] * ((1 << n) - 1)
    for mask in range(1, 1 << n):
        entries[mask - 1] = max(vals[a] for a in subset_agents(mask))
    return EntropicVector(n, tuple(entries))


def family_pair_redundancy(h1: float, h2: float, h3: float, kl: float) -> EntropicVector:
    """Three-agent family where agent 0 is independent and agents 1, 2 share ``kl`` bits.

    H(0)=h1, H(1)=h2, H(2)=h3, H(01)=h1+h2, H(02)=h1+h3, H(12)=h2+h3-kl,
    H(012)=h1+h2+h3-kl; total redundancy equals kl. Requires
    0 <= kl <= min(h2, h3).
    """
    _check_nonnegative((h1, h2, h3))
    if not -1e-12 <= kl <= min(h2, h3) + 1e-12:
        raise ValueError(f"kl={kl} outside [0, min(h2, h3)={min(h2, h3)}]")
    kl = min(max(kl, 0.0), min(h2, h3))
    entries = [0.0] * 7
    entries[0b001 - 1] = h1
    entries[0b010 - 1] = h2
    entries[0b100 - 1] = h3
    entries[0b011 - 1] = h1 + h2
    entries[0b101 - 1] = h1 + h3
    entries[0b110 - 1] = h2 + h3 - kl
    entries[0b111 - 1] = h1 + h2 + h3 - kl
    return EntropicVector(3, tuple(entries))


def to_text(ev: EntropicVector) -> str:
    """Serialize: one ``n_agents`` line, then ``mask,entropy`` per subset."""
    lines = [f"n_agents,{ev.n_agents}"]
    for mask in range(1, (1 << ev.n_agents)):
        lines.append(f"{mask},{ev.entries[mask - 1]:.17g}")
    return "\n".join(lines) + "\n"


def from_text(text: str) -> EntropicVector:
    """Parse the :func:`to_text` format. Blank lines and ``#`` comments are ignored."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError("empty entropic-vector document")
    head = lines[0].split(",")
    if len(head) != 2 or head[0].strip() != "n_agents":
        raise ValueError("first line must be 'n_agents,<count>'")
    n = int(head[1])
    if not 1 <= n <= MAX_AGENTS:
        raise ValueError(f"n_agents must be in 1..{MAX_AGENTS}")
    entries = [None] * ((1 << n) - 1)
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != 2:
            raise ValueError(f"bad record {ln!r}, expected 'mask,entropy'")
        mask = int(cells[0])
        if not 1 <= mask <= full_mask(n):
            raise ValueError(f"subset mask {mask} out of range")
        if entries[mask - 1] is not None:
            raise ValueError(f"duplicate record for mask {mask}")
        entries[mask - 1] = float(cells[1])
    missing = [i + 1 for i, v in enumerate(entries) if v is None]
    if missing:
        raise ValueError(f"missing records for masks {missing}")
    return EntropicVector(n, tuple(entries))
