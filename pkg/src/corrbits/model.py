"""Correlated binary source models: construction, sampling, and exact PMFs.

Four model kinds are supported. Three are built from a hidden equiprobable
bit fed through binary symmetric channels (BSCs), where a BSC with
preserve probability rho copies its input with probability rho:

* ``parallel``: each source sees the hidden bit through its own BSC.
* ``serial``:   sources sit along one cascade of BSCs (a Markov chain).
* ``mixed``:    M serial chains of N BSCs each, all fed by the hidden bit.

The fourth, ``linear``, defines the sources implicitly by a system of
GF(2) equations: an invertible binary matrix maps the source vector to a
vector of independent Bernoulli bits with per-row zero-probability rho.

A realization is a 0/1 vector of length n*m; for the mixed model it is
flattened chain-major, so source (l, j) sits at index (j-1)*n + (l-1).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import gf2

__all__ = [
    "PARALLEL",
    "SERIAL",
    "MIXED",
    "LINEAR",
    "KINDS",
    "DEFAULT_ENUMERATION_CAP",
    "InvalidModelError",
    "EnumerationCapError",
    "UnsupportedOperationError",
    "ModelSpec",
    "load_model",
    "save_model",
    "cascade_rho",
    "pmf",
    "conditional_pmf",
    "pmf_table",
    "outcome_bits",
    "sample",
]

PARALLEL = "parallel"
SERIAL = "serial"
MIXED = "mixed"
LINEAR = "linear"
KINDS = (PARALLEL, SERIAL, MIXED, LINEAR)

# 2^20 outcomes is the default ceiling for exact enumeration.
DEFAULT_ENUMERATION_CAP = 20

# Sampling draws whole blocks of this many realizations; each block's
# content is a pure function of (seed, block index), never of the count.
SAMPLE_BLOCK = 1 << 16

_MARGINAL_ATOL = 1e-12


class InvalidModelError(ValueError):
    """A ModelSpec (or its JSON form) violates the model constraints."""


class EnumerationCapError(ValueError):
    """An exact computation would enumerate more outcomes than allowed."""


class UnsupportedOperationError(ValueError):
    """The requested operation does not exist for this model kind."""


def cascade_rho(rhos) -> float:
    """Equivalent preserve probability of a cascade of BSCs.

    A chain of BSCs with preserve probabilities ``rhos`` copies its input
    iff an even number of stages flip, which happens with probability
    (1 + prod(2*rho - 1)) / 2.
    """
    rhos = list(rhos)
    if not rhos:
        raise ValueError("cascade needs at least one stage")
    return 0.5 * (1.0 + math.prod(2.0 * r - 1.0 for r in rhos))


def _check_prob(value, name: str, low: float) -> float:
    v = float(value)
    if not low <= v <= 1.0:
        raise InvalidModelError(f"{name} must lie in [{low}, 1], got {v}")
    return v


@dataclass(frozen=True)
class ModelSpec:
    """Immutable description of one correlation model.

    Fields
    ------
    kind : one of "parallel", "serial", "mixed", "linear"
    n : sources per chain
    m : number of chains (1 unless mixed)
    rho : per-edge preserve probabilities; a flat tuple of length n for
        parallel/serial/linear, or m chain tuples of length n for mixed.
        BSC-based kinds require rho in [1/2, 1]; linear allows [0, 1].
    a : the defining GF(2) matrix (linear kind only), required invertible

    For the serial kind ``rho[0]`` parameterizes the vestigial first BSC
    between the hidden bit and the first source; it never affects the
    source distribution and defaults to 1 (pass-through) in the helpers.
    """

    kind: str
    n: int
    m: int = 1
    rho: tuple = ()
    a: gf2.BitMatrix | None = None
    _a_inv: gf2.BitMatrix | None = field(
        default=None, init=False, repr=False, compare=False
    )

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidModelError(f"unknown model kind {self.kind!r}; expected one of {KINDS}")
        if self.n < 1:
            raise InvalidModelError(f"n must be >= 1, got {self.n}")
        if self.m < 1:
            raise InvalidModelError(f"m must be >= 1, got {self.m}")
        if self.kind != MIXED and self.m != 1:
            raise InvalidModelError(f"{self.kind} model requires m=1, got m={self.m}")

        if self.kind == MIXED:
            chains = tuple(
                tuple(_check_prob(r, f"rho[{j}][{l}]", 0.5) for l, r in enumerate(chain))
                for j, chain in enumerate(self.rho)
            )
            if len(chains) != self.m or any(len(c) != self.n for c in chains):
                raise InvalidModelError(
                    f"mixed rho must be {self.m} chains of {self.n} entries"
                )
            object.__setattr__(self, "rho", chains)
        else:
            low = 0.0 if self.kind == LINEAR else 0.5
            flat = tuple(_check_prob(r, f"rho[{l}]", low) for l, r in enumerate(self.rho))
            if len(flat) != self.n:
                raise InvalidModelError(f"rho must have {self.n} entries, got {len(flat)}")
            object.__setattr__(self, "rho", flat)

        if self.kind == LINEAR:
            if self.a is None:
                raise InvalidModelError("linear model requires the matrix a")
            if self.a.rows != self.n or self.a.cols != self.n:
                raise InvalidModelError(
                    f"matrix a must be {self.n}x{self.n}, got {self.a.rows}x{self.a.cols}"
                )
            inv = gf2.invert(self.a)
            if inv is None:
                raise InvalidModelError("matrix a is singular over GF(2)")
            object.__setattr__(self, "_a_inv", inv)
        elif self.a is not None:
            raise InvalidModelError(f"{self.kind} model takes no matrix")

    # -- constructors ---------------------------------------------------

    @classmethod
    def parallel(cls, rhos) -> "ModelSpec":
        rhos = tuple(rhos)
        return cls(PARALLEL, len(rhos), 1, rhos)

    @classmethod
    def serial(cls, rhos) -> "ModelSpec":
        """Serial chain; ``rhos[0]`` is the vestigial first-edge parameter."""
        rhos = tuple(rhos)
        return cls(SERIAL, len(rhos), 1, rhos)

    @classmethod
    def mixed(cls, chain_rhos) -> "ModelSpec":
        """Mixed model from M chain tuples of N preserve probabilities each."""
        chains = tuple(tuple(c) for c in chain_rhos)
        if not chains:
            raise InvalidModelError("mixed model needs at least one chain")
        return cls(MIXED, len(chains[0]), len(chains), chains)

    @classmethod
    def linear(cls, rhos, a: gf2.BitMatrix) -> "ModelSpec":
        rhos = tuple(rhos)
        return cls(LINEAR, len(rhos), 1, rhos, a)

    @classmethod
    def constant(cls, kind: str, rho: float, n: int, m: int = 1,
                 a: gf2.BitMatrix | None = None) -> "ModelSpec":
        """Constant-rho spec of any kind (the configuration used in sweeps).

        Serial chains get the pass-through first edge (rho[0] = 1). The
        linear kind defaults ``a`` to the bidiagonal filter matrix whose
        row l XORs source l-1 into source l.
        """
        if kind == SERIAL:
            if n == 1:
                return cls.serial((1.0,))
            return cls.serial((1.0,) + (rho,) * (n - 1))
        if kind == MIXED:
            return cls.mixed(((rho,) * n,) * m)
        if kind == LINEAR:
            if a is None:
                a = gf2.build_recursive_matrix(n, 1, [1]) if n > 1 else gf2.BitMatrix.identity(1)
            return cls.linear((rho,) * n, a)
        return cls.parallel((rho,) * n)

    # -- derived views --------------------------------------------------

    @property
    def total(self) -> int:
        """Total source count n*m."""
        return self.n * self.m

    @property
    def a_inverse(self) -> gf2.BitMatrix:
        if self.kind != LINEAR:
            raise UnsupportedOperationError(f"{self.kind} model has no defining matrix")
        return self._a_inv

    def flat_rho(self) -> tuple:
        """rho flattened chain-major (identity for non-mixed kinds)."""
        if self.kind == MIXED:
            return tuple(r for chain in self.rho for r in chain)
        return self.rho

    def effective_edge_rhos(self) -> tuple:
        """The edge parameters that shape the source distribution.

        Excludes the serial model's vestigial first edge; every other kind
        uses all configured edges.
        """
        if self.kind == SERIAL:
            return self.rho[1:]
        return self.flat_rho()

    def constant_rho(self) -> float | None:
        """The common effective edge value, or None if edges differ (or none exist)."""
        edges = self.effective_edge_rhos()
        if not edges:
            return None
        first = edges[0]
        return first if all(r == first for r in edges) else None

    @property
    def uniform_marginals(self) -> bool:
        """Whether every source is marginally equiprobable.

        True by construction for the BSC-based kinds. For the linear kind
        source i is the XOR of the Bernoulli bits selected by row i of the
        inverse matrix, so P(X_i = 1) = (1 - prod(2*rho_k - 1)) / 2 over
        that row's support; uniformity is checked to 1e-12.
        """
        if self.kind != LINEAR:
            return True
        for i in range(self.n):
            row = self._a_inv.row_words[i]
            prod = 1.0
            for k in range(self.n):
                if (row >> k) & 1:
                    prod *= 2.0 * self.rho[k] - 1.0
            if abs(prod) > 2.0 * _MARGINAL_ATOL:
                return False
        return True

    # -- JSON -----------------------------------------------------------

    def to_json_dict(self) -> dict:
        doc = {"kind": self.kind, "n": self.n, "m": self.m}
        if self.kind == MIXED:
            doc["rho"] = [list(chain) for chain in self.rho]
        else:
            doc["rho"] = list(self.rho)
        if self.kind == LINEAR:
            doc["A"] = self.a.to_strings()
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ModelSpec":
        try:
            kind = doc["kind"]
            n = int(doc["n"])
            m = int(doc.get("m", 1))
            rho = doc["rho"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidModelError(f"malformed model document: {exc}") from exc
        a = None
        if "A" in doc and doc["A"] is not None:
            try:
                a = gf2.BitMatrix.from_strings(doc["A"])
            except ValueError as exc:
                raise InvalidModelError(f"malformed matrix A: {exc}") from exc
        if kind == MIXED:
            rho = tuple(tuple(chain) for chain in rho)
        else:
            rho = tuple(rho)
        return cls(kind, n, m, rho, a)

    @classmethod
    def from_json(cls, text: str) -> "ModelSpec":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidModelError(f"model file is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise InvalidModelError("model file must contain a JSON object")
        return cls.from_json_dict(doc)


def load_model(path) -> ModelSpec:
    """Read a ModelSpec from a JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        return ModelSpec.from_json(fh.read())


def save_model(spec: ModelSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(spec.to_json())
        fh.write("\n")


# -- realizations -------------------------------------------------------


def _as_bits(x, total: int) -> list[int]:
    if isinstance(x, gf2.BitVector):
        bits = x.to_bits()
    else:
        bits = [int(b) for b in np.asarray(x).ravel()]
    if len(bits) != total:
        raise ValueError(f"realization has length {len(bits)}, model has {total} sources")
    if any(b not in (0, 1) for b in bits):
        raise ValueError("realization entries must be 0 or 1")
    return bits


def _chain_conditional(rhos, bits, b: int) -> float:
    """P(chain = bits | hidden bit = b) for one serial chain."""
    p = rhos[0] if bits[0] == b else 1.0 - rhos[0]
    for l in range(1, len(rhos)):
        p *= rhos[l] if bits[l] == bits[l - 1] else 1.0 - rhos[l]
    return p


def conditional_pmf(spec: ModelSpec, x, b: int) -> float:
    """P(X = x | hidden bit = b); undefined for the linear kind."""
    if spec.kind == LINEAR:
        raise UnsupportedOperationError("the linear model has no hidden common bit")
    if b not in (0, 1):
        raise ValueError(f"b must be 0 or 1, got {b!r}")
    bits = _as_bits(x, spec.total)
    if spec.kind == PARALLEL:
        return math.prod(
            r if xb == b else 1.0 - r for r, xb in zip(spec.rho, bits)
        )
    if spec.kind == SERIAL:
        return _chain_conditional(spec.rho, bits, b)
    # mixed: chains are independent given the hidden bit
    p = 1.0
    for j, chain in enumerate(spec.rho):
        p *= _chain_conditional(chain, bits[j * spec.n : (j + 1) * spec.n], b)
    return p


def pmf(spec: ModelSpec, x) -> float:
    """Exact probability of one realization."""
    bits = _as_bits(x, spec.total)
    if spec.kind == PARALLEL or spec.kind == MIXED:
        return 0.5 * (conditional_pmf(spec, bits, 0) + conditional_pmf(spec, bits, 1))
    if spec.kind == SERIAL:
        p = 0.5
        for l in range(1, spec.n):
            p *= spec.rho[l] if bits[l] == bits[l - 1] else 1.0 - spec.rho[l]
        return p
    # linear: P(X = x) = P(Z = A x)
    z = gf2.matvec(spec.a, gf2.BitVector.from_bits(bits))
    return math.prod(
        r if zb == 0 else 1.0 - r for r, zb in zip(spec.rho, z.to_bits())
    )


def outcome_bits(total: int) -> np.ndarray:
    """All 2^total realizations as a (2^total, total) uint8 array.

    Row i encodes outcome index i with bit k of i as source k+1, i.e.
    ``outcome_bits(t)[i, k] == (i >> k) & 1``.
    """
    idx = np.arange(1 << total, dtype=np.int64)
    return ((idx[:, None] >> np.arange(total)[None, :]) & 1).astype(np.uint8)


def pmf_table(spec: ModelSpec, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """Exact PMF over all 2^(n*m) outcomes.

    Entry i is the probability of the realization whose source k+1 equals
    bit k of i (see ``outcome_bits``). Raises EnumerationCapError when the
    model has more than ``cap`` sources.
    """
    t = spec.total
    if t > cap:
        raise EnumerationCapError(
            f"{t} sources need 2^{t} outcomes, above the cap of 2^{cap}; "
            "use the closed forms or Monte Carlo estimates instead"
        )
    size = 1 << t
    idx = np.arange(size, dtype=np.int64)

    def bit(k: int) -> np.ndarray:
        return ((idx >> k) & 1).astype(np.uint8)

    if spec.kind == PARALLEL:
        t0 = np.ones(size)
        t1 = np.ones(size)
        for l, r in enumerate(spec.rho):
            xb = bit(l)
            t0 *= np.where(xb == 0, r, 1.0 - r)
            t1 *= np.where(xb == 1, r, 1.0 - r)
        return 0.5 * (t0 + t1)

    if spec.kind == SERIAL:
        table = np.full(size, 0.5)
        for l in range(1, spec.n):
            eq = bit(l) == bit(l - 1)
            table *= np.where(eq, spec.rho[l], 1.0 - spec.rho[l])
        return table

    if spec.kind == MIXED:
        t0 = np.ones(size)
        t1 = np.ones(size)
        for j, chain in enumerate(spec.rho):
            base = j * spec.n
            first = bit(base)
            t0 *= np.where(first == 0, chain[0], 1.0 - chain[0])
            t1 *= np.where(first == 1, chain[0], 1.0 - chain[0])
            for l in range(1, spec.n):
                eq = bit(base + l) == bit(base + l - 1)
                f = np.where(eq, chain[l], 1.0 - chain[l])
                t0 *= f
                t1 *= f
        return 0.5 * (t0 + t1)

    # linear
    x = outcome_bits(t)
    z = (x @ spec.a.to_array().T) % 2
    table = np.ones(size)
    for l, r in enumerate(spec.rho):
        table *= np.where(z[:, l] == 0, r, 1.0 - r)
    return table


# -- sampling -----------------------------------------------------------


def _sample_block(spec: ModelSpec, seed: int, block: int) -> np.ndarray:
    """One full block of realizations; a pure function of (seed, block)."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))
    size = SAMPLE_BLOCK
    if spec.kind == LINEAR:
        z = (rng.random((size, spec.n)) >= np.asarray(spec.rho)).astype(np.uint8)
        return (z @ spec.a_inverse.to_array().T) % 2
    b = rng.integers(0, 2, size=(size, 1), dtype=np.uint8)
    if spec.kind == PARALLEL:
        z = (rng.random((size, spec.n)) >= np.asarray(spec.rho)).astype(np.uint8)
        return b ^ z
    if spec.kind == SERIAL:
        z = (rng.random((size, spec.n)) >= np.asarray(spec.rho)).astype(np.uint8)
        return b ^ np.bitwise_xor.accumulate(z, axis=1)
    # mixed
    z = (rng.random((size, spec.m, spec.n)) >= np.asarray(spec.rho)).astype(np.uint8)
    x = b[:, :, None] ^ np.bitwise_xor.accumulate(z, axis=2)
    return x.reshape(size, spec.total)


def sample(spec: ModelSpec, seed: int, count: int) -> np.ndarray:
    """Draw i.i.d. realizations; returns a (count, n*m) uint8 array.

    Realizations are generated in fixed-size blocks whose content depends
    only on (seed, block index), so runs with different counts agree on
    their common prefix and blocks can be produced in parallel without
    changing the output.
    """
    if seed < 0:
        raise ValueError(f"seed must be >= 0, got {seed}")
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    out = np.empty((count, spec.total), dtype=np.uint8)
    for start in range(0, count, SAMPLE_BLOCK):
        block = start // SAMPLE_BLOCK
        size = min(SAMPLE_BLOCK, count - start)
        out[start : start + size] = _sample_block(spec, seed, block)[:size]
    return out
