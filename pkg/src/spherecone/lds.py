"""Sobol' sequence generation with digital scrambling.

Gray-code construction with 32 output bits per coordinate.  Direction
numbers come from an embedded table in the standard text format
("d s a m_1 ... m_s", one line per dimension >= 2); dimension 1 is the
van der Corput sequence in base 2.

The canonical point at index 0 (all zeros) is skipped: streams start at
index 1, so the first unscrambled coordinate in dimension 1 is 0.5.

Scrambling is Matousek random linear scrambling: a random lower
triangular bit matrix with unit diagonal is applied to the direction
vectors of each coordinate, followed by a random digital shift.  Scramble
randomness comes from a Philox counter-based generator seeded with
(seed, replicate), so replicate streams are reproducible.
"""

from __future__ import annotations

import os
from importlib import resources

import numpy as np

from .errors import ConfigurationError, DomainError, ExhaustionError

__all__ = ["DirectionNumberTable", "SobolStream", "sobol_block"]

_NBITS = 32
_MAX_INDEX = 2**31


class DirectionNumberTable:
    """Primitive polynomials and initial direction integers per dimension.

    Attributes
    ----------
    degrees, poly_coeffs : arrays indexed by dimension-2 (dimension 1 is
        the implicit van der Corput sequence).
    m_init : list of integer arrays, the odd initial values m_1..m_s.
    """

    def __init__(self, degrees, poly_coeffs, m_init):
        self.degrees = np.asarray(degrees, dtype=np.int64)
        self.poly_coeffs = np.asarray(poly_coeffs, dtype=np.int64)
        self.m_init = [np.asarray(m, dtype=np.int64) for m in m_init]
        self.max_dimensions = 1 + len(self.m_init)
        for s, m in zip(self.degrees, self.m_init):
            if len(m) != s:
                raise ConfigurationError(
                    f"expected {s} initial direction integers, got {len(m)}")
            k = np.arange(1, s + 1)
            if np.any(m % 2 == 0) or np.any(m >= 2**k):
                raise ConfigurationError(
                    "initial direction integers must be odd and m_k < 2^k")

    @classmethod
    def from_lines(cls, lines):
        degrees, polys, m_init = [], [], []
        expected_d = 2
        for line in lines:
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if not parts[0].isdigit():
                continue  # header line
            vals = [int(p) for p in parts]
            d, s, a = vals[0], vals[1], vals[2]
            if d != expected_d:
                raise ConfigurationError(
                    f"direction-number lines must cover dimensions 2,3,... "
                    f"in order; expected {expected_d}, got {d}")
            if len(vals) != 3 + s:
                raise ConfigurationError(
                    f"dimension {d}: expected {s} initial values, "
                    f"got {len(vals) - 3}")
            degrees.append(s)
            polys.append(a)
            m_init.append(vals[3:])
            expected_d += 1
        if not degrees:
            raise ConfigurationError("no direction-number lines found")
        return cls(degrees, polys, m_init)

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            return cls.from_lines(fh)

    @classmethod
    def default(cls):
        """Embedded table (Joe-Kuo style, dimensions up to 192).

        The env var SPHERECONE_DIRFILE overrides the embedded data.
        """
        override = os.environ.get("SPHERECONE_DIRFILE")
        if override:
            return cls.from_file(override)
        text = (resources.files("spherecone.data")
                .joinpath("direction-numbers.txt").read_text())
        return cls.from_lines(text.splitlines())

    def direction_vectors(self, dimension):
        """(dimension, 32) uint32 array of direction vectors v_k = m_k 2^{32-k}."""
        if dimension < 1:
            raise ConfigurationError(f"dimension must be >= 1, got {dimension}")
        if dimension > self.max_dimensions:
            raise ConfigurationError(
                f"table supports at most {self.max_dimensions} dimensions, "
                f"requested {dimension}")
        V = np.zeros((dimension, _NBITS), dtype=np.uint32)
        # dimension 1: van der Corput, m_k = 1 for all k
        V[0] = np.uint32(1) << np.arange(_NBITS - 1, -1, -1, dtype=np.uint32)
        for j in range(1, dimension):
            s = int(self.degrees[j - 1])
            a = int(self.poly_coeffs[j - 1])
            m = self.m_init[j - 1]
            v = np.zeros(_NBITS, dtype=np.uint32)
            for k in range(min(s, _NBITS)):
                v[k] = np.uint32(m[k]) << np.uint32(_NBITS - 1 - k)
            for k in range(s, _NBITS):
                v[k] = v[k - s] ^ (v[k - s] >> np.uint32(s))
                for i in range(1, s):
                    if (a >> (s - 1 - i)) & 1:
                        v[k] ^= v[k - i]
            V[j] = v
        return V


_DEFAULT_TABLE = None


def _default_table():
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None or os.environ.get("SPHERECONE_DIRFILE"):
        table = DirectionNumberTable.default()
        if not os.environ.get("SPHERECONE_DIRFILE"):
            _DEFAULT_TABLE = table
        return table
    return _DEFAULT_TABLE


def _parity(x):
    return np.bitwise_count(x).astype(np.uint32) & np.uint32(1)


class SobolStream:
    """Stateful Sobol' generator over [0,1)^dimension.

    Same (seed, dimension, scramble) always reproduces the same sequence.
    With scramble=False the output is the canonical sequence starting at
    index 1 regardless of seed.
    """

    def __init__(self, dimension, seed=0, scramble=False, table=None,
                 replicate=0):
        if dimension < 1:
            raise ConfigurationError(f"dimension must be >= 1, got {dimension}")
        self.dimension = int(dimension)
        self.seed = int(seed)
        self.scramble = bool(scramble)
        self.replicate = int(replicate)
        self.index = 1
        if table is None:
            table = _default_table()
        V = table.direction_vectors(self.dimension)
        if scramble:
            rng = np.random.Generator(
                np.random.Philox(np.random.SeedSequence([self.seed,
                                                         self.replicate])))
            V = self._scramble_vectors(V, rng)
            self._shift = rng.integers(0, 2**_NBITS, size=self.dimension,
                                       dtype=np.uint32)
        else:
            self._shift = np.zeros(self.dimension, dtype=np.uint32)
        self._V = V

    @staticmethod
    def _scramble_vectors(V, rng):
        """Apply a random lower-triangular unit-diagonal bit matrix per dim.

        Row i of the matrix (digit i of the output, most significant
        first) is stored as a 32-bit mask; output digit i is the parity
        of (row_mask & v).  Applying the matrix to the direction vectors
        is equivalent to applying it to every generated point, since the
        construction is linear over GF(2).
        """
        dim, nbits = V.shape
        out = np.empty_like(V)
        positions = np.arange(nbits, dtype=np.uint32)
        for j in range(dim):
            below = rng.integers(0, 2**_NBITS, size=nbits, dtype=np.uint32)
            # keep only strictly-lower bits (digits more significant than i),
            # then set the diagonal
            diag = np.uint32(1) << (np.uint32(_NBITS - 1) - positions)
            upper_mask = np.zeros(nbits, dtype=np.uint32)
            for i in range(1, nbits):
                upper_mask[i] = (np.uint32(0xFFFFFFFF)
                                 << np.uint32(_NBITS - i)) & np.uint32(0xFFFFFFFF)
            rows = (below & upper_mask) | diag
            y = np.zeros(nbits, dtype=np.uint32)
            for i in range(nbits):
                bits = _parity(rows[i] & V[j])
                y |= bits << np.uint32(_NBITS - 1 - i)
            out[j] = y
        return out

    def take(self, count):
        """Next `count` points as a (count, dimension) float64 array."""
        if count < 0:
            raise ConfigurationError(f"count must be >= 0, got {count}")
        if self.index + count > _MAX_INDEX:
            raise ExhaustionError(
                f"stream exhausted: index {self.index} + {count} exceeds 2^31")
        idx = np.arange(self.index, self.index + count, dtype=np.uint32)
        gray = idx ^ (idx >> np.uint32(1))
        X = np.zeros((count, self.dimension), dtype=np.uint32)
        for k in range(_NBITS):
            active = ((gray >> np.uint32(k)) & np.uint32(1)).astype(bool)
            if active.any():
                X[active] ^= self._V[:, k]
        X ^= self._shift
        self.index += count
        return X.astype(np.float64) * 2.0**-_NBITS

    def next(self):
        """Next single point as a length-dimension array."""
        return self.take(1)[0]


def sobol_next(stream):
    """Functional alias for stream.next()."""
    return stream.next()


def sobol_block(dimension, count, replicate_count, seed, scramble=True,
                table=None):
    """`replicate_count` independently scrambled point sets of `count` points.

    Returns a (replicate_count, count, dimension) array.  count must be a
    power of two so each replicate is a digital net.
    """
    if count < 1 or (count & (count - 1)) != 0:
        raise ConfigurationError(f"count must be a power of two, got {count}")
    if replicate_count < 1:
        raise ConfigurationError(
            f"replicate_count must be >= 1, got {replicate_count}")
    if table is None:
        table = _default_table()
    out = np.empty((replicate_count, count, dimension), dtype=np.float64)
    for r in range(replicate_count):
        stream = SobolStream(dimension, seed=seed, scramble=scramble,
                             table=table, replicate=r)
        out[r] = stream.take(count)
    return out
