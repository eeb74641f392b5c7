"""Excitation-number sectors: basis enumeration, sparse Hamiltonians, states.

Occupation bitmasks use bit p for flat site p; the vacuum is mask 0. The
exchange Hamiltonian never changes a mask's popcount, so each weight-k sector
evolves independently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

from .lattice import CouplingPattern, ExchangeGraph

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)


def popcount(masks: np.ndarray) -> np.ndarray:
    """Vectorized 64-bit population count."""
    if hasattr(np, "bitwise_count"):
        return np.bitwise_count(masks.astype(np.uint64)).astype(np.int64)
    x = masks.astype(np.uint64)
    x = x - ((x >> np.uint64(1)) & _M1)
    x = (x & _M2) + ((x >> np.uint64(2)) & _M2)
    x = (x + (x >> np.uint64(4))) & _M4
    return ((x * _H01) >> np.uint64(56)).astype(np.int64)


@dataclass(frozen=True)
class SectorBasis:
    """All weight-k bitmasks on M sites, in ascending numeric order."""

    site_count: int
    k: int
    masks: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.masks)

    def rank(self, mask: int) -> int:
        i = int(np.searchsorted(self.masks, mask))
        if i >= self.dim or self.masks[i] != mask:
            raise ValueError(f"mask {mask:#x} not in sector (M={self.site_count}, k={self.k})")
        return i

    def unrank(self, index: int) -> int:
        if not 0 <= index < self.dim:
            raise ValueError("index out of range")
        return int(self.masks[index])


def enumerate_sector_basis(site_count: int, k: int) -> SectorBasis:
    """Combinadic enumeration via Gosper's hack: next higher weight-k integer."""
    if not 0 <= k <= site_count:
        raise ValueError(f"need 0 <= k <= M, got k={k}, M={site_count}")
    if site_count > 63:
        raise ValueError("bitmask representation limited to 63 sites")
    dim = math.comb(site_count, k)
    masks = np.empty(dim, dtype=np.int64)
    v = (1 << k) - 1
    for i in range(dim):
        masks[i] = v
        if i + 1 < dim:
            c = v & -v
            r = v + c
            v = r | (((v ^ r) >> 2) // c)
    masks.setflags(write=False)
    return SectorBasis(site_count, k, masks)


@dataclass
class SectorHamiltonian:
    """Sparse real symmetric exchange Hamiltonian restricted to one sector."""

    basis: SectorBasis
    mat: sp.csr_matrix
    _eig: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.basis.dim

    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        """Cached dense eigendecomposition (eigenvalues, eigenvectors)."""
        if self._eig is None:
            evals, vecs = np.linalg.eigh(self.mat.toarray())
            self._eig = (evals, vecs)
        return self._eig


def _as_graph(obj) -> ExchangeGraph:
    return obj.to_graph() if isinstance(obj, CouplingPattern) else obj


def build_sector_hamiltonian(graph, k: int) -> SectorHamiltonian:
    """Assemble H_k: off-diagonal 2w between masks differing by one hop.

    XX+YY has no diagonal part in the occupation basis, so the diagonal is 0.
    """
    graph = _as_graph(graph)
    basis = enumerate_sector_basis(graph.site_count, k)
    masks = basis.masks
    rows, cols, data = [], [], []
    for a, b, w in graph.edges:
        occ_a = (masks >> a) & 1
        occ_b = (masks >> b) & 1
        mov = np.nonzero(occ_a != occ_b)[0]
        if len(mov) == 0:
            continue
        flipped = masks[mov] ^ np.int64((1 << a) | (1 << b))
        rows.append(mov)
        cols.append(np.searchsorted(masks, flipped))
        data.append(np.full(len(mov), 2.0 * w))
    if rows:
        mat = sp.coo_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(basis.dim, basis.dim),
        ).tocsr()
    else:
        mat = sp.csr_matrix((basis.dim, basis.dim))
    return SectorHamiltonian(basis, mat)


@dataclass(frozen=True)
class SectorState:
    """Complex amplitude vector over one sector basis."""

    basis: SectorBasis
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.basis.dim,):
            raise ValueError(f"amplitude vector must have length {self.basis.dim}")
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def basis_state(basis: SectorBasis, mask: int) -> SectorState:
    amps = np.zeros(basis.dim, dtype=np.complex128)
    amps[basis.rank(mask)] = 1.0
    return SectorState(basis, amps)


@dataclass(frozen=True)
class SparseState:
    """Amplitudes keyed by occupation bitmask; may straddle several sectors.

    Canonical form: masks ascending, duplicates merged, exact zeros dropped.
    """

    site_count: int
    masks: np.ndarray = field(repr=False)
    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not 0 < self.site_count <= 63:
            raise ValueError("bitmask representation limited to 1..63 sites")
        masks = np.asarray(self.masks, dtype=np.int64)
        amps = np.asarray(self.amps, dtype=np.complex128)
        if masks.shape != amps.shape or masks.ndim != 1:
            raise ValueError("masks and amps must be 1-d arrays of equal length")
        if len(masks) and (masks.min() < 0 or masks.max() >> self.site_count):
            raise ValueError("mask outside the site range")
        order = np.argsort(masks, kind="stable")
        masks, amps = masks[order], amps[order]
        uniq, inverse = np.unique(masks, return_inverse=True)
        if len(uniq) != len(masks):
            merged = np.zeros(len(uniq), dtype=np.complex128)
            np.add.at(merged, inverse, amps)
            masks, amps = uniq, merged
        keep = amps != 0
        if not keep.all():
            masks, amps = masks[keep], amps[keep]
        masks.setflags(write=False)
        amps.setflags(write=False)
        object.__setattr__(self, "masks", masks)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_dict(cls, site_count: int, amplitudes: Mapping[int, complex]) -> "SparseState":
        return cls(
            site_count,
            np.fromiter(amplitudes.keys(), dtype=np.int64, count=len(amplitudes)),
            np.fromiter(
                (complex(v) for v in amplitudes.values()),
                dtype=np.complex128,
                count=len(amplitudes),
            ),
        )

    @classmethod
    def unit(cls, site_count: int, mask: int) -> "SparseState":
        return cls(site_count, np.array([mask], dtype=np.int64), np.ones(1, np.complex128))

    def items(self) -> Iterable[tuple[int, complex]]:
        return zip((int(m) for m in self.masks), (complex(a) for a in self.amps))

    def amplitude(self, mask: int) -> complex:
        i = np.searchsorted(self.masks, mask)
        if i < len(self.masks) and self.masks[i] == mask:
            return complex(self.amps[i])
        return 0j

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def scaled(self, factor: complex) -> "SparseState":
        return SparseState(self.site_count, self.masks, self.amps * factor)

    def add(self, other: "SparseState") -> "SparseState":
        if other.site_count != self.site_count:
            raise ValueError("site count mismatch")
        return SparseState(
            self.site_count,
            np.concatenate([self.masks, other.masks]),
            np.concatenate([self.amps, other.amps]),
        )

    def inner(self, other: "SparseState") -> complex:
        """<self|other> over the common support."""
        if other.site_count != self.site_count:
            raise ValueError("site count mismatch")
        i = np.searchsorted(self.masks, other.masks)
        valid = i < len(self.masks)
        valid[valid] &= self.masks[i[valid]] == other.masks[valid]
        return complex(np.sum(np.conj(self.amps[i[valid]]) * other.amps[valid]))

    def map_sites(self, perm) -> "SparseState":
        """Relabel sites by a permutation (SymmetryMap or index sequence)."""
        p = perm.perm if hasattr(perm, "perm") else perm
        if len(p) != self.site_count:
            raise ValueError("permutation length must equal site_count")
        new = np.zeros_like(self.masks)
        for bit in range(self.site_count):
            new |= ((self.masks >> bit) & 1) << np.int64(p[bit])
        return SparseState(self.site_count, new, self.amps)

    def tensor(self, other: "SparseState") -> "SparseState":
        """Product state; the two supports must occupy disjoint sites."""
        if other.site_count != self.site_count:
            raise ValueError("site count mismatch")
        m = (self.masks[:, None] | other.masks[None, :]).ravel()
        if np.any((self.masks[:, None] & other.masks[None, :]).ravel()):
            raise ValueError("tensor factors overlap on some site")
        a = (self.amps[:, None] * other.amps[None, :]).ravel()
        return SparseState(self.site_count, m, a)

    def sector_split(self) -> dict[int, "SparseState"]:
        """Group the support by excitation number."""
        ks = popcount(self.masks)
        return {
            int(k): SparseState(self.site_count, self.masks[ks == k], self.amps[ks == k])
            for k in np.unique(ks)
        }

    def to_sector_state(self, basis: SectorBasis) -> SectorState:
        """Dense view in one sector; support outside the sector is an error."""
        if basis.site_count != self.site_count:
            raise ValueError("site count mismatch")
        amps = np.zeros(basis.dim, dtype=np.complex128)
        idx = np.searchsorted(basis.masks, self.masks)
        if np.any(idx >= basis.dim) or np.any(basis.masks[idx] != self.masks):
            raise ValueError("state has support outside the target sector")
        amps[idx] = self.amps
        return SectorState(basis, amps)


def from_sector_state(state: SectorState) -> SparseState:
    return SparseState(state.basis.site_count, state.basis.masks, state.amplitudes)
