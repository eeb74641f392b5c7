"""Exact time evolution, mirroring reports, phase fits, spectrum classification.

Dense eigendecomposition handles sectors up to dimension 4096; larger sectors
go through a residual-controlled Lanczos approximation of exp(-iHt). A
matrix-free variant evolves SparseStates without ever enumerating the sector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .lattice import CouplingPattern, ExchangeGraph, SymmetryMap
from .sectors import (
    SectorBasis,
    SectorHamiltonian,
    SectorState,
    SparseState,
    build_sector_hamiltonian,
    enumerate_sector_basis,
)

DENSE_DIM_LIMIT = 4096
KRYLOV_DIM = 30
KRYLOV_TOL = 1e-10


def _as_graph(obj) -> ExchangeGraph:
    return obj.to_graph() if isinstance(obj, CouplingPattern) else obj


def apply_hamiltonian(graph, psi: SparseState) -> SparseState:
    """Exact sparse application of H: each edge hops one excitation, weight 2w.

    Popcounts are preserved, and the support only grows to hop-connected
    bitmasks (exact zero amplitudes are dropped by canonicalization).
    """
    graph = _as_graph(graph)
    if graph.site_count != psi.site_count:
        raise ValueError("graph and state have different site counts")
    masks = psi.masks
    out_masks = []
    out_amps = []
    for a, b, w in graph.edges:
        if w == 0.0:
            continue
        mov = np.nonzero(((masks >> a) & 1) != ((masks >> b) & 1))[0]
        if len(mov) == 0:
            continue
        out_masks.append(masks[mov] ^ np.int64((1 << a) | (1 << b)))
        out_amps.append(psi.amps[mov] * (2.0 * w))
    if not out_masks:
        return SparseState(psi.site_count, np.empty(0, np.int64), np.empty(0, np.complex128))
    return SparseState(psi.site_count, np.concatenate(out_masks), np.concatenate(out_amps))


# -- Krylov propagation -------------------------------------------------------


def _lanczos_step(matvec, inner, combine, v, norm_v, tau, m, breakdown_tol):
    """One Krylov step: approximate exp(-i*tau*H) v and an error estimate.

    matvec/inner/combine abstract the vector arithmetic so the same code
    drives dense arrays and SparseStates. Returns (w, err_estimate).
    """
    vecs = [v]
    alphas, betas = [], []
    broke_down = False
    for j in range(m):
        w = matvec(vecs[j])
        alpha = inner(vecs[j], w).real
        terms = [(1.0, w), (-alpha, vecs[j])]
        if j > 0:
            terms.append((-betas[j - 1], vecs[j - 1]))
        w = combine(terms)
        # full reorthogonalization keeps the small tridiagonal trustworthy
        corr = [(1.0, w)]
        for u in vecs:
            corr.append((-inner(u, w), u))
        w = combine(corr)
        alphas.append(alpha)
        beta = np.sqrt(inner(w, w).real)
        if beta <= breakdown_tol:
            broke_down = True
            break
        betas.append(beta)
        vecs.append(combine([(1.0 / beta, w)]))
    j = len(alphas)
    T = np.diag(alphas)
    for i, b in enumerate(betas[: j - 1]):
        T[i, i + 1] = T[i + 1, i] = b
    evals, U = np.linalg.eigh(T)
    small = U @ (np.exp(-1j * tau * evals) * U[0, :].conj())
    approx = combine([(norm_v * small[i], vecs[i]) for i in range(j)])
    if broke_down or j < m:
        err = 0.0
    else:
        err = abs(norm_v) * betas[-1] * abs(small[-1]) * abs(tau)
    return approx, err


def _krylov_expm(matvec, inner, combine, v, t, m=KRYLOV_DIM, tol=KRYLOV_TOL):
    """Adaptive-substep Lanczos propagation of exp(-iHt) v."""
    norm_v = np.sqrt(inner(v, v).real)
    if norm_v == 0.0 or t == 0.0:
        return v
    scale = 1.0 / norm_v
    current = combine([(scale, v)])
    current_norm = 1.0
    remaining = t
    tau = t
    while abs(remaining) > 0:
        if abs(tau) > abs(remaining):
            tau = remaining
        budget = tol * abs(tau) / abs(t)
        w, err = _lanczos_step(
            matvec, inner, combine, current, current_norm, tau, m, 1e-13
        )
        if err > budget and abs(tau) > 1e-12 * abs(t):
            tau = tau / 2
            continue
        remaining -= tau
        nrm = np.sqrt(inner(w, w).real)
        current = combine([(1.0 / nrm, w)])
        current_norm = 1.0
    return combine([(norm_v, current)])


def _dense_ops():
    def inner(x, y):
        return complex(np.vdot(x, y))

    def combine(terms):
        out = None
        for c, vec in terms:
            out = c * vec.astype(np.complex128) if out is None else out + c * vec
        return out

    return inner, combine


def evolve(H: SectorHamiltonian, psi: SectorState, t: float) -> SectorState:
    """exp(-iHt) psi, norm-preserving within 1e-12.

    Dense symmetric eigendecomposition for dim <= 4096, otherwise Lanczos
    with residual-controlled substeps targeting a 2-norm error <= 1e-10.
    """
    if not np.isfinite(t):
        raise ValueError("evolution time must be finite")
    if H.basis.dim != psi.basis.dim or H.basis.site_count != psi.basis.site_count:
        raise ValueError("Hamiltonian and state live on different bases")
    if H.dim <= DENSE_DIM_LIMIT:
        evals, vecs = H.eig()
        amps = vecs @ (np.exp(-1j * evals * t) * (vecs.T @ psi.amplitudes))
        return SectorState(psi.basis, amps)
    inner, combine = _dense_ops()
    amps = _krylov_expm(lambda x: H.mat @ x, inner, combine, psi.amplitudes, t)
    return SectorState(psi.basis, amps)


def evolve_sparse(graph, psi: SparseState, t: float, tol: float = KRYLOV_TOL) -> SparseState:
    """Matrix-free Lanczos evolution of a SparseState.

    Never enumerates a sector basis, so it handles lattices whose sectors are
    far beyond the dense limit as long as the state's support stays bounded
    (stationary or near-stationary states break down after one step).
    """
    if not np.isfinite(t):
        raise ValueError("evolution time must be finite")
    graph = _as_graph(graph)

    def inner(x, y):
        return x.inner(y)

    def combine(terms):
        out = None
        for c, vec in terms:
            piece = vec.scaled(c)
            out = piece if out is None else out.add(piece)
        return out

    return _krylov_expm(lambda x: apply_hamiltonian(graph, x), inner, combine, psi, t, tol=tol)


def evolve_state(graph, psi: SparseState, t: float) -> SparseState:
    """Evolve a multi-sector SparseState by evolving each sector exactly.

    Sectors within the dense limit use eigendecomposition; larger ones fall
    back to the matrix-free path.
    """
    graph = _as_graph(graph)
    if len(psi.masks) == 0:
        return psi
    pieces = []
    for k, comp in psi.sector_split().items():
        if math.comb(graph.site_count, k) <= DENSE_DIM_LIMIT:
            H = build_sector_hamiltonian(graph, k)
            out = evolve(H, comp.to_sector_state(H.basis), t)
            pieces.append(SparseState(psi.site_count, H.basis.masks, out.amplitudes))
        else:
            pieces.append(evolve_sparse(graph, comp, t))
    state = pieces[0]
    for p in pieces[1:]:
        state = state.add(p)
    return state


# -- fidelities and reports ---------------------------------------------------


def _flat_site(pattern_or_graph, site) -> int:
    if isinstance(site, (int, np.integer)):
        return int(site)
    if isinstance(pattern_or_graph, CouplingPattern):
        return pattern_or_graph.geometry.flat(*site)
    raise ValueError("(i, j) site addressing needs a CouplingPattern, not a bare graph")


def transfer_fidelity(pattern, source, target, t: float) -> float:
    """|<target| exp(-iH t) |source>| in the single-excitation sector."""
    graph = _as_graph(pattern)
    a = _flat_site(pattern, source)
    b = _flat_site(pattern, target)
    H = build_sector_hamiltonian(graph, 1)
    # k=1 masks are 1<<p in ascending p, so flat site == rank
    evals, vecs = H.eig()
    amp = (vecs[b, :] * vecs[a, :]) @ np.exp(-1j * evals * t)
    return float(abs(amp))


def permuted_ranks(basis: SectorBasis, sym: SymmetryMap) -> np.ndarray:
    """rank(perm(mask)) for every mask in the basis, in rank order."""
    if sym.site_count != basis.site_count:
        raise ValueError("symmetry map acts on a different site count")
    new = np.zeros_like(basis.masks)
    for bit in range(basis.site_count):
        new |= ((basis.masks >> bit) & 1) << np.int64(sym.perm[bit])
    rows = np.searchsorted(basis.masks, new)
    if np.any(rows >= basis.dim) or np.any(basis.masks[rows] != new):
        raise ValueError("permutation does not preserve the sector")
    return rows


def permutation_operator(basis: SectorBasis, sym: SymmetryMap) -> sp.csr_matrix:
    """The basis permutation induced by a site permutation, as a sparse matrix."""
    rows = permuted_ranks(basis, sym)
    return sp.csr_matrix(
        (np.ones(basis.dim), (rows, np.arange(basis.dim))), shape=(basis.dim, basis.dim)
    )


@dataclass(frozen=True)
class MirroringReport:
    """Per-basis-state diagnostics of U = exp(-iH_k t) against a permutation."""

    k: int
    t: float
    sym_name: str
    min_modulus: float
    max_offtarget: float
    moduli: np.ndarray = field(repr=False)
    phases: np.ndarray = field(repr=False)
    basis: SectorBasis = field(repr=False)


def mirroring_report(pattern, k: int, sym: SymmetryMap, t: float) -> MirroringReport:
    """Moduli and phases of the mirror-permutation entries of exp(-iH_k t).

    phases[x] is the unit-modulus direction of U[perm(x), x]. The k=0 sector
    evolves trivially (H has no diagonal part), so amplitudes are already
    gauged relative to the vacuum. Perfect mirroring up to phases means
    min_modulus approaches 1.
    """
    graph = _as_graph(pattern)
    H = build_sector_hamiltonian(graph, k)
    basis = H.basis
    perm_rows = permuted_ranks(basis, sym)
    if basis.dim <= DENSE_DIM_LIMIT:
        evals, vecs = H.eig()
        U = (vecs * np.exp(-1j * evals * t)) @ vecs.T
        target = U[perm_rows, np.arange(basis.dim)]
        off = np.abs(U)
        off[perm_rows, np.arange(basis.dim)] = 0.0
        max_off = float(off.max()) if basis.dim else 0.0
    else:
        target = np.empty(basis.dim, dtype=np.complex128)
        max_off = 0.0
        for x in range(basis.dim):
            col = evolve(H, SectorState(basis, _unit(basis.dim, x)), t).amplitudes
            target[x] = col[perm_rows[x]]
            col = np.abs(col)
            col[perm_rows[x]] = 0.0
            max_off = max(max_off, float(col.max()))
    moduli = np.abs(target)
    safe = np.where(moduli > 0, moduli, 1.0)
    phases = target / safe
    return MirroringReport(
        k=k,
        t=t,
        sym_name=sym.name,
        min_modulus=float(moduli.min()) if basis.dim else 1.0,
        max_offtarget=max_off,
        moduli=moduli,
        phases=phases,
        basis=basis,
    )


def _unit(dim, i):
    v = np.zeros(dim, dtype=np.complex128)
    v[i] = 1.0
    return v


@dataclass(frozen=True)
class PhaseFit:
    """Result of fitting phase(x) = g * s^(pairs in x) over one sector."""

    global_phase: complex
    pair_phase_sign: int
    residual: float
    ok: bool


def phase_network_fit(phases: np.ndarray, basis: SectorBasis, sym: SymmetryMap | None = None) -> PhaseFit:
    """Fit the mirrored phases to a sector constant times a pairwise sign.

    Within a single sector every basis state has the same number of
    excitation pairs, C(k,2), so the two signs fit equally well and only the
    product g*s^C(k,2) is identifiable; the fermionic sign s = -1 is reported
    by convention and g absorbs the rest. residual is the largest deviation
    of any phase from the fitted model; ok requires residual <= 1e-8.
    """
    phases = np.asarray(phases, dtype=np.complex128)
    if phases.shape != (basis.dim,):
        raise ValueError("need one phase per sector basis state")
    s = -1
    pairs = basis.k * (basis.k - 1) // 2
    model_sign = float(s**pairs)
    centered = phases * model_sign  # s^pairs is +-1, so this inverts it
    mean = centered.mean()
    if abs(mean) < 1e-12:
        # phases point in all directions: no constant fits
        return PhaseFit(global_phase=1.0 + 0j, pair_phase_sign=s, residual=2.0, ok=False)
    g = mean / abs(mean)
    residual = float(np.abs(phases - g * model_sign).max())
    return PhaseFit(global_phase=complex(g), pair_phase_sign=s, residual=residual, ok=residual <= 1e-8)


# -- spectrum classification --------------------------------------------------


@dataclass(frozen=True)
class SpectrumGroup:
    """A degeneracy group of eigenvalues with its symmetry content."""

    eigenvalue: float
    multiplicity: int
    label: str  # "+1", "-1", or "mixed"
    vector_symmetries: tuple[int, ...]
    max_symmetry_defect: float


def classify_spectrum(
    H: SectorHamiltonian, sym: SymmetryMap, degeneracy_tol: float | None = None
) -> list[SpectrumGroup]:
    """Group eigenvalues and label each group by its symmetry eigenvalues.

    Requires the permutation to commute with H (raises otherwise). Eigenvalues
    are grouped within degeneracy_tol, default 1e-8 times the spectral range.
    A group is "mixed" when it contains both +1 and -1 eigenvectors of the
    permutation; degenerate mixed groups are the mirroring obstructions.
    """
    P = permutation_operator(H.basis, sym)
    comm = (P @ H.mat - H.mat @ P).tocoo()
    hscale = max(1.0, float(np.abs(H.mat.data).max()) if H.mat.nnz else 0.0)
    if comm.nnz and float(np.abs(comm.data).max()) > 1e-12 * hscale:
        raise ValueError("symmetry does not commute with the Hamiltonian")
    evals, vecs = H.eig()
    if H.dim == 0:
        return []
    spread = float(evals[-1] - evals[0])
    tol = degeneracy_tol if degeneracy_tol is not None else 1e-8 * spread
    if tol <= 0:
        tol = 1e-12
    groups: list[list[int]] = [[0]]
    for i in range(1, H.dim):
        if evals[i] - evals[i - 1] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    Pd = P.toarray()
    out = []
    for g in groups:
        B = vecs[:, g]
        M = B.T @ (Pd @ B)
        M = (M + M.T) / 2
        mu, W = np.linalg.eigh(M)
        rotated = B @ W
        labels = []
        defect = 0.0
        for col, m in zip(rotated.T, mu):
            s = 1 if m > 0 else -1
            labels.append(s)
            defect = max(defect, float(np.linalg.norm(Pd @ col - s * col)))
        if all(s == 1 for s in labels):
            label = "+1"
        elif all(s == -1 for s in labels):
            label = "-1"
        else:
            label = "mixed"
        out.append(
            SpectrumGroup(
                eigenvalue=float(np.mean(evals[g])),
                multiplicity=len(g),
                label=label,
                vector_symmetries=tuple(labels),
                max_symmetry_defect=defect,
            )
        )
    return out


def has_degenerate_mixed_group(groups: list[SpectrumGroup]) -> bool:
    """True when some degenerate eigenvalue carries both symmetry labels."""
    return any(g.multiplicity >= 2 and g.label == "mixed" for g in groups)
