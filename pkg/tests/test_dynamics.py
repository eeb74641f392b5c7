import math

import numpy as np
import pytest

from spinmirror.chains import chain_pattern, christandl_chain, parallel_chain_pattern, uniform_chain
from spinmirror.dynamics import (
    apply_hamiltonian,
    classify_spectrum,
    evolve,
    evolve_sparse,
    evolve_state,
    has_degenerate_mixed_group,
    mirroring_report,
    permutation_operator,
    permuted_ranks,
    phase_network_fit,
    transfer_fidelity,
)
from spinmirror.lattice import (
    CouplingPattern,
    ExchangeGraph,
    build_chain,
    build_square_lattice,
    symmetry_map,
    uniform_pattern,
)
from spinmirror.sectors import (
    SparseState,
    basis_state,
    build_sector_hamiltonian,
    enumerate_sector_basis,
    from_sector_state,
)


def random_graph(site_count, n_edges, seed):
    rng = np.random.default_rng(seed)
    pairs = [(a, b) for a in range(site_count) for b in range(a + 1, site_count)]
    chosen = rng.choice(len(pairs), size=n_edges, replace=False)
    return ExchangeGraph(
        site_count,
        tuple((*pairs[i], float(rng.uniform(0.2, 1.5))) for i in sorted(chosen)),
    )


def random_sector_state(basis, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim)
    from spinmirror.sectors import SectorState

    return SectorState(basis, v / np.linalg.norm(v))


def test_evolve_at_zero_time_is_identity():
    H = build_sector_hamiltonian(chain_pattern(christandl_chain(4)).to_graph(), 2)
    psi = random_sector_state(H.basis, 0)
    out = evolve(H, psi, 0.0)
    assert np.abs(out.amplitudes - psi.amplitudes).max() < 1e-14


def test_two_site_flip():
    # hopping element 2, so the excitation has fully swapped at t = pi/4
    pat = chain_pattern(uniform_chain(2))
    H = build_sector_hamiltonian(pat.to_graph(), 1)
    out = evolve(H, basis_state(H.basis, 0b01), math.pi / 4)
    assert abs(abs(out.amplitudes[H.basis.rank(0b10)]) - 1.0) < 1e-14
    assert abs(out.amplitudes[H.basis.rank(0b01)]) < 1e-14


def test_transfer_fidelity_quarter_swap():
    pat = chain_pattern(uniform_chain(2))
    assert transfer_fidelity(pat, 0, 1, math.pi / 8) == pytest.approx(math.sqrt(2) / 2, abs=1e-14)


def test_unitarity_and_reversibility():
    g = random_graph(10, 14, seed=5)
    H = build_sector_hamiltonian(g, 3)
    psi = random_sector_state(H.basis, 1)
    t = 3.7
    out = evolve(H, psi, t)
    assert abs(out.norm() - 1.0) < 1e-12
    back = evolve(H, out, -t)
    assert np.abs(back.amplitudes - psi.amplitudes).max() < 1e-10


def test_krylov_agrees_with_dense():
    # sector dimension 1001 exercises the dense path; the matrix-free Lanczos
    # route must agree to 1e-9 on the same state
    g = random_graph(14, 24, seed=7)
    H = build_sector_hamiltonian(g, 4)
    assert 1000 <= H.dim <= 4096
    psi = random_sector_state(H.basis, 2)
    t = 2.3
    dense = evolve(H, psi, t)
    sparse_out = evolve_sparse(g, from_sector_state(psi), t)
    diff = sparse_out.add(from_sector_state(dense).scaled(-1.0)).norm()
    assert diff < 1e-9
    assert abs(sparse_out.norm() - 1.0) < 1e-10


def test_apply_hamiltonian_matches_matrix():
    g = random_graph(8, 10, seed=11)
    H = build_sector_hamiltonian(g, 2)
    psi = random_sector_state(H.basis, 3)
    via_matrix = H.mat @ psi.amplitudes
    via_sparse = apply_hamiltonian(g, from_sector_state(psi))
    ref = from_sector_state(type(psi)(H.basis, via_matrix))
    assert via_sparse.add(ref.scaled(-1.0)).norm() < 1e-12


def test_evolve_state_multi_sector():
    pat = chain_pattern(christandl_chain(3))
    psi = SparseState.from_dict(3, {0b000: 0.5, 0b001: 0.5, 0b011: 0.5, 0b111: 0.5})
    t = 1.9
    out = evolve_state(pat.to_graph(), psi, t)
    assert abs(out.norm() - 1.0) < 1e-12
    # vacuum and full sectors are frozen (H has no diagonal part)
    assert out.amplitude(0b000) == pytest.approx(0.5, abs=1e-12)
    assert out.amplitude(0b111) == pytest.approx(0.5, abs=1e-12)
    # sector contents must match the dense per-sector evolution
    H1 = build_sector_hamiltonian(pat.to_graph(), 1)
    comp = psi.sector_split()[1].to_sector_state(H1.basis)
    ref = evolve(H1, comp, t)
    for mask, amp in zip(H1.basis.masks, ref.amplitudes):
        assert out.amplitude(int(mask)) == pytest.approx(amp, abs=1e-12)


def test_permuted_ranks_small():
    basis = enumerate_sector_basis(2, 1)
    sym = symmetry_map(build_chain(2), "vertical_axis")
    assert list(permuted_ranks(basis, sym)) == [1, 0]
    P = permutation_operator(basis, sym).toarray()
    assert np.array_equal(P, [[0, 1], [1, 0]])


def test_mirroring_report_christandl():
    c = christandl_chain(5)
    pat = chain_pattern(c)
    sym = symmetry_map(pat.geometry, "vertical_axis")
    rep = mirroring_report(pat, 2, sym, c.nominal_transfer_time)
    assert rep.min_modulus >= 1 - 1e-12
    assert rep.max_offtarget < 1e-6
    fit = phase_network_fit(rep.phases, rep.basis)
    assert fit.ok and fit.residual <= 1e-8
    # sector phase is the single-excitation phase to the k-th power
    psi1 = (-1j) ** (c.n - 1)
    assert abs(fit.global_phase - psi1**2) < 1e-9


def test_phase_fit_rejects_scattered_phases():
    basis = enumerate_sector_basis(4, 1)
    phases = np.array([1.0, 1.0j, -1.0, -1.0j])
    fit = phase_network_fit(phases, basis)
    assert not fit.ok
    with pytest.raises(ValueError):
        phase_network_fit(phases[:2], basis)


def test_classify_two_site_chain():
    H = build_sector_hamiltonian(chain_pattern(uniform_chain(2)).to_graph(), 1)
    sym = symmetry_map(build_chain(2), "vertical_axis")
    groups = classify_spectrum(H, sym)
    assert [(g.eigenvalue, g.multiplicity, g.label) for g in groups] == [
        (pytest.approx(-2.0), 1, "-1"),
        (pytest.approx(2.0), 1, "+1"),
    ]
    assert not has_degenerate_mixed_group(groups)


def test_classify_zero_couplings_single_mixed_group():
    g = build_square_lattice(2)
    pat = CouplingPattern(g, np.zeros((1, 2)), np.zeros((2, 1)))
    H = build_sector_hamiltonian(pat.to_graph(), 1)
    groups = classify_spectrum(H, symmetry_map(g, "rotation_pi"))
    assert len(groups) == 1
    assert groups[0].multiplicity == 4
    assert groups[0].label == "mixed"
    assert has_degenerate_mixed_group(groups)


def test_classify_requires_commuting_symmetry():
    g = build_square_lattice(2)
    pat = CouplingPattern(g, np.array([[1.0, 2.0]]), np.array([[3.0], [4.0]]))
    H = build_sector_hamiltonian(pat.to_graph(), 1)
    with pytest.raises(ValueError, match="commute"):
        classify_spectrum(H, symmetry_map(g, "rotation_pi"))


def test_classify_vectors_are_genuine_symmetry_eigenvectors():
    pat = parallel_chain_pattern(christandl_chain(4), 2)
    H = build_sector_hamiltonian(pat.to_graph(), 2)
    groups = classify_spectrum(H, symmetry_map(pat.geometry, "vertical_axis"))
    assert max(g.max_symmetry_defect for g in groups) <= 1e-8
    assert sum(g.multiplicity for g in groups) == H.dim
