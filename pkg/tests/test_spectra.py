import numpy as np
import pytest

from pairdeg import (EigensolverError, branch_slopes, c_normalize,
                     canonical_order, continue_spectrum, eigendecompose,
                     hamiltonian_at, match_states, spectrum_along)
from pairdeg.spectra import bilinear, semicircle


def random_complex_symmetric(rng, n=4):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return A + A.T


def test_eigendecompose_diagonal():
    spec = eigendecompose(np.diag([6.0, 4.0, 4.0, 2.0]).astype(complex))
    assert sorted(spec.eigenvalues.real) == [2, 4, 4, 6]
    # coordinate eigenvectors up to ordering/sign
    P = np.abs(spec.eigenvectors)
    assert np.allclose(np.sort(P, axis=0)[-1], 1.0)


def test_eigendecompose_reference(model, pseudo_dp):
    spec = eigendecompose(hamiltonian_at(model, pseudo_dp), g=pseudo_dp)
    ref = np.array([4 - 3.79878j, 4 - np.sqrt(2) * 1j, 4 - np.sqrt(2) * 1j,
                    4 + 0.263243j])
    np.testing.assert_allclose(spec.eigenvalues, ref, atol=1e-5)


def test_trace_equals_eigenvalue_sum():
    rng = np.random.default_rng(3)
    for _ in range(20):
        H = random_complex_symmetric(rng)
        spec = eigendecompose(H)
        assert abs(np.sum(spec.eigenvalues) - np.trace(H)) <= 1e-10 * max(
            1.0, abs(np.trace(H)))


def test_eigendecompose_rejects_nonfinite():
    H = np.eye(3, dtype=complex)
    H[0, 0] = np.nan
    with pytest.raises(EigensolverError):
        eigendecompose(H)


def test_residual_bound(model):
    rng = np.random.default_rng(4)
    for _ in range(10):
        g = complex(rng.normal(), rng.normal()) * 0.4
        H = hamiltonian_at(model, g)
        spec = eigendecompose(H, g=g)
        res = np.linalg.norm(
            H @ spec.eigenvectors - spec.eigenvectors * spec.eigenvalues[None, :],
            axis=0)
        assert np.all(res <= 1e-9 * np.linalg.norm(H))


def test_canonical_order_groups_by_imag():
    e = np.array([1 + 1j, -2 + 1j + 1e-12j, 0 - 1j])
    order = canonical_order(e, im_tol=1e-8)
    assert list(order) == [2, 1, 0]  # Im -1 first, then the Im=1 pair by Re


def test_c_normalize_coordinate_vector():
    spec = eigendecompose(np.diag([1.0, 2.0, 3.0]).astype(complex))
    out = c_normalize(spec)
    assert np.allclose(np.abs(out.self_orthogonality), 1.0)
    for k in range(3):
        assert bilinear(out.eigenvectors[:, k], out.eigenvectors[:, k]) == \
            pytest.approx(1.0)


def test_c_normalize_flags_coalescing_pair(model, pseudo_dp):
    spec = c_normalize(eigendecompose(hamiltonian_at(model, pseudo_dp), g=pseudo_dp))
    assert list(spec.self_orthogonal) == [False, True, True, False]
    assert np.all(np.abs(spec.self_orthogonality[[1, 2]]) <= 1e-6)
    # flagged vectors keep unit 2-norm
    for k in (1, 2):
        assert np.linalg.norm(spec.eigenvectors[:, k]) == pytest.approx(1.0)


def test_c_normalized_gauge_rule(model):
    rng = np.random.default_rng(5)
    for _ in range(10):
        g = complex(rng.normal(), rng.normal()) * 0.3
        spec = c_normalize(eigendecompose(hamiltonian_at(model, g), g=g))
        for k in range(spec.dim):
            v = spec.eigenvectors[:, k]
            a = v[np.argmax(np.abs(v))]
            assert a.real > 0 or (a.real == 0 and a.imag >= 0)


def test_u1_components_match_reference(model, pseudo_dp):
    spec = c_normalize(eigendecompose(hamiltonian_at(model, pseudo_dp), g=pseudo_dp))
    ref = np.array([0.616894 + 0.517406j, 0.731723, 0.488757,
                    0.616894 - 0.517406j])
    u1 = spec.eigenvectors[:, 0]
    err = min(np.max(np.abs(u1 - ref)), np.max(np.abs(u1 + ref)))
    assert err <= 1e-4


def test_biorthogonality_generic(model):
    rng = np.random.default_rng(6)
    for _ in range(10):
        g = complex(rng.normal(), 0.2 + abs(rng.normal())) * 0.3
        spec = c_normalize(eigendecompose(hamiltonian_at(model, g), g=g))
        if np.any(spec.self_orthogonal):
            continue
        G = spec.eigenvectors.T @ spec.eigenvectors
        assert np.max(np.abs(G - np.eye(spec.dim))) <= 1e-8


def test_match_states_identity():
    e = np.array([1 + 1j, 2.0, 3 - 1j])
    m = match_states(e, e)
    assert m.perm == (0, 1, 2)
    assert not m.ambiguous


def test_match_states_detects_benign_tie():
    prev = np.array([0.0 + 0j, 1.0])
    nxt = np.array([0.5, 0.5 + 1e-15])
    m = match_states(prev, nxt)
    assert m.ambiguous and m.benign_tie


def test_match_states_detects_genuine_ambiguity():
    prev = np.array([-1.0 + 0j, 1.0])
    nxt = np.array([0.5j, -0.5j])
    m = match_states(prev, nxt)
    assert m.ambiguous and not m.benign_tie


def test_match_states_large_dimension_path():
    rng = np.random.default_rng(7)
    e = rng.normal(size=9) + 1j * rng.normal(size=9)
    perm = rng.permutation(9)
    m = match_states(e, e[perm])
    restored = np.array(m.perm)
    np.testing.assert_array_equal(e[perm][restored], e)


def test_spectrum_along_hermitian_limit(model):
    table = spectrum_along(model, -0.1, 0.1, 21)
    assert np.max(np.abs(table.energies.imag)) <= 1e-10
    # The path crosses the exact crossing at g=0, where the branch choice is
    # a recorded tie rather than a refinement failure.
    assert any(rec.benign for rec in table.ambiguities)


def test_spectrum_along_width_coalescence(model, pseudo_dp):
    # Cut through the double root: widths of the merging pair touch at Re g=0,
    # all real parts cross at 4 there.
    start = -0.05 + 1j * pseudo_dp.imag
    table = spectrum_along(model, start, -np.conj(start), 41)
    mid = 20
    assert abs(table.gs[mid].real) < 1e-12
    # Eigenvalues of the defective pair carry sqrt(eps)-level solver noise.
    np.testing.assert_allclose(table.energies[mid].real, 4.0, atol=1e-6)
    width_gap = abs(table.energies[mid, 1].imag - table.energies[mid, 2].imag)
    assert width_gap <= 1e-6
    edge_gap = abs(table.energies[0, 1] - table.energies[0, 2])
    assert edge_gap > 0.1


def test_forward_backward_identity(model):
    pts = list(np.linspace(-0.3 + 0.2j, 0.1 - 0.25j, 15))
    fwd = continue_spectrum(model, pts, want_vectors=False)
    round_trip = continue_spectrum(model, pts + pts[::-1][1:], want_vectors=False)
    np.testing.assert_allclose(
        round_trip.spectra[-1].eigenvalues, round_trip.spectra[0].eigenvalues,
        atol=1e-10)
    np.testing.assert_allclose(
        fwd.spectra[0].eigenvalues, round_trip.spectra[0].eigenvalues, atol=0)


def test_branch_slopes_reference(model, pseudo_dp):
    slopes = branch_slopes(model, pseudo_dp, h=1e-4)
    ref = np.array([35.9338, 8.0, 0.0, -7.93378])
    for k, r in enumerate(ref):
        if r == 0:
            assert abs(slopes[k]) <= 1e-2
        else:
            assert abs(slopes[k] - r) / abs(r) <= 1e-3
    assert abs(np.sum(slopes) - 36.0) <= 1e-8


def test_eigenvalues_agree_with_char_poly_roots(model):
    # Independent oracle: the characteristic polynomial from the trace
    # recurrence must have the eigensolver's spectrum as its root set.
    from pairdeg import char_poly

    rng = np.random.default_rng(8)
    for _ in range(10):
        g = complex(rng.normal(), rng.normal()) * 0.4
        H = hamiltonian_at(model, g)
        eigs = np.sort_complex(eigendecompose(H, g=g).eigenvalues)
        roots = np.sort_complex(np.roots(char_poly(H)[::-1]))
        np.testing.assert_allclose(eigs, roots, atol=1e-8 * np.linalg.norm(H))


def test_semicircle_endpoints():
    arc = semicircle(1j, 0.1, 16)
    assert arc[0] == pytest.approx(1j - 0.1)
    assert arc[-1] == pytest.approx(1j + 0.1)
    assert np.all(np.abs(np.abs(arc - 1j) - 0.1) < 1e-14)


def test_cut_table_csv(tmp_path, model):
    table = spectrum_along(model, -0.05, 0.05, 5)
    path = tmp_path / "cut.csv"
    table.to_csv(path, meta=["config_sha256=deadbeef", "version=test"])
    lines = path.read_text().splitlines()
    assert lines[0] == "# config_sha256=deadbeef"
    header = lines[2].split(",")
    assert header[:4] == ["g_re", "g_im", "E1_re", "E1_im"]
    assert len(lines) == 3 + 5
