import numpy as np
import pytest

from pairdeg import (Kind, MatrixFamily, classify, classify_all,
                     discriminant_poly, find_degeneracies,
                     pair_truncation_family, sweep_gamma)


def block_diagonal_family():
    """Two uncoupled 2x2 blocks whose eigenvalues cross at a real coupling.

    Cross-block eigenvalue crossings keep both eigenvectors regular, which is
    the level-crossing (DP) situation; each block also carries its own
    square-root branch points.
    """
    H0 = np.diag([0.0, 1.0, 2.0, 3.0])
    H1 = np.zeros((4, 4))
    H1[0, 1] = H1[1, 0] = 1.0
    H1[2, 3] = H1[3, 2] = 2.0
    return MatrixFamily(H0, H1)


def test_classify_pseudo_dp(model, pseudo_dp):
    roots = find_degeneracies(model)
    root = min(roots, key=lambda r: abs(r.g0 - pseudo_dp))
    point = classify(model, root, degeneracies=roots)
    assert point.kind == Kind.PSEUDO_DP
    assert point.coalescence <= 1e-6
    assert point.monodromy_permutation == (0, 1, 2, 3)


def test_classify_ep(model_049):
    roots = find_degeneracies(model_049)
    root = min(roots, key=lambda r: abs(r.g0 - (-0.207687j)))
    point = classify(model_049, root, degeneracies=roots)
    assert point.kind == Kind.EP
    assert point.coalescence <= 1e-6


def test_classify_trivial_crossing_as_dp(model):
    roots = find_degeneracies(model)
    origin = min(roots, key=lambda r: abs(r.g0))
    assert origin.multiplicity == 2
    point = classify(model, origin, degeneracies=roots)
    assert point.kind == Kind.DP
    assert point.coalescence > 1e-6


def test_classify_block_diagonal_dp():
    family = block_diagonal_family()
    roots = find_degeneracies(family, radius=1.0)
    real_roots = [r for r in roots if abs(r.g0.imag) < 1e-8]
    assert real_roots, "expected a cross-block level crossing on the real axis"
    for r in real_roots:
        point = classify(family, r, degeneracies=roots)
        assert point.kind == Kind.DP
    imag_roots = [r for r in roots if abs(r.g0.real) < 1e-8 and abs(r.g0.imag) > 1e-8]
    assert imag_roots, "expected in-block branch points on the imaginary axis"
    kinds = {classify(family, r, degeneracies=roots).kind for r in imag_roots}
    assert Kind.EP in kinds


def test_conjugate_points_same_kind(model):
    points = classify_all(model)
    by_g = {complex(np.round(p.g0, 7)): p.kind for p in points}
    for g, kind in by_g.items():
        partner = complex(np.round(np.conj(g), 7))
        assert by_g[partner] == kind


def test_classification_scale_invariance(model, pseudo_dp):
    # Rescaling all level energies by s moves every degeneracy to s*g0 with
    # the kind unchanged.
    s = 2.5
    scaled = model.scaled(s)
    pts = classify_all(scaled, radius=0.5 * s)
    match = min(pts, key=lambda p: abs(p.g0 - s * pseudo_dp))
    assert abs(match.g0 - s * pseudo_dp) <= 1e-7 * s
    assert match.kind == Kind.PSEUDO_DP
    ep_pts = [p for p in pts if p.kind == Kind.EP]
    assert len(ep_pts) == 6


def test_rank_defect_at_pseudo_dp(model, pseudo_dp):
    # Geometric multiplicity 1 with algebraic multiplicity 2: one vanishing
    # singular value of H - E0, not two.
    from pairdeg import hamiltonian_at

    H = hamiltonian_at(model, pseudo_dp)
    E0 = 4 - np.sqrt(2) * 1j
    sv = np.linalg.svd(H - E0 * np.eye(4), compute_uv=False)
    assert sv[-1] <= 1e-7
    assert sv[-2] > 0.1


def test_two_level_truncation_destroys_double_root(model, pseudo_dp):
    # The double root needs all four states: restricted to the merging pair's
    # subspace, the discriminant has only simple roots near g0.
    truncated = pair_truncation_family(model, pseudo_dp)
    assert truncated.dim == 2
    roots = find_degeneracies(truncated, radius=0.5)
    nearby = [r for r in roots if abs(r.g0 - pseudo_dp) < 1e-2]
    assert all(r.multiplicity == 1 for r in nearby)
    assert all(abs(r.g0 - pseudo_dp) > 1e-5 for r in nearby)


def test_sweep_gamma_merge_event(model):
    traj = sweep_gamma(model, -0.52, -0.48, steps=5, classify_points=True)
    assert len(traj.events) >= 1
    ev = min(traj.events, key=lambda e: abs(e.gamma + 0.5))
    assert abs(ev.gamma + 0.5) <= 1e-3
    assert abs(ev.g - (-1j / (4 * np.sqrt(2)))) <= 1e-4


def test_sweep_gamma_on_axis_after_merge(model):
    traj = sweep_gamma(model, -0.52, -0.48, steps=5, classify_points=True)
    g_star = traj.events[0].g
    for gamma, pts in zip(traj.gammas, traj.points):
        if gamma <= -0.5:
            continue
        near = sorted((p for p in pts if p.root.multiplicity == 1
                       and p.g0.imag < -1e-3 and abs(p.g0 - g_star) < 0.08),
                      key=lambda p: abs(p.g0 - g_star))[:2]
        assert len(near) == 2
        assert all(abs(p.g0.real) <= 1e-6 for p in near)
        assert all(p.kind == Kind.EP for p in near)


def test_sweep_gamma_deterministic(model):
    a = sweep_gamma(model, -0.51, -0.49, steps=3, classify_points=False)
    b = sweep_gamma(model, -0.51, -0.49, steps=3, classify_points=False)
    for pa, pb in zip(a.points, b.points):
        assert [p.g0 for p in pa] == [p.g0 for p in pb]
    assert [e.gamma for e in a.events] == [e.gamma for e in b.events]


def test_gamma_trajectory_csv(tmp_path, model):
    traj = sweep_gamma(model, -0.51, -0.49, steps=3, classify_points=True,
                       refine_events=False)
    path = tmp_path / "traj.csv"
    traj.to_csv(path, meta=["version=test"])
    lines = path.read_text().splitlines()
    assert lines[1].split(",") == ["gamma", "g_re", "g_im", "kind", "multiplicity"]
    assert any("PSEUDO_DP" in line for line in lines)
