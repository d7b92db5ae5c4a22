import numpy as np
import pytest

from pairdeg import (LoopError, LoopSpec, find_degeneracies, restore_count,
                     trace_loop)


@pytest.fixture(scope="module")
def roots(model):
    return find_degeneracies(model)


@pytest.fixture(scope="module")
def pdp_root(model, roots, pseudo_dp):
    return min(roots, key=lambda r: abs(r.g0 - pseudo_dp))


def test_loopspec_validation():
    with pytest.raises(LoopError):
        LoopSpec(0j, -0.1)
    with pytest.raises(LoopError):
        LoopSpec(0j, 0.1, steps=16)
    with pytest.raises(LoopError):
        LoopSpec(0j, 0.1, loops=0)
    with pytest.raises(LoopError):
        LoopSpec(0j, 0.1, orientation=2)


def test_loop_enclosing_two_roots_rejected(model, roots):
    # A large loop around the origin catches several degeneracies.
    with pytest.raises(LoopError):
        trace_loop(model, LoopSpec(0j, 0.2, steps=64), degeneracies=roots)


def test_loop_grazing_a_root_rejected(model, roots, pdp_root):
    graze = LoopSpec(pdp_root.g0 + 0.0101, 0.01, steps=64)
    with pytest.raises(LoopError):
        trace_loop(model, graze, degeneracies=roots)


def test_pseudo_dp_loop_phases(model, roots, pdp_root):
    trace = trace_loop(model, LoopSpec(pdp_root.g0, 0.01, steps=256),
                       degeneracies=roots)
    assert trace.loop_permutations[0] == (0, 1, 2, 3)
    raw = trace.raw_loop_theta[0].real
    assert abs(abs(raw[1]) - np.pi) <= 0.05
    assert abs(abs(raw[2]) - np.pi) <= 0.05
    assert abs(raw[0]) <= 0.1 and abs(raw[3]) <= 0.1
    # snapped holonomy is an exact multiple of pi
    snapped = trace.loop_re_theta[0]
    assert snapped[1] == pytest.approx(-np.pi) or snapped[1] == pytest.approx(np.pi)
    # sum of the loop phases is 2*pi times an integer (within tolerance)
    total = np.sum(snapped)
    assert abs(total - 2 * np.pi * np.round(total / (2 * np.pi))) <= 0.05
    assert np.round(total / (2 * np.pi)) != 0


def test_ep_loop_exchanges_merging_pair(model_049):
    roots = find_degeneracies(model_049)
    ep = min(roots, key=lambda r: abs(r.g0 - (-0.207687j)))
    trace = trace_loop(model_049, LoopSpec(ep.g0, 0.01, steps=256),
                       degeneracies=roots)
    assert trace.loop_permutations[0] == (0, 2, 1, 3)


def test_far_loop_trivial(model, roots):
    trace = trace_loop(model, LoopSpec(0.3 + 0.3j, 0.01, steps=64),
                       degeneracies=roots)
    assert trace.loop_permutations[0] == (0, 1, 2, 3)
    assert np.max(np.abs(trace.raw_loop_theta[0].real)) <= 0.01


def test_restore_counts(model, model_049, roots, pdp_root):
    res = restore_count(model, LoopSpec(pdp_root.g0, 0.01, steps=256),
                        max_loops=4, degeneracies=roots)
    assert (res.eigenvalue_period, res.phase_period) == (1, 2)
    roots2 = find_degeneracies(model_049)
    ep = min(roots2, key=lambda r: abs(r.g0 - (-0.207687j)))
    res2 = restore_count(model_049, LoopSpec(ep.g0, 0.01, steps=256),
                         max_loops=6, degeneracies=roots2)
    assert (res2.eigenvalue_period, res2.phase_period) == (2, 4)
    assert res2.restored


def test_restore_count_trivial_loop(model, roots):
    res = restore_count(model, LoopSpec(0.3 + 0.3j, 0.01, steps=64),
                        max_loops=2, degeneracies=roots)
    assert (res.eigenvalue_period, res.phase_period) == (1, 1)


def test_not_restored_reported(model_049):
    roots2 = find_degeneracies(model_049)
    ep = min(roots2, key=lambda r: abs(r.g0 - (-0.207687j)))
    res = restore_count(model_049, LoopSpec(ep.g0, 0.01, steps=128),
                        max_loops=1, degeneracies=roots2)
    assert res.eigenvalue_period is None
    assert not res.restored


def test_orientation_reversal(model, roots, pdp_root):
    fwd = trace_loop(model, LoopSpec(pdp_root.g0, 0.01, steps=128),
                     degeneracies=roots)
    rev = trace_loop(model, LoopSpec(pdp_root.g0, 0.01, steps=128,
                                     orientation=-1), degeneracies=roots)
    np.testing.assert_allclose(fwd.raw_loop_theta[0].real,
                               -rev.raw_loop_theta[0].real, atol=0.02)
    assert fwd.loop_permutations[0] == rev.loop_permutations[0] == (0, 1, 2, 3)


def test_ep_permutation_powers(model_049):
    roots2 = find_degeneracies(model_049)
    ep = min(roots2, key=lambda r: abs(r.g0 - (-0.207687j)))
    trace = trace_loop(model_049, LoopSpec(ep.g0, 0.01, steps=128, loops=4),
                       degeneracies=roots2)
    single = trace.loop_permutations[0]

    def power(p, k):
        out = list(range(len(p)))
        for _ in range(k):
            out = [p[i] for i in out]
        return tuple(out)

    for k in range(1, 5):
        assert trace.loop_permutations[k - 1] == power(single, k)


def test_step_doubling_convergence(model, roots, pdp_root):
    coarse = trace_loop(model, LoopSpec(pdp_root.g0, 0.01, steps=128),
                        degeneracies=roots)
    fine = trace_loop(model, LoopSpec(pdp_root.g0, 0.01, steps=256),
                      degeneracies=roots)
    delta = np.abs(coarse.raw_loop_theta[0] - fine.raw_loop_theta[0])
    assert np.max(delta) <= 1e-3


def test_loop_trace_csv_and_summary(tmp_path, model, roots, pdp_root):
    trace = trace_loop(model, LoopSpec(pdp_root.g0, 0.01, steps=64),
                       degeneracies=roots)
    path = tmp_path / "phases.csv"
    trace.to_csv(path, meta=["version=test"])
    lines = path.read_text().splitlines()
    header = lines[1].split(",")
    assert header[0] == "phi"
    assert "theta1_re" in header and "E4_im" in header
    assert len(lines) == 2 + 65
    summary = trace.summary()
    assert summary["permutations"] == ["identity"]
    assert len(summary["loop_re_theta"][0]) == 4
