"""State container, fixtures, party permutations, sampler, and file round-trips."""

import json

import numpy as np
import pytest
from scipy import stats as sps

from coassist import (
    FIXTURE_NAMES,
    FourQubitPure,
    coeff_matrix,
    fixture,
    load_state,
    pair_permutation,
    parse_state,
    permute_parties,
    q_matrix,
    random_state,
    rho_ab,
    rho_cd,
    save_state,
)


def basis_state(a, b, c, d):
    amps = np.zeros(16, dtype=complex)
    amps[8 * a + 4 * b + 2 * c + d] = 1.0
    return FourQubitPure(amps)


def test_container_validates_norm_and_shape():
    with pytest.raises(ValueError):
        FourQubitPure(np.ones(16))
    with pytest.raises(ValueError):
        FourQubitPure(np.zeros(16))
    with pytest.raises(ValueError):
        FourQubitPure(np.ones(8) / np.sqrt(8))
    amps = np.zeros(16, dtype=complex)
    amps[0] = 1.0
    assert FourQubitPure(amps).amplitudes.shape == (16,)


def test_coeff_matrix_layout():
    # rows indexed by the keeper pair, columns by the assistants
    x = coeff_matrix(basis_state(0, 1, 1, 0))
    assert x[1, 2] == 1.0 and np.count_nonzero(x) == 1
    x = coeff_matrix(basis_state(1, 1, 0, 1))
    assert x[3, 1] == 1.0 and np.count_nonzero(x) == 1


def test_q_matrix_ghz_closed_form():
    q = q_matrix(fixture("ghz"))
    expect = np.zeros((4, 4), dtype=complex)
    expect[0, 3] = expect[3, 0] = -0.5
    assert np.allclose(q, expect, atol=1e-12)
    s = np.linalg.svd(q, compute_uv=False)
    assert np.allclose(s, [0.5, 0.5, 0.0, 0.0], atol=1e-12)


def test_q_matrix_symmetric():
    for i in range(10):
        q = q_matrix(random_state(21, i))
        assert np.allclose(q, q.T, atol=1e-12)


def test_reduced_states():
    for i in range(5):
        psi = random_state(22, i)
        for rho in (rho_ab(psi), rho_cd(psi)):
            assert rho.shape == (4, 4)
            assert np.allclose(rho, rho.conj().T, atol=1e-12)
            assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
            assert np.all(np.linalg.eigvalsh(rho) > -1e-12)
    ghz = fixture("ghz")
    assert np.allclose(rho_ab(ghz), np.diag([0.5, 0, 0, 0.5]), atol=1e-12)


def test_permute_parties_semantics():
    # new party k holds what old party perm[k] held
    psi = basis_state(0, 1, 0, 0)
    assert np.allclose(permute_parties(psi, "BACD").amplitudes, basis_state(1, 0, 0, 0).amplitudes)
    psi = basis_state(0, 1, 1, 0)
    assert np.allclose(permute_parties(psi, "ACBD").amplitudes, basis_state(0, 1, 1, 0).amplitudes)
    assert np.allclose(permute_parties(psi, "ABDC").amplitudes, basis_state(0, 1, 0, 1).amplitudes)
    rng_amps = random_state(23).amplitudes
    psi = FourQubitPure(rng_amps)
    assert np.allclose(permute_parties(psi, "ABCD").amplitudes, rng_amps)
    # involution: applying a transposition twice restores the state
    assert np.allclose(
        permute_parties(permute_parties(psi, "DBCA"), "DBCA").amplitudes, rng_amps
    )


def test_permute_parties_rejects_bad_perm():
    psi = fixture("ghz")
    for perm in ("ABCE", "AABC", "ABC", "ABCDD"):
        with pytest.raises(ValueError):
            permute_parties(psi, perm)
    # case-insensitive on valid permutations
    assert np.allclose(permute_parties(psi, "abcd").amplitudes, psi.amplitudes)


def test_pair_permutation():
    assert pair_permutation("AB") == "ABCD"
    assert pair_permutation("CD") == "CDAB"
    assert pair_permutation("AC") == "ACBD"
    assert pair_permutation("BD") == "BDAC"
    with pytest.raises(ValueError):
        pair_permutation("AA")
    with pytest.raises(ValueError):
        pair_permutation("XY")


def test_fixture_names_and_norms():
    assert set(FIXTURE_NAMES) == {"ghz", "swap", "comm75", "povm31"}
    for name in FIXTURE_NAMES:
        psi = fixture(name)
        assert np.linalg.norm(psi.amplitudes) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        fixture("nope")


def test_ghz_fixture_amplitudes():
    amps = fixture("ghz").amplitudes
    assert amps[0] == pytest.approx(1 / np.sqrt(2), abs=1e-15)
    assert amps[15] == pytest.approx(1 / np.sqrt(2), abs=1e-15)
    assert np.count_nonzero(amps) == 2


def test_swap_fixture_is_two_bell_pairs():
    # A Bell-paired with C and B with D: tracing out CD leaves AB maximally mixed
    psi = fixture("swap")
    assert np.allclose(rho_ab(psi), np.eye(4) / 4, atol=1e-12)


def test_renormalized_fixture_labels():
    assert fixture("comm75").label == "comm75 (renormalized)"
    assert "renormalized" in fixture("povm31").label


def test_random_state_determinism_and_stream_split():
    a = random_state(123, 7).amplitudes
    b = random_state(123, 7).amplitudes
    assert np.array_equal(a, b)
    # index streams are independent blocks: order of generation cannot matter
    seq = [random_state(9, i).amplitudes for i in range(4)]
    assert np.array_equal(seq[2], random_state(9, 2).amplitudes)
    assert not np.allclose(seq[0], seq[1])
    assert not np.allclose(random_state(1).amplitudes, random_state(2).amplitudes)


def test_random_state_snapshot():
    amps = random_state(123, 5).amplitudes
    expect = [
        0.07816476585759002 + 0.1293730603508463j,
        -0.02314225302995772 - 0.04976346356890324j,
        -0.10074639848619454 + 0.3222205854577813j,
    ]
    assert np.allclose(amps[:3], expect, atol=1e-15)


def test_random_state_marginal_law():
    # each amplitude is a real gaussian under a uniform phase, so after
    # normalization |c_1|^2 follows Beta(1/2, 15/2); the mean of |c_i|^2 is 1/16
    n = 4000
    w = np.array([np.abs(random_state(777, i).amplitudes[1]) ** 2 for i in range(n)])
    # std of the mean is ~1.3e-3 at this n; allow ~4.5 sigma
    assert w.mean() == pytest.approx(1 / 16, abs=6e-3)
    _, p = sps.kstest(w, sps.beta(0.5, 7.5).cdf)
    assert p > 1e-4
    # and decisively not the flat-simplex law of a rotation-invariant ensemble
    _, p_flat = sps.kstest(w, sps.beta(1.0, 15.0).cdf)
    assert p_flat < 1e-12


def test_save_load_roundtrip(tmp_path):
    psi = random_state(31, 4)
    path = tmp_path / "state.json"
    save_state(path, psi)
    back = load_state(path)
    assert np.allclose(back.amplitudes, psi.amplitudes, atol=1e-15)
    labelled = fixture("comm75")
    save_state(path, labelled)
    assert load_state(path).label == labelled.label


def test_parse_state_rejections():
    good = {"amplitudes": [[1.0, 0.0]] + [[0.0, 0.0]] * 15}
    assert np.isclose(parse_state(good).amplitudes[0], 1.0)
    with pytest.raises(ValueError):
        parse_state([])
    with pytest.raises(ValueError):
        parse_state({"amplitudes": [[1.0, 0.0]] * 3})
    with pytest.raises(ValueError):
        parse_state({"amplitudes": [[1.0]] + [[0.0, 0.0]] * 15})
    with pytest.raises(ValueError):
        parse_state({"amplitudes": [[2.0, 0.0]] + [[0.0, 0.0]] * 15})
    with pytest.raises(ValueError):
        parse_state({"amplitudes": [[float("nan"), 0.0]] + [[0.0, 0.0]] * 15})
    with pytest.raises(ValueError):
        parse_state({"amplitudes": good["amplitudes"], "label": 3})


def test_load_state_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ValueError):
        load_state(bad)
    with pytest.raises(OSError):
        load_state(tmp_path / "missing.json")


def test_saved_file_format(tmp_path):
    path = tmp_path / "ghz.json"
    save_state(path, fixture("ghz"))
    obj = json.loads(path.read_text(encoding="utf-8"))
    assert len(obj["amplitudes"]) == 16
    assert obj["amplitudes"][0] == [1 / np.sqrt(2), 0.0]
