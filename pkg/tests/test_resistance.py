"""Conductivity-matrix and wash/dry resistance-change tests."""

import numpy as np
import pytest

from knitpad.mesh import CornerId, MeshConfig
from knitpad.resistance import (
    PAIR_KEYS,
    ConductivityMatrix,
    PairwiseResistance,
    WashDryRecord,
    conductivity_matrix,
    pair_key,
    pairwise_from_mesh,
    percent_delta_r,
)


def uniform_pairs(r=1.0):
    return PairwiseResistance(values={k: r for k in PAIR_KEYS})


def test_pair_key_normalization():
    assert pair_key(CornerId.B, CornerId.A) == "AB"
    assert pair_key("D", "C") == "CD"
    with pytest.raises(ValueError):
        pair_key("A", "A")
    with pytest.raises(ValueError):
        pair_key("A", "E")


def test_pairwise_validation():
    with pytest.raises(ValueError):
        PairwiseResistance(values={"AB": 1.0})
    with pytest.raises(ValueError):
        PairwiseResistance(values={k: (0.0 if k == "BD" else 1.0) for k in PAIR_KEYS})
    p = PairwiseResistance(values={("B", "A") if k == "AB" else k: 2.0 for k in PAIR_KEYS})
    assert p["AB"] == 2.0
    assert p[(CornerId.B, CornerId.A)] == 2.0


def test_conductivity_uniform():
    m = conductivity_matrix(uniform_pairs(1.0))
    mat = m.matrix
    assert np.allclose(mat[~np.eye(4, dtype=bool)], 1.0)
    assert np.allclose(np.diag(mat), -3.0)
    assert np.allclose(mat.sum(axis=1), 0.0)


def test_conductivity_properties_random():
    rng = np.random.default_rng(31)
    for _ in range(20):
        pairs = PairwiseResistance(
            values={k: float(rng.uniform(10, 5000)) for k in PAIR_KEYS}
        )
        m = conductivity_matrix(pairs).matrix
        assert np.allclose(m, m.T)
        assert np.all(m[~np.eye(4, dtype=bool)] >= 0)
        assert np.allclose(m.sum(axis=1), 0.0, atol=1e-12)
        assert m[0, 1] == 1.0 / pairs["AB"]


def test_conductivity_matrix_type_rejects_asymmetry():
    bad = np.zeros((4, 4))
    bad[0, 1] = 1.0
    with pytest.raises(ValueError):
        ConductivityMatrix(matrix=bad)


def test_mesh_pairwise_symmetry_group():
    # square fabric: the four adjacent pairs match, the two diagonals match
    pairs = pairwise_from_mesh(MeshConfig(rows=9, cols=9, sheet_resistance=4000.0))
    adj = [pairs[k] for k in ("AB", "AC", "BD", "CD")]
    diag = [pairs[k] for k in ("AD", "BC")]
    assert max(adj) - min(adj) < 1e-6 * adj[0]
    assert abs(diag[0] - diag[1]) < 1e-6 * diag[0]
    assert diag[0] > adj[0]
    m = conductivity_matrix(pairs).matrix
    # corner relabeling A<->D, B<->C leaves the matrix unchanged
    perm = [3, 2, 1, 0]
    assert np.allclose(m, m[np.ix_(perm, perm)], rtol=1e-9)


def test_percent_delta_r_simple():
    base = uniform_pairs(100.0)
    after = PairwiseResistance(values={k: 108.1 for k in PAIR_KEYS})
    rec = WashDryRecord(baseline=base, after_cycle=(after,))
    per_pair, cum = percent_delta_r(rec, 1)
    for k in PAIR_KEYS:
        assert abs(per_pair[k] - 0.081) < 1e-12
    assert abs(cum - 0.081) < 1e-12


def test_percent_delta_r_reported_pair_value():
    base = uniform_pairs(250.0)
    vals = {k: 250.0 for k in PAIR_KEYS}
    vals["AC"] = 250.0 * 1.2809
    rec = WashDryRecord(baseline=base, after_cycle=(PairwiseResistance(values=vals),))
    per_pair, _ = percent_delta_r(rec, 1)
    assert abs(per_pair["AC"] - 0.2809) < 1e-12


def test_percent_delta_r_identity_and_mean():
    base = uniform_pairs(50.0)
    rec = WashDryRecord(baseline=base, after_cycle=(uniform_pairs(50.0),))
    per_pair, cum = percent_delta_r(rec, 1)
    assert all(v == 0.0 for v in per_pair.values())
    assert cum == 0.0

    deltas = dict(zip(PAIR_KEYS, (0.01, 0.02, 0.03, 0.04, 0.05, 0.06)))
    after = PairwiseResistance(
        values={k: 50.0 * (1 + d) for k, d in deltas.items()}
    )
    rec2 = WashDryRecord(baseline=base, after_cycle=(after,))
    per_pair2, cum2 = percent_delta_r(rec2, 1)
    for k in PAIR_KEYS:
        assert abs(per_pair2[k] - deltas[k]) < 1e-12
    assert abs(cum2 - 0.035) < 1e-12


def test_percent_delta_r_cycle_bounds():
    rec = WashDryRecord(baseline=uniform_pairs(), after_cycle=(uniform_pairs(),))
    with pytest.raises(ValueError):
        percent_delta_r(rec, 0)
    with pytest.raises(ValueError):
        percent_delta_r(rec, 2)
