import math

import numpy as np
import pytest

import j3s


def test_spd_helpers():
    values, vectors = j3s.sym_eig(np.diag([1.0, 3.0]))
    assert values.tolist() == [3.0, 1.0]
    assert np.allclose(np.abs(vectors), [[0, 1], [1, 0]])
    log = j3s.spd_logm(np.diag([math.e, 1.0]))
    assert np.allclose(log, np.diag([1.0, 0.0]))
    assert j3s.triu_vec(np.array([[1.0, 2.0], [2.0, 3.0]])).tolist() == [1.0, 2.0, 3.0]


def test_robust_covariance_quadratic():
    c = np.array([[2.0, 0.5], [0.5, 1.0]])
    alpha = 0.3
    lam = np.linalg.eigvalsh(j3s.robust_covariance(c, alpha))
    delta = np.linalg.eigvalsh(c)
    assert np.allclose(alpha * lam**2 + (1 - alpha) * lam, delta, atol=1e-10)


def test_descriptor_and_dictionary():
    rng = np.random.default_rng(0)
    x = np.abs(rng.standard_normal((5, 30)))
    g = j3s.build_descriptor(x)
    assert g["stat_vector"].shape == (21,)
    u = j3s.learn_unitary(x, patch_h=2, patch_w=2, stride=1, iterations=5)
    assert np.allclose(u["D"].T @ u["D"], np.eye(4), atol=1e-10)
    assert all(b <= a + 1e-12 for a, b in zip(u["objective_trace"], u["objective_trace"][1:]))


def test_pca_round_trip():
    rng = np.random.default_rng(1)
    rows = rng.standard_normal((10, 50))
    t = j3s.pca_fit(rows)
    assert t.components.shape == (9, 50)
    reduced = j3s.pca_apply(t, rows)
    assert np.isclose(np.linalg.norm(reduced[0] - reduced[1]), np.linalg.norm(rows[0] - rows[1]))


def test_scalar_solve_matches_closed_form():
    p = j3s.J3SParams()
    p.theta = 0.5
    code = j3s.solve_columns(np.ones(1), np.ones(1), np.ones((1, 1)), np.ones((1, 1)), p)
    expected = (2 - math.sqrt(2) * 1e-3) / 2.004
    assert code.converged
    assert code.alpha[0] == pytest.approx(expected, rel=1e-6)
    assert code.gamma[0] == pytest.approx(expected, rel=1e-6)


def test_predict_orthogonal_classes():
    eye = np.eye(4)
    d = j3s.assemble_dictionaries(eye, eye, [0, 0, 1, 1])
    assert d.class_ranges == {0: (0, 2), 1: (2, 4)}
    p = j3s.J3SParams()
    p.lambda1 = p.lambda2 = p.lambda3 = 1e-6
    report = j3s.predict(d, eye[:, 0], eye[:, 0], p)
    assert report["predicted"] == 0
    assert report["class_errors"][0] < 1e-6


def test_fmx1_bytes(tmp_path):
    m = np.arange(6, dtype=float).reshape(2, 3)
    blob = j3s.encode_fmx1(m)
    assert blob[:4] == b"FMX1"
    assert len(blob) == 12 + 6 * 8
    assert np.array_equal(j3s.decode_fmx1(blob), m)
    j3s.write_fmx1(tmp_path / "m.fmx", m)
    assert np.array_equal(j3s.read_matrix(tmp_path / "m.fmx"), m)
    with pytest.raises(j3s.J3SError) as info:
        j3s.decode_fmx1(blob[:-3])
    assert info.value.code == "FormatError"


def test_synthetic_benchmark(tmp_path):
    manifest = j3s.generate_synthetic(tmp_path / "data", classes=3, dim=6, set_size=20, samples_per_class=6)
    result = j3s.run_benchmark(manifest, repeats=2, hellinger=False, patch=4, stride=2, out_dir=tmp_path / "out")
    assert len(result["accuracy"]) == 2
    assert result["mean_accuracy"] >= 0.9
    assert len(result["rows"]) == 2 * 9
    assert (tmp_path / "out" / "predictions.csv").read_text().startswith("repeat,sample_id,true_label,predicted")
