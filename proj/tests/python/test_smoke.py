import math

import numpy as np
import pytest

import maxmachine as mm

FAST = "max_sweeps = 40\nn_samples = 5\n"


def small_data():
    pairs, types = [], []
    for n in range(12):
        obj = f"o{n}"
        types.append((obj, "red" if n < 6 else "blue"))
        for d in range(5):
            if (n + d) % 3 == 0 or (n < 6 and d < 2):
                pairs.append((obj, f"a{d}"))
    return pairs, types


def test_train_predict_roundtrip(tmp_path):
    pairs, types = small_data()
    model = mm.Model.train(pairs, types, config=FAST, dims=3, seed=1)
    p = model.predict_all()
    assert p.shape == (12, 5)
    assert np.all((p > 0) & (p < 1))
    assert model.codes().shape == (3, 5)
    i, j = model.object_ids.index("o2"), model.attribute_ids.index("a1")
    assert math.isclose(model.predict("o2", "a1"), p[i, j], rel_tol=0, abs_tol=1e-15)

    path = str(tmp_path / "model.json")
    model.save(path)
    again = mm.Model.load(path)
    assert np.array_equal(again.predict_all(), p)


def test_same_seed_same_model():
    pairs, types = small_data()
    a = mm.Model.train(pairs, types, config=FAST, dims=2, seed=4).predict_all()
    b = mm.Model.train(pairs, types, config=FAST, dims=2, seed=4).predict_all()
    assert np.array_equal(a, b)


def test_simulate_and_evaluate():
    pairs, types = mm.simulate("synth.scenario = s2\nsynth.n_objects = 300\n", seed=3)
    assert len(types) == 300
    report = mm.evaluate(pairs, types, config=FAST, dims=8, seed=1)
    assert 0.0 <= report["auc_baseline"] <= 1.0
    assert 0.0 <= report["auc_model"] <= 1.0
    assert report["n_test_cells"] > 0


def test_roc_auc():
    assert mm.roc_auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75


def test_errors():
    pairs, types = small_data()
    with pytest.raises(ValueError):
        mm.Model.train(pairs, types, config="nonsense = 1\n")
    model = mm.Model.train(pairs, types, config=FAST, dims=2)
    with pytest.raises(KeyError):
        model.predict("o0", "missing")
