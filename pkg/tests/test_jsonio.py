from fractions import Fraction as F

import numpy as np
import pytest

from conftest import (BIN, BIN_B, rand_denom_weight, rand_hom,
                      rand_joint_weight, rand_labeling)
from fgel import MarkovMeasure, SBMSpec, empirical_weight
from fgel.errors import ValidationError
from fgel.jsonio import (hom_from_json, hom_to_json, labeling_from_json,
                         labeling_to_json, measure_from_json, measure_to_json,
                         sbm_spec_from_json, sbm_spec_to_json, weight_from_json,
                         weight_to_json)


def test_weight_roundtrip_bit_exact():
    rng = np.random.default_rng(0)
    for _ in range(20):
        w = rand_denom_weight(rng, int(rng.integers(2, 5)),
                              int(rng.integers(1, 4)), int(rng.integers(2, 30)))
        data = weight_to_json(w)
        back = weight_from_json(data)
        assert back == w
        assert weight_to_json(back) == data


def test_weight_json_two_cycle_format():
    data = {"rank": 1, "alphabet": ["0", "1"],
            "edges": [[["0/1", "1/2"], ["1/2", "0/1"]]], "n": 2}
    w = weight_from_json(data)
    assert w.n == 2
    assert w.weight.vertex == (F(1, 2), F(1, 2))


def test_product_alphabet_structure_recovered():
    rng = np.random.default_rng(1)
    w = rand_joint_weight(rng, 2)
    back = weight_from_json(weight_to_json(w))
    assert back.alphabet.kind == "product"
    from fgel import project_b
    project_b(back)  # requires recovered factors


def test_ball_alphabet_structure_recovered():
    rng = np.random.default_rng(2)
    sigma = rand_hom(rng, 6, 1)
    y = rand_labeling(rng, BIN_B, 6)
    w = empirical_weight(sigma, y, 1)
    back = weight_from_json(weight_to_json(w))
    assert back.alphabet.kind == "ball"
    assert back.alphabet.ball.radius == 1
    assert back == w


def test_weight_json_malformed():
    with pytest.raises(ValidationError):
        weight_from_json({"rank": 1, "alphabet": ["0", "1"]})
    with pytest.raises(ValidationError):
        weight_from_json({"rank": 1, "alphabet": ["0", "1"],
                          "edges": [[[0.5, "0/1"], ["0/1", "1/2"]]]})


def test_hom_roundtrip_one_based():
    rng = np.random.default_rng(3)
    sigma = rand_hom(rng, 7, 2)
    data = hom_to_json(sigma)
    assert min(min(p) for p in data["perms"]) == 1
    assert hom_from_json(data) == sigma


def test_hom_rejects_zero_based_json():
    with pytest.raises(ValidationError):
        hom_from_json({"n": 3, "perms": [[0, 1, 2]]})


def test_labeling_roundtrip():
    rng = np.random.default_rng(4)
    x = rand_labeling(rng, BIN, 9)
    assert labeling_from_json(labeling_to_json(x), BIN) == x


def test_measure_roundtrip():
    rng = np.random.default_rng(5)
    m = MarkovMeasure(rand_denom_weight(rng, 2, 2, 16).weight)
    data = measure_to_json(m)
    assert data["type"] == "markov"
    assert measure_from_json(data).weight == m.weight


def test_sbm_spec_roundtrip():
    rng = np.random.default_rng(6)
    sigma0 = rand_hom(rng, 5, 1)
    y0 = rand_labeling(rng, BIN_B, 5)
    target = empirical_weight(sigma0, y0, 1)
    spec = SBMSpec(y0, 1, target, sigma0)
    back = sbm_spec_from_json(sbm_spec_to_json(spec))
    assert back.k == 1
    assert back.target == target
    assert back.y == y0
    assert back.sigma0 == sigma0
