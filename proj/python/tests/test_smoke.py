import math

import numpy as np
import pytest

import hdsteer


def test_witness_on_isotropic():
    sigma = hdsteer.steer(hdsteer.isotropic(4, 0.8), 4, 4, hdsteer.fourier_mub_measurements(4))
    r = hdsteer.certify(sigma)
    assert r["witness_value"] == pytest.approx(1.7, abs=1e-12)
    assert r["certified_sn"] == 2
    assert hdsteer.witness_bound(4, 4) == pytest.approx(2.0, abs=1e-12)


def test_thresholds():
    assert hdsteer.mub_nsim_threshold(2, 1) == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    rows = hdsteer.region_table(4)
    assert [n for n, _, _ in rows] == [1, 2, 3]
    assert rows[0][1] == pytest.approx(0.2, abs=1e-12)


def test_map_roundtrip():
    rng = np.random.default_rng(3)
    g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    marginal = g @ g.conj().T
    marginal /= np.trace(marginal).real
    mubs = hdsteer.fourier_mub_measurements(3, 0.6)
    sigma = hdsteer.measurements_to_assemblage(mubs, marginal)
    back = hdsteer.assemblage_to_measurements(sigma)
    assert back["full_rank"]
    for x in range(2):
        for a in range(3):
            assert np.allclose(back["measurements"][x][a], mubs[x][a], atol=1e-10)


def test_weights():
    w = hdsteer.incompatibility_weight(hdsteer.fourier_mub_measurements(2, 0.8))
    assert w["value"] == pytest.approx(0.2 * (3 - math.sqrt(2)), abs=1e-6)
    assert w["certified_lower_bound"] == pytest.approx(w["value"], abs=1e-6)
    sharp = hdsteer.incompatibility_weight(hdsteer.fourier_mub_measurements(2))
    assert sharp["value"] == pytest.approx(1.0, abs=1e-6)
    e = hdsteer.entanglement_weight_ppt(hdsteer.isotropic(2, 0.5), 2, 2)
    assert e["value"] == pytest.approx(0.25, abs=1e-6)
    assert e["exact"]


def test_channel_duality():
    kraus = hdsteer.depolarizing_kraus(2, 0.5)
    flat = np.eye(2) / 2
    choi = hdsteer.choi_of(kraus, flat)
    assert np.allclose(choi, hdsteer.isotropic(2, 0.5), atol=1e-12)
    back = hdsteer.state_to_channel(choi, 2, 2, flat)
    probe = np.array([[0.3, 0.1j], [-0.1j, 0.7]])
    apply = lambda ks: sum(k @ probe @ k.conj().T for k in ks)
    assert np.allclose(apply(back), apply(kraus), atol=1e-10)


def test_errors_map_to_exceptions():
    with pytest.raises(hdsteer.ValidationError):
        hdsteer.isotropic(2, 1.5)
    with pytest.raises(hdsteer.Error):
        hdsteer.witness_bound(4, 0)
