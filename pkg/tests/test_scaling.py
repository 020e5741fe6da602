import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from splitgap.errors import DegenerateFit, InvalidParams
from splitgap.scaling import (
    ScalingDataset,
    classify_scaling,
    fit_curve_csv,
    fit_stretched,
    local_slopes,
    synthetic_bias,
)

# pure-power fit bias of -log delta = 2 L^0.75 + L^0.5, tabulated once
FROZEN_BIAS = {32: -0.049, 64: -0.0443, 128: -0.0396, 256: -0.035, 1024: -0.0265}


def synth(L, C=1.3, p=0.7, b=None):
    L = np.asarray(L, dtype=float)
    y = C * L**p + (0.0 if b is None else b * np.log(L))
    return ScalingDataset(L, -y, np.zeros_like(L))


class TestDataset:
    def test_sorting(self):
        d = ScalingDataset.from_points([(16, -3.0), (8, -2.0, 0.1)])
        assert d.L.tolist() == [8, 16] and d.err.tolist() == [0.1, 0.0]

    @pytest.mark.parametrize(
        "args",
        [([8, 8], [-1, -2], [0, 0]), ([8, 16], [-1, math.nan], [0, 0]), ([8, 16], [-1, -2], [-1, 0]), ([8], [-1, -2], [0, 0])],
    )
    def test_rejects(self, args):
        with pytest.raises(InvalidParams):
            ScalingDataset(*args)

    def test_from_records(self):
        recs = [
            {"L": 8, "delta": 1e-3, "err_bound": 1e-15, "model": "chain"},
            {"L": 12, "log_delta": -9.0, "log_delta_err": 0.01},
        ]
        d = ScalingDataset.from_records(recs)
        assert d.source == "chain"
        assert d.log_delta[0] == pytest.approx(math.log(1e-3))
        assert d.err.tolist() == pytest.approx([1e-12, 0.01])
        with pytest.raises(InvalidParams):
            ScalingDataset.from_records([{"L": 8, "delta": 0.0}])


class TestFit:
    def test_exact_power(self):
        rep = fit_stretched(synth([8, 16, 32, 64]), model="power")
        assert rep.p == pytest.approx(0.7, abs=1e-10)
        assert rep.C == pytest.approx(1.3, rel=1e-10)
        assert rep.residual_rms < 1e-10
        assert rep.b is None

    def test_exact_power_log(self):
        rep = fit_stretched(synth([8, 16, 32, 64, 128], b=-0.4), model="power+log")
        assert (rep.C, rep.p, rep.b) == pytest.approx((1.3, 0.7, -0.4), rel=1e-8)

    def test_auto_model(self):
        assert fit_stretched(synth([8, 16, 32])).model == "power"
        assert fit_stretched(synth([8, 16, 32, 64])).model == "power+log"
        assert fit_stretched(synth([8, 16, 32, 64, 128])).model == "power+log"

    def test_degenerate(self):
        with pytest.raises(DegenerateFit):
            fit_stretched(synth([8, 16]))
        with pytest.raises(DegenerateFit):
            fit_stretched(synth([8, 16, 32]), model="power+log")
        with pytest.raises(InvalidParams):
            fit_stretched(synth([8, 16, 32]), model="cubic")

    def test_weights_follow_errors(self):
        L = np.array([8.0, 16, 32, 64, 128])
        y = -(L**0.8)
        y[-1] -= 5.0
        tight = ScalingDataset(L, y, [1e-3, 1e-3, 1e-3, 1e-3, 10.0])
        loose = ScalingDataset(L, y, [10.0, 10.0, 10.0, 10.0, 1e-3])
        assert abs(fit_stretched(tight, "power").p - 0.8) < abs(fit_stretched(loose, "power").p - 0.8)

    def test_prefactor_leaves_p_within_bias(self):
        L = np.array([8.0, 16, 32, 64])
        y = -(2 * L**0.75 + L**0.5) + math.log(7.0)
        rep = fit_stretched(ScalingDataset(L, y, np.zeros(4)), model="power")
        assert abs(rep.p - 0.75) < 0.1

    def test_local_slopes(self):
        s = local_slopes(synth([8, 16, 32]))
        assert s == pytest.approx([0.7, 0.7], abs=1e-12)
        with pytest.raises(InvalidParams):
            local_slopes(ScalingDataset([8, 16], [-1.0, 0.5], [0, 0]))

    def test_record_and_predict(self):
        rep = fit_stretched(synth([8, 16, 32, 64]), model="power")
        assert rep.to_record()["kind"] == "fit"
        assert rep.predict(8.0) == pytest.approx(-1.3 * 8**0.7)


class TestBias:
    @pytest.mark.parametrize("L_max, expect", sorted(FROZEN_BIAS.items()))
    def test_frozen_bias(self, L_max, expect):
        L = [8 * 2**k for k in range(int(math.log2(L_max // 8)) + 1)]
        assert synthetic_bias(L)["bias"] == pytest.approx(expect, abs=5e-4)

    def test_bias_magnitude_decreases_with_range(self):
        biases = [abs(synthetic_bias([8 * 2**k for k in range(n)])["bias"]) for n in (3, 4, 5, 6, 8)]
        assert all(b < a for a, b in zip(biases, biases[1:]))
        assert max(biases) < 0.06


class TestClassify:
    def test_nearest(self):
        rep = fit_stretched(synth([8, 16, 32, 64], p=0.78), "power")
        assert classify_scaling(rep, alpha=0.5)["class"] == "stretched"
        rep = fit_stretched(synth([8, 16, 32, 64], p=0.93), "power")
        assert classify_scaling(rep, alpha=0.5)["class"] == "exponential"
        with pytest.raises(InvalidParams):
            classify_scaling(rep)

    def test_slope_rule(self):
        rep = fit_stretched(synth([8, 16, 32, 64], p=0.97), "power")
        assert classify_scaling(rep, rule="slope")["class"] == "exponential"
        with pytest.raises(InvalidParams):
            classify_scaling(rep, rule="vote")


def test_curve_csv():
    d = synth([8, 16, 32])
    text = fit_curve_csv(d, fit_stretched(d, "power"))
    lines = text.split("\r\n")
    assert lines[0] == "L,minus_log_delta,fit"
    assert lines[1].startswith("8,")
    assert text.endswith("\r\n")


@settings(max_examples=30, deadline=None)
@given(C=st.floats(0.2, 5.0), p=st.floats(0.3, 1.2))
def test_recovers_exact_power_property(C, p):
    rep = fit_stretched(synth([8, 12, 16, 24, 32], C=C, p=p), "power")
    assert rep.p == pytest.approx(p, abs=1e-7)
