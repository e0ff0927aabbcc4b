import io

import numpy as np
import pytest

from smoothgraphon import serialization as ser
from smoothgraphon.exceptions import DataError
from smoothgraphon.inference import SamplerConfig, run_sampler
from smoothgraphon.models import (Hyperparameters, ModelKind, sample_mmsb_prior, sample_prior)
from smoothgraphon.relational import RelationalMatrix


def _round_trip(write, read, obj):
    buf = io.StringIO()
    write(obj, buf)
    return read(io.StringIO(buf.getvalue())), buf.getvalue()


@pytest.mark.parametrize("kind", [ModelKind.SBM, ModelKind.ISG, ModelKind.LFSG])
def test_state_round_trip_is_bit_exact(kind, rng):
    st = sample_prior(Hyperparameters.symmetric(3), 9, rng, kind)
    back, text = _round_trip(ser.write_state, ser.read_state, st)
    for f in ("theta1", "theta2", "B", "u1", "u2", "z1", "z2"):
        a, b = getattr(st, f), getattr(back, f)
        if a is None:
            assert b is None
        else:
            np.testing.assert_array_equal(a, b)
    assert back.lam == st.lam and back.kind is kind
    assert text.startswith(f"kind {kind.value}\nK 3\nn 9\ntheta1 ")


def test_mmsb_state_round_trip(rng):
    st = sample_mmsb_prior(Hyperparameters.symmetric(2), 4, rng)
    back, _ = _round_trip(ser.write_state, ser.read_state, st)
    np.testing.assert_array_equal(back.F, st.F)
    np.testing.assert_array_equal(back.B, st.B)


def test_malformed_state():
    with pytest.raises(DataError):
        ser.read_state(io.StringIO("kind lfsg\nK 2\n"))


@pytest.mark.parametrize("kind", list(ModelKind))
def test_trace_csv_round_trip(kind, rng):
    R = RelationalMatrix.from_dense(rng.random((5, 5)) < 0.5)
    tr = run_sampler(R, Hyperparameters.symmetric(2),
                     SamplerConfig(kind, seed=2, iterations=12, burn_in=2, thin=2))
    back, text = _round_trip(ser.write_trace_csv, ser.read_trace_csv, tr)
    assert text.splitlines()[0] == ("sweep,lambda,theta1_0,theta1_1,theta2_0,theta2_1,"
                                    "B_0_0,B_0_1,B_1_0,B_1_1,loglik")
    np.testing.assert_array_equal(back["sweeps"], tr.sweeps)
    np.testing.assert_array_equal(back["B"], tr.B)
    np.testing.assert_array_equal(back["loglik"], tr.loglik)
    np.testing.assert_array_equal(back["lam"], tr.lam)  # nan for label-free families
    np.testing.assert_array_equal(back["theta1"], tr.theta1)


def test_trace_header_checked():
    with pytest.raises(DataError):
        ser.read_trace_csv(io.StringIO("a,b\n1,2\n"))
    with pytest.raises(DataError):
        ser.read_trace_csv(io.StringIO(""))


def test_key_values_round_trip():
    data = {"auc": 0.1 + 0.2, "n_test": 5, "name": "lfsg"}
    back, text = _round_trip(ser.write_key_values, ser.read_key_values, data)
    assert float(back["auc"]) == 0.1 + 0.2
    assert back["n_test"] == "5" and back["name"] == "lfsg"


def test_grid_csv_round_trip(rng):
    grid = rng.random((4, 6))
    back, _ = _round_trip(ser.write_grid_csv, ser.read_grid_csv, grid)
    np.testing.assert_array_equal(back, grid)


def test_pgm_darker_is_higher():
    buf = io.StringIO()
    ser.write_grid_pgm(np.array([[0.0, 1.0], [0.5, 0.25]]), buf)
    lines = buf.getvalue().splitlines()
    assert lines[:3] == ["P2", "2 2", "255"]
    assert lines[3:] == ["255 0", "128 191"]


def test_label_counts_round_trip(rng):
    R = RelationalMatrix.from_dense(rng.random((5, 5)) < 0.5)
    tr = run_sampler(R, Hyperparameters.symmetric(3),
                     SamplerConfig(ModelKind.LFSG, seed=2, iterations=6, burn_in=2, thin=1))
    (a, b), _ = _round_trip(ser.write_label_counts, ser.read_label_counts, tr)
    np.testing.assert_array_equal(a, tr.label_counts1)
    np.testing.assert_array_equal(b, tr.label_counts2)
