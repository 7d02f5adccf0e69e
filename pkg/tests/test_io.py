import io as _io
import json
import math

import numpy as np
import pytest

from walkline import io, presets, rw_to_sos
from walkline.core import SosModel, WalkKernel


def test_kernel_json_roundtrip():
    k = rw_to_sos.metropolis_full_kernel(rw_to_sos.log_potential(1.3, 15), 0.3)
    back = io.model_from_json(io.model_to_json(k))
    assert isinstance(back, WalkKernel)
    assert np.array_equal(back.P, k.P)
    assert (back.structure, back.wall_mode) == (k.structure, k.wall_mode)


@pytest.mark.parametrize("model", [
    rw_to_sos.sos_from_phi(rw_to_sos.power_tail_phi(1.2, 0.5, 20)),
    rw_to_sos.sos_from_general(rw_to_sos.geometric_base(1.0), rw_to_sos.log_potential(2.0, 12)),
    presets.double_step_model(-1.0, 0.3, 9),
])
def test_sos_json_roundtrip(model):
    text = io.model_to_json(model)
    d = json.loads(text)
    assert d["kind"] == "sos" and len(d["W_offdiag"]) == model.max_step
    back = io.model_from_json(text)
    assert isinstance(back, SosModel)
    assert np.array_equal(back.V, model.V)
    assert np.array_equal(back.W, model.W)
    assert io.model_to_json(back) == text


def test_forbidden_written_as_null():
    d = io.sos_to_dict(presets.square_well_model(-1.0, 4))
    assert d["W_diag"] == [None] * 5
    assert d["W_offdiag"][0] == [math.log(2)] * 4


def test_bad_band_length():
    d = io.sos_to_dict(presets.square_well_model(-1.0, 4))
    d["W_offdiag"][0] = d["W_offdiag"][0][:-1]
    with pytest.raises(ValueError):
        io.sos_from_dict(d)


def test_paths_csv_roundtrip():
    paths = np.array([[0, 1, 2, 1, 0], [0, 1, 0, 1, 0]])
    buf = _io.StringIO()
    io.write_paths_csv(buf, paths)
    assert buf.getvalue().splitlines()[:3] == ["n,x_n,sample_id", "0,0,0", "1,1,0"]
    buf.seek(0)
    assert np.array_equal(io.read_paths_csv(buf), paths)


def test_fixed_float_format():
    buf = _io.StringIO()
    io.write_csv(buf, ["a", "b"], [[1, 0.1], [2, 1 / 3]])
    assert buf.getvalue() == "a,b\n1,0.10000000000000001\n2,0.33333333333333331\n"
    assert float("0.33333333333333331") == 1 / 3
