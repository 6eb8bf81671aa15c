import struct

import numpy as np
import pytest

from core.errors import SymbolError
from core.quantize import op_magnetic, op_weyl
from core.serialization import (
    load_operator,
    load_symbol,
    read_sidecar,
    save_operator,
    save_symbol,
    symbol_header_json,
    write_sidecar,
)
from core.symbols import builtin, sample


def test_symbol_file_layout(tmp_path, grid16):
    f = sample(builtin("gaussian", {"xi0": [0.5, 0.0]}), grid16)
    path = save_symbol(f, str(tmp_path / "f.mwc1"))
    data = open(path, "rb").read()
    assert data[:4] == b"MWC1"
    assert struct.unpack_from("<IId", data, 4) == (2, 16, 8.0)
    assert len(data) == 20 + 16 * grid16.size**2
    loaded = load_symbol(path)
    assert loaded.grid == grid16
    assert np.array_equal(loaded.values, f.values)


def test_operator_keeps_scheme(tmp_path, grid16, constant_potential):
    M = op_magnetic(sample(builtin("kinetic"), grid16), constant_potential)
    path = save_operator(M, str(tmp_path / "ops" / "m.mwo"))
    assert open(path, "rb").read()[20] == 2
    loaded = load_operator(path, potential=constant_potential.label)
    assert loaded.scheme == "magnetic"
    assert loaded.potential == constant_potential.label
    assert np.array_equal(loaded.entries, M.entries)

    weyl = load_operator(save_operator(op_weyl(sample(builtin("one"), grid16)), str(tmp_path / "w.mwo")))
    assert weyl.scheme == "weyl"
    assert weyl.potential == "zero"


def test_bad_magic_is_rejected(tmp_path, grid16):
    path = save_symbol(sample(builtin("one"), grid16), str(tmp_path / "f.mwc1"))
    with pytest.raises(SymbolError):
        load_operator(path)


def test_truncated_file_is_rejected(tmp_path, grid16):
    path = tmp_path / "short.mwc1"
    path.write_bytes(struct.pack("<4sIId", b"MWC1", 2, 16, 8.0) + b"\x00" * 32)
    with pytest.raises(SymbolError):
        load_symbol(str(path))


def test_sidecar_carries_sign_and_version(tmp_path, grid16):
    f = sample(builtin("bracket", {"m": 2.0}), grid16)
    path = write_sidecar(str(tmp_path / "f.json"), {"header": symbol_header_json(f), "value": 1 + 2j, "arr": np.arange(3)})
    document = read_sidecar(path)
    assert document["sigma"] == 1
    assert document["version"] == "1.0.0"
    assert document["header"]["class_meta"] == [2.0, 1.0, 0.0]
    assert document["value"] == {"re": 1.0, "im": 2.0}
    assert document["arr"] == [0, 1, 2]
