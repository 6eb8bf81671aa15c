"""
Zapis i odczyt symboli (format MWC1) i operatorów (MWO1) wraz z plikami JSON.

MWC1: b"MWC1", u32 n, u32 N, f64 L, wartości complex128 wierszami (little-endian).
MWO1: b"MWO1", u32 n, u32 N, f64 L, u8 kod schematu, wartości complex128.
"""

import json
import os
import struct

import numpy as np

from config import SIGN_SIGMA, TOOL_VERSION

from .errors import SymbolError
from .quantize import SCHEME_CODES, OperatorMatrix
from .symbols import PhaseGrid, SymbolField

SYMBOL_MAGIC = b"MWC1"
OPERATOR_MAGIC = b"MWO1"
_HEADER = struct.Struct("<4sIId")
_SCHEME = struct.Struct("<B")
_CODE_TO_SCHEME = {code: name for name, code in SCHEME_CODES.items()}


def _ensure_dir(path):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)


def save_symbol(f, path):
    """
    Zapisuje pole symbolu w formacie MWC1.

    Args:
        f (SymbolField): Symbol
        path (str): Ścieżka pliku

    Returns:
        str: Ścieżka zapisanego pliku
    """
    _ensure_dir(path)
    grid = f.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(SYMBOL_MAGIC, grid.n, grid.N, float(grid.L)))
        fh.write(np.ascontiguousarray(f.values, dtype="<c16").tobytes())
    return path


def _read_header(data, magic, path):
    if len(data) < _HEADER.size:
        raise SymbolError(f"Plik {path} jest za krótki")
    found, n, N, L = _HEADER.unpack_from(data, 0)
    if found != magic:
        raise SymbolError(f"Niepoprawny nagłówek pliku {path}: {found!r}, oczekiwano {magic!r}")
    return PhaseGrid(n, L, N)


def _read_values(data, offset, grid, path):
    expected = grid.size * grid.size
    values = np.frombuffer(data, dtype="<c16", offset=offset)
    if values.size != expected:
        raise SymbolError(f"Plik {path}: {values.size} wartości, oczekiwano {expected}")
    return values.astype(complex).reshape(grid.size, grid.size)


def load_symbol(path):
    """
    Wczytuje symbol z pliku MWC1.

    Returns:
        SymbolField: Symbol bez funkcji źródłowej
    """
    with open(path, "rb") as fh:
        data = fh.read()
    grid = _read_header(data, SYMBOL_MAGIC, path)
    return SymbolField(grid, _read_values(data, _HEADER.size, grid, path))


def save_operator(M, path):
    """
    Zapisuje macierz operatora w formacie MWO1.
    """
    _ensure_dir(path)
    grid = M.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(OPERATOR_MAGIC, grid.n, grid.N, float(grid.L)))
        fh.write(_SCHEME.pack(SCHEME_CODES[M.scheme]))
        fh.write(np.ascontiguousarray(M.entries, dtype="<c16").tobytes())
    return path


def load_operator(path, potential=None):
    """
    Wczytuje operator z pliku MWO1.

    Args:
        path (str): Ścieżka pliku
        potential (str, optional): Etykieta potencjału (nie jest zapisywana w pliku binarnym)

    Returns:
        OperatorMatrix: Operator
    """
    with open(path, "rb") as fh:
        data = fh.read()
    grid = _read_header(data, OPERATOR_MAGIC, path)
    (code,) = _SCHEME.unpack_from(data, _HEADER.size)
    if code not in _CODE_TO_SCHEME:
        raise SymbolError(f"Nieznany kod schematu {code} w pliku {path}")
    entries = _read_values(data, _HEADER.size + _SCHEME.size, grid, path)
    scheme = _CODE_TO_SCHEME[code]
    if potential is None:
        potential = "zero" if scheme == "weyl" else None
    return OperatorMatrix(grid, entries, scheme, potential)


def _to_builtin(value):
    if isinstance(value, dict):
        return {str(k): _to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return _to_builtin(value.tolist())
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


def write_sidecar(path, payload):
    """
    Zapisuje plik JSON z dołączonym znakiem sigma i wersją narzędzia.

    Returns:
        str: Ścieżka pliku JSON
    """
    _ensure_dir(path)
    document = {"sigma": SIGN_SIGMA, "version": TOOL_VERSION}
    document.update(_to_builtin(payload))
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(document, fh, indent=2, ensure_ascii=False, sort_keys=True)
    return path


def read_sidecar(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def symbol_header_json(f):
    """Nagłówek JSON symbolu (alternatywa dla nagłówka binarnego)."""
    return {
        "format": SYMBOL_MAGIC.decode("ascii"),
        "n": f.grid.n,
        "N": f.grid.N,
        "L": float(f.grid.L),
        "class_meta": list(f.class_meta) if f.class_meta is not None else None,
    }
