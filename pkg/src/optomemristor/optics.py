"""Normal-incidence transfer-matrix optics for electrode/GeSe3/electrode cavities.

Convention: complex index ``N = n - ik`` with ``k >= 0``, characteristic matrix

    M = [[cos d,      i sin d / N],
         [i N sin d,  cos d      ]],   d = 2 pi N t / lambda

and admittances in units of the free-space admittance (``eta = N``).  For a
stack with total matrix ``M`` on a substrate of index ``eta_s``,
``[B, C] = M @ [1, eta_s]`` and

    r = (eta0 B - C) / (eta0 B + C),   T = 4 eta0 Re(eta_s) / |eta0 B + C|^2.

With this sign choice an absorbing layer has ``Im(d) < 0`` and the field
decays through it.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple

import numpy as np


class UnknownMaterialError(KeyError):
    pass


class WavelengthOutOfRangeError(ValueError):
    pass


@dataclass(frozen=True)
class Layer:
    material_id: str
    thickness: float  # nm

    def __post_init__(self):
        if not (math.isfinite(self.thickness) and self.thickness > 0):
            raise ValueError(f"layer thickness must be positive and finite, got {self.thickness}")


@dataclass(frozen=True)
class LayerStack:
    """Light arrives from ``ambient``; ``layers`` are listed from the ambient side."""

    ambient: str
    layers: tuple[Layer, ...] = ()
    substrate: str = "SiO2"

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))

    def with_thickness(self, index: int, thickness: float) -> "LayerStack":
        layers = list(self.layers)
        layers[index] = Layer(layers[index].material_id, thickness)
        return replace(self, layers=tuple(layers))

    def layer_index(self, material_id: str) -> int:
        for i, layer in enumerate(self.layers):
            if layer.material_id == material_id:
                return i
        raise ValueError(f"stack has no {material_id} layer")


class MaterialTable:
    """Tabulated ``(wavelength_nm, n, k)`` per material, linearly interpolated.

    Queries outside a material's tabulated range raise
    :class:`WavelengthOutOfRangeError`; there is no extrapolation.
    """

    def __init__(self, data: Mapping[str, np.ndarray] | None = None):
        self._data: dict[str, np.ndarray] = {}
        for name, rows in (data or {}).items():
            self.add(name, rows)

    def add(self, material_id: str, rows) -> None:
        arr = np.asarray(rows, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 3 or len(arr) < 2:
            raise ValueError(f"{material_id}: expected >= 2 rows of (wavelength, n, k)")
        wl, n, k = arr.T
        if np.any(np.diff(wl) <= 0):
            raise ValueError(f"{material_id}: wavelengths must be strictly increasing")
        if np.any(n <= 0) or np.any(k < 0):
            raise ValueError(f"{material_id}: need n > 0 and k >= 0")
        self._data[material_id] = arr

    def __contains__(self, material_id) -> bool:
        return material_id in self._data

    def __iter__(self):
        return iter(self._data)

    def range(self, material_id: str) -> tuple[float, float]:
        arr = self._rows(material_id)
        return float(arr[0, 0]), float(arr[-1, 0])

    def _rows(self, material_id: str) -> np.ndarray:
        try:
            return self._data[material_id]
        except KeyError:
            raise UnknownMaterialError(material_id) from None

    def index(self, material_id: str, wavelength):
        """Complex index ``n - ik`` at ``wavelength`` (nm, scalar or array)."""
        arr = self._rows(material_id)
        wl = np.asarray(wavelength, dtype=float)
        lo, hi = arr[0, 0], arr[-1, 0]
        if np.any(wl < lo) or np.any(wl > hi) or np.any(~np.isfinite(wl)):
            raise WavelengthOutOfRangeError(
                f"{material_id}: wavelength outside tabulated range [{lo}, {hi}] nm")
        n = np.interp(wl, arr[:, 0], arr[:, 1])
        k = np.interp(wl, arr[:, 0], arr[:, 2])
        out = n - 1j * k
        return complex(out) if out.ndim == 0 else out

    @classmethod
    def from_csv(cls, paths: Iterable[str | Path]) -> "MaterialTable":
        table = cls()
        for path in paths:
            path = Path(path)
            table.add(path.stem, _read_nk_csv(path.read_text("utf-8")))
        return table

    @classmethod
    def bundled(cls) -> "MaterialTable":
        return _bundled_materials()


def _read_nk_csv(text: str) -> list[tuple[float, float, float]]:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.DictReader(lines)
    return [(float(r["wavelength_nm"]), float(r["n"]), float(r["k"])) for r in reader]


@lru_cache(maxsize=1)
def _bundled_materials() -> MaterialTable:
    table = MaterialTable()
    root = resources.files("optomemristor").joinpath("data/materials")
    for entry in sorted(root.iterdir(), key=lambda p: p.name):
        if entry.name.endswith(".csv"):
            table.add(entry.name[:-4], _read_nk_csv(entry.read_text("utf-8")))
    return table


def default_stack(d_gese3: float = 78.0, top_ag: float = 15.0, bottom_ag: float = 100.0) -> LayerStack:
    """Air / Ag(top) / GeSe3(d) / Ag(bottom, opaque) / SiO2."""
    return LayerStack("Air", (Layer("Ag", top_ag), Layer("GeSe3", d_gese3), Layer("Ag", bottom_ag)),
                      "SiO2")


# -- transfer matrices -------------------------------------------------------

def _char_matrices(eta, thickness, wavelength):
    """Broadcast characteristic matrices, shape ``(..., 2, 2)``."""
    delta = 2 * np.pi * eta * thickness / wavelength
    c, s = np.cos(delta), np.sin(delta)
    m = np.empty(np.broadcast(delta, eta).shape + (2, 2), dtype=complex)
    m[..., 0, 0] = c
    m[..., 0, 1] = 1j * s / eta
    m[..., 1, 0] = 1j * eta * s
    m[..., 1, 1] = c
    return m


def layer_matrix(layer: Layer, wavelength: float, materials: MaterialTable) -> np.ndarray:
    """2x2 characteristic matrix of one layer at normal incidence."""
    eta = materials.index(layer.material_id, wavelength)
    return _char_matrices(np.complex128(eta), layer.thickness, float(wavelength))


class Response(NamedTuple):
    R: float
    T: float
    A: float


def _lossless_media(stack: LayerStack, wavelength, materials: MaterialTable):
    eta0 = materials.index(stack.ambient, wavelength)
    eta_s = materials.index(stack.substrate, wavelength)
    if np.any(np.imag(eta0) != 0) or np.any(np.imag(eta_s) != 0):
        raise ValueError("ambient and substrate must be lossless (k = 0)")
    return np.real(eta0), np.real(eta_s)


def _admittance_vector(stack: LayerStack, wavelength, materials: MaterialTable,
                       thickness_override: tuple[int, np.ndarray] | None = None):
    """Return ``(eta0, eta_s, B, C)`` broadcast over wavelength (and thickness)."""
    eta0, eta_s = _lossless_media(stack, wavelength, materials)
    total = None
    for i, layer in enumerate(stack.layers):
        eta = materials.index(layer.material_id, wavelength)
        d = layer.thickness
        if thickness_override is not None and thickness_override[0] == i:
            d = thickness_override[1]
        m = _char_matrices(np.asarray(eta), d, wavelength)
        total = m if total is None else total @ m
    if total is None:
        B = np.ones_like(np.asarray(eta_s, dtype=complex))
        C = np.asarray(eta_s, dtype=complex)
    else:
        B = total[..., 0, 0] + total[..., 0, 1] * eta_s
        C = total[..., 1, 0] + total[..., 1, 1] * eta_s
    return eta0, eta_s, B, C


def _rta(eta0, eta_s, B, C):
    den = eta0 * B + C
    R = np.abs((eta0 * B - C) / den) ** 2
    T = 4 * eta0 * eta_s / np.abs(den) ** 2
    return R, T, 1.0 - R - T


def stack_response(stack: LayerStack, wavelength: float, materials: MaterialTable) -> Response:
    """Reflectance, transmittance and absorptance at one wavelength."""
    R, T, A = _rta(*_admittance_vector(stack, float(wavelength), materials))
    return Response(float(R), float(T), float(A))


def poynting_absorptance(stack: LayerStack, wavelength, materials: MaterialTable):
    """Absorptance from the net flux into the stack, ``4 eta0 Re(B C* - eta_s) / |eta0 B + C|^2``.

    Computed without reference to R or T; used to cross-check ``A = 1 - R - T``.
    """
    eta0, eta_s, B, C = _admittance_vector(stack, wavelength, materials)
    return 4 * eta0 * np.real(B * np.conj(C) - eta_s) / np.abs(eta0 * B + C) ** 2


# -- spectra -----------------------------------------------------------------

@dataclass(frozen=True)
class SpectralResponse:
    wavelength: np.ndarray
    R: np.ndarray
    T: np.ndarray
    A: np.ndarray

    def __len__(self):
        return len(self.wavelength)

    def rows(self):
        return zip(self.wavelength.tolist(), self.R.tolist(), self.T.tolist(), self.A.tolist())


def wavelength_grid(lambda_min: float, lambda_max: float, n_points: int) -> np.ndarray:
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    if not lambda_max > lambda_min:
        raise ValueError("need lambda_max > lambda_min")
    return np.linspace(lambda_min, lambda_max, int(n_points))


def absorption_spectrum(stack: LayerStack, lambda_min: float, lambda_max: float, n_points: int,
                        materials: MaterialTable) -> SpectralResponse:
    wl = wavelength_grid(lambda_min, lambda_max, n_points)
    R, T, A = _rta(*_admittance_vector(stack, wl, materials))
    return SpectralResponse(wl, R, T, A)


def peak_absorption(spectrum: SpectralResponse) -> tuple[float, float]:
    """Wavelength and value of maximum absorptance; ties go to the shorter wavelength."""
    if len(spectrum) == 0:
        raise ValueError("empty spectrum")
    order = np.argsort(spectrum.wavelength, kind="stable")
    A = spectrum.A[order]
    i = int(np.argmax(A))
    return float(spectrum.wavelength[order][i]), float(A[i])


class ThicknessScan(NamedTuple):
    thickness: np.ndarray
    peak_wavelength: np.ndarray
    peak_absorption: np.ndarray


def scan_thickness(stack_template: LayerStack, d_min: float, d_max: float,
                   materials: MaterialTable, cavity_material: str = "GeSe3",
                   lambda_min: float = 400.0, lambda_max: float = 1200.0,
                   n_points: int = 801) -> ThicknessScan:
    """Peak absorption of the cavity layer on a 1 nm thickness grid."""
    if not d_min < d_max:
        raise ValueError("need d_min < d_max")
    d = np.arange(math.ceil(max(d_min, 1e-9)), math.floor(d_max) + 1, dtype=float)
    if d.size == 0:
        raise ValueError(f"no integer thickness in [{d_min}, {d_max}] nm")
    idx = stack_template.layer_index(cavity_material)
    wl = wavelength_grid(lambda_min, lambda_max, n_points)
    _, _, A = _rta(*_admittance_vector(stack_template, wl[None, :], materials,
                                       thickness_override=(idx, d[:, None])))
    best = np.argmax(A, axis=1)  # first maximum = shortest wavelength
    rows = np.arange(len(d))
    return ThicknessScan(d, wl[best], A[rows, best])


def design_thickness(stack_template: LayerStack, lambda_target: float, d_min: float,
                     d_max: float, materials: MaterialTable, cavity_material: str = "GeSe3",
                     **grid) -> tuple[float, float]:
    """Cavity thickness whose absorption peak sits closest to ``lambda_target``.

    Ties go to the thinner layer.  Returns ``(d_nm, A_peak)``.
    """
    scan = scan_thickness(stack_template, d_min, d_max, materials, cavity_material, **grid)
    miss = np.abs(scan.peak_wavelength - lambda_target)
    i = int(np.argmin(miss))
    return float(scan.thickness[i]), float(scan.peak_absorption[i])


def absorption_scaling(stack: LayerStack, materials: MaterialTable):
    """Absorptance as a function of wavelength, for :func:`device.effective_power`."""
    return lambda wavelength: stack_response(stack, wavelength, materials).A
