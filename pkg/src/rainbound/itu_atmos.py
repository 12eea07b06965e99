"""Slant-path attenuation physics for Ku/Ka-band Earth-space links.

Rain follows the ITU-R P.838-3 power law ``gamma_R = k(f) R**alpha(f)``; the
effective rain path comes either from the P.618 reduction factor or from an
elevation-anchored path length. Gas and cloud terms are deliberately simple
(single water-vapour line plus continuum, single-Debye Rayleigh cloud) since
they only enter as nuisance gradients.

Units: frequency GHz, rain rate mm/h, water vapour density g/m^3, cloud liquid
water content g/m^3, lengths km, attenuation dB.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConfigError, DomainError

F_MIN_GHZ = 1.0
F_MAX_GHZ = 100.0

KU_BAND = (10.7, 12.7)
KA_BAND = (17.7, 20.2)

# Smallest rain rate at which the rain column of the sensitivity matrix is formed.
MIN_RAIN_RATE = 1e-6

PARAMETERS = ("rain_rate", "water_vapor", "cloud_lwc", "offset")


class Polarization(str, enum.Enum):
    HORIZONTAL = "h"
    VERTICAL = "v"


class PathMode(str, enum.Enum):
    """How the effective rain path length is obtained."""

    ANCHORED = "anchored"
    P618 = "p618"


# ITU-R P.838-3 regression constants: (a_j, b_j, c_j) per Gaussian term, then (m, c).
_P838 = {
    ("k", Polarization.HORIZONTAL): (
        ((-5.33980, -0.10008, 1.13098), (-0.35351, 1.26970, 0.45400),
         (-0.23789, 0.86036, 0.15354), (-0.94158, 0.64552, 0.16817)),
        -0.18961, 0.71147,
    ),
    ("k", Polarization.VERTICAL): (
        ((-3.80595, 0.56934, 0.81061), (-3.44965, -0.22911, 0.51059),
         (-0.39902, 0.73042, 0.11899), (0.50167, 1.07319, 0.27195)),
        -0.16398, 0.63297,
    ),
    ("alpha", Polarization.HORIZONTAL): (
        ((-0.14318, 1.82442, -0.55187), (0.29591, 0.77564, 0.19822),
         (0.32177, 0.63773, 0.13164), (-5.37610, -0.96230, 1.47828),
         (16.1721, -3.29980, 3.43990)),
        0.67849, -1.95537,
    ),
    ("alpha", Polarization.VERTICAL): (
        ((-0.07771, 2.33840, -0.76284), (0.56727, 0.95545, 0.54039),
         (-0.20238, 1.14520, 0.26809), (-48.2991, 0.791669, 0.116226),
         (48.5833, 0.791459, 0.116479)),
        -0.053739, 0.83433,
    ),
}


class P838Coefficients(NamedTuple):
    k: float
    alpha: float


def _check_frequency(f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if not np.all(np.isfinite(f)) or np.any(f < F_MIN_GHZ) or np.any(f > F_MAX_GHZ):
        raise DomainError(f"frequency must lie in [{F_MIN_GHZ}, {F_MAX_GHZ}] GHz, got {f}")
    return f


def _regression(name: str, pol: Polarization, f: np.ndarray) -> np.ndarray:
    terms, m, c = _P838[(name, Polarization(pol))]
    x = np.log10(f)
    y = m * x + c
    for a_j, b_j, c_j in terms:
        y = y + a_j * np.exp(-(((x - b_j) / c_j) ** 2))
    return y


def p838_coefficients(f, pol: Polarization | str = Polarization.HORIZONTAL) -> P838Coefficients:
    """ITU-R P.838-3 power-law coefficients at frequency ``f`` (GHz).

    Scalars in give floats out; arrays give arrays of the same shape.
    """
    f = _check_frequency(f)
    k = 10.0 ** _regression("k", pol, f)
    alpha = _regression("alpha", pol, f)
    if f.ndim == 0:
        return P838Coefficients(float(k), float(alpha))
    return P838Coefficients(k, alpha)


@dataclass(frozen=True)
class CoefficientTable:
    """User-supplied ``(f, k, alpha)`` table replacing the P.838-3 regression.

    Interpolation is linear in ``log10 f`` for ``log10 k`` and for ``alpha``;
    values outside the tabulated range are clamped to the end points.
    """

    frequencies: tuple[float, ...]
    k: tuple[float, ...]
    alpha: tuple[float, ...]

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        if f.size < 1 or len(self.k) != f.size or len(self.alpha) != f.size:
            raise ConfigError("coefficient table columns must be non-empty and equal length")
        if np.any(np.diff(f) <= 0):
            raise ConfigError("coefficient table frequencies must be strictly increasing")
        if np.any(np.asarray(self.k) <= 0):
            raise ConfigError("coefficient table k values must be positive")

    @classmethod
    def from_file(cls, path) -> "CoefficientTable":
        """Read ``f_GHz,kH,alphaH`` rows; blank lines and ``#`` comments are skipped."""
        rows = []
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 3:
                raise ConfigError(f"{path}:{lineno}: expected 'f_GHz,kH,alphaH'")
            try:
                rows.append(tuple(float(p) for p in parts))
            except ValueError:
                if not rows:
                    continue  # header row
                raise ConfigError(f"{path}:{lineno}: non-numeric value in {line!r}") from None
        if not rows:
            raise ConfigError(f"{path}: no coefficient rows")
        f, k, a = zip(*rows)
        return cls(tuple(f), tuple(k), tuple(a))

    def __call__(self, f) -> P838Coefficients:
        f = _check_frequency(f)
        x = np.log10(f)
        xs = np.log10(np.asarray(self.frequencies))
        k = 10.0 ** np.interp(x, xs, np.log10(np.asarray(self.k)))
        alpha = np.interp(x, xs, np.asarray(self.alpha))
        if f.ndim == 0:
            return P838Coefficients(float(k), float(alpha))
        return P838Coefficients(k, alpha)


@dataclass(frozen=True)
class FrequencyGrid:
    """Subcarrier frequencies and the rain coefficients used at each of them.

    With ``band_average=True`` every subcarrier uses the same ``(k, alpha)``:
    ``band_coefficients`` when given, otherwise the mean of the per-frequency
    coefficients over the grid.
    """

    frequencies: tuple[float, ...]
    polarization: Polarization = Polarization.HORIZONTAL
    band_average: bool = False
    band_coefficients: tuple[float, float] | None = None
    table: CoefficientTable | None = field(default=None, compare=False)

    def __post_init__(self):
        f = np.atleast_1d(np.asarray(self.frequencies, dtype=float))
        if f.size == 0:
            raise DomainError("frequency grid must be non-empty")
        _check_frequency(f)
        if np.any(np.diff(f) <= 0):
            raise DomainError("frequencies must be strictly increasing")
        object.__setattr__(self, "frequencies", tuple(float(v) for v in f))
        object.__setattr__(self, "polarization", Polarization(self.polarization))
        if self.band_coefficients is not None:
            k, a = self.band_coefficients
            if k <= 0:
                raise DomainError("band k must be positive")
            object.__setattr__(self, "band_coefficients", (float(k), float(a)))

    @classmethod
    def ku(cls, n_subcarriers: int = 5, **kwargs) -> "FrequencyGrid":
        """Evenly spaced grid over the 10.7-12.7 GHz Ku downlink band."""
        return cls(tuple(np.linspace(*KU_BAND, n_subcarriers)), **kwargs)

    @classmethod
    def ku_ka(cls, n_ku: int = 5, n_ka: int = 3, **kwargs) -> "FrequencyGrid":
        """Ku grid plus an evenly spaced 17.7-20.2 GHz Ka segment."""
        f = np.concatenate([np.linspace(*KU_BAND, n_ku), np.linspace(*KA_BAND, n_ka)])
        return cls(tuple(f), **kwargs)

    @property
    def f(self) -> np.ndarray:
        return np.asarray(self.frequencies)

    @property
    def size(self) -> int:
        return len(self.frequencies)

    @property
    def center_frequency(self) -> float:
        return 0.5 * (self.frequencies[0] + self.frequencies[-1])

    def _lookup(self, f) -> P838Coefficients:
        if self.table is not None:
            return self.table(f)
        return p838_coefficients(f, self.polarization)

    @cached_property
    def _coefficients(self) -> tuple[np.ndarray, np.ndarray]:
        k, alpha = self._lookup(self.f)
        if self.band_average:
            if self.band_coefficients is not None:
                kb, ab = self.band_coefficients
            else:
                kb, ab = float(np.mean(k)), float(np.mean(alpha))
            k = np.full(self.size, kb)
            alpha = np.full(self.size, ab)
        k.setflags(write=False)
        alpha.setflags(write=False)
        return k, alpha

    @property
    def k(self) -> np.ndarray:
        return self._coefficients[0]

    @property
    def alpha(self) -> np.ndarray:
        return self._coefficients[1]

    def band_mean(self) -> P838Coefficients:
        """Mean ``(k, alpha)`` over the grid under the active coefficient mode."""
        return P838Coefficients(float(np.mean(self.k)), float(np.mean(self.alpha)))

    def center_coefficients(self) -> P838Coefficients:
        """Coefficients at the band centre frequency under the active mode."""
        if self.band_average:
            return self.band_mean()
        return self._lookup(self.center_frequency)

    def with_band_average(self, on: bool = True, coefficients=None) -> "FrequencyGrid":
        return replace(self, band_average=on, band_coefficients=coefficients if on else None)


@dataclass(frozen=True)
class AtmosphericState:
    """Atmospheric parameter vector ``[R, rho_wv, M_c, G]``."""

    rain_rate: float
    water_vapor: float = 7.5
    cloud_lwc: float = 0.0
    offset: float = 0.0

    def __post_init__(self):
        for name in ("rain_rate", "water_vapor", "cloud_lwc"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise DomainError(f"{name} must be finite and non-negative, got {v}")
        if not math.isfinite(self.offset):
            raise DomainError("offset must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.rain_rate, self.water_vapor, self.cloud_lwc, self.offset])

    @classmethod
    def from_array(cls, values) -> "AtmosphericState":
        return cls(*(float(v) for v in values))


@dataclass(frozen=True)
class PathGeometry:
    """Slant-path geometry (angles in degrees, lengths in km)."""

    elevation: float = 38.0
    rain_height: float = 3.1
    gas_path: float = 10.0
    cloud_path: float = 2.0
    base_elevation: float = 38.0
    base_rain_path: float = 3.0
    mode: PathMode = PathMode.ANCHORED

    def __post_init__(self):
        object.__setattr__(self, "mode", PathMode(self.mode))
        if not 0.0 < self.elevation <= 90.0:
            raise DomainError(f"elevation must lie in (0, 90] degrees, got {self.elevation}")
        if not 0.0 < self.base_elevation <= 90.0:
            raise DomainError("base elevation must lie in (0, 90] degrees")
        if self.rain_height <= 0 or self.base_rain_path <= 0:
            raise DomainError("rain height and base rain path must be positive")
        if self.gas_path < 0 or self.cloud_path < 0:
            raise DomainError("gas and cloud path lengths must be non-negative")

    @property
    def slant_length(self) -> float:
        return self.rain_height / math.sin(math.radians(self.elevation))

    @property
    def horizontal_projection(self) -> float:
        return self.slant_length * math.cos(math.radians(self.elevation))

    def anchored_rain_path(self) -> float:
        """Rain path scaled from the base elevation: ``L_0 sin(base) / sin(elev)``."""
        return (self.base_rain_path * math.sin(math.radians(self.base_elevation))
                / math.sin(math.radians(self.elevation)))

    def at_elevation(self, elevation: float) -> "PathGeometry":
        return replace(self, elevation=elevation)


def specific_rain_attenuation(f, rain_rate, pol: Polarization | str = Polarization.HORIZONTAL,
                              coefficients: P838Coefficients | None = None):
    """Specific rain attenuation ``k R**alpha`` in dB/km."""
    rain_rate = np.asarray(rain_rate, dtype=float)
    if np.any(rain_rate < 0) or not np.all(np.isfinite(rain_rate)):
        raise DomainError("rain rate must be finite and non-negative")
    k, alpha = coefficients if coefficients is not None else p838_coefficients(f, pol)
    out = k * rain_rate ** alpha
    return float(out) if np.ndim(out) == 0 else out


def p618_reduction_factor(geom: PathGeometry, gamma_r, f):
    """P.618-style path reduction factor applied to the full slant path."""
    gamma_r = np.asarray(gamma_r, dtype=float)
    if np.any(gamma_r < 0):
        raise DomainError("specific attenuation must be non-negative")
    f = _check_frequency(f)
    lg = geom.horizontal_projection
    denom = 1.0 + 0.78 * np.sqrt(lg * gamma_r / f) - 0.38 * (1.0 - math.exp(-2.0 * lg))
    r = 1.0 / denom
    return float(r) if np.ndim(r) == 0 else r


def p618_effective_path(geom: PathGeometry, gamma_r, f):
    """Effective rain path ``L_s r_eff`` (km) from the P.618 reduction factor."""
    return geom.slant_length * p618_reduction_factor(geom, gamma_r, f)


def effective_rain_path(geom: PathGeometry, gamma_r=None, f=None):
    """Effective rain path under the geometry's path mode.

    Anchored mode ignores ``gamma_r`` and ``f``.
    """
    if geom.mode is PathMode.ANCHORED:
        return geom.anchored_rain_path()
    if gamma_r is None or f is None:
        raise DomainError("P.618 path mode needs the specific attenuation and frequency")
    return p618_effective_path(geom, gamma_r, f)


def _oxygen_specific_attenuation(f: np.ndarray) -> np.ndarray:
    # dry-air floor valid below the 60 GHz complex
    return (7.2 / (f ** 2 + 0.34) + 0.62 / ((54.0 - np.minimum(f, 53.0)) ** 1.16 + 0.83)) * f ** 2 * 1e-3


_H2O_LINE_GHZ = 22.235
_H2O_WIDTH_SQ = 8.5


def _water_vapor_shape(f: np.ndarray, rho) -> np.ndarray:
    # Van Vleck-Weisskopf symmetrised 22.235 GHz line, foreign + self continuum
    line = 3.6 * (f / _H2O_LINE_GHZ) * (
        1.0 / ((f - _H2O_LINE_GHZ) ** 2 + _H2O_WIDTH_SQ)
        + 1.0 / ((f + _H2O_LINE_GHZ) ** 2 + _H2O_WIDTH_SQ)
    )
    return 0.05 + 0.0021 * rho + line


def gas_specific_attenuation(f, water_vapor):
    """Gaseous specific attenuation (dB/km): oxygen floor plus water vapour."""
    f = _check_frequency(f)
    rho = np.asarray(water_vapor, dtype=float)
    if np.any(rho < 0):
        raise DomainError("water vapour density must be non-negative")
    out = _oxygen_specific_attenuation(f) + _water_vapor_shape(f, rho) * f ** 2 * rho * 1e-4
    return float(out) if np.ndim(out) == 0 else out


def gas_specific_attenuation_derivative(f, water_vapor):
    """Derivative of :func:`gas_specific_attenuation` with respect to water vapour."""
    f = _check_frequency(f)
    rho = np.asarray(water_vapor, dtype=float)
    out = (_water_vapor_shape(f, rho) + 0.0021 * rho) * f ** 2 * 1e-4
    return float(out) if np.ndim(out) == 0 else out


def cloud_coefficient(f, temperature: float = 273.15):
    """Rayleigh cloud specific attenuation coefficient, dB/km per g/m^3.

    Uses a single-Debye model for the permittivity of liquid water.
    """
    f = _check_frequency(f)
    theta = 300.0 / temperature
    eps0 = 77.66 + 103.3 * (theta - 1.0)
    eps1 = 5.48
    fp = 20.09 - 142.0 * (theta - 1.0) + 294.0 * (theta - 1.0) ** 2
    ratio = 1.0 + (f / fp) ** 2
    eps_im = f * (eps0 - eps1) / (fp * ratio)
    eps_re = (eps0 - eps1) / ratio + eps1
    eta = (2.0 + eps_re) / eps_im
    out = 0.819 * f / (eps_im * (1.0 + eta ** 2))
    return float(out) if np.ndim(out) == 0 else out


class AttenuationBreakdown(NamedTuple):
    """Per-frequency addends of the total excess attenuation (dB)."""

    rain: np.ndarray
    gas: np.ndarray
    cloud: np.ndarray
    offset: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.rain + self.gas + self.cloud + self.offset


def _as_grid(grid_or_f) -> FrequencyGrid:
    if isinstance(grid_or_f, FrequencyGrid):
        return grid_or_f
    return FrequencyGrid(tuple(np.atleast_1d(np.asarray(grid_or_f, dtype=float))))


def rain_attenuation(rain_rate: float, grid: FrequencyGrid, geom: PathGeometry) -> np.ndarray:
    """Rain addend ``k R**alpha L_eff`` at every grid frequency (dB)."""
    if rain_rate < 0 or not math.isfinite(rain_rate):
        raise DomainError("rain rate must be finite and non-negative")
    gamma = grid.k * rain_rate ** grid.alpha
    return gamma * effective_rain_path(geom, gamma, grid.f)


def attenuation_breakdown(grid: FrequencyGrid | Sequence[float], state: AtmosphericState,
                          geom: PathGeometry) -> AttenuationBreakdown:
    grid = _as_grid(grid)
    rain = rain_attenuation(state.rain_rate, grid, geom)
    gas = gas_specific_attenuation(grid.f, state.water_vapor) * geom.gas_path
    cloud = cloud_coefficient(grid.f) * state.cloud_lwc * geom.cloud_path
    offset = np.full(grid.size, float(state.offset))
    return AttenuationBreakdown(rain, np.asarray(gas), np.asarray(cloud), offset)


def total_attenuation(f, state: AtmosphericState, geom: PathGeometry, grid: FrequencyGrid | None = None):
    """Total excess attenuation (dB) at ``f``.

    ``f`` may be a scalar, an array, or a :class:`FrequencyGrid`. A grid passed
    through ``grid`` sets the coefficient mode and polarization used for ``f``.
    """
    if isinstance(f, FrequencyGrid):
        out = attenuation_breakdown(f, state, geom).total
        return out
    scalar = np.ndim(f) == 0
    freqs = tuple(np.atleast_1d(np.asarray(f, dtype=float)))
    if grid is not None:
        target = replace(grid, frequencies=freqs) if not grid.band_average else replace(
            grid, frequencies=freqs, band_coefficients=grid.band_mean())
    else:
        target = FrequencyGrid(freqs)
    out = attenuation_breakdown(target, state, geom).total
    return float(out[0]) if scalar else out


def _rain_column(rain_rate: float, grid: FrequencyGrid, geom: PathGeometry) -> np.ndarray:
    k, alpha = grid.k, grid.alpha
    if rain_rate < MIN_RAIN_RATE:
        if grid.band_average and np.all(alpha > 1.0) and rain_rate == 0.0:
            return np.zeros(grid.size)
        raise DomainError(f"rain column needs R >= {MIN_RAIN_RATE} mm/h, got {rain_rate}")
    dgamma = k * alpha * rain_rate ** (alpha - 1.0)
    if geom.mode is PathMode.ANCHORED:
        return dgamma * geom.anchored_rain_path()
    # A = gamma L_s r(gamma); dA/dgamma = L_s (r + gamma r'(gamma))
    gamma = k * rain_rate ** alpha
    f = grid.f
    lg = geom.horizontal_projection
    denom = 1.0 + 0.78 * np.sqrt(lg * gamma / f) - 0.38 * (1.0 - math.exp(-2.0 * lg))
    gamma_r_prime = -0.39 * np.sqrt(lg * gamma / f) / denom ** 2
    return dgamma * geom.slant_length * (1.0 / denom + gamma_r_prime)


def sensitivity_matrix(state: AtmosphericState, grid: FrequencyGrid, geom: PathGeometry,
                       params: Sequence[str] = PARAMETERS) -> np.ndarray:
    """Jacobian of the attenuation vector with respect to selected parameters.

    Returns a ``K x p`` matrix whose columns follow the order of ``params``
    (any subset of :data:`PARAMETERS`).
    """
    params = tuple(params)
    if not params:
        raise DomainError("parameter mask is empty")
    unknown = set(params) - set(PARAMETERS)
    if unknown:
        raise DomainError(f"unknown parameters {sorted(unknown)}")
    cols = []
    for name in params:
        if name == "rain_rate":
            cols.append(_rain_column(state.rain_rate, grid, geom))
        elif name == "water_vapor":
            cols.append(gas_specific_attenuation_derivative(grid.f, state.water_vapor) * geom.gas_path)
        elif name == "cloud_lwc":
            cols.append(cloud_coefficient(grid.f) * geom.cloud_path)
        else:
            cols.append(np.ones(grid.size))
    return np.column_stack(cols)
