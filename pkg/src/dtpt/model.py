"""Emitter-array geometry and site-basis coupling matrices.

Units: the resonant wavelength is 1, hbar is 1, and all rates are in the same
(arbitrary) unit as ``gamma0``.  The free term ``omega0 * sum(sigma+ sigma-)``
is dropped, so every spectrum is measured from the emitter resonance.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .errors import ConfigError

_CONFIG_KEYS = ("n_emitters", "j0", "phi", "gamma0", "spacing", "offsets")


@dataclass(frozen=True)
class ModelConfig:
    n_emitters: int
    j0: float
    phi: float
    gamma0: float = 1.0
    spacing: float = 0.75
    offsets: Optional[Tuple[float, ...]] = field(default=None)

    def __post_init__(self):
        if isinstance(self.n_emitters, bool) or int(self.n_emitters) != self.n_emitters:
            raise ConfigError(f"n_emitters must be an integer, got {self.n_emitters!r}")
        object.__setattr__(self, "n_emitters", int(self.n_emitters))
        for name in ("j0", "phi", "gamma0", "spacing"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ConfigError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.n_emitters < 2:
            raise ConfigError(f"n_emitters must be >= 2, got {self.n_emitters}")
        # gamma0 == 0 is the isolated chain; it is allowed so that SSH limits
        # and the gamma0 = 0 edge of a phase diagram can be evaluated.
        if self.gamma0 < 0:
            raise ConfigError(f"gamma0 must be >= 0, got {self.gamma0}")
        if self.j0 < 0:
            raise ConfigError(f"j0 must be >= 0, got {self.j0}")
        if self.spacing <= 0:
            raise ConfigError(f"spacing must be > 0, got {self.spacing}")
        if self.offsets is not None:
            offsets = tuple(float(v) for v in self.offsets)
            if len(offsets) != self.n_emitters:
                raise ConfigError(
                    f"offsets has {len(offsets)} entries, expected {self.n_emitters}"
                )
            if not all(np.isfinite(offsets)):
                raise ConfigError("offsets must be finite")
            object.__setattr__(self, "offsets", offsets)
        if np.any(np.diff(self.positions) <= 0):
            raise ConfigError("emitter positions must be strictly increasing")

    @property
    def offset_array(self) -> np.ndarray:
        if self.offsets is None:
            return np.zeros(self.n_emitters)
        return np.asarray(self.offsets, dtype=float)

    @property
    def positions(self) -> np.ndarray:
        return np.arange(self.n_emitters) * self.spacing + self.offset_array

    @property
    def rate_scale(self) -> float:
        """Rate used to make tolerances dimensionless."""
        if self.gamma0 > 0:
            return self.gamma0
        return self.j0 if self.j0 > 0 else 1.0

    @property
    def is_clean(self) -> bool:
        return self.offsets is None or not any(self.offsets)

    def with_(self, **changes) -> "ModelConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        data = asdict(self)
        if self.offsets is None:
            del data["offsets"]
        else:
            data["offsets"] = list(self.offsets)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = sorted(set(data) - set(_CONFIG_KEYS))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        missing = [k for k in ("n_emitters", "j0", "phi") if k not in data]
        if missing:
            raise ConfigError(f"missing config keys: {', '.join(missing)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"line {exc.lineno}: {exc.msg}") from exc
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "ModelConfig":
        return cls.from_json(Path(path).read_text())


@dataclass(frozen=True)
class CouplingSet:
    h: np.ndarray
    gamma: np.ndarray
    j_list: np.ndarray

    @property
    def n(self) -> int:
        return self.h.shape[0]


def sin_cos_turns(x) -> Tuple[np.ndarray, np.ndarray]:
    """Return ``sin(2*pi*x)`` and ``cos(2*pi*x)`` with exact quarter-turn values.

    The argument is reduced to the first quarter turn before calling the
    library functions, so multiples of 1/4 give exact 0 and +-1.
    """
    x = np.asarray(x, dtype=float)
    r = x - np.floor(x)
    quarter = np.floor(4.0 * r)
    s = r - quarter / 4.0
    sa = np.sin(2.0 * np.pi * s)
    ca = np.cos(2.0 * np.pi * s)
    q = quarter.astype(int) % 4
    sin = np.select([q == 0, q == 1, q == 2], [sa, ca, -sa], -ca)
    cos = np.select([q == 0, q == 1, q == 2], [ca, -sa, -ca], sa)
    return sin, cos


def dimerized_couplings(config: ModelConfig) -> np.ndarray:
    """Nearest-neighbour couplings ``J_i = J0 [1 + (-1)^i cos(phi)]``, i = 1..N-1."""
    i = np.arange(1, config.n_emitters)
    sign = np.where(i % 2 == 0, 1.0, -1.0)
    return config.j0 * (1.0 + sign * np.cos(config.phi))


def separations(config: ModelConfig) -> np.ndarray:
    n = config.n_emitters
    idx = np.arange(n)
    delta = config.offset_array
    # (i - j) * d is exact for the usual quarter-wavelength spacings
    return np.abs((idx[:, None] - idx[None, :]) * config.spacing + (delta[:, None] - delta[None, :]))


def pairwise_kernels(config: ModelConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Coherent (g) and dissipative (gamma) photon-mediated kernels."""
    dist = separations(config)
    off = ~np.eye(config.n_emitters, dtype=bool)
    if np.any(dist[off] == 0):
        raise ConfigError("coincident emitter positions")
    sin, cos = sin_cos_turns(dist)
    g = 0.5 * config.gamma0 * sin
    gamma = config.gamma0 * cos
    np.fill_diagonal(g, 0.0)
    np.fill_diagonal(gamma, config.gamma0)
    return g, gamma


def assemble(config: ModelConfig) -> CouplingSet:
    g, gamma = pairwise_kernels(config)
    j_list = dimerized_couplings(config)
    h = g.copy()
    i = np.arange(config.n_emitters - 1)
    h[i, i + 1] += j_list
    h[i + 1, i] += j_list
    return CouplingSet(h=h, gamma=gamma, j_list=j_list)


def sublattice_signs(n: int) -> np.ndarray:
    return np.where(np.arange(n) % 2 == 0, 1.0, -1.0)


def check_chiral(h: np.ndarray, atol: Optional[float] = None) -> bool:
    """True if the sublattice sign operator anticommutes with ``h``.

    Equivalent to every same-sublattice entry (diagonal included) vanishing.
    """
    h = np.asarray(h)
    n = h.shape[0]
    if atol is None:
        atol = 1e-13 * max(float(np.max(np.abs(h))), 1.0)
    idx = np.arange(n)
    same = (idx[:, None] + idx[None, :]) % 2 == 0
    return bool(np.all(np.abs(h[same]) <= atol))


def check_parity(gamma: np.ndarray, atol: Optional[float] = None) -> bool:
    """True if ``gamma`` only couples sites of the same sublattice."""
    gamma = np.asarray(gamma)
    n = gamma.shape[0]
    if atol is None:
        atol = 1e-13 * max(float(np.max(np.abs(gamma))), 1.0)
    idx = np.arange(n)
    cross = (idx[:, None] + idx[None, :]) % 2 == 1
    return bool(np.all(np.abs(gamma[cross]) <= atol))

