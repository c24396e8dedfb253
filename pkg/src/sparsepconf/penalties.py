"""Lasso, SCAD and MCP penalties and their closed-form proximal maps.

All proximal maps solve ``argmin_u (1/2 eta)(u - z)^2 + P(u)`` coordinatewise.
MCP's concavity parameter is called ``shape`` here, as is SCAD's ``a``.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .exceptions import ConfigError, DomainError

DEFAULT_SHAPE = {"scad": 3.7, "mcp": 3.0}


class Penalty(str, Enum):
    L1 = "l1"
    SCAD = "scad"
    MCP = "mcp"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).lower()
        if key == "lasso":
            key = "l1"
        try:
            return cls(key)
        except ValueError:
            raise ConfigError(f"unknown penalty {value!r}; choose l1, scad or mcp") from None


@dataclass(frozen=True)
class PenaltySpec:
    family: Penalty = Penalty.L1
    lam: float = 0.0
    shape: float = None

    def __post_init__(self):
        family = Penalty.parse(self.family)
        object.__setattr__(self, "family", family)
        lam = float(self.lam)
        if not np.isfinite(lam) or lam < 0:
            raise DomainError(f"lambda must be finite and >= 0, got {self.lam}")
        object.__setattr__(self, "lam", lam)
        shape = self.shape
        if family is Penalty.L1:
            shape = None
        else:
            shape = DEFAULT_SHAPE[family.value] if shape is None else float(shape)
            if family is Penalty.SCAD and not shape > 2:
                raise ConfigError(f"SCAD requires a > 2, got {shape}")
            if family is Penalty.MCP and not shape > 0:
                raise ConfigError(f"MCP requires gamma > 0, got {shape}")
        object.__setattr__(self, "shape", shape)

    def with_lambda(self, lam):
        return PenaltySpec(self.family, lam, self.shape)

    def max_step(self):
        """Upper bound (exclusive) on the step for which the prox is valid."""
        if self.family is Penalty.SCAD:
            return self.shape - 1.0
        if self.family is Penalty.MCP:
            return self.shape
        return np.inf


def scad_penalty(beta, lam, a):
    b = np.abs(np.asarray(beta, dtype=float))
    return np.where(
        b <= lam,
        lam * b,
        np.where(
            b <= a * lam,
            (-b**2 + 2 * a * lam * b - lam**2) / (2 * (a - 1)),
            (a + 1) * lam**2 / 2,
        ),
    )


def mcp_penalty(beta, lam, gamma):
    b = np.abs(np.asarray(beta, dtype=float))
    return np.where(b <= gamma * lam, lam * b - b**2 / (2 * gamma), gamma * lam**2 / 2)


def penalty_terms(spec, beta):
    """Per-coordinate penalty values."""
    b = np.asarray(beta, dtype=float)
    if spec.family is Penalty.L1:
        return spec.lam * np.abs(b)
    if spec.family is Penalty.SCAD:
        return scad_penalty(b, spec.lam, spec.shape)
    return mcp_penalty(b, spec.lam, spec.shape)


def penalty_value(spec, beta):
    return float(np.sum(penalty_terms(spec, beta)))


def _soft(z, t):
    # + 0.0 turns -0.0 into 0.0 so zeroed coordinates serialize identically
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0) + 0.0


def _out(z, res):
    return float(res) if np.ndim(z) == 0 else res


def prox_l1(z, t):
    """Soft-thresholding at level ``t``."""
    if t < 0:
        raise DomainError(f"threshold must be >= 0, got {t}")
    z = np.asarray(z, dtype=float)
    return _out(z, _soft(z, t))


def _check_step(lam, eta):
    if lam < 0:
        raise DomainError(f"lambda must be >= 0, got {lam}")
    if not eta > 0:
        raise ConfigError(f"step must be > 0, got {eta}")


def prox_scad(z, lam, eta, a=3.7):
    _check_step(lam, eta)
    if not a > 2:
        raise ConfigError(f"SCAD requires a > 2, got {a}")
    if eta >= a - 1:
        raise ConfigError(f"SCAD prox requires step < a - 1 = {a - 1}, got {eta}")
    z = np.asarray(z, dtype=float)
    az = np.abs(z)
    middle = ((a - 1) * z - np.sign(z) * a * lam * eta) / (a - 1 - eta)
    res = np.where(
        az <= lam * (1 + eta), _soft(z, eta * lam), np.where(az <= a * lam, middle, z)
    )
    return _out(z, res)


def prox_mcp(z, lam, eta, a=3.0):
    _check_step(lam, eta)
    if not a > 0:
        raise ConfigError(f"MCP requires gamma > 0, got {a}")
    if eta >= a:
        raise ConfigError(f"MCP prox requires step < gamma = {a}, got {eta}")
    z = np.asarray(z, dtype=float)
    res = np.where(np.abs(z) <= a * lam, _soft(z, eta * lam) / (1 - eta / a), z)
    return _out(z, res)


def prox(spec, z, eta):
    """Apply the penalty's scalar proximal map to every coordinate of ``z``."""
    z = np.asarray(z, dtype=float)
    if spec.family is Penalty.L1:
        if not eta > 0:
            raise ConfigError(f"step must be > 0, got {eta}")
        return prox_l1(z, eta * spec.lam)
    if spec.family is Penalty.SCAD:
        return prox_scad(z, spec.lam, eta, spec.shape)
    return prox_mcp(z, spec.lam, eta, spec.shape)


def prox_operator(spec, eta):
    """Validate ``eta`` once and return a fast vector prox ``z -> prox(spec, z, eta)``."""
    prox(spec, np.zeros(1), eta)
    lam, a = spec.lam, spec.shape
    t = eta * lam
    if spec.family is Penalty.L1 or lam == 0:
        if t == 0:
            return lambda z: z.copy()
        return lambda z: _soft(z, t)
    if spec.family is Penalty.SCAD:
        lo, hi, denom = lam * (1 + eta), a * lam, a - 1 - eta

        def scad(z):
            az = np.abs(z)
            out = z.copy()
            inner = az <= lo
            out[inner] = _soft(z[inner], t)
            mid = ~inner & (az <= hi)
            zm = z[mid]
            out[mid] = ((a - 1) * zm - np.sign(zm) * a * lam * eta) / denom
            return out

        return scad
    hi, inflate = a * lam, 1 - eta / a

    def mcp(z):
        out = z.copy()
        inner = np.abs(z) <= hi
        out[inner] = _soft(z[inner], t) / inflate
        return out

    return mcp
