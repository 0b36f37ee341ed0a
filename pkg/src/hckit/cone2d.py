"""Planar convex cones spanned by two linearly independent generators.

The cone is ``{lam*b + bet*c : lam >= 0, bet >= 0}``; all membership and
decomposition questions reduce to 2x2 coordinate arithmetic in the basis
``{b, c}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOLERANCES, ToleranceConfig
from .errors import DegenerateCone


@dataclass(frozen=True)
class Cone2:
    """Cone generated by two independent 2-vectors ``b`` and ``c``."""

    b: np.ndarray
    c: np.ndarray
    det: float = field(init=False)

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float).reshape(2).copy()
        c = np.asarray(self.c, dtype=float).reshape(2).copy()
        b.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "det", float(b[0] * c[1] - b[1] * c[0]))


@dataclass(frozen=True)
class ConeCoords:
    lam: float
    bet: float


def make_cone(b, c, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> Cone2:
    """Validated constructor; raises :class:`DegenerateCone` on dependence."""
    cone = Cone2(np.asarray(b, dtype=float), np.asarray(c, dtype=float))
    norm = float(np.linalg.norm(cone.b) * np.linalg.norm(cone.c))
    if abs(cone.det) <= cfg.indep_tol * norm:
        raise DegenerateCone(
            f"generators are numerically dependent (|det| = {abs(cone.det):.3e})"
        )
    return cone


def positive_quadrant() -> Cone2:
    """The standard cone with generators (1, 0) and (0, 1)."""
    return make_cone((1.0, 0.0), (0.0, 1.0))


def coords(cone: Cone2, point, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> ConeCoords:
    """Coordinates of ``point`` in the basis ``{b, c}`` (Cramer's rule)."""
    p = np.asarray(point, dtype=float).reshape(2)
    norm = float(np.linalg.norm(cone.b) * np.linalg.norm(cone.c))
    if abs(cone.det) <= cfg.indep_tol * norm:
        raise DegenerateCone("cone generators are numerically dependent")
    lam = (p[0] * cone.c[1] - p[1] * cone.c[0]) / cone.det
    bet = (cone.b[0] * p[1] - cone.b[1] * p[0]) / cone.det
    return ConeCoords(float(lam), float(bet))


def contains(cone: Cone2, point, tol: float | None = None,
             cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
    """Membership test: both coordinates at least ``-tol``."""
    if tol is None:
        tol = cfg.cone_tol
    if tol < 0.0:
        raise ValueError("tol must be nonnegative")
    co = coords(cone, point, cfg)
    return co.lam >= -tol and co.bet >= -tol


def sample(cone: Cone2, radius: float, rng_seed) -> np.ndarray:
    """Draw ``lam*b + bet*c`` with both coefficients uniform on [0, radius].

    ``rng_seed`` may be an int, a seed sequence, or an existing Generator;
    an int gives a deterministic output.
    """
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) \
        else np.random.default_rng(rng_seed)
    lam, bet = rng.uniform(0.0, radius, size=2)
    return lam * cone.b + bet * cone.c
