"""Pairs of quadratic functions as maps into the plane.

The central operation classifies the image of a straight line under
``F = (f, g)``: it is a point, a ray, a straight line, or a parabola.  For
the parabola case the implicit conic equation is recovered together with an
affine inverse parametrization, which makes preimages of image points exact
one-dimensional solves.  Restriction to affine manifolds ``x0 + range(K)``
yields another quadratic map, so every operation transfers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLERANCES, ToleranceConfig
from .conic2d import Conic2
from .errors import (DegenerateLine, DimensionMismatch, InconsistentSystem,
                     NoRealRoot, NotOnImage)
from .smallmat import min_norm_solution, null_space_basis, symmetrize


@dataclass(frozen=True)
class QuadraticForm:
    """One scalar quadratic ``q(x) = <Mx, x> + <m, x> + m0`` on R^n.

    The matrix is symmetrized on construction.  ``n = 0`` is allowed and
    makes the form constant (it arises from restricting to a 0-dimensional
    manifold).
    """

    matrix: np.ndarray
    linear: np.ndarray
    constant: float

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"matrix must be square, got {mat.shape}")
        mat = 0.5 * (mat + mat.T) if mat.size else mat.astype(float)
        lin = np.asarray(self.linear, dtype=float).reshape(-1).copy()
        if lin.shape[0] != mat.shape[0]:
            raise DimensionMismatch(
                f"linear term has length {lin.shape[0]}, matrix is {mat.shape[0]}x{mat.shape[0]}"
            )
        mat.setflags(write=False)
        lin.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "constant", float(self.constant))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, x) -> float:
        xv = np.asarray(x, dtype=float).reshape(-1)
        if xv.shape[0] != self.n:
            raise DimensionMismatch(f"point has length {xv.shape[0]}, expected {self.n}")
        return float(xv @ self.matrix @ xv + self.linear @ xv + self.constant)

    def shifted(self, offset: float) -> "QuadraticForm":
        """The form plus a constant (used for objective shifts)."""
        return QuadraticForm(self.matrix, self.linear, self.constant + offset)


@dataclass(frozen=True)
class QuadraticMap:
    """Pair ``F = (f, g)`` mapping R^n into the plane."""

    f: QuadraticForm
    g: QuadraticForm

    def __post_init__(self):
        if self.f.n != self.g.n:
            raise DimensionMismatch(
                f"components act on different spaces ({self.f.n} vs {self.g.n})"
            )

    @property
    def n(self) -> int:
        return self.f.n


def eval_map(fmap: QuadraticMap, x) -> np.ndarray:
    """Evaluate ``(f(x), g(x))`` by direct substitution."""
    return np.array([fmap.f(x), fmap.g(x)])


@dataclass(frozen=True)
class LineCoeffs:
    """Coefficients of ``F`` along ``x(t) = xbar + t*(ybar - xbar)``.

    Both image coordinates are quadratic polynomials in ``t``:
    ``(alpha t^2 + beta t + gamma, alpha_p t^2 + beta_p t + gamma_p)``.
    """

    alpha: float
    beta: float
    gamma: float
    alpha_p: float
    beta_p: float
    gamma_p: float

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma,
                         self.alpha_p, self.beta_p, self.gamma_p])

    def scale(self) -> float:
        return 1.0 + float(np.max(np.abs(self.as_array())))


def _check_distinct(xbar, ybar, cfg: ToleranceConfig):
    xb = np.asarray(xbar, dtype=float).reshape(-1)
    yb = np.asarray(ybar, dtype=float).reshape(-1)
    if xb.shape != yb.shape:
        raise DimensionMismatch("line endpoints have different lengths")
    ref = 1.0 + max(float(np.max(np.abs(xb), initial=0.0)),
                    float(np.max(np.abs(yb), initial=0.0)))
    if xb.size == 0 or float(np.max(np.abs(yb - xb))) <= cfg.line_tol * ref:
        raise DegenerateLine("line endpoints coincide")
    return xb, yb


def line_coeffs(fmap: QuadraticMap, xbar, ybar,
                cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> LineCoeffs:
    """Exact polynomial coefficients of ``F`` restricted to a line."""
    xb, yb = _check_distinct(xbar, ybar, cfg)
    if xb.shape[0] != fmap.n:
        raise DimensionMismatch(f"points have length {xb.shape[0]}, map expects {fmap.n}")
    d = yb - xb

    def one(q: QuadraticForm):
        alpha = float(d @ q.matrix @ d)
        beta = float(2.0 * (xb @ q.matrix @ d) + q.linear @ d)
        gamma = q(xb)
        return alpha, beta, gamma

    af, bf, gf = one(fmap.f)
    ag, bg, gg = one(fmap.g)
    return LineCoeffs(af, bf, gf, ag, bg, gg)


class LineImageKind(enum.Enum):
    POINT = "Point"
    RAY = "Ray"
    LINE = "Line"
    PARABOLA = "Parabola"


@dataclass(frozen=True)
class LineImage:
    """Classified image of a line with enough payload to invert it.

    Payload by kind:

    * POINT: ``point``.
    * RAY: ``apex``, unit-free ``ray_direction`` (points away from the apex),
      plus the pivot polynomial index used for parameter recovery.
    * LINE: ``line_point`` and ``line_direction`` (exact parametrization by
      the linear coefficients).
    * PARABOLA: PSD-normalized implicit ``conic`` together with the affine
      parameter map ``t = (t_row . u - t_offset) / t_slope`` valid for every
      image point ``u``.
    """

    kind: LineImageKind
    coeffs: LineCoeffs
    point: np.ndarray | None = None
    apex: np.ndarray | None = None
    ray_direction: np.ndarray | None = None
    line_point: np.ndarray | None = None
    line_direction: np.ndarray | None = None
    conic: Conic2 | None = None
    t_row: np.ndarray | None = None
    t_slope: float | None = None
    t_offset: float | None = None
    pivot: int = 0
    t_vertex: float = 0.0
    swap: bool = False

    def parameter_of(self, target) -> float:
        """Line parameter of an image point (parabola payload only)."""
        u = np.asarray(target, dtype=float).reshape(2)
        return (float(self.t_row @ u) - self.t_offset) / self.t_slope


def classify_line_image(fmap: QuadraticMap, xbar, ybar,
                        cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> LineImage:
    """Decide which of the four image shapes the line produces.

    The split is on the determinant of the quadratic/linear coefficient pairs
    of the two image polynomials.  A (near-)zero determinant means the two
    polynomials are proportional up to constants, so the image sits on a
    straight line: a point if everything non-constant vanishes, a full line
    if the shared polynomial is affine, a ray if it is genuinely quadratic.
    A nonzero determinant always produces a parabola, whose implicit equation
    is built by shearing the dominant quadratic coordinate against the other
    one and eliminating the parameter.
    """
    co = line_coeffs(fmap, xbar, ybar, cfg)
    al, be, ga = co.alpha, co.beta, co.gamma
    alp, bep, gap = co.alpha_p, co.beta_p, co.gamma_p
    m4 = max(abs(al), abs(be), abs(alp), abs(bep))
    det2 = al * bep - alp * be

    if m4 <= cfg.det_tol * co.scale():
        return LineImage(LineImageKind.POINT, co, point=np.array([ga, gap]))

    if abs(det2) <= cfg.det_tol * m4 * m4:
        # proportional rows: pivot on the larger pair for stability
        pivot = 0 if max(abs(al), abs(be)) >= max(abs(alp), abs(bep)) else 1
        if pivot == 0:
            a1, b1, c1 = al, be, ga
            a2, b2, c2 = alp, bep, gap
        else:
            a1, b1, c1 = alp, bep, gap
            a2, b2, c2 = al, be, ga
        k = (a1 * a2 + b1 * b2) / (a1 * a1 + b1 * b1)
        if abs(a1) <= cfg.det_tol * max(abs(a1), abs(b1)):
            return LineImage(
                LineImageKind.LINE, co,
                line_point=np.array([ga, gap]),
                line_direction=np.array([be, bep]),
                pivot=pivot,
            )
        t_v = -b1 / (2.0 * a1)
        s_v = (a1 * t_v + b1) * t_v + c1
        offset = c2 - k * c1
        apex_piv = np.array([s_v, k * s_v + offset])
        dir_piv = math.copysign(1.0, a1) * np.array([1.0, k])
        if pivot == 1:
            apex_piv = apex_piv[::-1]
            dir_piv = dir_piv[::-1]
        return LineImage(
            LineImageKind.RAY, co,
            apex=apex_piv, ray_direction=dir_piv,
            pivot=pivot, t_vertex=float(t_v),
        )

    # parabola: shear using the larger quadratic coefficient
    swap = abs(al) < abs(alp)
    if swap:
        qa, qb, qc = alp, bep, gap
        la, lb, lc = al, be, ga
    else:
        qa, qb, qc = al, be, ga
        la, lb, lc = alp, bep, gap
    k = la / qa
    slope = lb - k * qb          # nonzero exactly because det2 != 0
    offset = lc - k * qc
    sigma = math.copysign(1.0, qa)
    # parameter map t = (row . u - offset) / slope in original coordinates
    row = np.array([1.0, -k]) if swap else np.array([-k, 1.0])
    first = np.array([0.0, 1.0]) if swap else np.array([1.0, 0.0])
    # psi(u) = sigma * (qa*t(u)^2 + qb*t(u) + qc - first . u), expanded
    s2 = slope * slope
    A = sigma * (qa / s2) * np.outer(row, row)
    a_lin = sigma * ((qb / slope - 2.0 * qa * offset / s2) * row - first)
    a0 = sigma * (qa * offset * offset / s2 - qb * offset / slope + qc)
    conic = Conic2(A, a_lin, a0)
    return LineImage(
        LineImageKind.PARABOLA, co,
        conic=conic, t_row=row, t_slope=float(slope), t_offset=float(offset),
        swap=swap,
    )


def _polish_parameter(co: LineCoeffs, t: float, target: np.ndarray,
                      steps: int = 2) -> float:
    """Gauss-Newton refinement of the line parameter against a 2-d target."""
    for _ in range(steps):
        val = np.array([(co.alpha * t + co.beta) * t + co.gamma,
                        (co.alpha_p * t + co.beta_p) * t + co.gamma_p])
        jac = np.array([2.0 * co.alpha * t + co.beta,
                        2.0 * co.alpha_p * t + co.beta_p])
        denom = float(jac @ jac)
        if denom == 0.0:
            break
        t -= float(jac @ (val - target)) / denom
    return t


def preimage_on_line(img: LineImage, xbar, ybar, target,
                     cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> np.ndarray:
    """Point on the original line that ``F`` maps (near) the target.

    ``xbar`` and ``ybar`` must be the same endpoints the image was classified
    from.  The target has to lie on the image set within the on-curve
    tolerance, otherwise :class:`NotOnImage` is raised.  For a parabola the
    parameter is the affine inverse map (unique); for rays and lines a scalar
    quadratic/linear solve on the pivot coordinate picks the root of smaller
    magnitude.
    """
    xb, yb = _check_distinct(xbar, ybar, cfg)
    u = np.asarray(target, dtype=float).reshape(2)
    co = img.coeffs
    scale = co.scale() + float(np.max(np.abs(u)))

    if img.kind is LineImageKind.POINT:
        if float(np.max(np.abs(u - img.point))) > cfg.on_tol * scale:
            raise NotOnImage("target differs from the single image point")
        return xb.copy()

    if img.kind is LineImageKind.PARABOLA:
        resid = img.conic.evaluate(u)
        psi_scale = img.conic.coefficient_scale() * (1.0 + float(np.max(np.abs(u)))) ** 2
        if abs(resid) > cfg.on_tol * psi_scale:
            raise NotOnImage(f"target is off the parabola (psi = {resid:.3e})")
        t = img.parameter_of(u)
        t = _polish_parameter(co, t, u)
        return xb + t * (yb - xb)

    if img.kind is LineImageKind.LINE:
        d = img.line_direction
        rel = u - img.line_point
        cross = abs(rel[0] * d[1] - rel[1] * d[0]) / float(np.linalg.norm(d))
        if cross > cfg.on_tol * scale:
            raise NotOnImage("target is off the image line")
        idx = 0 if abs(d[0]) >= abs(d[1]) else 1
        t = rel[idx] / d[idx]
        t = _polish_parameter(co, t, u)
        return xb + t * (yb - xb)

    # ray
    d = img.ray_direction
    dn = float(np.linalg.norm(d))
    rel = u - img.apex
    along = float(rel @ d) / (dn * dn)
    perp = abs(rel[0] * d[1] - rel[1] * d[0]) / dn
    if perp > cfg.on_tol * scale or along * dn < -cfg.on_tol * scale:
        raise NotOnImage("target is off the image ray")
    piv = img.pivot
    a1 = co.alpha if piv == 0 else co.alpha_p
    b1 = co.beta if piv == 0 else co.beta_p
    c1 = co.gamma if piv == 0 else co.gamma_p
    s_target = u[piv]
    disc = b1 * b1 - 4.0 * a1 * (c1 - s_target)
    if disc < 0.0:
        if disc < -cfg.on_tol * scale * scale:
            raise NoRealRoot("pivot solve has no real root for an on-ray target")
        disc = 0.0
    sq = math.sqrt(disc)
    q = -0.5 * (b1 + math.copysign(sq, b1))
    roots = [q / a1] if q != 0.0 else [0.0]
    if q != 0.0 and (c1 - s_target) != 0.0:
        roots.append((c1 - s_target) / q)
    elif q != 0.0:
        roots.append(0.0)
    t = min(roots, key=abs)
    t = _polish_parameter(co, t, u)
    return xb + t * (yb - xb)


@dataclass(frozen=True)
class AffineManifold:
    """Affine set ``{x0 + K z}`` with orthonormal basis columns ``K``."""

    x0: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        x0 = np.asarray(self.x0, dtype=float).reshape(-1).copy()
        k = np.asarray(self.basis, dtype=float)
        if k.ndim != 2 or k.shape[0] != x0.shape[0]:
            raise DimensionMismatch(
                f"basis shape {k.shape} does not match point of length {x0.shape[0]}"
            )
        if k.shape[1] > 0:
            gram = k.T @ k
            if float(np.max(np.abs(gram - np.eye(k.shape[1])))) > 1e-9:
                raise ValueError("basis columns are not orthonormal")
        k = k.copy()
        x0.setflags(write=False)
        k.setflags(write=False)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "basis", k)

    @property
    def ambient_dim(self) -> int:
        return self.x0.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def embed(self, z) -> np.ndarray:
        zv = np.asarray(z, dtype=float).reshape(-1)
        if zv.shape[0] != self.dim:
            raise DimensionMismatch(f"point has length {zv.shape[0]}, expected {self.dim}")
        return self.x0 + self.basis @ zv


def restrict_to_manifold(fmap: QuadraticMap, manifold: AffineManifold,
                         cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> QuadraticMap:
    """Pull ``F`` back along ``z -> x0 + K z``; the result is again quadratic."""
    if manifold.ambient_dim != fmap.n:
        raise DimensionMismatch(
            f"manifold lives in R^{manifold.ambient_dim}, map expects R^{fmap.n}"
        )
    x0, k = manifold.x0, manifold.basis

    def one(q: QuadraticForm) -> QuadraticForm:
        mat = k.T @ q.matrix @ k
        lin = k.T @ (2.0 * (q.matrix @ x0) + q.linear)
        return QuadraticForm(symmetrize(mat) if mat.size else mat, lin, q(x0))

    return QuadraticMap(one(fmap.f), one(fmap.g))


def manifold_from_linear_system(matrix, rhs, tol: float | None = None,
                                cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> AffineManifold:
    """Solution set of ``H x = d`` as an affine manifold.

    ``x0`` is the minimum-norm solution; the basis spans ``ker H``.  An
    inconsistent system (residual beyond ``tol * (1 + |d|)``) raises
    :class:`InconsistentSystem`.  A 0-row ``H`` encodes "no constraints".
    """
    if tol is None:
        tol = cfg.rank_tol
    h = np.asarray(matrix, dtype=float)
    if h.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {h.shape}")
    d = np.asarray(rhs, dtype=float).reshape(-1)
    m, n = h.shape
    if d.shape[0] != m:
        raise DimensionMismatch(f"rhs has length {d.shape[0]}, H has {m} rows")
    if m == 0:
        return AffineManifold(np.zeros(n), np.eye(n))
    x0 = min_norm_solution(h, d, tol, cfg)
    resid = float(np.linalg.norm(h @ x0 - d))
    if resid > tol * (1.0 + float(np.linalg.norm(d))):
        raise InconsistentSystem(f"H x = d is inconsistent (residual {resid:.3e})")
    return AffineManifold(x0, null_space_basis(h, tol, cfg))
