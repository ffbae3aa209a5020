"""Maslov-type index computations via crossing forms.

The pair index follows the half-weight endpoint convention: each interior
crossing contributes the full signature of the relative crossing form,
endpoint crossings contribute half.  The relative form at a crossing is
Gamma(second) - Gamma(first), where Gamma(Lambda)(v) = d/dt omega(v, w(t))
for any lift w(t) in Lambda(t) through v; we use the lift w = P(t) v with
P the orthogonal frame projector, whose derivative is gauge-invariant.

The Conley-Zehnder index is computed from the pair (diagonal, graph) in
the doubled space with endpoint intersections counted in full, which
reproduces the usual normalization (a small positive rotation has index
n) and takes the upper value at degenerate rotation angles.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
import scipy.optimize

from . import config
from .core import (
    HalfInt,
    Lagrangian,
    SymplecticPath,
    UnitaryLoop,
    check_brake_symmetry,
    lagrangian_diagonal,
    lagrangian_l1,
    lagrangian_l2,
    pointwise_product,
    product_form,
    standard_symplectic,
)
from .errors import (
    IrregularCrossing,
    SymmetryViolated,
    Undersampled,
    ValidationError,
)


class LagrangianPath:
    """A path of Lagrangian frames over a time grid.

    ``frame_fn(t)`` returns an orthonormal (2N, N) frame of the subspace
    at time t; ``j`` is the ambient complex structure defining the form
    <J u, v>.
    """

    def __init__(self, frame_fn, times, j):
        self.times = np.asarray(times, dtype=float)
        self._frame_fn = frame_fn
        self.j = np.asarray(j, dtype=float)

    @property
    def a(self):
        return float(self.times[0])

    @property
    def b(self):
        return float(self.times[-1])

    @classmethod
    def constant(cls, lag: Lagrangian, interval, samples=17):
        times = np.linspace(float(interval[0]), float(interval[1]), samples)
        frame = lag.frame.copy()
        return cls(lambda t: frame, times, lag.j)

    @classmethod
    def from_symplectic(cls, path: SymplecticPath, lag: Lagrangian):
        """The moving Lagrangian t -> Phi(t) . span(lag)."""
        base = lag.frame

        def frame_fn(t):
            q, _ = np.linalg.qr(path.value_at(t) @ base)
            return q

        return cls(frame_fn, path.times, lag.j)

    @classmethod
    def graph(cls, path: SymplecticPath):
        """t -> graph of Phi(t) inside R^{4n} with the product form."""
        n = path.n
        ident = np.eye(2 * n)

        def frame_fn(t):
            stacked = np.vstack([ident, path.value_at(t)])
            q, _ = np.linalg.qr(stacked)
            return q

        return cls(frame_fn, path.times, product_form(n))

    def frame_at(self, t):
        return self._frame_fn(float(t))

    def projector_at(self, t):
        f = self.frame_at(t)
        return f @ f.T

    def reversed(self):
        a, b = self.a, self.b
        fn = self._frame_fn
        return LagrangianPath(lambda t: fn(a + b - t), self.times, self.j)

    def restricted(self, a, b):
        keep = self.times[(self.times > a) & (self.times < b)]
        times = np.concatenate([[a], keep, [b]])
        return LagrangianPath(self._frame_fn, times, self.j)


@dataclasses.dataclass(frozen=True)
class Crossing:
    time: float
    dim: int
    signature: int
    regular: bool


@dataclasses.dataclass(frozen=True)
class IndexReport:
    value: HalfInt
    crossings: tuple
    endpoint_nullities: tuple


def _stacked_sigma(l1, l2, t):
    m = np.hstack([l1.frame_at(t), l2.frame_at(t)])
    return np.linalg.svd(m, compute_uv=False)


def _intersection_data(l1, l2, t, rank_tol):
    """Dimension and an orthonormal basis of span(l1) & span(l2) at t."""
    f1 = l1.frame_at(t)
    f2 = l2.frame_at(t)
    m = np.hstack([f1, f2])
    u, s, vt = np.linalg.svd(m)
    dim = int(np.sum(s < rank_tol))
    if dim == 0:
        return 0, None
    null = vt[-dim:, :].T  # columns (c1; c2) with f1 c1 ~ -f2 c2
    k = f1.shape[1]
    vecs = f1 @ null[:k, :]
    q, r = np.linalg.qr(vecs)
    keep = np.abs(np.diag(r)) > 1e-10
    basis = q[:, keep]
    return basis.shape[1], basis


def _crossing_form(l1, l2, t, basis, h, side="center"):
    """Relative crossing form Gamma(l2) - Gamma(l1) on the given basis."""
    j = l1.j
    jv = j @ basis  # columns J v_i

    def g(tt):
        diff = l2.projector_at(tt) - l1.projector_at(tt)
        return jv.T @ diff @ basis

    if side == "center":
        q = (g(t + h) - g(t - h)) / (2 * h)
    elif side == "right":
        q = (-3 * g(t) + 4 * g(t + h) - g(t + 2 * h)) / (2 * h)
    else:
        q = (3 * g(t) - 4 * g(t - h) + g(t - 2 * h)) / (2 * h)
    return (q + q.T) / 2.0


def _form_counts(q, form_tol):
    eig = np.linalg.eigvalsh(q)
    scale = max(1.0, float(np.max(np.abs(eig))) if eig.size else 1.0)
    regular = bool(np.all(np.abs(eig) > form_tol * scale))
    pos = int(np.sum(eig > 0))
    neg = int(np.sum(eig < 0))
    return pos - neg, regular


def maslov_index(lam1, lam2, *, rank_tol=None, time_tol=1e-10,
                 form_tol=1e-5, strict=True):
    """Robbin-Salamon index of the pair (lam1, lam2) over their interval.

    Interior crossings count their full signature, endpoint crossings
    half.  Crossings are located by shrinking the bracket around each dip
    of the smallest singular value of the stacked frames.  ``strict``
    raises IrregularCrossing on a singular crossing form; otherwise the
    crossing is flagged and its signature still accumulated.
    """
    if isinstance(lam1, Lagrangian):
        lam1 = LagrangianPath.constant(lam1, (lam2.a, lam2.b))
    if isinstance(lam2, Lagrangian):
        lam2 = LagrangianPath.constant(lam2, (lam1.a, lam1.b))
    if lam1.j.shape != lam2.j.shape or np.max(np.abs(lam1.j - lam2.j)) > 1e-12:
        raise ValidationError("paths live in different ambient forms")
    if abs(lam1.a - lam2.a) > 1e-12 or abs(lam1.b - lam2.b) > 1e-12:
        raise ValidationError("paths must share an interval")
    rank_tol = config.DEFAULT.tol_rank if rank_tol is None else rank_tol
    a, b = lam2.a, lam2.b
    span = b - a
    grid = np.union1d(lam1.times, lam2.times)
    sig_min = np.array([_stacked_sigma(lam1, lam2, t)[-1] for t in grid])

    h = 1e-6 * span
    crossings = []

    def eval_form(t, basis, side):
        return _crossing_form(lam1, lam2, t, basis, h, side=side)

    # endpoints first
    endpoint_nullities = []
    for t_end, side in ((a, "right"), (b, "left")):
        dim, basis = _intersection_data(lam1, lam2, t_end, rank_tol)
        endpoint_nullities.append(dim)
        if dim > 0:
            q = eval_form(t_end, basis, side)
            sig, regular = _form_counts(q, form_tol)
            if not regular and strict:
                raise IrregularCrossing(
                    f"singular crossing form at endpoint t={t_end:.6g}"
                )
            crossings.append(Crossing(t_end, dim, sig, regular))

    # interior dips of the rank indicator
    suspicion = 0.15
    interior = []
    for i in range(1, len(grid) - 1):
        if sig_min[i] >= suspicion:
            continue
        if sig_min[i] <= sig_min[i - 1] and sig_min[i] <= sig_min[i + 1]:
            interior.append(i)

    sigma_of = lambda t: float(_stacked_sigma(lam1, lam2, t)[-1])
    located = []
    for i in interior:
        tl, tr = float(grid[i - 1]), float(grid[i + 1])
        res = scipy.optimize.minimize_scalar(
            sigma_of, bounds=(tl, tr), method="bounded",
            options={"xatol": max(time_tol * span, 1e-14)},
        )
        t_hat = float(res.x)
        s_hat = float(res.fun)
        # At a crossing the dip is a kink |t - t*|, not a smooth minimum,
        # and bounded Brent stalls at its sqrt(eps)*|t| floor, well above
        # rank_tol.  Refine by intersecting secant lines fitted to the two
        # branches; near misses keep a positive floor and stay rejected.
        d = max(2e-7 * max(1.0, abs(t_hat)), 1e-12 * span)
        if 4 * d > tr - tl:
            d = (tr - tl) / 8
        for _ in range(2):
            pts = [t_hat - 2 * d, t_hat - d, t_hat + d, t_hat + 2 * d]
            sl2, sl1, sr1, sr2 = (sigma_of(t) for t in pts)
            ml = (sl1 - sl2) / d
            mr = (sr2 - sr1) / d
            if mr - ml <= 0:
                break
            t_star = (sl1 - sr1 + mr * pts[2] - ml * pts[1]) / (mr - ml)
            if not (tl < t_star < tr):
                break
            s_star = sigma_of(t_star)
            if s_star < s_hat:
                t_hat, s_hat = t_star, s_star
            d /= 8
        if s_hat > rank_tol:
            continue  # shallow dip, no actual intersection
        if t_hat - a < 10 * time_tol * span or b - t_hat < 10 * time_tol * span:
            continue  # endpoint crossing, already counted
        if any(abs(t_hat - t0) < 1e-7 * span for t0, _, _ in located):
            continue
        located.append((t_hat, tl, tr))

    for t_hat, tl, tr in sorted(located):
        dim, basis = _intersection_data(lam1, lam2, t_hat, max(rank_tol, 1e-7))
        if dim == 0:
            continue
        q = eval_form(t_hat, basis, "center")
        sig, regular = _form_counts(q, form_tol)
        if not regular:
            # a degenerate form also flattens the dip, so skip the
            # collision probe; it cannot tell tangency from collision
            if strict:
                raise IrregularCrossing(
                    f"singular crossing form at t={t_hat:.6g}"
                )
            crossings.append(Crossing(t_hat, dim, sig, regular))
            continue
        # a regular crossing has an isolated dip; a second zero hiding in
        # the same bracket means the sampling cannot separate them
        width = tr - tl
        probes = np.clip(np.concatenate([
            np.linspace(tl, t_hat - width / 50, 8),
            np.linspace(t_hat + width / 50, tr, 8),
        ]), a, b)
        side_min = min(sigma_of(t) for t in probes)
        if side_min < 1e-6:
            raise Undersampled(
                f"two crossings collide near t={t_hat:.6g}; refine the sampling"
            )
        crossings.append(Crossing(t_hat, dim, sig, regular))

    doubled = 0
    for c in crossings:
        weight = 1 if (abs(c.time - a) < 1e-9 * span or abs(c.time - b) < 1e-9 * span) else 2
        doubled += weight * c.signature
    crossings.sort(key=lambda c: c.time)
    return IndexReport(HalfInt(doubled), tuple(crossings),
                       tuple(endpoint_nullities))


def conley_zehnder_report(path: SymplecticPath, **kw):
    """Conley-Zehnder index of a based symplectic path, with crossing data.

    Computed from the pair (diagonal, graph) in the doubled space; the
    endpoint intersections enter with full weight on top of the interior
    half-weight convention, which lands on the standard normalization
    (index n for a small positive definite rotation, upper value at
    degenerate angles).
    """
    if not path.based:
        raise ValidationError("Conley-Zehnder index needs a based path")
    n = path.n
    w = lagrangian_diagonal(n)
    graph = LagrangianPath.graph(path)
    rep = maslov_index(LagrangianPath.constant(w, (path.a, path.b)), graph, **kw)
    nu_a, nu_b = rep.endpoint_nullities
    doubled = rep.value.doubled + nu_a + nu_b - 2 * n
    return IndexReport(HalfInt(doubled), rep.crossings, rep.endpoint_nullities)


def conley_zehnder(path: SymplecticPath, **kw) -> HalfInt:
    return conley_zehnder_report(path, **kw).value


def brake_maslov(path: SymplecticPath, k=1, **kw) -> HalfInt:
    """Brake index mu_k: pair index of (L_k, Phi(t) L_k) over [0, tau/2].

    The path must be based on [0, tau]; only its first half enters.
    """
    if not path.based:
        raise ValidationError("brake index needs a based path")
    if k not in (1, 2):
        raise ValidationError("k must be 1 or 2")
    if abs(path.a) > 1e-12:
        raise ValidationError("path must start at t = 0")
    half = path.restricted(0.0, path.b / 2.0)
    lag = lagrangian_l1(path.n) if k == 1 else lagrangian_l2(path.n)
    moving = LagrangianPath.from_symplectic(half, lag)
    rep = maslov_index(LagrangianPath.constant(lag, (0.0, half.b)), moving, **kw)
    return rep.value


def brake_maslov_report(path: SymplecticPath, k=1, **kw) -> IndexReport:
    if not path.based:
        raise ValidationError("brake index needs a based path")
    half = path.restricted(0.0, path.b / 2.0)
    lag = lagrangian_l1(path.n) if k == 1 else lagrangian_l2(path.n)
    moving = LagrangianPath.from_symplectic(half, lag)
    return maslov_index(LagrangianPath.constant(lag, (0.0, half.b)), moving, **kw)


def _subspace_intersection_dim(f1, f2, rank_tol):
    m = np.hstack([f1, f2])
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(s < rank_tol))


def nullities(path: SymplecticPath, rank_tol=None):
    """(nu, nu1, nu2): eigenvalue-1 multiplicity at tau and the two
    half-period Lagrangian intersection dimensions."""
    rank_tol = config.DEFAULT.tol_rank if rank_tol is None else rank_tol
    if not path.based:
        raise ValidationError("nullities need a based path")
    n = path.n
    mono = path.end_value()
    s = np.linalg.svd(mono - np.eye(2 * n), compute_uv=False)
    nu = int(np.sum(s < rank_tol * max(1.0, float(s[0]))))
    half = path.value_at((path.a + path.b) / 2.0)
    out = [nu]
    for lag in (lagrangian_l1(n), lagrangian_l2(n)):
        moved, _ = np.linalg.qr(half @ lag.frame)
        out.append(_subspace_intersection_dim(moved, lag.frame, rank_tol))
    return tuple(out)


def cz_of_product(loop: UnitaryLoop, path: SymplecticPath, **kw) -> HalfInt:
    """Conley-Zehnder index of the pointwise product loop(t) path(t)."""
    return conley_zehnder(pointwise_product(loop, path), **kw)


def mu1_of_product(loop: UnitaryLoop, path: SymplecticPath, *,
                   symmetry_tol=1e-8, **kw) -> HalfInt:
    """mu_1 of the product loop(t) path(t).

    The shift law mu1(phi Phi) = deg(phi) + mu1(Phi) needs the loop to
    satisfy phi(-t) N0 = N0 phi(t); the residual is checked up front.
    """
    res = check_brake_symmetry(loop, kind="unitary")
    if res > symmetry_tol:
        raise SymmetryViolated(
            f"loop violates phi(-t) N0 = N0 phi(t) (residual {res:.2e})"
        )
    return brake_maslov(pointwise_product(loop, path), k=1, **kw)
