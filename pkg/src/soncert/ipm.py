"""Interior-point solver for second-order cone programs over rotated cones.

Solves  min c'x  s.t.  A x = b,  x in K,  where x is a concatenation of
variable triples (a, b, c) each constrained to the rotated quadratic cone
{(a, b, c) : 2ab >= c^2, a >= 0, b >= 0}.  The solver embeds the problem
in a homogeneous self-dual model and runs a Mehrotra predictor-corrector
method with Nesterov-Todd scaling, so it detects infeasibility as well as
optimality.  Internally each rotated cone is mapped to a standard Lorentz
cone by an orthogonal change of coordinates; all reported quantities are
in the caller's rotated-cone coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

_SQRT2 = np.sqrt(2.0)

# Orthogonal involution mapping rotated-cone coordinates (a, b, c) to
# standard Lorentz coordinates (x0, x1, x2): 2ab - c^2 = x0^2 - x1^2 - x2^2.
_ROTATION = np.array(
    [
        [1.0 / _SQRT2, 1.0 / _SQRT2, 0.0],
        [1.0 / _SQRT2, -1.0 / _SQRT2, 0.0],
        [0.0, 0.0, 1.0],
    ]
)

# Dense factorization is used below this row count, sparse LU above it.
_DENSE_LIMIT = 600


@dataclass
class ConeSolve:
    """Result of a conic solve, reported in rotated-cone coordinates."""

    status: str
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    objective: float
    iterations: int
    residuals: Dict[str, float] = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def jordan_product(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Jordan product of Lorentz-cone triples, rows of (L, 3) arrays."""

    out = np.empty_like(u)
    out[:, 0] = np.einsum("ij,ij->i", u, v)
    out[:, 1] = u[:, 0] * v[:, 1] + v[:, 0] * u[:, 1]
    out[:, 2] = u[:, 0] * v[:, 2] + v[:, 0] * u[:, 2]
    return out


def jordan_solve(lam: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Solve lam o u = d rowwise for u, lam interior to the Lorentz cone."""

    det = lam[:, 0] ** 2 - lam[:, 1] ** 2 - lam[:, 2] ** 2
    u0 = (lam[:, 0] * d[:, 0] - lam[:, 1] * d[:, 1] - lam[:, 2] * d[:, 2]) / det
    out = np.empty_like(d)
    out[:, 0] = u0
    out[:, 1:] = (d[:, 1:] - u0[:, None] * lam[:, 1:]) / lam[:, 0:1]
    return out


def _jflip(u: np.ndarray) -> np.ndarray:
    # Reflection J = diag(1, -1, -1) applied rowwise.
    out = u.copy()
    out[:, 1:] = -out[:, 1:]
    return out


def _cone_residual(u: np.ndarray) -> np.ndarray:
    return u[:, 0] ** 2 - u[:, 1] ** 2 - u[:, 2] ** 2


@dataclass
class _Scaling:
    eta: np.ndarray  # (L,)
    wbar: np.ndarray  # (L, 3), unit hyperbolic norm
    vhalf: np.ndarray  # (L, 3), W = eta * (2 v v' - J)
    lam: np.ndarray  # (L, 3), lam = W z = W^-1 x


def nt_scaling(x: np.ndarray, z: np.ndarray) -> _Scaling:
    """Nesterov-Todd scaling for interior points of Lorentz cones (rowwise)."""

    # The determinant x0^2 - x1^2 - x2^2 cancels catastrophically for points
    # hugging the cone boundary and can evaluate to zero or negative noise;
    # floor it at a sliver of the squared norm so the scaling stays finite.
    res_x = _cone_residual(x)
    res_z = _cone_residual(z)
    res_x = np.maximum(res_x, 1e-18 * np.einsum("ij,ij->i", x, x))
    res_z = np.maximum(res_z, 1e-18 * np.einsum("ij,ij->i", z, z))
    xh = x / np.sqrt(res_x)[:, None]
    zh = z / np.sqrt(res_z)[:, None]
    gamma = np.sqrt((1.0 + np.einsum("ij,ij->i", xh, zh)) / 2.0)
    wbar = (xh + _jflip(zh)) / (2.0 * gamma)[:, None]
    vhalf = wbar.copy()
    vhalf[:, 0] += 1.0
    vhalf /= np.sqrt(2.0 * (wbar[:, 0] + 1.0))[:, None]
    eta = (res_x / res_z) ** 0.25
    lam = _apply_h(eta, vhalf, z)
    return _Scaling(eta=eta, wbar=wbar, vhalf=vhalf, lam=lam)


def _apply_h(scale: np.ndarray, v: np.ndarray, u: np.ndarray) -> np.ndarray:
    # scale * (2 v (v.u) - J u) rowwise; with v'Jv = 1 this is scale * H(v) u.
    dot = np.einsum("ij,ij->i", v, u)
    return scale[:, None] * (2.0 * v * dot[:, None] - _jflip(u))


def _apply_w(s: _Scaling, u: np.ndarray) -> np.ndarray:
    return _apply_h(s.eta, s.vhalf, u)


def _apply_winv(s: _Scaling, u: np.ndarray) -> np.ndarray:
    return _apply_h(1.0 / s.eta, _jflip(s.vhalf), u)


def cone_max_step(p: np.ndarray, d: np.ndarray) -> float:
    """Largest step t with p + t*d on or inside all Lorentz cones (rowwise)."""

    aq = _cone_residual(d)
    bq = 2.0 * (p[:, 0] * d[:, 0] - p[:, 1] * d[:, 1] - p[:, 2] * d[:, 2])
    cq = _cone_residual(p)
    best = np.inf
    for a, b, c in zip(aq, bq, cq):
        if abs(a) < 1e-300:
            if b < 0.0:
                best = min(best, -c / b)
            continue
        disc = b * b - 4.0 * a * c
        if a < 0.0:
            # Opens downward with q(0) > 0: exactly one positive root.
            root = (-b - np.sqrt(max(disc, 0.0))) / (2.0 * a)
            best = min(best, root)
        elif disc > 0.0 and b < 0.0:
            # Opens upward, both roots positive; numerically stable smaller root.
            best = min(best, 2.0 * c / (-b + np.sqrt(disc)))
    # First coordinate must also stay nonnegative when the quadratic allows it.
    neg = d[:, 0] < 0.0
    if np.any(neg):
        best = min(best, float(np.min(-p[neg, 0] / d[neg, 0])))
    return float(best)


def _rotate_columns(matrix: scipy.sparse.csr_matrix, num_cones: int) -> scipy.sparse.csr_matrix:
    blocks = np.broadcast_to(_ROTATION, (num_cones, 3, 3)).copy()
    rot = scipy.sparse.bsr_matrix(
        (blocks, np.arange(num_cones), np.arange(num_cones + 1)),
        shape=(3 * num_cones, 3 * num_cones),
    )
    return (matrix @ rot).tocsr()


def _rotate_vector(vec: np.ndarray) -> np.ndarray:
    return (vec.reshape(-1, 3) @ _ROTATION.T).ravel()


class _KktSolver:
    """Factorization of G = A H A' with one-step iterative refinement."""

    def __init__(self, a_mat: scipy.sparse.csr_matrix, hblocks: np.ndarray) -> None:
        num_cones = hblocks.shape[0]
        hmat = scipy.sparse.bsr_matrix(
            (hblocks, np.arange(num_cones), np.arange(num_cones + 1)),
            shape=(3 * num_cones, 3 * num_cones),
        )
        self._gmat = (a_mat @ hmat @ a_mat.T).tocsc()
        m = a_mat.shape[0]
        diag_scale = max(float(np.max(np.abs(self._gmat.diagonal()))), 1.0)
        self._dense = m <= _DENSE_LIMIT
        reg = 0.0
        while True:
            try:
                shifted = self._gmat + scipy.sparse.identity(m, format="csc") * reg if reg else self._gmat
                if self._dense:
                    self._factor = scipy.linalg.cho_factor(shifted.toarray())
                else:
                    self._factor = scipy.sparse.linalg.splu(shifted)
                break
            except (np.linalg.LinAlgError, RuntimeError):
                reg = max(reg * 100.0, 1e-14 * diag_scale)
                if reg > 1e-4 * diag_scale:
                    raise

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if self._dense:
            sol = scipy.linalg.cho_solve(self._factor, rhs)
            sol += scipy.linalg.cho_solve(self._factor, rhs - self._gmat @ sol)
        else:
            sol = self._factor.solve(rhs)
            sol += self._factor.solve(rhs - self._gmat @ sol)
        return sol


def solve_socp(
    a_rows: Sequence[int],
    a_cols: Sequence[int],
    a_vals: Sequence[float],
    b: Sequence[float],
    c: Sequence[float],
    num_cones: int,
    *,
    tol: float = 1e-8,
    max_iter: int = 200,
    verbose: bool = False,
) -> ConeSolve:
    """Solve min c'x s.t. A x = b over a product of rotated quadratic cones.

    The matrix is given in triplet form over columns grouped in consecutive
    triples (a, b, c), one rotated cone per triple.  Returns slot values,
    dual values, and residuals in the caller's coordinates.
    """

    m = len(b)
    n = 3 * num_cones
    b_ext = np.asarray(b, dtype=float)
    c_ext = np.asarray(c, dtype=float)
    if num_cones == 0:
        feasible = m == 0 or float(np.max(np.abs(b_ext))) <= tol
        return ConeSolve(
            status="optimal" if feasible else "infeasible",
            x=np.zeros(0),
            y=np.zeros(m),
            z=np.zeros(0),
            objective=0.0,
            iterations=0,
            residuals={"primal": 0.0 if m == 0 else float(np.max(np.abs(b_ext), initial=0.0))},
        )

    a_ext = scipy.sparse.csr_matrix(
        (np.asarray(a_vals, dtype=float), (np.asarray(a_rows), np.asarray(a_cols))),
        shape=(m, n),
    )

    # Internal problem: rotate cones to Lorentz form, scale rows of A to unit
    # max coefficient, then scale b and c globally (cone-invariant).
    a_int = _rotate_columns(a_ext, num_cones)
    row_max = np.maximum(np.abs(a_int).max(axis=1).toarray().ravel(), 1e-300)
    row_scale = 1.0 / row_max
    a_s = scipy.sparse.diags(row_scale) @ a_int
    a_s = a_s.tocsr()
    b_scale = max(1.0, float(np.max(np.abs(b_ext * row_scale), initial=0.0)))
    b_s = (b_ext * row_scale) / b_scale
    c_int = _rotate_vector(c_ext)
    c_scale = max(1.0, float(np.max(np.abs(c_int), initial=0.0)))
    c_s = c_int / c_scale
    a_st = a_s.T.tocsr()

    def to_caller(xv: np.ndarray, yv: np.ndarray, zv: np.ndarray, tau: float):
        x_c = _rotate_vector(xv / tau) * b_scale
        y_c = (yv * row_scale / tau) * c_scale
        z_c = _rotate_vector(zv / tau) * c_scale
        return x_c, y_c, z_c

    def caller_residuals(x_c: np.ndarray, y_c: np.ndarray, z_c: np.ndarray):
        pres = float(np.max(np.abs(a_ext @ x_c - b_ext), initial=0.0))
        dres = float(np.max(np.abs(a_ext.T @ y_c + z_c - c_ext), initial=0.0))
        pobj = float(c_ext @ x_c)
        dobj = float(b_ext @ y_c)
        comp = float(x_c @ z_c)
        return pres, dres, pobj, dobj, comp

    b_tol = tol * (1.0 + float(np.max(np.abs(b_ext), initial=0.0)))
    c_tol = tol * (1.0 + float(np.max(np.abs(c_ext), initial=0.0)))

    # Homogeneous self-dual start: unit cone points, tau = kappa = 1.
    x = np.tile(np.array([1.0, 0.0, 0.0]), num_cones)
    z = x.copy()
    y = np.zeros(m)
    tau = 1.0
    kappa = 1.0
    degree = num_cones + 1
    mu0 = (float(x @ z) + tau * kappa) / degree

    best: Optional[Tuple[float, ConeSolve]] = None
    status = "max-iterations"
    iteration = 0
    stall = 0

    for iteration in range(1, max_iter + 1):
        r_p = a_s @ x - b_s * tau
        r_d = -(a_st @ y) + c_s * tau - z
        r_g = float(b_s @ y - c_s @ x - kappa)
        mu = (float(x @ z) + tau * kappa) / degree

        x_c, y_c, z_c = to_caller(x, y, z, tau)
        pres, dres, pobj, dobj, comp = caller_residuals(x_c, y_c, z_c)
        gap = abs(pobj - dobj)
        gap_tol = tol * (1.0 + abs(pobj) + abs(dobj))
        metric = max(pres / b_tol, dres / c_tol, gap / gap_tol)
        if verbose:
            print(
                f"iter {iteration:3d}  mu {mu:9.2e}  tau {tau:8.2e}  kappa {kappa:8.2e}"
                f"  pres {pres:9.2e}  dres {dres:9.2e}  gap {gap:9.2e}  comp {comp:9.2e}"
            )
        candidate = ConeSolve(
            status="optimal",
            x=x_c,
            y=y_c,
            z=z_c,
            objective=pobj,
            iterations=iteration - 1,
            residuals={"primal": pres, "dual": dres, "gap": gap, "comp": comp, "tau": tau, "kappa": kappa},
        )
        stall = 0 if (best is None or metric < 0.99 * best[0]) else stall + 1
        if best is None or metric < best[0]:
            best = (metric, candidate)
        if pres <= b_tol and dres <= c_tol and gap <= gap_tol:
            status = "optimal"
            break
        if tau <= 1e-10 * max(1.0, kappa) and mu <= 1e-10 * mu0:
            status = "infeasible"
            break
        if stall >= 15:
            # No meaningful progress for many iterations: stuck at the
            # numerical floor, so stop and report the best point seen.
            status = "max-iterations"
            break

        scaling = nt_scaling(x.reshape(-1, 3), z.reshape(-1, 3))
        lam = scaling.lam
        eta2 = scaling.eta**2
        if not (
            np.isfinite(eta2).all()
            and np.isfinite(scaling.wbar).all()
            and np.isfinite(scaling.lam).all()
        ):
            # numerical floor: an iterate hugs a cone boundary so tightly
            # that the scaling degenerates; return the best point seen
            status = "max-iterations"
            break
        hblocks = 2.0 * eta2[:, None, None] * np.einsum(
            "ij,ik->ijk", scaling.wbar, scaling.wbar
        )
        hblocks -= eta2[:, None, None] * np.diag([1.0, -1.0, -1.0])
        try:
            kkt = _KktSolver(a_s, hblocks)
        except (np.linalg.LinAlgError, RuntimeError, ValueError):
            status = "max-iterations"
            break

        def apply_hmat(u: np.ndarray) -> np.ndarray:
            return _apply_w(scaling, _apply_w(scaling, u.reshape(-1, 3))).ravel()

        hc = apply_hmat(c_s)
        u1 = kkt.solve(b_s + a_s @ hc)
        x1 = apply_hmat(a_st @ u1) - hc
        denom = float(b_s @ u1) - float(c_s @ x1) + kappa / tau
        if not np.isfinite(denom) or denom == 0.0:
            status = "max-iterations"
            break

        def direction(d1, d2, d3, d_s, d_kappa):
            dtil = jordan_solve(lam, d_s)
            v0 = (_apply_w(scaling, dtil) + _apply_w(scaling, _apply_w(scaling, d2.reshape(-1, 3)))).ravel()
            u2 = kkt.solve(d1 - a_s @ v0)
            x2 = v0 + apply_hmat(a_st @ u2)
            dtau = (d3 + float(c_s @ x2) - float(b_s @ u2) + d_kappa / tau) / denom
            dy = u2 + dtau * u1
            dx = x2 + dtau * x1
            dz = -(a_st @ dy) + c_s * dtau - d2
            dkappa = (d_kappa - kappa * dtau) / tau
            return dx, dy, dz, dtau, dkappa

        def step_bound(dx, dz, dtau, dkappa):
            alpha = min(
                cone_max_step(x.reshape(-1, 3), dx.reshape(-1, 3)),
                cone_max_step(z.reshape(-1, 3), dz.reshape(-1, 3)),
            )
            if dtau < 0.0:
                alpha = min(alpha, -tau / dtau)
            if dkappa < 0.0:
                alpha = min(alpha, -kappa / dkappa)
            return alpha

        # Predictor: pure Newton step toward feasibility and zero gap.
        lam_sq = jordan_product(lam, lam)
        dxa, dya, dza, dtaua, dkappaa = direction(-r_p, -r_d.reshape(-1, 3).ravel(), -r_g, -lam_sq, -tau * kappa)
        alpha_aff = min(1.0, step_bound(dxa, dza, dtaua, dkappaa))
        mu_aff = (
            float((x + alpha_aff * dxa) @ (z + alpha_aff * dza))
            + (tau + alpha_aff * dtaua) * (kappa + alpha_aff * dkappaa)
        ) / degree
        sigma = min(1.0, max(0.0, (mu_aff / mu))) ** 3

        # Corrector: recenter and cancel the second-order error.
        correction = jordan_product(
            _apply_winv(scaling, dxa.reshape(-1, 3)), _apply_w(scaling, dza.reshape(-1, 3))
        )
        d_s = -lam_sq - correction
        d_s[:, 0] += sigma * mu
        d_kappa = -(tau * kappa + dtaua * dkappaa - sigma * mu)
        shrink = 1.0 - sigma
        dx, dy, dz, dtau, dkappa = direction(-shrink * r_p, -shrink * r_d, -shrink * r_g, d_s, d_kappa)
        alpha = min(1.0, 0.99 * step_bound(dx, dz, dtau, dkappa))
        if not np.isfinite(alpha) or alpha <= 1e-14:
            status = "max-iterations"
            break

        x += alpha * dx
        y += alpha * dy
        z += alpha * dz
        tau += alpha * dtau
        kappa += alpha * dkappa

    if status == "optimal":
        x_c, y_c, z_c = to_caller(x, y, z, tau)
        pres, dres, pobj, dobj, comp = caller_residuals(x_c, y_c, z_c)
        return ConeSolve(
            status="optimal",
            x=x_c,
            y=y_c,
            z=z_c,
            objective=pobj,
            iterations=iteration,
            residuals={
                "primal": pres,
                "dual": dres,
                "gap": abs(pobj - dobj),
                "comp": comp,
                "tau": tau,
                "kappa": kappa,
            },
        )
    if status == "infeasible":
        # Certificate direction: b'y > 0 rules out primal feasibility,
        # c'x < 0 rules out dual feasibility (primal unbounded below).
        y_ray = y * row_scale * (c_scale / b_scale)
        x_ray = _rotate_vector(x)
        detail = "primal" if float(b_ext @ y_ray) > 0.0 else "dual"
        return ConeSolve(
            status="infeasible",
            x=x_ray,
            y=y_ray,
            z=_rotate_vector(z),
            objective=float("nan"),
            iterations=iteration,
            residuals={"certificate": detail, "tau": tau, "kappa": kappa},
        )
    assert best is not None
    fallback = best[1]
    fallback.status = "max-iterations"
    fallback.iterations = iteration
    return fallback
