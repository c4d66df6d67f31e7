"""Restriction-norm measurements: curve quadrature, matrix-free projector
norms, L^q norms, cap extremizers, ascent lower bounds, and exponent fits.

The q = 2 projector norm on a curve is the square root of the top eigenvalue
of the Gram operator G = B* W B, where B evaluates the cluster basis on the
quadrature points and W holds arclength weights.  G is never materialized:
a Lanczos iteration with full reorthogonalization drives B and B* directly.
Dense eigensolves on small instances serve as the independent oracle.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad as scipy_quad
from scipy.linalg import eigh_tridiagonal

from .bases import ClusterBasis, torus_cluster
from .curves import CurveModel
from .errors import CapError, FitError, QuadratureError

# B matrices larger than this many entries are filled in single precision
SINGLE_PRECISION_CUTOFF = 6e7


@dataclass
class QuadratureRule:
    nodes: np.ndarray  # parameter values
    weights: np.ndarray  # include the arclength density |gamma'| (or metric speed)
    points: np.ndarray  # (n, 2) curve points
    curve: CurveModel
    lambda_max: float
    panel_nodes: int
    meta: dict = field(default_factory=dict)

    @property
    def n(self):
        return len(self.nodes)

    @property
    def arclength(self):
        return float(np.sum(self.weights))

    def refined(self, factor: int = 2) -> "QuadratureRule":
        return curve_quadrature(
            self.curve,
            self.lambda_max,
            nodes_per_wavelength=self.meta["nodes_per_wavelength"] * factor,
            panel_nodes=self.panel_nodes,
            self_test=False,
        )

    def integrate(self, values) -> float:
        return float(np.real(np.sum(self.weights * values)))


def _build_rule(curve, lambda_max, nodes_per_wavelength, panel_nodes, min_nodes=64):
    a, b = curve.interval
    ts_probe = np.linspace(a, b, 257)
    speeds = np.array([curve.speed(t) for t in ts_probe])
    arclength_est = float(np.trapezoid(speeds, ts_probe))
    density = nodes_per_wavelength * max(lambda_max, 1.0) / (2.0 * math.pi)
    n_total = max(min_nodes, int(math.ceil(density * arclength_est)))
    n_panels = max(1, int(math.ceil(n_total / panel_nodes)))
    gl_x, gl_w = leggauss(panel_nodes)
    edges = np.linspace(a, b, n_panels + 1)
    nodes = []
    weights = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        ts = mid + half * gl_x
        nodes.append(ts)
        weights.append(gl_w * half * np.array([curve.speed(t) for t in ts]))
    nodes = np.concatenate(nodes)
    weights = np.concatenate(weights)
    points = np.array([curve.gamma(t) for t in nodes])
    return QuadratureRule(
        nodes=nodes,
        weights=weights,
        points=points,
        curve=curve,
        lambda_max=lambda_max,
        panel_nodes=panel_nodes,
        meta={"nodes_per_wavelength": nodes_per_wavelength, "n_panels": n_panels},
    )


def curve_quadrature(curve: CurveModel, lambda_max: float, nodes_per_wavelength: int = 12,
                     panel_nodes: int = 16, self_test: bool = True) -> QuadratureRule:
    """Composite Gauss-Legendre rule resolving oscillations up to lambda_max.

    Panels carry >= nodes_per_wavelength nodes per wavelength 2 pi/lambda_max
    of arclength (64 nodes minimum).  On construction the rule must reproduce
    an oscillatory probe integral within 0.1% of its own 2x refinement;
    otherwise it is refined (up to three times) before failing.
    """
    npw = nodes_per_wavelength
    for _attempt in range(4):
        rule = _build_rule(curve, lambda_max, npw, panel_nodes)
        if not self_test:
            return rule
        fine = rule.refined(2)

        def probe(r):
            u = r.points @ np.array([0.6, 0.8])
            return r.integrate(1.0 + np.cos(lambda_max * u))

        i0, i1 = probe(rule), probe(fine)
        scale = abs(i1) + rule.arclength
        if abs(i0 - i1) <= 1e-3 * scale:
            # independent arclength for the weight-sum contract
            arc, _err = scipy_quad(curve.speed, *curve.interval, epsabs=1e-12, epsrel=1e-12, limit=400)
            rule.meta["arclength_quad"] = arc
            rule.meta["arclength_defect"] = abs(rule.arclength - arc)
            return rule
        npw *= 2
    raise QuadratureError("quadrature self-test failed after 3 refinements")


# -- norms -----------------------------------------------------------------------


@dataclass
class NormSample:
    lam: float
    value: float
    q: object
    family: str
    meta: dict = field(default_factory=dict)


@dataclass
class ExponentFit:
    slope: float
    intercept: float
    stderr: float
    n_points: int
    residuals: np.ndarray


def _fill_b(basis: ClusterBasis, quad: QuadratureRule, dtype=None):
    if dtype is None:
        entries = basis.dim * quad.n
        if basis.family == "hermite":
            dtype = np.float32 if entries > SINGLE_PRECISION_CUTOFF else np.float64
        else:
            dtype = np.complex64 if entries > SINGLE_PRECISION_CUTOFF else np.complex128
    return basis.fill_matrix(quad.points, dtype=dtype, layout="point_major")


def _gram_matvec_factory(b_mat, weights):
    w = weights.astype(np.float64)
    complex_b = np.iscomplexobj(b_mat)
    w_cast = w.astype(b_mat.real.dtype)

    def matvec(c):
        s = b_mat @ c.astype(b_mat.dtype, copy=False)
        s *= w_cast
        if complex_b:
            y = np.conj(np.conj(s) @ b_mat)
        else:
            y = s @ b_mat
        return y.astype(np.complex128 if complex_b else np.float64)

    return matvec


def _seed_from(*parts) -> int:
    h = hashlib.sha256("|".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(h[:8], "little")


def lanczos_top(matvec, dim, seed, tol=1e-8, max_iter=500, complex_field=True):
    """Top eigenpair of a PSD operator by Lanczos with full reorthogonalization.

    Returns (theta, vector, info).  Convergence is the classical residual
    estimate |beta_j * s_last| <= tol * theta; a stagnation exit (warning
    flag in info) covers operators whose matvec noise floor sits above tol.
    """
    rng = np.random.default_rng(seed)
    dtype = np.complex128 if complex_field else np.float64
    max_iter = min(max_iter, dim)
    v = rng.standard_normal(dim) + (1j * rng.standard_normal(dim) if complex_field else 0.0)
    v = v.astype(dtype)
    v /= np.linalg.norm(v)
    vs = np.zeros((max_iter + 1, dim), dtype=dtype)
    vs[0] = v
    alphas, betas = [], []
    theta_hist = []
    info = {"iterations": 0, "residual": np.inf, "converged": False, "flag": ""}
    theta, s_vec = 0.0, np.array([1.0])
    for j in range(max_iter):
        u = matvec(vs[j])
        alpha = float(np.real(np.vdot(vs[j], u)))
        u = u - alpha * vs[j]
        if j > 0:
            u = u - betas[-1] * vs[j - 1]
        for _pass in range(2):  # full reorthogonalization, twice
            coeffs = vs[: j + 1].conj() @ u
            u = u - vs[: j + 1].T @ coeffs
        alphas.append(alpha)
        beta = float(np.linalg.norm(u))
        evals, evecs = eigh_tridiagonal(np.array(alphas), np.array(betas))
        theta = float(evals[-1])
        s_vec = evecs[:, -1]
        resid = beta * abs(s_vec[-1]) / max(theta, 1e-300)
        info["iterations"] = j + 1
        info["residual"] = resid
        info["min_ritz"] = float(evals[0])
        theta_hist.append(theta)
        if resid <= tol:
            info["converged"] = True
            break
        if beta <= 1e-14 * max(theta, 1.0):
            info["converged"] = True
            info["flag"] = "invariant-subspace"
            break
        if len(theta_hist) > 12 and abs(theta_hist[-1] - theta_hist[-8]) <= 1e-13 * abs(theta):
            info["flag"] = "stagnated-above-tol"
            break
        betas.append(beta)
        vs[j + 1] = u / beta
    else:
        info["flag"] = "max-iterations"
    vec = vs[: len(s_vec)].T @ s_vec
    vec = vec / np.linalg.norm(vec)
    return theta, vec, info


def gram_operator_norm(basis: ClusterBasis, curve: CurveModel, quad: QuadratureRule,
                       seed: Optional[int] = None, tol: float = 1e-8,
                       dtype=None, return_vector: bool = False):
    """Matrix-free L^2(M) -> L^2(curve) norm of the cluster projector.

    The norm is sqrt(top eigenvalue of the Gram operator); the Lanczos start
    vector is seeded deterministically from the instance description.
    """
    b_mat = _fill_b(basis, quad, dtype)
    matvec = _gram_matvec_factory(b_mat, quad.weights)
    if seed is None:
        seed = _seed_from(basis.family, basis.level, basis.dim, quad.n)
    complex_field = np.iscomplexobj(b_mat)
    theta, vec, info = lanczos_top(matvec, basis.dim, seed, tol=tol,
                                   complex_field=complex_field)
    sample = NormSample(
        lam=basis.level,
        value=math.sqrt(max(theta, 0.0)),
        q=2,
        family=basis.family,
        meta={
            "dim": basis.dim,
            "quad_n": quad.n,
            "iterations": info["iterations"],
            "residual": info["residual"],
            "flag": info["flag"],
            "min_ritz": info.get("min_ritz", 0.0),
            "dtype": str(b_mat.dtype),
            "trace": float(np.sum(quad.weights * np.sum(np.abs(b_mat) ** 2, axis=1))),
        },
    )
    if return_vector:
        return sample, vec, b_mat
    return sample


def gram_dense_top(basis: ClusterBasis, curve: CurveModel, quad: QuadratureRule) -> float:
    """Dense-eigensolver oracle for the top Gram eigenvalue (small instances)."""
    dtype = np.float64 if basis.family == "hermite" else np.complex128
    b_mat = basis.fill_matrix(quad.points, dtype=dtype, layout="point_major")
    if np.iscomplexobj(b_mat):
        g = (b_mat.conj().T * quad.weights) @ b_mat
    else:
        g = (b_mat.T * quad.weights) @ b_mat
    evals = np.linalg.eigvalsh(g)
    return float(evals[-1])


def sphere_latitude_norm(l: int, theta0: float) -> NormSample:
    """Closed form for a full latitude circle: the Gram is diagonal in m.

    norm^2 = 2 pi sin(theta0) max_m |Y_l^m(theta0, .)|^2, i.e.
    sin(theta0) max_m Ptilde_l^m(cos theta0)^2 in the normalized convention.
    """
    from .bases import legendre_row

    row = legendre_row(l, math.cos(theta0))
    val = math.sqrt(math.sin(theta0) * float(np.max(row**2)))
    return NormSample(
        lam=math.sqrt(l * (l + 1.0)),
        value=val,
        q=2,
        family="sphere",
        meta={"l": l, "theta0": theta0, "path": "diagonal"},
    )


def lq_restriction_norm(coeffs, basis: ClusterBasis, curve: CurveModel, q,
                        quad: QuadratureRule, b_mat=None) -> float:
    """(sum_i w_i |f(gamma(t_i))|^q)^(1/q) for f = sum_a c_a phi_a; q=inf by node max."""
    coeffs = np.asarray(coeffs)
    if q == math.inf or q == "inf":
        fine = quad.refined(4)
        bm = basis.fill_matrix(fine.points, layout="point_major")
        return float(np.max(np.abs(bm @ coeffs.astype(bm.dtype))))
    q = float(q)
    if b_mat is None:
        b_mat = _fill_b(basis, quad)
    f = b_mat @ coeffs.astype(b_mat.dtype, copy=False)
    mag = np.abs(f).astype(np.float64)
    return float(np.sum(quad.weights * mag**q) ** (1.0 / q))


# -- extremizers -------------------------------------------------------------------


def cap_extremizer_torus(lam: float, curve: CurveModel, sigma: int, c_width: float = 1.0,
                         t0: float = 0.0, q_list: Sequence = (2,),
                         window=(-1.0, 1.0), quad: Optional[QuadratureRule] = None):
    """Equal-coefficient superposition over an angular cap about the tangent.

    Cap half-width c_width * lam^(-sigma/(2 sigma + 1)) around the tangent
    direction at t0; coefficients are phase-aligned at gamma(t0) and L^2
    normalized, so the returned ratios are restriction norms per unit L^2 mass.
    """
    basis = torus_cluster(lam, window)
    v = curve.velocity(t0)
    direction = v / np.linalg.norm(v)
    width = c_width * lam ** (-sigma / (2.0 * sigma + 1.0))
    k = basis.indices.astype(np.float64)
    angles = np.arctan2(k[:, 1], k[:, 0]) - math.atan2(direction[1], direction[0])
    angles = (angles + math.pi) % (2.0 * math.pi) - math.pi
    sel = np.abs(angles) <= width
    widenings = 0
    while not np.any(sel) and widenings < 3:
        width *= 2.0
        sel = np.abs(angles) <= width
        widenings += 1
    if not np.any(sel):
        raise CapError(f"empty cap at lambda={lam}, sigma={sigma}")
    coeffs = np.zeros(basis.dim, dtype=np.complex128)
    x0 = curve.gamma(t0)
    phases = np.exp(-1j * (k[sel] @ x0))
    coeffs[sel] = phases / math.sqrt(int(np.sum(sel)))
    if quad is None:
        quad = curve_quadrature(curve, lam + window[1])
    b_mat = _fill_b(basis, quad)
    ratios = {q: lq_restriction_norm(coeffs, basis, curve, q, quad, b_mat=b_mat) for q in q_list}
    meta = {"cap_size": int(np.sum(sel)), "width": width, "widenings": widenings, "dim": basis.dim}
    return coeffs, ratios, basis, meta


def lower_bound_search(basis: ClusterBasis, curve: CurveModel, q, quad: QuadratureRule,
                       init, steps: int = 60, step_size: float = 0.1, b_mat=None):
    """Projected gradient ascent of the L^q(curve) norm over the unit L^2 sphere.

    Each accepted step cannot decrease the objective; the best ratio found is
    a certified lower bound for the operator norm, never an estimate of it.
    """
    q = float(q)
    if b_mat is None:
        b_mat = _fill_b(basis, quad)
    w = quad.weights
    c = np.asarray(init, dtype=np.complex128)
    c = c / np.linalg.norm(c)

    def value_grad(cv):
        f = b_mat @ cv.astype(b_mat.dtype, copy=False)
        mag = np.abs(f).astype(np.float64)
        val = float(np.sum(w * mag**q) ** (1.0 / q))
        # d/d(conj c) of ||f||_q: B* (w |f|^(q-2) f) up to the outer power
        weight = (w * mag ** (q - 2.0)).astype(np.float64)
        g = np.conj(np.conj(f * weight.astype(b_mat.dtype)) @ b_mat)
        return val, g.astype(np.complex128)

    best, grad = value_grad(c)
    history = [best]
    eta = step_size
    for _ in range(steps):
        cand = c + eta * grad / max(np.linalg.norm(grad), 1e-300)
        cand = cand / np.linalg.norm(cand)
        val, g2 = value_grad(cand)
        if val > best:
            if val - best < 1e-6 * best:
                c, best, grad = cand, val, g2
                break
            c, best, grad = cand, val, g2
            history.append(best)
        else:
            eta *= 0.5
            if eta < 1e-6:
                break
    return c, best, history


# -- exponent fitting ----------------------------------------------------------------


def fit_exponent(samples: Sequence[NormSample], jitter_group: int = 3) -> ExponentFit:
    """OLS fit of log(value) on log(lambda) after geometric-mean jitter pooling.

    Consecutive runs of ``jitter_group`` samples (sorted by lambda) form one
    group; pooling damps lattice-count fluctuations before the fit.
    """
    samples = sorted(samples, key=lambda s: s.lam)
    if jitter_group < 1:
        jitter_group = 1
    lams, vals = [], []
    for i in range(0, len(samples) - len(samples) % jitter_group, jitter_group):
        chunk = samples[i : i + jitter_group]
        lams.append(float(np.exp(np.mean([math.log(s.lam) for s in chunk]))))
        vals.append(float(np.exp(np.mean([math.log(s.value) for s in chunk]))))
    if len(lams) < 4:
        raise FitError(f"need >= 4 lambda groups, got {len(lams)}")
    x = np.log(np.array(lams))
    y = np.log(np.array(vals))
    design = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    dof = max(len(x) - 2, 1)
    sxx = float(np.sum((x - x.mean()) ** 2))
    stderr = math.sqrt(float(np.sum(resid**2)) / dof / sxx) if sxx > 0 else math.inf
    return ExponentFit(
        slope=float(coef[0]),
        intercept=float(coef[1]),
        stderr=stderr,
        n_points=len(x),
        residuals=resid,
    )
