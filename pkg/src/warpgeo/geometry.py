"""Intrinsic curvature checks on coordinate charts.

A chart is anything with a dim, a sample_box of shape (dim, 2), and a
metric_batch taking (N, dim) points to (N, dim, dim) metric matrices. Three
implementations live here: products of round spheres, warped products over a
rotational base, and pullbacks of explicit immersions. The finite-difference
engine differentiates the metric twice with central stencils and assembles
Christoffel symbols, the curvature tensor, Ricci, and sectional curvatures,
so every chart gets Einstein verification through one code path.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import sampling, warpfunc
from .errors import BadDimension, BadRange, OutsideDomain, SingularChartPoint

_TOL_POLE = 1e-3
_TOL_WARP_TURNING = 1e-6


# -- fibers -------------------------------------------------------------------

@dataclass(frozen=True)
class FiberSpec:
    """Product of round spheres, optionally translated off the origin.

    dims are sphere dimensions, radii their radii; offset is a constant
    extra coordinate carried by immersions (it does not enter the metric).
    Polar angles per factor: the first d-1 lie in (0, pi), the last in
    [0, 2 pi); all but the last are singular near 0 and pi.
    """

    dims: tuple
    radii: tuple
    offset: float = 0.0

    def __post_init__(self):
        if len(self.dims) != len(self.radii) or not self.dims:
            raise BadDimension("dims and radii must be equal-length, nonempty")
        if any(d < 1 for d in self.dims):
            raise BadDimension("sphere factors must have dimension >= 1")
        if any(r <= 0 for r in self.radii):
            raise BadRange("radii must be positive")

    @property
    def dim(self):
        return int(sum(self.dims))

    @property
    def factor_constants(self):
        """Ricci constant (d-1)/r^2 of each round factor."""
        return tuple((d - 1.0) / (r * r) for d, r in zip(self.dims, self.radii))

    @property
    def einstein_constant(self):
        """Common Ricci constant if the product is Einstein, else None."""
        ks = self.factor_constants
        if max(ks) - min(ks) <= 1e-12 * (1.0 + max(abs(k) for k in ks)):
            return ks[0]
        return None

    def normalized_eps(self, n):
        """eps with which this fiber fits an n-dim warped product, or None."""
        k = self.einstein_constant
        if k is None or self.dim != n - 2:
            return None
        return k / (n - 3.0)

    def ambient_radius(self):
        """Distance of the image from the origin of the flat ambient."""
        return math.sqrt(sum(r * r for r in self.radii) + self.offset ** 2)

    def metric_diag(self, Y):
        """Diagonal of the product metric at angle rows Y of shape (N, dim)."""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        out = np.empty_like(Y)
        o = 0
        for d, r in zip(self.dims, self.radii):
            block = Y[:, o:o + d]
            if d > 1:
                s = np.sin(block[:, : d - 1])
                if np.any(np.abs(s) < _TOL_POLE):
                    raise SingularChartPoint(
                        "fiber angle within %g of a coordinate pole" % _TOL_POLE
                    )
                run = np.cumprod(s * s, axis=1)
                out[:, o] = r * r
                out[:, o + 1:o + d] = r * r * run
            else:
                out[:, o] = r * r
            o += d
        return out

    def angle_box(self, pad=0.4):
        """Sampling box that keeps every non-final angle away from poles."""
        box = []
        for d in self.dims:
            box.extend([(pad, math.pi - pad)] * (d - 1))
            box.append((0.0, 2.0 * math.pi))
        return box


def offset_torus_fiber(n, m):
    """Einstein product S^m x S^{n-m-2} translated to the unit sphere.

    Radii are chosen so both factors share Ricci constant n-3, and the
    constant extra coordinate 1/sqrt(n-3) lifts the image into the unit
    sphere of the ambient R^{n+1}. Fits an n-dim warped product with eps=1.
    """
    _check_torus_range(n, m)
    r1 = math.sqrt((m - 1.0) / (n - 3.0))
    r2 = math.sqrt((n - m - 3.0) / (n - 3.0))
    return FiberSpec(dims=(m, n - m - 2), radii=(r1, r2),
                     offset=1.0 / math.sqrt(n - 3.0))


def unit_torus_fiber(n, m):
    """Einstein product S^m x S^{n-m-2} lying in the unit sphere itself.

    The unit-sum constraint r1^2 + r2^2 = 1 forces the shared Ricci constant
    down to n-4, so this fiber fits an n-dim warped product only with
    eps = (n-4)/(n-3), not with eps = 1.
    """
    _check_torus_range(n, m)
    r1 = math.sqrt((m - 1.0) / (n - 4.0))
    r2 = math.sqrt((n - m - 3.0) / (n - 4.0))
    return FiberSpec(dims=(m, n - m - 2), radii=(r1, r2))


def round_fiber(d, r=1.0):
    return FiberSpec(dims=(d,), radii=(float(r),))


def clifford_radii(n, rho):
    """Radii making S^2(r1) x S^{n-2}(r2) Einstein with constant rho."""
    if n < 5:
        raise BadDimension("product needs n >= 5 so the second factor is a sphere")
    if not rho > 0:
        raise BadRange("rho must be positive")
    return math.sqrt(1.0 / rho), math.sqrt((n - 3.0) / rho)


def _check_torus_range(n, m):
    if n < 6:
        raise BadDimension("torus fibers need n >= 6")
    if not 2 <= m <= n - 4:
        raise BadRange("m must satisfy 2 <= m <= n-4, got m=%d, n=%d" % (m, n))


# -- charts -------------------------------------------------------------------

@dataclass
class ProductChart:
    """Chart of a product of round spheres, used directly as a manifold."""

    fiber: FiberSpec
    label: str = "product"

    @property
    def dim(self):
        return self.fiber.dim

    @property
    def sample_box(self):
        return np.asarray(self.fiber.angle_box(), dtype=float)

    def metric_batch(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        diag = self.fiber.metric_diag(X)
        out = np.zeros((X.shape[0], self.dim, self.dim))
        idx = np.arange(self.dim)
        out[:, idx, idx] = diag
        return out


@dataclass
class WarpedChart:
    """Rotational chart (t, theta, y) with metric diag(1, phi'^2, phi^2 g_F).

    The base surface dt^2 + phi'(t)^2 dtheta^2 automatically carries Gauss
    curvature -phi'''/phi', so Einstein-ness of the whole chart reduces to
    the structural equation plus the fiber's Ricci constant. Singular where
    phi' vanishes; t_range must avoid turning points of the warp.
    """

    warp: warpfunc.WarpSolution
    fiber: FiberSpec
    t_range: tuple
    label: str = "warped"

    @property
    def dim(self):
        return 2 + self.fiber.dim

    @property
    def sample_box(self):
        box = [tuple(self.t_range), (0.0, 2.0 * math.pi)]
        box.extend(self.fiber.angle_box())
        return np.asarray(box, dtype=float)

    def metric_batch(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        phi, dphi, _, _ = self.warp.samples_at(X[:, 0])
        if np.any(np.abs(dphi) < _TOL_WARP_TURNING):
            raise SingularChartPoint(
                "chart degenerates at a turning point of the warp"
            )
        out = np.zeros((X.shape[0], self.dim, self.dim))
        out[:, 0, 0] = 1.0
        out[:, 1, 1] = dphi * dphi
        fdiag = self.fiber.metric_diag(X[:, 2:])
        idx = np.arange(2, self.dim)
        out[:, idx, idx] = (phi * phi)[:, None] * fdiag
        return out


@dataclass
class PullbackChart:
    """First fundamental form of an explicit immersion, J^T J pointwise."""

    immersion: object
    label: str = "pullback"

    @property
    def dim(self):
        return self.immersion.dim

    @property
    def sample_box(self):
        return np.asarray(self.immersion.sample_box, dtype=float)

    def metric_batch(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        J = self.immersion.jacobian_batch(X)
        return np.einsum("nai,naj->nij", J, J)


# -- finite-difference curvature ---------------------------------------------

def metric_jet_fd(chart, x, h=1e-3):
    """Metric with first and second coordinate derivatives at one point.

    One batched chart evaluation over the full second-order central stencil
    (1 + 2 dim + 2 dim (dim-1) points). Returns (g, dg, d2g) with
    dg[a] = d_a g and d2g[a, b] = d_a d_b g.
    """
    x = np.asarray(x, dtype=float)
    d = chart.dim
    if x.shape != (d,):
        raise BadDimension("point has shape %s, chart dim is %d" % (x.shape, d))
    pts = [x]
    for a in range(d):
        for s in (1.0, -1.0):
            p = x.copy()
            p[a] += s * h
            pts.append(p)
    pair_at = {}
    for a in range(d):
        for b in range(a + 1, d):
            pair_at[(a, b)] = len(pts)
            for sa, sb in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                p = x.copy()
                p[a] += sa * h
                p[b] += sb * h
                pts.append(p)
    G = chart.metric_batch(np.asarray(pts))
    g = G[0]
    dg = np.empty((d, d, d))
    d2g = np.empty((d, d, d, d))
    for a in range(d):
        gp, gm = G[1 + 2 * a], G[2 + 2 * a]
        dg[a] = (gp - gm) / (2.0 * h)
        d2g[a, a] = (gp - 2.0 * g + gm) / (h * h)
    for (a, b), k in pair_at.items():
        mixed = (G[k] - G[k + 1] - G[k + 2] + G[k + 3]) / (4.0 * h * h)
        d2g[a, b] = mixed
        d2g[b, a] = mixed
    return g, dg, d2g


def christoffel_from_jet(g, dg):
    """Gamma^k_{ij} = 1/2 g^{kl} (d_i g_{jl} + d_j g_{il} - d_l g_{ij})."""
    ginv = np.linalg.inv(g)
    # bracket[l, i, j] = d_i g_{jl} + d_j g_{il} - d_l g_{ij}
    bracket = (np.transpose(dg, (2, 0, 1))
               + np.transpose(dg, (2, 1, 0))
               - dg)
    return 0.5 * np.einsum("kl,lij->kij", ginv, bracket)


def christoffel_fd(chart, x, h=1e-3):
    g, dg, _ = metric_jet_fd(chart, x, h=h)
    return christoffel_from_jet(g, dg)


@dataclass
class PointCurvature:
    """Curvature data of one chart point, all indices coordinate-frame."""

    g: np.ndarray
    gamma: np.ndarray
    riemann: np.ndarray   # R^a_{bcd}
    ricci: np.ndarray     # symmetrized
    ricci_sym_defect: float

    def sectional(self, i, j):
        """Curvature of the coordinate plane (i, j)."""
        r_low = np.einsum("ae,ebcd->abcd", self.g, self.riemann)
        num = r_low[i, j, i, j]
        den = self.g[i, i] * self.g[j, j] - self.g[i, j] ** 2
        return float(num / den)

    def sectional_plane(self, u, v):
        """Curvature of the plane spanned by arbitrary vectors u, v."""
        r_low = np.einsum("ae,ebcd->abcd", self.g, self.riemann)
        num = np.einsum("abcd,a,b,c,d->", r_low, u, v, u, v)
        gu = self.g @ u
        gv = self.g @ v
        den = (u @ gu) * (v @ gv) - (u @ gv) ** 2
        return float(num / den)

    @property
    def scalar(self):
        return float(np.einsum("ab,ab->", np.linalg.inv(self.g), self.ricci))


def curvature_fd(chart, x, h=1e-3):
    """Assemble curvature at x from the finite-difference metric jet.

    Convention: R^a_{bcd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb}
    + Gamma^a_{ce} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{cb};
    Ric_{bd} = R^a_{bad}. This makes the unit round sphere come out with
    sectional curvature +1.
    """
    g, dg, d2g = metric_jet_fd(chart, x, h=h)
    ginv = np.linalg.inv(g)
    bracket = (np.transpose(dg, (2, 0, 1))
               + np.transpose(dg, (2, 1, 0))
               - dg)
    gamma = 0.5 * np.einsum("kl,lij->kij", ginv, bracket)

    # d_m Gamma^k_{ij} needs d_m g^{-1} = -g^{-1} (d_m g) g^{-1}
    dginv = -np.einsum("kp,mpq,ql->mkl", ginv, dg, ginv)
    # d_m bracket[l,i,j] = d_m d_i g_{jl} + d_m d_j g_{il} - d_m d_l g_{ij}
    dbracket = (np.transpose(d2g, (0, 3, 1, 2))
                + np.transpose(d2g, (0, 3, 2, 1))
                - d2g)
    dgamma = 0.5 * (np.einsum("mkl,lij->mkij", dginv, bracket)
                    + np.einsum("kl,mlij->mkij", ginv, dbracket))

    riem = (np.einsum("cadb->abcd", dgamma)
            - np.einsum("dacb->abcd", dgamma)
            + np.einsum("ace,edb->abcd", gamma, gamma)
            - np.einsum("ade,ecb->abcd", gamma, gamma))
    ric = np.einsum("abad->bd", riem)
    defect = float(np.max(np.abs(ric - ric.T)))
    ric = 0.5 * (ric + ric.T)
    return PointCurvature(g=g, gamma=gamma, riemann=riem, ricci=ric,
                          ricci_sym_defect=defect)


# -- pointwise scalar conditions ----------------------------------------------

def einstein_conditions_residual(params, sample, K):
    """The two scalar conditions tying base curvature to the warp.

    r1: K phi = (n-2) phi'' + rho phi (base curvature forced by the warp).
    r2: the structural equation itself, written homogeneously.
    Both vanish identically on Einstein warped products.
    """
    n, rho, eps = params.n, params.rho, params.eps
    r1 = (n - 2.0) * sample.d2phi - (K - rho) * sample.phi
    r2 = (2.0 * sample.d2phi
          + (n - 3.0) / sample.phi * (sample.dphi ** 2 - eps)
          + rho * sample.phi)
    return r1, r2


def fiber_constant_residual(params, sample, fiber):
    """Mismatch between the fiber's Ricci constant and what the warp needs.

    The warped product is Einstein only if the fiber carries
    Ric_F = mu g_F with mu = rho phi^2 + phi (Delta phi) + (n-3)|grad phi|^2,
    which along base geodesics reads rho phi^2 + 2 phi phi'' + (n-3) phi'^2
    and collapses to (n-3) eps on solutions. Nonzero output is exactly the
    obstruction to Einstein-ness for a mismatched fiber.
    """
    mu = (params.rho * sample.phi ** 2
          + 2.0 * sample.phi * sample.d2phi
          + (params.n - 3.0) * sample.dphi ** 2)
    k = fiber.einstein_constant
    if k is None:
        raise BadRange("fiber is not Einstein; no constant to compare")
    return mu - k


# -- chart builders -----------------------------------------------------------

def product_chart(n, rho):
    """S^2 x S^{n-2} with both factors tuned to Ricci constant rho."""
    r1, r2 = clifford_radii(n, rho)
    fiber = FiberSpec(dims=(2, n - 2), radii=(r1, r2))
    return ProductChart(fiber=fiber, label="clifford-n%d" % n)


def schwarzschild_chart(n, t_range=(0.35, 1.6), step=1e-3):
    sol = warpfunc.integrate(
        warpfunc.schwarzschild_params(n), t_range[1] + 0.2, step=step
    )
    return WarpedChart(warp=sol, fiber=round_fiber(n - 2),
                       t_range=t_range, label="schwarzschild-n%d" % n)


def round_chart(n, t_range=(0.25, 1.3), step=1e-3):
    """Round n-sphere presented as a warped product with phi = sin t."""
    sol = warpfunc.integrate(
        warpfunc.WarpParams(n=n, eps=1.0, rho=float(n - 1), t0=0.15,
                            phi0=math.sin(0.15), dphi0=math.cos(0.15)),
        t_range[1] + 0.15, step=step,
    )
    return WarpedChart(warp=sol, fiber=round_fiber(n - 2),
                       t_range=t_range, label="round-n%d" % n)


def flat_chart(n, t_range=(0.5, 2.5), step=1e-3):
    """Flat R^n presented as a warped product with phi = t."""
    sol = warpfunc.integrate(
        warpfunc.linear_params(n, t0=0.3), t_range[1] + 0.2, step=step
    )
    return WarpedChart(warp=sol, fiber=round_fiber(n - 2),
                       t_range=t_range, label="flat-n%d" % n)


def flat_torus_composite_chart(n, m, t_range=(0.5, 2.5), step=1e-3):
    """phi = t over a flat base with the offset torus fiber; Ricci-flat."""
    sol = warpfunc.integrate(
        warpfunc.linear_params(n, t0=0.3), t_range[1] + 0.2, step=step
    )
    return WarpedChart(warp=sol, fiber=offset_torus_fiber(n, m),
                       t_range=t_range,
                       label="flat-torus-composite-n%d-m%d" % (n, m))


def round_torus_composite_chart(n, m, t_range=(0.25, 1.3), step=1e-3):
    """phi = sin t with the unit-sum torus fiber.

    The fiber's Ricci constant is n-4 where the warp requires n-3, so this
    chart is a genuine immersed submanifold that fails the Einstein property
    with fiber-direction defect exactly -g/sin^2 t. Kept as the standing
    counterexample fixture.
    """
    sol = warpfunc.integrate(
        warpfunc.WarpParams(n=n, eps=1.0, rho=float(n - 1), t0=0.15,
                            phi0=math.sin(0.15), dphi0=math.cos(0.15)),
        t_range[1] + 0.15, step=step,
    )
    return WarpedChart(warp=sol, fiber=unit_torus_fiber(n, m),
                       t_range=t_range,
                       label="round-torus-composite-n%d-m%d" % (n, m))


def cylinder_torus_composite_chart(n, m, t_range=(0.5, 2.5), step=1e-3):
    """phi = t with the unit-sum torus fiber.

    Flat-base sibling of round_torus_composite_chart with the same fiber
    mismatch (constant n-4 against required n-3), so it fails the Einstein
    property with fiber-direction defect -g/t^2. Counterexample fixture.
    """
    sol = warpfunc.integrate(
        warpfunc.linear_params(n, t0=0.3), t_range[1] + 0.2, step=step
    )
    return WarpedChart(warp=sol, fiber=unit_torus_fiber(n, m),
                       t_range=t_range,
                       label="cylinder-torus-composite-n%d-m%d" % (n, m))


def extra_codim_params(n):
    """Warp family matched to the unit-sum torus fiber: eps = (n-4)/(n-3).

    phi0 = (n-4)/2 makes phi''(0) = 1 exactly, the smoothness condition at
    the rotational pole of the base.
    """
    if n < 6:
        raise BadDimension("matched family needs n >= 6")
    eps = (n - 4.0) / (n - 3.0)
    phi0 = (n - 4.0) / 2.0
    return warpfunc.WarpParams(n=n, eps=eps, rho=0.0, t0=0.0,
                               phi0=phi0, dphi0=0.0)


def extra_codim_chart(n, m, t_range=(0.35, 1.6), step=1e-3):
    """Warped chart pairing the eps-matched warp with the unit-sum torus."""
    sol = warpfunc.integrate(extra_codim_params(n), t_range[1] + 0.2, step=step)
    return WarpedChart(warp=sol, fiber=unit_torus_fiber(n, m),
                       t_range=t_range,
                       label="extra-codim-n%d-m%d" % (n, m))


_FAMILY_RHO = {
    "schwarzschild": lambda n, m, rho: 0.0,
    "round": lambda n, m, rho: float(n - 1),
    "flat": lambda n, m, rho: 0.0,
    "clifford": lambda n, m, rho: rho,
    "flat-torus-composite": lambda n, m, rho: 0.0,
    "round-torus-composite": lambda n, m, rho: float(n - 1),
    "cylinder-torus-composite": lambda n, m, rho: 0.0,
    "extra-codim": lambda n, m, rho: 0.0,
}


def chart_for_family(family, n, m=None, rho=None):
    """Build the named chart and return it with its target Einstein constant."""
    if family == "schwarzschild":
        chart = schwarzschild_chart(n)
    elif family == "round":
        chart = round_chart(n)
    elif family == "flat":
        chart = flat_chart(n)
    elif family == "clifford":
        if rho is None:
            raise BadRange("clifford needs rho")
        chart = product_chart(n, rho)
    elif family == "flat-torus-composite":
        if m is None:
            raise BadRange("torus composites need m")
        chart = flat_torus_composite_chart(n, m)
    elif family == "round-torus-composite":
        if m is None:
            raise BadRange("torus composites need m")
        chart = round_torus_composite_chart(n, m)
    elif family == "cylinder-torus-composite":
        if m is None:
            raise BadRange("torus composites need m")
        chart = cylinder_torus_composite_chart(n, m)
    elif family == "extra-codim":
        if m is None:
            raise BadRange("extra-codim needs m")
        chart = extra_codim_chart(n, m)
    else:
        raise BadRange("unknown family %r" % family)
    return chart, _FAMILY_RHO[family](n, m, rho)


# -- verification driver -------------------------------------------------------

@dataclass
class CurvatureReport:
    label: str
    dim: int
    rho: float
    h: float
    n_points: int
    einstein_max: float
    ricci_sym_max: float
    richardson_max: float
    sectional_min: float
    sectional_max: float
    tol: float
    provenance: str = "finite-difference"

    @property
    def passed(self):
        return self.einstein_max <= self.tol

    @property
    def sectional_spread(self):
        return self.sectional_max - self.sectional_min

    def as_dict(self):
        return {
            "label": self.label,
            "dim": self.dim,
            "rho": self.rho,
            "h": self.h,
            "n_points": self.n_points,
            "einstein_max": self.einstein_max,
            "ricci_sym_max": self.ricci_sym_max,
            "richardson_max": self.richardson_max,
            "sectional_min": self.sectional_min,
            "sectional_max": self.sectional_max,
            "sectional_spread": self.sectional_spread,
            "tol": self.tol,
            "passed": self.passed,
            "provenance": self.provenance,
        }


def einstein_residual_at(chart, x, rho, h=1e-3):
    """max |Ric - rho g| / (1 + max |g|) at one point."""
    pc = curvature_fd(chart, x, h=h)
    dev = np.max(np.abs(pc.ricci - rho * pc.g))
    return float(dev / (1.0 + np.max(np.abs(pc.g)))), pc


def sample_points(chart, n_points, seed=0, margin=None, h=1e-3):
    box = np.array(chart.sample_box, dtype=float)
    if margin is None:
        margin = 3.0 * h
    box[:, 0] += margin
    box[:, 1] -= margin
    if np.any(box[:, 1] <= box[:, 0]):
        raise OutsideDomain("sample box collapses under the stencil margin")
    return sampling.box(n_points, box, seed=seed)


def verify_einstein(chart, rho, n_points=24, h=1e-3, tol=5e-5, seed=0,
                    richardson=False, max_planes=10):
    """Sample the chart and bound the Einstein defect pointwise.

    richardson=True recomputes each point at h/2 and reports the largest
    Ricci shift between the two resolutions, an empirical error estimate
    for the finite differences themselves.
    """
    pts = sample_points(chart, n_points, seed=seed, h=h)
    d = chart.dim
    pairs = [(i, j) for i in range(d) for j in range(i + 1, d)]
    if len(pairs) > max_planes:
        sel = np.random.default_rng(seed).choice(len(pairs), max_planes,
                                                 replace=False)
        pairs = [pairs[int(k)] for k in sel]
    e_max = 0.0
    sym_max = 0.0
    rich_max = 0.0
    s_min = math.inf
    s_max = -math.inf
    for x in pts:
        resid, pc = einstein_residual_at(chart, x, rho, h=h)
        e_max = max(e_max, resid)
        sym_max = max(sym_max, pc.ricci_sym_defect)
        for (i, j) in pairs:
            k = pc.sectional(i, j)
            s_min = min(s_min, k)
            s_max = max(s_max, k)
        if richardson:
            pc2 = curvature_fd(chart, x, h=h / 2.0)
            rich_max = max(rich_max, float(np.max(np.abs(pc.ricci - pc2.ricci))))
    return CurvatureReport(
        label=getattr(chart, "label", chart.__class__.__name__),
        dim=d, rho=rho, h=h, n_points=len(pts),
        einstein_max=e_max, ricci_sym_max=sym_max,
        richardson_max=rich_max if richardson else float("nan"),
        sectional_min=s_min, sectional_max=s_max, tol=tol,
    )
