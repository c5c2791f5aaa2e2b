"""Moments of the stationary self-similar profile and their dynamics.

The stationary profile of the rescaled flow is a normalized dilation of
the radial kernel, v(y) = C f((2m)^(1/2m) |y|) with unit mass.  Its
radial moments against |y|^b vanish on the lattice b = 2 mod 4 and
otherwise alternate sign with period 8 in b; monomial moments reduce to
a radial factor times a sphere integral.  For the evolving fourth-order
flow the even radial moments solve a lower-triangular linear ODE chain
with an explicit exponential-sum solution, built here by the coefficient
recursion and cross-checked by direct integration.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .errors import (
    AccuracyFailure,
    DomainViolation,
    InputIncomplete,
)
from .kernels import (
    KernelSpec,
    kernel_values,
    normalization_constant,
    radial_kernel_integral,
    surface_measure,
    value_at_zero,
)

__all__ = [
    "StationaryProfile",
    "stationary_profile",
    "rescale_factor",
    "moment_b",
    "moment_b_with_error",
    "moment_polynomial",
    "poly_laplacian",
    "poly_biharmonic",
    "moment_of_polynomial",
    "classify_sign",
    "cnm",
    "stationary_even_moment",
    "MomentTrajectory",
    "trajectory_closed_form",
    "trajectory_ode_integrate",
    "export_moment_table_csv",
    "export_trajectory",
]


def rescale_factor(m: int) -> float:
    """Dilation (2m)^(1/2m) turning the kernel into the stationary profile."""
    return (2.0 * m) ** (1.0 / (2.0 * m))


@dataclass(eq=False)
class StationaryProfile:
    """Radial samples of the unit-mass stationary profile v."""

    spec: KernelSpec
    cnorm: float            # v(y) = cnorm * f(lambda |y|)
    r: np.ndarray
    values: np.ndarray
    mass_error: float

    def __post_init__(self):
        self._spline = CubicSpline(self.r, self.values)

    @property
    def r_max(self) -> float:
        return float(self.r[-1])

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.where(r <= self.r[-1], self._spline(np.minimum(r, self.r[-1])), 0.0)
        return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=16)
def _stationary_profile_cached(spec: KernelSpec, r_max: float) -> StationaryProfile:
    lam = rescale_factor(spec.m)
    alpha = normalization_constant(spec)
    cnorm = lam ** spec.n * alpha

    anchor_step = 0.005
    r_anchor = np.arange(0.0, r_max + anchor_step, anchor_step)
    f_anchor, _, _ = kernel_values(spec, lam * r_anchor)
    spline = CubicSpline(r_anchor, cnorm * f_anchor)

    # sample density set by the trapezoid mass target of 1e-8; for even n
    # the integrand r^(n-1) v has a nonzero endpoint slope at 0, giving an
    # O(h^2) Euler-Maclaurin term that dictates the step
    num = 1 << 17
    if spec.n % 2 == 0:
        v0 = cnorm * value_at_zero(spec.m, spec.n)
        coeff = surface_measure(spec.n) * v0 / 12.0
        h_needed = math.sqrt(2e-9 / coeff)
        num = max(num, int(r_max / h_needed) + 1)
    r = np.linspace(0.0, r_max, num)
    vals = spline(r)
    profile = StationaryProfile(spec=spec, cnorm=cnorm, r=r, values=vals, mass_error=0.0)

    mass = surface_measure(spec.n) * np.trapz(r ** (spec.n - 1) * vals, r)
    profile.mass_error = abs(mass - 1.0)
    if profile.mass_error > 1e-8:
        raise AccuracyFailure(
            f"stationary profile mass off by {profile.mass_error:.3e}",
            estimate=profile.mass_error)
    return profile


def stationary_profile(spec: KernelSpec, r_max: float | None = None) -> StationaryProfile:
    """Unit-mass stationary profile, sampled densely enough for 1e-8 mass."""
    if r_max is None:
        # where the decay envelope reaches 1e-16
        from .bounds import decay_exponent, sigma_m
        q = decay_exponent(spec.m)
        eta_cut = (37.0 / sigma_m(spec.m)) ** (1.0 / q)
        r_max = eta_cut / rescale_factor(spec.m)
    return _stationary_profile_cached(spec, float(r_max))


# ---------------------------------------------------------------------------
# radial moments


def moment_b_with_error(spec: KernelSpec, b: float) -> tuple[float, float]:
    """Moment of |y|^b against the stationary profile, with an error bar."""
    if spec.m != 2:
        raise DomainViolation("the radial moment laws are stated for m = 2")
    if b <= -spec.n:
        raise DomainViolation(f"need b > -n for integrability, got b={b}, n={spec.n}")
    lam = rescale_factor(spec.m)
    alpha = normalization_constant(spec)
    integral, err = radial_kernel_integral(spec, spec.n - 1.0 + b)
    scale = alpha * lam ** (-b) * surface_measure(spec.n)
    return scale * integral, scale * err


def moment_b(spec: KernelSpec, b: float) -> float:
    return moment_b_with_error(spec, b)[0]


def classify_sign(weight, n: int | None = None) -> str:
    """Predicted sign of a stationary-profile moment (m = 2).

    ``weight`` is either a multi-index tuple (monomial weight y^l) or a
    real exponent b (radial weight |y|^b).  Multi-indices: zero when any
    component is odd or the degree is not a multiple of 4, positive for
    degree 0 mod 8, negative for degree 4 mod 8.  Radial exponents:
    positive on (-n, 2) and on (8k+6, 8k+10), zero on the lattice
    4N + 2, negative on (8k+2, 8k+6).
    """
    if isinstance(weight, (tuple, list)):
        ell = tuple(int(x) for x in weight)
        if any(x < 0 for x in ell):
            raise DomainViolation("multi-index components must be nonnegative")
        deg = sum(ell)
        if any(x % 2 for x in ell) or deg % 4:
            return "zero"
        return "positive" if deg % 8 == 0 else "negative"

    b = float(weight)
    if n is not None and b <= -n:
        raise DomainViolation(f"need b > -n, got b={b}, n={n}")
    eps = 1e-12
    if b < 2.0 - eps:
        return "positive"
    rem4 = b % 4.0
    if abs(rem4 - 2.0) < eps:      # the zero lattice 2, 6, 10, ...
        return "zero"
    rem8 = b % 8.0
    if 2.0 < rem8 < 6.0:
        return "negative"
    if rem8 > 6.0 or rem8 < 2.0:
        return "positive"
    return "undetermined"


def moment_polynomial(spec: KernelSpec, ell) -> float:
    """Moment of the monomial y^ell against the stationary profile.

    Exactly zero when some component is odd or the degree is not a
    multiple of 4; otherwise the radial moment of order |ell| times the
    sphere average of the direction monomial.
    """
    if spec.m != 2:
        raise DomainViolation("monomial moment laws are stated for m = 2")
    ell = tuple(int(x) for x in ell)
    if len(ell) != spec.n:
        raise DomainViolation(f"multi-index length {len(ell)} != dimension {spec.n}")
    if any(x < 0 for x in ell):
        raise DomainViolation("multi-index components must be nonnegative")
    deg = sum(ell)
    if any(x % 2 for x in ell) or deg % 4:
        return 0.0
    sphere = 2.0 * math.prod(math.gamma((x + 1) / 2.0) for x in ell) \
        / math.gamma((spec.n + deg) / 2.0)
    radial = moment_b(spec, float(deg)) / surface_measure(spec.n)
    return sphere * radial


def poly_laplacian(poly: dict) -> dict:
    """Laplacian of a polynomial given as {multi-index: coefficient}."""
    out: dict = {}
    for gamma, c in poly.items():
        for i, g in enumerate(gamma):
            if g >= 2:
                key = gamma[:i] + (g - 2,) + gamma[i + 1:]
                out[key] = out.get(key, 0.0) + c * g * (g - 1)
    return out


def poly_biharmonic(poly: dict) -> dict:
    return poly_laplacian(poly_laplacian(poly))


def moment_of_polynomial(spec: KernelSpec, poly: dict) -> float:
    return math.fsum(c * moment_polynomial(spec, gamma) for gamma, c in poly.items())


def cnm(m: int, n: int, beta: float) -> float:
    """Weighted kernel mass omega_n integral eta^(n-1-beta) f(eta) d eta.

    Strictly positive for beta in [0, n); the beta = 0 case is the
    normalization integral 1/alpha.
    """
    if not 0.0 <= beta < n:
        raise DomainViolation(f"beta must lie in [0, n), got beta={beta}, n={n}")
    spec = KernelSpec(m=m, n=n)
    integral, err = radial_kernel_integral(spec, n - 1.0 - beta)
    value = surface_measure(n) * integral
    if value <= 0:
        raise AccuracyFailure(
            f"computed weighted mass {value:.3e} is not positive", estimate=err)
    return value


# ---------------------------------------------------------------------------
# moment dynamics of the fourth-order rescaled flow


def stationary_even_moment(k: int, n: int) -> float:
    """Exact stationary value of the |y|^(2k) moment (m = 2).

    Follows from stationarity of the moment ODE chain: each step down by
    two orders multiplies by -(2k-2)(2k+n-2)(2k+n-4); odd chain members
    vanish with the |y|^2 moment.
    """
    if k < 0:
        raise DomainViolation("k must be >= 0")
    if k == 0:
        return 1.0
    if k == 1:
        return 0.0
    return -(2.0 * k - 2.0) * (2.0 * k + n - 2.0) * (2.0 * k + n - 4.0) \
        * stationary_even_moment(k - 2, n)


def _chain_coefficient(k: int, n: int) -> float:
    """Coupling -2k(2k-2)(2k+n-2)(2k+n-4) of order 2k to order 2k-4."""
    return 2.0 * k * (2.0 * k - 2.0) * (2.0 * k + n - 2.0) * (2.0 * k + n - 4.0)


@dataclass(eq=False)
class MomentTrajectory:
    """A moment of the rescaled solution as a function of slow time.

    Closed-form trajectories carry the exponential-sum coefficients
    (a_j, j = 0..k); integrated ones carry a dense interpolant instead.
    """

    n: int
    k: int | None = None
    b: float | None = None
    coefficients: tuple | None = None
    taus: np.ndarray | None = None
    values: np.ndarray | None = None
    dense: object = None

    def __post_init__(self):
        if (self.k is None) == (self.b is None):
            raise DomainViolation("exactly one of k (even weight) or b must be set")
        if self.coefficients is not None:
            a = self.coefficients
            k = self.k
            scale = max(1.0, max(abs(x) for x in a))
            if k >= 1 and abs(a[k - 1]) > 1e-9 * scale:
                raise DomainViolation("next-to-top trajectory coefficient must vanish")
            limit = stationary_even_moment(k, self.n)
            if abs(a[0] - limit) > 1e-9 * max(1.0, abs(limit)):
                raise DomainViolation("constant coefficient must equal the stationary moment")

    @property
    def weight_power(self) -> float:
        return 2.0 * self.k if self.k is not None else self.b

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        if self.coefficients is not None:
            j = np.arange(len(self.coefficients))
            out = np.asarray(self.coefficients) @ np.exp(-2.0 * j[:, None] * tau.reshape(1, -1))
            out = out.reshape(tau.shape)
        elif self.dense is not None:
            out = np.asarray(self.dense(tau))
        else:
            raise InputIncomplete("trajectory has neither coefficients nor dense data")
        return float(out) if out.ndim == 0 else out


def _coefficient_triangle(u0_moments, k: int, n: int) -> list[list[float]]:
    """Rows i = 0..k of a_j^i built by the downward recursion."""
    rows: list[list[float]] = []
    for i in range(k + 1):
        row = [0.0] * (i + 1)
        row[0] = stationary_even_moment(i, n)
        if i >= 2:
            c = _chain_coefficient(i, n)
            prev = rows[i - 2]
            for j in range(i - 1):
                row[j] = -(c / (2.0 * (i - j))) * prev[j] if j <= i - 2 else 0.0
            # the printed diagonal formula, with sum over the lower row
            row[i] = u0_moments[i] + (c / 2.0) * math.fsum(
                prev[j] / (i - j) for j in range(i - 1))
        elif i == 1:
            row[1] = u0_moments[1]
        else:
            row[0] = u0_moments[0]
        if i >= 1:
            row[i - 1] = 0.0
        rows.append(row)
    return rows


def trajectory_closed_form(u0_moments, k: int, n: int,
                           taus: np.ndarray | None = None) -> MomentTrajectory:
    """Exponential-sum solution M_{2k}(tau) = sum_j a_j exp(-2 j tau).

    ``u0_moments`` lists the initial even moments [M_0(0), M_2(0), ...,
    M_{2k}(0)] of unit-mass initial data.
    """
    if k < 0 or n < 1:
        raise DomainViolation("need k >= 0 and n >= 1")
    u0_moments = [float(x) for x in u0_moments]
    if len(u0_moments) < k + 1:
        raise InputIncomplete(
            f"need initial even moments up to order {2 * k}; got {len(u0_moments)} values")
    if abs(u0_moments[0] - 1.0) > 1e-8:
        raise DomainViolation("initial data must have unit mass")
    rows = _coefficient_triangle(u0_moments, k, n)
    traj = MomentTrajectory(n=n, k=k, coefficients=tuple(rows[k]))
    if taus is not None:
        traj.taus = np.asarray(taus, dtype=float)
        traj.values = traj(traj.taus)
    return traj


def trajectory_ode_integrate(u0_moments, k: int, n: int, tau_max: float,
                             num: int = 401, b: float | None = None,
                             lower_trajectory=None) -> MomentTrajectory:
    """Integrate the moment ODE chain numerically.

    Integer orders integrate the whole chain k, k-2, ... jointly.  For a
    fractional exponent b >= 4 the source trajectory of order b-4 must
    be supplied (e.g. a constant stationary value or another trajectory).
    """
    if tau_max <= 0:
        raise DomainViolation("tau_max must be positive")
    taus = np.linspace(0.0, tau_max, num)

    if b is not None:
        if b < 4.0:
            raise DomainViolation("the fractional chain step needs b >= 4")
        if lower_trajectory is None:
            raise InputIncomplete("fractional order needs the trajectory of order b-4")
        m0 = float(np.atleast_1d(u0_moments)[-1])
        c = b * (b - 2.0) * (b + n - 2.0) * (b + n - 4.0)

        def rhs(tau, y):
            return [-b * y[0] - c * float(lower_trajectory(tau))]

        sol = solve_ivp(rhs, (0.0, tau_max), [m0], method="DOP853",
                        rtol=1e-12, atol=1e-14, dense_output=True, t_eval=taus)
        if not sol.success:
            raise AccuracyFailure(f"moment ODE integration failed: {sol.message}")
        return MomentTrajectory(n=n, b=b, taus=taus, values=sol.y[0],
                                dense=lambda t: sol.sol(np.atleast_1d(t))[0])

    u0_moments = [float(x) for x in u0_moments]
    if len(u0_moments) < k + 1:
        raise InputIncomplete(
            f"need initial even moments up to order {2 * k}; got {len(u0_moments)} values")
    orders = list(range(k, -1, -2))          # chain members, descending
    index = {kk: i for i, kk in enumerate(orders)}
    y0 = [u0_moments[kk] for kk in orders]

    def rhs(tau, y):
        dy = np.empty_like(y)
        for kk, i in index.items():
            dy[i] = -2.0 * kk * y[i]
            if kk >= 2:
                dy[i] -= _chain_coefficient(kk, n) * y[index[kk - 2]]
        return dy

    sol = solve_ivp(rhs, (0.0, tau_max), y0, method="DOP853",
                    rtol=1e-12, atol=1e-14, dense_output=True, t_eval=taus)
    if not sol.success:
        raise AccuracyFailure(f"moment ODE integration failed: {sol.message}")
    return MomentTrajectory(n=n, k=k, taus=taus, values=sol.y[0],
                            dense=lambda t: sol.sol(np.atleast_1d(t))[0])


# ---------------------------------------------------------------------------
# exports


def export_moment_table_csv(spec: KernelSpec, b_values, path) -> None:
    """Moment table with predicted vs observed signs."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["b", "value", "err", "sign_predicted", "sign_observed"])
        for b in b_values:
            val, err = moment_b_with_error(spec, float(b))
            predicted = classify_sign(float(b), n=spec.n)
            if abs(val) <= max(err, 1e-9):
                observed = "zero"
            else:
                observed = "positive" if val > 0 else "negative"
            writer.writerow([repr(float(b)), repr(val), repr(err), predicted, observed])


def export_trajectory(traj: MomentTrajectory, csv_path, json_path=None) -> None:
    if traj.taus is None:
        raise InputIncomplete("trajectory carries no sampled grid to export")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tau", "M"])
        for t, v in zip(traj.taus, traj.values):
            writer.writerow([repr(float(t)), repr(float(v))])
    if json_path is not None:
        payload = {
            "n": traj.n,
            "weight_power": traj.weight_power,
            "coefficients": list(traj.coefficients) if traj.coefficients else None,
        }
        with open(json_path, "w") as fh:
            json.dump(payload, fh, sort_keys=True, indent=2)
            fh.write("\n")
