"""Townes soliton: the positive radial solution of  Q'' + Q'/r - Q + Q^3 = 0.

The solver shoots from r = 0 with Q'(0) = 0 and bisects the initial
amplitude between the two generic fates of the trajectory:

  * amplitude too small: Q turns back up before reaching zero and drifts
    toward the constant state Q = 1 ("undershoot"),
  * amplitude too large: Q crosses zero and goes negative ("overshoot").

The separatrix between the two is the soliton.  Its squared L2 norm is the
critical interaction strength used everywhere else in the package.

All radial quadrature is trapezoidal on the same uniform grid the RK4
integrator marches on, so step halving is the only error knob.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigurationError, IntegrationError, ResolutionError

BRACKET_LO = 0.1
BRACKET_HI = 10.0

# Trajectories with no sign/slope event by r_max are classified by how fast
# the tail decays relative to the e^{-r} separatrix rate.
_TAIL_RATE = -1.0


@dataclass
class ShootResult:
    """One shot of the radial ODE, stopped at its first classification event."""

    q0: float
    classification: str        # "undershoot" (q0 too small) | "overshoot" (too large)
    event: str                 # "upturn" | "cross" | "end"
    r_event: float             # radius of the event (r_max if event == "end")
    r: np.ndarray              # radii up to and including the event sample
    q: np.ndarray              # Q values on r
    q_prime: np.ndarray        # Q' values on r


@dataclass
class TownesProfile:
    """Radial samples of the soliton with its derived constants.

    q is strictly positive and strictly decreasing; beyond the last radius
    the shot can be trusted the samples follow the analytic tail
    C r^{-1/2} e^{-r}, so integrals over [0, r_max] are well behaved.
    """

    r_max: float
    n_r: int
    q: np.ndarray
    q0: float
    a_star: float
    decay_rate: float
    q_prime: np.ndarray | None = field(default=None, repr=False)
    r_trust: float = 0.0
    tail_amplitude: float = 0.0

    @property
    def r(self) -> np.ndarray:
        return np.linspace(0.0, self.r_max, self.n_r)

    @property
    def h(self) -> float:
        return self.r_max / (self.n_r - 1)

    def derivative(self) -> np.ndarray:
        """Q' samples; exact RK4 values when available, else central differences."""
        if self.q_prime is not None:
            return self.q_prime
        return np.gradient(self.q, self.h, edge_order=2)

    def __call__(self, radii):
        """Interpolate Q at arbitrary radii (analytic tail beyond r_max)."""
        radii = np.asarray(radii, dtype=float)
        out = np.interp(radii, self.r, self.q)
        far = radii > self.r_max
        if np.any(far):
            qm = self.q[-1]
            out = np.where(
                far,
                qm * np.sqrt(self.r_max / np.maximum(radii, self.r_max))
                * np.exp(-(radii - self.r_max)),
                out,
            )
        return out


def _rk4_shoot(q0, r_max, n_r):
    """March RK4 on the uniform grid; stop at the first event.

    Returns (qs, ps, i_event, event) where i_event indexes the event sample.
    """
    n_steps = n_r - 1
    h = r_max / n_steps
    qs = np.empty(n_r)
    ps = np.empty(n_r)
    q, p = q0, 0.0
    qs[0], ps[0] = q, p
    r = 0.0
    for i in range(n_steps):
        # Q'' = Q - Q^3 - Q'/r, with the regularized limit (Q - Q^3)/2 at r = 0.
        if r == 0.0:
            k1p = 0.5 * (q - q * q * q)
        else:
            k1p = q - q * q * q - p / r
        k1q = p
        rm = r + 0.5 * h
        q2 = q + 0.5 * h * k1q
        p2 = p + 0.5 * h * k1p
        k2q = p2
        k2p = q2 - q2 * q2 * q2 - p2 / rm
        q3 = q + 0.5 * h * k2q
        p3 = p + 0.5 * h * k2p
        k3q = p3
        k3p = q3 - q3 * q3 * q3 - p3 / rm
        re = r + h
        q4 = q + h * k3q
        p4 = p + h * k3p
        k4q = p4
        k4p = q4 - q4 * q4 * q4 - p4 / re
        q = q + (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
        p = p + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        r = re
        if not (math.isfinite(q) and math.isfinite(p)):
            raise IntegrationError(
                f"non-finite state at r={r:.6g} for q0={q0!r}", last_r=r - h
            )
        qs[i + 1], ps[i + 1] = q, p
        if q < 0.0:
            return qs, ps, i + 1, "cross"
        if p > 0.0:
            return qs, ps, i + 1, "upturn"
    return qs, ps, n_steps, "end"


def shoot(q0: float, r_max: float = 20.0, n_r: int = 40000) -> ShootResult:
    """Integrate one trajectory and classify which side of the soliton it is on.

    "overshoot" means q0 is above the critical amplitude (the trajectory
    crossed zero); "undershoot" means q0 is below it (the trajectory turned
    upward, or its tail decays slower than e^{-r} at r_max).
    """
    if not q0 > 0.0:
        raise ConfigurationError("q0 must be positive")
    if n_r < 16:
        raise ConfigurationError("n_r too small")
    qs, ps, i_ev, event = _rk4_shoot(q0, r_max, n_r)
    if event == "cross":
        cls = "overshoot"
    elif event == "upturn":
        cls = "undershoot"
    else:
        # No event by r_max: compare the tail log-derivative with the
        # separatrix rate; slower decay means the growing mode is positive.
        logderiv = ps[i_ev] / qs[i_ev] if qs[i_ev] != 0.0 else 0.0
        cls = "undershoot" if logderiv > _TAIL_RATE else "overshoot"
    h = r_max / (n_r - 1)
    r = np.arange(i_ev + 1) * h
    return ShootResult(
        q0=q0,
        classification=cls,
        event=event,
        r_event=i_ev * h,
        r=r,
        q=qs[: i_ev + 1],
        q_prime=ps[: i_ev + 1],
    )


def _fit_decay(r, q, lo, hi):
    """Least-squares exponent of q ~ C r^{-1/2} e^{-rate*r} over [lo, hi]."""
    sel = (r >= lo) & (r <= hi) & (q > 0.0)
    if np.count_nonzero(sel) < 8:
        return float("nan"), float("nan")
    y = np.log(q[sel] * np.sqrt(r[sel]))
    slope, intercept = np.polyfit(r[sel], y, 1)
    return -slope, math.exp(intercept)


def solve_townes(tol: float = 1e-10, r_max: float = 20.0, n_r: int = 40000) -> TownesProfile:
    """Bisect the shooting amplitude down to relative width tol.

    Beyond the last trustworthy radius of the final midpoint trajectory the
    profile is continued by the tail form C r^{-1/2} e^{-r}, glued
    continuously, so the stored samples stay positive and decreasing all the
    way to r_max.
    """
    if not (0.0 < tol <= 1e-3):
        raise ConfigurationError("tol must lie in (0, 1e-3]")
    lo, hi = BRACKET_LO, BRACKET_HI
    cls_lo = shoot(lo, r_max, n_r).classification
    cls_hi = shoot(hi, r_max, n_r).classification
    if cls_lo != "undershoot" or cls_hi != "overshoot":
        raise ConfigurationError(
            f"no shooting bracket in [{BRACKET_LO}, {BRACKET_HI}] "
            f"(endpoints classified {cls_lo}/{cls_hi})"
        )
    while hi - lo > tol * 0.5 * (lo + hi):
        mid = 0.5 * (lo + hi)
        if shoot(mid, r_max, n_r).classification == "undershoot":
            lo = mid
        else:
            hi = mid
    q0 = 0.5 * (lo + hi)
    final = shoot(q0, r_max, n_r)

    h = r_max / (n_r - 1)
    r = np.arange(n_r) * h
    q = np.empty(n_r)
    qp = np.empty(n_r)
    m = len(final.q)
    q[:m] = final.q
    qp[:m] = final.q_prime

    # Trust the shot up to one unit before its classification event; glue the
    # analytic tail there so the contaminated stretch never enters integrals.
    r_trust = min(max(final.r_event - 1.0, 0.5 * r_max), final.r_event, r_max)
    i_trust = min(int(r_trust / h), m - 1)
    r_trust = i_trust * h
    q_tr = q[i_trust]
    if q_tr <= 0.0:
        raise ConfigurationError("trusted region collapsed; increase r_max or n_r")
    tail_c = q_tr * math.sqrt(r_trust) * math.exp(r_trust) if r_trust > 0 else q_tr
    if i_trust < n_r - 1:
        rt = r[i_trust + 1:]
        q[i_trust + 1:] = q_tr * np.sqrt(r_trust / rt) * np.exp(-(rt - r_trust))
        qp[i_trust + 1:] = -q[i_trust + 1:] * (1.0 + 0.5 / rt)

    a_star = 2.0 * math.pi * float(np.trapezoid(q * q * r, dx=h))

    fit_hi = min(15.0, r_trust - 1.0)
    fit_lo = min(8.0, 0.6 * fit_hi)
    if fit_hi - fit_lo < 1.0:
        fit_lo = max(0.5, fit_hi - 2.0)
    rate, _ = _fit_decay(r, q, fit_lo, fit_hi)

    return TownesProfile(
        r_max=r_max, n_r=n_r, q=q, q0=q0, a_star=a_star,
        decay_rate=rate, q_prime=qp, r_trust=r_trust, tail_amplitude=tail_c,
    )


def townes_identities(p: TownesProfile):
    """Residuals of K = M = P/2 for K, M, P the kinetic, mass and quartic integrals."""
    r = p.r
    h = p.h
    qp = p.derivative()
    K = 2.0 * math.pi * float(np.trapezoid(qp * qp * r, dx=h))
    M = 2.0 * math.pi * float(np.trapezoid(p.q ** 2 * r, dx=h))
    P = 2.0 * math.pi * float(np.trapezoid(p.q ** 4 * r, dx=h))
    return abs(K / M - 1.0), abs(2.0 * K / P - 1.0), abs(2.0 * M / P - 1.0)


def q_on_grid(p: TownesProfile, grid, center, scale: float = 1.0):
    """Embed Q(|x - center| / scale) / sqrt(a_star) as a 2D field.

    The embedded field has squared L2 norm scale**2 up to quadrature error;
    no renormalization is applied.
    """
    from .fields import Field  # local import to keep module layering one-way

    if scale <= 2.0 * grid.h:
        raise ResolutionError(
            f"scale {scale:.4g} under-resolved by grid spacing {grid.h:.4g}"
        )
    cx, cy = center
    xs = grid.coords
    rr = np.hypot(xs[:, None] - cx, xs[None, :] - cy) / scale
    vals = p(rr) / math.sqrt(p.a_star)
    vals[0, :] = vals[-1, :] = 0.0
    vals[:, 0] = vals[:, -1] = 0.0
    return Field(grid, vals)


def save_profile(p: TownesProfile, path):
    """Write the text export: header then one `r q` pair per line."""
    with open(path, "w") as fh:
        fh.write(f"TOWNES v1 {p.n_r} {p.r_max!r} {p.q0!r} {p.a_star!r}\n")
        for r, q in zip(p.r, p.q):
            fh.write(f"{r!r} {q!r}\n")


def load_profile(path) -> TownesProfile:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 6 or header[0] != "TOWNES" or header[1] != "v1":
            raise FormatError(f"bad profile header in {path}")
        n_r = int(header[2])
        r_max = float(header[3])
        q0 = float(header[4])
        a_star = float(header[5])
        q = np.empty(n_r)
        for j in range(n_r):
            line = fh.readline().split()
            if len(line) != 2:
                raise FormatError(f"truncated profile file {path}")
            q[j] = float(line[1])
    h = r_max / (n_r - 1)
    r = np.arange(n_r) * h
    fit_hi = min(15.0, r_max - 1.0)
    rate, _ = _fit_decay(r, q, min(8.0, 0.6 * fit_hi), fit_hi)
    return TownesProfile(r_max=r_max, n_r=n_r, q=q, q0=q0, a_star=a_star,
                         decay_rate=rate)


from .exceptions import FormatError  # noqa: E402  (referenced by load_profile)
