"""Relativistic interaction of interpenetrating media.

Convention table
----------------
The imaginary-time 4-vectors (a1, a2, a3, a4 = i*a_t) are stored as real
arrays ``[a1, a2, a3, a_t]`` with the inner product

    <a, b> = a1 b1 + a2 b2 + a3 b3 - a_t b_t

so every formula written with sums over k = 1..4 carries over unchanged:

=============================  =========================================
imaginary-time form            real storage
=============================  =========================================
x_k = (x, y, z, ict)           (x, y, z; ct)
V_k = (gamma v, ic gamma)      (gamma v; c gamma)
f_k = (f, (i/c) f.v)           (f; f.v / c)
a_k b_k                        <a, b>
=============================  =========================================

All functions broadcast over leading axes.  Force 4-densities come in two
versions that differ only in which velocity feeds the temporal component:
the ``"f"`` version uses the velocity of the medium exerting the force, the
``"g"`` version the velocity of the medium receiving it.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

__all__ = [
    "SuperluminalError",
    "fourvec",
    "spatial",
    "temporal",
    "minkowski",
    "gamma",
    "four_velocity",
    "boost",
    "velocity_in_frame",
    "CompositeFrame",
    "composite_frame",
    "MediumSample",
    "force4",
    "force4_f",
    "force4_g",
    "reflect",
    "reaction_closed",
    "reaction_oracle",
    "ExchangeParams",
    "TriExchangeParams",
    "exchange_rhs_two",
    "PairwiseForces",
    "exchange_rhs_three",
    "tensor_source_two",
    "combined_source_two",
    "tensor_source_three",
    "combined_source_three",
    "lorentz_force_split",
    "vacuum_emt_source",
    "random_velocities",
    "validation_suite",
]


class SuperluminalError(ValueError):
    pass


def fourvec(space, time) -> np.ndarray:
    space = np.asarray(space, dtype=float)
    time = np.asarray(time, dtype=float)
    return np.concatenate([space, time[..., None]], axis=-1)


def spatial(a):
    return np.asarray(a)[..., :3]


def temporal(a):
    return np.asarray(a)[..., 3]


def _dot3(a, b):
    return np.einsum("...i,...i->...", a, b)


def minkowski(a, b):
    """<a, b> = a.b (spatial) - a_t b_t."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return _dot3(a[..., :3], b[..., :3]) - a[..., 3] * b[..., 3]


def _check_speed(v, c):
    v = np.asarray(v, dtype=float)
    if np.any(_dot3(v, v) >= c * c):
        raise SuperluminalError("velocity must be strictly slower than light")
    return v


def gamma(v, c: float = 1.0):
    v = _check_speed(v, c)
    return 1.0 / np.sqrt(1.0 - _dot3(v, v) / c**2)


def four_velocity(v, c: float = 1.0) -> np.ndarray:
    g = gamma(v, c)
    return fourvec(g[..., None] * np.asarray(v, dtype=float), c * g)


def boost(a, boost_v, c: float = 1.0) -> np.ndarray:
    """Components of ``a`` in the frame moving with velocity ``boost_v`` (pure boost)."""
    a = np.asarray(a, dtype=float)
    beta = _check_speed(boost_v, c) / c
    b2 = _dot3(beta, beta)
    g = 1.0 / np.sqrt(1.0 - b2)
    x, t = a[..., :3], a[..., 3]
    bx = _dot3(beta, x)
    # (gamma - 1)/beta^2 written as gamma^2/(gamma + 1) stays finite at beta = 0
    k = g * g / (g + 1.0)
    t_new = g * (t - bx)
    x_new = x + (k * bx - g * t)[..., None] * beta
    return fourvec(x_new, t_new)


def velocity_in_frame(v, boost_v, c: float = 1.0) -> np.ndarray:
    V = boost(four_velocity(v, c), boost_v, c)
    return c * spatial(V) / temporal(V)[..., None]


@dataclass(frozen=True)
class CompositeFrame:
    """The frame in which the two media move with opposite velocities."""

    v_ring: np.ndarray
    V_ring: np.ndarray
    gamma_ring: np.ndarray


def composite_frame(vM, vPhi, c: float = 1.0) -> CompositeFrame:
    """v = (V^M + V^Phi)_spatial / (gamma^M + gamma^Phi) with its gamma from the
    closed form (gM + gP) / sqrt(2 + 2 gM gP - 2 gM gP vM.vPhi / c^2)."""
    vM, vPhi = np.asarray(vM, dtype=float), np.asarray(vPhi, dtype=float)
    gM, gP = gamma(vM, c), gamma(vPhi, c)
    v_ring = (gM[..., None] * vM + gP[..., None] * vPhi) / (gM + gP)[..., None]
    g_ring = (gM + gP) / np.sqrt(2.0 + 2.0 * gM * gP - 2.0 * gM * gP * _dot3(vM, vPhi) / c**2)
    V_ring = fourvec(g_ring[..., None] * v_ring, c * g_ring)
    return CompositeFrame(v_ring, V_ring, g_ring)


@dataclass(frozen=True)
class MediumSample:
    v: np.ndarray
    f3: np.ndarray | None = None


def force4(f3, v_temporal, c: float = 1.0) -> np.ndarray:
    """(f; f . v / c) with ``v_temporal`` the velocity feeding the time component."""
    f3 = np.asarray(f3, dtype=float)
    v = _check_speed(v_temporal, c)
    return fourvec(f3, _dot3(f3, v) / c)


def force4_f(sample: MediumSample, c: float = 1.0) -> np.ndarray:
    """f-version: temporal part uses the acting medium's own velocity."""
    return force4(sample.f3, sample.v, c)


def force4_g(g3, v_other, c: float = 1.0) -> np.ndarray:
    """g-version: temporal part uses the other medium's velocity."""
    return force4(g3, v_other, c)


def reflect(a, V_ring, c: float = 1.0) -> np.ndarray:
    """-a - (2/c^2) <a, V> V: spatial negation in the rest frame of V."""
    a = np.asarray(a, dtype=float)
    return -a - (2.0 / c**2) * minkowski(a, V_ring)[..., None] * V_ring


def reaction_closed(fM4, frame: CompositeFrame, c: float = 1.0) -> np.ndarray:
    """Counter-force 4-density from the closed-form action-reaction law.

    The map is an involution, so the same call recovers the action from the
    reaction; both force versions use it.
    """
    return reflect(fM4, frame.V_ring, c)


def reaction_oracle(f3, vM, vPhi, c: float = 1.0, version: str = "f") -> np.ndarray:
    """Brute-force reaction: boost into the composite frame, flip the
    spatial part, keep the temporal part, boost back."""
    frame = composite_frame(vM, vPhi, c)
    v_t = vM if version == "f" else vPhi
    a = boost(force4(f3, v_t, c), frame.v_ring, c)
    a_flipped = fourvec(-spatial(a), temporal(a))
    return boost(a_flipped, -frame.v_ring, c)


# -- energy exchange ---------------------------------------------------------


def _in_unit(name, x):
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x}")


@dataclass(frozen=True)
class ExchangeParams:
    k_M: float = 0.5
    k_Phi: float = 0.5
    kappa_M: float = 0.5
    kappa_Phi: float = 0.5

    def __post_init__(self):
        for name, val in asdict(self).items():
            _in_unit(name, val)
        if abs(self.k_M + self.k_Phi - 1.0) > 1e-14 or abs(self.kappa_M + self.kappa_Phi - 1.0) > 1e-14:
            raise ValueError("k_M + k_Phi and kappa_M + kappa_Phi must both equal 1")

    @classmethod
    def from_k(cls, k_M: float, kappa_M: float | None = None) -> "ExchangeParams":
        kappa_M = k_M if kappa_M is None else kappa_M
        return cls(k_M, 1.0 - k_M, kappa_M, 1.0 - kappa_M)

    def pair(self, version: str):
        """(coefficient of M, coefficient of Phi) for the requested version."""
        return (self.k_M, self.k_Phi) if version == "f" else (self.kappa_M, self.kappa_Phi)


_TRI_PAIRS = (("1Phi", "Phi1"), ("2Phi", "Phi2"), ("12", "21"))


@dataclass(frozen=True)
class TriExchangeParams:
    k_1Phi: float = 0.5
    k_Phi1: float = 0.5
    k_2Phi: float = 0.5
    k_Phi2: float = 0.5
    k_12: float = 0.5
    k_21: float = 0.5
    kappa_1Phi: float = 0.5
    kappa_Phi1: float = 0.5
    kappa_2Phi: float = 0.5
    kappa_Phi2: float = 0.5
    kappa_12: float = 0.5
    kappa_21: float = 0.5

    def __post_init__(self):
        for name, val in asdict(self).items():
            _in_unit(name, val)
        for prefix in ("k", "kappa"):
            for a, b in _TRI_PAIRS:
                total = getattr(self, f"{prefix}_{a}") + getattr(self, f"{prefix}_{b}")
                if abs(total - 1.0) > 1e-14:
                    raise ValueError(f"{prefix}_{a} + {prefix}_{b} must equal 1")

    def coeffs(self, version: str) -> dict:
        prefix = "k" if version == "f" else "kappa"
        return {pair: getattr(self, f"{prefix}_{pair}") for ab in _TRI_PAIRS for pair in ab}

    @classmethod
    def symmetric(cls, k_Phi: float, kappa_M: float, k_12: float = 0.5, kappa_12: float = 0.5):
        """Identical coupling of the vacuum to both media."""
        k_M, kappa_Phi = 1.0 - k_Phi, 1.0 - kappa_M
        return cls(k_M, k_Phi, k_M, k_Phi, k_12, 1.0 - k_12,
                   kappa_M, kappa_Phi, kappa_M, kappa_Phi, kappa_12, 1.0 - kappa_12)


def _version(version):
    if version not in ("f", "g"):
        raise ValueError("version must be 'f' or 'g'")
    return version


def _power(force_3, v_source, v_target, version):
    """The energy-exchange term c * (temporal part) of a force 4-density."""
    v = v_source if version == "f" else v_target
    return _dot3(force_3, v)


def exchange_rhs_two(params: ExchangeParams, M: MediumSample, Phi: MediumSample,
                     c: float = 1.0, version: str = "f"):
    """Right-hand sides of the two energy balances.

    f-version::

        rhs_M   = -k_M f^M . v^M + k_Phi f^Phi . v^Phi
        rhs_Phi = -k_Phi f^Phi . v^Phi + k_M f^M . v^M

    The g-version uses kappa and dots each force with the receiving medium's
    velocity.  ``M.f3`` is the force M exerts on Phi; the counter-force is
    the spatial part of its reaction unless ``Phi.f3`` is given.
    """
    version = _version(version)
    cM, cP = params.pair(version)
    fM3 = np.asarray(M.f3, dtype=float)
    if Phi.f3 is None:
        frame = composite_frame(M.v, Phi.v, c)
        v_t = M.v if version == "f" else Phi.v
        fP3 = spatial(reaction_closed(force4(fM3, v_t, c), frame, c))
    else:
        fP3 = np.asarray(Phi.f3, dtype=float)
    wM = _power(fM3, M.v, Phi.v, version)
    wP = _power(fP3, Phi.v, M.v, version)
    return -cM * wM + cP * wP, -cP * wP + cM * wM


@dataclass(frozen=True)
class PairwiseForces:
    """Velocities of media 1, 2 and Phi, and the action forces
    f^{1Phi} (1 on Phi), f^{2Phi} (2 on Phi) and f^{12} (1 on 2)."""

    v1: np.ndarray
    v2: np.ndarray
    v_phi: np.ndarray
    f_1phi: np.ndarray
    f_2phi: np.ndarray
    f_12: np.ndarray

    def four_forces(self, c: float = 1.0, version: str = "f") -> dict:
        """All six 4-forces; the counter-forces come from the reaction law."""
        version = _version(version)
        pairs = {
            ("1Phi", "Phi1"): (self.f_1phi, self.v1, self.v_phi),
            ("2Phi", "Phi2"): (self.f_2phi, self.v2, self.v_phi),
            ("12", "21"): (self.f_12, self.v1, self.v2),
        }
        out = {}
        for (fwd, back), (f3, v_src, v_dst) in pairs.items():
            frame = composite_frame(v_src, v_dst, c)
            act = force4(f3, v_src if version == "f" else v_dst, c)
            out[fwd] = act
            out[back] = reaction_closed(act, frame, c)
        return out


def exchange_rhs_three(params: TriExchangeParams, forces: PairwiseForces,
                       c: float = 1.0, version: str = "f"):
    """Energy-balance right-hand sides for media 1, 2 and Phi.

    For each force x^{ab} the term k_ab * P_ab (with P_ab the exchange power
    of that force) leaves medium a and enters medium b's partner equation,
    so the three values always sum to zero.
    """
    version = _version(version)
    k = params.coeffs(version)
    f4 = forces.four_forces(c, version)
    vel = {"1": forces.v1, "2": forces.v2, "Phi": forces.v_phi}
    src_dst = {
        "1Phi": ("1", "Phi"), "Phi1": ("Phi", "1"),
        "2Phi": ("2", "Phi"), "Phi2": ("Phi", "2"),
        "12": ("1", "2"), "21": ("2", "1"),
    }
    P = {}
    for name, (a, b) in src_dst.items():
        P[name] = k[name] * _power(spatial(f4[name]), vel[a], vel[b], version)
    rhs1 = -P["1Phi"] + P["Phi1"] - P["12"] + P["21"]
    rhs2 = -P["2Phi"] + P["Phi2"] - P["21"] + P["12"]
    rhs_phi = -P["Phi1"] + P["1Phi"] - P["Phi2"] + P["2Phi"]
    return rhs1, rhs2, rhs_phi


# -- energy-momentum tensor sources -----------------------------------------


def tensor_source_two(params: ExchangeParams, fM4, fPhi4, version: str = "f"):
    """Divergences of the two medium tensors:
    (cM fM - cP fPhi, cP fPhi - cM fM) with (cM, cP) = (k_M, k_Phi) or (kappa_M, kappa_Phi)."""
    cM, cP = params.pair(_version(version))
    fM4, fPhi4 = np.asarray(fM4, dtype=float), np.asarray(fPhi4, dtype=float)
    src_M = cM * fM4 - cP * fPhi4
    return src_M, cP * fPhi4 - cM * fM4


def combined_source_two(params: ExchangeParams, frame: CompositeFrame, force4_known, c: float = 1.0,
                        version: str = "f"):
    """Vacuum tensor source after eliminating one force with the reaction law.

    f-version (force of M known):    -f^M - k_Phi (2/c^2) <f^M, V> V
    g-version (force of Phi known):   g^Phi + kappa_M (2/c^2) <g^Phi, V> V
    """
    a = np.asarray(force4_known, dtype=float)
    V = frame.V_ring
    proj = (2.0 / c**2) * minkowski(a, V)[..., None] * V
    if _version(version) == "f":
        return -a - params.k_Phi * proj
    return a + params.kappa_M * proj


def tensor_source_three(params: TriExchangeParams, f4: dict, version: str = "f"):
    """Vacuum tensor source c_Phi1 x^Phi1 - c_1Phi x^1Phi + c_Phi2 x^Phi2 - c_2Phi x^2Phi."""
    k = params.coeffs(_version(version))
    return (k["Phi1"] * f4["Phi1"] - k["1Phi"] * f4["1Phi"]
            + k["Phi2"] * f4["Phi2"] - k["2Phi"] * f4["2Phi"])


def combined_source_three(params: TriExchangeParams, forces: PairwiseForces, c: float = 1.0,
                          version: str = "f"):
    """Three-media vacuum source under identical vacuum coupling to both media.

    f-version: -(f^1Phi + f^2Phi) - k_Phi (2/c^2) sum <f^aPhi, V^a> V^a
    g-version:  (g^Phi1 + g^Phi2) + kappa_M (2/c^2) sum <g^Phia, V^a> V^a
    """
    version = _version(version)
    k = params.coeffs(version)
    if abs(k["Phi1"] - k["Phi2"]) > 1e-14 or abs(k["1Phi"] - k["2Phi"]) > 1e-14:
        raise ValueError("combined form needs identical coupling of the vacuum to both media")
    f4 = forces.four_forces(c, version)
    frames = (composite_frame(forces.v1, forces.v_phi, c), composite_frame(forces.v2, forces.v_phi, c))
    if version == "f":
        known = (f4["1Phi"], f4["2Phi"])
        coef, sign = k["Phi1"], -1.0
    else:
        known = (f4["Phi1"], f4["Phi2"])
        coef, sign = k["1Phi"], 1.0
    total = sign * (known[0] + known[1])
    for a, fr in zip(known, frames):
        total = total + sign * coef * (2.0 / c**2) * minkowski(a, fr.V_ring)[..., None] * fr.V_ring
    return total


def lorentz_force_split(rho_plus, rho_minus, v_plus, v_minus, E, B, c: float = 1.0):
    """F^+- = (rho^+- (E + v^+- x B); rho^+- E . v^+- / c)."""
    rho_plus = np.asarray(rho_plus, dtype=float)
    rho_minus = np.asarray(rho_minus, dtype=float)
    if np.any(rho_plus < 0) or np.any(rho_minus > 0):
        raise ValueError("need rho_plus >= 0 and rho_minus <= 0")
    E, B = np.asarray(E, dtype=float), np.asarray(B, dtype=float)
    out = []
    for rho, v in ((rho_plus, v_plus), (rho_minus, v_minus)):
        v = _check_speed(v, c)
        out.append(fourvec(rho[..., None] * (E + np.cross(v, B)), rho * _dot3(E, v) / c))
    return tuple(out)


def vacuum_emt_source(F_plus, F_minus, v_plus, v_minus, v_phi, coefficient: float, c: float = 1.0):
    """(F^+ + F^-) + coefficient (2/c^2) (<F^+, V^1> V^1 + <F^-, V^2> V^2)

    with V^1, V^2 the composite 4-velocities of (v^+, v_phi) and (v^-, v_phi).
    The coefficient is k_Phi for the f-version tensor and kappa_M for the
    g-version one; zero gives the classical source F^+ + F^-.
    """
    F_plus, F_minus = np.asarray(F_plus, dtype=float), np.asarray(F_minus, dtype=float)
    V1 = composite_frame(v_plus, v_phi, c).V_ring
    V2 = composite_frame(v_minus, v_phi, c).V_ring
    corr = minkowski(F_plus, V1)[..., None] * V1 + minkowski(F_minus, V2)[..., None] * V2
    return F_plus + F_minus + coefficient * (2.0 / c**2) * corr


# -- random validation suite ------------------------------------------------


def random_velocities(rng: np.random.Generator, n: int, v_cap: float = 0.99, c: float = 1.0) -> np.ndarray:
    """n velocities uniform in the ball of radius v_cap * c."""
    d = rng.normal(size=(n, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = v_cap * c * rng.uniform(0.0, 1.0, size=(n, 1)) ** (1.0 / 3.0)
    return r * d


SUITE_TOLERANCES = {
    "frame_opposite": 1e-11,
    "gamma_ring": 1e-12,
    "reaction_f": 1e-11,
    "reaction_g": 1e-11,
    "projection_f": 1e-12,
    "projection_g": 1e-12,
    "exchange_two": 1e-13,
    "exchange_three": 1e-13,
    "combined_two": 1e-12,
    "combined_three": 1e-12,
    "classical_limit": 0.0,
}


def validation_suite(n_cases: int = 1000, seed: int = 0, v_cap: float = 0.99, c: float = 1.0) -> dict:
    """Random checks of the frame, reaction, exchange and source identities.

    Returns, per check, the largest deviation seen, its tolerance, and the
    numbers of passing and failing cases.
    """
    rng = np.random.default_rng(seed)
    n = n_cases
    vM = random_velocities(rng, n, v_cap, c)
    vP = random_velocities(rng, n, v_cap, c)
    v2 = random_velocities(rng, n, v_cap, c)
    f3 = rng.normal(size=(n, 3))
    frame = composite_frame(vM, vP, c)
    dev = {}

    # errors are measured relative to O(1) inputs scaled by the largest gamma factor involved
    wM = velocity_in_frame(vM, frame.v_ring, c)
    wP = velocity_in_frame(vP, frame.v_ring, c)
    dev["frame_opposite"] = np.linalg.norm(wM + wP, axis=-1) / c
    dev["gamma_ring"] = np.abs(frame.gamma_ring - gamma(frame.v_ring, c)) / frame.gamma_ring

    for version, v_t in (("f", vM), ("g", vP)):
        a = force4(f3, v_t, c)
        closed = reaction_closed(a, frame, c)
        oracle = reaction_oracle(f3, vM, vP, c, version)
        scale = np.linalg.norm(a, axis=-1) * frame.gamma_ring**2
        dev[f"reaction_{version}"] = np.linalg.norm(closed - oracle, axis=-1) / scale
        dev[f"projection_{version}"] = np.abs(minkowski(a, frame.V_ring) - minkowski(closed, frame.V_ring)) / (
            c * scale
        )

    k_M = rng.uniform(0, 1, n)
    kap_M = rng.uniform(0, 1, n)
    ex2 = np.empty(n)
    comb2 = np.empty(n)
    ex3 = np.empty(n)
    comb3 = np.empty(n)
    classical = np.empty(n)
    for i in range(n):
        params = ExchangeParams.from_k(k_M[i], kap_M[i])
        r = exchange_rhs_two(params, MediumSample(vM[i], f3[i]), MediumSample(vP[i]), c)
        ex2[i] = abs(r[0] + r[1]) / max(1.0, abs(r[0]) + abs(r[1]))
        fM4 = force4(f3[i], vM[i], c)
        fr = composite_frame(vM[i], vP[i], c)
        fP4 = reaction_closed(fM4, fr, c)
        src = tensor_source_two(params, fM4, fP4)[1]
        comb = combined_source_two(params, fr, fM4, c)
        comb2[i] = np.max(np.abs(src - comb)) / max(1.0, np.max(np.abs(src)))

        tri = TriExchangeParams.symmetric(1.0 - k_M[i], kap_M[i])
        forces = PairwiseForces(vM[i], v2[i], vP[i], f3[i], rng.normal(size=3), rng.normal(size=3))
        r3 = exchange_rhs_three(tri, forces, c)
        ex3[i] = abs(sum(r3)) / max(1.0, sum(abs(x) for x in r3))
        worst = 0.0
        for version in ("f", "g"):
            direct = tensor_source_three(tri, forces.four_forces(c, version), version)
            combined = combined_source_three(tri, forces, c, version)
            worst = max(worst, np.max(np.abs(direct - combined)) / max(1.0, np.max(np.abs(direct))))
        comb3[i] = worst

        Fp, Fm = lorentz_force_split(abs(f3[i, 0]), -abs(f3[i, 1]), vM[i], v2[i], f3[i], rng.normal(size=3), c)
        classical[i] = np.max(np.abs(vacuum_emt_source(Fp, Fm, vM[i], v2[i], vP[i], 0.0, c) - (Fp + Fm)))

    dev.update(exchange_two=ex2, exchange_three=ex3, combined_two=comb2, combined_three=comb3,
               classical_limit=classical)
    out = {}
    for name, values in dev.items():
        tol = SUITE_TOLERANCES[name]
        ok = values <= tol
        out[name] = {
            "max_deviation": float(np.max(values)),
            "tolerance": tol,
            "passed": int(ok.sum()),
            "failed": int((~ok).sum()),
        }
    return out
