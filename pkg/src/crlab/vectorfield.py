"""Non-autonomous planar vector fields F(t, u) with exact u-Jacobians.

Every field is 1-periodic in t by construction.  Evaluation is vectorised:
``u`` has shape ``(..., 2)`` and ``t`` broadcasts against ``u.shape[:-1]``.
Jacobians come back with shape ``(..., 2, 2)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cylinder import J, apply_j

TWO_PI = 2.0 * np.pi

#: Seed used by :func:`check_jacobian`.
JACOBIAN_SEED = 1729


def _split(u):
    u = np.asarray(u, dtype=float)
    return u, u[..., 0], u[..., 1]


def _mat(a, b, c, d):
    a, b, c, d = np.broadcast_arrays(a, b, c, d)
    out = np.empty(a.shape + (2, 2))
    out[..., 0, 0] = a
    out[..., 0, 1] = b
    out[..., 1, 0] = c
    out[..., 1, 1] = d
    return out


class VectorField:
    """Base class.  Subclasses implement :meth:`f` and :meth:`df`."""

    tag = "abstract"
    autonomous = True

    def f(self, t, u) -> np.ndarray:
        raise NotImplementedError

    def df(self, t, u) -> np.ndarray:
        raise NotImplementedError

    def divergence(self, t, u) -> np.ndarray:
        m = self.df(t, u)
        return m[..., 0, 0] + m[..., 1, 1]

    def params(self) -> dict:
        return {}

    def to_dict(self) -> dict:
        return {"tag": self.tag, **self.params()}


@dataclass(frozen=True)
class Zero(VectorField):
    tag = "zero"

    def f(self, t, u):
        return np.zeros_like(np.asarray(u, dtype=float))

    def df(self, t, u):
        return np.zeros(np.shape(u)[:-1] + (2, 2))


@dataclass(frozen=True)
class LinearRotation(VectorField):
    """F(u) = rate * J u."""

    rate: float = 1.0
    tag = "linear_rotation"

    def f(self, t, u):
        return self.rate * apply_j(u)

    def df(self, t, u):
        return np.broadcast_to(self.rate * J, np.shape(u)[:-1] + (2, 2)).copy()

    def params(self):
        return {"rate": self.rate}


class Hamiltonian(VectorField):
    """F(t, u) = J grad H(t, u).  Subclasses provide H, grad H and Hess H."""

    tag = "hamiltonian"
    name = "abstract"

    def hamiltonian(self, t, u):
        raise NotImplementedError

    def grad_h(self, t, u):
        raise NotImplementedError

    def hess_h(self, t, u):
        raise NotImplementedError

    def f(self, t, u):
        return apply_j(self.grad_h(t, u))

    def df(self, t, u):
        return J @ self.hess_h(t, u)

    def to_dict(self):
        return {"tag": self.tag, "name": self.name, **self.params()}


@dataclass(frozen=True)
class Harmonic(Hamiltonian):
    """H(u) = a/2 |u|^2, so F(u) = a J u."""

    a: float = 1.0
    name = "harmonic"

    def hamiltonian(self, t, u):
        u, p, q = _split(u)
        return 0.5 * self.a * (p * p + q * q)

    def grad_h(self, t, u):
        return self.a * np.asarray(u, dtype=float)

    def hess_h(self, t, u):
        return np.broadcast_to(self.a * np.eye(2), np.shape(u)[:-1] + (2, 2)).copy()

    def params(self):
        return {"a": self.a}


@dataclass(frozen=True)
class Pendulum(Hamiltonian):
    """H(u) = q^2/2 + (1 - cos 2 pi p) / (4 pi^2).

    Critical points sit at q = 0 and p in Z/2: minima at integer p, saddles at half-integers.
    """

    name = "pendulum"

    def hamiltonian(self, t, u):
        u, p, q = _split(u)
        return 0.5 * q * q + (1.0 - np.cos(TWO_PI * p)) / TWO_PI**2

    def grad_h(self, t, u):
        u, p, q = _split(u)
        return np.stack([np.sin(TWO_PI * p) / TWO_PI, q], axis=-1)

    def hess_h(self, t, u):
        u, p, q = _split(u)
        return _mat(np.cos(TWO_PI * p), 0.0, 0.0, 1.0)


@dataclass(frozen=True)
class ForcedOscillator(Hamiltonian):
    """H(t, u) = a/2 |u|^2 + eps p cos(2 pi t); a genuinely t-dependent Hamiltonian."""

    a: float = 1.0
    eps: float = 0.1
    name = "forced"
    autonomous = False

    def hamiltonian(self, t, u):
        u, p, q = _split(u)
        return 0.5 * self.a * (p * p + q * q) + self.eps * p * np.cos(TWO_PI * np.asarray(t))

    def grad_h(self, t, u):
        u, p, q = _split(u)
        g = self.a * u.copy()
        g[..., 0] = g[..., 0] + self.eps * np.cos(TWO_PI * np.asarray(t))
        return g

    def hess_h(self, t, u):
        return np.broadcast_to(self.a * np.eye(2), np.shape(u)[:-1] + (2, 2)).copy()

    def params(self):
        return {"a": self.a, "eps": self.eps}


@dataclass(frozen=True)
class HopfGradientPair(VectorField):
    """F(u) = J V(u) with V(u) = (mu - |u|^2) u + omega J u.

    t-independent solutions of the CR equations obey ``u_s = V(u)``, whose
    attracting limit cycle has radius sqrt(mu) and angular speed omega.
    """

    mu: float = 1.0
    omega: float = 1.0
    tag = "hopf"

    def v(self, u):
        u, p, q = _split(u)
        r2 = (p * p + q * q)[..., None]
        return (self.mu - r2) * u + self.omega * apply_j(u)

    def dv(self, u):
        u, p, q = _split(u)
        r2 = p * p + q * q
        a = self.mu - r2
        return _mat(a - 2 * p * p, -2 * p * q - self.omega, -2 * p * q + self.omega, a - 2 * q * q)

    def f(self, t, u):
        return apply_j(self.v(u))

    def df(self, t, u):
        return J @ self.dv(u)

    def params(self):
        return {"mu": self.mu, "omega": self.omega}


def _fourier_basis(k: int, t):
    t = np.asarray(t, dtype=float)
    if k == 0:
        return np.ones_like(t)
    if k > 0:
        return np.cos(TWO_PI * k * t)
    return np.sin(TWO_PI * (-k) * t)


@dataclass(frozen=True)
class CustomPolynomial(VectorField):
    """Polynomial components in (p, q) with t-Fourier coefficients.

    Each component is a list of terms ``(i, j, k, c)`` contributing
    ``c * p**i * q**j * phi_k(t)`` where ``phi_k = cos(2 pi k t)`` for ``k >= 0``
    and ``sin(2 pi |k| t)`` for ``k < 0``.
    """

    p_terms: tuple = field(default_factory=tuple)
    q_terms: tuple = field(default_factory=tuple)
    tag = "custom"

    def __post_init__(self):
        for terms in (self.p_terms, self.q_terms):
            for term in terms:
                i, j, k, _ = term
                if int(i) != i or int(j) != j or i < 0 or j < 0 or int(k) != k:
                    raise ValueError(f"bad polynomial term {term!r}")
        object.__setattr__(self, "p_terms", tuple(tuple(x) for x in self.p_terms))
        object.__setattr__(self, "q_terms", tuple(tuple(x) for x in self.q_terms))

    @property
    def autonomous(self):
        return all(k == 0 for (_, _, k, _) in self.p_terms + self.q_terms)

    @staticmethod
    def _eval(terms, t, p, q):
        out = np.zeros(np.broadcast(p, np.asarray(t)).shape)
        dp = np.zeros_like(out)
        dq = np.zeros_like(out)
        for i, j, k, c in terms:
            i, j = int(i), int(j)
            phi = c * _fourier_basis(int(k), t)
            out = out + phi * p**i * q**j
            if i:
                dp = dp + phi * i * p ** (i - 1) * q**j
            if j:
                dq = dq + phi * j * p**i * q ** (j - 1)
        return out, dp, dq

    def f(self, t, u):
        u, p, q = _split(u)
        fp, _, _ = self._eval(self.p_terms, t, p, q)
        fq, _, _ = self._eval(self.q_terms, t, p, q)
        return np.stack([fp, fq], axis=-1)

    def df(self, t, u):
        u, p, q = _split(u)
        _, a, b = self._eval(self.p_terms, t, p, q)
        _, c, d = self._eval(self.q_terms, t, p, q)
        return _mat(a, b, c, d)

    def params(self):
        return {"p": [list(x) for x in self.p_terms], "q": [list(x) for x in self.q_terms]}


HAMILTONIANS = {"harmonic": Harmonic, "pendulum": Pendulum, "forced": ForcedOscillator}


def make_vectorfield(tag: str, **params) -> VectorField:
    """Build a field from its tag and parameters (the run-config representation).

    >>> make_vectorfield("hopf", mu=1.0, omega=1.0)
    HopfGradientPair(mu=1.0, omega=1.0)
    """
    if tag == "zero":
        return Zero(**params)
    if tag == "linear_rotation":
        return LinearRotation(**params)
    if tag == "hopf":
        return HopfGradientPair(**params)
    if tag == "hamiltonian":
        params = dict(params)
        name = params.pop("name", None)
        if name not in HAMILTONIANS:
            raise ValueError(f"unknown Hamiltonian {name!r}; choose from {sorted(HAMILTONIANS)}")
        return HAMILTONIANS[name](**params)
    if tag == "custom":
        unknown = set(params) - {"p", "q"}
        if unknown:
            raise ValueError(f"unknown custom field keys {sorted(unknown)}")
        return CustomPolynomial(tuple(params.get("p", ())), tuple(params.get("q", ())))
    raise ValueError(f"unknown vector field tag {tag!r}")


def eval_f(spec: VectorField, t, u) -> np.ndarray:
    return spec.f(t, u)


def eval_df(spec: VectorField, t, u) -> np.ndarray:
    return spec.df(t, u)


def check_jacobian(spec: VectorField, n_samples: int = 100, h: float = 1e-5,
                   seed: int = JACOBIAN_SEED) -> float:
    """Max relative error between ``spec.df`` and central differences of ``spec.f``.

    Samples ``t`` uniformly in [0, 1) and ``u`` uniformly in the disc of radius 2.
    """
    if not 1e-9 < h < 1e-2:
        raise ValueError("h must lie in (1e-9, 1e-2)")
    rng = np.random.default_rng(seed)
    t = rng.random(n_samples)
    r = 2.0 * np.sqrt(rng.random(n_samples))
    ang = TWO_PI * rng.random(n_samples)
    u = np.stack([r * np.cos(ang), r * np.sin(ang)], axis=-1)
    exact = spec.df(t, u)
    fd = np.empty_like(exact)
    for col in range(2):
        e = np.zeros(2)
        e[col] = h
        fd[..., :, col] = (spec.f(t, u + e) - spec.f(t, u - e)) / (2 * h)
    err = np.max(np.abs(fd - exact), axis=(-2, -1))
    scale = np.maximum(1.0, np.max(np.abs(exact), axis=(-2, -1)))
    return float(np.max(err / scale))


def hamiltonian_symmetry_defect(spec: Hamiltonian, t, u) -> float:
    """Largest asymmetry of ``J^{-1} DF``; zero for Hamiltonian fields."""
    m = -J @ spec.df(t, u)  # J^{-1} = -J
    return float(np.max(np.abs(m - np.swapaxes(m, -1, -2))))


def builtin_catalogue() -> Sequence[VectorField]:
    """One instance of every builtin family, for sweeps and property checks."""
    return (
        Zero(),
        LinearRotation(1.0),
        Harmonic(TWO_PI),
        Pendulum(),
        ForcedOscillator(1.0, 0.1),
        HopfGradientPair(1.0, 1.0),
        CustomPolynomial(((1, 0, 0, -0.5), (0, 2, 1, 0.3)), ((0, 1, 0, 1.0), (3, 0, -2, 0.2))),
    )
