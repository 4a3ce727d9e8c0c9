"""In-repo optimizer portfolio.

Every optimizer is an ask/tell generator: it yields a (m, d) batch of
candidate points and receives their objective values through `send`.
The run harness owns the evaluation budget, so optimizers simply loop
forever; exhaustion is handled by closing the generator.  Candidates may
leave [-5,5]^d (the problems accept that); optimizers that conceptually
live in a box clamp internally.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LO, HI = -5.0, 5.0


@dataclass(frozen=True)
class OptimizerSpec:
    """Portfolio entry: a named optimizer with pinned hyperparameters."""

    algorithm_id: int
    name: str
    hyperparameters: dict = field(default_factory=dict)
    population_based: bool = False


def random_search(d, rng, chunk=128):
    """Uniform random sampling of the box, evaluated in chunks."""
    while True:
        yield rng.uniform(LO, HI, size=(chunk, d))


def es_one_plus_one(d, rng, sigma0=2.5, up=2.0 ** 0.25, down=2.0 ** (-1.0 / 16.0)):
    """(1+1)-ES with the 1/5th success rule (balanced at 1/5)."""
    x = rng.uniform(LO, HI, size=d)
    fx = (yield x[None, :])[0]
    sigma = sigma0
    while True:
        y = x + sigma * rng.standard_normal(d)
        fy = (yield y[None, :])[0]
        if fy <= fx:
            x, fx = y, fy
            sigma *= up
        else:
            sigma *= down


def differential_evolution(d, rng, pop_factor=10, f_weight=0.5, crossover=0.9):
    """DE/rand/1/bin with population 10d."""
    n = max(4, pop_factor * d)
    X = rng.uniform(LO, HI, size=(n, d))
    fX = yield X
    rows = np.arange(n)
    while True:
        # three distinct partners per row, never the row itself
        keys = rng.random((n, n))
        keys[rows, rows] = np.inf
        partners = np.argpartition(keys, 3, axis=1)[:, :3]
        order = np.take_along_axis(keys, partners, axis=1).argsort(axis=1, kind="stable")
        r = np.take_along_axis(partners, order, axis=1)
        mutants = X[r[:, 0]] + f_weight * (X[r[:, 1]] - X[r[:, 2]])
        cross = rng.random((n, d)) < crossover
        cross[rows, rng.integers(d, size=n)] = True
        trials = np.where(cross, mutants, X)
        fT = yield trials
        better = fT <= fX
        X[better] = trials[better]
        fX = np.where(better, fT, fX)


def particle_swarm(d, rng, pop_factor=10, inertia=0.72, c_personal=1.49, c_global=1.49):
    """Global-best PSO with velocity clamping to the box width."""
    n = max(4, pop_factor * d)
    span = HI - LO
    X = rng.uniform(LO, HI, size=(n, d))
    V = rng.uniform(-span, span, size=(n, d)) * 0.1
    fX = yield X
    P, fP = X.copy(), fX.copy()
    g = int(np.argmin(fP))
    while True:
        r1 = rng.uniform(size=(n, d))
        r2 = rng.uniform(size=(n, d))
        V = inertia * V + c_personal * r1 * (P - X) + c_global * r2 * (P[g] - X)
        np.clip(V, -span, span, out=V)
        X = X + V
        fX = yield X
        improved = fX < fP
        P[improved] = X[improved]
        fP[improved] = fX[improved]
        g = int(np.argmin(fP))


def nelder_mead(d, rng, alpha=1.0, gamma=2.0, rho=0.5, shrink=0.5,
                collapse_tol=1e-10, init_step=1.0):
    """Nelder-Mead simplex with uniform restart on simplex collapse."""
    while True:  # restart loop
        x0 = rng.uniform(LO, HI, size=d)
        simplex = np.vstack([x0, x0 + init_step * np.eye(d)])
        fvals = np.empty(d + 1)
        for i in range(d + 1):
            fvals[i] = (yield simplex[i][None, :])[0]
        while True:
            order = np.argsort(fvals, kind="stable")
            simplex, fvals = simplex[order], fvals[order]
            if np.max(np.abs(simplex[1:] - simplex[0])) < collapse_tol:
                break  # collapsed: restart
            centroid = simplex[:-1].mean(axis=0)
            xr = centroid + alpha * (centroid - simplex[-1])
            fr = (yield xr[None, :])[0]
            if fr < fvals[0]:
                xe = centroid + gamma * (centroid - simplex[-1])
                fe = (yield xe[None, :])[0]
                if fe < fr:
                    simplex[-1], fvals[-1] = xe, fe
                else:
                    simplex[-1], fvals[-1] = xr, fr
            elif fr < fvals[-2]:
                simplex[-1], fvals[-1] = xr, fr
            else:
                xc = centroid + rho * (simplex[-1] - centroid)
                fc = (yield xc[None, :])[0]
                if fc < fvals[-1]:
                    simplex[-1], fvals[-1] = xc, fc
                else:
                    best = simplex[0].copy()
                    for i in range(1, d + 1):
                        simplex[i] = best + shrink * (simplex[i] - best)
                        fvals[i] = (yield simplex[i][None, :])[0]


def quasi_newton(d, rng, fd_step=1e-6, grad_tol=1e-9, step_tol=1e-12, max_backtracks=25):
    """BFGS with central finite differences and uniform restarts."""
    eye = np.eye(d)
    while True:  # restart loop
        x = rng.uniform(LO, HI, size=d)
        fx = (yield x[None, :])[0]
        H = eye.copy()
        g_prev = None
        x_prev = None
        while True:
            h = fd_step * np.maximum(1.0, np.abs(x))
            stencil = np.vstack([x + np.diag(h), x - np.diag(h)])
            fs = yield stencil
            g = (fs[:d] - fs[d:]) / (2.0 * h)
            if not np.all(np.isfinite(g)) or np.linalg.norm(g) < grad_tol:
                break  # flat or degenerate: restart
            if g_prev is not None:
                s = x - x_prev
                yk = g - g_prev
                sy = float(s @ yk)
                if sy > 1e-12:
                    rho_k = 1.0 / sy
                    V = eye - rho_k * np.outer(s, yk)
                    H = V @ H @ V.T + rho_k * np.outer(s, s)
            p = -H @ g
            if p @ g > 0:  # not a descent direction: reset
                H = eye.copy()
                p = -g
            step = 1.0
            gp = float(g @ p)
            accepted = False
            for _ in range(max_backtracks):
                cand = x + step * p
                fc = (yield cand[None, :])[0]
                if fc <= fx + 1e-4 * step * gp:
                    x_prev, g_prev = x, g
                    x, fx = cand, fc
                    accepted = True
                    break
                step *= 0.5
            if not accepted or step * np.linalg.norm(p) < step_tol:
                break  # stalled: restart


OPTIMIZERS = {
    "random_search": random_search,
    "es_one_plus_one": es_one_plus_one,
    "differential_evolution": differential_evolution,
    "particle_swarm": particle_swarm,
    "nelder_mead": nelder_mead,
    "quasi_newton": quasi_newton,
}


def default_portfolio() -> list[OptimizerSpec]:
    """The full six-optimizer portfolio."""
    return [
        OptimizerSpec(1, "random_search"),
        OptimizerSpec(2, "es_one_plus_one"),
        OptimizerSpec(3, "differential_evolution", {"pop_factor": 10, "f_weight": 0.5, "crossover": 0.9}, True),
        OptimizerSpec(4, "particle_swarm", {"pop_factor": 10, "inertia": 0.72, "c_personal": 1.49, "c_global": 1.49}, True),
        OptimizerSpec(5, "nelder_mead"),
        OptimizerSpec(6, "quasi_newton"),
    ]


def make_optimizer(spec: OptimizerSpec, d: int, rng: np.random.Generator):
    try:
        factory = OPTIMIZERS[spec.name]
    except KeyError:
        raise KeyError(f"unknown optimizer '{spec.name}'") from None
    return factory(d, rng, **spec.hyperparameters)
