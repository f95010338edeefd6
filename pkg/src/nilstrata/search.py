"""Seeded numeric root finding followed by exact reconstruction.

A polynomial system over C is solved by Levenberg-Marquardt on its real form.
Coordinates of a converged solution are then pinned one at a time to small
field elements (recognized values first, preset values when nothing is
recognizable) and the system is re-solved after each pin. Once every exact
coordinate is pinned the caller's builder turns the values into an exact
object and verifies it; nothing numeric is ever returned as an answer.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.optimize import least_squares

from .cyclo import DEFAULT_ORDER, CycloScalar
from .recognize import height, recognize

log = logging.getLogger(__name__)

SOLVE_TOL = 1e-9


@dataclass
class ComplexSystem:
    """Holomorphic system F(z) = 0; the first n_exact unknowns are reconstructed."""

    nvars: int
    n_exact: int
    residual: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    # lower tiers are pinned to presets first; ties are shuffled per restart
    tiers: list[int] | None = None


class Budget:
    def __init__(self, solves: int):
        self.total = solves
        self.spent = 0

    def take(self) -> bool:
        if self.spent >= self.total:
            return False
        self.spent += 1
        return True

    @property
    def exhausted(self) -> bool:
        return self.spent >= self.total


def _preset_values(order: int) -> list[CycloScalar]:
    vals = [CycloScalar.rational(x, order) for x in (0, 1, -1, 2, Fraction(1, 2), -2)]
    if order % 4 == 0:
        i = CycloScalar.zeta(order // 4, order)
        vals += [i, -i]
    return vals


def solve_pinned(system: ComplexSystem, z0: np.ndarray, pinned: dict[int, complex],
                 max_nfev: int = 400) -> tuple[np.ndarray, float]:
    free = [i for i in range(system.nvars) if i not in pinned]
    z = np.array(z0, dtype=complex)
    for i, v in pinned.items():
        z[i] = v
    nf = len(free)

    def full(x):
        zz = z.copy()
        zz[free] = x[:nf] + 1j * x[nf:]
        return zz

    def f(x):
        r = system.residual(full(x))
        return np.concatenate([r.real, r.imag])

    def jac(x):
        J = system.jacobian(full(x))[:, free]
        return np.block([[J.real, -J.imag], [J.imag, J.real]])

    if nf == 0:
        r = system.residual(z)
        return z, float(np.linalg.norm(r))
    x0 = np.concatenate([z[free].real, z[free].imag])
    m = len(f(x0))
    method = "lm" if m >= 2 * nf else "trf"
    try:
        sol = least_squares(f, x0, jac=jac, method=method, xtol=1e-15, ftol=1e-15, gtol=1e-15,
                            max_nfev=max_nfev)
    except (ValueError, np.linalg.LinAlgError):
        return z, float("inf")
    zz = full(sol.x)
    return zz, float(np.linalg.norm(system.residual(zz)))


def _scale_tol(z: np.ndarray, n_exact: int | None = None) -> float:
    head = z[:n_exact] if n_exact else z
    return SOLVE_TOL * max(1.0, float(np.max(np.abs(head))) ** 2)


def _sane(z: np.ndarray) -> bool:
    return bool(np.all(np.isfinite(z)) and np.max(np.abs(z)) < 1e6)


def converged(system: ComplexSystem, z: np.ndarray, res: float) -> bool:
    return bool(np.isfinite(res)) and res < _scale_tol(z, system.n_exact) and _sane(z)


def snap_solution(system: ComplexSystem, z: np.ndarray, budget: Budget,
                  order: int = DEFAULT_ORDER, rng: np.random.Generator | None = None) -> dict[int, CycloScalar] | None:
    """Greedily pin exact coordinates of a numeric solution to field elements."""
    pinned: dict[int, CycloScalar] = {}
    presets = _preset_values(order)
    tiers = system.tiers or [0] * system.n_exact
    jitter = rng.random(system.n_exact) if rng is not None else np.zeros(system.n_exact)

    def attempt(extra: dict[int, CycloScalar]):
        if not budget.take():
            return None
        trial = {**pinned, **extra}
        z2, res = solve_pinned(system, z, {i: complex(v) for i, v in trial.items()})
        return z2 if converged(system, z2, res) else None

    # fast path: pin everything recognizable at once
    batch = {}
    for i in range(system.n_exact):
        r = recognize(complex(z[i]), order)
        if r is not None:
            batch[i] = r
    if len(batch) == system.n_exact:
        z2 = attempt(batch)
        if z2 is not None:
            return batch

    while len(pinned) < system.n_exact:
        if budget.exhausted:
            return None
        free = [i for i in range(system.n_exact) if i not in pinned]
        cands = []
        for i in free:
            r = recognize(complex(z[i]), order)
            if r is not None:
                cands.append((height(r), i, r))
        cands.sort(key=lambda t: (t[0], t[1]))
        moved = False
        for _, i, r in cands[:4]:
            log.debug("pin recognized z[%d] = %s", i, r)
            z2 = attempt({i: r})
            if z2 is not None:
                pinned[i] = r
                z = z2
                moved = True
                break
        if moved:
            continue
        # nothing recognizable pins cleanly: the free coordinate is likely on a
        # positive-dimensional component, so try small preset values
        for i in sorted(free, key=lambda k: (tiers[k], jitter[k], abs(z[k]))):
            for v in presets:
                log.debug("pin preset z[%d] = %s", i, v)
                z2 = attempt({i: v})
                if z2 is not None:
                    pinned[i] = v
                    z = z2
                    moved = True
                    break
                if budget.exhausted:
                    return None
            if moved:
                break
            # no preset fits this coordinate; another one may still pin cleanly
        if not moved:
            return None
    return pinned


def search_exact(system: ComplexSystem, build: Callable[[list[CycloScalar]], object | None],
                 rng: np.random.Generator, budget: Budget, order: int = DEFAULT_ORDER,
                 start: Callable[[np.random.Generator], np.ndarray] | None = None):
    """Random restarts until build() accepts an exact reconstruction or budget runs out."""
    while not budget.exhausted:
        if start is not None:
            z0 = start(rng)
        else:
            z0 = rng.normal(size=system.nvars) + 1j * rng.normal(size=system.nvars)
        if not budget.take():
            break
        z, res = solve_pinned(system, z0, {})
        if not converged(system, z, res):
            continue
        pins = snap_solution(system, z, budget, order, rng)
        if pins is None:
            continue
        out = build([pins[i] for i in range(system.n_exact)])
        if out is not None:
            return out
        log.debug("exact reconstruction rejected after snapping")
    return None
