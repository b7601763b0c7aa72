"""Minimize the principal eigenvalue over admissible ball centers.

Two-stage derivative-free search: a stride-subsampled scan of the admissible
set (the deepest point of the domain is always injected as a candidate, since
the small-volume analysis predicts concentration there), then compass pattern
search from the best candidates.  No gradients are used: the eigenvalue is
only piecewise-smooth in the center, and accepted moves must improve by a
small relative forcing tolerance so the search does not chase discretization
jitter across the exponentially flat basin around the optimum.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .eigsolve import (
    BallSpec,
    EigenResult,
    StiffnessOperator,
    assemble,
    principal_eigenvalue,
    rasterize_weight,
)
from .geometry import GridDomain, admissible_centers, build_domain, incenter
from .limit import ball_radius


@dataclass
class PlacementProblem:
    """Domain, weight levels and solver options for one placement run."""

    domain: GridDomain
    eps: float
    m_bar: float
    m_under: float
    guard: float = 1e-8          # relative sufficient-decrease for accepted moves
    workers: int = 1
    certify_final: bool = False
    _op: StiffnessOperator | None = field(default=None, repr=False)
    _warm: np.ndarray | None = field(default=None, repr=False)

    @property
    def radius(self) -> float:
        return ball_radius(self.eps, self.domain.dim)

    @property
    def op(self) -> StiffnessOperator:
        if self._op is None:
            self._op = assemble(self.domain)
        return self._op

    def admissible(self, center) -> bool:
        c = np.asarray(center, dtype=float).reshape(-1)
        return self.domain.point_inside(c) and self.domain.point_distance(c) >= self.radius

    def evaluate(self, center, *, polish: bool = False) -> float:
        ball = BallSpec(center=tuple(np.atleast_1d(center)), eps=self.eps, dim=self.domain.dim)
        weight = rasterize_weight(self.domain, ball, self.m_bar, self.m_under)
        res = principal_eigenvalue(self.op, weight, polish=polish,
                                   v0=self._warm, fast=True)
        self._warm = self.op.restrict(res.u)
        return res.lam

    def solve_at(self, center, *, certify: bool = False) -> EigenResult:
        ball = BallSpec(center=tuple(np.atleast_1d(center)), eps=self.eps, dim=self.domain.dim)
        weight = rasterize_weight(self.domain, ball, self.m_bar, self.m_under)
        return principal_eigenvalue(self.op, weight, polish=True, certify=certify)


@dataclass
class PlacementResult:
    center: np.ndarray
    lam: float
    eigen: EigenResult
    evaluations: int
    trace: list[tuple[tuple[float, ...], float]]
    coarse: list[tuple[tuple[float, ...], float]]


# Per-process state for parallel candidate evaluation.
_WORKER: dict = {}


def _init_worker(shape, h, eps, m_bar, m_under):
    _WORKER["problem"] = PlacementProblem(
        domain=build_domain(shape, h), eps=eps, m_bar=m_bar, m_under=m_under
    )


def _eval_candidate(args):
    i, center = args
    return i, _WORKER["problem"].evaluate(center)


def coarse_candidates(domain: GridDomain, eps: float, stride: float) -> np.ndarray:
    """Stride-subsampled admissible nodes, with the incenter always injected."""
    mask = admissible_centers(domain, eps)
    step = max(1, int(round(stride / domain.h)))
    keep = np.zeros_like(mask)
    if domain.dim == 1:
        keep[::step] = True
    else:
        keep[::step, ::step] = True
    sub = mask & keep
    coords = domain.node_coords()[sub.ravel()]
    q, _ = incenter(domain)
    if domain.point_distance(q) >= ball_radius(eps, domain.dim):
        coords = np.vstack([coords, q.reshape(1, -1)])
    # exact dedupe (all candidates are lattice nodes), deterministic order
    return np.unique(coords, axis=0)


def coarse_search(problem: PlacementProblem, stride: float, k_best: int = 3
                  ) -> list[tuple[np.ndarray, float]]:
    """Evaluate the stride-subsampled admissible set; best k candidates first."""
    coords = coarse_candidates(problem.domain, problem.eps, stride)
    lams = np.empty(len(coords))
    jobs = list(enumerate(coords))
    if problem.workers > 1 and len(jobs) >= 48:
        with ProcessPoolExecutor(
            max_workers=problem.workers,
            initializer=_init_worker,
            initargs=(problem.domain.shape, problem.domain.h, problem.eps,
                      problem.m_bar, problem.m_under),
        ) as pool:
            for i, lam in pool.map(_eval_candidate, jobs, chunksize=8):
                lams[i] = lam
    else:
        for i, c in jobs:
            lams[i] = problem.evaluate(c)
    order = np.lexsort(tuple(coords.T[::-1]) + (lams,))
    ranked = [(coords[i], float(lams[i])) for i in order]
    return ranked[: max(k_best, 1)], [(tuple(c), float(l)) for c, l in zip(coords, lams)]


def refine(problem: PlacementProblem, start, start_lam: float | None = None,
           step0: float | None = None) -> tuple[np.ndarray, float, int, list]:
    """Compass search from ``start``: probe +-step per axis, halve the step on
    failure, stop once the step would fall below h/2.

    Steps are integer multiples of h so every probed ball center is a lattice
    node: node-centered balls rasterize to exact translates of one another,
    which removes rim-alignment jitter from the comparisons and leaves only
    the genuine center dependence.  Moves are accepted only on a sufficient
    relative decrease, and the returned center is the best probe seen.
    """
    domain = problem.domain
    h = domain.h
    x = np.asarray(start, dtype=float).reshape(-1)
    lam = problem.evaluate(x) if start_lam is None else start_lam
    evals = 0 if start_lam is not None else 1
    step0 = step0 if step0 is not None else max(4 * h, problem.radius / 2) / 2
    cells = max(1, int(round(step0 / h)))
    trace = [(tuple(x), lam)]
    dim = domain.dim
    while cells >= 1:
        moved = False
        for d in range(dim):
            for sgn in (+1.0, -1.0):
                probe = x.copy()
                probe[d] += sgn * cells * h
                if not problem.admissible(probe):
                    continue
                val = problem.evaluate(probe)
                evals += 1
                if val < lam * (1.0 - problem.guard):
                    x, lam = probe, val
                    trace.append((tuple(x), lam))
                    moved = True
        if not moved:
            cells //= 2
    return x, lam, evals, trace


def optimize_center(problem: PlacementProblem, stride: float | None = None,
                    k_best: int = 3) -> PlacementResult:
    """Coarse scan plus compass refinement from each leading candidate."""
    if stride is None:
        stride = max(4 * problem.domain.h, problem.radius / 2)
    best_list, coarse_all = coarse_search(problem, stride, k_best=k_best)
    evals = len(coarse_all)
    starts = [c for c, _ in best_list]
    q, _ = incenter(problem.domain)
    if problem.admissible(q) and not any(np.allclose(q, s) for s in starts):
        starts.append(q)

    results = []
    trace_all: list[tuple[tuple[float, ...], float]] = []
    start_lams = {tuple(np.asarray(c)): l for c, l in best_list}
    for s in starts:
        lam0 = start_lams.get(tuple(np.asarray(s)))
        x, lam, ev, trace = refine(problem, s, start_lam=lam0, step0=stride / 2)
        evals += ev
        results.append((lam, tuple(x)))
        trace_all.extend(trace)
    lam_best, x_best = min(results, key=lambda t: (t[0], t[1]))

    eigen = problem.solve_at(np.asarray(x_best), certify=problem.certify_final)
    evals += 1
    # Running best over everything probed, monotone nonincreasing.
    trace: list[tuple[tuple[float, ...], float]] = []
    cur = np.inf
    for c, l in coarse_all + trace_all + [(tuple(x_best), eigen.lam)]:
        if l < cur:
            cur = l
            trace.append((c, l))
    return PlacementResult(center=np.asarray(x_best), lam=eigen.lam, eigen=eigen,
                           evaluations=evals, trace=trace, coarse=coarse_all)


def default_workers() -> int:
    env = os.environ.get("BALLOPT_WORKERS")
    if env:
        return max(1, int(env))
    return min(2, os.cpu_count() or 1)
