"""Training loop for the level-set classifier.

The decision field evolves by explicit descent steps

    u <- u - dt * (descent_direction - lambda * laplacian(u))

with a CFL-like guard (a step moving any node by more than 10 cell widths
is rejected and dt halved), periodic rebuilding of u as a signed distance
function, and convergence declared when the sup-norm update stays below
tol for 5 consecutive iterations.

Reinitialization locates the zero crossings exactly on grid edges, seeds
the adjacent nodes with their distance to the interpolated interface, and
propagates distances outward by monotone fast sweeping.  The sign of u is
preserved at every node, so the classifier is unchanged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .density import DensityPair
from .energy import MeasureEnergy
from .errors import (
    GridMismatchError,
    StepRejectedError,
    VanishingPositiveMassError,
)
from .field import (
    InitShape,
    ScalarField,
    SphereLattice,
    init_shape,
    laplacian,
)

_CONSECUTIVE_FOR_CONVERGENCE = 5
_MAX_DT_HALVINGS = 80
_MAX_SWEEP_ROUNDS = 128
_MIN_CELLS_PER_AXIS = 4


def default_resolution(dim: int) -> int:
    """Per-axis cell count giving a workable grid at each dimension."""
    return {1: 1024, 2: 128, 3: 64}.get(dim, 16)


@dataclass(frozen=True)
class TrainConfig:
    """Knobs for one training run.

    dt, lam and eps_h default to None, meaning: resolve from the grid
    (lam = 0.1 * max spacing squared, eps_h = 1.5 * max spacing) and from
    the initial descent direction (dt = 0.5 * min spacing / max |descent|).
    resolution=None picks the per-dimension default.  init=None starts
    from the default sphere lattice.
    """

    beta: float = 1.0
    dt: float = None  # type: ignore[assignment]
    lam: float = None  # type: ignore[assignment]
    eps_h: float = None  # type: ignore[assignment]
    tol: float = 1e-5
    reinit_every: int = 50
    max_iter: int = 2000
    resolution: int = None  # type: ignore[assignment]
    init: InitShape = None  # type: ignore[assignment]
    seed: int = 0
    descent: str = "derivative"

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        for name in ("dt", "lam", "eps_h", "tol"):
            v = getattr(self, name)
            if v is not None and (not math.isfinite(v) or v <= 0):
                if name == "lam" and v == 0.0:
                    continue  # lambda may be switched off entirely
                raise ValueError(f"{name} must be positive, got {v}")
        for name in ("reinit_every", "max_iter"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.resolution is not None and self.resolution < _MIN_CELLS_PER_AXIS:
            raise ValueError(
                f"resolution must be at least {_MIN_CELLS_PER_AXIS} cells per axis"
            )
        if self.descent not in ("derivative", "G"):
            raise ValueError(f"descent must be 'derivative' or 'G', got {self.descent!r}")


class TraceRecord(NamedTuple):
    iteration: int
    energy: float
    max_update: float
    reinit: bool


@dataclass
class EvolutionTrace:
    """Per-iteration history of one training run plus resolved settings."""

    records: list[TraceRecord]
    status: str  # "converged" | "max-iter"
    restarted: bool
    final_dt: float
    header: dict

    def to_csv(self) -> str:
        lines = [f"# {k}={v}" for k, v in self.header.items()]
        lines.append(f"# status={self.status}")
        lines.append(f"# restarted={int(self.restarted)}")
        lines.append(f"# final_dt={self.final_dt!r}")
        lines.append("iteration,energy,max_update,reinit")
        for r in self.records:
            lines.append(f"{r.iteration},{r.energy!r},{r.max_update!r},{int(r.reinit)}")
        return "\n".join(lines) + "\n"


def resolved_lambda(cfg: TrainConfig, grid) -> float:
    if cfg.lam is not None:
        return cfg.lam
    return 0.1 * max(grid.spacing) ** 2


def auto_time_step(u: ScalarField, e: MeasureEnergy, cfg: TrainConfig) -> float:
    """Half a cell width per unit descent, measured at the starting field."""
    scale = float(np.abs(e.descent_direction(u, cfg.descent).values).max())
    if scale == 0.0:
        return 1.0
    return 0.5 * min(u.grid.spacing) / scale


def step(
    u: ScalarField,
    e: MeasureEnergy,
    d: DensityPair,
    cfg: TrainConfig,
    dt: float = None,
) -> ScalarField:
    """One explicit update; raises StepRejectedError when the guard trips."""
    if u.grid != d.grid:
        raise GridMismatchError("field and densities live on different grids")
    if dt is None:
        dt = cfg.dt
    if dt is None:
        raise ValueError("dt is unresolved; pass it explicitly or set cfg.dt")
    update = e.descent_direction(u, cfg.descent).values
    lam = resolved_lambda(cfg, u.grid)
    if lam != 0.0:
        update = update - lam * laplacian(u).values
    change = dt * update
    limit = 10.0 * max(u.grid.spacing)
    worst = float(np.abs(change).max())
    if worst > limit:
        raise StepRejectedError(
            f"step of {worst:.3e} exceeds {limit:.3e} (10 cell widths)"
        )
    return u.with_values(u.values - change)


def has_sign_change(u: ScalarField) -> bool:
    return bool((u.values >= 0).any() and (u.values < 0).any())


def _axis_crossing_distances(values: np.ndarray, spacing) -> list[np.ndarray]:
    """Per axis: each node's distance to the nearest zero crossing on its
    two incident edges along that axis (inf when neither edge crosses)."""
    out = []
    for ax in range(values.ndim):
        d_ax = np.full(values.shape, np.inf)
        lo = [slice(None)] * values.ndim
        hi = [slice(None)] * values.ndim
        lo[ax], hi[ax] = slice(None, -1), slice(1, None)
        lo, hi = tuple(lo), tuple(hi)
        a, b = values[lo], values[hi]
        cross = ((a > 0) != (b > 0)) | (a == 0) | (b == 0)
        den = a - b
        t = np.divide(a, den, out=np.zeros_like(a), where=den != 0)
        h = spacing[ax]
        near = np.where(b == 0, np.where(a == 0, 0.0, h), t * h)
        far = np.where(a == 0, np.where(b == 0, 0.0, h), (1.0 - t) * h)
        near = np.where(a == 0, 0.0, near)
        far = np.where(b == 0, 0.0, far)
        inf = np.inf
        d_ax[lo] = np.minimum(d_ax[lo], np.where(cross, near, inf))
        d_ax[hi] = np.minimum(d_ax[hi], np.where(cross, far, inf))
        out.append(d_ax)
    return out


def _godunov(minima: list[np.ndarray], spacings: np.ndarray) -> np.ndarray:
    """Distance update from per-axis neighbor minima: the smallest x with
    sum over used axes of ((x - m_i)/h_i)^2 equal to 1, axes entering in
    increasing order of m_i and only while x exceeds the next m."""
    m = np.stack(np.broadcast_arrays(*minima), axis=-1)
    h = np.empty_like(m)
    h[...] = spacings
    order = np.argsort(m, axis=-1, kind="stable")
    m = np.take_along_axis(m, order, -1)
    h = np.take_along_axis(h, order, -1)
    inv2 = 1.0 / (h * h)
    a = np.cumsum(inv2, -1)
    b = np.cumsum(m * inv2, -1)
    c = np.cumsum(m * m * inv2, -1)
    x = m[..., 0] + h[..., 0]
    for j in range(1, m.shape[-1]):
        disc = b[..., j] ** 2 - a[..., j] * (c[..., j] - 1.0)
        xj = (b[..., j] + np.sqrt(np.maximum(disc, 0.0))) / a[..., j]
        x = np.where(x > m[..., j], xj, x)
    return x


def _sweep_line(dist: np.ndarray, frozen: np.ndarray, h: float) -> None:
    """Exact 1-D propagation: two running-minimum passes, in place."""
    ramp = np.arange(dist.shape[0]) * h
    fwd = np.minimum.accumulate(dist - ramp) + ramp
    bwd = np.minimum.accumulate((dist + ramp)[::-1])[::-1] - ramp
    dist[~frozen] = np.minimum(dist, np.minimum(fwd, bwd))[~frozen]


_GROUP_CACHE: dict = {}


def _diagonal_groups(shape: tuple) -> list:
    """Node indices grouped by anti-diagonal (constant index sum).

    Within one diagonal no node is another's stencil neighbor, so a whole
    group updates at once while preserving the sequential sweep order.
    """
    if shape in _GROUP_CACHE:
        return _GROUP_CACHE[shape]
    idx = np.indices(shape).reshape(len(shape), -1)
    s = idx.sum(axis=0)
    order = np.argsort(s, kind="stable")
    cuts = np.searchsorted(s[order], np.arange(1, int(s.max()) + 1))
    groups = [
        tuple(idx[a][g] for a in range(len(shape)))
        for g in np.split(order, cuts)
    ]
    if len(_GROUP_CACHE) > 8:
        _GROUP_CACHE.clear()
    _GROUP_CACHE[shape] = groups
    return groups


def _sweep_direction(view, fz, spacing, big, groups) -> bool:
    shape = view.shape
    changed = False
    for nodes in groups:
        minima = []
        for a in range(len(shape)):
            ia = nodes[a]
            gather = list(nodes)
            gather[a] = np.maximum(ia - 1, 0)
            lo = np.where(ia > 0, view[tuple(gather)], big)
            gather[a] = np.minimum(ia + 1, shape[a] - 1)
            hi = np.where(ia + 1 < shape[a], view[tuple(gather)], big)
            minima.append(np.minimum(lo, hi))
        cand = _godunov(minima, spacing)
        cur = view[nodes]
        better = (cand < cur) & ~fz[nodes]
        if better.any():
            changed = True
            view[nodes] = np.where(better, cand, cur)
    return changed


def _fast_sweep(dist: np.ndarray, frozen: np.ndarray, spacing, big: float) -> None:
    """Propagate distances outward from the frozen seed band, in place.

    Orthant-ordered sweeps over anti-diagonal node groups; every update is
    a monotone decrease, so cycling until nothing changes reaches the same
    fixed point as a node-by-node sweep.
    """
    if dist.ndim == 1:
        _sweep_line(dist, frozen, spacing[0])
        return
    groups = _diagonal_groups(dist.shape)
    spac = np.asarray(spacing)
    flips = [
        tuple(slice(None, None, 1 if s == 0 else -1) for s in signs)
        for signs in np.ndindex(*(2,) * dist.ndim)
    ]
    for _ in range(_MAX_SWEEP_ROUNDS):
        changed = False
        for flip in flips:
            if _sweep_direction(dist[flip], frozen[flip], spac, big, groups):
                changed = True
        if not changed:
            return


def reinitialize(u: ScalarField) -> ScalarField:
    """Rebuild u as the signed distance to its own zero level set.

    The sign at every node is preserved, so predictions are unchanged.  A
    field without any sign change has no zero set and is returned as is.
    """
    if not has_sign_change(u):
        return u
    grid = u.grid
    big = 10.0 * (1.0 + math.hypot(*(hi - lo for lo, hi in grid.bounds)))
    axis_dists = _axis_crossing_distances(u.values, grid.spacing)
    inv = np.zeros(u.values.shape)
    with np.errstate(divide="ignore"):
        for d_ax in axis_dists:
            inv += np.where(np.isfinite(d_ax), 1.0 / (d_ax * d_ax), 0.0)
    frozen = inv > 0
    with np.errstate(divide="ignore"):
        dist = np.where(frozen, 1.0 / np.sqrt(inv), big)
    _fast_sweep(dist, frozen, grid.spacing, big)
    signed = np.where(u.values >= 0, dist, -dist)
    return u.with_values(signed)


def train(d: DensityPair, e: MeasureEnergy, cfg: TrainConfig):
    """Evolve a decision field to a minimizer of the energy.

    Returns (TrainedClassifier, EvolutionTrace).  Hitting max_iter is
    reported in the trace status, never raised.  If the positive region
    loses all its density mass, training restarts once from the default
    sphere lattice before giving up.
    """
    from .classifier import TrainedClassifier, density_fingerprint

    grid = d.grid
    if min(grid.resolution) < _MIN_CELLS_PER_AXIS:
        raise ValueError(
            f"training needs at least {_MIN_CELLS_PER_AXIS} cells per axis"
        )
    lam = resolved_lambda(cfg, grid)
    restarted = False

    def fresh_start(init):
        u0 = init_shape(grid, init)
        return u0, cfg.dt if cfg.dt is not None else auto_time_step(u0, e, cfg)

    try:
        u, dt = fresh_start(cfg.init)
    except VanishingPositiveMassError:
        restarted = True
        u, dt = fresh_start(SphereLattice())
    dt0 = dt
    header = {
        "beta": repr(cfg.beta),
        "k": repr(e.k) if e.kind == "f_measure" else "",
        "measure": e.kind,
        "descent": cfg.descent,
        "dt": repr(dt),
        "lambda": repr(lam),
        "eps_h": repr(e.eps),
        "tol": repr(cfg.tol),
        "reinit_every": cfg.reinit_every,
        "max_iter": cfg.max_iter,
        "seed": cfg.seed,
    }

    records: list[TraceRecord] = []
    status = "max-iter"
    consecutive = 0
    it = 0
    while it < cfg.max_iter:
        it += 1
        try:
            halvings = 0
            while True:
                try:
                    u_new = step(u, e, d, cfg, dt)
                    break
                except StepRejectedError:
                    halvings += 1
                    if halvings > _MAX_DT_HALVINGS:
                        raise
                    dt *= 0.5
            max_update = float(np.abs(u_new.values - u.values).max())
            did_reinit = it % cfg.reinit_every == 0
            u = reinitialize(u_new) if did_reinit else u_new
            energy_val = e.evaluate(u)
        except VanishingPositiveMassError:
            if restarted:
                raise
            restarted = True
            u, dt = fresh_start(SphereLattice())
            consecutive = 0
            it -= 1
            continue
        records.append(TraceRecord(it, energy_val, max_update, did_reinit))
        consecutive = consecutive + 1 if max_update < cfg.tol else 0
        if consecutive >= _CONSECUTIVE_FOR_CONVERGENCE:
            status = "converged"
            break
    u = reinitialize(u)
    trace = EvolutionTrace(records, status, restarted, dt, header)
    snapshot = replace(cfg, dt=dt0, lam=lam, eps_h=e.eps)
    model = TrainedClassifier(
        u=u,
        kind=e.kind,
        beta=e.beta,
        k=e.k if e.kind == "f_measure" else None,
        config=snapshot,
        densities_hash=density_fingerprint(d),
        degenerate=not has_sign_change(u),
    )
    return model, trace
