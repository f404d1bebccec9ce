"""Problem definitions shared by every solver: traps, pair potentials, grids.

Units: hbar^2/2m = 1 throughout, so energies are inverse lengths squared.
All types are immutable after construction; every operation here is a pure
function, safe to share across parallel workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigError, InvalidParameterError, OutOfDomainError


@dataclass(frozen=True)
class UnitConvention:
    """Single unit system used by all modules: hbar^2/2m = 1."""

    hbar2_over_2m: float = 1.0

    @property
    def energy_unit(self) -> str:
        return "inverse length squared"


UNITS = UnitConvention()


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    """Uniform tensor-product grid with trapezoidal quadrature.

    Nodes along axis ``i`` run from ``lo[i]`` to ``lo[i] + extent[i]``
    inclusive, so ``spacing[i] = extent[i] / (points[i] - 1)``.  Trapezoid
    weights (half weight on the end nodes) make the quadrature of the
    constant 1 equal to the domain volume exactly.
    """

    lo: tuple[float, ...]
    extent: tuple[float, ...]
    points: tuple[int, ...]

    def __post_init__(self):
        if not (len(self.lo) == len(self.extent) == len(self.points)):
            raise ConfigError("lo, extent, points must have equal length", field="grid")
        if self.dimension not in (1, 2, 3):
            raise ConfigError(f"unsupported dimension {self.dimension}", field="grid")
        for e, n in zip(self.extent, self.points):
            if e <= 0:
                raise ConfigError("extent must be positive", field="grid.extent")
            if n < 4:
                raise ConfigError("need at least 4 points per axis", field="grid.points")

    @property
    def dimension(self) -> int:
        return len(self.points)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(e / (n - 1) for e, n in zip(self.extent, self.points))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        return tuple(
            lo + np.arange(n) * (e / (n - 1))
            for lo, e, n in zip(self.lo, self.extent, self.points)
        )

    @cached_property
    def axis_weights(self) -> tuple[np.ndarray, ...]:
        out = []
        for h, n in zip(self.spacing, self.points):
            w = np.full(n, h)
            w[0] = w[-1] = h / 2.0
            out.append(w)
        return tuple(out)

    @cached_property
    def weights(self) -> np.ndarray:
        """Full tensor quadrature weight array (same shape as the grid)."""
        w = self.axis_weights[0]
        for wa in self.axis_weights[1:]:
            w = np.multiply.outer(w, wa)
        return w

    def meshgrid(self) -> tuple[np.ndarray, ...]:
        return np.meshgrid(*self.axes, indexing="ij", sparse=True)

    @property
    def volume(self) -> float:
        return float(np.prod(self.extent))

    def integrate(self, values: np.ndarray) -> float:
        return float(np.sum(values * self.weights))

    def refine(self, factor: int = 2) -> "Grid":
        """Grid with (roughly) ``factor`` times the points per axis."""
        return Grid(self.lo, self.extent, tuple((n - 1) * factor + 1 for n in self.points))

    @classmethod
    def centered(cls, extent, points) -> "Grid":
        extent = tuple(float(e) for e in np.atleast_1d(extent))
        points = tuple(int(n) for n in np.atleast_1d(points))
        return cls(tuple(-e / 2 for e in extent), extent, points)

    @classmethod
    def box(cls, side: float, points: int, dimension: int = 3) -> "Grid":
        return cls((0.0,) * dimension, (float(side),) * dimension, (int(points),) * dimension)


# ---------------------------------------------------------------------------
# traps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrapSpec:
    """External trapping potential.

    kind 'harmonic': V(r) = sum_i stiffness[i] r_i^2, confining.
    kind 'box': V = 0 inside a cube of the given side with hard walls,
    treated as a Dirichlet boundary on a matching grid.
    kind 'tabulated': multilinear interpolation of samples on ``table_grid``.
    """

    kind: str
    dimension: int
    stiffness: tuple[float, ...] | None = None
    side: float | None = None
    table_grid: Grid | None = None
    table_values: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise ConfigError("trap dimension must be 2 or 3", field="trap.dimension")
        if self.kind == "harmonic":
            if self.stiffness is None or len(self.stiffness) != self.dimension:
                raise ConfigError("harmonic trap needs one stiffness per axis", field="trap.stiffness")
            if any(k <= 0 for k in self.stiffness):
                raise ConfigError("stiffness must be positive (confining)", field="trap.stiffness")
        elif self.kind == "box":
            if self.side is None or self.side <= 0:
                raise ConfigError("box trap needs a positive side", field="trap.side")
        elif self.kind == "tabulated":
            if self.table_grid is None or self.table_values is None:
                raise ConfigError("tabulated trap needs grid and values", field="trap")
            if len(self.table_values) != int(np.prod(self.table_grid.points)):
                raise ConfigError("table size does not match its grid", field="trap.values")
        else:
            raise ConfigError(f"unknown trap kind {self.kind!r}", field="trap.kind")

    @classmethod
    def harmonic(cls, stiffness=(1.0, 1.0, 1.0)) -> "TrapSpec":
        stiffness = tuple(float(k) for k in np.atleast_1d(stiffness))
        return cls(kind="harmonic", dimension=len(stiffness), stiffness=stiffness)

    @classmethod
    def box(cls, side: float = 1.0, dimension: int = 3) -> "TrapSpec":
        return cls(kind="box", dimension=dimension, side=float(side))

    @classmethod
    def tabulated(cls, grid: Grid, values) -> "TrapSpec":
        values = np.asarray(values, dtype=float).ravel()
        return cls(kind="tabulated", dimension=grid.dimension,
                   table_grid=grid, table_values=tuple(values))

    @cached_property
    def _table(self) -> np.ndarray | None:
        if self.kind != "tabulated":
            return None
        return np.asarray(self.table_values, dtype=float).reshape(self.table_grid.points)

    def sample(self, grid: Grid) -> np.ndarray:
        """Potential sampled on every node of ``grid``.

        For the box kind the walls live on the grid boundary (Dirichlet),
        so the sampled field is identically zero; the grid must coincide
        with the box.
        """
        if grid.dimension != self.dimension:
            raise ConfigError("grid dimension does not match the trap", field="grid")
        mesh = grid.meshgrid()
        if self.kind == "harmonic":
            v = np.zeros(grid.shape)
            for k, x in zip(self.stiffness, mesh):
                v = v + k * x**2
            return v
        if self.kind == "box":
            for lo, e in zip(grid.lo, grid.extent):
                if abs(lo) > 1e-12 or abs(e - self.side) > 1e-12:
                    raise ConfigError("box trap requires a [0, side] grid on every axis", field="grid")
            return np.zeros(grid.shape)
        return self._interpolate(np.stack(np.broadcast_arrays(*mesh), axis=-1))

    def _interpolate(self, pts: np.ndarray) -> np.ndarray:
        return multilinear_interpolate(self.table_grid, self._table, pts,
                                       field="trap")


def multilinear_interpolate(table_grid: Grid, table: np.ndarray, pts: np.ndarray,
                            field: str = "table") -> np.ndarray:
    """Multilinear interpolation of a grid-sampled field at points.

    ``pts[..., ax]`` are coordinates; anything outside the grid extent
    raises OutOfDomainError.
    """
    tg = table_grid
    idx = []
    frac = []
    for ax in range(tg.dimension):
        x = (pts[..., ax] - tg.lo[ax]) / tg.spacing[ax]
        eps = 1e-9
        if np.any(x < -eps) or np.any(x > tg.points[ax] - 1 + eps):
            raise OutOfDomainError("point outside the tabulated extent", field=field)
        x = np.clip(x, 0.0, tg.points[ax] - 1)
        i0 = np.minimum(x.astype(int), tg.points[ax] - 2)
        idx.append(i0)
        frac.append(x - i0)
    out = np.zeros(pts.shape[:-1])
    for corner in range(2 ** tg.dimension):
        w = np.ones(pts.shape[:-1])
        sel = []
        for ax in range(tg.dimension):
            bit = (corner >> ax) & 1
            sel.append(idx[ax] + bit)
            w = w * (frac[ax] if bit else 1.0 - frac[ax])
        out += w * table[tuple(sel)]
    return out


def evaluate_trap(trap: TrapSpec, point) -> float:
    """V(r) at a single point; the box kind signals its wall with +inf."""
    point = np.asarray(point, dtype=float)
    if point.shape != (trap.dimension,):
        raise InvalidParameterError(f"point must have dimension {trap.dimension}")
    if trap.kind == "harmonic":
        return float(sum(k * x**2 for k, x in zip(trap.stiffness, point)))
    if trap.kind == "box":
        inside = all(0.0 < x < trap.side for x in point)
        return 0.0 if inside else math.inf
    return float(trap._interpolate(point[None, :])[0])


# ---------------------------------------------------------------------------
# pair potentials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairPotential:
    """Repulsive, spherically symmetric two-body potential.

    Radial shapes: a hard sphere of a given core radius, a soft sphere
    (constant height inside a radius), or a tabulated radial profile with
    linear interpolation between samples.  Radii are in units where the
    unscaled potential has scattering length of order one.
    """

    shape: str
    core: float | None = None
    height: float | None = None
    radius: float | None = None
    r_table: tuple[float, ...] | None = None
    v_table: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.shape == "hard_sphere":
            if self.core is None or self.core <= 0:
                raise InvalidParameterError("hard sphere needs a positive core radius")
        elif self.shape == "soft_sphere":
            if self.radius is None or self.radius <= 0:
                raise InvalidParameterError("soft sphere needs a positive radius")
            if self.height is None or self.height < 0:
                raise InvalidParameterError("soft sphere height must be nonnegative")
        elif self.shape == "tabulated_radial":
            r = np.asarray(self.r_table, dtype=float)
            v = np.asarray(self.v_table, dtype=float)
            if r.ndim != 1 or r.shape != v.shape or len(r) < 2:
                raise InvalidParameterError("tabulated potential needs matching r and v arrays")
            if np.any(np.diff(r) <= 0) or r[0] < 0:
                raise InvalidParameterError("r samples must be increasing and nonnegative")
            if np.any(v < 0):
                raise InvalidParameterError("potential values must be nonnegative (repulsive)")
            if abs(v[-1]) > 0:
                raise InvalidParameterError("tabulated potential must vanish at its last sample (finite range)")
        else:
            raise InvalidParameterError(f"unknown potential shape {self.shape!r}")

    @classmethod
    def hard_sphere(cls, core: float) -> "PairPotential":
        return cls(shape="hard_sphere", core=float(core))

    @classmethod
    def soft_sphere(cls, height: float, radius: float) -> "PairPotential":
        return cls(shape="soft_sphere", height=float(height), radius=float(radius))

    @classmethod
    def tabulated_radial(cls, r, v) -> "PairPotential":
        return cls(shape="tabulated_radial",
                   r_table=tuple(float(x) for x in r),
                   v_table=tuple(float(x) for x in v))

    @property
    def range(self) -> float:
        """Radius beyond which the potential is identically zero."""
        if self.shape == "hard_sphere":
            return self.core
        if self.shape == "soft_sphere":
            return self.radius if self.height > 0 else 0.0
        r = np.asarray(self.r_table)
        v = np.asarray(self.v_table)
        nz = np.nonzero(v)[0]
        if len(nz) == 0:
            return 0.0
        return float(r[min(nz[-1] + 1, len(r) - 1)])

    @property
    def is_zero(self) -> bool:
        return self.shape != "hard_sphere" and self.range == 0.0

    @property
    def has_hard_core(self) -> bool:
        return self.shape == "hard_sphere"

    def evaluate(self, r) -> np.ndarray:
        """Radial values v(r); hard cores evaluate to +inf inside."""
        r = np.asarray(r, dtype=float)
        if self.shape == "hard_sphere":
            return np.where(r < self.core, np.inf, 0.0)
        if self.shape == "soft_sphere":
            return np.where(r < self.radius, self.height, 0.0)
        return np.interp(r, self.r_table, self.v_table, left=self.v_table[0], right=0.0)

    def integral(self) -> float:
        """int v d^3r, the leading contact-limit strength."""
        if self.shape == "hard_sphere":
            raise InvalidParameterError("hard sphere potential is not integrable")
        if self.shape == "soft_sphere":
            return float(self.height * 4 * np.pi * self.radius**3 / 3)
        r = np.linspace(0.0, self.range, 20001)
        return float(4 * np.pi * np.trapezoid(self.evaluate(r) * r**2, r))

    def fourier_radial(self, q) -> np.ndarray:
        """Exact transform vhat(q) = int v(r) exp(-iq.r) d^3r.

        For the soft sphere this is closed form; tabulated profiles use a
        fine radial quadrature, so accuracy is set by the table itself and
        not by any 3D grid.  Hard spheres have no transform and must be
        replaced by a tall soft sphere first.
        """
        q = np.asarray(q, dtype=float)
        if self.shape == "hard_sphere":
            raise InvalidParameterError(
                "hard sphere has no Fourier transform; substitute a tall soft sphere")
        if self.shape == "soft_sphere":
            return _sphere_transform(q, self.height, self.radius)
        rr = np.linspace(0.0, max(self.range, 1e-12), 8193)
        vv = self.evaluate(rr)
        qf = q.ravel()
        out = np.empty(qf.shape)
        small = np.abs(qf) * self.range < 1e-6
        out[small] = 4 * np.pi * np.trapezoid(vv * rr**2, rr)
        qs = qf[~small]
        if qs.size:
            # chunk the (q, r) outer product to bound memory
            res = np.empty(qs.shape)
            step = max(1, int(4e6 / len(rr)))
            for s in range(0, len(qs), step):
                blk = qs[s:s + step, None]
                res[s:s + step] = np.trapezoid(vv * rr * np.sin(blk * rr), rr, axis=1) / qs[s:s + step]
            out[~small] = 4 * np.pi * res
        return out.reshape(q.shape)

    def scaled(self, a: float) -> "PairPotential":
        return scale_pair_potential(self, a)


def _sphere_transform(q, height, radius):
    q = np.asarray(q, dtype=float)
    out = np.empty(q.shape)
    x = np.abs(q) * radius
    small = x < 1e-4
    # series keeps full precision through the q -> 0 crossover
    out[small] = height * 4 * np.pi * radius**3 / 3 * (1 - x[small] ** 2 / 10)
    qs = q[~small]
    xs = x[~small]
    out[~small] = 4 * np.pi * height * (np.sin(xs) - xs * np.cos(xs)) / qs**3
    return out


def scale_pair_potential(base: PairPotential, a: float) -> PairPotential:
    """Potential v(r) = v1(r/a) / a^2 obtained from ``base`` at length a.

    Scaling composes: scaling by a then b equals scaling by a*b.  The
    scattering length of the result is a times that of ``base``.
    """
    if not (a > 0) or not math.isfinite(a):
        raise InvalidParameterError("scaling length a must be positive and finite")
    if base.shape == "hard_sphere":
        return PairPotential.hard_sphere(base.core * a)
    if base.shape == "soft_sphere":
        return PairPotential.soft_sphere(base.height / a**2, base.radius * a)
    r = np.asarray(base.r_table) * a
    v = np.asarray(base.v_table) / a**2
    return PairPotential.tabulated_radial(r, v)


# ---------------------------------------------------------------------------
# strict JSON problem documents
# ---------------------------------------------------------------------------

def _require_keys(doc: dict, allowed: set[str], required: set[str], where: str):
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", field=where)
    missing = required - set(doc)
    if missing:
        raise ConfigError(f"missing keys {sorted(missing)}", field=where)


def trap_from_config(doc: dict) -> TrapSpec:
    if not isinstance(doc, dict):
        raise ConfigError("trap must be an object", field="trap")
    kind = doc.get("kind")
    if kind == "harmonic":
        _require_keys(doc, {"kind", "stiffness"}, {"kind", "stiffness"}, "trap")
        return TrapSpec.harmonic(doc["stiffness"])
    if kind == "box":
        _require_keys(doc, {"kind", "side", "dimension"}, {"kind", "side"}, "trap")
        return TrapSpec.box(doc["side"], int(doc.get("dimension", 3)))
    if kind == "tabulated":
        _require_keys(doc, {"kind", "lo", "extent", "points", "values"},
                      {"kind", "lo", "extent", "points", "values"}, "trap")
        grid = Grid(tuple(float(x) for x in doc["lo"]),
                    tuple(float(x) for x in doc["extent"]),
                    tuple(int(x) for x in doc["points"]))
        return TrapSpec.tabulated(grid, doc["values"])
    raise ConfigError(f"unknown trap kind {kind!r}", field="trap.kind")


def pair_potential_from_config(doc: dict) -> PairPotential:
    if not isinstance(doc, dict):
        raise ConfigError("pair_potential must be an object", field="pair_potential")
    shape = doc.get("shape")
    if shape == "hard_sphere":
        _require_keys(doc, {"shape", "core"}, {"shape", "core"}, "pair_potential")
        return PairPotential.hard_sphere(float(doc["core"]))
    if shape == "soft_sphere":
        _require_keys(doc, {"shape", "height", "radius"}, {"shape", "height", "radius"}, "pair_potential")
        return PairPotential.soft_sphere(float(doc["height"]), float(doc["radius"]))
    if shape == "tabulated_radial":
        _require_keys(doc, {"shape", "r", "v"}, {"shape", "r", "v"}, "pair_potential")
        return PairPotential.tabulated_radial(doc["r"], doc["v"])
    raise ConfigError(f"unknown potential shape {shape!r}", field="pair_potential.shape")


def grid_from_config(doc: dict, trap: TrapSpec | None = None) -> Grid:
    if not isinstance(doc, dict):
        raise ConfigError("grid must be an object", field="grid")
    _require_keys(doc, {"extent", "points", "lo"}, {"extent", "points"}, "grid")
    extent = tuple(float(x) for x in np.atleast_1d(doc["extent"]))
    points = tuple(int(x) for x in np.atleast_1d(doc["points"]))
    if "lo" in doc:
        lo = tuple(float(x) for x in np.atleast_1d(doc["lo"]))
    elif trap is not None and trap.kind == "box":
        lo = (0.0,) * len(extent)
    else:
        lo = tuple(-e / 2 for e in extent)
    return Grid(lo, extent, points)


@dataclass(frozen=True)
class Problem:
    trap: TrapSpec | None
    pair_potential: PairPotential | None
    grid: Grid | None


def problem_from_config(doc: dict) -> Problem:
    """Parse the strict problem document {trap, pair_potential, grid}."""
    if not isinstance(doc, dict):
        raise ConfigError("problem must be an object", field="problem")
    _require_keys(doc, {"trap", "pair_potential", "grid"}, set(), "problem")
    trap = trap_from_config(doc["trap"]) if "trap" in doc else None
    pot = pair_potential_from_config(doc["pair_potential"]) if "pair_potential" in doc else None
    grid = grid_from_config(doc["grid"], trap) if "grid" in doc else None
    if trap is not None and grid is not None and trap.dimension != grid.dimension:
        raise ConfigError("trap and grid dimensions disagree", field="problem")
    return Problem(trap, pot, grid)
