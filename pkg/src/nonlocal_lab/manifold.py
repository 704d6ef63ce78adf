"""Discrete samplings of compact manifolds with geodesic distances and volume weights."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import mesh as _mesh
from ._kernels import METRIC_MATRIX, METRIC_SPHERE, METRIC_TORUS, get_backend

KINDS = ("FlatTorus", "Circle", "Sphere2", "TriMesh")
MIN_RESOLUTION = 4
DEFAULT_DISTANCE_CAP = 8192


@dataclass(frozen=True)
class ManifoldSpec:
    kind: str
    dimension: int | None = None
    lengths: tuple | None = None
    radius: float = 1.0
    mesh_path: str | None = None
    resolution: int = 64

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"manifold kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == "FlatTorus":
            lengths = tuple(float(x) for x in (self.lengths or (1.0,) * (self.dimension or 1)))
            dim = self.dimension or len(lengths)
            if len(lengths) != dim:
                raise ValueError(f"torus needs {dim} side lengths, got {len(lengths)}")
            if any(L <= 0 for L in lengths):
                raise ValueError("torus side lengths must be > 0")
            object.__setattr__(self, "lengths", lengths)
            object.__setattr__(self, "dimension", dim)
        elif self.kind == "Circle":
            object.__setattr__(self, "dimension", 1)
        else:
            object.__setattr__(self, "dimension", 2)
        if self.kind in ("Circle", "Sphere2") and not self.radius > 0:
            raise ValueError("radius must be > 0")
        if self.kind == "TriMesh":
            if not self.mesh_path:
                raise ValueError("TriMesh needs a mesh source path")
        elif self.resolution < MIN_RESOLUTION:
            raise ValueError(f"resolution must be >= {MIN_RESOLUTION}, got {self.resolution}")


@dataclass(frozen=True, eq=False)
class ManifoldSampling:
    """Quadrature of a compact manifold.

    ``points`` holds intrinsic coordinates (torus coordinates, circle angle,
    sphere colatitude/longitude, mesh vertex index). ``embedding`` holds the
    ambient positions for the sphere and meshes. The kernel backend reads
    ``metric``/``coords``/``lengths``/``radius``/``dmat``.
    """

    spec: ManifoldSpec
    dim: int
    points: np.ndarray
    weights: np.ndarray
    h: float
    metric: int
    coords: np.ndarray
    lengths: np.ndarray
    radius: float = 1.0
    embedding: np.ndarray | None = None
    normals: np.ndarray | None = None
    faces: np.ndarray | None = None
    dmat: np.ndarray | None = None
    distance_cap: int = DEFAULT_DISTANCE_CAP
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def backend_name(self) -> str:
        return {METRIC_TORUS: "closed-form torus", METRIC_SPHERE: "closed-form sphere",
                METRIC_MATRIX: "graph shortest path"}[self.metric]

    def total_volume(self) -> float:
        return math.fsum(self.weights)

    def distances_from(self, rows) -> np.ndarray:
        rows = np.atleast_1d(np.asarray(rows, dtype=np.int64))
        if self.dmat is not None:
            return self.dmat[rows]
        return get_backend().distance_rows(self.metric, self.coords, self.lengths, self.radius,
                                           rows, self.size)

    def distance(self, i: int, j: int) -> float:
        n = self.size
        if not (0 <= i < n and 0 <= j < n):
            raise IndexError(f"point index out of range for {n} points")
        if i == j:
            return 0.0
        if self.dmat is not None:
            return float(self.dmat[i, j])
        return float(self.distances_from([i])[0, j])

    @cached_property
    def distance_matrix(self) -> np.ndarray:
        if self.dmat is not None:
            return self.dmat
        if self.size > self.distance_cap:
            raise MemoryError(f"{self.size} points exceed the distance-matrix cap {self.distance_cap}")
        d = self.distances_from(np.arange(self.size))
        np.fill_diagonal(d, 0.0)
        return d

    def kernel_args(self):
        dmat = self.dmat if self.dmat is not None else np.zeros((1, 1))
        return (self.metric, np.ascontiguousarray(self.coords, dtype=np.float64),
                np.ascontiguousarray(self.lengths, dtype=np.float64), float(self.radius),
                np.ascontiguousarray(dmat, dtype=np.float64))


def fibonacci_sphere(n_points: int) -> np.ndarray:
    """Unit vectors on a Fibonacci lattice (equal-area latitude bands)."""
    k = np.arange(n_points) + 0.5
    z = 1.0 - 2.0 * k / n_points
    golden = math.pi * (3.0 - math.sqrt(5.0))
    phi = np.mod(golden * np.arange(n_points), 2 * math.pi)
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def build_manifold(spec: ManifoldSpec, distance_cap: int = DEFAULT_DISTANCE_CAP) -> ManifoldSampling:
    if spec.kind == "FlatTorus":
        n = spec.dimension
        m = spec.resolution
        axes = [np.arange(m) * (L / m) for L in spec.lengths]
        grid = np.meshgrid(*axes, indexing="ij")
        pts = np.column_stack([g.ravel() for g in grid])
        cell = math.prod(L / m for L in spec.lengths)
        w = np.full(len(pts), cell)
        h = max(L / m for L in spec.lengths)
        return ManifoldSampling(spec, n, pts, w, h, METRIC_TORUS, pts,
                                np.array(spec.lengths, dtype=float), distance_cap=distance_cap)

    if spec.kind == "Circle":
        m = spec.resolution
        r = spec.radius
        theta = 2.0 * math.pi * np.arange(m) / m
        w = np.full(m, 2.0 * math.pi * r / m)
        return ManifoldSampling(spec, 1, theta, w, 2.0 * math.pi * r / m, METRIC_TORUS,
                                (r * theta)[:, None], np.array([2.0 * math.pi * r]), radius=r,
                                distance_cap=distance_cap)

    if spec.kind == "Sphere2":
        m = spec.resolution
        r = spec.radius
        u = fibonacci_sphere(m)
        colat = np.arccos(np.clip(u[:, 2], -1.0, 1.0))
        lon = np.arctan2(u[:, 1], u[:, 0])
        w = np.full(m, 4.0 * math.pi * r * r / m)
        return ManifoldSampling(spec, 2, np.column_stack([colat, lon]), w,
                                math.sqrt(4.0 * math.pi * r * r / m), METRIC_SPHERE, u,
                                np.zeros(1), radius=r, embedding=r * u, normals=u,
                                distance_cap=distance_cap)

    verts, faces = _mesh.load_mesh(spec.mesh_path)
    if len(verts) > distance_cap:
        raise ValueError(f"mesh has {len(verts)} vertices, above the distance cache cap {distance_cap}")
    w = _mesh.vertex_areas(verts, faces)
    dmat = _mesh.all_pairs_graph_distances(verts, faces)
    return ManifoldSampling(spec, 2, np.arange(len(verts)), w, _mesh.mean_edge_length(verts, faces),
                            METRIC_MATRIX, verts, np.zeros(1), embedding=verts,
                            normals=_mesh.vertex_normals(verts, faces), faces=faces, dmat=dmat,
                            distance_cap=distance_cap)


def geodesic_distance(sampling: ManifoldSampling, i: int, j: int) -> float:
    return sampling.distance(i, j)


def total_volume(sampling: ManifoldSampling) -> float:
    return sampling.total_volume()


def analytic_volume(spec: ManifoldSpec) -> float | None:
    if spec.kind == "FlatTorus":
        return math.prod(spec.lengths)
    if spec.kind == "Circle":
        return 2.0 * math.pi * spec.radius
    if spec.kind == "Sphere2":
        return 4.0 * math.pi * spec.radius ** 2
    return None
