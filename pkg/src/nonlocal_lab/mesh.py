"""Triangle mesh input, validation and graph geodesics."""
from __future__ import annotations

from collections import deque
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph


class MeshError(ValueError):
    """Raised when a mesh file is unreadable or not a closed connected surface."""


def _tokens(text):
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            yield line


def read_off(text: str):
    lines = list(_tokens(text))
    if not lines or not lines[0].startswith("OFF"):
        raise MeshError("OFF file must start with 'OFF'")
    header = lines[0][3:].split() or lines[1].split()
    body = lines[1:] if lines[0][3:].split() else lines[2:]
    try:
        nv, nf = int(header[0]), int(header[1])
    except (IndexError, ValueError):
        raise MeshError("malformed OFF header") from None
    if len(body) < nv + nf:
        raise MeshError(f"OFF file truncated: expected {nv} vertices and {nf} faces")
    verts = np.array([[float(t) for t in body[k].split()[:3]] for k in range(nv)])
    faces = []
    for k in range(nv, nv + nf):
        parts = body[k].split()
        if int(parts[0]) != 3:
            raise MeshError(f"face {k - nv} is not a triangle")
        faces.append([int(t) for t in parts[1:4]])
    return verts, np.array(faces, dtype=np.int64)


def read_ply(text: str):
    lines = text.splitlines()
    if not lines or lines[0].strip() != "ply":
        raise MeshError("PLY file must start with 'ply'")
    nv = nf = None
    props = []
    current = None
    k = 1
    while k < len(lines):
        parts = lines[k].split()
        k += 1
        if not parts:
            continue
        if parts[0] == "format" and parts[1] != "ascii":
            raise MeshError("only ASCII PLY is supported")
        if parts[0] == "element":
            current = parts[1]
            if current == "vertex":
                nv = int(parts[2])
            elif current == "face":
                nf = int(parts[2])
        elif parts[0] == "property" and current == "vertex":
            props.append(parts[-1])
        elif parts[0] == "end_header":
            break
    if nv is None or nf is None:
        raise MeshError("PLY header lacks vertex or face element")
    try:
        ix = [props.index(c) for c in ("x", "y", "z")]
    except ValueError:
        raise MeshError("PLY vertices need x, y, z properties") from None
    body = [ln for ln in lines[k:] if ln.strip()]
    if len(body) < nv + nf:
        raise MeshError("PLY file truncated")
    verts = np.array([[float(body[a].split()[c]) for c in ix] for a in range(nv)])
    faces = []
    for a in range(nv, nv + nf):
        parts = body[a].split()
        if int(parts[0]) != 3:
            raise MeshError(f"face {a - nv} is not a triangle")
        faces.append([int(t) for t in parts[1:4]])
    return verts, np.array(faces, dtype=np.int64)


def load_mesh(path):
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".off":
        verts, faces = read_off(text)
    elif path.suffix.lower() == ".ply":
        verts, faces = read_ply(text)
    else:
        raise MeshError(f"unsupported mesh format {path.suffix!r} (use .off or .ply)")
    return verts, validate_mesh(verts, faces)


def validate_mesh(verts, faces):
    """Reject meshes that are not closed, connected, orientable triangle surfaces.

    Returns the faces with a consistent winding (inconsistently wound faces are flipped).
    """
    nv = len(verts)
    if faces.size == 0:
        raise MeshError("mesh has no faces")
    if faces.min() < 0 or faces.max() >= nv:
        raise MeshError("face references a vertex index out of range")
    if np.any((faces[:, 0] == faces[:, 1]) | (faces[:, 1] == faces[:, 2]) | (faces[:, 0] == faces[:, 2])):
        raise MeshError("mesh has degenerate faces")
    used = np.zeros(nv, dtype=bool)
    used[faces.ravel()] = True
    if not used.all():
        raise MeshError(f"mesh has {int((~used).sum())} isolated vertices")

    edge_faces: dict = {}
    for fi, (a, b, c) in enumerate(faces):
        for u, v in ((a, b), (b, c), (c, a)):
            edge_faces.setdefault((min(u, v), max(u, v)), []).append(fi)
    bad = [e for e, fs in edge_faces.items() if len(fs) != 2]
    if bad:
        boundary = sum(1 for e in bad if len(edge_faces[e]) == 1)
        if boundary:
            raise MeshError(f"mesh is not closed: {boundary} boundary edges")
        raise MeshError(f"mesh is non-manifold: {len(bad)} edges shared by more than two faces")

    graph = edge_graph(verts, faces)
    ncomp, _ = csgraph.connected_components(graph, directed=False)
    if ncomp != 1:
        raise MeshError(f"mesh is disconnected: {ncomp} components")

    # propagate an orientation across faces; a conflict means non-orientable
    orient = np.zeros(len(faces), dtype=np.int8)
    orient[0] = 1
    queue = deque([0])
    while queue:
        fi = queue.popleft()
        tri = faces[fi] if orient[fi] == 1 else faces[fi][::-1]
        for u, v in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            for fj in edge_faces[(min(u, v), max(u, v))]:
                if fj == fi:
                    continue
                # neighbour must traverse the shared edge as v -> u
                a, b, c = faces[fj]
                same = (u, v) in ((a, b), (b, c), (c, a))
                want = -1 if same else 1
                if orient[fj] == 0:
                    orient[fj] = want
                    queue.append(fj)
                elif orient[fj] != want:
                    raise MeshError("mesh is not orientable")
    out = faces.copy()
    out[orient == -1] = out[orient == -1][:, ::-1]
    return out


def edge_graph(verts, faces):
    e = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    e = np.unique(np.sort(e, axis=1), axis=0)
    lengths = np.linalg.norm(verts[e[:, 0]] - verts[e[:, 1]], axis=1)
    n = len(verts)
    return sparse.coo_matrix((lengths, (e[:, 0], e[:, 1])), shape=(n, n)).tocsr()


def vertex_areas(verts, faces):
    """One third of the incident triangle areas per vertex."""
    a, b, c = verts[faces[:, 0]], verts[faces[:, 1]], verts[faces[:, 2]]
    area = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
    w = np.zeros(len(verts))
    for k in range(3):
        np.add.at(w, faces[:, k], area / 3.0)
    return w


def vertex_normals(verts, faces):
    a, b, c = verts[faces[:, 0]], verts[faces[:, 1]], verts[faces[:, 2]]
    fn = np.cross(b - a, c - a)  # area weighted
    vn = np.zeros_like(verts)
    for k in range(3):
        np.add.at(vn, faces[:, k], fn)
    return vn / np.linalg.norm(vn, axis=1, keepdims=True)


def all_pairs_graph_distances(verts, faces):
    """Dijkstra from every vertex on the edge graph weighted by edge length."""
    return csgraph.dijkstra(edge_graph(verts, faces), directed=False)


def mean_edge_length(verts, faces):
    return float(edge_graph(verts, faces).data.mean())


def icosphere(level: int = 0, radius: float = 1.0):
    """Subdivided icosahedron projected to the sphere of ``radius``."""
    t = (1.0 + 5 ** 0.5) / 2.0
    verts = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
             (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
             (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
             (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
             (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
             (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    verts = [np.array(v, dtype=float) / np.linalg.norm(v) for v in verts]
    for _ in range(level):
        cache = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    return radius * np.array(verts), np.array(faces, dtype=np.int64)


def octahedron():
    verts = np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], dtype=float)
    faces = np.array([[0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4],
                      [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5]], dtype=np.int64)
    return verts, faces


def write_off(path, verts, faces):
    lines = ["OFF", f"{len(verts)} {len(faces)} 0"]
    lines += [" ".join(repr(float(c)) for c in v) for v in verts]
    lines += ["3 " + " ".join(str(int(i)) for i in f) for f in faces]
    Path(path).write_text("\n".join(lines) + "\n")


def write_ply(path, verts, faces):
    lines = ["ply", "format ascii 1.0", f"element vertex {len(verts)}",
             "property float x", "property float y", "property float z",
             f"element face {len(faces)}", "property list uchar int vertex_indices", "end_header"]
    lines += [" ".join(repr(float(c)) for c in v) for v in verts]
    lines += ["3 " + " ".join(str(int(i)) for i in f) for f in faces]
    Path(path).write_text("\n".join(lines) + "\n")
