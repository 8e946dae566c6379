"""Bounded Voronoi partition of the workspace and relay candidates on shared edges.

Cells are built by clipping the workspace rectangle with one bisector
half-plane per competing site. With at most a few tens of robots this is
cheap and needs no external computational-geometry package.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DuplicateSites, NoSharedEdge, SiteOutsideWorkspace

Point = tuple[float, float]

TOL = 1e-9
MIN_SEPARATION = 1e-6


@dataclass(frozen=True)
class Workspace:
    min_corner: Point
    max_corner: Point

    def __post_init__(self):
        if not (self.min_corner[0] < self.max_corner[0] and self.min_corner[1] < self.max_corner[1]):
            raise ValueError(f"degenerate workspace {self.min_corner} -> {self.max_corner}")

    @classmethod
    def box(cls, width: float, height: float) -> Workspace:
        return cls((0.0, 0.0), (float(width), float(height)))

    @property
    def width(self) -> float:
        return self.max_corner[0] - self.min_corner[0]

    @property
    def height(self) -> float:
        return self.max_corner[1] - self.min_corner[1]

    def contains(self, p: Point, tol: float = TOL) -> bool:
        return (self.min_corner[0] - tol <= p[0] <= self.max_corner[0] + tol
                and self.min_corner[1] - tol <= p[1] <= self.max_corner[1] + tol)

    def corners(self) -> list[Point]:
        (x0, y0), (x1, y1) = self.min_corner, self.max_corner
        return [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]


@dataclass
class VoronoiCell:
    owner: int
    site: Point
    polygon: list[Point]
    # (neighbor id, (a, b)) with a < b lexicographically, shared by both owners
    neighbor_edges: list[tuple[int, tuple[Point, Point]]] = field(default_factory=list)

    def shared_edge(self, other: int) -> tuple[Point, Point] | None:
        for nid, seg in self.neighbor_edges:
            if nid == other:
                return seg
        return None

    def contains(self, p: Point, tol: float = TOL) -> bool:
        n = len(self.polygon)
        for k in range(n):
            a, b = self.polygon[k], self.polygon[(k + 1) % n]
            cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
            if cross < -tol * max(1.0, dist(a, b)):
                return False
        return True

    def area(self) -> float:
        return polygon_area(self.polygon)


@dataclass(frozen=True)
class RelayCandidate:
    position: Point
    pair: tuple[int, int]
    max_leg: float


def dist(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def polygon_area(poly: list[Point]) -> float:
    """Signed shoelace area; positive for counterclockwise vertex order."""
    s = 0.0
    n = len(poly)
    for k in range(n):
        x0, y0 = poly[k]
        x1, y1 = poly[(k + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def clip_halfplane(poly: list[Point], a: Point, b: float) -> list[Point]:
    """Keep the part of a convex polygon where a . p <= b (Sutherland-Hodgman, one edge)."""
    out: list[Point] = []
    n = len(poly)
    if n == 0:
        return out
    for k in range(n):
        p, q = poly[k], poly[(k + 1) % n]
        fp = a[0] * p[0] + a[1] * p[1] - b
        fq = a[0] * q[0] + a[1] * q[1] - b
        if fp <= 0:
            out.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            t = fp / (fp - fq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return _dedupe(out)


def _dedupe(poly: list[Point], eps: float = 1e-12) -> list[Point]:
    res: list[Point] = []
    for p in poly:
        if not res or dist(p, res[-1]) > eps:
            res.append(p)
    if len(res) > 1 and dist(res[0], res[-1]) <= eps:
        res.pop()
    return res


def _bisector(pi: Point, pj: Point) -> tuple[Point, float]:
    # points closer to pi than pj: (pj - pi) . p <= (|pj|^2 - |pi|^2) / 2
    a = (pj[0] - pi[0], pj[1] - pi[1])
    b = 0.5 * ((pj[0] ** 2 + pj[1] ** 2) - (pi[0] ** 2 + pi[1] ** 2))
    return a, b


def _edge_on_line(poly: list[Point], a: Point, b: float) -> tuple[Point, Point] | None:
    norm = math.hypot(*a)
    on = [p for p in poly if abs(a[0] * p[0] + a[1] * p[1] - b) <= TOL * max(1.0, norm)]
    if len(on) < 2:
        return None
    # a convex polygon meets a supporting line in one segment: take its extremes
    on.sort()
    seg = (on[0], on[-1])
    if dist(*seg) <= TOL:
        return None
    return seg


def compute_voronoi(sites: list[Point], workspace: Workspace) -> list[VoronoiCell]:
    """One convex, counterclockwise cell per site, clipped to the workspace.

    Adjacency is recorded only for boundaries longer than ``TOL``; cells that
    touch at a single point are not neighbours.
    """
    if not sites:
        raise ValueError("at least one site is required")
    sites = [(float(x), float(y)) for x, y in sites]
    for k, s in enumerate(sites):
        if not workspace.contains(s):
            raise SiteOutsideWorkspace(f"site {k} at {s} is outside {workspace}")
    for i in range(len(sites)):
        for j in range(i + 1, len(sites)):
            if dist(sites[i], sites[j]) < MIN_SEPARATION:
                raise DuplicateSites(f"sites {i} and {j} coincide at {sites[i]}")

    box = workspace.corners()
    cells = []
    for i, pi in enumerate(sites):
        poly = list(box)
        for j, pj in enumerate(sites):
            if j != i:
                poly = clip_halfplane(poly, *_bisector(pi, pj))
        cells.append(VoronoiCell(owner=i, site=pi, polygon=poly))

    for i in range(len(sites)):
        for j in range(i + 1, len(sites)):
            seg = _edge_on_line(cells[i].polygon, *_bisector(sites[i], sites[j]))
            if seg is not None:
                cells[i].neighbor_edges.append((j, seg))
                cells[j].neighbor_edges.append((i, seg))
    for c in cells:
        c.neighbor_edges.sort(key=lambda e: e[0])
    return cells


def _project(p: Point, a: Point, b: Point) -> float:
    dx, dy = b[0] - a[0], b[1] - a[1]
    t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy)
    return min(1.0, max(0.0, t))


def minmax_point_on_segment(pi: Point, pj: Point, seg: tuple[Point, Point]) -> tuple[Point, float]:
    """Point q on ``seg`` minimising max(|q - pi|, |q - pj|).

    The objective is convex along the segment, so its minimiser is one of: an
    endpoint, the foot of either site, or where the two distances are equal.
    """
    a, b = seg
    ts = {0.0, 1.0, _project(pi, a, b), _project(pj, a, b)}
    dx, dy = b[0] - a[0], b[1] - a[1]
    # |q(t)-pi|^2 = |q(t)-pj|^2 is linear in t
    ai, bi = (a[0] - pi[0], a[1] - pi[1]), (a[0] - pj[0], a[1] - pj[1])
    lin = 2 * ((ai[0] - bi[0]) * dx + (ai[1] - bi[1]) * dy)
    const = (ai[0] ** 2 + ai[1] ** 2) - (bi[0] ** 2 + bi[1] ** 2)
    if lin != 0.0:
        t = -const / lin
        if 0.0 <= t <= 1.0:
            ts.add(t)
    best = None
    for t in sorted(ts):
        q = (a[0] + t * dx, a[1] + t * dy)
        leg = max(dist(q, pi), dist(q, pj))
        if best is None or leg < best[1] - 1e-15:
            best = (q, leg)
    return best


def relay_point(cell_i: VoronoiCell, cell_j: VoronoiCell) -> RelayCandidate:
    # canonical orientation so (i, j) and (j, i) give bit-identical results
    if cell_j.owner < cell_i.owner:
        cell_i, cell_j = cell_j, cell_i
    seg = cell_i.shared_edge(cell_j.owner)
    if seg is None:
        raise NoSharedEdge(f"cells {cell_i.owner} and {cell_j.owner} are not adjacent")
    q, leg = minmax_point_on_segment(cell_i.site, cell_j.site, seg)
    return RelayCandidate(position=q, pair=(cell_i.owner, cell_j.owner), max_leg=leg)


def relay_candidates(cells: list[VoronoiCell]) -> list[RelayCandidate]:
    by_owner = {c.owner: c for c in cells}
    out = []
    for c in sorted(cells, key=lambda c: c.owner):
        for nid, _ in c.neighbor_edges:
            if nid > c.owner:
                out.append(relay_point(c, by_owner[nid]))
    out.sort(key=lambda r: r.pair)
    return out


def owner_of(cells: list[VoronoiCell], p: Point) -> int:
    """Owner of the cell containing ``p``; ties go to the nearest site, then lowest id."""
    return min(cells, key=lambda c: (dist(c.site, p), c.owner)).owner
