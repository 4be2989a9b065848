"""Generalized broken bicharacteristic trees.

At a hyperbolic point of the interface a ray may continue transmitted (the
sign of ``xi`` kept) or reflected (``xi -> -xi``); both continuations share
``(y, eta)`` with the arrival point. Each node carries a strength exponent:
the reflected wave is weaker by ``h^alpha``, so reflection adds ``alpha``.
"""

from __future__ import annotations

import json
import logging
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConormalLabError, NotHyperbolic
from .demos import matches_remark36, remark36_family
from .flow import RayConfig, RaySegment, caratheodory_patch, integrate_bicharacteristic
from .hamiltonian import Glancing, HamiltonianSpec, Hyperbolic, PhasePoint, classify_boundary_point, eval_p

log = logging.getLogger(__name__)

BRANCH_KINDS = ("incident", "transmitted", "reflected", "stuck")
STATUSES = ("completed", "hit_interface", "glancing_nonunique", "step_underflow")


def branch_gbb(spec: HamiltonianSpec, crossing: PhasePoint, parent_strength: float, alpha: float | None = None):
    """Split an arrival at a hyperbolic interface point.

    Returns ``[(point, "transmitted", strength), (point, "reflected", strength + alpha)]``
    with ``xi = +-xi_plus`` and ``(y, eta)`` copied from ``crossing``.
    """
    alpha = spec.alpha if alpha is None else alpha
    cls = classify_boundary_point(spec, crossing.y, crossing.eta)
    if not isinstance(cls, Hyperbolic):
        raise NotHyperbolic(f"boundary point over y={crossing.y}, eta={crossing.eta} is {type(cls).__name__}")
    sign = 1.0 if crossing.xi >= 0 else -1.0
    xi_t = sign * cls.xi_plus
    transmitted = PhasePoint(0.0, crossing.y, xi_t, crossing.eta)
    reflected = PhasePoint(0.0, crossing.y, -xi_t, crossing.eta)
    return [(transmitted, "transmitted", parent_strength),
            (reflected, "reflected", parent_strength + alpha)]


@dataclass
class GBBNode:
    id: int
    parent: int | None
    branch_kind: str
    strength: float
    depth: int
    segment: RaySegment
    message: str = ""

    @property
    def status(self) -> str:
        return self.segment.status


@dataclass
class GBBTree:
    spec: HamiltonianSpec
    nodes: list[GBBNode] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def children(self, node_id: int) -> list[GBBNode]:
        return [n for n in self.nodes if n.parent == node_id]

    def path(self, node_id: int) -> list[GBBNode]:
        by_id = {n.id: n for n in self.nodes}
        out = [by_id[node_id]]
        while out[-1].parent is not None:
            out.append(by_id[out[-1].parent])
        return out[::-1]

    def leaves(self) -> list[GBBNode]:
        parents = {n.parent for n in self.nodes}
        return [n for n in self.nodes if n.id not in parents]

    def to_dict(self) -> dict:
        nodes = []
        for n in self.nodes:
            samples = np.column_stack([n.segment.s, n.segment.z])
            nodes.append({
                "id": n.id,
                "parent": n.parent,
                "branch_kind": n.branch_kind,
                "strength": n.strength,
                "status": n.status,
                "depth": n.depth,
                "message": n.message or n.segment.message,
                "samples": samples.tolist(),
            })
        return {"spec": self.spec.describe(), "columns": _columns(self.spec), "meta": self.meta, "nodes": nodes}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _columns(spec: HamiltonianSpec) -> list[str]:
    n = spec.ntan
    ys = ["y"] if n == 1 else [f"y{i + 1}" for i in range(n)]
    etas = ["eta"] if n == 1 else [f"eta{i + 1}" for i in range(n)]
    return ["s", "x", *ys, "xi", *etas]


def _stub(pt: PhasePoint, s: float, status: str, message: str = "") -> RaySegment:
    return RaySegment(np.array([s]), pt.to_array()[None, :], status, message)


def trace_gbb_tree(spec: HamiltonianSpec, pt0: PhasePoint, s_max: float, max_depth: int = 3,
                   strength_cap: float | None = None, cfg: RayConfig | None = None,
                   root_strength: float = 0.0, p_tol: float = 1e-8) -> GBBTree:
    """Breadth-first expansion of all transmitted/reflected continuations of ``pt0``.

    ``max_depth`` bounds the number of branch points on any root path;
    children whose strength exceeds ``strength_cap`` are pruned. Per-branch
    failures become node statuses; the tree is always returned.
    """
    cfg = cfg or RayConfig()
    p0 = eval_p(spec, pt0)
    if abs(p0) > p_tol:
        raise ValueError(f"seed is off the characteristic set: p={p0:.3e}")
    tree = GBBTree(spec, meta={"s_max": s_max, "max_depth": max_depth, "strength_cap": strength_cap,
                               "root_strength": root_strength, "alpha": spec.alpha, "x_patch": spec.x_patch,
                               "xi_min": spec.xi_min})
    queue = deque([(None, "incident", root_strength, 0, pt0, 0.0)])
    next_id = 0
    while queue:
        parent, kind, strength, depth, start, s0 = queue.popleft()
        node_id = next_id
        next_id += 1
        seg = _trace_one(spec, start, s0, s_max, cfg)
        node = GBBNode(node_id, parent, kind, strength, depth, seg)
        tree.nodes.append(node)
        if seg.status == "glancing_nonunique":
            _note_nonunique(tree, node)
        if seg.status != "hit_interface" or depth >= max_depth:
            continue
        crossing = seg.end
        try:
            children = branch_gbb(spec, crossing, strength)
        except NotHyperbolic as exc:
            node.message = str(exc)
            continue
        for pt, ckind, cstrength in children:
            if strength_cap is not None and cstrength > strength_cap:
                continue
            queue.append((node_id, ckind, cstrength, depth + 1, pt, float(seg.s[-1])))
    return tree


def _trace_one(spec, start: PhasePoint, s0: float, s_max: float, cfg: RayConfig) -> RaySegment:
    if start.x == 0.0 and spec.profile.has_interface:
        cls = classify_boundary_point(spec, start.y, start.eta)
        glancing = isinstance(cls, Glancing) or abs(start.xi) < spec.xi_min
        if glancing and spec.alpha <= 2:
            return _stub(start, s0, "glancing_nonunique",
                         f"seed on the interface at a glancing point, alpha={spec.alpha} <= 2")
    try:
        return integrate_bicharacteristic(spec, start, (s0, s_max), cfg)
    except ConormalLabError as exc:
        log.warning("branch from %s failed: %s", start, exc)
        return _stub(start, s0, "step_underflow", f"{type(exc).__name__}: {exc}")


def _note_nonunique(tree: GBBTree, node: GBBNode) -> None:
    pt = node.segment.end
    if not (matches_remark36(tree.spec) and pt.x == 0.0 and pt.xi == 0.0 and pt.eta == (1.0,)):
        return
    # the sticking ray and rays detaching after any delay all start from this point
    s_here = float(node.segment.s[-1])
    s_end = float(tree.meta["s_max"])
    grid = np.linspace(s_here, s_end, 11)
    members = []
    for delay in (math.inf, 0.0, 0.5 * (s_end - s_here)):
        s0 = s_here + delay
        samples = []
        for s in grid:
            z = remark36_family(s0 - s_here, s - s_here).to_array()
            z[1] += pt.y[0]
            samples.append([float(s), *z.tolist()])
        members.append({"branch_kind": "stuck" if math.isinf(delay) else "detaching",
                        "detach_at": None if math.isinf(delay) else s0, "samples": samples})
    tree.meta.setdefault("nonunique_families", []).append({"node": node.id, "members": members})


def crossing_xi_jump(tree: GBBTree, node: GBBNode, cfg: RayConfig | None = None) -> float:
    """``|xi(0-) - xi(0+)|`` at the crossing that starts a transmitted node.

    ``xi(0-)`` is the parent's arrival value; ``xi(0+)`` comes from carrying
    the child back from the far edge of the band to ``x = 0``.
    """
    if node.branch_kind != "transmitted":
        raise ValueError("only transmitted nodes cross the interface")
    spec = tree.spec
    parent = next(n for n in tree.nodes if n.id == node.parent)
    z = node.segment.z
    edge = np.flatnonzero(np.abs(z[:, 0]) >= spec.x_patch * (1 - 1e-12))
    if not edge.size:
        raise ValueError("child never left the crossing band")
    k = int(edge[0])
    _, zs = caratheodory_patch(spec, node.segment.s[k], z[k], 0.0, cfg, samples=False)
    return abs(float(zs[-1][spec.ntan + 1]) - parent.segment.end.xi)
