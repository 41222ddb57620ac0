"""Checks that a partition of the sources is a genuine partition reduction,
plus exhaustive oracles for small instances."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from ._linkage import check_transversals
from .errors import InvariantViolation, NotIndependent, TooLarge
from .instance import GammoidInstance, is_independent
from .maxflow import vertex_capacitated_flow
from .reduce import PartitionReduction

DEFAULT_BUDGET = 100_000
DEFAULT_SAMPLES = 10_000


@dataclass
class VerificationReport:
    partition_ok: bool = True
    sizes_ok: bool = True
    transversals_checked: int = 0
    failures: list[tuple[list[int], str]] = field(default_factory=list)
    mode: str = "none"
    seed: int | None = None
    dependent_transversals: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, members, reason: str) -> None:
        self.failures.append((sorted(members), reason))

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "partition_ok": self.partition_ok,
            "sizes_ok": self.sizes_ok,
            "transversals_checked": self.transversals_checked,
            "dependent_transversals": self.dependent_transversals,
            "mode": self.mode,
            "seed": self.seed,
            "failures": [{"set": y, "reason": r} for y, r in self.failures],
        }


def verify_partition(inst: GammoidInstance, pr: PartitionReduction) -> VerificationReport:
    """Disjointness, exact coverage of the sources and the part-size bound."""
    rep = VerificationReport(mode="partition")
    universe = set(inst.sources) | set(pr.dummy_sources)
    seen: dict[int, int] = {}
    for i, part in enumerate(pr.parts):
        for s in part:
            if s in seen:
                rep.partition_ok = False
                rep.fail([s], f"source in parts {seen[s]} and {i}")
            seen[s] = i
    missing = universe - set(seen)
    if missing:
        rep.partition_ok = False
        rep.fail(missing, "sources missing from every part")
    extra = set(seen) - universe
    if extra:
        rep.partition_ok = False
        rep.fail(extra, "parts contain non-sources")
    for part in pr.parts:
        if len(part) > pr.bound:
            rep.sizes_ok = False
            rep.fail(part, f"part size {len(part)} exceeds {pr.bound}")
    return rep


def transversal_count(parts) -> int:
    return math.prod(len(p) for p in parts)


def verify_weak_map(
    inst: GammoidInstance,
    pr: PartitionReduction,
    mode: str = "auto",
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
) -> VerificationReport:
    """Check that every transversal of the real-source parts is independent.

    ``mode`` is ``exhaustive``, ``sampled`` or ``auto`` (exhaustive when the
    number of transversals is at most ``budget``). Only maximal transversals
    are checked; subsets of independent sets are independent.
    """
    rep = verify_partition(inst, pr)
    if not rep.partition_ok:
        return rep
    dummies = set(pr.dummy_sources)
    parts = [[s for s in p if s not in dummies] for p in pr.parts]
    parts = [p for p in parts if p]
    total = transversal_count(parts)
    if mode == "auto":
        mode = "exhaustive" if total <= budget else "sampled"
    if mode == "exhaustive":
        rep.mode = "exhaustive"
        checked, failing, found = check_transversals(inst, parts)
    elif mode == "sampled":
        rep.mode, rep.seed = "sampled", seed
        rng = random.Random(seed)
        picks = [[rng.randrange(len(p)) for p in parts] for _ in range(samples)]
        checked, failing, found = check_transversals(inst, parts, picks=picks)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    rep.transversals_checked = checked
    rep.dependent_transversals = failing
    for y in found:
        # confirm with the independent max-flow oracle
        if is_independent(inst, y):
            raise InvariantViolation(f"linkage engine disagrees with max-flow on {y}")
        rep.fail(y, "transversal is not independent")
    if failing and not found:
        raise InvariantViolation("dependent transversals counted but none recorded")
    return rep


# ---------------------------------------------------------------------------
# routing certificates


@dataclass
class RoutingCertificate:
    paths: dict[int, list[int]]

    def to_dict(self) -> dict:
        return {str(s): p for s, p in sorted(self.paths.items())}


def validate_routing(inst: GammoidInstance, cert: RoutingCertificate, ys) -> list[str]:
    """Structural problems with ``cert`` as a routing of ``ys``."""
    bad = []
    if set(cert.paths) != set(ys):
        bad.append("paths do not match the requested sources")
    edges = set(inst.edges)
    used: dict[int, int] = {}
    for s, path in cert.paths.items():
        if not path or path[0] != s:
            bad.append(f"path for {s} does not start at it")
            continue
        if path[-1] not in inst.sink_set:
            bad.append(f"path for {s} does not end at a sink")
        if len(set(path)) != len(path):
            bad.append(f"path for {s} is not simple")
        for a, b in zip(path, path[1:]):
            if (a, b) not in edges:
                bad.append(f"path for {s} uses missing arc {a}->{b}")
        for v in path:
            if v in used and used[v] != s:
                bad.append(f"paths for {used[v]} and {s} share vertex {v}")
            used[v] = s
    return bad


def extract_routing(inst: GammoidInstance, ys) -> RoutingCertificate:
    """Vertex-disjoint paths from ``ys`` to distinct sinks."""
    ys = sorted(set(ys))
    if not set(ys) <= inst.source_set:
        raise ValueError(f"not sources: {sorted(set(ys) - inst.source_set)}")
    supply = {s: 1 for s in ys}
    demand = {z: 1 for z in inst.sinks}
    value, flow = vertex_capacitated_flow(inst.vertices, inst.edges, 1, supply, demand)
    if value < len(ys):
        raise NotIndependent(ys)
    nxt = {u: v for (u, v), x in flow.items() if x > 0}
    paths = {}
    for s in ys:
        path = [s]
        while path[-1] in nxt and len(path) <= len(inst.vertices):
            path.append(nxt[path[-1]])
        paths[s] = path
    cert = RoutingCertificate(paths)
    bad = validate_routing(inst, cert, ys)
    if bad:
        raise InvariantViolation("invalid routing certificate: " + "; ".join(bad))
    return cert


# ---------------------------------------------------------------------------
# brute force


def brute_force_coloring_number(inst: GammoidInstance, limit: int = 8) -> int:
    """Fewest independent classes covering the sources, by subset DP."""
    srcs = list(inst.sources)
    n = len(srcs)
    if n > limit:
        raise TooLarge(f"{n} sources exceed the brute-force limit {limit}")
    if n == 0:
        return 0
    full = (1 << n) - 1
    indep = [False] * (full + 1)
    indep[0] = True
    for mask in range(1, full + 1):
        low = mask & -mask
        # a superset of a dependent set is dependent
        if not indep[mask ^ low]:
            continue
        indep[mask] = is_independent(inst, [srcs[i] for i in range(n) if mask >> i & 1])
    best = [math.inf] * (full + 1)
    best[0] = 0
    for mask in range(1, full + 1):
        low = mask & -mask
        rest = mask ^ low
        sub = rest
        while True:
            cls = sub | low
            if indep[cls] and best[mask ^ cls] + 1 < best[mask]:
                best[mask] = best[mask ^ cls] + 1
            if sub == 0:
                break
            sub = (sub - 1) & rest
    if best[full] == math.inf:
        raise ValueError("some source is dependent on its own")
    return int(best[full])
