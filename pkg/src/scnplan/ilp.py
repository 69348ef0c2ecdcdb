"""Exact-model emission and solution auditing.

The full integer model is written as a solver-neutral LP-format file so it
can be handed to any MILP solver; the relaxed variant keeps only demand
coverage and per-(link, lane) capacity and yields a lower bound on the
lane count. Heuristic solutions can be exported as warm-start files. The
validator re-checks a finished assignment against the same rules the model
encodes, reporting violations as data rather than raising.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .allocation import Channel, Solution
from .errors import ScnPlanError
from .heuristic import PlanContext
from .instance import Instance
from .physical import fs_required, ocs_required
from .topology import CandidatePath, Pair

Term = tuple[int, str]


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str  # "binary" or "integer"
    lo: int = 0
    hi: int | None = None


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple[Term, ...]
    sense: str  # "<=", ">=", "="
    rhs: int


@dataclass
class LinearModel:
    """Minimization model in a writer-friendly intermediate form."""

    name: str
    objective: tuple[Term, ...]
    constraints: list[Constraint] = field(default_factory=list)
    variables: list[Variable] = field(default_factory=list)

    def variable_names(self) -> set[str]:
        return {v.name for v in self.variables}

    def to_lp(self) -> str:
        """CPLEX-style LP text; deterministic for a fixed instance."""
        out = [f"\\ {self.name}", "Minimize", f" obj: {_expr(self.objective)}", "Subject To"]
        for con in self.constraints:
            op = {"<=": "<=", ">=": ">=", "=": "="}[con.sense]
            out.append(f" {con.name}: {_expr(con.terms)} {op} {con.rhs}")
        bounded = [v for v in self.variables if v.kind == "integer"]
        if bounded:
            out.append("Bounds")
            for v in bounded:
                hi = "+inf" if v.hi is None else str(v.hi)
                out.append(f" {v.lo} <= {v.name} <= {hi}")
        binaries = [v.name for v in self.variables if v.kind == "binary"]
        if binaries:
            out.append("Binaries")
            out.extend(f" {name}" for name in binaries)
        generals = [v.name for v in self.variables if v.kind == "integer"]
        if generals:
            out.append("Generals")
            out.extend(f" {name}" for name in generals)
        out.append("End")
        return "\n".join(out) + "\n"


def _expr(terms: Sequence[Term]) -> str:
    if not terms:
        return "0 " + _ZERO_VAR
    parts = []
    for i, (coef, var) in enumerate(terms):
        if coef < 0:
            prefix = "- "
        elif i == 0:
            prefix = ""
        else:
            prefix = "+ "
        magnitude = abs(coef)
        body = var if magnitude == 1 else f"{magnitude} {var}"
        parts.append(prefix + body)
    return " ".join(parts)


_ZERO_VAR = "zero"


@dataclass(frozen=True)
class ModelPhase:
    """Which objective of the lexicographic pair a model targets."""

    phase: str = "main"  # "main" or "minor"
    obj1_bound: int | None = None

    def __post_init__(self):
        if self.phase not in ("main", "minor"):
            raise ScnPlanError(f"unknown model phase {self.phase!r}")
        if self.phase == "minor" and self.obj1_bound is None:
            raise ScnPlanError("the minor phase needs the lane budget found by the main phase")


class IlpVariableSpace:
    """Variable names for one instance, mirroring the model's index sets."""

    def __init__(self, instance: Instance, ctx: PlanContext):
        self.instance = instance
        self.ctx = ctx
        self.lanes = range(1, instance.profile.lanes + 1)
        self.u = {l: f"u_l{l}" for l in self.lanes}
        # lightpath-indexed families; paths are identified by their rank
        self.lightpaths: list[tuple[int, CandidatePath]] = []
        for r in instance.requests:
            for path in ctx.paths_by_pair.get(r.pair, ()):
                self.lightpaths.append((r.id, path))
        self.x = {}
        self.o = {}
        self.alpha = {}
        self.beta = {}
        for rid, path in self.lightpaths:
            for l in self.lanes:
                key = (rid, path.rank, l)
                stem = f"r{rid}_p{path.rank}_l{l}"
                self.x[key] = f"x_{stem}"
                self.o[key] = f"o_{stem}"
                if instance.profile.is_switching(l):
                    self.alpha[key] = f"a_{stem}"
                    self.beta[key] = f"b_{stem}"
        # ordered pairs of distinct lightpaths whose paths share a link
        self.conflicts: list[tuple[tuple[int, CandidatePath], tuple[int, CandidatePath]]] = []
        for i, a in enumerate(self.lightpaths):
            for b in self.lightpaths[i + 1:]:
                if a[0] == b[0] and a[1].rank == b[1].rank:
                    continue
                if set(a[1].link_ids) & set(b[1].link_ids):
                    self.conflicts.append((a, b))
        self.theta = {}
        for (r1, p1), (r2, p2) in self.conflicts:
            for l in self.lanes:
                if not instance.profile.is_switching(l):
                    continue
                self.theta[(r1, p1.rank, r2, p2.rank, l)] = (
                    f"t_r{r1}p{p1.rank}_r{r2}p{p2.rank}_l{l}"
                )
                self.theta[(r2, p2.rank, r1, p1.rank, l)] = (
                    f"t_r{r2}p{p2.rank}_r{r1}p{p1.rank}_l{l}"
                )

    def t_oc(self, path: CandidatePath) -> int:
        return self.ctx.path_info[path][0]


def emit_full_model(
    instance: Instance,
    phase: ModelPhase = ModelPhase(),
    *,
    context: PlanContext | None = None,
) -> LinearModel:
    """The complete lane/spectrum assignment model for one phase.

    The minor phase swaps the objective for the switching-lane count and
    caps the total lane count at the main phase's optimum. The redundant
    per-(link, lane) capacity cut is always included; it tightens the
    relaxation considerably.
    """
    ctx = context or PlanContext(instance)
    space = IlpVariableSpace(instance, ctx)
    profile = instance.profile
    grid = instance.physics.grid
    f_max, fs_max, fs_oc, fs_gb = grid.f_max, grid.fs_max, grid.fs_per_oc, grid.fs_per_gb
    ocs_cap = grid.ocs_per_lane
    model = LinearModel(
        name=f"scnplan rscsa {phase.phase} phase: |R|={len(instance.requests)} "
             f"|L|={profile.lanes} |LW|={len(profile.lw)} k={instance.k}",
        objective=tuple(
            (1, space.u[l]) for l in space.lanes
            if phase.phase == "main" or profile.is_switching(l)
        ),
    )
    cons = model.constraints

    for r in instance.requests:
        terms = [
            (space.t_oc(path), space.o[(r.id, path.rank, l)])
            for path in ctx.paths_by_pair.get(r.pair, ())
            for l in space.lanes
        ]
        cons.append(Constraint(f"demand_r{r.id}", tuple(terms), ">=", r.gbps))

    for rid, path in space.lightpaths:
        for l in space.lanes:
            key = (rid, path.rank, l)
            if not profile.is_switching(l):
                cons.append(Constraint(
                    f"act_r{rid}_p{path.rank}_l{l}",
                    ((fs_max, space.x[key]), (-fs_oc, space.o[key])),
                    ">=", 0,
                ))
            else:
                cons.append(Constraint(
                    f"span_r{rid}_p{path.rank}_l{l}",
                    (
                        (1, space.beta[key]),
                        (-1, space.alpha[key]),
                        (-fs_oc, space.o[key]),
                        (1, space.x[key]),
                    ),
                    "=", 0,
                ))
                cons.append(Constraint(
                    f"grid_r{rid}_p{path.rank}_l{l}",
                    ((f_max, space.x[key]), (-1, space.beta[key])),
                    ">=", 0,
                ))

    lane_activity = len(instance.requests) * instance.k
    for l in space.lanes:
        terms = [(lane_activity, space.u[l])]
        terms += [(-1, space.x[(rid, path.rank, l)]) for rid, path in space.lightpaths]
        cons.append(Constraint(f"laneuse_l{l}", tuple(terms), ">=", 0))

    for (r1, p1), (r2, p2) in space.conflicts:
        if p1.nodes == p2.nodes:
            continue
        for l in space.lanes:
            if profile.is_switching(l):
                continue
            for (ra, pa), (rb, pb) in (((r1, p1), (r2, p2)), ((r2, p2), (r1, p1))):
                cons.append(Constraint(
                    f"excl_r{ra}p{pa.rank}_r{rb}p{pb.rank}_l{l}",
                    (
                        (-fs_max, space.x[(ra, pa.rank, l)]),
                        (-fs_oc, space.o[(rb, pb.rank, l)]),
                    ),
                    ">=", -fs_max,
                ))

    for pair_idx, pair in enumerate(instance.pairs):
        members = [r for r in instance.requests if r.pair == pair]
        for path in ctx.paths_by_pair.get(pair, ()):
            for l in space.lanes:
                if profile.is_switching(l):
                    continue
                terms = [(fs_oc, space.o[(r.id, path.rank, l)]) for r in members]
                cons.append(Constraint(
                    f"paircap_np{pair_idx}_p{path.rank}_l{l}", tuple(terms), "<=", fs_max,
                ))

    for (r1, p1), (r2, p2) in space.conflicts:
        same_path = p1.nodes == p2.nodes
        for l in space.lanes:
            if not profile.is_switching(l):
                continue
            ab = space.theta[(r1, p1.rank, r2, p2.rank, l)]
            ba = space.theta[(r2, p2.rank, r1, p1.rank, l)]
            cons.append(Constraint(
                f"ordpair_r{r1}p{p1.rank}_r{r2}p{p2.rank}_l{l}",
                ((1, ab), (1, ba)), "=", 1,
            ))
            for (ra, pa), (rb, pb), th in (
                ((r1, p1), (r2, p2), ab),
                ((r2, p2), (r1, p1), ba),
            ):
                ka, kb = (ra, pa.rank, l), (rb, pb.rank, l)
                if same_path:
                    # same pair and path: contiguous stacking, no guard
                    cons.append(Constraint(
                        f"sep_r{ra}p{pa.rank}_r{rb}p{pb.rank}_l{l}",
                        (
                            (1, space.alpha[kb]),
                            (-fs_max, th),
                            (-1, space.beta[ka]),
                            (-1, space.x[ka]),
                        ),
                        ">=", -fs_max,
                    ))
                else:
                    cons.append(Constraint(
                        f"sep_r{ra}p{pa.rank}_r{rb}p{pb.rank}_l{l}",
                        (
                            (1, space.alpha[kb]),
                            (-(fs_max + fs_gb), th),
                            (-1, space.beta[ka]),
                            (-(fs_gb + 1), space.x[ka]),
                        ),
                        ">=", -(fs_max + fs_gb),
                    ))

    _append_linkcap(cons, instance, space, fs_max, fs_oc)

    if phase.phase == "minor":
        cons.append(Constraint(
            "obj1cap", tuple((1, space.u[l]) for l in space.lanes), "<=", phase.obj1_bound,
        ))

    model.variables = _collect_variables(space, ocs_cap, f_max)
    return model


def emit_relaxed_model(
    instance: Instance, *, context: PlanContext | None = None
) -> LinearModel:
    """Lane-count lower-bound model: demand plus per-(link, lane) capacity.

    Spectrum contiguity, guard bands, pair exclusivity, and the minor
    objective are all dropped, so the optimum bounds the full problem from
    below regardless of the lane profile.
    """
    ctx = context or PlanContext(instance)
    space = IlpVariableSpace(instance, ctx)
    grid = instance.physics.grid
    model = LinearModel(
        name=f"scnplan relaxed lane bound: |R|={len(instance.requests)} "
             f"|L|={instance.profile.lanes} k={instance.k}",
        objective=tuple((1, space.u[l]) for l in space.lanes),
    )
    for r in instance.requests:
        terms = [
            (space.t_oc(path), space.o[(r.id, path.rank, l)])
            for path in ctx.paths_by_pair.get(r.pair, ())
            for l in space.lanes
        ]
        model.constraints.append(Constraint(f"demand_r{r.id}", tuple(terms), ">=", r.gbps))
    _append_linkcap(model.constraints, instance, space, grid.fs_max, grid.fs_per_oc)
    variables = [Variable(space.u[l], "binary") for l in space.lanes]
    variables += [
        Variable(space.o[(rid, p.rank, l)], "integer", 0, grid.ocs_per_lane)
        for rid, p in space.lightpaths
        for l in space.lanes
    ]
    model.variables = variables
    return model


def _append_linkcap(cons, instance, space, fs_max, fs_oc):
    for e in range(instance.network.num_links):
        for l in space.lanes:
            terms = [(fs_max, space.u[l])]
            terms += [
                (-fs_oc, space.o[(rid, path.rank, l)])
                for rid, path in space.lightpaths
                if e in path.link_ids
            ]
            cons.append(Constraint(f"linkcap_e{e}_l{l}", tuple(terms), ">=", 0))


def _collect_variables(space: IlpVariableSpace, ocs_cap: int, f_max: int) -> list[Variable]:
    out = [Variable(name, "binary") for name in space.u.values()]
    out += [Variable(name, "binary") for name in space.x.values()]
    out += [Variable(name, "integer", 0, ocs_cap) for name in space.o.values()]
    out += [Variable(name, "integer", 0, f_max) for name in space.alpha.values()]
    out += [Variable(name, "integer", 0, f_max) for name in space.beta.values()]
    out += [Variable(name, "binary") for name in space.theta.values()]
    return out


# -- warm starts ------------------------------------------------------------


def warm_start_values(
    instance: Instance, solution: Solution, *, context: PlanContext | None = None
) -> dict[str, int]:
    """Variable assignment matching a heuristic solution, for MIP starts.

    Channels are mapped onto (request, path rank, lane) triples; ordering
    variables between co-laned blocks are set from the actual slot
    positions and default to a canonical order everywhere else.
    """
    ctx = context or PlanContext(instance)
    space = IlpVariableSpace(instance, ctx)
    values = {name: 0 for name in _names(space)}
    rank_of = {}
    for pair, paths in ctx.paths_by_pair.items():
        for p in paths:
            rank_of[(pair, p.nodes)] = p.rank
    seen_span: set[tuple[int, int, int]] = set()
    for ch in solution.channels:
        rank = rank_of.get((ch.pair, ch.path.nodes))
        if rank is None:
            raise ScnPlanError(
                f"channel of request {ch.request_id} uses a path outside the candidate set"
            )
        key = (ch.request_id, rank, ch.lane)
        values[space.x[key]] = 1
        values[space.o[key]] += ch.oc_count
        values[space.u[ch.lane]] = 1
        if key in space.alpha:
            if key in seen_span:
                values[space.alpha[key]] = min(values[space.alpha[key]], ch.fs_start)
                values[space.beta[key]] = max(values[space.beta[key]], ch.fs_end)
            else:
                values[space.alpha[key]] = ch.fs_start
                values[space.beta[key]] = ch.fs_end
                seen_span.add(key)
    for key in seen_span:
        span = values[space.beta[key]] - values[space.alpha[key]] + 1
        if span != values[space.o[key]] * instance.physics.grid.fs_per_oc:
            raise ScnPlanError(
                "solution not representable as a single-interval start: request "
                f"{key[0]} holds split spectrum on path rank {key[1]}, lane {key[2]}"
            )
    for (r1, k1, r2, k2, l), name in space.theta.items():
        a_on = values[space.x[(r1, k1, l)]] == 1
        b_on = values[space.x[(r2, k2, l)]] == 1
        if a_on and b_on:
            values[name] = 1 if values[space.beta[(r1, k1, l)]] < values[space.alpha[(r2, k2, l)]] else 0
        elif a_on:
            values[name] = 0
        elif b_on:
            values[name] = 1
        else:
            values[name] = 1 if (r1, k1) < (r2, k2) else 0
    return values


def _names(space: IlpVariableSpace) -> Iterable[str]:
    yield from space.u.values()
    yield from space.x.values()
    yield from space.o.values()
    yield from space.alpha.values()
    yield from space.beta.values()
    yield from space.theta.values()


def write_warm_start(values: dict[str, int]) -> str:
    return "\n".join(f"{name}={value}" for name, value in values.items()) + "\n"


# -- solution audit ----------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    category: str
    message: str


@dataclass
class AuditReport:
    violations: list[Violation] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def categories(self) -> set[str]:
        return {v.category for v in self.violations}

    def render(self) -> str:
        lines = ["audit: ok" if self.ok else f"audit: {len(self.violations)} violation(s)"]
        lines += [f"  [{v.category}] {v.message}" for v in self.violations]
        lines += [f"  note: {n}" for n in self.notes]
        return "\n".join(lines) + "\n"


def validate_solution(instance: Instance, solution: Solution) -> AuditReport:
    """Audit a finished assignment against the full constraint set.

    Lane continuity and spectrum continuity cannot be violated in the
    export schema (one lane and one slot interval per channel), so the
    audit covers demand coverage, grid bounds, carrier sizing,
    bypass-lane exclusivity and pooling, spectrum overlap, and guard
    bands. Violations are data; nothing raises.
    """
    report = AuditReport()
    grid = instance.physics.grid
    profile = instance.profile
    mod_by_name = {m.name: m for m in instance.physics.modulations.entries}
    residual = dict(solution.unserved)

    carried: dict[int, int] = {r.id: 0 for r in instance.requests}
    by_link_lane: dict[tuple[int, int], list[Channel]] = {}
    for ch in solution.channels:
        if not 1 <= ch.lane <= profile.lanes:
            report.violations.append(Violation(
                "lane-range", f"channel {ch.id} uses lane {ch.lane} outside 1..{profile.lanes}"
            ))
            continue
        if ch.oc_count < 1:
            report.violations.append(Violation(
                "empty-channel", f"channel {ch.id} carries no optical carriers"
            ))
        if ch.fs_start < 0 or ch.fs_end > grid.f_max:
            report.violations.append(Violation(
                "grid-bound",
                f"channel {ch.id} interval [{ch.fs_start}, {ch.fs_end}] exceeds grid 0..{grid.f_max}",
            ))
        if ch.fs_end - ch.fs_start + 1 != ch.oc_count * grid.fs_per_oc:
            report.violations.append(Violation(
                "contiguity",
                f"channel {ch.id} interval length {ch.fs_end - ch.fs_start + 1} does not match "
                f"{ch.oc_count} carriers of {grid.fs_per_oc} slices",
            ))
        mod = mod_by_name.get(ch.modulation)
        if mod is None:
            report.violations.append(Violation(
                "modulation-unknown", f"channel {ch.id} uses unknown format {ch.modulation!r}"
            ))
        else:
            if mod.reach_km < ch.path.length_km:
                report.violations.append(Violation(
                    "modulation-reach",
                    f"channel {ch.id}: {ch.modulation} reaches {mod.reach_km} km but the "
                    f"path is {ch.path.length_km} km",
                ))
            if ch.request_id in carried:
                carried[ch.request_id] += mod.gbps_per_oc * ch.oc_count
        for e in ch.path.link_ids:
            by_link_lane.setdefault((e, ch.lane), []).append(ch)

    for r in instance.requests:
        if carried[r.id] + residual.get(r.id, 0) < r.gbps:
            report.violations.append(Violation(
                "demand-shortfall",
                f"request {r.id} needs {r.gbps} Gbps but channels carry {carried[r.id]} "
                f"(+{residual.get(r.id, 0)} declared unserved)",
            ))

    for (e, lane), channels in sorted(by_link_lane.items()):
        link = instance.network.links[e]
        where = f"link {link.src!r}->{link.dst!r} lane {lane}"
        blocks = sorted(channels, key=lambda c: (c.fs_start, c.fs_end, c.id))
        for a, b in zip(blocks, blocks[1:]):
            if b.fs_start <= a.fs_end:
                report.violations.append(Violation(
                    "overlap",
                    f"channels {a.id} and {b.id} overlap on {where} "
                    f"([{a.fs_start},{a.fs_end}] vs [{b.fs_start},{b.fs_end}])",
                ))
        if not profile.is_switching(lane):
            paths = {c.path.nodes for c in channels}
            if len(paths) > 1:
                report.violations.append(Violation(
                    "lane-double-booking",
                    f"{where} carries channels of {len(paths)} different paths "
                    f"but has no wavelength switching",
                ))
            elif len({c.pair for c in channels}) > 1:
                report.violations.append(Violation(
                    "cross-pair-sharing",
                    f"{where} packs channels of different node pairs into one spatial channel",
                ))
            total = sum(c.oc_count for c in channels) * grid.fs_per_oc
            if total > grid.fs_max:
                report.violations.append(Violation(
                    "lane-capacity", f"{where} holds {total} slices > {grid.fs_max}"
                ))
        else:
            for a, b in zip(blocks, blocks[1:]):
                if b.fs_start <= a.fs_end:
                    continue  # already reported as overlap
                if (a.pair, a.path.nodes) != (b.pair, b.path.nodes):
                    gap = b.fs_start - a.fs_end - 1
                    if gap < grid.fs_per_gb:
                        report.violations.append(Violation(
                            "guard-band",
                            f"channels {a.id} and {b.id} of different pairs sit {gap} "
                            f"slices apart on {where} (need {grid.fs_per_gb})",
                        ))
    if residual:
        report.notes.append(
            "declared unserved: "
            + ", ".join(f"request {rid}: {rem} Gbps" for rid, rem in sorted(residual.items()))
        )
    return report


def weak_lower_bound(instance: Instance, *, context: PlanContext | None = None) -> int:
    """Cheap lane-count bound from links every candidate of a request uses.

    For each link, sum the minimum slot need of all requests forced over
    it, then take the worst link's ceiling against the lane size. Never
    exceeds the true optimum; often far below it.
    """
    ctx = context or PlanContext(instance)
    grid = instance.physics.grid
    forced: dict[int, int] = {}
    for r in instance.requests:
        paths = ctx.paths_by_pair.get(r.pair, ())
        if not paths:
            continue
        need = min(
            fs_required(grid, ocs_required(r.gbps, ctx.path_info[p][0])) for p in paths
        )
        shared = set(paths[0].link_ids)
        for p in paths[1:]:
            shared &= set(p.link_ids)
        for e in shared:
            forced[e] = forced.get(e, 0) + need
    if not forced:
        return 0
    worst = max(forced.values())
    return -(-worst // grid.fs_max)
