"""MATPOWER case parsing and per-unit network construction.

Only the blocks baseMVA, bus, gen and branch are interpreted, and only the
columns needed for the active-power problem: bus id / demand / voltage
magnitude, generator bus / output / status, branch endpoints / r / x /
status. Shunt and tap columns are detected and reported as ignored.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    DisconnectedNetwork,
    IgnoredDataWarning,
    MalformedCase,
    NonPositiveSusceptance,
    ZeroGeneration,
)

__all__ = [
    "BusRecord",
    "GenRecord",
    "BranchRecord",
    "CaseData",
    "GammaMode",
    "Homogeneous",
    "Tabulated",
    "Network",
    "parse_matpower",
    "load_case",
    "build_network",
    "balance_injections",
    "deduct_reference_imbalance",
    "prepare_network",
]


@dataclass(frozen=True)
class BusRecord:
    bus_id: int
    demand_p: float  # MW
    voltage_mag: float  # p.u.
    is_reference: bool = False  # tabulated slack (bus type 3)
    shunt_g: float = 0.0  # MW at V=1, ignored by the model
    shunt_b: float = 0.0  # MVAr at V=1, ignored by the model


@dataclass(frozen=True)
class GenRecord:
    bus_id: int
    output_p: float  # MW
    in_service: bool


@dataclass(frozen=True)
class BranchRecord:
    from_bus: int
    to_bus: int
    resistance_r: float  # p.u.
    reactance_x: float  # p.u.
    in_service: bool
    tap_ratio: float = 0.0  # 0 means no transformer; ignored by the model


@dataclass(frozen=True)
class CaseData:
    """Raw case content, one record per table row, order preserved."""

    name: str
    base_mva: float
    buses: tuple[BusRecord, ...]
    gens: tuple[GenRecord, ...]
    branches: tuple[BranchRecord, ...]

    def __post_init__(self):
        ids = [b.bus_id for b in self.buses]
        if len(set(ids)) != len(ids):
            raise MalformedCase("duplicate bus ids")
        known = set(ids)
        for br in self.branches:
            if br.from_bus not in known or br.to_bus not in known:
                raise MalformedCase(
                    f"branch {br.from_bus}-{br.to_bus} references unknown bus"
                )
            if br.in_service and br.reactance_x <= 0:
                raise MalformedCase(
                    f"branch {br.from_bus}-{br.to_bus} has non-positive reactance"
                )


class GammaMode:
    """How line conductances are derived from the case data."""


@dataclass(frozen=True)
class Homogeneous(GammaMode):
    """Uniform conductance-to-susceptance ratio: g_ij = gamma * b_ij."""

    gamma: float

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")


@dataclass(frozen=True)
class Tabulated(GammaMode):
    """Conductances taken from the tabulated r, x values."""


@dataclass(frozen=True)
class Network:
    """Immutable per-unit network for the active-power problem.

    Buses are re-indexed 0..n-1 internally; ``bus_ids`` maps back to the
    external numbering. Edge arrays are aligned: edge k connects internal
    buses ``edge_i[k]`` and ``edge_j[k]`` with susceptance ``b[k]`` and
    conductance ``g[k]``.
    """

    bus_ids: tuple[int, ...]
    edge_i: np.ndarray
    edge_j: np.ndarray
    b: np.ndarray  # p.u. susceptance, > 0
    g: np.ndarray  # p.u. conductance, >= 0
    voltage: np.ndarray  # p.u. magnitude
    gen_p: np.ndarray  # p.u. generation per bus
    load_p: np.ndarray  # p.u. demand per bus
    gen_buses: frozenset[int]  # internal indices with in-service generation
    ref_bus: int | None = None  # tabulated slack, internal index
    balance_scale: float = 1.0
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self, "_index", {bid: k for k, bid in enumerate(self.bus_ids)}
        )

    @property
    def n_buses(self):
        return len(self.bus_ids)

    @property
    def n_edges(self):
        return len(self.b)

    @property
    def injection(self):
        """Net active power per bus (generation minus demand), p.u."""
        return self.gen_p - self.load_p

    def index(self, bus_id):
        """Internal index of an external bus id."""
        return self._index[bus_id]


_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"


def _strip_comments(text):
    lines = []
    for line in text.splitlines():
        cut = line.find("%")
        lines.append(line if cut < 0 else line[:cut])
    return lines


def _find_matrix(lines, name):
    """Return (rows, row_line_numbers) of block ``mpc.<name> = [...];``.

    Rows are semicolon-terminated and may span lines; several rows may
    share a line.
    """
    pat = re.compile(rf"mpc\.{name}\s*=\s*\[")
    start = hit = None
    for ln, line in enumerate(lines):
        hit = pat.search(line)
        if hit:
            start = ln
            break
    if start is None:
        raise MalformedCase(f"missing block mpc.{name}")

    rows, row_lines = [], []
    cur, cur_line = [], None
    ln = start
    seg = lines[start][hit.end():]
    while True:
        end = seg.find("]")
        body = seg if end < 0 else seg[:end]
        for piece in re.split(r"(;)", body):
            if piece == ";":
                if cur:
                    rows.append(cur)
                    row_lines.append(cur_line)
                cur, cur_line = [], None
            else:
                toks = piece.split()
                if toks:
                    if cur_line is None:
                        cur_line = ln + 1
                    cur.extend(toks)
        if end >= 0:
            if cur:
                rows.append(cur)
                row_lines.append(cur_line)
            return rows, row_lines
        ln += 1
        if ln >= len(lines):
            raise MalformedCase(f"unterminated block mpc.{name}")
        seg = lines[ln]


def _num(token, line, what):
    try:
        return float(token)
    except ValueError:
        raise MalformedCase(f"non-numeric token {token!r} in {what}", line) from None


def _row_floats(row, line, what, min_cols):
    if len(row) < min_cols:
        raise MalformedCase(
            f"{what} row has {len(row)} columns, expected at least {min_cols}", line
        )
    return [_num(t, line, what) for t in row]


def parse_matpower(text, name="case"):
    """Parse MATPOWER case text into a :class:`CaseData`.

    Raises :class:`MalformedCase` (with a line number where possible) on a
    missing block, short row, or non-numeric token.
    """
    lines = _strip_comments(text)

    m = None
    for ln, line in enumerate(lines):
        hit = re.search(rf"mpc\.baseMVA\s*=\s*({_NUM})", line)
        if hit:
            m = float(hit.group(1))
            break
    if m is None:
        raise MalformedCase("missing block mpc.baseMVA")

    bus_rows, bus_lines = _find_matrix(lines, "bus")
    gen_rows, gen_lines = _find_matrix(lines, "gen")
    br_rows, br_lines = _find_matrix(lines, "branch")

    buses = []
    for row, ln in zip(bus_rows, bus_lines):
        vals = _row_floats(row, ln, "bus", 8)
        buses.append(
            BusRecord(
                bus_id=int(vals[0]),
                demand_p=vals[2],
                voltage_mag=vals[7],
                is_reference=int(vals[1]) == 3,
                shunt_g=vals[4],
                shunt_b=vals[5],
            )
        )
    gens = []
    for row, ln in zip(gen_rows, gen_lines):
        vals = _row_floats(row, ln, "gen", 8)
        gens.append(
            GenRecord(bus_id=int(vals[0]), output_p=vals[1], in_service=vals[7] > 0)
        )
    branches = []
    for row, ln in zip(br_rows, br_lines):
        vals = _row_floats(row, ln, "branch", 11)
        branches.append(
            BranchRecord(
                from_bus=int(vals[0]),
                to_bus=int(vals[1]),
                resistance_r=vals[2],
                reactance_x=vals[3],
                in_service=vals[10] > 0,
                tap_ratio=vals[8],
            )
        )
    return CaseData(
        name=name, base_mva=m, buses=tuple(buses), gens=tuple(gens),
        branches=tuple(branches),
    )


def load_case(path):
    """Read and parse a case file from disk."""
    with open(path) as fh:
        text = fh.read()
    import os

    return parse_matpower(text, name=os.path.splitext(os.path.basename(path))[0])


def _components(n, edges):
    """Connected components (lists of node indices) via BFS."""
    adj = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = [False] * n
    comps = []
    for s in range(n):
        if seen[s]:
            continue
        stack, comp = [s], []
        seen[s] = True
        while stack:
            u = stack.pop()
            comp.append(u)
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        comps.append(comp)
    return comps


def build_network(case, mode):
    """Build the per-unit :class:`Network` from a case under a conductance mode.

    Tabulated mode splits the series admittance: g = r/(r^2+x^2),
    b = x/(r^2+x^2). Homogeneous(gamma) keeps the tabulated susceptance and
    sets g = gamma * b. Out-of-service rows are dropped, parallel branches
    are merged by admittance addition, shunts and taps are ignored with a
    warning.
    """
    if any(b.shunt_g != 0 or b.shunt_b != 0 for b in case.buses) or any(
        br.tap_ratio not in (0.0, 1.0) for br in case.branches if br.in_service
    ):
        warnings.warn(
            "shunt elements and/or transformer taps present in the case are ignored",
            IgnoredDataWarning,
            stacklevel=2,
        )

    bus_ids = tuple(b.bus_id for b in case.buses)
    idx = {bid: k for k, bid in enumerate(bus_ids)}
    n = len(bus_ids)

    merged = {}  # (i, j) with i < j -> [b_sum, g_sum]
    for br in case.branches:
        if not br.in_service:
            continue
        r, x = br.resistance_r, br.reactance_x
        denom = r * r + x * x
        b = x / denom
        if b <= 0:
            raise NonPositiveSusceptance(
                f"branch {br.from_bus}-{br.to_bus}: b = {b}"
            )
        if isinstance(mode, Homogeneous):
            g = mode.gamma * b
        elif isinstance(mode, Tabulated):
            g = r / denom
        else:
            raise TypeError(f"unknown conductance mode {mode!r}")
        i, j = idx[br.from_bus], idx[br.to_bus]
        if i == j:
            raise MalformedCase(f"self-loop at bus {br.from_bus}")
        key = (min(i, j), max(i, j))
        acc = merged.setdefault(key, [0.0, 0.0])
        acc[0] += b
        acc[1] += g

    keys = sorted(merged)
    comps = _components(n, keys)
    if len(comps) > 1:
        raise DisconnectedNetwork([[bus_ids[k] for k in c] for c in comps])

    edge_i = np.array([k[0] for k in keys], dtype=int)
    edge_j = np.array([k[1] for k in keys], dtype=int)
    b_arr = np.array([merged[k][0] for k in keys])
    g_arr = np.array([merged[k][1] for k in keys])

    voltage = np.array([b.voltage_mag for b in case.buses])
    load_p = np.array([b.demand_p for b in case.buses]) / case.base_mva
    gen_p = np.zeros(n)
    gen_buses = set()
    for gen in case.gens:
        if not gen.in_service:
            continue
        gen_p[idx[gen.bus_id]] += gen.output_p / case.base_mva
        gen_buses.add(idx[gen.bus_id])

    ref = next((idx[b.bus_id] for b in case.buses if b.is_reference), None)
    return Network(
        bus_ids=bus_ids,
        edge_i=edge_i,
        edge_j=edge_j,
        b=b_arr,
        g=g_arr,
        voltage=voltage,
        gen_p=gen_p,
        load_p=load_p,
        gen_buses=frozenset(gen_buses),
        ref_bus=ref,
    )


def balance_injections(net):
    """Return a copy whose injections sum to zero exactly.

    The imbalance is removed by scaling every generator injection by the
    common factor total_demand / total_generation; demands are untouched.
    The applied factor is recorded in ``balance_scale``.
    """
    total_gen = float(net.gen_p.sum())
    total_load = float(net.load_p.sum())
    if total_gen == 0.0:
        if total_load == 0.0:
            return replace(net, balance_scale=1.0)
        raise ZeroGeneration("total generation is zero but demand is not")
    scale = total_load / total_gen
    gen_p = net.gen_p * scale
    # enforce an exactly zero sum despite rounding
    residual = gen_p.sum() - net.load_p.sum()
    if residual != 0.0 and len(net.gen_buses) > 0:
        k = max(net.gen_buses, key=lambda i: gen_p[i])
        gen_p[k] -= residual
    return replace(net, gen_p=gen_p, balance_scale=net.balance_scale * scale)


def deduct_reference_imbalance(net):
    """Balance by removing the imbalance at the reference generator.

    Tabulated cases pre-allocate the transmission losses to the reference
    (slack) bus; subtracting the imbalance there recovers the underlying
    lossless dispatch with every other injection untouched. Falls back to
    proportional scaling when the case has no generating reference bus or
    the deduction would drive it negative.
    """
    imbalance = float(net.gen_p.sum() - net.load_p.sum())
    ref = net.ref_bus
    if ref is None or ref not in net.gen_buses or net.gen_p[ref] <= imbalance:
        return balance_injections(net)
    gen_p = net.gen_p.copy()
    gen_p[ref] -= imbalance
    return replace(net, gen_p=gen_p)


def prepare_network(case, mode):
    """Build and balance a network for analysis in one step."""
    return deduct_reference_imbalance(build_network(case, mode))
