"""Flux-charge analysis: integration, branch structure, loop metrics,
and device classification.

All functions here operate on the post-initialization window of a trace
(``trace.analysis_slice()``); array outputs are indexed relative to that
window.  Everything is pure over its inputs.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import ConfigError, SegmentationError
from .sweep import IVTrace

__all__ = [
    "BranchSegmentation",
    "ClassificationReport",
    "FluxChargeTrace",
    "FqLoopArea",
    "IVHysteresis",
    "MatchResult",
    "MemristanceProfile",
    "RoleResult",
    "Tolerances",
    "branch_roles",
    "classify",
    "fq_loop_area",
    "integrate_flux_charge",
    "iv_hysteresis",
    "memristance",
    "memristance_matching",
    "prefix_offsets",
    "segment_branches",
    "shoelace_area",
]

BRANCH_NAMES = {1: "B1", 2: "B2", 3: "B3", 4: "B4"}

LABEL_NON = "NonMemristive"
LABEL_LINEAR = "LinearMemristor"
LABEL_NONLINEAR = "NonlinearMemristor"

ROLE_READ = "Read"
ROLE_WRITE = "Write"
ROLE_MIXED = "Mixed"


@dataclass(frozen=True)
class Tolerances:
    """Analysis thresholds.  All are config-overridable and echoed in
    reports.

    ``v_eps``, ``dq_tol``, ``i_origin_tol``, ``origin_probe``, and
    ``overlap_window`` are relative: fractions of the window's peak
    voltage, peak charge step, and peak current respectively.
    """

    eps_hys: float = 0.02            # normalized flux-charge loop area
    iv_hys_tol: float = 5e-3         # normalized I-V loop area
    r_tol: float = 1e-3              # affine-fit residual marking a read branch
    m_tol: float = 0.05              # relative memristance-matching distance
    v_eps: float = 1e-3              # zero-voltage band
    dq_tol: float = 1e-3             # charge-step validity floor
    i_origin_tol: float = 5e-3       # pinch threshold on near-origin current
    origin_probe: float = 0.1        # where near-origin branch slopes are sampled
    overlap_window: float = 0.1      # half-width of the near-origin overlap window
    overlap_tol: float = 1e-3        # branch-difference ceiling inside the window
    slope_sig: float = 1e-3          # significance floor for slope differences
    mono_tol: float = 0.8            # net-drift fraction calling M monotone
    rect_tol: float = 0.1            # rectification-ratio deadband
    superlin_tol: float = 1.25       # excess over ohmic doubling calling a rise diode-like
    smooth_window: int = 0           # pre-segmentation moving average (0 = off)

    def __post_init__(self) -> None:
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if f.name == "smooth_window":
                if not isinstance(value, int) or value < 0:
                    raise ConfigError(f"smooth_window must be an integer >= 0, got {value}")
            elif not value > 0:
                raise ConfigError(f"tolerance {f.name} must be positive, got {value}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class FluxChargeTrace:
    """Cumulative flux and charge over the analysis window."""

    t: np.ndarray
    v: np.ndarray
    i: np.ndarray
    phi: np.ndarray
    q: np.ndarray
    phi0: float
    q0: float

    def __len__(self) -> int:
        return int(self.t.size)


def prefix_offsets(trace: IVTrace) -> tuple[float, float]:
    """Flux and charge accumulated over the initialization prefix.

    Feeding these into :func:`integrate_flux_charge` makes the analyzed
    curves continuous with the device's actual history.
    """
    k = trace.t0_index
    if k == 0:
        return 0.0, 0.0
    t = trace.t[: k + 1]
    phi0 = float(np.trapezoid(trace.v[: k + 1], t))
    q0 = float(np.trapezoid(trace.i[: k + 1], t))
    return phi0, q0


def integrate_flux_charge(
    trace: IVTrace, phi0: float = 0.0, q0: float = 0.0
) -> FluxChargeTrace:
    """Trapezoidal cumulative flux and charge, shifted by the offsets."""
    sl = trace.analysis_slice()
    t = trace.t[sl]
    v = trace.v[sl]
    i = trace.i[sl]
    if t.size < 2:
        raise ConfigError("flux-charge integration needs at least 2 analyzed samples")
    phi = phi0 + cumulative_trapezoid(v, t, initial=0.0)
    q = q0 + cumulative_trapezoid(i, t, initial=0.0)
    return FluxChargeTrace(t=t, v=v, i=i, phi=phi, q=q, phi0=phi0, q0=q0)


@dataclass(frozen=True)
class MemristanceProfile:
    """Per-sample flux-charge slope with a validity mask.

    Samples whose central charge step is below ``dq_tol`` carry no
    slope information and are masked out.
    """

    m: np.ndarray
    valid: np.ndarray
    dq_tol: float


def memristance(fq: FluxChargeTrace, dq_tol: float | None = None) -> MemristanceProfile:
    """Central-difference slope of flux against charge.

    Endpoints use one-sided differences.  ``dq_tol`` is an absolute
    charge step; when omitted it defaults to 1e-3 of the largest central
    step in the data.
    """
    phi = fq.phi
    q = fq.q
    n = phi.size
    if n < 3:
        raise ConfigError("memristance needs at least 3 samples")
    dphi = np.empty(n)
    dq = np.empty(n)
    dphi[1:-1] = phi[2:] - phi[:-2]
    dq[1:-1] = q[2:] - q[:-2]
    dphi[0] = phi[1] - phi[0]
    dq[0] = q[1] - q[0]
    dphi[-1] = phi[-1] - phi[-2]
    dq[-1] = q[-1] - q[-2]
    if dq_tol is None:
        dq_tol = 1e-3 * float(np.max(np.abs(dq)))
    if dq_tol <= 0:
        raise ConfigError(f"dq_tol must be positive, got {dq_tol}")
    valid = np.abs(dq) > dq_tol
    m = np.zeros(n)
    np.divide(dphi, dq, out=m, where=valid)
    return MemristanceProfile(m=m, valid=valid, dq_tol=float(dq_tol))


@dataclass(frozen=True)
class BranchSegment:
    branch: int
    cycle: int
    start: int
    stop: int  # exclusive

    @property
    def indices(self) -> slice:
        return slice(self.start, self.stop)


@dataclass(frozen=True)
class BranchSegmentation:
    """Per-sample branch labels over the analysis window.

    Branch 1 rises 0 -> +peak, 2 falls back to 0, 3 falls to -peak,
    4 rises back to 0.  The cycle counter is 1-based and increments at
    each wrap from branch 4 to branch 1.
    """

    branch: np.ndarray
    cycle: np.ndarray
    segments: tuple[BranchSegment, ...]
    n_cycles: int  # complete cycles (all four branches present)
    v_eps: float

    def cycle_segments(self, cycle: int) -> tuple[BranchSegment, ...]:
        return tuple(s for s in self.segments if s.cycle == cycle)

    def branch_indices(self, branch: int, cycle: int) -> np.ndarray:
        mask = (self.branch == branch) & (self.cycle == cycle)
        return np.flatnonzero(mask)

    def cycle_indices(self, cycle: int) -> np.ndarray:
        return np.flatnonzero(self.cycle == cycle)

    def last_full_cycle(self) -> int:
        if self.n_cycles == 0:
            raise SegmentationError("trace contains no complete sweep cycle")
        return self.n_cycles


_ALLOWED_NEXT = {1: (1, 2), 2: (2, 3), 3: (3, 4), 4: (4, 1)}


def _smooth(v: np.ndarray, window: int) -> np.ndarray:
    if window <= 1:
        return v
    kernel = np.ones(window) / window
    pad = window // 2
    padded = np.concatenate([np.full(pad, v[0]), v, np.full(window - 1 - pad, v[-1])])
    return np.convolve(padded, kernel, mode="valid")


def segment_branches(
    trace: IVTrace, v_eps: float | None = None, smooth_window: int = 0
) -> BranchSegmentation:
    """Split the analysis window into sweep branches.

    The waveform must open with a rising excursion from zero and follow
    the 1 -> 2 -> 3 -> 4 branch order; anything else raises.  ``v_eps``
    is the absolute half-width of the zero band (default 1e-3 of the
    peak voltage); inside it samples join the branch their slope is
    closing or opening.  ``smooth_window`` applies a moving average to
    the voltage used for direction decisions only.
    """
    v_raw = trace.v[trace.analysis_slice()]
    n = v_raw.size
    if n < 3:
        raise SegmentationError("analysis window too short to segment")
    v = _smooth(v_raw, smooth_window)
    v_peak = float(np.max(np.abs(v)))
    if v_peak == 0.0:
        raise SegmentationError("waveform is identically zero")
    if v_eps is None:
        v_eps = 1e-3 * v_peak
    if v_eps <= 0:
        raise ConfigError(f"v_eps must be positive, got {v_eps}")

    d = np.diff(v)
    direction = np.zeros(n, dtype=np.int8)
    nonzero = np.flatnonzero(d)
    if nonzero.size == 0:
        raise SegmentationError("waveform is constant")
    # backward slope, carried over plateaus; the first samples look ahead
    last = int(np.sign(d[nonzero[0]]))
    direction[0] = last
    for k in range(1, n):
        step = d[k - 1]
        if step != 0:
            last = 1 if step > 0 else -1
        direction[k] = last

    sign_v = np.zeros(n, dtype=np.int8)
    sign_v[v > v_eps] = 1
    sign_v[v < -v_eps] = -1
    last_sign = np.zeros(n, dtype=np.int8)
    acc = 0
    for k in range(n):
        if sign_v[k] != 0:
            acc = sign_v[k]
        last_sign[k] = acc
    next_sign = np.zeros(n, dtype=np.int8)
    acc = 0
    for k in range(n - 1, -1, -1):
        if sign_v[k] != 0:
            acc = sign_v[k]
        next_sign[k] = acc

    branch = np.zeros(n, dtype=np.int8)
    for k in range(n):
        sv = sign_v[k]
        rising = direction[k] > 0
        if sv > 0:
            branch[k] = 1 if rising else 2
        elif sv < 0:
            branch[k] = 4 if rising else 3
        else:
            anchor = last_sign[k] if last_sign[k] != 0 else next_sign[k]
            if anchor == 0:
                raise SegmentationError("waveform never leaves the zero band")
            if rising:
                branch[k] = 4 if last_sign[k] < 0 else 1
            else:
                branch[k] = 2 if last_sign[k] > 0 else 3

    if branch[0] != 1:
        raise SegmentationError(
            f"sweep must open with a rising branch from zero, got "
            f"{BRANCH_NAMES[int(branch[0])]} at sample 0"
        )
    cycle = np.ones(n, dtype=np.int64)
    current_cycle = 1
    for k in range(1, n):
        b_prev = int(branch[k - 1])
        b_here = int(branch[k])
        if b_here not in _ALLOWED_NEXT[b_prev]:
            raise SegmentationError(
                f"illegal branch transition {BRANCH_NAMES[b_prev]} -> "
                f"{BRANCH_NAMES[b_here]} at sample {k}"
            )
        if b_prev == 4 and b_here == 1:
            current_cycle += 1
        cycle[k] = current_cycle

    segments: list[BranchSegment] = []
    start = 0
    for k in range(1, n + 1):
        if k == n or branch[k] != branch[start] or cycle[k] != cycle[start]:
            segments.append(
                BranchSegment(int(branch[start]), int(cycle[start]), start, k)
            )
            start = k
    full = 0
    for c in range(1, current_cycle + 1):
        present = {s.branch for s in segments if s.cycle == c}
        if present == {1, 2, 3, 4}:
            full = c
    return BranchSegmentation(
        branch=branch,
        cycle=cycle,
        segments=tuple(segments),
        n_cycles=full,
        v_eps=float(v_eps),
    )


def shoelace_area(x: np.ndarray, y: np.ndarray) -> float:
    """Unsigned area of the polygon with vertices (x, y), auto-closed."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3:
        return 0.0
    # anchoring at the first vertex keeps the cross-product sum at the
    # polygon's own scale, so large coordinate offsets cannot swamp a
    # small enclosed area
    x = x - x[0]
    y = y - y[0]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)))


def _normalized(area: float, x: np.ndarray, y: np.ndarray) -> float:
    dx = float(np.ptp(x)) if x.size else 0.0
    dy = float(np.ptp(y)) if y.size else 0.0
    if dx <= 0.0 or dy <= 0.0:
        return 0.0
    return area / (dx * dy)


@dataclass(frozen=True)
class IVHysteresis:
    """Loop geometry of one sweep cycle in the current-voltage plane."""

    cycle: int
    area_pos: float
    area_neg: float
    area_pos_norm: float
    area_neg_norm: float
    area_norm: float
    crossing: bool
    touching: bool
    pinched: bool
    overlap: bool
    overlap_metric: float
    branch_slopes: dict[int, float]
    probe_v: float
    origin_current_ratio: float

    def to_dict(self) -> dict:
        return {
            "cycle": self.cycle,
            "area_pos": self.area_pos,
            "area_neg": self.area_neg,
            "area_pos_norm": self.area_pos_norm,
            "area_neg_norm": self.area_neg_norm,
            "area_norm": self.area_norm,
            "crossing": self.crossing,
            "touching": self.touching,
            "pinched": self.pinched,
            "overlap": self.overlap,
            "overlap_metric": self.overlap_metric,
            "branch_slopes": {BRANCH_NAMES[b]: g for b, g in self.branch_slopes.items()},
            "probe_v": self.probe_v,
            "origin_current_ratio": self.origin_current_ratio,
        }


def _slope_near(v: np.ndarray, i: np.ndarray, idx: np.ndarray, target_v: float,
                v_eps: float) -> float | None:
    """Conductance i/v of the branch sample nearest the probe voltage."""
    if idx.size == 0:
        return None
    vv = v[idx]
    keep = np.abs(vv) > v_eps
    if not np.any(keep):
        return None
    idx = idx[keep]
    vv = v[idx]
    k = idx[int(np.argmin(np.abs(np.abs(vv) - abs(target_v))))]
    return float(i[k] / v[k])


def iv_hysteresis(
    trace: IVTrace,
    seg: BranchSegmentation,
    cycle: int | None = None,
    tol: Tolerances | None = None,
) -> IVHysteresis:
    """Loop areas per polarity plus origin geometry for one cycle.

    The crossing test compares near-origin conductances of the two
    through-origin paths (branch 2 into 3, and 4 into 1).  If the same
    path is steeper on both sides the loop self-intersects at the
    origin (crossing); if the steeper path swaps sides the lobes only
    touch there.  Overlap means the branches are indistinguishable near
    the origin relative to the cycle's peak current.
    """
    tol = tol or Tolerances()
    if cycle is None:
        cycle = seg.last_full_cycle()
    v = trace.v[trace.analysis_slice()]
    i = trace.i[trace.analysis_slice()]
    cyc = seg.cycle_indices(cycle)
    if cyc.size == 0:
        raise ConfigError(f"cycle {cycle} not present in segmentation")
    v_peak = float(np.max(np.abs(v[cyc])))
    i_peak = float(np.max(np.abs(i[cyc])))

    pos = np.concatenate(
        [seg.branch_indices(1, cycle), seg.branch_indices(2, cycle)]
    )
    neg = np.concatenate(
        [seg.branch_indices(3, cycle), seg.branch_indices(4, cycle)]
    )
    area_pos = shoelace_area(v[pos], i[pos])
    area_neg = shoelace_area(v[neg], i[neg])
    area_pos_norm = _normalized(area_pos, v[pos], i[pos])
    area_neg_norm = _normalized(area_neg, v[neg], i[neg])
    area_norm = _normalized(area_pos + area_neg, v[cyc], i[cyc])

    probe = tol.origin_probe * v_peak
    v_eps = tol.v_eps * v_peak
    slopes = {
        b: _slope_near(
            v, i, seg.branch_indices(b, cycle),
            probe if b in (1, 2) else -probe, v_eps,
        )
        for b in (1, 2, 3, 4)
    }
    crossing = False
    touching = False
    if None not in slopes.values():
        d_pos = slopes[2] - slopes[1]   # outgoing vs incoming path, positive side
        d_neg = slopes[3] - slopes[4]
        scale = max(abs(g) for g in slopes.values())
        significant = min(abs(d_pos), abs(d_neg)) > tol.slope_sig * scale
        if significant:
            crossing = bool(d_pos * d_neg > 0)
            touching = not crossing

    worst_origin = 0.0
    for s in seg.cycle_segments(cycle):
        k = s.start + int(np.argmin(np.abs(v[s.indices])))
        if i_peak > 0:
            worst_origin = max(worst_origin, float(abs(i[k]) / i_peak))
    pinched = worst_origin <= tol.i_origin_tol

    window = tol.overlap_window * v_peak
    overlap_metric = _overlap_metric(v, i, seg, cycle, window)
    overlap = bool(i_peak > 0 and overlap_metric <= tol.overlap_tol)

    return IVHysteresis(
        cycle=cycle,
        area_pos=area_pos,
        area_neg=area_neg,
        area_pos_norm=area_pos_norm,
        area_neg_norm=area_neg_norm,
        area_norm=area_norm,
        crossing=crossing,
        touching=touching,
        pinched=pinched,
        overlap=overlap,
        overlap_metric=overlap_metric,
        branch_slopes={b: (g if g is not None else float("nan")) for b, g in slopes.items()},
        probe_v=probe,
        origin_current_ratio=worst_origin,
    )


def _overlap_metric(
    v: np.ndarray,
    i: np.ndarray,
    seg: BranchSegmentation,
    cycle: int,
    window: float,
) -> float:
    """Largest same-voltage branch-pair current gap inside the origin
    window, relative to the cycle's peak current."""
    cyc = seg.cycle_indices(cycle)
    i_peak = float(np.max(np.abs(i[cyc])))
    if i_peak == 0.0:
        return 0.0
    worst = 0.0
    for b_a, b_b in ((1, 2), (3, 4)):
        ia = seg.branch_indices(b_a, cycle)
        ib = seg.branch_indices(b_b, cycle)
        ia = ia[np.abs(v[ia]) <= window]
        ib = ib[np.abs(v[ib]) <= window]
        if ia.size == 0 or ib.size < 2:
            continue
        order = np.argsort(v[ib])
        vb = v[ib][order]
        curb = i[ib][order]
        va = v[ia]
        lo, hi = vb[0], vb[-1]
        inside = (va >= lo) & (va <= hi)
        if not np.any(inside):
            continue
        interp = np.interp(va[inside], vb, curb)
        worst = max(worst, float(np.max(np.abs(i[ia][inside] - interp))) / i_peak)
    return worst


@dataclass(frozen=True)
class FqLoopArea:
    """Enclosed area of one cycle in the charge-flux plane."""

    cycle: int
    area: float
    area_norm: float
    q_extent: float
    phi_extent: float


def fq_loop_area(fq: FluxChargeTrace, seg: BranchSegmentation) -> tuple[FqLoopArea, ...]:
    """Per-cycle loop areas of the flux-charge curve (complete cycles)."""
    out = []
    for c in range(1, seg.n_cycles + 1):
        idx = seg.cycle_indices(c)
        q = fq.q[idx]
        phi = fq.phi[idx]
        area = shoelace_area(q, phi)
        out.append(
            FqLoopArea(
                cycle=c,
                area=area,
                area_norm=_normalized(area, q, phi),
                q_extent=float(np.ptp(q)),
                phi_extent=float(np.ptp(phi)),
            )
        )
    return tuple(out)


@dataclass(frozen=True)
class RoleResult:
    """Read/Write/Mixed verdict for one branch of one cycle."""

    branch: int
    role: str
    residual: float
    monotone_index: float
    m_mean: float
    m_span: float
    n_valid: int

    def to_dict(self) -> dict:
        return {
            "branch": BRANCH_NAMES[self.branch],
            "role": self.role,
            "residual": self.residual,
            "monotone_index": self.monotone_index,
            "m_mean": self.m_mean,
            "m_span": self.m_span,
            "n_valid": self.n_valid,
        }


def branch_roles(
    fq: FluxChargeTrace,
    profile: MemristanceProfile,
    seg: BranchSegmentation,
    cycle: int | None = None,
    r_tol: float = 1e-3,
    mono_tol: float = 0.8,
) -> dict[int, RoleResult]:
    """Classify each branch of a cycle as Read, Write, or Mixed.

    A branch reads when flux is affine in charge over it (constant
    slope, residual under ``r_tol`` of the branch's flux extent); it
    writes when instead the slope drifts monotonically.
    """
    if cycle is None:
        cycle = seg.last_full_cycle()
    out: dict[int, RoleResult] = {}
    for b in (1, 2, 3, 4):
        idx = seg.branch_indices(b, cycle)
        idx = idx[profile.valid[idx]]
        m_vals = profile.m[idx]
        if idx.size < 4:
            out[b] = RoleResult(b, ROLE_MIXED, float("nan"), float("nan"),
                                float("nan"), float("nan"), int(idx.size))
            continue
        q = fq.q[idx]
        phi = fq.phi[idx]
        phi_extent = float(np.ptp(phi))
        if phi_extent == 0.0:
            residual = 0.0
        else:
            coeffs = np.polyfit(q, phi, 1)
            fit = np.polyval(coeffs, q)
            residual = float(np.sqrt(np.mean((phi - fit) ** 2))) / phi_extent
        dm = np.diff(m_vals)
        total = float(np.sum(np.abs(dm)))
        mono = abs(float(np.sum(dm))) / total if total > 0 else 1.0
        if residual < r_tol:
            role = ROLE_READ
        elif mono >= mono_tol:
            role = ROLE_WRITE
        else:
            role = ROLE_MIXED
        out[b] = RoleResult(
            branch=b,
            role=role,
            residual=residual,
            monotone_index=mono,
            m_mean=float(np.mean(m_vals)),
            m_span=float(np.ptp(m_vals)),
            n_valid=int(idx.size),
        )
    return out


@dataclass(frozen=True)
class MatchResult:
    """Memristance correspondence between two branches of one cycle."""

    branch_a: int
    branch_b: int
    fraction: float
    n_samples: int
    n_matched: int
    match_v: np.ndarray
    max_peak_distance: float  # worst relative |v| distance of a match from the peak
    degenerate: bool          # both branches essentially constant and equal

    def to_dict(self) -> dict:
        return {
            "branch_a": BRANCH_NAMES[self.branch_a],
            "branch_b": BRANCH_NAMES[self.branch_b],
            "fraction": self.fraction,
            "n_samples": self.n_samples,
            "n_matched": self.n_matched,
            "max_peak_distance": self.max_peak_distance,
            "degenerate": self.degenerate,
        }


def memristance_matching(
    trace: IVTrace,
    profile: MemristanceProfile,
    seg: BranchSegmentation,
    branch_a: int = 1,
    branch_b: int = 2,
    cycle: int | None = None,
    m_tol: float = 0.05,
) -> MatchResult:
    """Fraction of branch-A samples whose slope reappears on branch B.

    For every valid sample on branch A the nearest valid slope on
    branch B is found; a sample matches when the relative distance is
    within ``m_tol``.  Voltage locations of the matches are reported so
    callers can see where on the sweep the two branches agree.
    """
    if cycle is None:
        cycle = seg.last_full_cycle()
    v = trace.v[trace.analysis_slice()]
    ia = seg.branch_indices(branch_a, cycle)
    ia = ia[profile.valid[ia]]
    ib = seg.branch_indices(branch_b, cycle)
    ib = ib[profile.valid[ib]]
    if ia.size == 0 or ib.size == 0:
        return MatchResult(branch_a, branch_b, 0.0, int(ia.size), 0,
                           np.empty(0), float("nan"), False)
    ma = profile.m[ia]
    mb = profile.m[ib]
    scale = np.abs(ma)
    scale[scale == 0.0] = np.inf
    dist = np.min(np.abs(mb[None, :] - ma[:, None]), axis=1) / scale
    matched = dist <= m_tol
    match_v = v[ia[matched]]
    v_peak = float(np.max(np.abs(v)))
    if match_v.size and v_peak > 0:
        max_peak_distance = float(np.max(np.abs(np.abs(match_v) - v_peak))) / v_peak
    else:
        max_peak_distance = float("nan")
    span_a = float(np.ptp(ma)) / max(float(np.max(np.abs(ma))), 1e-300)
    span_b = float(np.ptp(mb)) / max(float(np.max(np.abs(mb))), 1e-300)
    degenerate = span_a < m_tol and span_b < m_tol
    return MatchResult(
        branch_a=branch_a,
        branch_b=branch_b,
        fraction=float(np.mean(matched)),
        n_samples=int(ia.size),
        n_matched=int(np.count_nonzero(matched)),
        match_v=match_v,
        max_peak_distance=max_peak_distance,
        degenerate=degenerate,
    )


def _rectification(v: np.ndarray, i: np.ndarray, seg: BranchSegmentation,
                   cycle: int) -> float:
    """|I| ratio between the positive and negative voltage peaks."""
    cyc = seg.cycle_indices(cycle)
    vv = v[cyc]
    ii = i[cyc]
    k_pos = int(np.argmax(vv))
    k_neg = int(np.argmin(vv))
    i_pos = abs(float(ii[k_pos]))
    i_neg = abs(float(ii[k_neg]))
    if i_neg == 0.0:
        return float("inf") if i_pos > 0 else 1.0
    return i_pos / i_neg


def _superlinearity(v: np.ndarray, i: np.ndarray, seg: BranchSegmentation,
                    cycle: int) -> float:
    """Peak-vs-half-peak current growth on the rising branches.

    An ohmic rise doubles; an exponential (diode-like) rise exceeds
    that by a large factor.  Returns the worse of the two polarities,
    normalized so 1.0 means ohmic.
    """
    v_peak = float(np.max(np.abs(v[seg.cycle_indices(cycle)])))
    worst = 0.0
    for b, sgn in ((1, 1.0), (3, -1.0)):
        idx = seg.branch_indices(b, cycle)
        if idx.size == 0:
            continue
        vv = v[idx] * sgn
        ii = np.abs(i[idx])
        k_half = int(np.argmin(np.abs(vv - 0.5 * v_peak)))
        k_full = int(np.argmin(np.abs(vv - v_peak)))
        if ii[k_half] == 0.0:
            continue
        worst = max(worst, float(ii[k_full] / ii[k_half]) / 2.0)
    return worst


@dataclass(frozen=True)
class ClassificationReport:
    """Full pipeline verdict for one trace."""

    label: str
    criteria: dict[int, bool]
    cycle_used: int
    n_cycles: int
    iv: IVHysteresis
    iv_per_cycle: tuple[IVHysteresis, ...]
    fq_areas: tuple[FqLoopArea, ...]
    roles: dict[int, RoleResult]
    matching: dict[str, MatchResult]
    rectification: float
    superlinearity: float
    tolerances: Tolerances
    phi0: float
    q0: float

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "criteria": {str(k): v for k, v in sorted(self.criteria.items())},
            "cycle_used": self.cycle_used,
            "n_cycles": self.n_cycles,
            "iv": self.iv.to_dict(),
            "iv_per_cycle": [h.to_dict() for h in self.iv_per_cycle],
            "fq_areas": [dataclasses.asdict(a) for a in self.fq_areas],
            "roles": {BRANCH_NAMES[b]: r.to_dict() for b, r in sorted(self.roles.items())},
            "matching": {k: m.to_dict() for k, m in self.matching.items()},
            "rectification": self.rectification,
            "superlinearity": self.superlinearity,
            "tolerances": self.tolerances.to_dict(),
            "phi0": self.phi0,
            "q0": self.q0,
        }


def classify(
    trace: IVTrace,
    tol: Tolerances | None = None,
    phi0: float | None = None,
    q0: float | None = None,
) -> ClassificationReport:
    """Run the full analysis pipeline and label the device.

    Criteria: (1) the trace is a well-formed sweep, (2) the transport
    is diode-like (rectifying or superlinear) with hysteresis present,
    (3) the current-voltage loop encloses area above tolerance, (4) the
    flux-charge loop encloses normalized area above ``eps_hys``.
    A device failing (3) is not memristive; passing (3) but not (4) is
    a linear memristor; passing all is a nonlinear memristor.
    Classification uses the last complete cycle; earlier cycles are
    reported alongside.
    """
    tol = tol or Tolerances()
    if phi0 is None and q0 is None:
        phi0, q0 = prefix_offsets(trace)
    phi0 = phi0 or 0.0
    q0 = q0 or 0.0
    seg = segment_branches(
        trace,
        v_eps=tol.v_eps * float(np.max(np.abs(trace.v))),
        smooth_window=tol.smooth_window,
    )
    cycle = seg.last_full_cycle()
    fq = integrate_flux_charge(trace, phi0=phi0, q0=q0)
    profile = memristance(fq)

    iv_cycles = tuple(
        iv_hysteresis(trace, seg, cycle=c, tol=tol) for c in range(1, seg.n_cycles + 1)
    )
    iv = iv_cycles[cycle - 1]
    fq_areas = fq_loop_area(fq, seg)
    roles = branch_roles(fq, profile, seg, cycle=cycle, r_tol=tol.r_tol,
                         mono_tol=tol.mono_tol)
    matching = {
        "1-2": memristance_matching(trace, profile, seg, 1, 2, cycle, tol.m_tol),
        "3-4": memristance_matching(trace, profile, seg, 3, 4, cycle, tol.m_tol),
    }

    v = trace.v[trace.analysis_slice()]
    i = trace.i[trace.analysis_slice()]
    rect = _rectification(v, i, seg, cycle)
    superlin = _superlinearity(v, i, seg, cycle)

    c3 = iv.area_norm > tol.iv_hys_tol
    diode_like = abs(rect - 1.0) > tol.rect_tol or superlin > tol.superlin_tol
    criteria = {
        1: True,
        2: bool(diode_like and c3),
        3: bool(c3),
        4: bool(fq_areas[cycle - 1].area_norm > tol.eps_hys),
    }
    if not criteria[3]:
        label = LABEL_NON
    elif not criteria[4]:
        label = LABEL_LINEAR
    else:
        label = LABEL_NONLINEAR

    return ClassificationReport(
        label=label,
        criteria=criteria,
        cycle_used=cycle,
        n_cycles=seg.n_cycles,
        iv=iv,
        iv_per_cycle=iv_cycles,
        fq_areas=fq_areas,
        roles=roles,
        matching=matching,
        rectification=rect,
        superlinearity=superlin,
        tolerances=tol,
        phi0=float(phi0),
        q0=float(q0),
    )
