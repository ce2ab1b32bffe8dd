"""File formats: trace CSV, flux-charge CSV, strict TOML run configs,
JSON reports, and per-branch plot data.

Trace files are plain comma-separated text so they can come from lab
instruments as easily as from the simulator.  Reports are JSON with
sorted keys, which makes identical runs byte-identical on disk.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from . import __version__
from .analysis import (
    BRANCH_NAMES,
    ClassificationReport,
    FluxChargeTrace,
    Tolerances,
    integrate_flux_charge,
    prefix_offsets,
    segment_branches,
)
from .defaults import SweepSpec, default_sweep, resolve_family
from .errors import ConfigError, TraceParseError
from .models import params_from_dict
from .sweep import IVTrace, Waveform, make_initialization

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

TRACE_HEADER = "t,v,i"
MIN_TRACE_SAMPLES = 8
SPACING_TOL = 0.01
# below this relative jitter the grid is uniform up to float rounding
SPACING_EXACT = 1e-9


def export_trace(trace: IVTrace, path) -> None:
    """Write a trace as CSV with a ``t0_index`` directive.

    Values are emitted with shortest round-trip precision, so importing
    the file reproduces the arrays bit for bit.
    """
    lines = [f"# t0_index={trace.t0_index}", TRACE_HEADER]
    for t, v, i in zip(trace.t, trace.v, trace.i):
        lines.append(f"{float(t)!r},{float(v)!r},{float(i)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def import_trace(path) -> IVTrace:
    """Parse a trace CSV back into an in-memory record.

    The file needs a ``t,v,i`` header, at least 8 data rows, and a
    strictly increasing time column.  Spacing jitter up to 1% of the
    nominal step is resampled onto a uniform grid with a warning; larger
    jitter is rejected.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise TraceParseError(f"cannot read {path}: {exc}") from exc

    t0_index = 0
    t0_line: Optional[int] = None
    header_seen = False
    rows: List[Tuple[float, float, float]] = []
    row_lines: List[int] = []

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("t0_index"):
                parts = body.split("=", 1)
                if len(parts) != 2:
                    raise TraceParseError(
                        "malformed t0_index directive", line=lineno
                    )
                try:
                    t0_index = int(parts[1].strip())
                except ValueError as exc:
                    raise TraceParseError(
                        f"t0_index is not an integer: {parts[1].strip()!r}",
                        line=lineno,
                    ) from exc
                t0_line = lineno
            continue
        if not header_seen:
            cols = [c.strip() for c in line.split(",")]
            if cols != ["t", "v", "i"]:
                raise TraceParseError(
                    f"expected header '{TRACE_HEADER}', got {line!r}",
                    line=lineno,
                )
            header_seen = True
            continue
        cols = line.split(",")
        if len(cols) != 3:
            raise TraceParseError(
                f"expected 3 columns, got {len(cols)}", line=lineno
            )
        try:
            rows.append((float(cols[0]), float(cols[1]), float(cols[2])))
        except ValueError as exc:
            raise TraceParseError(
                f"non-numeric value in row: {line!r}", line=lineno
            ) from exc
        row_lines.append(lineno)

    if not header_seen:
        raise TraceParseError("missing 't,v,i' header", line=1)
    if len(rows) < MIN_TRACE_SAMPLES:
        raise TraceParseError(
            f"fewer than {MIN_TRACE_SAMPLES} samples (got {len(rows)})",
            line=row_lines[-1] if row_lines else 1,
        )

    data = np.asarray(rows, dtype=float)
    t, v, i = data[:, 0], data[:, 1], data[:, 2]
    steps = np.diff(t)
    bad = np.nonzero(steps <= 0)[0]
    if bad.size:
        raise TraceParseError(
            "time column is not strictly increasing",
            line=row_lines[int(bad[0]) + 1],
        )
    if not 0 <= t0_index < t.size:
        raise TraceParseError(
            f"t0_index {t0_index} outside 0..{t.size - 1}",
            line=t0_line if t0_line is not None else 1,
        )

    nominal = float(np.median(steps))
    worst = float(np.max(np.abs(steps - nominal))) / nominal
    if worst > SPACING_TOL:
        raise TraceParseError(
            f"sample spacing varies by {worst:.1%} (limit {SPACING_TOL:.0%})",
            line=row_lines[int(np.argmax(np.abs(steps - nominal))) + 1],
        )
    if worst > SPACING_EXACT:
        warnings.warn(
            f"non-uniform sample spacing ({worst:.2%} of nominal step); "
            f"resampling onto a uniform grid",
            stacklevel=2,
        )
        uniform = np.linspace(t[0], t[-1], t.size)
        v = np.interp(uniform, t, v)
        i = np.interp(uniform, t, i)
        t = uniform

    return IVTrace(t=t, v=v, i=i, t0_index=t0_index)


def export_fq(fq: FluxChargeTrace, path) -> None:
    """Write a flux-charge record as CSV alongside its source samples."""
    lines = [
        f"# phi0={float(fq.phi0)!r} q0={float(fq.q0)!r}",
        "t,v,i,phi,q",
    ]
    for t, v, i, phi, q in zip(fq.t, fq.v, fq.i, fq.phi, fq.q):
        lines.append(
            f"{float(t)!r},{float(v)!r},{float(i)!r},{float(phi)!r},{float(q)!r}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def _json_safe(obj):
    """Recursively convert to stock JSON types; non-finite floats become
    strings so the output stays standards-conformant."""
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(x) for x in obj]
    if isinstance(obj, np.ndarray):
        return [_json_safe(x) for x in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def export_report(document: Mapping, path) -> None:
    """Serialize a report with sorted keys and a trailing newline."""
    payload = json.dumps(_json_safe(document), indent=2, sort_keys=True)
    Path(path).write_text(payload + "\n")


def make_report_document(
    family: Optional[str] = None,
    *,
    config_echo: Optional[Mapping] = None,
    classification: Optional[ClassificationReport] = None,
    bench=None,
    gates=None,
    extras: Optional[Mapping] = None,
) -> dict:
    """Assemble the top-level report object.

    Sections are included only when computed, and the tool version plus a
    config echo always travel with the numbers.
    """
    doc: dict = {"tool": "memsim", "version": __version__}
    if family is not None:
        doc["family"] = family
    doc["config"] = dict(config_echo) if config_echo else {}
    if classification is not None:
        doc["classification"] = classification.to_dict()
        doc["branch_summary"] = {
            BRANCH_NAMES[b]: {
                "role": r.role,
                "affine_residual": r.residual,
                "samples": r.n_valid,
            }
            for b, r in sorted(classification.roles.items())
        }
    if bench is not None:
        doc["bench"] = bench.to_dict()
    if gates is not None:
        doc["gates"] = {name: table.to_dict() for name, table in sorted(gates.items())}
    if extras:
        doc.update(extras)
    return doc


def export_plot_data(
    trace: IVTrace,
    out_dir,
    *,
    prefix: str = "plot",
    tol: Optional[Tolerances] = None,
) -> List[Path]:
    """Emit per-branch (v, i) and (q, phi) column files for plotting.

    Each file carries the branch name, cycle, and branch role in a
    comment line, so external plotting tools can color by role without
    re-deriving it.
    """
    from .analysis import classify

    tol = tol or Tolerances()
    report = classify(trace, tol)
    seg = segment_branches(
        trace,
        v_eps=tol.v_eps * float(np.max(np.abs(trace.v))),
        smooth_window=tol.smooth_window,
    )
    fq = integrate_flux_charge(trace, *prefix_offsets(trace))
    cycle = report.cycle_used
    # segmentation indices count from the start of the analysis window
    sl = trace.analysis_slice()
    v_all, i_all = trace.v[sl], trace.i[sl]

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []
    for branch in (1, 2, 3, 4):
        idx = seg.branch_indices(branch, cycle)
        role = report.roles[branch].role
        tag = f"# branch={BRANCH_NAMES[branch]} cycle={cycle} role={role}"

        iv_path = out / f"{prefix}_branch{branch}_iv.csv"
        lines = [tag, "v,i"]
        lines += [
            f"{float(v)!r},{float(i)!r}"
            for v, i in zip(v_all[idx], i_all[idx])
        ]
        iv_path.write_text("\n".join(lines) + "\n")
        written.append(iv_path)

        fq_path = out / f"{prefix}_branch{branch}_fq.csv"
        lines = [tag, "q,phi"]
        lines += [
            f"{float(q)!r},{float(p)!r}"
            for q, p in zip(fq.q[idx], fq.phi[idx])
        ]
        fq_path.write_text("\n".join(lines) + "\n")
        written.append(fq_path)
    return written


@dataclass(frozen=True)
class RunConfig:
    """Validated run settings: family, overrides, drive, and tolerances."""

    family: str
    overrides: Dict[str, float] = field(default_factory=dict)
    sweep: Optional[SweepSpec] = None
    init: Optional[Tuple[float, float, float]] = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    output: Dict[str, str] = field(default_factory=dict)

    def resolved_sweep(self) -> SweepSpec:
        return self.sweep if self.sweep is not None else default_sweep(self.family)

    def build_waveform(self) -> Waveform:
        sweep = self.resolved_sweep().build()
        if self.init is None:
            return sweep
        v_init, duration, dt = self.init
        return make_initialization(v_init, duration, dt).concat(sweep)

    def echo(self) -> dict:
        sweep = self.resolved_sweep()
        doc = {
            "family": self.family,
            "overrides": dict(self.overrides),
            "sweep": {
                "v_max_pos": sweep.v_max_pos,
                "v_max_neg": sweep.v_max_neg,
                "period": sweep.period,
                "cycles": sweep.cycles,
                "dt": sweep.dt,
            },
            "tolerances": self.tolerances.to_dict(),
        }
        if self.init is not None:
            doc["init"] = {
                "v": self.init[0],
                "duration": self.init[1],
                "dt": self.init[2],
            }
        return doc


_SWEEP_KEYS = ("v_max_pos", "v_max_neg", "period", "cycles", "dt")
_INIT_KEYS = ("v", "duration", "dt")
_OUTPUT_KEYS = ("report", "trace", "fq", "plot_dir", "plot_prefix")
_TOLERANCE_KEYS = tuple(f.name for f in Tolerances.__dataclass_fields__.values())


def _reject_unknown(section: Mapping, allowed, context: str) -> None:
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"{context}: unknown key(s) {', '.join(unknown)}")


def config_from_dict(raw: Mapping, *, source: str = "config") -> RunConfig:
    """Validate a parsed config mapping; any unknown key is an error."""
    _reject_unknown(
        raw, ("model", "sweep", "init", "tolerances", "output"), source
    )
    model_section = raw.get("model")
    if not model_section or "family" not in model_section:
        raise ConfigError(f"{source}: [model] section with a family is required")
    family = resolve_family(str(model_section["family"]))
    overrides = {
        k: v for k, v in model_section.items() if k != "family"
    }
    # Override names are validated against the family's parameter set.
    params_from_dict(
        family,
        {**_family_defaults(family), **overrides},
    )

    sweep = None
    if "sweep" in raw:
        _reject_unknown(raw["sweep"], _SWEEP_KEYS, f"{source}.sweep")
        base = default_sweep(family)
        merged = {
            "v_max_pos": base.v_max_pos,
            "v_max_neg": base.v_max_neg,
            "period": base.period,
            "cycles": base.cycles,
            "dt": base.dt,
        }
        merged.update(raw["sweep"])
        merged["cycles"] = int(merged["cycles"])
        sweep = SweepSpec(**merged)

    init = None
    if "init" in raw:
        section = raw["init"]
        _reject_unknown(section, _INIT_KEYS, f"{source}.init")
        if "v" not in section or "duration" not in section:
            raise ConfigError(f"{source}.init: needs v and duration")
        dt = float(section.get("dt", (sweep or default_sweep(family)).dt))
        init = (float(section["v"]), float(section["duration"]), dt)

    tolerances = Tolerances()
    if "tolerances" in raw:
        _reject_unknown(raw["tolerances"], _TOLERANCE_KEYS, f"{source}.tolerances")
        tolerances = replace(tolerances, **raw["tolerances"])

    output: Dict[str, str] = {}
    if "output" in raw:
        _reject_unknown(raw["output"], _OUTPUT_KEYS, f"{source}.output")
        output = {k: str(v) for k, v in raw["output"].items()}

    return RunConfig(
        family=family,
        overrides=overrides,
        sweep=sweep,
        init=init,
        tolerances=tolerances,
        output=output,
    )


def _family_defaults(family: str) -> dict:
    from .defaults import default_params
    import dataclasses as _dc

    return _dc.asdict(default_params(family))


def load_config(path) -> RunConfig:
    """Parse and validate a TOML run config."""
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(raw, source=str(path))
