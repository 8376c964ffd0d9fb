"""
On-disk formats shared by the CLI and the synthetic-data writers.

All CSV files allow ``#`` comment lines; ``# key = value`` comments carry
metadata.  Boundary units: pump power in mW, delays in ps, frequencies in MHz.
"""
from __future__ import annotations

import csv
import hashlib
import io
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .curve_fit import CurvePoint, MeasuredCurve
from .pulses import VisibilityPoint, VisibilityScan
from .synth import SpectrumTrace

CURVE_COLUMNS = ("pump_mw", "sqz_db", "antisqz_db", "sigma_sqz_db", "sigma_antisqz_db")
VISIBILITY_COLUMNS = ("delay_ps", "visibility", "sigma")
SPECTRUM_COLUMNS = ("label", "freq_mhz", "level_db")


class FormatError(ValueError):
    def __init__(self, message: str, path=None, line: Optional[int] = None):
        where = f"{path}:{line}: " if line is not None else (f"{path}: " if path else "")
        super().__init__(where + message)
        self.path = path
        self.line = line


def _fmt(x: float) -> str:
    return repr(float(x))


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _read_table(path, columns):
    """Yield (line_no, row) for data rows and collect ``# key = value`` metadata."""
    meta = {}
    rows = []
    header_seen = False
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    k, v = body.split("=", 1)
                    meta[k.strip()] = v.strip()
                continue
            fields = next(csv.reader([line]))
            fields = [f.strip() for f in fields]
            if not header_seen:
                if tuple(fields) != tuple(columns):
                    raise FormatError(f"expected header {','.join(columns)}", path, lineno)
                header_seen = True
                continue
            if len(fields) != len(columns):
                raise FormatError(f"expected {len(columns)} fields, got {len(fields)}", path, lineno)
            rows.append((lineno, fields))
    if not header_seen:
        raise FormatError("missing header", path)
    return rows, meta


def _float(s, path, lineno, name):
    try:
        x = float(s)
    except ValueError:
        raise FormatError(f"{name}={s!r} is not a number", path, lineno) from None
    if not np.isfinite(x):
        raise FormatError(f"{name} must be finite", path, lineno)
    return x


def _opt_float(meta, key):
    return float(meta[key]) if key in meta else None


def read_curve(path) -> MeasuredCurve:
    rows, meta = _read_table(path, CURVE_COLUMNS)
    pts = []
    last = -np.inf
    for lineno, f in rows:
        p, a, b, sa, sb = (_float(x, path, lineno, n) for x, n in zip(f, CURVE_COLUMNS))
        if p < 0:
            raise FormatError("pump power must be non-negative", path, lineno)
        if sa <= 0 or sb <= 0:
            raise FormatError("sigmas must be positive", path, lineno)
        if p <= last:
            raise FormatError("pump powers must be strictly increasing", path, lineno)
        last = p
        pts.append(CurvePoint(p * 1e-3, a, b, sa, sb))
    sb_mhz = _opt_float(meta, "sideband_mhz")
    return MeasuredCurve(pts, sideband_hz=None if sb_mhz is None else sb_mhz * 1e6,
                         rbw_hz=_opt_float(meta, "rbw_hz"))


def write_curve(curve: MeasuredCurve, path, comments: Iterable[str] = ()) -> None:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    if curve.sideband_hz is not None:
        buf.write(f"# sideband_mhz = {_fmt(curve.sideband_hz / 1e6)}\n")
    if curve.rbw_hz is not None:
        buf.write(f"# rbw_hz = {_fmt(curve.rbw_hz)}\n")
    buf.write(",".join(CURVE_COLUMNS) + "\n")
    for pt in curve.points:
        buf.write(",".join(_fmt(x) for x in (pt.pump_power * 1e3, pt.v_minus_db, pt.v_plus_db,
                                             pt.sigma_minus_db, pt.sigma_plus_db)) + "\n")
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_visibility(path) -> VisibilityScan:
    rows, meta = _read_table(path, VISIBILITY_COLUMNS)
    pts = []
    for lineno, f in rows:
        d, v, s = (_float(x, path, lineno, n) for x, n in zip(f, VISIBILITY_COLUMNS))
        if not 0 <= v <= 1:
            raise FormatError("visibility must lie in [0, 1]", path, lineno)
        if s <= 0:
            raise FormatError("sigma must be positive", path, lineno)
        pts.append(VisibilityPoint(d, v, s))
    return VisibilityScan(pts, meta.get("label", "1064"))


def write_visibility(scan: VisibilityScan, path, comments: Iterable[str] = ()) -> None:
    lines = [f"# {c}" for c in comments]
    lines.append(f"# label = {scan.label}")
    lines.append(",".join(VISIBILITY_COLUMNS))
    lines += [",".join(_fmt(x) for x in (p.delay, p.visibility, p.sigma)) for p in scan.points]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_spectra(path) -> list[SpectrumTrace]:
    rows, meta = _read_table(path, SPECTRUM_COLUMNS)
    by_label: dict[str, list[tuple[float, float]]] = {}
    for lineno, f in rows:
        label = f[0]
        by_label.setdefault(label, []).append(
            (_float(f[1], path, lineno, "freq_mhz") * 1e6, _float(f[2], path, lineno, "level_db")))
    rbw = _opt_float(meta, "rbw_hz") or float("nan")
    seed = int(meta.get("seed", -1))
    out = []
    for label, pts in by_label.items():
        a = np.array(pts)
        try:
            out.append(SpectrumTrace(a[:, 0], a[:, 1], label, rbw, seed))
        except ValueError as e:
            raise FormatError(f"trace {label!r}: {e}", path) from None
    return out


def write_spectra(traces: list[SpectrumTrace], path, comments: Iterable[str] = ()) -> None:
    lines = [f"# {c}" for c in comments]
    if traces:
        lines.append(f"# rbw_hz = {_fmt(traces[0].rbw)}")
        lines.append(f"# seed = {traces[0].seed}")
    lines.append(",".join(SPECTRUM_COLUMNS))
    for t in traces:
        lines += [f"{t.label},{_fmt(f / 1e6)},{_fmt(v)}" for f, v in zip(t.freqs, t.levels)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def parse_config(text: str, source: str = "<config>") -> dict[str, str]:
    """Flat ``section.key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError("expected 'section.key = value'", source, lineno)
        k, v = (s.strip() for s in line.split("=", 1))
        if "." not in k or not all(k.split(".")):
            raise FormatError(f"key {k!r} must look like section.key", source, lineno)
        out[k] = v
    return out


def load_config(path) -> dict[str, str]:
    return parse_config(Path(path).read_text(encoding="utf-8"), str(path))
