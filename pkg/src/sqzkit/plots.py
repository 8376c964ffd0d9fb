"""
Static SVG figures built from a report and its in-memory artifacts.

Output bytes are deterministic: fixed hash salt, no date metadata, and the
object-oriented matplotlib API so nothing depends on pyplot state.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np
import matplotlib
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from .modes import ScalarMode
from .noise_model import ANTISQUEEZED, SQUEEZED, NoiseParams, eq1_variance, lin_to_db
from .pulses import visibility_model

RC = {"svg.hashsalt": "sqzkit", "svg.fonttype": "none", "font.size": 9,
      "axes.grid": True, "grid.alpha": 0.3}


@dataclass
class PlotStyle:
    width_in: float = 4.5
    height_in: float = 3.2
    sqz_color: str = "tab:blue"
    antisqz_color: str = "tab:red"
    cmap: str = "inferno"


@dataclass
class PlotOutcome:
    written: list[Path] = field(default_factory=list)
    notices: list[str] = field(default_factory=list)


def _save(fig: Figure, path: Path) -> None:
    FigureCanvasSVG(fig)
    with matplotlib.rc_context(RC):
        fig.savefig(path, format="svg", metadata={"Date": None})


def _figure(style: PlotStyle, ncols: int = 1) -> Figure:
    with matplotlib.rc_context(RC):
        fig = Figure(figsize=(style.width_in * ncols, style.height_in), layout="constrained")
        fig.subplots(1, ncols, squeeze=False)
    return fig


def mode_heatmap(mode: ScalarMode) -> np.ndarray:
    """Normalized intensity array shown in the heatmap, rows bottom to top."""
    inten = mode.intensity
    return inten / inten.max()


def plot_curve(fit: Mapping[str, Any], path: Path, style: PlotStyle) -> None:
    data = fit["data"]
    p_mw = np.array([d["pump_mw"] for d in data])
    fig = _figure(style)
    ax = fig.axes[0]
    ax.errorbar(p_mw, [d["sqz_db"] for d in data], yerr=[d["sigma_sqz_db"] for d in data],
                fmt="o", mfc="none", color=style.sqz_color, label="squeezing")
    ax.errorbar(p_mw, [d["antisqz_db"] for d in data], yerr=[d["sigma_antisqz_db"] for d in data],
                fmt="o", mfc="none", color=style.antisqz_color, label="antisqueezing")
    pr = fit["params"]
    params = NoiseParams(pr["eta_total"], pr["delta_rad"], pr["alpha_per_sqrt_w"], pr["electronic_noise"])
    grid = np.linspace(0.0, 1.05 * p_mw.max(), 200)
    for sign, color in ((SQUEEZED, style.sqz_color), (ANTISQUEEZED, style.antisqz_color)):
        ax.plot(grid, lin_to_db(eq1_variance(grid * 1e-3, params, sign)), color=color, lw=1.2)
    ax.axhline(0.0, color="k", lw=0.6)
    ax.set_xlabel("pump power (mW)")
    ax.set_ylabel("noise relative to shot noise (dB)")
    ax.legend(frameon=False)
    _save(fig, path)


def plot_spectra(traces_by_panel: Mapping[str, list], path: Path, style: PlotStyle) -> None:
    fig = _figure(style, ncols=len(traces_by_panel))
    for ax, (title, traces) in zip(fig.axes, traces_by_panel.items()):
        for t in sorted(traces, key=lambda t: t.label):
            ax.plot(t.freqs / 1e6, t.levels, lw=0.8, label=t.label)
        ax.set_title(title)
        ax.set_xlabel("frequency (MHz)")
        ax.set_ylabel("power (dB)")
        ax.legend(frameon=False, fontsize=7)
    _save(fig, path)


def plot_visibility(scans: Mapping[str, Any], fits: Mapping[str, Mapping], path: Path,
                    style: PlotStyle) -> None:
    fig = _figure(style)
    ax = fig.axes[0]
    for (name, scan), color in zip(scans.items(), (style.antisqz_color, "tab:green")):
        d, v, s = scan.arrays()
        ax.errorbar(d, v, yerr=s, fmt="o", ms=3, mfc="none", color=color)
        f = fits[name]
        grid = np.linspace(d.min(), d.max(), 300)
        ax.plot(grid, visibility_model(grid, f["tau_fwhm_ps"], f["amplitude"], f["offset_ps"]),
                color=color, label=f"{name}: {f['tau_fwhm_ps']:.2f} ps")
    ax.set_xlabel("delay (ps)")
    ax.set_ylabel("visibility")
    ax.legend(frameon=False)
    _save(fig, path)


def plot_modes(modes: Mapping[str, ScalarMode], path: Path, style: PlotStyle) -> None:
    fig = _figure(style, ncols=len(modes))
    for ax, (name, m) in zip(fig.axes, modes.items()):
        img = mode_heatmap(m)
        ny, nx = img.shape
        ax.imshow(img, origin="lower", cmap=style.cmap, interpolation="nearest",
                  extent=(0, nx * m.dx, 0, ny * m.dy))
        ax.set_title(f"{name}: n_eff = {m.n_eff:.5f}")
        ax.set_xlabel("x (um)")
        ax.set_ylabel("y (um)")
        ax.grid(False)
    _save(fig, path)


def emit_plots(report: Mapping[str, Any], artifacts: Mapping[str, Any], out_dir,
               style: Optional[PlotStyle] = None) -> PlotOutcome:
    """Write every figure whose inputs are present; the rest are skipped with a notice."""
    style = style or PlotStyle()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sections = report.get("sections", {})
    res = PlotOutcome()

    def ok(name):
        sec = sections.get(name)
        return isinstance(sec, Mapping) and "error" not in sec

    if ok("fit"):
        plot_curve(sections["fit"], out_dir / "squeezing_vs_power.svg", style)
        res.written.append(out_dir / "squeezing_vs_power.svg")
    else:
        res.notices.append("skipped squeezing_vs_power.svg: no fit section")

    panels = {title: artifacts[key] for title, key in (("homodyne", "inputs.spectra_homodyne"),
                                                      ("direct", "inputs.spectra_direct"))
              if key in artifacts}
    if panels:
        plot_spectra(panels, out_dir / "spectra.svg", style)
        res.written.append(out_dir / "spectra.svg")
    else:
        res.notices.append("skipped spectra.svg: no spectrum traces")

    scans = {n: artifacts[f"scan_{n}"] for n in ("lo", "pump") if f"scan_{n}" in artifacts}
    if ok("pulses") and scans:
        plot_visibility(scans, sections["pulses"], out_dir / "visibility.svg", style)
        res.written.append(out_dir / "visibility.svg")
    else:
        res.notices.append("skipped visibility.svg: no visibility scans")

    if ok("modes") and "mode_o" in artifacts:
        modes = {"ordinary": artifacts["mode_o"], "extraordinary": artifacts["mode_e"]}
        plot_modes(modes, out_dir / "modes.svg", style)
        res.written.append(out_dir / "modes.svg")
        for name, m in modes.items():
            dump = out_dir / f"mode_{name}.txt"
            np.savetxt(dump, mode_heatmap(m), fmt="%.6e",
                       header=f"normalized intensity, rows bottom to top, dx={m.dx} um dy={m.dy} um, "
                              f"n_eff={m.n_eff!r}")
            res.written.append(dump)
    else:
        res.notices.append("skipped modes.svg: no mode solution")
    return res
