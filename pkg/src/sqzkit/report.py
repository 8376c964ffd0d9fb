"""
Analysis orchestration: config handling, section runners and the JSON report.
"""
from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np

from . import __version__
from .curve_fit import (FitConvergenceError, FitResult, PropagationError, fit_eq1,
                        project_application_squeezing, propagate_waveguide_squeezing)
from .formats import (FormatError, file_digest, load_config, read_curve, read_spectra,
                      read_visibility, write_curve, write_spectra, write_visibility)
from .modes import (ModeConvergenceError, NoGuidedModeError, WaveguideGeometry, convergence_study,
                    mode_overlap, solve_fundamental)
from .noise_model import (LossBudget, LossFloorError, NoiseFloorError, NoiseParams, apply_loss,
                          compose, db_to_lin, electronic_noise_from_clearance,
                          generated_squeezing_db, infer_generated_squeezing, lin_to_db,
                          squeezing_roots, subtract_electronic_noise)
from .polarization import bright_port_phase, lo_split, solve_chain_angles
from .pulses import fit_pulse, ideal_pump_ratio, temporal_overlap, temporal_overlap_sigma
from .synth import band_average_db, gen_curve, gen_spectrum, gen_visibility_scan

SCHEMA_VERSION = 1
DEFAULT_SEED = 1234

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_VALIDATION = 4
EXIT_CONVERGENCE = 5
EXIT_ANALYSIS = 6

ANALYSES = ("fit", "infer", "overlap", "modes", "pulses", "simulate", "report")
SECTIONS_FOR = {
    "fit": ("fit",),
    "infer": ("fit", "electronic_noise", "loss_budget", "infer", "projections"),
    "overlap": ("modes", "pulses", "overlap"),
    "modes": ("modes",),
    "pulses": ("pulses",),
    "simulate": ("simulate",),
    "report": ("fit", "electronic_noise", "loss_budget", "infer", "projections", "modes",
               "pulses", "overlap", "polarization"),
}
SECTION_ORDER = ("simulate", "fit", "electronic_noise", "loss_budget", "infer", "projections",
                 "modes", "pulses", "overlap", "polarization")

DEFAULT_BUDGET = {"wg": 0.87, "prop": 0.96, "overlap": 0.97, "det": 0.75, "direct": 0.9}

# published values used when no measured input is supplied
DEFAULTS = {
    "run.seed": str(DEFAULT_SEED),
    "fit.en_clearance_db": "13.2",
    "fit.free_en": "false",
    "infer.pump_mw": "20",
    "infer.v_meas_db": "-3.61",
    "infer.v_meas_sigma_db": "0.05",
    "infer.mc_samples": "20000",
    "infer.max_reject_fraction": "0.5",
    "direct.v_meas_db": "-3.2",
    "direct.en_clearance_db": "15.3",
    "budget.homodyne_chain": "wg,prop,overlap,det",
    "projection.srs": "wg,direct",
    "projection.on_chip": "wg",
    "modes.convergence": "true",
    "pulses.tau_lo_ps": "6.4",
    "pulses.tau_lo_sigma_ps": "0.07",
    "pulses.tau_pump_ps": "5.17",
    "pulses.tau_pump_sigma_ps": "0.15",
    "polarization.split": "0.9",
    "polarization.phase_rad": "0.0",
}


class UsageError(ValueError):
    pass


def default_ridge_config() -> dict[str, str]:
    """The frozen default ridge cross-section shipped with the package."""
    from .formats import parse_config
    text = resources.files("sqzkit").joinpath("data/ridge_default.cfg").read_text(encoding="utf-8")
    return parse_config(text, "ridge_default.cfg")


def _bool(s: str) -> bool:
    return s.strip().lower() in ("1", "true", "yes", "on")


def _labels(s: str) -> list[str]:
    return [x.strip() for x in s.split(",") if x.strip()]


@dataclass
class AnalysisConfig:
    """Flat key/value settings plus the selected analyses.

    ``values`` maps ``section.key`` to raw strings; relative input paths are
    resolved against ``base_dir``.
    """

    analyses: tuple[str, ...]
    values: dict[str, str] = field(default_factory=dict)
    base_dir: Path = Path(".")
    out_dir: Optional[Path] = None

    def __post_init__(self):
        merged = dict(DEFAULTS)
        merged.update(default_ridge_config())
        merged.update(self.values)
        self.values = merged
        bad = [a for a in self.analyses if a not in ANALYSES]
        if bad:
            raise UsageError(f"unknown analyses {bad}; choose from {ANALYSES}")

    @classmethod
    def from_file(cls, path, analyses=None, overrides: Optional[Mapping[str, str]] = None,
                  out_dir=None) -> "AnalysisConfig":
        values = load_config(path)
        values.update(overrides or {})
        if analyses is None:
            analyses = tuple(_labels(values.get("run.analyses", "")))
        return cls(tuple(analyses), values, Path(path).resolve().parent,
                   Path(out_dir) if out_dir else None)

    def get(self, key: str, default: Optional[str] = None) -> Optional[str]:
        return self.values.get(key, default)

    def num(self, key: str) -> float:
        try:
            return float(self.values[key])
        except KeyError:
            raise UsageError(f"missing setting {key}") from None
        except ValueError:
            raise UsageError(f"setting {key}={self.values[key]!r} is not a number") from None

    def opt_num(self, key: str) -> Optional[float]:
        return self.num(key) if self.values.get(key, "") != "" else None

    def path(self, key: str) -> Optional[Path]:
        v = self.values.get(key)
        if not v:
            return None
        p = Path(v)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def seed(self) -> int:
        return int(self.num("run.seed"))

    def budget(self) -> LossBudget:
        entries = [(k.split(".", 1)[1], float(v)) for k, v in self.values.items()
                   if k.startswith("budget.") and k != "budget.homodyne_chain"]
        if not entries:
            entries = list(DEFAULT_BUDGET.items())
        else:
            # defaults fill labels the file does not set
            have = {k for k, _ in entries}
            entries += [(k, v) for k, v in DEFAULT_BUDGET.items() if k not in have]
        return LossBudget(entries)

    def geometry(self, core_index: float, grid: Optional[float] = None) -> WaveguideGeometry:
        h = grid if grid is not None else self.num("modes.grid_um")
        return WaveguideGeometry(
            ridge_width=self.num("modes.ridge_width_um"),
            ridge_height=self.num("modes.ridge_height_um"),
            slab_height=self.num("modes.slab_height_um"),
            core_index=core_index,
            substrate_index=self.num("modes.substrate_index"),
            cover_index=self.num("modes.cover_index"),
            wavelength=self.num("modes.wavelength_um"),
            dx=h, dy=h,
            pad_x=self.num("modes.pad_x_um"),
            pad_top=self.num("modes.pad_top_um"),
            pad_bottom=self.num("modes.pad_bottom_um"),
        )

    def input_paths(self) -> dict[str, Path]:
        return {k: self.path(k) for k in sorted(self.values) if k.startswith("inputs.") and self.values[k]}


@dataclass
class RunResult:
    report: dict[str, Any]
    artifacts: dict[str, Any]
    exit_code: int


def _error_object(exc: BaseException) -> tuple[dict, int]:
    if isinstance(exc, (FileNotFoundError, PermissionError, IsADirectoryError)):
        kind, code = "io", EXIT_IO
    elif isinstance(exc, (FitConvergenceError, ModeConvergenceError)):
        kind, code = "convergence", EXIT_CONVERGENCE
    elif isinstance(exc, (FormatError, UsageError, NoiseFloorError, LossFloorError, ValueError)):
        kind, code = "validation", EXIT_VALIDATION
    else:
        kind, code = "analysis", EXIT_ANALYSIS
    err = {"type": type(exc).__name__, "kind": kind, "message": str(exc)}
    if isinstance(exc, PropagationError):
        err.update(n_samples=exc.n_samples, n_rejected=exc.n_rejected)
        code = EXIT_ANALYSIS
        err["kind"] = "analysis"
    return {"error": err}, code


def _fit_dict(fit: FitResult) -> dict:
    p = fit.params
    return {
        "params": {"eta_total": p.eta_total, "delta_rad": p.delta, "alpha_per_sqrt_w": p.alpha,
                   "electronic_noise": p.electronic_noise},
        "stderr": fit.stderr,
        "free": list(fit.free),
        "covariance": fit.covariance.tolist(),
        "chi2_red": fit.chi2_red,
        "residual_norm": fit.residual_norm,
        "iterations": fit.iterations,
        "converged": fit.converged,
        "degenerate": fit.degenerate,
    }


class _Runner:
    def __init__(self, cfg: AnalysisConfig):
        self.cfg = cfg
        self.sections: dict[str, Any] = {}
        self.codes: dict[str, int] = {}
        self.artifacts: dict[str, Any] = {}

    # each section returns a JSON-able dict or raises

    def fit(self):
        path = self.cfg.path("inputs.curve")
        if path is None:
            raise UsageError("fit requires inputs.curve")
        curve = read_curve(path)
        self.artifacts["curve"] = curve
        fix = None if _bool(self.cfg.get("fit.free_en", "false")) else \
            electronic_noise_from_clearance(self.cfg.num("fit.en_clearance_db"))
        fit = fit_eq1(curve, fix_en=fix)
        self.artifacts["fit"] = fit
        out = _fit_dict(fit)
        out["en_clearance_db"] = None if fix is None else self.cfg.num("fit.en_clearance_db")
        out["data"] = [{"pump_mw": pt.pump_power * 1e3, "sqz_db": pt.v_minus_db,
                        "antisqz_db": pt.v_plus_db, "sigma_sqz_db": pt.sigma_minus_db,
                        "sigma_antisqz_db": pt.sigma_plus_db} for pt in curve.points]
        return out

    def _measured_levels(self, key_prefix: str, spectra_key: str):
        """(squeezed dB, antisqueezed dB or None, clearance dB) relative to shot noise."""
        path = self.cfg.path(spectra_key)
        if path is not None:
            traces = {t.label: t for t in read_spectra(path)}
            self.artifacts[spectra_key] = list(traces.values())
            shot = band_average_db(traces["shot"])
            sq = band_average_db(traces["squeezed"]) - shot
            anti = band_average_db(traces["antisqueezed"]) - shot if "antisqueezed" in traces else None
            clearance = shot - band_average_db(traces["electronic"])
            return sq, anti, clearance, "spectra"
        clearance_key = "fit.en_clearance_db" if key_prefix == "infer" else "direct.en_clearance_db"
        return (self.cfg.num(f"{key_prefix}.v_meas_db"), self.cfg.opt_num(f"{key_prefix}.v_plus_db"),
                self.cfg.num(clearance_key), "config")

    def electronic_noise(self):
        sq, anti, clr, src = self._measured_levels("infer", "inputs.spectra_homodyne")
        hom = subtract_electronic_noise(sq, clr)
        dsq, _, dclr, dsrc = self._measured_levels("direct", "inputs.spectra_direct")
        direct = subtract_electronic_noise(dsq, dclr)
        eta_direct = self.cfg.budget()["direct"]
        predicted = lin_to_db(apply_loss(db_to_lin(hom), eta_direct))
        out = {
            "homodyne": {"measured_db": sq, "clearance_db": clr, "corrected_db": hom, "source": src},
            "direct": {"measured_db": dsq, "clearance_db": dclr, "corrected_db": direct, "source": dsrc},
            "direct_consistency": {"eta_direct": eta_direct, "predicted_from_homodyne_db": predicted,
                                   "observed_direct_db": direct},
        }
        if anti is not None:
            out["homodyne"]["antisqueezed_db"] = anti
            out["homodyne"]["antisqueezed_corrected_db"] = subtract_electronic_noise(anti, clr)
        self.artifacts["v_corrected_db"] = hom
        self.artifacts["v_plus_corrected_db"] = out["homodyne"].get("antisqueezed_corrected_db")
        return out

    def loss_budget(self):
        budget = self.cfg.budget()
        chain = _labels(self.cfg.get("budget.homodyne_chain"))
        total = compose(budget.subset(chain))
        out = {"entries": [{"label": k, "efficiency": v} for k, v in budget.entries],
               "homodyne_chain": chain, "homodyne_total": total}
        if "fit" in self.artifacts and "wg" in chain:
            eta = self._source_fit().params.eta_total
            rest = compose(budget.subset([k for k in chain if k != "wg"]))
            out["eta_total"] = eta
            out["eta_wg_implied"] = eta / rest
        return out

    def _source_fit(self) -> FitResult:
        """The fit, with any ``infer.*`` parameter overrides applied."""
        fit = self.artifacts.get("fit")
        if fit is None:
            raise UsageError("inference needs a successful fit")
        err = fit.stderr
        c = self.cfg

        def pick(key, fitted):
            v = c.opt_num(key)
            return fitted if v is None else v

        params = NoiseParams(pick("infer.eta", fit.params.eta_total), pick("infer.delta", fit.params.delta),
                             pick("infer.alpha", fit.params.alpha), fit.params.electronic_noise)
        sigmas = {"eta_total": pick("infer.eta_sigma", err["eta_total"]),
                  "delta": pick("infer.delta_sigma", err["delta"]),
                  "alpha": pick("infer.alpha_sigma", err["alpha"])}
        return FitResult.from_reported(params, sigmas)

    def infer(self):
        src = self._source_fit()
        p, err = src.params, src.stderr
        P = self.cfg.num("infer.pump_mw") * 1e-3
        from_alpha = generated_squeezing_db(p.alpha, P)
        out = {"pump_mw": P * 1e3,
               "parameters": {"eta": p.eta_total, "eta_sigma": err["eta_total"], "delta_rad": p.delta,
                              "delta_sigma_rad": err["delta"], "alpha_per_sqrt_w": p.alpha,
                              "alpha_sigma": err["alpha"],
                              "overridden": [k for k in ("infer.eta", "infer.eta_sigma", "infer.delta",
                                                         "infer.delta_sigma", "infer.alpha",
                                                         "infer.alpha_sigma")
                                             if self.cfg.opt_num(k) is not None]},
               "from_alpha": {"generated_db": from_alpha,
                              "sigma_db": abs(from_alpha / p.alpha) * err["alpha"]}}
        v = self.artifacts.get("v_corrected_db")
        if v is None:
            v = subtract_electronic_noise(self.cfg.num("infer.v_meas_db"), self.cfg.num("fit.en_clearance_db"))
        v_plus = self.artifacts.get("v_plus_corrected_db")
        inv = {"v_meas_db": v, "v_plus_db": v_plus}
        try:
            inv["roots_db"] = [lin_to_db(x) for x in squeezing_roots(db_to_lin(v), p.eta_total, p.delta)]
            inv["selected_db"] = infer_generated_squeezing(v, p.eta_total, p.delta, v_plus)
        except LossFloorError as e:
            inv.update(_error_object(e)[0])
        out["inversion"] = inv
        sigma_v = self.cfg.num("infer.v_meas_sigma_db")
        out["propagation_inputs"] = {"v_meas_db": v, "v_meas_sigma_db": sigma_v, "seed": self.cfg.seed,
                                     "samples": int(self.cfg.num("infer.mc_samples"))}
        try:
            prop = propagate_waveguide_squeezing(
                src, v, sigma_v, n=int(self.cfg.num("infer.mc_samples")), seed=self.cfg.seed,
                v_plus_db=v_plus, max_reject_fraction=self.cfg.num("infer.max_reject_fraction"))
            out["propagation"] = {"central_db": prop.central_db, "upper_err_db": prop.upper_err_db,
                                  "lower_err_db": prop.lower_err_db, "n_samples": prop.n_samples,
                                  "n_rejected": prop.n_rejected}
        except PropagationError as e:
            obj, code = _error_object(e)
            out["propagation"] = obj
            self.codes["infer"] = code
        return out

    def projections(self):
        src = self._source_fit()
        budget = self.cfg.budget()
        P = self.cfg.num("infer.pump_mw") * 1e-3
        out = {"generated_db": generated_squeezing_db(src.params.alpha, P)}
        for k in sorted(self.cfg.values):
            if k.startswith("projection."):
                labels = _labels(self.cfg.values[k])
                out[k.split(".", 1)[1]] = {"labels": labels,
                                           "squeezing_db": project_application_squeezing(src, budget, labels, P)}
        return out

    def modes(self):
        n_o, n_e = self.cfg.num("modes.n_ordinary"), self.cfg.num("modes.n_extraordinary")
        go, ge = self.cfg.geometry(n_o), self.cfg.geometry(n_e)
        with ThreadPoolExecutor(2) as ex:
            mo, me = ex.map(solve_fundamental, (go, ge))
        self.artifacts.update(mode_o=mo, mode_e=me, geometry=go)
        out = {"geometry": {k: self.cfg.values[k] for k in sorted(self.cfg.values) if k.startswith("modes.")},
               "geometry_note": "assumed cross-section; true device dimensions unpublished",
               "n_eff_ordinary": mo.n_eff, "n_eff_extraordinary": me.n_eff,
               "residual_ordinary": mo.residual, "residual_extraordinary": me.residual,
               "spatial_overlap": mode_overlap(mo, me)}
        if _bool(self.cfg.get("modes.convergence", "true")):
            h = self.cfg.num("modes.grid_um")
            base = [self.cfg.geometry(n, grid=2 * h) for n in (n_o, n_e)]
            rows = convergence_study(base, levels=(1, 2, 4))
            out["convergence"] = [{"h_um": r.h, "n_eff": list(r.n_eff), "overlap": r.overlap} for r in rows]
        return out

    def pulses(self):
        out = {}
        taus = {}
        for name in ("lo", "pump"):
            path = self.cfg.path(f"inputs.visibility_{name}")
            if path is not None:
                scan = read_visibility(path)
                self.artifacts[f"scan_{name}"] = scan
                pf = fit_pulse(scan)
                self.artifacts[f"pulse_{name}"] = pf
                out[name] = {"tau_fwhm_ps": pf.tau_fwhm, "tau_sigma_ps": pf.tau_sigma,
                             "amplitude": pf.amplitude, "offset_ps": pf.offset,
                             "chi2_red": pf.chi2_red, "source": "fit"}
            else:
                out[name] = {"tau_fwhm_ps": self.cfg.num(f"pulses.tau_{name}_ps"),
                             "tau_sigma_ps": self.cfg.num(f"pulses.tau_{name}_sigma_ps"), "source": "config"}
            taus[name] = (out[name]["tau_fwhm_ps"], out[name]["tau_sigma_ps"])
        (a, sa), (b, sb) = taus["lo"], taus["pump"]
        out["temporal_overlap"] = temporal_overlap(a, b)
        out["temporal_overlap_sigma"] = temporal_overlap_sigma(a, sa, b, sb)
        out["ideal_pump_ratio"] = ideal_pump_ratio(a, b)
        return out

    def overlap(self):
        spatial = self.sections.get("modes", {}).get("spatial_overlap")
        temporal = self.sections.get("pulses", {}).get("temporal_overlap")
        if spatial is None or temporal is None:
            raise UsageError("overlap needs the modes and pulses sections")
        return {"spatial": spatial, "temporal": temporal,
                "combined": compose(LossBudget([("spatial", spatial), ("temporal", temporal)]))}

    def polarization(self):
        out = {}
        for name, split in (("bright", self.cfg.num("polarization.split")), ("homodyne", 0.5)):
            a = solve_chain_angles(split, self.cfg.num("polarization.phase_rad"))
            out[name] = {"wp_deg": [math.degrees(x) for x in a], "lo_split": lo_split(a),
                         "phase_rad": bright_port_phase(a)}
        return out

    def simulate(self):
        out_dir = self.cfg.out_dir
        if out_dir is None:
            raise UsageError("simulate needs an output directory")
        out_dir.mkdir(parents=True, exist_ok=True)
        seed = self.cfg.seed
        params = NoiseParams(0.61, 0.012, 12.4, electronic_noise_from_clearance(13.2))
        powers = np.array([2.5, 5, 7.5, 10, 15, 20, 30, 40]) * 1e-3
        note = "synthetic data generated by sqzkit simulate; not a measurement"
        files = {}
        write_curve(gen_curve(params, powers, 0.05, seed), out_dir / "curve.csv", [note])
        files["curve"] = out_dir / "curve.csv"
        hom = gen_spectrum({"squeezed": -3.61, "antisqueezed": 13.54, "shot": 0.0, "electronic": -13.2},
                           (19e6, 21e6), 401, 0.3, seed)
        write_spectra(hom, out_dir / "spectra_homodyne.csv", [note])
        files["spectra_homodyne"] = out_dir / "spectra_homodyne.csv"
        delays = np.linspace(-16, 16, 41)
        write_visibility(gen_visibility_scan(6.4, delays, 0.01, seed, label="1064"),
                         out_dir / "visibility_lo.csv", [note])
        write_visibility(gen_visibility_scan(5.17, delays, 0.02, seed + 1, label="532"),
                         out_dir / "visibility_pump.csv", [note])
        files["visibility_lo"] = out_dir / "visibility_lo.csv"
        files["visibility_pump"] = out_dir / "visibility_pump.csv"
        return {"files": {k: {"path": v.name, "sha256": file_digest(v)} for k, v in files.items()}}

    def run(self, sections):
        stage1 = [s for s in ("simulate", "fit", "modes", "pulses", "polarization") if s in sections]
        stage2 = [s for s in ("electronic_noise",) if s in sections]
        stage3 = [s for s in ("loss_budget", "infer", "projections", "overlap") if s in sections]

        def call(name):
            try:
                return name, getattr(self, name)(), None
            except Exception as exc:  # noqa: BLE001 - reported per section
                return name, None, exc

        # independent sections in parallel, then the dependent ones in order
        with ThreadPoolExecutor(max(len(stage1), 1)) as ex:
            for res in list(ex.map(call, stage1)):
                self._store(*res)
        for name in stage2 + stage3:
            self._store(*call(name))

    def _store(self, name, value, exc):
        if exc is None:
            self.sections[name] = value
        else:
            obj, code = _error_object(exc)
            self.sections[name] = obj
            self.codes[name] = code


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


def run_report(config: AnalysisConfig, timestamp: Optional[str] = None) -> RunResult:
    """Run the selected analyses and assemble the report document."""
    if not config.analyses:
        raise UsageError("no analysis selected")
    missing = [str(p) for p in config.input_paths().values() if not p.is_file()]
    if missing:
        raise FileNotFoundError(f"input files not found: {', '.join(missing)}")
    wanted = set()
    for a in config.analyses:
        wanted.update(SECTIONS_FOR[a])
    sections = [s for s in SECTION_ORDER if s in wanted]
    runner = _Runner(config)
    runner.run(sections)
    inputs = {}
    for key, p in config.input_paths().items():
        inputs[key] = {"path": config.values[key], "sha256": file_digest(p)}
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "sqzkit", "version": __version__},
        "generated_at": timestamp or time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "seed": config.seed,
        "analyses": list(config.analyses),
        "inputs": inputs,
        "sections": {s: runner.sections[s] for s in sections},
    }
    exit_code = EXIT_OK
    for s in sections:
        if s in runner.codes:
            exit_code = runner.codes[s]
            break
    return RunResult(_jsonable(report), runner.artifacts, exit_code)


def dumps(report: Mapping) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


HEADLINE_KEYS = {
    "fit.eta_total": ("fit", "params", "eta_total"),
    "fit.delta_rad": ("fit", "params", "delta_rad"),
    "fit.alpha_per_sqrt_w": ("fit", "params", "alpha_per_sqrt_w"),
    "electronic_noise.homodyne_db": ("electronic_noise", "homodyne", "corrected_db"),
    "electronic_noise.direct_db": ("electronic_noise", "direct", "corrected_db"),
    "electronic_noise.direct_predicted_db": ("electronic_noise", "direct_consistency",
                                             "predicted_from_homodyne_db"),
    "loss_budget.homodyne_total": ("loss_budget", "homodyne_total"),
    "infer.generated_db": ("infer", "from_alpha", "generated_db"),
    "projections.srs_db": ("projections", "srs", "squeezing_db"),
    "projections.on_chip_db": ("projections", "on_chip", "squeezing_db"),
    "modes.spatial_overlap": ("modes", "spatial_overlap"),
    "pulses.tau_lo_ps": ("pulses", "lo", "tau_fwhm_ps"),
    "pulses.tau_pump_ps": ("pulses", "pump", "tau_fwhm_ps"),
    "pulses.temporal_overlap": ("pulses", "temporal_overlap"),
}


def headline(report: Mapping) -> dict[str, Any]:
    """The summary numbers of a report, keyed by dotted name; absent sections give None."""
    out: dict[str, Any] = {"schema_version": report.get("schema_version")}
    for name, path in HEADLINE_KEYS.items():
        node: Any = report.get("sections", {})
        for key in path:
            node = node.get(key) if isinstance(node, Mapping) else None
        out[name] = node
    return out


def section_errors(report: Mapping) -> list[tuple[str, dict]]:
    """(dotted location, error object) for every error anywhere in the sections."""
    found = []

    def walk(node, where):
        if isinstance(node, Mapping):
            if isinstance(node.get("error"), Mapping):
                found.append((where, node["error"]))
            for k, v in node.items():
                if k != "error":
                    walk(v, f"{where}.{k}")

    for name, sec in report.get("sections", {}).items():
        walk(sec, name)
    return found
