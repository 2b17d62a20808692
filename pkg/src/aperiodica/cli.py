"""Command-line front end.

Exit status: 0 on success, 1 on invalid input or unsupported combinations,
2 when a numeric threshold check fails.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analyze, construct, diffract, io, svg
from .lattice import EnumerationBudgetError
from .scheme import UnsupportedError
from .window import IncompatibleError

EXIT_OK, EXIT_INVALID, EXIT_THRESHOLD = 0, 1, 2


class ThresholdFailure(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    scheme: str = "fibonacci"
    window: str | None = None
    radius: float | None = None
    seed: int = 0
    k_cutoff: float = 3.0
    floor: float = 1e-3
    out_dir: Path = Path(".")
    format: str = "csv"
    svg: bool = False
    demo: str | None = None
    peak_tol: float = 0.02
    background_tol: float = 0.01
    occupancy: float | None = None
    patch_radius: float | None = None
    thresholds: dict = field(default_factory=dict)

    def validate(self):
        if self.radius is not None and not self.radius > 0:
            raise ValueError("--radius must be positive")
        if not (self.k_cutoff > 0 and self.floor >= 0 and self.peak_tol > 0 and self.background_tol > 0):
            raise ValueError("thresholds and cutoffs must be positive")
        if self.window and not self.window.lstrip().startswith("{") and not Path(self.window).exists():
            raise FileNotFoundError(f"window descriptor {self.window} not found")
        if self.occupancy is not None and not 0 <= self.occupancy <= 1:
            raise ValueError("--occupancy must lie in [0, 1]")


def _setup(cfg: RunConfig):
    scheme = io.load_scheme(cfg.scheme)
    window = io.load_window(cfg.window) if cfg.window else construct.default_window(scheme)
    if window.dim != scheme.internal.dim or bool(window.padic) != scheme.internal.is_padic:
        raise ValueError(f"window ({window.dim}-dimensional{', p-adic' if window.padic else ''}) does not "
                         f"match the scheme's internal space ({scheme.internal.dim}-dimensional "
                         f"{scheme.internal.kind})")
    return scheme, window


def _write_points(cfg, ps, name="points"):
    out = Path(cfg.out_dir)
    if cfg.format == "json":
        rows = [{"coords": c, "physical": x, "boundary": bool(b)}
                for c, x, b in zip(ps.coords.tolist(), ps.physical.tolist(), ps.boundary)]
        io.write_json({"region": ps.region.to_json(), "points": rows}, out / f"{name}.json")
    else:
        io.write_text(out / f"{name}.csv", io.points_csv(ps))
    if cfg.svg:
        io.write_text(out / "scatter.svg", svg.scatter_svg(ps.physical, title=f"{len(ps)} points"))


def cmd_generate(cfg: RunConfig) -> dict:
    scheme, window = _setup(cfg)
    ps = construct.enumerate_model_set(scheme, window, cfg.radius or 50.0)
    if cfg.occupancy is not None:
        ps = construct.occupy_stochastic(ps, cfg.occupancy, cfg.seed)
    _write_points(cfg, ps)
    report = {"command": "generate", "n_points": len(ps), "n_boundary": int(ps.boundary.sum()),
              "density": ps.density}
    io.write_json(report, Path(cfg.out_dir) / "report.json")
    return report


def cmd_analyze(cfg: RunConfig) -> dict:
    scheme, window = _setup(cfg)
    ps = construct.enumerate_model_set(scheme, window, cfg.radius or 100.0)
    report = {"command": "analyze", "n_points": len(ps), "density": ps.density,
              "predicted_density": float(window.haar_volume()) / scheme.covolume}
    if len(ps) >= 2:
        r_pack, r_cover = analyze.delone_radii(ps)
        report["delone"] = {"packing_radius": r_pack, "covering_radius": r_cover}
        report["meyer"] = analyze.meyer_check(ps, diff_radius=min(ps.region.size, 50.0)).to_json()
        r = cfg.patch_radius or 2.2 * r_pack
        census = analyze.patch_census(ps, r)
        report["patch_census"] = {"r": r, "n_classes": census.n_classes, "anchors": census.total,
                                  "offcenter_diff": census.offcenter_diff, "sensitive": census.sensitive,
                                  "classes": census.to_rows()[:50]}
        try:
            report["weyl"] = analyze.weyl_test(ps, window).to_json()
        except UnsupportedError as exc:
            report["weyl"] = {"unsupported": str(exc)}
    io.write_json(report, Path(cfg.out_dir) / "report.json")
    if cfg.svg:
        io.write_text(Path(cfg.out_dir) / "scatter.svg", svg.scatter_svg(ps.physical))
    return report


def _diffraction_report(cfg, scheme, window, ps, pred, n_top=10):
    """Numeric peak weights for the strongest predictions; 1-D samples use the
    integrated measure and an off-peak background scan, others the peak height."""
    top = pred.strongest(n_top)
    if ps.d == 1 and not scheme.internal.is_padic:
        num = diffract.measure_peaks(ps, top, "integrated")
        bgr = None
        if pred.background == 0:
            # off-peak check only where no diffuse background is expected
            mesh_pred = diffract.bragg_predict(scheme, window, cfg.k_cutoff, floor=max(cfg.floor, 0.005))
            bgr = diffract.background_ratio(ps, mesh_pred, cfg.k_cutoff)
        return top, diffract.compare_spectra(num, top, bgr), "integrated"
    num = diffract.measure_peaks(ps, top, "height")
    return top, diffract.compare_spectra(num, top), "height"


def cmd_diffract(cfg: RunConfig) -> dict:
    scheme, window = _setup(cfg)
    ps = construct.enumerate_model_set(scheme, window, cfg.radius or 1000.0)
    pred = diffract.bragg_predict(scheme, window, cfg.k_cutoff, floor=cfg.floor)
    if cfg.occupancy is not None:
        p = cfg.occupancy
        ps = construct.occupy_stochastic(ps, p, cfg.seed)
        pred = diffract.stochastic_expectation(pred, pred.density, p, p)
    top, cmp, method = _diffraction_report(cfg, scheme, window, ps, pred)
    out = Path(cfg.out_dir)
    io.write_text(out / "spectrum.csv", io.spectrum_csv(pred))
    report = {"command": "diffract", "n_points": len(ps), "density": pred.density, "method": method,
              "n_predicted": len(pred), "top_peaks": top.k.tolist(), "comparison": cmp.to_json(),
              "thresholds": {"peak": cfg.peak_tol, "background": cfg.background_tol}}
    if cfg.svg:
        io.write_text(out / "spectrum.svg", svg.stem_svg(pred.k, pred.intensity, "predicted Bragg spectrum"))
    report["passed"] = cmp.passed(cfg.peak_tol, cfg.background_tol)
    io.write_json(report, out / "report.json")
    if not report["passed"]:
        raise ThresholdFailure(f"peak error {cmp.max_error:.4g} or background "
                               f"{cmp.background_ratio} exceeds the thresholds")
    return report


# ---------------------------------------------------------------------------
# demos

def _demo_fibonacci(cfg):
    cfg.scheme = "fibonacci"
    cfg.radius = cfg.radius or 1000.0
    scheme, window = _setup(cfg)
    ps = construct.enumerate_model_set(scheme, window, cfg.radius)
    pred = diffract.bragg_predict(scheme, window, cfg.k_cutoff, floor=cfg.floor)
    top, cmp, method = _diffraction_report(cfg, scheme, window, ps, pred)
    report = {"n_points": len(ps), "density": ps.density, "predicted_density": pred.density,
              "comparison": cmp.to_json(), "top_peak_error": float(cmp.rel_error[0]),
              "max_peak_error": cmp.max_error, "passed": cmp.passed(cfg.peak_tol, cfg.background_tol)}
    return ps, pred, report


def _demo_cut_project(cfg, name, radius):
    cfg.scheme = name
    cfg.radius = cfg.radius or radius
    scheme, window = _setup(cfg)
    ps = construct.enumerate_model_set(scheme, window, cfg.radius)
    pred = diffract.bragg_predict(scheme, window, min(cfg.k_cutoff, 2.0), floor=max(cfg.floor, 0.01))
    top = pred.strongest(5)
    heights = diffract.measure_peaks(ps, top, "height")
    report = {"n_points": len(ps), "density": ps.density, "predicted_density": pred.density,
              "rank": scheme.rank, "d": scheme.d, "covolume": scheme.covolume,
              "packing_radius": construct.min_gap(ps.physical) / 2,
              "top_peaks": top.k.tolist(), "predicted_intensity": top.intensity.tolist(),
              "peak_height_estimate": heights.tolist(),
              "note": "peak heights of a finite ball sample are indicative only"}
    return ps, pred, report


def _demo_robinson(cfg):
    cfg.scheme = "robinson"
    R = cfg.radius or 64.0
    cfg.radius = R
    rcfg = construct.RobinsonConfig()
    scheme, window = _setup(cfg)
    tiles = construct.robinson_tile_classes(rcfg, R)
    dens = tiles.densities()
    ps = construct.enumerate_model_set(scheme, window, R)
    pred = diffract.bragg_predict(scheme, window, 1.0, floor=max(cfg.floor, 1e-3))
    top = pred.strongest(6)
    heights = diffract.measure_peaks(ps, top, "height")
    report = {"n_points": len(ps), "limit_point": [str(c) for c in rcfg.limit()],
              "tile_densities": {str(t): v for t, v in dens.items()},
              "expected_tile_densities": {str(t): float(v) for t, v in construct.TILE_DENSITIES.items()},
              "undecided": len(tiles.undecided), "window_volume": str(window.haar_volume()),
              "top_peaks": top.k.tolist(), "predicted_intensity": top.intensity.tolist(),
              "peak_height_estimate": heights.tolist(), "tail_bound": pred.meta["tail_bound"]}
    return tiles.classes[1], pred, report


def _demo_visible(cfg):
    R = cfg.radius or 100.0
    ps = construct.visible_points(2, R)
    kax, I = diffract.structure_factor_grid(ps)
    peaks = diffract.grid_peaks(kax, I, 0.005)
    ints = [float(I[int(round(a * len(kax))) % len(kax), int(round(b * len(kax))) % len(kax)]) for a, b in peaks]
    spec = diffract.Spectrum(peaks, np.array(ints), density=ps.density)
    report = {"n_points": len(ps), "density": len(ps) / (math.pi * R * R), "expected_density": 6 / math.pi ** 2,
              "peaks": peaks.tolist(), "relative_intensity": ints}
    return ps, spec, report


DEMOS = {
    "fibonacci": _demo_fibonacci,
    "icosian": lambda cfg: _demo_cut_project(cfg, "icosian", 3.0),
    "h3": lambda cfg: _demo_cut_project(cfg, "h3", 6.0),
    "robinson": _demo_robinson,
    "visible": _demo_visible,
}


def cmd_demo(cfg: RunConfig) -> dict:
    if cfg.demo not in DEMOS:
        raise ValueError(f"unknown demo {cfg.demo!r}; choose from {sorted(DEMOS)}")
    ps, spec, report = DEMOS[cfg.demo](cfg)
    out = Path(cfg.out_dir)
    io.write_text(out / "points.csv", io.points_csv(ps))
    io.write_text(out / "spectrum.csv", io.spectrum_csv(spec))
    io.write_text(out / "scatter.svg", svg.scatter_svg(ps.physical, title=f"{cfg.demo}: {len(ps)} points"))
    io.write_text(out / "spectrum.svg", svg.stem_svg(spec.k, spec.intensity, f"{cfg.demo} spectrum"))
    report = {"command": "demo", "demo": cfg.demo, **report}
    io.write_json(report, out / "report.json")
    if report.get("passed") is False:
        raise ThresholdFailure(f"demo {cfg.demo} failed its numeric thresholds")
    return report


COMMANDS = {"generate": cmd_generate, "analyze": cmd_analyze, "diffract": cmd_diffract, "demo": cmd_demo}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="aperiodica", description="Cut-and-project model sets and their diffraction")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scheme", default="fibonacci",
                       help="builtin name (fibonacci, icosian, h3, h2, robinson) or JSON descriptor/path")
        p.add_argument("--window", default=None, help="JSON window descriptor or path (default per scheme)")
        p.add_argument("--radius", type=float, default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--k-cutoff", type=float, default=3.0)
        p.add_argument("--floor", type=float, default=1e-3)
        p.add_argument("--out-dir", type=Path, default=Path("."))
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--svg", action="store_true")
        p.add_argument("--peak-tol", type=float, default=0.02)
        p.add_argument("--background-tol", type=float, default=0.01)
        p.add_argument("--occupancy", type=float, default=None, help="Bernoulli occupation probability")
        p.add_argument("--patch-radius", type=float, default=None)

    for name in ("generate", "analyze", "diffract"):
        common(sub.add_parser(name))
    demo = sub.add_parser("demo")
    demo.add_argument("demo", choices=sorted(DEMOS))
    common(demo)
    return ap


def run(cfg: RunConfig) -> int:
    try:
        cfg.validate()
        Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
        report = COMMANDS[cfg.command](cfg)
    except ThresholdFailure as exc:
        print(f"threshold failure: {exc}", file=sys.stderr)
        return EXIT_THRESHOLD
    except (ValueError, FileNotFoundError, json.JSONDecodeError, UnsupportedError, IncompatibleError,
            EnumerationBudgetError, NotImplementedError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(json.dumps({k: v for k, v in report.items() if not isinstance(v, (list, dict))}, default=str))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(command=args.command, scheme=args.scheme, window=args.window, radius=args.radius,
                    seed=args.seed, k_cutoff=args.k_cutoff, floor=args.floor, out_dir=args.out_dir,
                    format=args.format, svg=args.svg, demo=getattr(args, "demo", None),
                    peak_tol=args.peak_tol, background_tol=args.background_tol,
                    occupancy=args.occupancy, patch_radius=args.patch_radius)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
