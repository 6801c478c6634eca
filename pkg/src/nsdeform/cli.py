"""Command-line front end.

Subcommands ``gen``, ``fit``, ``krige``, ``simulate``, ``cv`` and ``diag``
read and write plain CSV files and a JSON fit bundle. Every option can also
be given in a TOML file passed with ``--config``; command-line flags take
precedence over file values.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import hashlib
import io
import json
import logging
import os
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import BACKEND
from .nmds import StressIncreaseError
from .pipeline import DeformationFit, fit_deformation, fit_stationary
from .prediction import OrdinaryKrigingSystem, conditional_sim, deform
from .spatial import AnchorSet, Dataset, DataError, anchor_grid, as_points, regular_grid
from .synthetic import gen_1d, gen_2d, split
from .tps import ThinPlateSpline, fold_check, probe_grid
from .tuning import HyperParams, score, select
from .variogram import MixtureVariogram, gamma_ns

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger("nsdeform")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
BUNDLE_FORMAT = "nsdeform-bundle/1"
DEFAULT_OMEGAS = tuple(round(0.05 + 0.075 * k, 3) for k in range(13))
CV2_MODE = "model fitted once on all data, leave-one-out in the kriging step only"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@contextlib.contextmanager
def stage(name: str):
    """Tag any exception escaping the block with the pipeline stage name."""
    try:
        yield
    except Exception as exc:
        if not hasattr(exc, "stage"):
            exc.stage = name
        raise


# ---------------------------------------------------------------- file I/O

def fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_atomic(path, text: str) -> None:
    """Write through a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def write_csv(path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    write_atomic(path, buf.getvalue())


def write_json(path, obj) -> None:
    write_atomic(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_table(path) -> tuple[list, np.ndarray]:
    """Header and float matrix of a comma-separated file."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if any(c.strip() for c in r)]
    if len(rows) < 2:
        raise DataError(f"{path}: expected a header row and at least one data row")
    header = [c.strip() for c in rows[0]]
    try:
        body = np.array([[float(c) for c in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise DataError(f"{path}: non-numeric entry ({exc})") from None
    if body.shape[1] != len(header):
        raise DataError(f"{path}: rows do not match the {len(header)}-column header")
    return header, body


def _coord_columns(header, path):
    if header[:2] == ["x", "y"]:
        return 2
    if header[:1] == ["x"]:
        return 1
    raise DataError(f"{path}: header must start with x or x,y (got {','.join(header)})")


def read_dataset(path) -> Dataset:
    header, body = read_table(path)
    p = _coord_columns(header, path)
    if len(header) != p + 1 or header[p] != "z":
        raise DataError(f"{path}: data header must be x[,y],z")
    return Dataset(body[:, :p], body[:, p])


def read_points(path, dim: int | None = None):
    """Coordinates, plus the ``z`` column when present (else None)."""
    header, body = read_table(path)
    p = _coord_columns(header, path)
    if dim is not None and p != dim:
        raise DataError(f"{path}: has {p} coordinate columns, expected {dim}")
    z = None
    if len(header) > p:
        if header[p] != "z" or len(header) != p + 1:
            raise DataError(f"{path}: point header must be x[,y] or x[,y],z")
        z = body[:, p]
    return body[:, :p], z


def coord_header(p: int) -> list:
    return ["x", "y"][:p]


def data_hash(data: Dataset) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(data.coords, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(data.values, dtype="<f8").tobytes())
    return h.hexdigest()


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = float(epoch) if epoch else time.time()
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(t))


# ---------------------------------------------------------------- bundle

@dataclass
class FitBundle:
    spline: ThinPlateSpline | None
    model: MixtureVariogram
    hyper: HyperParams | None
    dim: int
    provenance: dict

    def __post_init__(self):
        if self.spline is not None and self.spline.p != self.dim:
            raise DataError("bundle spline dimension differs from the data dimension")

    def to_json(self) -> dict:
        return {
            "format": BUNDLE_FORMAT,
            "dim": self.dim,
            "spline": None if self.spline is None else self.spline.to_text(),
            "model": self.model.to_text(),
            "lambda": None if self.hyper is None else self.hyper.lam,
            "omega": None if self.hyper is None else self.hyper.omega,
            "provenance": self.provenance,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FitBundle":
        if obj.get("format") != BUNDLE_FORMAT:
            raise DataError(f"not a fit bundle (format {obj.get('format')!r})")
        spline = None if obj["spline"] is None else ThinPlateSpline.from_text(obj["spline"])
        hyper = None if obj["lambda"] is None else HyperParams(obj["lambda"], obj["omega"])
        return cls(spline, MixtureVariogram.from_text(obj["model"]), hyper, int(obj["dim"]),
                   dict(obj.get("provenance", {})))

    def save(self, path) -> None:
        write_json(path, self.to_json())

    @classmethod
    def load(cls, path) -> "FitBundle":
        path = Path(path)
        if not path.is_file():
            raise DataError(f"fit bundle not found: {path}")
        try:
            obj = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid bundle ({exc})") from None
        return cls.from_json(obj)


# ---------------------------------------------------------------- options

def parse_grid(spec) -> list:
    """``"a:b:step"`` (inclusive) or comma list, or a list from TOML."""
    if spec is None:
        return None
    if isinstance(spec, (list, tuple)):
        return [float(v) for v in spec]
    spec = str(spec).strip()
    try:
        if ":" in spec:
            a, b, step = (float(v) for v in spec.split(":"))
            if not step > 0 or b < a:
                raise ValueError
            k = int(np.floor((b - a) / step + 1e-9))
            return [round(a + i * step, 12) for i in range(k + 1)]
        return [float(v) for v in spec.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad grid specification {spec!r}; use a:b:step or a,b,c") from None


def parse_counts(spec):
    if spec is None:
        return None
    if isinstance(spec, (list, tuple)):
        vals = [int(v) for v in spec]
    else:
        try:
            vals = [int(v) for v in str(spec).split(",")]
        except ValueError:
            raise UsageError(f"bad count specification {spec!r}") from None
    if any(v < 1 for v in vals):
        raise UsageError("grid counts must be positive")
    return vals


def load_config(args, command: str) -> None:
    """Fill options left unset on the command line from the TOML file."""
    if not getattr(args, "config", None):
        return
    path = Path(args.config)
    if not path.is_file():
        raise DataError(f"config file not found: {path}")
    with open(path, "rb") as fh:
        try:
            cfg = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise DataError(f"{path}: {exc}") from None
    merged = {k: v for k, v in cfg.items() if not isinstance(v, dict)}
    merged.update(cfg.get(command, {}))
    for key, value in merged.items():
        attr = {"lambda": "lam"}.get(key, key.replace("-", "_"))
        if not hasattr(args, attr):
            raise UsageError(f"{path}: unknown option {key!r} for '{command}'")
        if getattr(args, attr) is None:
            setattr(args, attr, value)


def _default(args, name, value):
    if getattr(args, name, None) is None:
        setattr(args, name, value)


def out_dir(args) -> Path:
    d = Path(args.out or ".")
    d.mkdir(parents=True, exist_ok=True)
    return d


def resolve_anchors(args, data: Dataset) -> AnchorSet:
    if args.anchors:
        pts, _ = read_points(args.anchors, data.dim)
        return AnchorSet(pts)
    return anchor_grid(data, parse_counts(args.anchor_counts))


def default_lambdas(data: Dataset) -> list:
    """Twenty bandwidths from 5% to 100% of the largest bounding-box side."""
    extent = float(np.max(np.ptp(data.coords, axis=0)))
    return [round(extent * 0.05 * k, 12) for k in range(1, 21)]


def run_select(args, data: Dataset, anchors: AnchorSet, out: Path):
    lams = parse_grid(args.lambda_grid) or default_lambdas(data)
    oms = parse_grid(args.omega_grid) or list(DEFAULT_OMEGAS)
    with stage("cv"):
        hp, t1, t2 = select(data, anchors, lams, oms, shortlist_size=int(args.shortlist))
    t1.write_csv(out / "cv1.csv")
    t2.write_csv(out / "cv2.csv")
    write_json(out / "selected.json", {"lambda": hp.lam, "omega": hp.omega,
                                       "shortlist_size": int(args.shortlist),
                                       "cv2_mode": CV2_MODE})
    return hp


# ---------------------------------------------------------------- commands

def cmd_gen(args) -> int:
    _default(args, "seed", 0)
    out = out_dir(args)
    if args.example == "1d":
        _default(args, "n", 1000)
        with stage("gen"):
            data, truth = gen_1d(int(args.n), int(args.seed))
    else:
        _default(args, "grid", 60)
        with stage("gen"):
            data, truth = gen_2d(int(args.grid), int(args.seed), range_scale=args.range_scale)
    p = data.dim
    hdr = coord_header(p)
    write_csv(out / "data.csv", hdr + ["z"],
              [list(c) + [z] for c, z in zip(data.coords, data.values)])
    images = truth(data.coords)
    write_csv(out / "truth.csv", hdr + ["fx", "fy"][:p],
              [list(c) + list(u) for c, u in zip(data.coords, images)])
    meta = {"example": args.example, "seed": int(args.seed), "n": data.n,
            "model": truth.model.to_text(), "range_scale": truth.range_scale,
            "version": __version__}
    if args.train is not None or args.valid is not None:
        if args.train is None or args.valid is None:
            raise UsageError("--train and --valid must be given together")
        tr, va = split(data, int(args.train), int(args.valid), int(args.seed))
        for name, d in (("train.csv", tr), ("valid.csv", va)):
            write_csv(out / name, hdr + ["z"], [list(c) + [z] for c, z in zip(d.coords, d.values)])
        meta.update(train=tr.n, valid=va.n)
    write_json(out / "gen.json", meta)
    return EXIT_OK


def _fit(args, data: Dataset, out: Path) -> tuple[DeformationFit, FitBundle]:
    prov = {"data_sha256": data_hash(data), "created": _timestamp(),
            "version": __version__, "backend": BACKEND, "cv2_mode": CV2_MODE}
    if args.stationary:
        with stage("variogram-model"):
            fit = fit_stationary(data)
        return fit, FitBundle(None, fit.model, None, data.dim, prov)
    with stage("anchors"):
        anchors = resolve_anchors(args, data)
    if args.lam is not None and args.omega is not None:
        hp = HyperParams(float(args.lam), float(args.omega))
    elif args.lam is None and args.omega is None:
        hp = run_select(args, data, anchors, out)
    else:
        raise UsageError("give both --lambda and --omega, or neither to select them")
    with stage("deformation"):
        fit = fit_deformation(data, anchors, hp.lam, hp.omega,
                              tol=float(args.tol), max_iter=int(args.max_iter))
    prov.update(anchors=int(anchors.m), stress=fit.stress.value,
                fold_fraction=fit.fold.fold_fraction)
    return fit, FitBundle(fit.spline, fit.model, hp, data.dim, prov)


def cmd_fit(args) -> int:
    with stage("input"):
        data = read_dataset(args.data)
    out = out_dir(args)
    fit, bundle = _fit(args, data, out)
    bundle.save(out / "bundle.json")
    p = data.dim
    u = fit.deform(data.coords)
    write_csv(out / "deformed.csv", coord_header(p) + ["u", "v"][:p] + ["z"],
              [list(c) + list(w) + [z] for c, w, z in zip(data.coords, u, data.values)])
    ev = fit.experimental
    write_csv(out / "variogram.csv", ["lag", "mean_distance", "experimental", "count", "fitted"],
              [[lag, md, g, int(c), float(fit.model(md if c > 0 else lag))]
               for lag, md, g, c in ev.rows()])
    if not fit.stationary:
        write_csv(out / "stress.csv", ["iteration", "stress"],
                  [[i, s] for i, s in fit.stress.rows()])
        write_csv(out / "anchors.csv", coord_header(p) + ["u", "v"][:p],
                  [list(x) + list(w) for x, w in zip(fit.anchors.points, fit.images)])
        f = fit.fold
        write_json(out / "fold.json", {
            "n_probes": f.n_probes, "majority_sign": f.majority_sign,
            "fold_fraction": f.fold_fraction, "min_det": f.min_det, "max_det": f.max_det,
            "folded": f.folded})
        if f.folded:
            log.warning("estimated deformation folds on %.2f%% of probes; consider a smaller omega",
                        100 * f.fold_fraction)
    return EXIT_OK


def _targets(args, dim, data: Dataset | None = None):
    if args.targets:
        return read_points(args.targets, dim)
    if args.target_grid:
        if data is None:
            raise UsageError("--target-grid needs --data for the bounding box")
        counts = parse_counts(args.target_grid)
        if len(counts) != dim:
            raise UsageError(f"--target-grid needs {dim} count(s)")
        lo, hi = data.coords.min(axis=0), data.coords.max(axis=0)
        return regular_grid(lo, hi, counts), None
    raise UsageError("give --targets or --target-grid")


def cmd_krige(args) -> int:
    with stage("input"):
        bundle = FitBundle.load(args.bundle)
        data = read_dataset(args.data)
        if data.dim != bundle.dim:
            raise DataError("data dimension differs from the fit bundle")
        targets, truth = _targets(args, data.dim, data)
    out = out_dir(args)
    with stage("kriging"):
        system = OrdinaryKrigingSystem(deform(bundle.spline, data.coords), data.values, bundle.model)
        _, _, est, var = system.solve(deform(bundle.spline, targets))
    sd = np.sqrt(var)
    write_csv(out / "predictions.csv", coord_header(data.dim) + ["estimate", "sd"],
              [list(t) + [e, s] for t, e, s in zip(targets, est, sd)])
    if truth is not None:
        with stage("scoring"):
            rep = score(est, sd, truth)
        # NaN (e.g. NMSE when every target is a data point) is written as null
        rep = {k: (v if np.isfinite(v) else None) for k, v in rep.as_dict().items()}
        write_json(out / "scores.json", rep)
        print(json.dumps(rep, sort_keys=True))
    return EXIT_OK


def simulation_checks(targets, data: Dataset, bundle: FitBundle, ens, seed: int) -> dict:
    """Conditioning reproduction and ensemble-mean agreement with kriging."""
    at_data = conditional_sim(data.coords, data, bundle.spline, bundle.model,
                              n_real=1, seed=seed)
    repro = float(np.max(np.abs(at_data.realizations[0] - data.values)))
    # mean agreement is judged at up to 20 evenly spaced probe targets
    pick = np.unique(np.linspace(0, len(targets) - 1, min(20, len(targets))).astype(int))
    r = ens.realizations[:, pick]
    se = r.std(axis=0, ddof=1) / np.sqrt(len(r))
    dev = np.abs(r.mean(axis=0) - ens.kriged[pick])
    ok_mean = bool(np.all(dev <= 3 * se + 1e-12))
    return {"max_conditioning_error": repro, "conditioning_ok": repro <= 1e-8,
            "max_mean_deviation_in_se": float(np.max(dev / np.maximum(se, 1e-300))),
            "mean_ok": ok_mean, "n_probes": len(pick), "n_real": len(r)}


def cmd_simulate(args) -> int:
    _default(args, "n_real", 1)
    _default(args, "seed", 0)
    with stage("input"):
        bundle = FitBundle.load(args.bundle)
        data = read_dataset(args.data)
        if data.dim != bundle.dim:
            raise DataError("data dimension differs from the fit bundle")
        targets, _ = _targets(args, data.dim, data)
    out = out_dir(args)
    with stage("simulation"):
        ens = conditional_sim(targets, data, bundle.spline, bundle.model,
                              n_real=int(args.n_real), seed=int(args.seed))
    names = [f"r{k}" for k in range(ens.realizations.shape[0])]
    write_csv(out / "realizations.csv", coord_header(data.dim) + names,
              [list(t) + list(col) for t, col in zip(targets, ens.realizations.T)])
    if args.check:
        with stage("simulation-check"):
            report = simulation_checks(targets, data, bundle, ens, int(args.seed))
        write_json(out / "check.json", report)
        print(json.dumps(report, sort_keys=True))
        if not (report["conditioning_ok"] and report["mean_ok"]):
            return EXIT_NUMERIC
    return EXIT_OK


def cmd_cv(args) -> int:
    with stage("input"):
        data = read_dataset(args.data)
    with stage("anchors"):
        anchors = resolve_anchors(args, data)
    hp = run_select(args, data, anchors, out_dir(args))
    print(json.dumps({"lambda": hp.lam, "omega": hp.omega}))
    return EXIT_OK


def parse_probes(spec, dim):
    if spec is None:
        raise UsageError("give --probes")
    if isinstance(spec, (list, tuple)):
        return as_points(spec, dim)
    if Path(str(spec)).is_file():
        pts, _ = read_points(spec, dim)
        return pts
    try:
        pts = [[float(v) for v in item.split(",")] for item in str(spec).split(";") if item.strip()]
    except ValueError:
        raise UsageError(f"bad probe list {spec!r}; use 'x,y;x,y' or a CSV file") from None
    return as_points(pts, dim)


def disc_offsets(dim: int, radius: float, rings: int, angles: int) -> np.ndarray:
    radii = radius * np.arange(1, rings + 1) / rings
    if dim == 1:
        return np.concatenate([-radii[::-1], [0.0], radii])[:, None]
    theta = 2 * np.pi * np.arange(angles) / angles
    ring = np.column_stack([np.cos(theta), np.sin(theta)])
    return np.vstack([[0.0, 0.0]] + [r * ring for r in radii])


def cmd_diag(args) -> int:
    _default(args, "rings", 10)
    _default(args, "angles", 36)
    with stage("input"):
        bundle = FitBundle.load(args.bundle)
        probes = parse_probes(args.probes, bundle.dim)
        data = read_dataset(args.data) if args.data else None
    if args.radius is None or not float(args.radius) > 0:
        raise UsageError("--radius must be positive")
    out = out_dir(args)
    p = bundle.dim
    offs = disc_offsets(p, float(args.radius), int(args.rings), int(args.angles))
    rows = []
    with stage("diagnostics"):
        for k, x in enumerate(probes):
            for d in offs:
                if bundle.spline is None:
                    g = float(bundle.model(np.linalg.norm(d)))
                else:
                    g = gamma_ns(x, x + d, bundle.spline, bundle.model)
                rows.append([k] + list(x) + list(d) + [g])
    px = ["px", "py"][:p]
    dx = ["dx", "dy"][:p]
    write_csv(out / "contours.csv", ["probe"] + px + dx + ["gamma"], rows)
    if data is not None:
        u = deform(bundle.spline, data.coords)
        write_csv(out / "scatter.csv", coord_header(p) + ["u", "v"][:p] + ["z"],
                  [list(c) + list(w) + [z] for c, w, z in zip(data.coords, u, data.values)])
    if bundle.spline is not None:
        rep = fold_check(bundle.spline, probe_grid(bundle.spline.centers))
        write_json(out / "fold.json", {"fold_fraction": rep.fold_fraction,
                                       "folded": rep.folded, "n_probes": rep.n_probes})
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _fit_options(sp, with_fixed=True):
    sp.add_argument("--data", help="data CSV with header x[,y],z")
    sp.add_argument("--anchors", help="anchor CSV with header x[,y]")
    sp.add_argument("--anchor-counts", help="anchor grid counts, e.g. 13,13 (default ~min(125, n/4))")
    sp.add_argument("--lambda-grid", help="bandwidth grid a:b:step or list")
    sp.add_argument("--omega-grid", help="mixing weight grid a:b:step or list")
    sp.add_argument("--shortlist", type=int, help="bandwidths kept after CV1 (default 3)")
    if with_fixed:
        sp.add_argument("--lambda", dest="lam", type=float, help="fixed bandwidth (skips selection)")
        sp.add_argument("--omega", type=float, help="fixed mixing weight (skips selection)")
        sp.add_argument("--stationary", action="store_true", default=None,
                        help="fit the stationary benchmark (no deformation)")
        sp.add_argument("--tol", type=float, help="NMDS relative stress tolerance (default 1e-6)")
        sp.add_argument("--max-iter", type=int, help="NMDS iteration cap (default 500)")


def _target_options(sp):
    sp.add_argument("--bundle", help="fit bundle JSON written by 'fit'")
    sp.add_argument("--data", help="conditioning data CSV x[,y],z")
    sp.add_argument("--targets", help="target CSV x[,y] with optional truth column z")
    sp.add_argument("--target-grid", help="regular target grid counts over the data box, e.g. 50,50")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nsdeform", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_, description=help_)
        sp.add_argument("--config", help="TOML file with option values")
        sp.add_argument("--out", help="output directory (default: current)")
        return sp

    sp = add("gen", "simulate a synthetic example with a known deformation")
    sp.add_argument("--example", choices=("1d", "2d"), required=True)
    sp.add_argument("--n", type=int, help="1D sample size (default 1000)")
    sp.add_argument("--grid", type=int, help="2D grid side (default 60)")
    sp.add_argument("--range-scale", type=float,
                    help="2D range multiplier (default keeps grid-neighbour correlation)")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--train", type=int, help="also write a training subset of this size")
    sp.add_argument("--valid", type=int, help="and a disjoint validation subset")
    sp.set_defaults(func=cmd_gen)

    sp = add("fit", "estimate the deformation and the deformed-space variogram")
    _fit_options(sp)
    sp.set_defaults(func=cmd_fit)

    sp = add("krige", "ordinary kriging through a fitted deformation")
    _target_options(sp)
    sp.set_defaults(func=cmd_krige)

    sp = add("simulate", "conditional Gaussian simulation through a fitted deformation")
    _target_options(sp)
    sp.add_argument("--n-real", type=int, help="number of realizations (default 1)")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--check", action="store_true", default=None,
                    help="verify conditioning and the ensemble mean; exit 3 on failure")
    sp.set_defaults(func=cmd_simulate)

    sp = add("cv", "cross-validation tables and selected hyper-parameters")
    _fit_options(sp, with_fixed=False)
    sp.set_defaults(func=cmd_cv)

    sp = add("diag", "variogram contour tables around probe points")
    sp.add_argument("--bundle", help="fit bundle JSON")
    sp.add_argument("--probes", help="'x,y;x,y' or a CSV file of probe points")
    sp.add_argument("--radius", type=float, help="disc radius around each probe")
    sp.add_argument("--rings", type=int, help="radial steps (default 10)")
    sp.add_argument("--angles", type=int, help="angular steps in 2D (default 36)")
    sp.add_argument("--data", help="data CSV; adds a deformed-space scatter export")
    sp.set_defaults(func=cmd_diag)
    return parser


FIT_DEFAULTS = {"shortlist": 3, "tol": 1e-6, "max_iter": 500, "stationary": False}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        load_config(args, args.command)
        for key, value in FIT_DEFAULTS.items():
            if hasattr(args, key):
                _default(args, key, value)
        for key in ("data", "bundle"):
            if hasattr(args, key) and getattr(args, key) is None and not (
                    key == "data" and args.command == "diag"):
                raise UsageError(f"--{key} is required")
        return args.func(args)
    except UsageError as exc:
        print(f"nsdeform {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (np.linalg.LinAlgError, StressIncreaseError, FloatingPointError) as exc:
        where = getattr(exc, "stage", args.command)
        print(f"nsdeform {args.command}: numerical failure in {where}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        where = getattr(exc, "stage", args.command)
        print(f"nsdeform {args.command}: data error in {where}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
