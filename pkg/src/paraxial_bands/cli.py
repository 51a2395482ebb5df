"""Command-line driver: ``paraxial-bands {bands,gapscan,validate,verify}``.

Exit codes: 0 ok, 2 configuration error, 3 solver failure, 4 verification
failure.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .bands import POLARIZATION_DEGENERACY, fillfactor_scan, gap_report, sweep_path
from .config import ConfigError, RunConfig, load_config, load_preset, preset_names
from .eigensolver import EigensolverError, biorthonormalize, eigendecompose, verify_residuals
from .fields import (
    SpinorPlaneWaveSet,
    gauge_forward,
    gauge_inverse,
    longitudinal_modulation,
    orthogonality_check,
    poynting_z,
)
from .hamiltonian import assemble, potential_matrix
from .lattice import matrix_element_validity, validity_check
from .reciprocal import build_gbasis, standard_kpath

log = logging.getLogger("paraxial_bands")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VERIFY = 0, 2, 3, 4

BANDS_HEADER = [
    "k_index",
    "k_x_per_um",
    "k_y_per_um",
    "path_coord_per_um",
    "label",
    "band",
    "re_E_eV",
    "broadening_eV",
    "tracking_overlap",
]
GAPSCAN_HEADER = ["FF", "E_T5_eV", "E_Z2_eV", "B_T5_eV", "B0_eV", "double_gap_open"]


def fmt(x) -> str:
    """Fixed 12-significant-digit text for floats; plain text otherwise."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if x == 0.0:
            return "0"
        return f"{x:.12g}"
    return "" if x is None else str(x)


def _json_value(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(fmt(float(x)))
    return x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return {"re": _json_value(obj.real), "im": _json_value(obj.imag)}
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return _json_value(obj)


def write_table(path_stem: Path, header, rows, out_format: str) -> Path:
    if out_format == "json":
        path = path_stem.with_suffix(".json")
        records = [{h: _json_value(v) for h, v in zip(header, row)} for row in rows]
        path.write_text(json.dumps(records, indent=1) + "\n", encoding="utf-8")
        return path
    path = path_stem.with_suffix(".csv")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _threads(args, cfg: RunConfig) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    if cfg.threads:
        return cfg.threads
    env = os.environ.get("PARAXIAL_BANDS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"PARAXIAL_BANDS_THREADS must be an integer, got {env!r}")
    return 1


def _validity_dict(model) -> dict:
    return validity_check(model).as_dict()


def _meta(cfg: RunConfig, command: str, extra: dict) -> dict:
    meta = {
        "command": command,
        "version": __version__,
        "kernel": _kernels.KERNEL,
        "config_source": cfg.source,
        "config": cfg.echo(),
        "units": {"energy": "eV", "length": "um", "wavenumber": "1/um"},
        "validity": _validity_dict(cfg.model),
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    meta.update(extra)
    return meta


def cmd_bands(cfg: RunConfig, out: Path, args) -> int:
    model = cfg.model
    basis = build_gbasis(model.lattice, cfg.M)
    path = standard_kpath(model.lattice, cfg.samples_per_segment)
    bs = sweep_path(model, basis, path, cfg.n_bands_kept, _threads(args, cfg), cfg.backend)
    gap = gap_report(bs, model)
    rows = []
    for i, k in enumerate(path.points):
        for q in range(bs.n_bands_kept):
            e = bs.energies[i, q]
            rows.append(
                (i, k.kx, k.ky, k.path_coordinate, k.label or "", q + 1, e.real, abs(e.imag), bs.tracking_overlaps[i, q])
            )
    table = write_table(out / "bands", BANDS_HEADER, rows, cfg.out_format)
    write_json(
        out / "meta.json",
        _meta(
            cfg,
            "bands",
            {
                "n_k": len(path),
                "n_bands_kept": bs.n_bands_kept,
                "basis_size": basis.count,
                "max_residual": bs.max_residual,
                "max_cross_product": bs.max_cross_product,
                "tracking_ok": bs.tracking_ok,
                "tracking_flag_steps": [int(i) for i in np.nonzero(bs.tracking_flags)[0]],
                "degeneracy_factor": POLARIZATION_DEGENERACY,
                "degeneracy_note": "each scalar band is a polarization doublet (x and y); rows are not duplicated",
                "gap_report": gap.as_dict(),
            },
        ),
    )
    print(f"wrote {table} ({len(path)} k-points x {bs.n_bands_kept} bands)")
    if gap.energy_gap is not None:
        print(f"energy gap: {gap.energy_gap_width * 1e3:.4g} meV between {gap.energy_gap_lower_state} and {gap.energy_gap_upper_state}")
    else:
        print("energy gap: none between bands 1 and 2")
    print(f"loss band edge: {gap.loss_band_edge * 1e3:.4g} meV at {gap.loss_band_edge_state}; baseline B0 {gap.baseline_loss * 1e3:.4g} meV")
    return EXIT_OK


def cmd_gapscan(cfg: RunConfig, out: Path, args) -> int:
    if cfg.scan is None:
        raise ConfigError(f"{cfg.source}: [scan]: missing section (needed by gapscan)")
    model = cfg.model
    basis = build_gbasis(model.lattice, cfg.M)
    path = standard_kpath(model.lattice, cfg.samples_per_segment)
    sc = fillfactor_scan(model, cfg.scan.grid(), basis, path, cfg.n_bands_kept, _threads(args, cfg), cfg.backend)
    table = write_table(out / "gapscan", GAPSCAN_HEADER, list(sc.rows()), cfg.out_format)
    windows = sc.open_windows()
    write_json(
        out / "gapscan_meta.json",
        _meta(
            cfg,
            "gapscan",
            {
                "open_windows": windows,
                "contiguous": sc.contiguous,
                "loss_gap_open_everywhere": bool(sc.loss_gap_open.all()),
            },
        ),
    )
    print(f"wrote {table} ({len(sc.ff_values)} fill factors)")
    if windows:
        for lo, hi in windows:
            print(f"double gap open for FF in [{lo:.4g}, {hi:.4g}]")
    else:
        print("double gap closed at every fill factor")
    return EXIT_OK


def _high_symmetry(path):
    return [(lab, path[path.index_of(lab)]) for lab in ("Delta", "Z", "T")]


def cmd_validate(cfg: RunConfig, out: Path, args) -> int:
    model = cfg.model
    rep = validity_check(model)
    result = rep.as_dict()
    if args.solve:
        basis = build_gbasis(model.lattice, cfg.M)
        path = standard_kpath(model.lattice, 2)
        V = potential_matrix(model, basis)
        checks = []
        for lab, k in _high_symmetry(path):
            es = biorthonormalize(eigendecompose(assemble(model, basis, k, V), backend=cfg.backend))
            for q in range(min(cfg.n_bands_kept, len(es))):
                if q in es.defect_flags:
                    continue
                chk = matrix_element_validity(model, es.vectors[:, q], basis)
                checks.append({"k_label": lab, "band": q + 1, **chk.as_dict()})
        result["matrix_element_bounds"] = checks
        result["matrix_element_verdict"] = "pass" if all(c["verdict"] == "pass" for c in checks) else "warn"
    path_out = write_json(out / "validity.json", {"source": cfg.source, **result})
    for name, v in rep.verdicts.items():
        print(f"{name}: {v} (contrast {rep.contrast:.4g}, bound {rep.bound_mirror if rep.contrast_kind == 'mirror' else rep.bound_index:.4g}, xi {rep.xi:.4g})")
    if args.solve:
        print(f"matrix elements: {result['matrix_element_verdict']}")
    print(f"wrote {path_out}")
    return EXIT_OK


ORTHO_TOL = 1e-6
IDENTITY_TOL = 1e-12


def run_verification(cfg: RunConfig) -> dict:
    """Solver, gauge and field checks at the Delta, Z and T points."""
    model = cfg.model
    basis = build_gbasis(model.lattice, cfg.M)
    path = standard_kpath(model.lattice, 2)
    V = potential_matrix(model, basis)
    nk = min(cfg.n_bands_kept, basis.count)
    checks: dict[str, dict] = {}

    def record(name, value, tol, passed=None, status=None, **extra):
        c = checks.setdefault(name, {"max": 0.0, "tol": tol, "passed": True, "points": {}})
        c["max"] = max(c["max"], float(value))
        ok = (value <= tol) if passed is None else passed
        c["passed"] = c["passed"] and bool(ok)
        if status:
            c["status"] = status
        c["points"][extra.pop("label")] = {"value": float(value), **extra}

    for lab, k in _high_symmetry(path):
        H = assemble(model, basis, k, V)
        es = biorthonormalize(eigendecompose(H, backend=cfg.backend))
        keep = [q for q in range(nk) if q not in es.defect_flags]

        sp = es.self_products[keep]
        bio = max(es.max_cross_product or 0.0, float(np.abs(sp - 1.0).max()) if keep else 0.0)
        record("biorthonormality", bio, 1e-8, label=lab, defect_flags=list(es.defect_flags))

        rr = verify_residuals(H, es, cfg.residual_tol)
        record("residuals", rr.max_residual, cfg.residual_tol, label=lab, failures=list(rr.failures))

        tr = np.trace(H.entries)
        rel = abs(es.values.sum() - tr) / max(abs(tr), 1e-300)
        record("trace", rel, 1e-10, label=lab)

        # gauge round trip on the band-1 spinor (closed-form algebra, no paraxial guard)
        spin = SpinorPlaneWaveSet.from_coefficients(es.vectors[:, 0], basis, k, model.kz, "x")
        back = gauge_inverse(gauge_forward(spin, guard=None))
        rt = float(np.abs(back.psi0 - spin.psi0).max() / np.abs(spin.psi0).max())
        record("gauge_round_trip", rt, IDENTITY_TOL, label=lab)

        # Poynting: cell mean of |psi|^2 equals sum |C|^2 on an alias-free grid
        n = 4 * cfg.M + 2
        x = (np.arange(n) + 0.5) / n * model.lattice.pitch - 0.5 * model.lattice.pitch
        X, Y = np.meshgrid(x, x, indexing="ij")
        sz = poynting_z(spin, np.stack([X, Y], axis=-1))
        parseval = float(np.sum(np.abs(es.vectors[:, 0]) ** 2))
        record("poynting_mean", abs(sz.mean() - parseval) / parseval, 1e-10, label=lab)

        # orthogonality of fields over the kept bands
        pairs = es.pairs
        O = np.array([[orthogonality_check(pairs[a], pairs[b], basis, model=model) for b in keep] for a in keep])
        dev = np.abs(O + np.eye(len(keep)))
        low = keep[:4]
        dev_low = float(dev[: len(low), : len(low)].max()) if low else 0.0
        if model.is_mirror:
            q = basis.vectors + k.vector
            s = np.einsum("ij,ij->i", q, q) / (4.0 * model.kz**2)
            C = es.vectors[:, keep]
            closed = -(C.T * (1.0 - s**2)) @ C
            ident = float(np.abs(O - closed).max())
            record("orthogonality", dev_low, ORTHO_TOL, passed=dev_low <= ORTHO_TOL and ident <= 1e-10,
                   label=lab, all_kept_max_dev=float(dev.max()), closed_form_mismatch=ident)
        else:
            record("orthogonality", dev_low, ORTHO_TOL, passed=True, status="info (nonuniform impedance, truncated basis)",
                   label=lab, all_kept_max_dev=float(dev.max()))

        lm = longitudinal_modulation(model, pairs[0], basis)
        em = max(abs(lm.mean()), abs(lm.derivative_mean()))
        record("eta_mean", em, 1e-10, label=lab, phi=lm.phi_qk)

    return checks


def cmd_verify(cfg: RunConfig, out: Path, args) -> int:
    checks = run_verification(cfg)
    failed = [name for name, c in checks.items() if not c["passed"]]
    path_out = write_json(out / "verify.json", {"source": cfg.source, "passed": not failed, "failed": failed, "checks": checks})
    for name, c in checks.items():
        tag = "PASS" if c["passed"] else "FAIL"
        note = f" [{c['status']}]" if "status" in c else ""
        print(f"{tag} {name}: max {c['max']:.3e} (tol {c['tol']:.1e}){note}")
    print(f"wrote {path_out}")
    if failed:
        print(f"verification failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


COMMANDS = {"bands": cmd_bands, "gapscan": cmd_gapscan, "validate": cmd_validate, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="paraxial-bands", description="Complex band structures of paraxial 2D photonic lattices.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "bands": "band structure along Delta-Z-T-Delta",
        "gapscan": "fill-factor scan of the energy and loss gaps",
        "validate": "paraxial validity conditions",
        "verify": "solver, gauge and field self-checks",
    }
    for name, h in helps.items():
        sp = sub.add_parser(name, help=h)
        src = sp.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", help="configuration file")
        src.add_argument("--preset", help=f"bundled preset ({', '.join(preset_names())})")
        sp.add_argument("--out", help="output directory (overrides [output] directory)")
        sp.add_argument("--format", choices=("csv", "json"), help="table format (overrides [output] format)")
        sp.add_argument("--threads", type=int, help="parallel k-point solves (default: config, then PARAXIAL_BANDS_THREADS)")
        sp.add_argument("-v", "--verbose", action="store_true")
        if name == "validate":
            sp.add_argument("--solve", action="store_true", help="also check intraband matrix elements at Delta, Z, T")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else load_preset(args.preset)
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        out = Path(args.out or cfg.out_dir)
        if args.format:
            from dataclasses import replace

            cfg = replace(cfg, out_format=args.format)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EigensolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
