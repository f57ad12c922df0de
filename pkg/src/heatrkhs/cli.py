"""Command-line front end: ``heatrkhs <command> [options]``.

Commands
--------
kernel-eval   CSV of K(z, w) over explicit or sampled point pairs
gram          JSON Gram matrix with its PSD report
solve         CSV of the state reached under controls read from a CSV file
synthesize    JSON summary plus control CSV of the minimal-norm control
verify        invariant table, exit 0 iff every row passes
feature-dump  CSV of feature-map samples h_z(t)

Options may also come from a JSON file given with ``--config``; flags given
on the command line take precedence. Exit status 1 means invalid input,
2 a numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import verify as verify_mod
from .control import (DOMAIN_OF as SCENARIO_DOMAIN, ControlSignal, Scenario, StateField,
                      apply_operator, fd_oracle, feature, min_norm_control, scenario_of)
from .errors import DomainError, IllConditioned, PoleProximity, TruncationFailure
from .geometry import sample_points
from .heat import TruncationPolicy
from .kernels import KernelKind, KernelSpec, eval_kernel, gram, kernel_kind, psd_check

COMMANDS = ("kernel-eval", "gram", "solve", "synthesize", "verify", "feature-dump")
NUMERICAL_ERRORS = (TruncationFailure, IllConditioned, PoleProximity)


class UsageError(ValueError):
    pass


@dataclass
class JobConfig:
    command: str
    kind: str | None = None
    scenario: str | None = None
    T: float = 1.0
    z: list | None = None
    w: list | None = None
    tol: float = 1e-12
    margin: float = 0.05
    lam: str = "auto"
    grid: int | None = None
    oracle: bool = False
    threads: int | None = None
    seed: int = 0
    input: str | None = None
    out: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if not (math.isfinite(self.T) and self.T > 0):
            raise UsageError("--T must be finite and positive")
        if not (math.isfinite(self.tol) and self.tol > 0):
            raise UsageError("--tol must be positive")
        if not (math.isfinite(self.margin) and self.margin >= 0):
            raise UsageError("--margin must be non-negative")
        if self.grid is not None and self.grid < 1:
            raise UsageError("--grid must be a positive integer")
        if self.threads is not None and self.threads < 1:
            raise UsageError("--threads must be at least 1")
        if self.lam != "auto":
            try:
                v = float(self.lam)
            except ValueError:
                raise UsageError(f"--lambda must be 'auto' or a number, got {self.lam!r}") from None
            if not (math.isfinite(v) and v >= 0):
                raise UsageError("--lambda must be non-negative")
        if self.input and self.out and Path(self.input).resolve() == Path(self.out).resolve():
            raise UsageError("--input and --out must be different paths")

    @property
    def policy(self) -> TruncationPolicy:
        try:
            return TruncationPolicy(self.tol)
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    @property
    def lam_value(self):
        return "auto" if self.lam == "auto" else float(self.lam)


CONFIG_KEYS = {f.name for f in fields(JobConfig)} - {"command"}


def parse_point(text) -> complex:
    """``"re,im"`` (or a bare real) to a complex number."""
    if isinstance(text, (list, tuple)):
        parts = list(text)
    else:
        parts = str(text).split(",")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"cannot parse point {text!r}; expected 're,im'") from None
    if len(vals) == 1:
        vals.append(0.0)
    if len(vals) != 2 or not all(math.isfinite(v) for v in vals):
        raise UsageError(f"cannot parse point {text!r}; expected 're,im'")
    return complex(vals[0], vals[1])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heatrkhs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS
    for name in COMMANDS:
        p = sub.add_parser(name, argument_default=S)
        p.add_argument("--config", help="JSON file of option defaults")
        p.add_argument("--out", help="output path (stdout when omitted)")
        p.add_argument("--T", type=float, help="time horizon (default 1)")
        p.add_argument("--tol", type=float, help="lattice truncation tolerance (default 1e-12)")
        p.add_argument("--seed", type=int, help="seed for sampled points (default 0)")
        p.add_argument("--threads", type=int, help="worker threads for kernel-eval")
        if name in ("kernel-eval", "gram"):
            p.add_argument("--kind", choices=[k.value for k in KernelKind])
        if name in ("solve", "synthesize", "feature-dump"):
            p.add_argument("--scenario", choices=[s.value for s in Scenario])
        if name in ("kernel-eval", "gram", "solve", "feature-dump"):
            p.add_argument("--z", action="append", help="point 're,im'; repeatable")
            p.add_argument("--margin", type=float, help="sampling margin (default 0.05)")
            p.add_argument("--grid", type=int, help="number of sampled points / samples")
        if name == "kernel-eval":
            p.add_argument("--w", action="append", help="second point 're,im'; repeatable")
        if name in ("solve", "synthesize"):
            p.add_argument("--input", help="control CSV (solve) or target CSV (synthesize)")
        if name == "solve":
            p.add_argument("--oracle", action="store_true",
                           help="add a Crank-Nicolson comparison")
        if name == "synthesize":
            p.add_argument("--lambda", dest="lam", help="'auto' or a regularization weight")
            p.add_argument("--grid", type=int, help="control samples (default 8192)")
    return parser


def load_config(argv=None) -> JobConfig:
    ns = vars(build_parser().parse_args(argv))
    command = ns.pop("command")
    merged: dict = {}
    cfg_path = ns.pop("config", None)
    if cfg_path is not None:
        try:
            data = json.loads(Path(cfg_path).read_text())
        except FileNotFoundError:
            raise UsageError(f"config file {cfg_path} not found") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {cfg_path} is not valid JSON: {exc.msg}") from None
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = sorted(set(data) - CONFIG_KEYS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        merged.update(data)
    merged.update(ns)
    try:
        return JobConfig(command=command, **merged)
    except TypeError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------- output helpers

def fmt(x: float) -> str:
    return "%.17g" % x


def write_csv(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([r if isinstance(r, str) else fmt(r) for r in row])
    _emit(path, buf.getvalue())


def write_json(path, obj):
    _emit(path, json.dumps(obj, indent=1) + "\n")


def _emit(path, text):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _pairs(arr):
    return [[float(v.real), float(v.imag)] for v in np.atleast_1d(arr)]


def read_csv(path, required):
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except FileNotFoundError:
        raise UsageError(f"input file {path} not found") from None
    if not rows:
        raise UsageError(f"input file {path} has no data rows")
    missing = [c for c in required if c not in rows[0]]
    if missing:
        raise UsageError(f"input file {path} lacks columns: {', '.join(missing)}")
    try:
        return {c: np.array([float(r[c]) for r in rows]) for c in rows[0]}
    except (TypeError, ValueError):
        raise UsageError(f"input file {path} holds non-numeric entries") from None


# ---------------------------------------------------------------- point sets

def _points(cfg: JobConfig, region, key="z", real_default=False, seed_offset=0):
    given = getattr(cfg, key)
    if given:
        return np.array([parse_point(p) for p in given])
    n = cfg.grid or 8
    if real_default:
        # physical profiles: real abscissae spread over (margin, 1 - margin)
        if not cfg.margin < 0.5:
            raise UsageError("--margin must be below 1/2 for rod abscissae")
        return np.linspace(cfg.margin, 1.0 - cfg.margin, n).astype(complex)
    return sample_points(region, n, cfg.margin, cfg.seed + seed_offset)


# ---------------------------------------------------------------- commands

def cmd_kernel_eval(cfg: JobConfig) -> int:
    spec = KernelSpec(kernel_kind(cfg.kind or "k0"), cfg.T, cfg.policy)
    z = _points(cfg, spec.domain, "z")
    w = _points(cfg, spec.domain, "w", seed_offset=1)
    if len(z) != len(w):
        if len(w) == 1:
            w = np.repeat(w, len(z))
        elif len(z) == 1:
            z = np.repeat(z, len(w))
        else:
            raise UsageError("--z and --w need equal counts (or a single --w / --z)")
    threads = cfg.threads or os.cpu_count() or 1
    chunks = np.array_split(np.arange(len(z)), min(threads, len(z)))

    def work(idx):
        return np.atleast_1d(eval_kernel(spec, z[idx], w[idx]))

    with ThreadPoolExecutor(max_workers=threads) as pool:
        values = np.concatenate(list(pool.map(work, chunks)))
    rows = [(a.real, a.imag, b.real, b.imag, k.real, k.imag) for a, b, k in zip(z, w, values)]
    write_csv(cfg.out, ["re_z", "im_z", "re_w", "im_w", "re_K", "im_K"], rows)
    return 0


def cmd_gram(cfg: JobConfig) -> int:
    spec = KernelSpec(kernel_kind(cfg.kind or "left"), cfg.T, cfg.policy)
    pts = _points(cfg, spec.domain, "z")
    g = gram(spec, pts)
    rep = psd_check(g)
    write_json(cfg.out, {
        "kind": spec.kind.value,
        "T": spec.T,
        "points": _pairs(g.points),
        "entries_re": g.entries.real.tolist(),
        "entries_im": g.entries.imag.tolist(),
        "min_eigenvalue": rep.min_eigenvalue,
        "trace": rep.trace,
        "psd_pass": rep.passes,
    })
    return 0


CONTROL_COLUMNS = ["t", "re_u_left", "im_u_left", "re_u_right", "im_u_right"]
FIELD_COLUMNS = ["re_x", "im_x", "re_w", "im_w"]


def _read_controls(path, T):
    data = read_csv(path, ["t", "re_u_left"])
    M = len(data["t"])
    expected = (np.arange(M) + 0.5) * (T / M)
    if M < 8 or np.max(np.abs(data["t"] - expected)) > 1e-9 * T:
        raise UsageError("control file must list at least 8 samples at (k + 1/2) T / M")

    def col(re, im):
        if re not in data:
            return None
        return ControlSignal(T, data[re] + 1j * data.get(im, np.zeros(M)))

    return col("re_u_left", "im_u_left"), col("re_u_right", "im_u_right")


def cmd_solve(cfg: JobConfig) -> int:
    if cfg.input is None:
        raise UsageError("solve needs --input with a control CSV")
    scenario = scenario_of(cfg.scenario or "left")
    pts = _points(cfg, SCENARIO_DOMAIN[scenario], "z", real_default=True)
    u_l, u_r = _read_controls(cfg.input, cfg.T)
    if scenario is Scenario.RIGHT_ONLY and u_r is None:
        raise UsageError("the right scenario reads the re_u_right column")
    state = apply_operator(scenario, u_l, u_r, pts, cfg.policy)
    header = list(FIELD_COLUMNS)
    rows = [[p.real, p.imag, v.real, v.imag] for p, v in zip(state.points, state.values)]
    if cfg.oracle:
        fd = _oracle(scenario, u_l, u_r, pts)
        header += ["re_w_fd", "im_w_fd", "abs_diff"]
        for row, v, ref in zip(rows, state.values, fd.values):
            row += [ref.real, ref.imag, abs(v - ref)]
    write_csv(cfg.out, header, rows)
    return 0


def _oracle(scenario, u_l, u_r, pts):
    if scenario is Scenario.HALF_LINE:
        raise UsageError("--oracle is available for the rod scenarios only")
    if scenario is Scenario.LEFT_ONLY:
        u_r = None
    elif scenario is Scenario.RIGHT_ONLY:
        u_l = None
    elif scenario is Scenario.SYM:
        u_r = u_l
    elif scenario is Scenario.ANTI_SYM:
        u_r = -u_l
    return fd_oracle(u_l, u_r, 400, 8000, pts)


def cmd_synthesize(cfg: JobConfig) -> int:
    if cfg.input is None:
        raise UsageError("synthesize needs --input with a target CSV")
    scenario = scenario_of(cfg.scenario or "left")
    data = read_csv(cfg.input, ["re_x", "re_w"])
    n = len(data["re_x"])
    pts = data["re_x"] + 1j * data.get("im_x", np.zeros(n))
    vals = data["re_w"] + 1j * data.get("im_w", np.zeros(n))
    target = StateField(pts, vals, cfg.T)
    M = cfg.grid or 8192
    if M < 8:
        raise UsageError("--grid must be at least 8 control samples")
    res = min_norm_control(scenario, target, lam=cfg.lam_value, M=M, policy=cfg.policy)
    u_l, u_r = res.controls()
    t = res.control.times
    zeros = np.zeros(M)
    cols = [u.samples if u is not None else zeros for u in (u_l, u_r)]
    rows = [(tk, a.real, a.imag, b.real, b.imag) for tk, a, b in zip(t, *cols)]
    control_path = None
    if cfg.out is not None:
        control_path = str(Path(cfg.out).with_suffix("")) + "_control.csv"
        write_csv(control_path, CONTROL_COLUMNS, rows)
    summary = {
        "scenario": scenario.value,
        "T": cfg.T,
        "lambda": res.lam,
        "residual": res.residual,
        "norm_estimate": res.norm_estimate,
        "control_norm": res.control_norm,
        "points": _pairs(target.points),
        "coefficients_re": res.coefficients.real.tolist(),
        "coefficients_im": res.coefficients.imag.tolist(),
        "control_samples": M,
        "control_csv": control_path,
    }
    write_json(cfg.out, summary)
    return 0


def cmd_verify(cfg: JobConfig) -> int:
    checks = verify_mod.run_suite(cfg.T, cfg.seed)
    text = "\n".join(c.line() for c in checks)
    n_fail = sum(not c.passed for c in checks)
    text += f"\n{len(checks) - n_fail}/{len(checks)} checks passed\n"
    _emit(cfg.out, text)
    return 0 if n_fail == 0 else 1


def cmd_feature_dump(cfg: JobConfig) -> int:
    scenario = scenario_of(cfg.scenario or "left")
    pts = _points(cfg, SCENARIO_DOMAIN[scenario], "z", real_default=True)
    M = cfg.grid or 256
    t = (np.arange(M) + 0.5) * (cfg.T / M)
    H = np.asarray(feature(scenario, pts[:, None], cfg.T, t[None, :], cfg.policy))
    if H.ndim == 2:
        H = H[None]
    header, cols = ["t"], []
    for c, Hc in enumerate(H):
        tag = "" if len(H) == 1 else ("_left", "_right")[c]
        for j in range(len(pts)):
            header += [f"re_h{j}{tag}", f"im_h{j}{tag}"]
            cols += [Hc[j].real, Hc[j].imag]
    rows = [[tk] + [col[k] for col in cols] for k, tk in enumerate(t)]
    write_csv(cfg.out, header, rows)
    return 0


DISPATCH = {
    "kernel-eval": cmd_kernel_eval,
    "gram": cmd_gram,
    "solve": cmd_solve,
    "synthesize": cmd_synthesize,
    "verify": cmd_verify,
    "feature-dump": cmd_feature_dump,
}


def run(cfg: JobConfig) -> int:
    try:
        return DISPATCH[cfg.command](cfg)
    except NUMERICAL_ERRORS as exc:
        print(f"heatrkhs: {cfg.command} failed ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 2
    except (UsageError, DomainError, ValueError) as exc:
        print(f"heatrkhs: {cfg.command}: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    try:
        cfg = load_config(argv)
    except UsageError as exc:
        print(f"heatrkhs: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse usage errors exit with 2; map them to 1
        return 1 if exc.code else 0
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
