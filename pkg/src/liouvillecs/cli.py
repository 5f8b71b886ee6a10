"""Command-line front end.

Usage::

    liouvillecs COMMAND [--config FILE] [--key value ...]

Commands: riccati, evolve, circle, compare, figure1, figure2, figure3,
identity-check.  Every option can also be given in a flat ``key = value``
config file (``#`` starts a comment); command-line flags override the file.
Numbers in the CSV output carry 17 significant digits.

Exit codes: 0 success, 1 usage/config error, 2 numerical failure,
3 comparison above threshold.
"""

from __future__ import annotations

import argparse
import io
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import lcs, oracle, riccati
from .core import AlgebraKind
from .errors import LCSError, NumericalFailure, UnphysicalState
from .models import OscillatorBathParams, SpinBosonParams, fig2_oscillator, su11_rates, su2_rates

COMMANDS = ("riccati", "evolve", "circle", "compare", "figure1", "figure2", "figure3",
            "identity-check")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_COMPARE = 0, 1, 2, 3


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


def _complex_pair(text: str) -> complex:
    parts = text.replace(" ", "").split(",")
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) != 2:
        raise ValueError("expected 're,im'")
    return complex(float(parts[0]), float(parts[1]))


def _int(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise ValueError("expected an integer")
    return int(value)


# key -> (parser, default, help)
KEYS = {
    "model": (str, "su2", "su2 (two-level system, one bath mode) or su11 (damped oscillator)"),
    "omega": (float, 2.0, "level splitting / oscillator frequency"),
    "g": (float, 1.0, "system-bath coupling (su2)"),
    "delta": (float, 0.0, "detuning (su2)"),
    "nbar": (float, 0.0, "thermal occupancy"),
    "gamma": (float, 1.0, "base damping rate (su11)"),
    "a": (float, 1.0, "rate offset in gamma (a + cos(big_gamma t)) (su11)"),
    "big_gamma": (float, 8.0, "rate modulation frequency (su11)"),
    "truncation": (_int, 64, "Fock cutoff (su11)"),
    "t_end": (float, 10.0, "final time"),
    "tol": (float, 1e-10, "integrator tolerance"),
    "n_out": (_int, 101, "number of output times"),
    "out": (str, None, "output CSV path (required)"),
    "zeta0": (_complex_pair, 0.5 + 0j, "initial coherent parameter as re,im"),
    "threshold": (float, 1e-6, "compare: maximal allowed trace distance"),
    "n_theta": (_int, 32, "identity-check: theta nodes"),
    "n_phi": (_int, 64, "identity-check: phi nodes"),
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    model: str
    omega: float
    g: float
    delta: float
    nbar: float
    gamma: float
    a: float
    big_gamma: float
    truncation: int
    t_end: float
    tol: float
    n_out: int
    out: str
    zeta0: complex
    threshold: float
    n_theta: int
    n_phi: int

    @property
    def kind(self) -> AlgebraKind:
        return AlgebraKind.parse(self.model)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, self.n_out)

    def echo(self) -> str:
        items = asdict(self)
        lines = [f"command = {items.pop('command')}"]
        for key in KEYS:
            value = items[key]
            if isinstance(value, complex):
                value = f"{value.real:.17g},{value.imag:.17g}"
            lines.append(f"{key} = {value}")
        return "\n".join(lines)


def read_config_file(path: str) -> dict:
    """Parse a flat ``key = value`` file into raw strings."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in KEYS:
                raise ConfigError(f"unknown key '{key}' in {path}:{lineno}")
            values[key] = value
    return values


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file; flags override it")
    for key, (_, default, text) in KEYS.items():
        flag = "--" + key.replace("_", "-")
        common.add_argument(flag, dest=key, default=argparse.SUPPRESS,
                            help=f"{text} (default: {default})")
    parser = argparse.ArgumentParser(prog="liouvillecs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def parse_config(args, file: str | None = None) -> RunConfig:
    """Build a validated :class:`RunConfig` from flags and an optional file.

    Raises:
        ConfigError: unknown key, unparsable value or failed validation.
    """
    parser = _build_parser()
    try:
        ns = vars(parser.parse_args(list(args)))
    except SystemExit as exc:
        if exc.code == 0:
            raise
        raise ConfigError("invalid command line") from None
    command = ns.pop("command")
    file = ns.pop("config", None) or file
    raw = read_config_file(file) if file else {}
    raw.update(ns)
    values = {}
    for key, (parse, default, _) in KEYS.items():
        if key in raw:
            try:
                values[key] = parse(raw[key])
            except (TypeError, ValueError):
                raise ConfigError(f"cannot parse value {raw[key]!r} for key '{key}'") from None
        else:
            values[key] = default
    cfg = RunConfig(command=command, **values)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    def bad(key, why):
        raise ConfigError(f"invalid value for '{key}': {why}")

    if cfg.model not in ("su2", "su11"):
        bad("model", "expected su2 or su11")
    for key in ("omega", "g", "delta", "nbar", "gamma", "a", "big_gamma", "t_end", "tol",
                "threshold"):
        if not math.isfinite(getattr(cfg, key)):
            bad(key, "must be finite")
    for key in ("t_end", "tol", "threshold"):
        if not getattr(cfg, key) > 0:
            bad(key, "must be positive")
    for key in ("nbar", "gamma"):
        if getattr(cfg, key) < 0:
            bad(key, "must be >= 0")
    if cfg.n_out < 2:
        bad("n_out", "must be >= 2")
    if cfg.truncation < 2:
        bad("truncation", "must be >= 2")
    if cfg.n_theta < 8 or cfg.n_phi < 8:
        bad("n_theta" if cfg.n_theta < 8 else "n_phi", "must be >= 8")
    if not (math.isfinite(cfg.zeta0.real) and math.isfinite(cfg.zeta0.imag)):
        bad("zeta0", "must be finite")
    if cfg.kind is AlgebraKind.SU11 and cfg.command in ("evolve", "circle", "compare") \
            and not abs(cfg.zeta0) < 1:
        bad("zeta0", "su11 needs |zeta0| < 1")
    if cfg.command == "figure3" and not abs(cfg.zeta0) < 1:
        bad("zeta0", "su11 needs |zeta0| < 1")
    if not cfg.out:
        bad("out", "missing required output path")


# -- experiments --------------------------------------------------------------


def model_rates(cfg: RunConfig) -> riccati.RateFunctions:
    if cfg.kind is AlgebraKind.SU2:
        return su2_rates(SpinBosonParams(cfg.omega, cfg.g, cfg.delta, cfg.nbar))
    return su11_rates(OscillatorBathParams(cfg.gamma, cfg.a, cfg.big_gamma, cfg.nbar, cfg.omega))


def threads() -> int:
    try:
        n = int(os.environ.get("LCS_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def _sweep(fn, items):
    items = list(items)
    with ThreadPoolExecutor(max_workers=min(threads(), len(items))) as pool:
        return list(pool.map(fn, items))


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _table(header, columns):
    rows = [",".join(header)]
    for row in zip(*columns):
        rows.append(",".join(_fmt(x) for x in row))
    return "\n".join(rows) + "\n"


def _initial(cfg: RunConfig):
    """Initial coherent state, its trace-one operator and the weight c with
    ``rho0 = c |zeta> (+ h.c. for su11)``."""
    kind, d = cfg.kind, (None if cfg.kind is AlgebraKind.SU2 else cfg.truncation)
    state = lcs.CoherentState(kind, cfg.zeta0)
    if kind is AlgebraKind.SU2:
        weight = 1 / np.trace(lcs.coherent_operator(state))
        rho0 = weight * lcs.coherent_operator(state)
    else:
        weight = su11_weight(cfg.zeta0)
        rho0 = lcs.su11_assemble([(0, weight, cfg.zeta0)], d)
    return state, weight, rho0, d


def su11_weight(zeta0: complex) -> complex:
    """``c0`` making ``c0 |0; zeta0> + h.c.`` trace one."""
    return (1 - zeta0) * math.sqrt(1 - abs(zeta0) ** 2) / 2


def lcs_states(cfg: RunConfig, coeffs, state, weight, d):
    """Disentangled density matrices at every time of ``coeffs``."""
    out = []
    for i in range(len(coeffs)):
        v = lcs.evolve_vector(coeffs[i], state, d)
        n = 2 if d is None else d
        rho = weight * v.reshape(n, n)
        if cfg.kind is AlgebraKind.SU11:
            rho = rho + rho.conj().T
        out.append(rho)
    return np.array(out)


def _purity(rho) -> float:
    return float(np.real(np.trace(rho @ rho)))


def cmd_riccati(cfg: RunConfig) -> tuple[str, int]:
    coeffs = riccati.solve_ode(model_rates(cfg), cfg.t_end, cfg.tol, times=cfg.times)
    buf = io.StringIO()
    coeffs.to_csv(buf)
    return buf.getvalue(), EXIT_OK


def _trajectory(cfg: RunConfig):
    coeffs = riccati.solve_ode(model_rates(cfg), cfg.t_end, cfg.tol, times=cfg.times)
    return lcs.param_trajectory(coeffs, lcs.CoherentState(cfg.kind, cfg.zeta0))


def cmd_evolve(cfg: RunConfig) -> tuple[str, int]:
    buf = io.StringIO()
    _trajectory(cfg).to_csv(buf)
    return buf.getvalue(), EXIT_OK


def cmd_circle(cfg: RunConfig) -> tuple[str, int]:
    tr = _trajectory(cfg)
    return _table(["time", "R", "z_re", "z_im"],
                  [tr.times, tr.radius, tr.center.real, tr.center.imag]), EXIT_OK


def compare_tables(cfg: RunConfig):
    """Disentangled and oracle trajectories plus their trace distance."""
    rates = model_rates(cfg)
    state, weight, rho0, d = _initial(cfg)
    coeffs = riccati.solve_ode(rates, cfg.t_end, cfg.tol, times=cfg.times)
    ours = lcs_states(cfg, coeffs, state, weight, d)
    ref = oracle.integrate(cfg.kind, rates, rho0, cfg.t_end, cfg.tol, times=cfg.times)
    dist = np.array([oracle.trace_distance(a, b) for a, b in zip(ours, ref.states)])
    columns = [cfg.times, dist,
               [_purity(r) for r in ours], ref.purities().real,
               [np.trace(r).real for r in ours], ref.traces().real, ref.leak]
    header = ["time", "trace_distance", "purity_lcs", "purity_oracle", "trace_lcs_re",
              "trace_oracle_re", "leak"]
    return header, columns, float(dist.max())


def cmd_compare(cfg: RunConfig) -> tuple[str, int]:
    header, columns, worst = compare_tables(cfg)
    code = EXIT_OK
    if worst > cfg.threshold:
        print(f"compare: max trace distance {worst:.3e} exceeds threshold {cfg.threshold:.3e}",
              file=sys.stderr)
        code = EXIT_COMPARE
    else:
        print(f"compare: max trace distance {worst:.3e}", file=sys.stderr)
    return _table(header, columns), code


def _label(x: float) -> str:
    return f"{x:g}".replace("-", "m")


def cmd_figure1(cfg: RunConfig) -> tuple[str, int]:
    """R(t), z(t) for detunings 0, 1, 2 and the circle |zeta| = |zeta0|."""
    deltas = (0.0, 1.0, 2.0)

    def run(delta):
        sub = replace(cfg, model="su2", delta=delta)
        coeffs = riccati.solve_ode(model_rates(sub), cfg.t_end, cfg.tol, times=cfg.times)
        imgs = [lcs.circle_map(coeffs[i], abs(cfg.zeta0), -1) for i in range(len(coeffs))]
        return ([c.radius for c in imgs], [c.center.real for c in imgs],
                [c.center.imag for c in imgs])

    header, columns = ["time"], [cfg.times]
    for delta, cols in zip(deltas, _sweep(run, deltas)):
        tag = _label(delta)
        header += [f"R_delta{tag}", f"z_re_delta{tag}", f"z_im_delta{tag}"]
        columns += list(cols)
    return _table(header, columns), EXIT_OK


FIG2_SU2_ZETAS = (0.0, 0.25, 0.5, 1.0)
FIG2_SU11_ZETAS = (0.0, 0.3, 0.5)
# the admixture needs a populated first level, so it is skipped for zeta = 0;
# its parameter zeta0/2 keeps the coherences below sqrt(p_n p_{n+1}) for all n
FIG2_ADMIX_ZETAS = (0.3, 0.5)
FIG2_ADMIXTURE = 0.05


def figure2_initial_su11(zeta0: float, admix: float, d: int) -> list:
    """Diagonal m=0 coherent state plus an optional |1; zeta0/2> admixture."""
    terms = [(0, su11_weight(zeta0), zeta0)]
    if admix:
        terms.append((1, admix, zeta0 / 2))
    rho = lcs.su11_assemble(terms, d)
    if oracle.min_eigenvalue(rho) < -1e-12:
        raise UnphysicalState(f"admixture {admix} at zeta={zeta0} is not a physical state")
    return terms


def cmd_figure2(cfg: RunConfig) -> tuple[str, int]:
    """Purity curves: su2 (omega, g, delta) and the su11 oscillator with
    rates gamma (1 + cos(8 gamma t)) / 2."""
    su2_cfg = replace(cfg, model="su2")
    su11_cfg = replace(cfg, model="su11")
    osc = fig2_oscillator(cfg.gamma, cfg.nbar, cfg.omega)
    d = cfg.truncation

    def run(job):
        name, zeta, admix = job
        if name == "su2":
            rates = model_rates(su2_cfg)
            coeffs = riccati.solve_ode(rates, cfg.t_end, cfg.tol, times=cfg.times)
            state = lcs.CoherentState(AlgebraKind.SU2, zeta)
            states = lcs_states(su2_cfg, coeffs, state,
                                1 / np.trace(lcs.coherent_operator(state)), None)
            return [_purity(r) for r in states]
        coeffs = riccati.solve_ode(su11_rates(osc), cfg.t_end, cfg.tol, times=cfg.times)
        total = np.zeros((len(coeffs), d, d), dtype=complex)
        for m, c, z in figure2_initial_su11(zeta, admix, d):
            state = lcs.CoherentState(AlgebraKind.SU11, z, m)
            part = lcs_states(su11_cfg, coeffs, state, c, d)
            total += part
        return [_purity(r) for r in total]

    jobs = [("su2", z, 0.0) for z in FIG2_SU2_ZETAS]
    jobs += [("su11", z, 0.0) for z in FIG2_SU11_ZETAS]
    jobs += [("su11", z, FIG2_ADMIXTURE) for z in FIG2_ADMIX_ZETAS]
    header = ["time"]
    for name, z, admix in jobs:
        header.append(f"purity_{name}_zeta{_label(z)}" + ("_admix" if admix else ""))
    return _table(header, [cfg.times] + _sweep(run, jobs)), EXIT_OK


FIG3_A = (1.0, 0.0)
FIG3_NBAR = (0.0, 0.5, 1.0)


def cmd_figure3(cfg: RunConfig) -> tuple[str, int]:
    """R(t), z(t) of the oscillator for a in {1, 0} and several nbar."""
    jobs = [(a, n) for a in FIG3_A for n in FIG3_NBAR]

    def run(job):
        a, nbar = job
        sub = replace(cfg, model="su11", a=a, nbar=nbar)
        coeffs = riccati.solve_ode(model_rates(sub), cfg.t_end, cfg.tol, times=cfg.times)
        imgs = [lcs.circle_map(coeffs[i], abs(cfg.zeta0), 1) for i in range(len(coeffs))]
        return ([c.radius for c in imgs], [c.center.real for c in imgs],
                [c.center.imag for c in imgs])

    header, columns = ["time"], [cfg.times]
    for (a, nbar), cols in zip(jobs, _sweep(run, jobs)):
        tag = f"a{_label(a)}_nbar{_label(nbar)}"
        header += [f"R_{tag}", f"z_re_{tag}", f"z_im_{tag}"]
        columns += list(cols)
    return _table(header, columns), EXIT_OK


def cmd_identity_check(cfg: RunConfig) -> tuple[str, int]:
    grids = [(cfg.n_theta, cfg.n_phi), (2 * cfg.n_theta, 2 * cfg.n_phi)]
    devs = [lcs.identity_resolution_check_su2(g) for g in grids]
    return _table(["n_theta", "n_phi", "deviation"],
                  [[g[0] for g in grids], [g[1] for g in grids], devs]), EXIT_OK


HANDLERS = {
    "riccati": cmd_riccati,
    "evolve": cmd_evolve,
    "circle": cmd_circle,
    "compare": cmd_compare,
    "figure1": cmd_figure1,
    "figure2": cmd_figure2,
    "figure3": cmd_figure3,
    "identity-check": cmd_identity_check,
}


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".lcs-", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(cfg: RunConfig) -> int:
    """Execute a validated configuration; returns the exit code."""
    try:
        text, code = HANDLERS[cfg.command](cfg)
    except (NumericalFailure, UnphysicalState) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (LCSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    write_atomic(cfg.out, text)
    return code


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(cfg.echo(), file=sys.stderr)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
