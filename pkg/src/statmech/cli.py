"""
Command-line front end.

Every subcommand writes a table (CSV or JSON) whose header records the
package version, a hash of the resolved configuration and the seed, so a run
is reproducible from its output alone. Failures exit with status 2 (bad
configuration) or 3 (numerical failure) and print a JSON error on stderr.
"""

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from . import __version__
from .errors import ComputeError, ConfigError, StatMechError
from .numerics import RandomStream, Tolerance

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

FORMATS = ("csv", "json")


# ---------------------------------------------------------------- value parsing

def float_values(text) -> List[float]:
    """A number, a comma list "a,b,c", or an inclusive range "start:stop:count"."""
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, list):
        return [float(x) for x in text]
    text = str(text).strip()
    try:
        if ":" in text:
            a, b, n = text.split(":")
            n = int(n)
            if n < 1:
                raise ValueError
            return [float(x) for x in np.linspace(float(a), float(b), n)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"cannot read numbers from {text!r}; use x, a,b,c or start:stop:count")


def _complex_matrix(obj, what: str) -> np.ndarray:
    """Real nested lists, or nested [re, im] pairs."""
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{what} must be a numeric matrix")
    if arr.ndim == 2:
        return arr.astype(complex)
    if arr.ndim == 3 and arr.shape[2] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    raise ConfigError(f"{what} must be a matrix of reals or of [re, im] pairs")


def _load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})")


def _require(data: dict, keys, allowed, what: str):
    unknown = set(data) - set(allowed)
    if unknown:
        raise ConfigError(f"{what}: unknown keys {sorted(unknown)}")
    missing = [k for k in keys if k not in data]
    if missing:
        raise ConfigError(f"{what}: missing keys {missing}")


# ---------------------------------------------------------------- output tables

@dataclass
class Table:
    columns: List[str]
    rows: List[list]
    info: Dict[str, Any] = field(default_factory=dict)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def _json_value(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


def render(table: Table, header: Dict[str, Any], fmt: str) -> str:
    """
    CSV: '# key: value' header lines, then the column line and rows, floats
    with 17 significant digits and '\\n' line endings. JSON: an object with
    ``header``, ``info``, ``columns`` and ``rows``.
    """
    if fmt == "json":
        doc = {
            "header": header,
            "info": {k: _json_value(v) for k, v in table.info.items()},
            "columns": table.columns,
            "rows": [[_json_value(x) for x in row] for row in table.rows],
        }
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    for k, v in header.items():
        buf.write(f"# {k}: {v}\n")
    for k, v in table.info.items():
        buf.write(f"# info.{k}: {_fmt(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def _parse_cell(text: str):
    if text == "-0":
        return -0.0
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def read_output(text: str):
    """Parse CLI output (CSV or JSON) back into (header, info, columns, rows)."""
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        rows = [[float(x) if isinstance(x, str) and x in ("nan", "inf", "-inf") else x for x in r]
                for r in doc["rows"]]
        return doc["header"], doc["info"], doc["columns"], rows
    header, info, lines = {}, {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            k, _, v = line[2:].partition(": ")
            if k.startswith("info."):
                info[k[5:]] = _parse_cell(v)
            else:
                header[k] = _parse_cell(v) if k == "seed" else v
        else:
            lines.append(line)
    reader = list(csv.reader(lines))
    return header, info, reader[0], [[_parse_cell(x) for x in r] for r in reader[1:]]


# ---------------------------------------------------------------- subcommands

@dataclass(frozen=True)
class Option:
    name: str
    type: Callable = str
    default: Any = None
    help: str = ""
    choices: Optional[tuple] = None
    flag: bool = False

    @property
    def dest(self) -> str:
        return self.name.replace("-", "_")


COMMON = [
    Option("seed", int, 0, "seed for every random stream"),
    Option("tol-rel", float, 1e-10, "relative tolerance for quadrature and root finding"),
    Option("tol-abs", float, 1e-12, "absolute tolerance"),
    Option("out", str, None, "output file (default: stdout)"),
    Option("format", str, "csv", "output format", FORMATS),
    Option("config", str, None, "TOML file with option values; flags override it"),
]


def _sweep(cfg, name):
    return float_values(cfg[name])


def cmd_ensemble(cfg, tol, stream) -> Table:
    from .ensembles import (LevelSpectrum, ThermoPoint, oscillator_observables, partition,
                            spin_observables, two_level_spectrum, two_spin_spectrum)
    preset, omega = cfg["preset"], cfg["omega"]
    if cfg["spectrum"]:
        try:
            spec = LevelSpectrum.from_csv(cfg["spectrum"])
        except FileNotFoundError:
            raise ConfigError(f"file not found: {cfg['spectrum']}")
        solve = lambda pt: partition(spec, pt, tol)
    elif preset == "two_level":
        spec = two_level_spectrum(omega)
        solve = lambda pt: partition(spec, pt, tol)
    elif preset == "two_spin":
        spec = two_spin_spectrum(omega)
        solve = lambda pt: partition(spec, pt, tol)
    elif preset == "oscillator":
        solve = lambda pt: oscillator_observables(omega, pt)
    elif preset == "spin":
        solve = lambda pt: spin_observables(omega, pt)
    else:
        raise ConfigError("give --spectrum or --preset")
    rows = []
    for T in _sweep(cfg, "T"):
        o = solve(ThermoPoint(1.0 / T))
        rows.append([T, o.lnZ, o.F, o.E, o.S, o.C, o.VarE])
    return Table(["T", "lnZ", "F", "E", "S", "C", "VarE"], rows)


def cmd_gas(cfg, tol, stream) -> Table:
    from .ensembles import PowerLawDos
    from .quantum_gases import invert_mu
    dos = PowerLawDos(cfg["c"], cfg["alpha"])
    if cfg["sweep"] == "T":
        points = [(cfg["density"], T) for T in _sweep(cfg, "T")]
    else:
        points = [(n, float_values(cfg["T"])[0]) for n in float_values(cfg["n_values"])]
    rows = []
    for n, T in points:
        st = invert_mu(dos, cfg["kind"], n, T, tol)
        rows.append([T, st.mu, st.n, st.e, st.P, st.condensate_fraction])
    return Table(["T", "mu", "n", "e", "P", "condensate_fraction"], rows)


def cmd_chem(cfg, tol, stream) -> Table:
    from .chemical import Reaction, equilibrium_coordinate
    if not cfg["reaction"]:
        raise ConfigError("chem needs --reaction FILE")
    data = _load_json(cfg["reaction"])
    _require(data, ["species", "stoichiometry"], ["species", "stoichiometry", "counts"], "reaction file")
    try:
        reaction = Reaction.from_dict(data)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"reaction file: {exc}")
    eq = equilibrium_coordinate(reaction, cfg["T"], cfg["V"], tol)
    rows = [[k, reaction.stoichiometry[k], eq.counts[k], eq.counts_int[k]] for k in reaction.stoichiometry]
    return Table(["species", "nu", "count", "count_int"], rows,
                 {"n_bar": eq.n_bar, "n_int": eq.n_int, "ln_kappa": eq.ln_kappa})


def cmd_ising(cfg, tol, stream) -> Table:
    from .ising_field import ising1d_solve, mean_field_magnetization, onsager2d
    mode = cfg["mode"]
    rows = []
    if mode == "1d":
        for be in _sweep(cfg, "beta_eps"):
            for bh in _sweep(cfg, "beta_h"):
                r = ising1d_solve(be, bh, 1.0, cfg["N"], ring=not cfg["open"])
                rows.append([cfg["N"], be, bh, r.lnZ, r.F, r.M, r.M_bulk, r.chi, r.xi])
        return Table(["N", "beta_eps", "beta_h", "lnZ", "F", "M", "M_bulk", "chi", "xi"], rows)
    if mode == "2d":
        for be in _sweep(cfg, "beta_eps"):
            o = onsager2d(be, tol)
            rows.append([be, o.lnZ_per_site, o.kappa, o.energy_per_site])
        return Table(["beta_eps", "lnZ_per_site", "kappa", "energy_per_site"], rows)
    for T in _sweep(cfg, "T"):
        for h in _sweep(cfg, "h"):
            mf = mean_field_magnetization(cfg["eps"], h, T, cfg["c"])
            rows.append([T, h, mf.m, mf.Tc, mf.E_per_site, mf.C_per_site, len(mf.solutions)])
    return Table(["T", "h", "m", "Tc", "E_per_site", "C_per_site", "n_solutions"], rows)


def cmd_rg(cfg, tol, stream) -> Table:
    from .ising_field import rg_fixed_points, rg_flow
    if cfg["fixed_points"]:
        rows = []
        for fp in rg_fixed_points(cfg["d"]):
            ev = list(fp.eigenvalues) + [math.nan] * (2 - len(fp.eigenvalues))
            rows.append([fp.name, fp.r, fp.u, fp.r_stationary, ev[0], ev[1], fp.stability])
        return Table(["name", "r", "u", "r_stationary", "eig1", "eig2", "stability"], rows)
    traj = rg_flow(cfg["r0"], cfg["u0"], cfg["d"], cfg["tau_end"], samples=cfg["samples"])
    return Table(["tau", "r", "u"], [list(x) for x in zip(traj.tau, traj.r, traj.u)])


def cmd_virial(cfg, tol, stream) -> Table:
    from .interactions import hard_sphere, lennard_jones, mayer_b2, square_well, vdw_constants
    kind = cfg["potential"]
    if kind == "hard_sphere":
        pot = hard_sphere(cfg["sigma"])
    elif kind == "square_well":
        pot = square_well(cfg["sigma"], cfg["depth"], cfg["width"])
    else:
        pot = lennard_jones(cfg["depth"], cfg["sigma"])
    a_bar, b_bar = vdw_constants(pot, tol) if kind != "lennard_jones" else (math.nan, math.nan)
    rows = []
    for T in _sweep(cfg, "T"):
        b2, a2 = mayer_b2(pot, T, tol)
        rows.append([T, b2, a2])
    return Table(["T", "b2", "a2"], rows, {"a_bar": a_bar, "b_bar": b_bar})


def cmd_langevin(cfg, tol, stream) -> Table:
    from .stochastic import LangevinParams, langevin_simulate
    p = LangevinParams(cfg["m"], cfg["eta"], cfg["nu"], cfg["dt"])
    st = langevin_simulate(p, cfg["n_traj"], cfg["n_steps"], stream, scheme=cfg["scheme"])
    names = ["kinetic", "kinetic_err", "v2", "v2_err", "v4", "v4_err", "corr_rate",
             "D_msd", "D_msd_err", "D_vacf", "D_vacf_err"]
    rows = [[k, getattr(st, k)] for k in names]
    return Table(["quantity", "value"], rows, {"T": p.T, "stable": p.stable})


def cmd_rates(cfg, tol, stream) -> Table:
    from .stochastic import RateMatrix, rate_evolve, rate_steady_state
    if not cfg["rates"]:
        raise ConfigError("rates needs --rates FILE (CSV matrix, entry [n, m] = rate m -> n)")
    try:
        W = np.loadtxt(cfg["rates"], delimiter=",", ndmin=2, comments="#")
    except OSError:
        raise ConfigError(f"file not found: {cfg['rates']}")
    except ValueError as exc:
        raise ConfigError(f"rates file: {exc}")
    R = RateMatrix(W)
    n = R.n
    p0 = np.full(n, 1.0 / n) if cfg["p0"] is None else np.array(float_values(cfg["p0"]))
    if p0.size != n:
        raise ConfigError("p0 must have one entry per state")
    rows = [[t] + list(rate_evolve(R, p0, t)) for t in _sweep(cfg, "t")]
    ss = rate_steady_state(R)
    return Table(["t"] + [f"p{i}" for i in range(n)], rows,
                 {f"steady_p{i}": float(x) for i, x in enumerate(ss)})


def _model_bath(data):
    from .master_eq import BathSpectrum
    b = dict(data)
    allowed = {"kind", "T", "eta", "omega_c", "nu"}
    if set(b) - allowed:
        raise ConfigError(f"bath: unknown keys {sorted(set(b) - allowed)}")
    return BathSpectrum(**b)


def cmd_master(cfg, tol, stream) -> Table:
    from .master_eq import (gibbs_state, lindblad_generator, propagate, quantum_fokker_planck_generator,
                            secular_generator, white_noise_generator)
    if not cfg["model"]:
        raise ConfigError("master needs --model FILE")
    data = _load_json(cfg["model"])
    _require(data, ["H", "generator"],
             ["H", "W", "jumps", "generator", "nu", "eta", "bath", "rho0", "T0"], "model file")
    H = _complex_matrix(data["H"], "H")
    kind = data["generator"]
    if kind == "lindblad":
        gen = lindblad_generator(H, [_complex_matrix(j, "jump") for j in data.get("jumps", [])])
    elif kind == "white_noise":
        gen = white_noise_generator(H, _complex_matrix(data["W"], "W"), float(data["nu"]))
    elif kind == "qfp":
        gen = quantum_fokker_planck_generator(H, _complex_matrix(data["W"], "W"), float(data["nu"]),
                                              float(data["eta"]))
    elif kind == "secular":
        gen = secular_generator(H, _complex_matrix(data["W"], "W"), _model_bath(data["bath"])).generator
    else:
        raise ConfigError("generator must be lindblad, white_noise, qfp or secular")
    if "rho0" in data:
        rho0 = _complex_matrix(data["rho0"], "rho0")
    elif "T0" in data:
        rho0 = gibbs_state(H, float(data["T0"]))
    else:
        rho0 = np.zeros(H.shape, dtype=complex)
        rho0[0, 0] = 1.0
    times = np.array(_sweep(cfg, "t"))
    rhos = propagate(gen, rho0, times)
    n = H.shape[0]
    cols = ["t"] + [f"p{i}" for i in range(n)]
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    cols += [f"rho{i}{j}_{part}" for i, j in pairs for part in ("re", "im")]
    rows = []
    for t, rho in zip(times, rhos):
        row = [t] + [rho[i, i].real for i in range(n)]
        for i, j in pairs:
            row += [rho[i, j].real, rho[i, j].imag]
        rows.append(row)
    return Table(cols, rows)


def cmd_response(cfg, tol, stream) -> Table:
    from .response import PreparedSystem, default_grid, spectral_functions
    if not cfg["model"]:
        raise ConfigError("response needs --model FILE")
    data = _load_json(cfg["model"])
    _require(data, ["H", "A", "preparation"], ["H", "A", "B", "preparation"], "model file")
    H = _complex_matrix(data["H"], "H")
    A = _complex_matrix(data["A"], "A")
    B = _complex_matrix(data["B"], "B") if "B" in data else None
    prep = dict(data["preparation"])
    kind = prep.pop("kind", "canonical")
    if kind == "canonical":
        _require(prep, ["T"], ["T", "sigma"], "preparation")
        sys_ = PreparedSystem.canonical(H, float(prep["T"]), prep.get("sigma"))
    elif kind == "microcanonical":
        _require(prep, ["E0", "width"], ["E0", "width", "sigma"], "preparation")
        sys_ = PreparedSystem.microcanonical(H, float(prep["E0"]), float(prep["width"]), prep.get("sigma"))
    else:
        raise ConfigError("preparation kind must be canonical or microcanonical")
    omega = default_grid(sys_, cfg["n_omega"])
    tr = spectral_functions(sys_, A, B, omega)
    rows = [[w, s.real, s.imag, c.real, c.imag, k.real, k.imag]
            for w, s, c, k in zip(tr.omega, np.asarray(tr.S, dtype=complex),
                                  np.asarray(tr.C, dtype=complex), np.asarray(tr.K, dtype=complex))]
    return Table(["omega", "S_re", "S_im", "C_re", "C_im", "K_re", "K_im"], rows,
                 {"sigma": sys_.sigma, "valid": tr.valid})


def cmd_transport(cfg, tol, stream) -> Table:
    from .transport import ScatteringMatrix, landauer_conductance, pumped_charge_sampled
    if not cfg["smatrix"]:
        raise ConfigError("transport needs --smatrix FILE")
    data = _load_json(cfg["smatrix"])
    _require(data, ["leads"], ["S", "leads"], "S-matrix file")
    leads = {str(k): list(v) for k, v in data["leads"].items()}
    if cfg["cycle"]:
        cyc = _load_json(cfg["cycle"])
        _require(cyc, ["S", "lead"], ["S", "lead"], "cycle file")
        samples = [_complex_matrix(s, "cycle S") for s in cyc["S"]]
        lead = str(cyc["lead"])
        if lead not in leads:
            raise ConfigError(f"unknown lead {lead!r}")
        q = pumped_charge_sampled(samples, leads[lead])
        return Table(["lead", "Q", "n", "convergence"], [[lead, q.Q, q.n, q.convergence]])
    if "S" not in data:
        raise ConfigError("S-matrix file needs S")
    sm = ScatteringMatrix(_complex_matrix(data["S"], "S"), leads)
    rows = []
    for a in leads:
        for b in leads:
            if a != b:
                r = landauer_conductance(sm, a, b)
                rows.append([a, b, r.G_sum, r.G_trace])
    return Table(["lead_from", "lead_to", "G_sum", "G_trace"], rows)


def cmd_noneq(cfg, tol, stream) -> Table:
    from .noneq import (Protocol, TwoBathModel, crooks_check, heat_conduction_ft, jarzynski_estimate,
                        work_distribution)
    if cfg["mode"] == "heat":
        w = np.array([[0.0, 1.0], [1.0, 0.0]])
        model = TwoBathModel.from_couplings([0.0, cfg["gap"]], w, cfg["T_hot"], w, cfg["T_cold"])
        res = heat_conduction_ft(model, cfg["time"], cfg["n_traj"], stream)
        rows = [[x, y, res.affinity * x] for x, y in zip(res.centers, res.log_ratio)]
        return Table(["Q", "log_ratio", "affinity_Q"], rows,
                     {"slope": res.slope, "slope_error": res.slope_error, "affinity": res.affinity,
                      "residual": res.residual, "K": res.K, "nu": res.nu, "K_fd": res.K_fd})
    if not cfg["protocol"]:
        raise ConfigError("noneq work mode needs --protocol FILE")
    data = _load_json(cfg["protocol"])
    _require(data, ["HA", "HB", "t_f", "T0"], ["HA", "HB", "t_f", "T0", "interpolation", "schedule", "n_steps"],
             "protocol file")
    if data.get("interpolation", "linear") != "linear":
        raise ConfigError("only linear interpolation between endpoints is available from a file")
    sched = data.get("schedule", "linear")
    schedules = {"linear": lambda u: u, "smooth": lambda u: u * u * (3 - 2 * u)}
    if sched not in schedules:
        raise ConfigError(f"schedule must be one of {sorted(schedules)}")
    p = Protocol.linear(_complex_matrix(data["HA"], "HA"), _complex_matrix(data["HB"], "HB"),
                        float(data["t_f"]), schedules[sched], data.get("n_steps"))
    T0 = float(data["T0"])
    kf, kr = work_distribution(p, T0), work_distribution(p.reversed(), T0)
    cr = crooks_check(kf, kr)
    jz = jarzynski_estimate(kf.as_samples())
    rows = [[W, w] for W, w in zip(kf.W, kf.weights)]
    return Table(["W", "probability"], rows,
                 {"dF_exact": kf.dF, "dF_jarzynski": jz.dF, "mean_work": jz.mean_work,
                  "crooks_residual": cr.residual})


SUBCOMMANDS = {
    "ensemble": (cmd_ensemble, "canonical thermodynamics of a spectrum", [
        Option("spectrum", str, None, "CSV file with header energy,degeneracy"),
        Option("preset", str, None, "built-in spectrum", ("two_level", "two_spin", "oscillator", "spin")),
        Option("omega", float, 1.0, "level spacing of the preset"),
        Option("T", str, "0.1:2:20", "temperatures (x, a,b,c or start:stop:count)"),
    ]),
    "gas": (cmd_gas, "ideal quantum gas with g(e) = c e^(alpha-1)", [
        Option("kind", str, "bose", "statistics", ("bose", "fermi", "boltzmann")),
        Option("alpha", float, 1.5, "density-of-states exponent"),
        Option("c", float, 1.0, "density-of-states prefactor"),
        Option("density", float, 1.0, "particle density for T sweeps"),
        Option("sweep", str, "T", "swept variable", ("T", "n")),
        Option("T", str, "0.2:3:15", "temperatures"),
        Option("n-values", str, "0.5:2:4", "densities for --sweep n (uses the first T)"),
    ]),
    "chem": (cmd_chem, "chemical equilibrium of one reaction", [
        Option("reaction", str, None, "JSON reaction file"),
        Option("T", float, 1.0, "temperature"),
        Option("V", float, 1.0, "volume"),
    ]),
    "ising": (cmd_ising, "Ising models: exact 1D, Onsager 2D, mean field", [
        Option("mode", str, "1d", "model", ("1d", "2d", "mf")),
        Option("N", int, 8, "sites (1d)"),
        Option("open", bool, False, "open chain instead of a ring (1d)", flag=True),
        Option("beta-eps", str, "0.3", "coupling over T (1d, 2d)"),
        Option("beta-h", str, "0.0", "field over T (1d)"),
        Option("eps", float, 1.0, "coupling (mf)"),
        Option("c", int, 4, "coordination number (mf)"),
        Option("T", str, "1:6:11", "temperatures (mf)"),
        Option("h", str, "0", "fields (mf)"),
    ]),
    "rg": (cmd_rg, "renormalization-group flow of (r, u)", [
        Option("d", float, 3.0, "dimension"),
        Option("r0", float, 0.01, "initial r"),
        Option("u0", float, 0.01, "initial u"),
        Option("tau-end", float, 5.0, "flow time"),
        Option("samples", int, 101, "output points"),
        Option("fixed-points", bool, False, "list fixed points instead of a trajectory", flag=True),
    ]),
    "virial": (cmd_virial, "second virial coefficient of a pair potential", [
        Option("potential", str, "hard_sphere", "pair potential", ("hard_sphere", "square_well", "lennard_jones")),
        Option("sigma", float, 1.0, "core diameter or length scale"),
        Option("depth", float, 1.0, "well depth"),
        Option("width", float, 1.5, "square-well range in units of sigma"),
        Option("T", str, "0.5:5:10", "temperatures"),
    ]),
    "langevin": (cmd_langevin, "Langevin ensemble statistics", [
        Option("m", float, 1.0, "mass"),
        Option("eta", float, 1.0, "friction"),
        Option("nu", float, 2.0, "noise intensity"),
        Option("dt", float, 0.01, "time step"),
        Option("n-traj", int, 200, "trajectories"),
        Option("n-steps", int, 2000, "steps per trajectory"),
        Option("scheme", str, "euler", "integrator", ("euler", "exact")),
    ]),
    "rates": (cmd_rates, "rate-equation evolution", [
        Option("rates", str, None, "CSV rate matrix, entry [n, m] = rate m -> n"),
        Option("p0", str, None, "initial probabilities (comma list; default uniform)"),
        Option("t", str, "0:5:11", "output times"),
    ]),
    "master": (cmd_master, "quantum master-equation evolution", [
        Option("model", str, None, "JSON model file"),
        Option("t", str, "0:5:11", "output times"),
    ]),
    "response": (cmd_response, "broadened spectral functions S, C, K", [
        Option("model", str, None, "JSON model file"),
        Option("n-omega", int, 801, "frequency points"),
    ]),
    "transport": (cmd_transport, "Landauer conductances and pumped charge", [
        Option("smatrix", str, None, "JSON S-matrix file"),
        Option("cycle", str, None, "JSON file with S sampled along a pumping cycle"),
    ]),
    "noneq": (cmd_noneq, "work statistics and heat fluctuation theorem", [
        Option("mode", str, "work", "what to compute", ("work", "heat")),
        Option("protocol", str, None, "JSON protocol file (work mode)"),
        Option("T-hot", float, 1.5, "hot bath temperature (heat mode)"),
        Option("T-cold", float, 1.0, "cold bath temperature (heat mode)"),
        Option("gap", float, 1.0, "conductor level spacing (heat mode)"),
        Option("time", float, 20.0, "trajectory duration (heat mode)"),
        Option("n-traj", int, 10_000, "trajectories (heat mode)"),
    ]),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _add(parser, opt: Option):
    if opt.flag:
        parser.add_argument(f"--{opt.name}", dest=opt.dest, action="store_true", default=argparse.SUPPRESS,
                            help=opt.help)
    else:
        parser.add_argument(f"--{opt.name}", dest=opt.dest, type=opt.type, choices=opt.choices,
                            default=argparse.SUPPRESS, help=f"{opt.help} (default: {opt.default})")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="statmech", description="Statistical-mechanics workbench.")
    parser.add_argument("--version", action="version", version=f"statmech {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND", parser_class=_Parser)
    for name, (_, help_, opts) in SUBCOMMANDS.items():
        p = sub.add_parser(name, help=help_, description=help_)
        for opt in opts + COMMON:
            _add(p, opt)
    return parser


def resolve_config(argv) -> Dict[str, Any]:
    """Defaults, then the TOML file, then explicit flags. Unknown TOML keys raise ConfigError."""
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command", None)
    if command is None:
        raise ConfigError("missing subcommand; see --help")
    opts = SUBCOMMANDS[command][2] + COMMON
    cfg = {o.dest: o.default for o in opts}
    by_dest = {o.dest: o for o in opts}
    config_path = args.get("config")
    if config_path:
        try:
            with open(config_path, "rb") as fh:
                data = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"file not found: {config_path}")
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{config_path}: {exc}")
        for key, value in data.items():
            dest = key.replace("-", "_")
            if dest not in by_dest or dest == "config":
                raise ConfigError(f"unknown config key {key!r} for {command}")
            opt = by_dest[dest]
            if opt.flag:
                cfg[dest] = bool(value)
            elif opt.type in (int, float):
                try:
                    cfg[dest] = opt.type(value)
                except (TypeError, ValueError):
                    raise ConfigError(f"config key {key!r} must be a number")
            else:
                cfg[dest] = ",".join(str(v) for v in value) if isinstance(value, list) else str(value)
            if opt.choices and cfg[dest] not in opt.choices:
                raise ConfigError(f"config key {key!r} must be one of {list(opt.choices)}")
    cfg.update(args)
    cfg["command"] = command
    return cfg


def config_hash(cfg: Dict[str, Any]) -> str:
    keep = {k: v for k, v in cfg.items() if k not in ("out", "format", "config")}
    blob = json.dumps(keep, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def run(argv) -> int:
    """Run one command; returns the exit status."""
    try:
        cfg = resolve_config(argv)
        tol = Tolerance(abs=cfg["tol_abs"], rel=cfg["tol_rel"])
        stream = RandomStream(cfg["seed"])
        func = SUBCOMMANDS[cfg["command"]][0]
        try:
            table = func(cfg, tol, stream)
        except ConfigError:
            raise
        except (StatMechError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            raise ComputeError(f"{type(exc).__name__}: {exc}") from exc
        header = {"statmech": __version__, "command": cfg["command"],
                  "config_hash": config_hash(cfg), "seed": cfg["seed"]}
        text = render(table, header, cfg["format"])
        if cfg["out"]:
            Path(cfg["out"]).write_text(text)
        else:
            sys.stdout.write(text)
        return 0
    except ConfigError as exc:
        _report(exc, "ConfigError")
        return 2
    except ComputeError as exc:
        _report(exc, "ComputeError")
        return 3


def _report(exc, kind):
    cause = exc.__cause__
    err = {"error": kind, "message": str(exc)}
    if cause is not None:
        err["cause"] = type(cause).__name__
    sys.stderr.write(json.dumps(err) + "\n")


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if not argv:
        build_parser().print_help()
        return 2
    return run(argv)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
