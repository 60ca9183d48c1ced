"""Scenario configuration parsing and the pipelines behind ``lab run``.

A configuration is a JSON object describing one scenario, or an object with a
``"scenarios"`` list.  Complex matrix entries are written as ``[re, im]`` pairs;
plain numbers are read as real.
"""
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import fixtures
from .dynamics import (
    choi_matrix,
    evolve_exact,
    evolve_trotter,
    split_discrepancy,
    unravel,
)
from .errors import LabError
from .gibbs import make_gibbs, state_metric
from .lindblad import build_generators
from .modular import build_modular, check_modular_commutation, check_S_operator
from .operators import HermitianOperator, random_matrix
from .qdb import SpectrumSpec, check_condition_A, coefficient_tables, synthesize, verify_qdb
from .spectral import (
    commutant,
    ergodic_limit_check,
    gap_decay_check,
    null_spaces,
    spectral_report,
    structure_check,
)

KINDS = ("synthesize", "verify", "evolve", "ergodic", "decay", "unravel", "modular", "full-report")

DEFAULT_TOLERANCES = {
    "qdb": 1e-9,
    "stationarity": 1e-11,
    "structure": 1e-9,
    "split": 1e-9,
    "null_space": 1e-9,
    "decay": 1e-6,
    "trace": 1e-9,
    "positivity": 1e-9,
    "modular": 1e-9,
    "cp": 1e-9,
    "mc_sigmas": 4.0,
    "mc_dt_factor": 5.0,
}

# tolerances that are counts or factors rather than thresholds are not rescaled
UNSCALED = {"mc_sigmas", "mc_dt_factor"}


class ConfigError(LabError):
    """Invalid scenario configuration; the message names the offending field."""


def tolerance_scale():
    raw = os.environ.get("LAB_TOL_SCALE")
    if raw is None or raw == "":
        return 1.0
    try:
        val = float(raw)
    except ValueError:
        raise ConfigError(f"LAB_TOL_SCALE must be a positive number, got {raw!r}") from None
    if not val > 0:
        raise ConfigError(f"LAB_TOL_SCALE must be a positive number, got {raw!r}")
    return val


def _num(obj, key, path, default=None, positive=False, integer=False, minimum=None):
    if key not in obj:
        if default is None:
            raise ConfigError(f"{path}.{key}: required field is missing")
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {val!r}")
    if integer and int(val) != val:
        raise ConfigError(f"{path}.{key}: expected an integer, got {val!r}")
    if not np.isfinite(val):
        raise ConfigError(f"{path}.{key}: must be finite")
    if positive and not val > 0:
        raise ConfigError(f"{path}.{key}: must be positive, got {val!r}")
    if minimum is not None and val < minimum:
        raise ConfigError(f"{path}.{key}: must be >= {minimum}, got {val!r}")
    return int(val) if integer else float(val)


def _num_list(obj, key, path, default=None, positive=False):
    if key not in obj:
        if default is None:
            raise ConfigError(f"{path}.{key}: required field is missing")
        return list(default)
    val = obj[key]
    if not isinstance(val, list) or not val:
        raise ConfigError(f"{path}.{key}: expected a non-empty list of numbers")
    out = []
    for i, x in enumerate(val):
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not np.isfinite(x):
            raise ConfigError(f"{path}.{key}[{i}]: expected a finite number, got {x!r}")
        if positive and not x > 0:
            raise ConfigError(f"{path}.{key}[{i}]: must be positive, got {x!r}")
        out.append(float(x))
    return out


def parse_complex(x, path):
    if isinstance(x, bool):
        raise ConfigError(f"{path}: expected a number or [re, im] pair, got {x!r}")
    if isinstance(x, (int, float)):
        return complex(x)
    if (isinstance(x, list) and len(x) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x)):
        return complex(x[0], x[1])
    raise ConfigError(f"{path}: expected a number or [re, im] pair, got {x!r}")


def parse_matrix(rows, path, dim=None):
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ConfigError(f"{path}: expected a list of rows")
    n = len(rows)
    if dim is not None and n != dim:
        raise ConfigError(f"{path}: expected {dim} rows, got {n}")
    M = np.zeros((n, n), dtype=complex)
    for i, row in enumerate(rows):
        if len(row) != n:
            raise ConfigError(f"{path}[{i}]: expected {n} entries, got {len(row)}")
        for j, x in enumerate(row):
            M[i, j] = parse_complex(x, f"{path}[{i}][{j}]")
    if not np.all(np.isfinite(M)):
        raise ConfigError(f"{path}: entries must be finite")
    return M


def parse_vector(vals, path, dim):
    if not isinstance(vals, list) or len(vals) != dim:
        raise ConfigError(f"{path}: expected a list of {dim} entries")
    return np.array([parse_complex(x, f"{path}[{i}]") for i, x in enumerate(vals)])


def matrix_to_json(M):
    M = np.asarray(M)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


@dataclass
class ScenarioConfig:
    """Validated scenario description."""

    name: str
    kind: str
    dim: int
    tau: float
    hamiltonian: dict
    jumps: dict
    seed: int
    raw: dict
    tolerances: dict = field(default_factory=dict)

    def get(self, key, default=None):
        return self.raw.get(key, default)


def parse_scenario(obj, path="config", seed_override=None, tol_scale=1.0):
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected an object")
    kind = obj.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"{path}.kind: expected one of {', '.join(KINDS)}, got {kind!r}")
    dim = _num(obj, "dim", path, integer=True)
    if not 2 <= dim <= 16:
        raise ConfigError(f"{path}.dim: must lie in 2..16, got {dim}")
    tau = _num(obj, "tau", path, default=1.0, positive=True)
    seed = _num(obj, "seed", path, default=0, integer=True, minimum=0)
    if seed_override is not None:
        seed = int(seed_override)
    ham = obj.get("hamiltonian", {"type": "diag", "eigenvalues": list(range(dim))})
    if not isinstance(ham, dict):
        raise ConfigError(f"{path}.hamiltonian: expected an object")
    jumps = obj.get("jumps", {"type": "explicit", "operators": []})
    if not isinstance(jumps, dict):
        raise ConfigError(f"{path}.jumps: expected an object")
    tols = {k: v * (1.0 if k in UNSCALED else tol_scale) for k, v in DEFAULT_TOLERANCES.items()}
    over = obj.get("tolerances", {})
    if not isinstance(over, dict):
        raise ConfigError(f"{path}.tolerances: expected an object")
    for k, v in over.items():
        if k not in DEFAULT_TOLERANCES:
            raise ConfigError(f"{path}.tolerances.{k}: unknown tolerance (known: {', '.join(DEFAULT_TOLERANCES)})")
        tols[k] = _num(over, k, f"{path}.tolerances", positive=True) * (1.0 if k in UNSCALED else tol_scale)
    name = obj.get("name", kind)
    if not isinstance(name, str) or not name or "/" in name or name.startswith("."):
        raise ConfigError(f"{path}.name: expected a plain non-empty string, got {name!r}")
    cfg = ScenarioConfig(name=name, kind=kind, dim=dim, tau=tau, hamiltonian=ham, jumps=jumps,
                         seed=seed, raw=obj, tolerances=tols)
    # building the model validates the hamiltonian and jump sections eagerly
    build_model(cfg, path)
    return cfg


def parse_config(text, seed_override=None, tol_scale=1.0):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc.msg} at line {exc.lineno}, column {exc.colno}") from None
    if isinstance(obj, dict) and "scenarios" in obj:
        items = obj["scenarios"]
        if not isinstance(items, list) or not items:
            raise ConfigError("config.scenarios: expected a non-empty list")
        cfgs = [parse_scenario(s, f"config.scenarios[{i}]", seed_override, tol_scale) for i, s in enumerate(items)]
        names = [c.name for c in cfgs]
        if len(set(names)) != len(names):
            raise ConfigError("config.scenarios: scenario names must be unique")
        return cfgs
    return [parse_scenario(obj, "config", seed_override, tol_scale)]


def build_hamiltonian(cfg, path):
    spec = cfg.hamiltonian
    p = f"{path}.hamiltonian"
    kind = spec.get("type")
    d = cfg.dim
    if kind == "explicit":
        M = parse_matrix(spec.get("matrix"), f"{p}.matrix", d)
    elif kind == "diag":
        ev = _num_list(spec, "eigenvalues", p)
        if len(ev) != d:
            raise ConfigError(f"{p}.eigenvalues: expected {d} values, got {len(ev)}")
        M = np.diag(ev).astype(complex)
    elif kind == "random-nondegenerate":
        hseed = _num(spec, "seed", p, integer=True, minimum=0)
        spread = _num(spec, "spread", p, default=2.0, positive=True)
        rng = np.random.default_rng(hseed)
        for _ in range(100):
            X = random_matrix(d, rng, hermitian=True)
            ev = np.linalg.eigvalsh(X)
            if np.min(np.diff(ev)) > 1e-3 * (ev[-1] - ev[0]):
                break
        M = X * (spread / (ev[-1] - ev[0]))
    else:
        raise ConfigError(f"{p}.type: expected 'explicit', 'diag' or 'random-nondegenerate', got {kind!r}")
    try:
        return HermitianOperator.from_matrix(M, "hamiltonian")
    except LabError as exc:
        raise ConfigError(f"{p}: {exc}") from None


def build_model(cfg, path="config"):
    """Gibbs state and generators described by a scenario."""
    H = build_hamiltonian(cfg, path)
    try:
        g = make_gibbs(H, cfg.tau)
    except LabError as exc:
        raise ConfigError(f"{path}.tau: {exc}") from None
    spec = cfg.jumps
    p = f"{path}.jumps"
    kind = spec.get("type")
    d = cfg.dim
    extra = {}
    if kind == "explicit":
        ops = spec.get("operators", [])
        if not isinstance(ops, list):
            raise ConfigError(f"{p}.operators: expected a list of matrices")
        jumps = [parse_matrix(W, f"{p}.operators[{i}]", d) for i, W in enumerate(ops)]
    elif kind == "thermal-qubit":
        if d != 2:
            raise ConfigError(f"{p}.type: 'thermal-qubit' needs dim 2, got {d}")
        gd = _num(spec, "gamma_down", p, default=1.0, minimum=0.0)
        U = H.eigenvectors
        omega = float(H.eigenvalues[1] - H.eigenvalues[0])
        gu = gd * np.exp(-omega / cfg.tau)
        lower = U @ fixtures.SIGMA_MINUS @ U.conj().T
        jumps = [np.sqrt(gd) * lower, np.sqrt(gu) * lower.conj().T]
        extra = {"gamma_down": gd, "gamma_up": gu}
    elif kind == "dephasing":
        gamma = _num(spec, "gamma", p, default=1.0, minimum=0.0)
        U = H.eigenvectors
        jumps = [np.sqrt(gamma) * (U * np.arange(d)) @ U.conj().T]
    elif kind == "qdb-synthesized":
        upper = spec.get("upper")
        n_up = d * (d + 1) // 2
        if not isinstance(upper, list):
            raise ConfigError(f"{p}.upper: expected a list of {n_up} nonnegative rates (row-major upper triangle)")
        upper = _num_list(spec, "upper", p)
        if len(upper) != n_up or min(upper) < 0:
            raise ConfigError(f"{p}.upper: expected {n_up} nonnegative rates, got {upper}")
        m = spec.get("m")
        if m is not None:
            m = _num(spec, "m", p, integer=True, minimum=1)
        sspec = SpectrumSpec(np.asarray(g.spectrum) / np.sum(g.spectrum))
        ok, viol = check_condition_A(sspec)
        if not ok:
            raise ConfigError(f"{p}: Gibbs eigenvalue ratios collide (first colliding pairs {viol[:3]})")
        try:
            fam = synthesize(sspec, upper, m=m, basis=g.basis)
        except LabError as exc:
            raise ConfigError(f"{p}: {exc}") from None
        jumps = list(fam.jumps)
        extra = {"K": fam.K.tolist(), "m": len(jumps)}
    else:
        raise ConfigError(
            f"{p}.type: expected 'explicit', 'qdb-synthesized', 'thermal-qubit' or 'dephasing', got {kind!r}")
    try:
        gens = build_generators(H, jumps)
    except LabError as exc:
        raise ConfigError(f"{p}: {exc}") from None
    return g, gens, extra


def _initial_state(cfg, g, rng, key="initial_state"):
    spec = cfg.get(key, "ground")
    d = cfg.dim
    if isinstance(spec, str):
        U = g.basis
        if spec == "ground":
            v = U[:, 0]
        elif spec == "excited":
            v = U[:, -1]
        elif spec == "maximally-mixed":
            return np.eye(d, dtype=complex) / d
        elif spec == "random":
            X = random_matrix(d, rng)
            rho = X @ X.conj().T
            return rho / np.trace(rho).real
        else:
            raise ConfigError(f"config.{key}: expected 'ground', 'excited', 'maximally-mixed', 'random' or a matrix")
        return np.outer(v, v.conj())
    rho = parse_matrix(spec, f"config.{key}", d)
    return rho


def _observable(cfg, key="observable"):
    spec = cfg.get(key)
    d = cfg.dim
    if spec is None:
        Z = np.diag([1.0 if k == 0 else -1.0 for k in range(d)]).astype(complex)
        return Z
    return parse_matrix(spec, f"config.{key}", d)


class Checks:
    """Collects named PASS/FAIL/SKIP outcomes."""

    def __init__(self):
        self.items = []

    def add(self, name, value, tol, kind="max", note=None):
        if kind == "max":
            ok = value <= tol
        elif kind == "min":
            ok = value > tol
        else:
            raise ValueError(kind)
        entry = {"name": name, "status": "PASS" if ok else "FAIL", "value": float(value),
                 "tolerance": float(tol), "comparison": "<=" if kind == "max" else ">"}
        if note:
            entry["note"] = note
        self.items.append(entry)
        return ok

    def flag(self, name, ok, note=None):
        entry = {"name": name, "status": "PASS" if ok else "FAIL"}
        if note:
            entry["note"] = note
        self.items.append(entry)

    def skip(self, name, note):
        self.items.append({"name": name, "status": "SKIP", "note": note})

    @property
    def failed(self):
        return any(c["status"] == "FAIL" for c in self.items)


def _verify_block(cfg, g, gens, checks, results):
    tol = cfg.tolerances
    rep = verify_qdb(g, gens)
    results["qdb"] = {"residual": rep.residual, "symmetry_residual": rep.symmetry_residual, "scale": rep.scale}
    qdb_ok = checks.add("qdb", rep.residual, tol["qdb"] * rep.scale)
    tables = coefficient_tables(gens, g)
    results["coefficient_balance_residual"] = tables.balance_residual
    results["stationarity"] = float(np.linalg.norm(gens.L.apply(g.rho)))
    checks.add("stationarity", results["stationarity"], tol["stationarity"] * max(1.0, rep.scale))
    st = structure_check(gens, g)
    results["structure"] = st.residuals
    for k, v in st.residuals.items():
        checks.add(f"structure-{k}", v, tol["structure"])
    splits = {str(t): split_discrepancy(gens, t) for t in (0.3, 1.0, 3.0)}
    results["split_discrepancy"] = splits
    checks.add("split", max(splits.values()), tol["split"])
    return qdb_ok


def _series_rows_to_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def run_scenario(cfg, out_dir, series_name="series.csv"):
    """Run one scenario; returns ``(report_dict, failed)``.  Writes the series file if any."""
    g, gens, extra = build_model(cfg)
    rng = np.random.default_rng(cfg.seed)
    tol = cfg.tolerances
    checks = Checks()
    results = {"gibbs": {"Z": g.Z, "spectrum": [float(x) for x in g.spectrum]}}
    results.update(extra)
    artifacts = []
    series = None
    kind = cfg.kind

    if kind == "synthesize":
        if cfg.jumps.get("type") != "qdb-synthesized":
            raise ConfigError("config.jumps.type: a synthesize scenario needs 'qdb-synthesized' jumps")
        results["jumps"] = [matrix_to_json(W) for W in gens.jumps]
        rep = verify_qdb(g, gens)
        results["qdb"] = {"residual": rep.residual, "symmetry_residual": rep.symmetry_residual, "scale": rep.scale}
        checks.add("qdb", rep.residual, tol["qdb"] * rep.scale)
        stat = float(np.linalg.norm(gens.L.apply(g.rho)))
        results["stationarity"] = stat
        checks.add("stationarity", stat, tol["stationarity"] * max(1.0, rep.scale))

    elif kind == "verify":
        _verify_block(cfg, g, gens, checks, results)

    elif kind == "evolve":
        times = _num_list(cfg.raw, "times", "config", default=list(np.linspace(0.0, 5.0, 11)))
        if any(t < 0 for t in times):
            raise ConfigError("config.times: times must be nonnegative")
        rho0 = _initial_state(cfg, g, rng)
        A = _observable(cfg)
        method = cfg.get("method", "exact")
        n_steps = None
        if method == "trotter":
            n_steps = _num(cfg.raw, "trotter_steps", "config", default=64, integer=True, minimum=1)
        elif method != "exact":
            raise ConfigError(f"config.method: expected 'exact' or 'trotter', got {method!r}")
        st = state_metric(g)
        rows = []
        for t in times:
            if method == "exact":
                rho = evolve_exact(gens, rho0, t)
            else:
                rho = evolve_trotter(gens.H, gens.jumps, rho0, t, n_steps)
            herm = 0.5 * (rho + rho.conj().T)
            rows.append([t, np.trace(rho).real, np.trace(A @ rho).real, np.linalg.eigvalsh(herm)[0],
                         st.norm(rho - np.trace(rho) * g.rho)])
        arr = np.array(rows)
        series = (["t", "trace", "observable", "min_eigenvalue", "dist_gibbs_st"], rows)
        results["final_trace"] = float(arr[-1, 1])
        checks.add("trace", float(np.max(np.abs(arr[:, 1] - np.trace(rho0).real))), tol["trace"])
        checks.add("positivity", float(max(0.0, -arr[:, 3].min())), tol["positivity"])
        results["method"] = method if n_steps is None else f"trotter({n_steps})"

    elif kind == "ergodic":
        Ts = _num_list(cfg.raw, "T_list", "config", default=[10.0, 20.0, 40.0, 80.0], positive=True)
        rho0 = _initial_state(cfg, g, rng)
        A = _observable(cfg)
        tables = {}
        rows_by_T = {T: [T] for T in Ts}
        header = ["T"]
        for space, x0 in (("state", rho0), ("tau1", A), ("tau", A)):
            tab = ergodic_limit_check(gens, g, x0, Ts, space)
            tables[space] = [{"T": r.T, "err": r.err, "bound": r.bound} for r in tab.rows]
            header += [f"err_{space}", f"bound_{space}"]
            for r in tab.rows:
                rows_by_T[r.T] += [r.err, r.bound]
                checks.flag(f"ergodic-{space}-T{r.T:g}", r.within_bound)
            if len(Ts) > 1:
                checks.flag(f"ergodic-{space}-ratio", tab.ratio_ok)
        results["ergodic"] = tables
        series = (header, [rows_by_T[T] for T in Ts])

    elif kind == "decay":
        rep = spectral_report(gens, g)
        theta = rep.gap_theta
        results["gap_theta"] = theta if np.isfinite(theta) else None
        rho0 = _initial_state(cfg, g, rng, "initial_state")
        if not np.isfinite(theta) or theta <= 0:
            checks.skip("decay", "hypothesis-not-met: dissipator has no nonzero spectrum")
        else:
            times = _num_list(cfg.raw, "times", "config",
                              default=[s / theta for s in (0.0, 0.5, 1.0, 2.0, 4.0)])
            dec = gap_decay_check(gens, g, [t for t in times if t > 0], initial_states=[rho0],
                                  slack=tol["decay"])
            results["decay_status"] = dec.status
            results["fitted_prefactor_observable"] = dec.fitted_prefactor
            if dec.status != "ok":
                checks.skip("decay", f"hypothesis-not-met: {dec.note}")
            else:
                for r in dec.rows:
                    if not r.ok:
                        checks.flag(f"decay-{r.norm}-t{r.t:.6g}", False)
                checks.flag("decay-bounds", dec.passed)
            st = state_metric(g)
            n0 = st.norm(rho0)
            rows = []
            for t in times:
                rho = evolve_exact(gens, rho0, t)
                rows.append([t, st.norm(rho - np.trace(rho0) * g.rho), np.exp(-theta * t) * n0])
            series = (["t", "dist_gibbs_st", "bound"], rows)
            col = [r[1] for r in rows]
            results["dist_gibbs_st"] = col
            mono = all(b <= a * (1 + 1e-9) + 1e-15 for a, b in zip(col, col[1:]))
            if dec.status == "ok":
                checks.flag("monotone", mono)

    elif kind == "unravel":
        t = _num(cfg.raw, "t", "config", default=1.0, positive=True)
        dt = _num(cfg.raw, "dt", "config", default=1e-3, positive=True)
        N = _num(cfg.raw, "paths", "config", default=2000, integer=True, minimum=1)
        if dt > t:
            raise ConfigError("config.dt: must not exceed config.t")
        psi0 = cfg.get("psi0")
        if psi0 is None:
            psi0 = g.basis[:, 0]
        else:
            psi0 = parse_vector(psi0, "config.psi0", cfg.dim)
            nrm = np.linalg.norm(psi0)
            if abs(nrm - 1.0) > 1e-12:
                raise ConfigError(f"config.psi0: must be a unit vector (norm {nrm:.15g})")
        A = _observable(cfg)
        ens = unravel(gens.H, gens.jumps, psi0, t, dt, N, cfg.seed, A)
        exact = complex(np.trace(A @ evolve_exact(gens, np.outer(psi0, psi0.conj()), t)))
        mean = complex(ens.mean)
        results["unravel"] = {"mean": [mean.real, mean.imag], "stderr": ens.stderr, "exact": [exact.real, exact.imag],
                              "paths": N, "dt": dt, "t": t, "seed": cfg.seed}
        bound = tol["mc_sigmas"] * ens.stderr + tol["mc_dt_factor"] * dt
        checks.add("duality", abs(mean - exact), bound)

    elif kind == "modular":
        mod = build_modular(g)
        results["modular"] = dict(mod.residuals)
        s_res = max(check_S_operator(mod, random_matrix(cfg.dim, rng)) for _ in range(20))
        results["s_operator"] = s_res
        checks.add("s-operator", s_res, tol["modular"])
        for k, v in mod.residuals.items():
            checks.add(f"modular-{k}", v, tol["modular"])
        mc = check_modular_commutation(mod, gens, g)
        results["commutation"] = {"modular_group": mc.modular_group, "self_adjoint": mc.self_adjoint,
                                  "s_operator": mc.s_operator}
        checks.add("commutation-modular-group", mc.modular_group, tol["modular"])
        checks.add("commutation-self-adjoint", mc.self_adjoint, tol["modular"])
        checks.add("commutation-s-operator", mc.s_operator, tol["modular"])

    elif kind == "full-report":
        qdb_ok = _verify_block(cfg, g, gens, checks, results)
        ns = null_spaces(gens, g)
        results["null_dims"] = {"L": ns.L.shape[1], "G": ns.G.shape[1], "L0": ns.L0.shape[1]}
        checks.add("kernel-intersection", ns.intersection_residual, tol["null_space"])
        cm = commutant(gens.jumps)
        results["commutant_dim"] = cm.commutant_dim
        rep = spectral_report(gens, g)
        results["gap_theta"] = rep.gap_theta if np.isfinite(rep.gap_theta) else None
        results["spectrum_Gp"] = [float(x) for x in rep.eigenvalues]
        if qdb_ok:
            checks.flag("uniqueness-equivalence", (cm.commutant_dim == 1) == (rep.null_dim == 1))
        for t in (0.1, 1.0, 10.0):
            ch = choi_matrix(gens.L.expm(t), tol["cp"])
            checks.flag(f"cp-t{t:g}", ch.is_cp, f"min Choi eigenvalue {ch.min_eigenvalue:.3e}")
        if not qdb_ok:
            checks.skip("decay", "detailed balance does not hold")
        elif np.isfinite(rep.gap_theta) and rep.gap_theta > 0:
            dec = gap_decay_check(gens, g, [s / rep.gap_theta for s in (0.5, 1.0, 2.0, 4.0)], rng=rng,
                                  slack=tol["decay"])
            if dec.status == "ok":
                checks.flag("decay-bounds", dec.passed)
            else:
                checks.skip("decay", f"hypothesis-not-met: {dec.note}")
        else:
            checks.skip("decay", "hypothesis-not-met: dissipator has no nonzero spectrum")
        mod = build_modular(g)
        mc = check_modular_commutation(mod, gens, g)
        results["commutation"] = {"modular_group": mc.modular_group, "self_adjoint": mc.self_adjoint,
                                  "s_operator": mc.s_operator}
        checks.add("commutation-s-operator", mc.s_operator, tol["modular"])
        if qdb_ok:
            checks.add("commutation-modular-group", mc.modular_group, tol["modular"])

    if series is not None:
        header, rows = series
        _series_rows_to_csv(os.path.join(out_dir, series_name), header, rows)
        artifacts.append(series_name)

    report = {
        "scenario": cfg.raw,
        "name": cfg.name,
        "kind": kind,
        "seed": cfg.seed,
        "tolerances": cfg.tolerances,
        "checks": checks.items,
        "results": results,
        "artifacts": artifacts,
        "status": "FAIL" if checks.failed else "PASS",
    }
    return _jsonable(report), checks.failed


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj
