"""Command-line front end.

Every subcommand reads typed parameters from defaults, an optional key=value
config file and repeated ``-p key=value`` overrides (in that order), then
writes JSON and CSV artifacts into ``--out-dir``. Each artifact carries the full
run configuration and a SHA-256 content hash; nothing time-dependent is written,
so a rerun with the same configuration reproduces the files byte for byte.

Exit codes: 0 ok, 2 usage error, 3 numeric failure, 4 gate failure.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field

import click
import numpy as np

from .arithmetics import GOLDEN
from .errors import GateError, QpedlError

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_GATE = 0, 2, 3, 4

NAMED_FREQUENCIES = {
    "golden": GOLDEN,
    "sqrt5-2": math.sqrt(5) - 2,
    "sqrt2-1": math.sqrt(2) - 1,
    "sqrt3-1": math.sqrt(3) - 1,
}

_BASE = {"lam": 2.0, "alpha": "golden"}

DEFAULTS: dict[str, dict] = {
    "spectrum": {**_BASE, "family": "amo", "theta": 0.0, "N": 40, "V": "", "margin": 0},
    "lyapunov": {**_BASE, "lam": 3.0, "E": 0.0, "iterates": 100_000, "phases": 4},
    "rotation": {**_BASE, "E": 0.0, "iterates": 100_000},
    "acceleration": {**_BASE, "E": 0.0, "eps_max": 0.5, "eps_count": 6, "iterates": 20_000, "phases": 2},
    "edl": {**_BASE, "builder": "amo", "grid": 200, "N": 80, "window_lo": -1, "window_hi": -1,
            "bootstrap": 200},
    "localize": {**_BASE, "family": "amo", "theta": 0.0, "N": 40, "V": "", "index": -1, "gamma": 0.0,
                 "ell_search": 10},
    "kam": {"lam": math.exp(4), "alpha": "sqrt5-2", "E": "tune", "rho": GOLDEN / 2, "bracket_lo": -2.5,
            "bracket_hi": 2.5, "h": 0.1, "target_h": 0.05, "tol": 1e-24, "kappa": 0.05, "tau": 2.0,
            "force": False, "max_steps": 30, "synthetic": False, "xi": 0.2, "n": "1"},
    "criterion": {"mode": "sums", "p": "0", "q": "0", "ell": "0", "gamma": 1.0, "count": 200, "C4": 1.0,
                  "tau": 1.0, "eps": 0.1, "h1": 0.2},
}
DEFAULTS["duality"] = {**DEFAULTS["kam"], "gamma_frac": 0.85, "residual_tol": 1e-6, "ell_search": 10}


@dataclass
class RunConfig:
    subcommand: str
    params: dict
    seed: int = 0
    threads: int = 1
    out_dir: str = "."
    config_file: str | None = None
    overrides: list = field(default_factory=list)

    def to_json(self) -> dict:
        out = asdict(self)
        out["out_dir"] = os.path.normpath(self.out_dir)
        return out


# parsing

def _coerce(key: str, raw: str, default):
    try:
        if isinstance(default, bool):
            low = raw.strip().lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw.strip()
    except ValueError:
        raise click.UsageError(f"{key}={raw!r}: expected {type(default).__name__}") from None


def read_config_file(path: str) -> list[tuple[str, str]]:
    pairs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise click.UsageError(f"{path}:{lineno}: expected key=value")
            k, v = line.split("=", 1)
            pairs.append((k.strip(), v.strip()))
    return pairs


def resolve_params(sub: str, file_pairs, overrides) -> dict:
    params = dict(DEFAULTS[sub])
    for k, v in list(file_pairs) + list(overrides):
        if k not in params:
            raise click.UsageError(f"unknown parameter {k!r} for {sub}; known: {', '.join(sorted(params))}")
        params[k] = _coerce(k, v, DEFAULTS[sub][k])
    return params


def parse_alpha(text: str) -> tuple[float, ...]:
    vals = []
    for part in str(text).split(","):
        part = part.strip()
        if part in NAMED_FREQUENCIES:
            vals.append(NAMED_FREQUENCIES[part])
        else:
            try:
                vals.append(float(part))
            except ValueError:
                raise click.UsageError(f"alpha component {part!r} is neither a number nor one of "
                                       f"{', '.join(NAMED_FREQUENCIES)}") from None
    return tuple(vals)


def parse_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in str(text).split(","))
    except ValueError:
        raise click.UsageError(f"{text!r} is not a comma-separated integer list") from None


def parse_potential(text: str, d: int):
    """'' means 2 cos 2 pi x_1; otherwise 'k1 k2..:re[:im];...' mode list."""
    from .trigpoly import TrigPoly
    if not text:
        return TrigPoly.cosine(2.0, d)
    modes = {}
    try:
        for item in text.split(";"):
            parts = item.split(":")
            k = tuple(int(v) for v in parts[0].split())
            c = float(parts[1]) + (1j * float(parts[2]) if len(parts) > 2 else 0)
            modes[k if d > 1 else k[0]] = c
    except (ValueError, IndexError):
        raise click.UsageError(f"potential {text!r}: expected 'k:re[:im];...'") from None
    band = max(max(abs(x) for x in np.atleast_1d(k)) for k in modes)
    return TrigPoly.from_modes(modes, (2 * band + 2,) * d)


# output

def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [_plain(x.real), _plain(x.imag)]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def _hash(payload: str) -> str:
    return hashlib.sha256(payload.encode()).hexdigest()


class Writer:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.paths: list[str] = []
        os.makedirs(cfg.out_dir, exist_ok=True)

    def json(self, name: str, result) -> str:
        body = {"config": _plain(self.cfg.to_json()), "result": _plain(result)}
        text = json.dumps(body, sort_keys=True, separators=(",", ":"))
        body["content_hash"] = _hash(text)
        return self._write(name, json.dumps(body, sort_keys=True, indent=1) + "\n")

    def csv(self, name: str, header, rows) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
        data = buf.getvalue()
        conf = json.dumps(_plain(self.cfg.to_json()), sort_keys=True, separators=(",", ":"))
        head = f"# config: {conf}\r\n# content_hash: {_hash(conf + data)}\r\n"
        return self._write(name, head + data)

    def _write(self, name: str, text: str) -> str:
        path = os.path.join(self.cfg.out_dir, name)
        with open(path, "w", newline="") as fh:
            fh.write(text)
        self.paths.append(path)
        return path


# commands

def _operator(p: dict):
    from .operators import build_amo, build_longrange, build_md_longrange, build_md_schrodinger
    alpha = parse_alpha(p["alpha"])
    fam = p["family"]
    if fam == "amo":
        return build_amo(p["lam"], alpha[0], p["theta"], p["N"])
    if fam == "longrange":
        return build_longrange(parse_potential(p["V"], len(alpha)), p["lam"], alpha, p["theta"], p["N"])
    if fam == "md_longrange":
        return build_md_longrange(p["lam"], alpha, p["theta"], p["N"])
    if fam == "md_schrodinger":
        return build_md_schrodinger(1.0 / p["lam"], alpha, p["theta"], p["N"])
    raise click.UsageError(f"unknown family {fam!r}")


def cmd_spectrum(cfg: RunConfig, out: Writer) -> None:
    from .eigensolver import eigen_all
    from .localization import localization_report
    p = cfg.params
    op = _operator(p)
    dec = eigen_all(op)
    out.csv("spectrum_values.csv", ["index", "value"], enumerate(dec.values))
    rep = localization_report(dec, op.box, margin=p["margin"])
    res = {"size": op.size, "residual_bound": dec.residual_bound, "median_rate": rep.median_rate,
           "sule": rep.to_json()["sule"], "rates": rep.rates, "centers": rep.centers}
    out.json("spectrum_report.json", res)


def _schrodinger(p: dict):
    from .cocycle import Cocycle
    return Cocycle.amo(p["E"], p["lam"], parse_alpha(p["alpha"]))


def cmd_lyapunov(cfg: RunConfig, out: Writer) -> None:
    from .cocycle import lyapunov
    p = cfg.params
    est = lyapunov(_schrodinger(p), p["iterates"], p["phases"], cfg.seed)
    out.json("lyapunov.json", {"value": est.value, "stderr": est.stderr, "per_phase": est.per_phase})


def cmd_rotation(cfg: RunConfig, out: Writer) -> None:
    from .cocycle import rotation_number
    p = cfg.params
    out.json("rotation.json", {"rho": rotation_number(_schrodinger(p), p["iterates"])})


def cmd_acceleration(cfg: RunConfig, out: Writer) -> None:
    from .cocycle import acceleration_probe
    p = cfg.params
    eps = np.linspace(0.0, p["eps_max"], p["eps_count"])
    rows = acceleration_probe(_schrodinger(p), eps, p["iterates"], p["phases"], cfg.seed)
    out.csv("acceleration.csv", ["eps", "lyapunov"], rows)
    slopes = [(b[1] - a[1]) / (2 * math.pi * (b[0] - a[0])) for a, b in zip(rows, rows[1:])]
    out.json("acceleration.json", {"points": rows, "slopes": slopes})


def cmd_edl(cfg: RunConfig, out: Writer) -> None:
    from .edl import edl_profile
    p = cfg.params
    window = None if p["window_lo"] < 0 or p["window_hi"] < 0 else (p["window_lo"], p["window_hi"])
    prof = edl_profile(p["lam"], parse_alpha(p["alpha"]), p["builder"], p["grid"], p["N"], window,
                       cfg.seed, p["bootstrap"])
    d = prof.box.d
    rows = [(*site, int(dist), k, f) for (site, k, f), dist in zip(prof.rows(), prof.distance)]
    out.csv("edl_profile.csv", [f"n{i + 1}" for i in range(d)] + ["l1", "K", "fit"], rows)
    out.json("edl_fit.json", prof.to_json())


def cmd_localize(cfg: RunConfig, out: Writer) -> None:
    from .eigensolver import eigen_all
    from .localization import certify_good, decay_fit
    p = cfg.params
    op = _operator(p)
    dec = eigen_all(op)
    j = p["index"] if p["index"] >= 0 else dec.size // 2
    if j >= dec.size:
        raise click.UsageError(f"index {j} outside 0..{dec.size - 1}")
    u = dec.vectors[:, j]
    fit = decay_fit(u, box=op.box)
    gamma = p["gamma"] if p["gamma"] > 0 else 0.9 * max(fit.gamma, 1e-3)
    cert = certify_good(u, gamma, p["ell_search"], op.box)
    sites = op.box.sites()
    out.csv("eigenvector.csv", [f"n{i + 1}" for i in range(op.box.d)] + ["u"],
            [(*s, float(v)) for s, v in zip(sites.tolist(), np.real(u))])
    out.json("good_certificate.json", {"index": j, "energy": dec.values[j], "decay_fit": fit.gamma,
                                       "certificate": _cert_json(cert)})


def _cert_json(cert) -> dict:
    return {"gamma": cert.gamma, "ell": cert.ell, "C": cert.C, "C_ell": cert.C_ell, "center": cert.center,
            "shift": cert.shift, "fit_residual": cert.fit_residual, "budget": cert.budget}


def _reduce(cfg: RunConfig, out: Writer):
    from .cocycle import Cocycle
    from .kam import reduce_to_constant, rotation_tune, synthetic_reducible
    p = cfg.params
    alpha = parse_alpha(p["alpha"])
    if p["synthetic"]:
        c, _ = synthetic_reducible(alpha, p["xi"], parse_ints(p["n"]))
        E, rho, rot_dc = None, None, None
    else:
        lam = p["lam"]
        if p["E"] == "tune":
            E = rotation_tune(lambda e: Cocycle.amo(e, 1 / lam, alpha), p["rho"], (p["bracket_lo"], p["bracket_hi"]))
        else:
            E = _coerce("E", p["E"], 0.0)
        c = Cocycle.amo(E, 1 / lam, alpha)
        rho, rot_dc = p["rho"], (p["kappa"], p["tau"])
    red = reduce_to_constant(c, p["h"], p["target_h"], rot_dc, rho, p["tol"], p["max_steps"], force=p["force"])
    out.json("kam_trace.json", {"energy": E, **red.to_json()})
    return red, E, alpha


def cmd_kam(cfg: RunConfig, out: Writer) -> None:
    _reduce(cfg, out)


def cmd_duality(cfg: RunConfig, out: Writer) -> None:
    from .duality import build_dual_eigenfunction
    from .localization import certify_good
    from .trigpoly import TrigPoly
    p = cfg.params
    if p["synthetic"]:
        raise click.UsageError("duality needs a Schrodinger cocycle; set synthetic=false")
    red, E, alpha = _reduce(cfg, out)
    lam = p["lam"]
    de = build_dual_eigenfunction(red, TrigPoly.cosine(2.0, len(alpha)), lam, alpha, E, p["rho"],
                                  tol=p["residual_tol"])
    sites = de.box.sites().tolist()
    out.csv("dual_eigenfunction.csv", [f"n{i + 1}" for i in range(de.box.d)] + ["re", "im", "abs"],
            [(*s, float(z.real), float(z.imag), float(abs(z))) for s, z in zip(sites, de.coefficients)])
    cert = certify_good(de.coefficients, p["gamma_frac"] * math.log(lam), p["ell_search"], de.box)
    out.json("good_certificate.json", {"dual": de.to_json(), "certificate": _cert_json(cert)})


def cmd_criterion(cfg: RunConfig, out: Writer) -> None:
    from .edl import amo_schedule, criterion_budget, criterion_sums
    p = cfg.params
    if p["mode"] == "sums":
        r = criterion_sums(parse_ints(p["p"]), parse_ints(p["q"]), parse_ints(p["ell"]), p["gamma"])
        out.json("criterion.json", {"lhs": r.lhs, "rhs": r.rhs, "holds": r.holds, "radius": r.radius})
    elif p["mode"] == "budget":
        sched = amo_schedule(p["count"], p["C4"], p["tau"], p["eps"], p["h1"])
        v = criterion_budget(sched)
        out.csv("criterion_budget.csv", ["i", "C_i", "S_i", "mu_i", "partial"],
                [(i + 1, *t, s) for i, (t, s) in enumerate(zip(sched, v.partial_sums))])
        out.json("criterion.json", {"total": v.total, "convergent": v.convergent, "tail_ratio": v.tail_ratio})
    else:
        raise click.UsageError(f"mode must be sums or budget, not {p['mode']!r}")


COMMANDS = {
    "spectrum": cmd_spectrum, "lyapunov": cmd_lyapunov, "rotation": cmd_rotation,
    "acceleration": cmd_acceleration, "edl": cmd_edl, "localize": cmd_localize, "kam": cmd_kam,
    "duality": cmd_duality, "criterion": cmd_criterion,
}


def _set_threads(n: int) -> None:
    import warnings
    try:
        import numba
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # threading-layer probe noise
            numba.set_num_threads(max(1, min(n, numba.config.NUMBA_NUM_THREADS)))
    except (ImportError, ValueError):
        pass


def execute(cfg: RunConfig) -> list[str]:
    """Run one configured subcommand; returns the written paths."""
    _set_threads(cfg.threads)
    out = Writer(cfg)
    COMMANDS[cfg.subcommand](cfg, out)
    return out.paths


def _split_override(s: str) -> tuple[str, str]:
    if "=" not in s:
        raise click.UsageError(f"override {s!r}: expected key=value")
    k, v = s.split("=", 1)
    return k.strip(), v.strip()


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False), default=None,
              help="key=value parameter file")
@click.option("--out-dir", default=".", show_default=True, help="directory for output artifacts")
@click.option("--threads", default=1, show_default=True, type=click.IntRange(min=1))
@click.option("--seed", default=0, show_default=True, type=int, help="seed for every randomized step")
@click.pass_context
def main(ctx, config_file, out_dir, threads, seed):
    """Quasi-periodic operators: spectra, cocycles, KAM reduction, duality and EDL profiles."""
    ctx.obj = {"config_file": config_file, "out_dir": out_dir, "threads": threads, "seed": seed}


def _make(name: str):
    keys = ", ".join(f"{k}={v}" for k, v in DEFAULTS[name].items())

    @click.option("-p", "--param", "overrides", multiple=True, help="key=value override (repeatable)")
    @click.pass_context
    def run(ctx, overrides):
        o = ctx.obj
        pairs = read_config_file(o["config_file"]) if o["config_file"] else []
        ov = [_split_override(s) for s in overrides]
        params = resolve_params(name, pairs, ov)
        cfg = RunConfig(name, params, o["seed"], o["threads"], o["out_dir"], o["config_file"],
                        [f"{k}={v}" for k, v in ov])
        try:
            paths = execute(cfg)
        except click.UsageError:
            raise
        except QpedlError as exc:
            kind = "gate" if isinstance(exc, GateError) else "numeric"
            click.echo(f"{kind} failure: {type(exc).__name__}: {exc}", err=True)
            ctx.exit(exc.exit_code)
        except (ArithmeticError, np.linalg.LinAlgError) as exc:
            click.echo(f"numeric failure: {type(exc).__name__}: {exc}", err=True)
            ctx.exit(EXIT_NUMERIC)
        except ValueError as exc:
            raise click.UsageError(str(exc)) from None
        for path in paths:
            click.echo(path)

    run.__doc__ = f"Parameters (defaults): {keys}"
    return main.command(name)(run)


for _name in DEFAULTS:
    _make(_name)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
