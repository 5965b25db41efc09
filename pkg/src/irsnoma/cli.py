"""Command-line front end: ``irsnoma sweep|validate|table CONFIG``.

Configuration is an INI file with optional sections [params], [sweep], [mc],
[fdr] and [output]; anything omitted falls back to the reference setup.
SNRs are given in dB here and converted to linear once, at this boundary.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import io
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import acceptance
from . import downlink as dl
from . import uplink as ul
from .mcsim import FdrParams, McConfig, simulate_dl, simulate_fdr, simulate_ul
from .model import Direction, Scheme, SnrAxis, SystemParams, derive, with_xi

COLUMNS = ("snr_db", "scheme", "direction", "user", "metric",
           "analytic", "asymptotic", "mc_mean", "mc_stderr", "feasible")
METRICS = ("OP", "ER", "asymptote", "floor", "ceiling")
ENV_WORKERS = "IRSNOMA_WORKERS"


class ConfigError(ValueError):
    def __init__(self, msg, path=None, line=None, field=None):
        self.path, self.line, self.field = path, line, field
        where = ":".join(str(x) for x in (path, line) if x is not None)
        prefix = f"{where}: " if where else ""
        if field:
            prefix += f"[{field}] "
        super().__init__(prefix + msg)


@dataclass(frozen=True)
class SweepSpec:
    direction: Direction
    schemes: tuple[Scheme, ...]
    snr: SnrAxis
    metrics: tuple[str, ...]
    mc: McConfig | None = None
    fdr: FdrParams = FdrParams()
    output: str | None = None
    fmt: str = "csv"

    def __post_init__(self):
        if not self.schemes:
            raise ValueError("sweep needs at least one scheme")
        if not self.metrics:
            raise ValueError("sweep needs at least one metric")
        bad = [m for m in self.metrics if m not in METRICS]
        if bad:
            raise ValueError(f"unknown metrics {bad}; choose from {list(METRICS)}")
        if Scheme.FDR in self.schemes and self.mc is None:
            raise ValueError("FDR has no closed form; add an [mc] section")
        if self.fmt not in ("csv", "json", "both"):
            raise ValueError("format must be csv, json or both")


# -- config parsing ----------------------------------------------------------------

def _locate(text: str, section: str, key: str | None):
    current = None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        m = re.match(r"\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return n
            continue
        if current == section and key is not None:
            k = re.split(r"[=:]", line, maxsplit=1)[0].strip()
            if k == key:
                return n
    return None


def _parse_grid(value: str):
    value = value.strip()
    if ":" in value:
        lo, hi, step = (float(v) for v in value.split(":"))
        if step <= 0:
            raise ValueError("grid step must be positive")
        n = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return tuple(round(lo + i * step, 12) for i in range(n))
    return tuple(float(v) for v in value.split(",") if v.strip())


def _split(value: str):
    return tuple(v.strip() for v in value.split(",") if v.strip())


def _bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


_PARAM_TYPES = {f.name: f.type for f in dataclasses.fields(SystemParams)}
_SECTIONS = ("params", "sweep", "mc", "fdr", "output")


@dataclass(frozen=True)
class LoadedConfig:
    params: SystemParams
    sweep: SweepSpec
    path: str | None = None


def load_config(path: str | os.PathLike | None = None, text: str | None = None) -> LoadedConfig:
    if text is None:
        if path is None:
            text = ""
        else:
            try:
                text = Path(path).read_text(encoding="utf-8")
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc.strerror}", path) from None
    src = str(path) if path is not None else "<config>"
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # m_G and m_g are distinct keys
    try:
        cp.read_string(text, source=src)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r}", src, exc.lineno, f"{exc.section}.{exc.option}") from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section {exc.section!r}", src, exc.lineno, exc.section) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside any section", src, exc.lineno) from None
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line", src, line) from None

    for sec in cp.sections():
        if sec not in _SECTIONS:
            raise ConfigError(f"unknown section; expected one of {list(_SECTIONS)}", src, _locate(text, sec, None), sec)

    def fail(sec, key, msg):
        raise ConfigError(msg, src, _locate(text, sec, key), f"{sec}.{key}")

    def get(sec, key, conv, default):
        if not cp.has_option(sec, key):
            return default
        try:
            return conv(cp.get(sec, key))
        except (ValueError, TypeError) as exc:
            fail(sec, key, str(exc))

    def check_keys(sec, allowed):
        if cp.has_section(sec):
            for key in cp.options(sec):
                if key not in allowed:
                    fail(sec, key, f"unknown key; expected one of {sorted(allowed)}")

    check_keys("params", set(_PARAM_TYPES))
    kw = {}
    if cp.has_section("params"):
        for key in cp.options("params"):
            kw[key] = get("params", key, int if key == "K" else float, None)
    try:
        params = SystemParams(**kw)
    except ValueError as exc:
        key = next((k for k in kw if re.search(rf"\b{k}\b", str(exc))), None)
        raise ConfigError(str(exc), src, _locate(text, "params", key) if key else _locate(text, "params", None),
                          f"params.{key}" if key else "params") from None

    check_keys("sweep", {"direction", "schemes", "snr_db", "metrics"})
    direction = get("sweep", "direction", Direction, Direction.DOWNLINK)
    schemes = get("sweep", "schemes", lambda v: tuple(Scheme(s.upper()) for s in _split(v)), (Scheme.NOMA, Scheme.OMA))
    grid = get("sweep", "snr_db", _parse_grid, tuple(float(x) for x in range(0, 41, 2)))
    metrics = get("sweep", "metrics", _split, ("OP",))
    try:
        snr = SnrAxis.for_direction(direction, grid)
    except ValueError as exc:
        fail("sweep", "snr_db", str(exc))

    mc = None
    check_keys("mc", {"trials", "seed", "workers", "antithetic", "enabled"})
    if cp.has_section("mc") and get("mc", "enabled", _bool, True):
        try:
            mc = McConfig(
                trials=get("mc", "trials", int, 10**5),
                seed=get("mc", "seed", int, 2021),
                workers=get("mc", "workers", int, 1),
                antithetic=get("mc", "antithetic", _bool, False),
            )
        except ValueError as exc:
            raise ConfigError(str(exc), src, _locate(text, "mc", None), "mc") from None

    check_keys("fdr", {"power_split", "si_m", "si_residual_gain"})
    try:
        fdr = FdrParams(
            power_split=get("fdr", "power_split", float, 0.5),
            si_m=get("fdr", "si_m", float, 1.0),
            si_residual_gain=get("fdr", "si_residual_gain", float, 1e-3),
        )
    except ValueError as exc:
        raise ConfigError(str(exc), src, _locate(text, "fdr", None), "fdr") from None

    check_keys("output", {"path", "format"})
    out_path = get("output", "path", str, None)
    fmt = get("output", "format", lambda v: v.strip().lower(), "csv")
    try:
        spec = SweepSpec(direction, schemes, snr, metrics, mc, fdr, out_path, fmt)
    except ValueError as exc:
        sec, key = ("mc", None) if "FDR" in str(exc) else ("sweep", "metrics" if "metric" in str(exc) else "schemes")
        if "format" in str(exc):
            sec, key = "output", "format"
        line = _locate(text, sec, key) if key else _locate(text, "sweep", "schemes")
        raise ConfigError(str(exc), src, line, f"{sec}.{key}" if key else sec) from None
    return LoadedConfig(params, spec, src)


# -- sweep -------------------------------------------------------------------------

def _row(snr_db, scheme, direction, user, metric, analytic=None, asymptotic=None,
         mc=None, feasible=True):
    return {
        "snr_db": snr_db, "scheme": scheme.value, "direction": direction.value, "user": user,
        "metric": metric, "analytic": analytic, "asymptotic": asymptotic,
        "mc_mean": None if mc is None else mc.mean, "mc_stderr": None if mc is None else mc.std_error,
        "feasible": feasible,
    }


def _clean(v):
    if v is None:
        return None
    v = float(v)
    return None if math.isnan(v) else v


def _analytic(direction, scheme, rho, consts):
    """{(metric, user): (value, asymptote)} and feasibility for one SNR point."""
    out = {}
    feasible = True
    near_zero = consts.has_nearzero_law
    if direction is Direction.DOWNLINK and scheme is Scheme.NOMA:
        feasible = dl.dl_noma_feasible(consts)
        asym = dl.op_dl_noma_asymptotic(rho, consts) if near_zero else (dl.dl_noma_thresholds(rho, consts).rho_tilde_m, None)
        out[("OP", "near")] = (dl.op_dl_noma_near(rho, consts), asym[0])
        out[("OP", "far")] = (dl.op_dl_noma_far(rho, consts), asym[1])
        er_asym = dl.er_dl_noma_asymptotic(rho, consts)
        far = dl.er_dl_noma_far(rho, consts) if feasible else None
        out[("ER", "near")] = (dl.er_dl_noma_near(rho, consts), er_asym[0])
        out[("ER", "far")] = (far, er_asym[1])
        out[("ceiling", "far")] = (er_asym[1], None)
    elif scheme is Scheme.OMA:
        op = dl.op_dl_oma(rho, consts)
        asym = dl.op_dl_oma_asymptotic(rho, consts) if near_zero else (consts.gamma_N_o / (consts.a * rho), None)
        er = dl.er_dl_oma(rho, consts)
        er_asym = dl.er_dl_oma_asymptotic(rho, consts)
        for k, user in enumerate(("near", "far")):
            out[("OP", user)] = (op[k], asym[k])
            out[("ER", user)] = (er[k], er_asym[k])
    elif scheme is Scheme.NOMA:
        near, far = ul.op_ul_noma(rho, consts)
        floor = ul.op_ul_floor(consts)
        ceiling = ul.er_ul_noma_near_ceiling(consts)
        out[("OP", "near")] = (near, floor)
        out[("OP", "far")] = (far, floor)
        out[("ER", "near")] = (ul.er_ul_noma_near(rho, consts), ceiling)
        out[("ER", "far")] = (ul.er_ul_noma_far(rho, consts), ul.er_ul_noma_far_asymptotic(rho, consts))
        out[("floor", "near")] = out[("floor", "far")] = (floor, None)
        out[("ceiling", "near")] = (ceiling, None)
    return out, feasible


def _point(spec: SweepSpec, params: SystemParams, consts, snr_db: float, rho: float):
    rows = []
    for scheme in spec.schemes:
        mc = None
        if spec.mc is not None:
            if scheme is Scheme.FDR:
                mc = simulate_fdr(params, spec.fdr, spec.direction, rho, spec.mc)
            elif spec.direction is Direction.DOWNLINK:
                mc = simulate_dl(params, scheme, rho, spec.mc)
            else:
                mc = simulate_ul(params, scheme, rho, spec.mc)
        vals, feasible = ({}, True) if scheme is Scheme.FDR else _analytic(spec.direction, scheme, rho, consts)
        for metric in ("OP", "ER"):
            if metric not in spec.metrics:
                continue
            for user in ("near", "far"):
                a, asym = vals.get((metric, user), (None, None))
                est = None if mc is None else mc[f"{metric.lower()}_{user}"]
                rows.append(_row(snr_db, scheme, spec.direction, user, metric, _clean(a),
                                 _clean(asym) if "asymptote" in spec.metrics else None, est, feasible))
        for metric, label in (("floor", "OP_floor"), ("ceiling", "ER_ceiling")):
            if metric not in spec.metrics:
                continue
            for user in ("near", "far"):
                if (metric, user) in vals:
                    rows.append(_row(snr_db, scheme, spec.direction, user, label,
                                     _clean(vals[(metric, user)][0]), feasible=feasible))
    return rows


def default_workers() -> int:
    env = os.environ.get(ENV_WORKERS)
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        raise ConfigError(f"{ENV_WORKERS} must be an integer, got {env!r}") from None


def run_sweep(spec: SweepSpec, params: SystemParams, workers: int | None = None) -> list[dict]:
    consts = derive(params)
    points = list(zip(spec.snr.points, spec.snr.linear))
    workers = default_workers() if workers is None else workers
    if workers > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda p: _point(spec, params, consts, *p), points))
    else:
        chunks = [_point(spec, params, consts, *p) for p in points]
    return [row for chunk in chunks for row in chunk]


def _cell(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_cell(r[c]) for c in COLUMNS])
    return buf.getvalue()


def rows_to_json(rows) -> str:
    body = ",\n  ".join(json.dumps([r[c] for c in COLUMNS]) for r in rows)
    return f'{{\n "columns": {json.dumps(list(COLUMNS))},\n "rows": [\n  {body}\n ]\n}}\n'



def csv_to_rows(text: str) -> list[dict]:
    """Inverse of :func:`rows_to_csv`."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    rows = []
    for rec in reader:
        r = {}
        for col, cell in zip(header, rec):
            if cell == "NA":
                r[col] = None
            elif col == "feasible":
                r[col] = cell == "true"
            elif col in ("scheme", "direction", "user", "metric"):
                r[col] = cell
            else:
                r[col] = float(cell)
        rows.append(r)
    return rows


def json_to_rows(text: str) -> list[dict]:
    doc = json.loads(text)
    return [dict(zip(doc["columns"], rec)) for rec in doc["rows"]]


# -- table -------------------------------------------------------------------------

def summary_table(params: SystemParams) -> list[dict]:
    c = derive(params)
    out = []
    for direction in Direction:
        for scheme in (Scheme.NOMA, Scheme.OMA):
            if direction is Direction.DOWNLINK:
                div = dl.diversity_dl(c, scheme)
                slopes = dl.slopes_dl(scheme)
            else:
                div = ul.diversity_ul(c, scheme)
                slopes = ul.slopes_ul(scheme)
            for k, user in enumerate(("near", "far")):
                out.append({"direction": direction.value, "scheme": scheme.value, "user": user,
                            "diversity": div[k], "slope": slopes[k]})
    return out


def _fmt_num(v):
    return f"{v:g}"


def format_table(rows) -> str:
    header = ("direction", "scheme", "user", "diversity", "slope")
    cells = [header] + [tuple(r[h] if isinstance(r[h], str) else _fmt_num(r[h]) for h in header) for r in rows]
    width = [max(len(row[i]) for row in cells) for i in range(len(header))]
    return "\n".join("  ".join(s.ljust(w) for s, w in zip(row, width)).rstrip() for row in cells) + "\n"


# -- entry point -----------------------------------------------------------------

def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8")


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    spec = cfg.sweep
    fmt = args.format or spec.fmt
    out = args.out if args.out is not None else spec.output
    rows = run_sweep(spec, cfg.params, args.workers)
    if fmt in ("csv", "both"):
        _write(out, rows_to_csv(rows))
    if fmt in ("json", "both"):
        jpath = None if out in (None, "-") else (str(Path(out).with_suffix(".json")) if fmt == "both" else out)
        _write(jpath, rows_to_json(rows))
    return 0


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    profile = acceptance.get_profile(args.profile, seed=args.seed, workers=args.workers)
    hook = None
    if args.corrupt_xi:
        delta = args.corrupt_xi
        hook = lambda c: with_xi(c, c.xi + delta)  # noqa: E731
    only = None
    if args.only:
        only = [int(x) for x in args.only.split(",")]

    def echo(res):
        print(res.line(), file=sys.stderr, flush=True)

    results = acceptance.run_all(profile, hook, only, cfg.params, on_result=echo)
    rep = acceptance.report(results, profile)
    rep["corrupt_xi"] = args.corrupt_xi
    _write(args.report, json.dumps(rep, indent=1, default=_json_default) + "\n")
    return 0 if rep["passed"] else 1


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def cmd_table(args) -> int:
    cfg = load_config(args.config)
    rows = summary_table(cfg.params)
    if args.csv:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        sys.stdout.write(buf.getvalue())
    else:
        sys.stdout.write(format_table(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="irsnoma", description="IRS-assisted NOMA closed forms and Monte Carlo sweeps.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sweep", help="evaluate metrics over an SNR grid")
    s.add_argument("config", nargs="?")
    s.add_argument("-o", "--out", help="output path ('-' for stdout)")
    s.add_argument("--format", choices=("csv", "json", "both"))
    s.add_argument("-j", "--workers", type=int, help=f"sweep-point workers (default ${ENV_WORKERS} or 1)")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("validate", help="run the acceptance checks and print a JSON report")
    v.add_argument("config", nargs="?")
    v.add_argument("--profile", default="default", choices=sorted(acceptance.PROFILES))
    v.add_argument("--seed", type=int)
    v.add_argument("-j", "--workers", type=int)
    v.add_argument("--only", help="comma-separated criterion numbers")
    v.add_argument("--corrupt-xi", type=float, default=0.0, metavar="DELTA",
                   help="negative control: shift xi by DELTA in the closed forms")
    v.add_argument("--report", help="write the JSON report here instead of stdout")
    v.set_defaults(func=cmd_validate)

    t = sub.add_parser("table", help="diversity orders and high-SNR slopes")
    t.add_argument("config", nargs="?")
    t.add_argument("--csv", action="store_true")
    t.set_defaults(func=cmd_table)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
