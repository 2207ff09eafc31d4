"""Command-line experiments with CSV, JSON and SVG output.

Every subcommand takes the long-form flags ``--n``, ``--seed``, ``--out``,
``--format``, ``--threads`` and ``--config`` plus its own options. A config
file is a JSON object with the keys of :class:`ExperimentConfig`; explicit
flags override it.

Exit codes: 0 success, 2 configuration or usage error, 3 tolerance failure.
Output is assembled in memory and written in one step, so a failed run never
leaves a partial file. Floats are written with 12 significant digits and
wall-clock timings are only recorded on request, so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from quadfourier.arith import build_tables, fmt, lambda_q_table
from quadfourier.bohr import find_regular_radius
from quadfourier.decompose import reconstruction_defect, vaughan_decompose
from quadfourier.equidist import MultiPoly, multi_dichotomy_check, weyl_sum
from quadfourier.gowers import quadratic_witness_search, u_norm_interval
from quadfourier.lemmas import SUITES, run_suites
from quadfourier.linsys import LinearSystem, Polytope, four_ap_experiment, singular_series

log = logging.getLogger("quadfourier")

EXIT_OK, EXIT_CONFIG, EXIT_TOLERANCE = 0, 2, 3
FORMATS = ("csv", "json", "svg")
U3_CAP = 8192
CONFIG_KEYS = {"command", "n", "seeds", "out", "format", "threads", "options"}


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


@dataclass
class ExperimentConfig:
    """One experiment.

    Attributes:
        command: subcommand name.
        n: ascending positive sizes ``N``; empty means the command default.
        seeds: RNG seeds.
        out: output path, or None for stdout.
        format: ``csv``, ``json`` or ``svg``.
        threads: worker cap for FFT-heavy steps; never changes results.
        options: command-specific settings (unknown keys rejected).
    """

    command: str
    n: list = field(default_factory=list)
    seeds: list = field(default_factory=lambda: [0])
    out: str | None = None
    format: str | None = None
    threads: int = 1
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        spec = COMMANDS[self.command]
        try:
            self.n = [int(x) for x in self.n]
            self.seeds = [int(x) for x in self.seeds]
            self.threads = int(self.threads)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"non-integer value: {exc}") from None
        if any(x <= 0 for x in self.n):
            raise ConfigError("N values must be positive")
        if any(a >= b for a, b in zip(self.n, self.n[1:])):
            raise ConfigError("N values must be strictly ascending")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        self.format = self.format or spec.formats[0]
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if self.format not in spec.formats:
            raise ConfigError(f"{self.command} supports formats {spec.formats}")
        if not isinstance(self.options, dict):
            raise ConfigError("options must be an object")
        unknown = sorted(set(self.options) - set(spec.defaults))
        if unknown:
            raise ConfigError(f"unknown options for {self.command}: {unknown}")
        self.options = {**spec.defaults, **self.options}

    @classmethod
    def from_dict(cls, data: dict, command: str | None = None) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = sorted(set(data) - CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys {unknown}")
        data = dict(data)
        if command is not None:
            if data.setdefault("command", command) != command:
                raise ConfigError(f"config is for {data['command']!r}, not {command!r}")
        if "command" not in data:
            raise ConfigError("config has no command")
        return cls(**data)

    @classmethod
    def from_file(cls, path, command: str | None = None) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(data, command)


@dataclass
class Output:
    """What a command produced: a table, a JSON payload, or both."""

    ok: bool
    header: list | None = None
    rows: list | None = None
    payload: dict | None = None
    series: dict | None = None


# --- formatting -----------------------------------------------------------------------


def _clean(obj):
    """Round floats to 12 significant digits and convert numpy scalars."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return float(fmt(x)) if math.isfinite(x) else None
    return obj


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (float, np.floating)):
        return fmt(x)
    return str(x)


def render_csv(header, rows) -> str:
    lines = [",".join(header)] + [",".join(_cell(x) for x in row) for row in rows]
    return "\n".join(lines) + "\n"


def render_json(out: Output) -> str:
    payload = out.payload
    if payload is None:
        payload = {"rows": [dict(zip(out.header, row)) for row in out.rows]}
    return json.dumps(_clean(payload), indent=2, sort_keys=True) + "\n"


def render_svg(series: dict, title: str, width: int = 640, height: int = 400) -> str:
    """Minimal polyline chart: log2 N on the x axis, value on the y axis."""
    pts = [(math.log2(x), y) for line in series.values() for x, y in line if y is not None and math.isfinite(y)]
    if not pts:
        raise ConfigError("nothing to plot")
    x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
    y0, y1 = 0.0, max(p[1] for p in pts) * 1.05 or 1.0
    margin = 50
    sx = (width - 2 * margin) / ((x1 - x0) or 1.0)
    sy = (height - 2 * margin) / ((y1 - y0) or 1.0)
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<text x="{margin}" y="25" font-size="14">{title}</text>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
        f'<text x="{width // 2}" y="{height - 15}" font-size="12">log2 N</text>',
    ]
    for i, (label, line) in enumerate(series.items()):
        coords = " ".join(
            f"{margin + (math.log2(x) - x0) * sx:.2f},{height - margin - (y - y0) * sy:.2f}"
            for x, y in line
            if y is not None and math.isfinite(y)
        )
        color = colors[i % len(colors)]
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}"/>')
        parts.append(f'<text x="{width - margin - 120}" y="{margin + 15 * i}" font-size="12" fill="{color}">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def emit(config: ExperimentConfig, out: Output) -> None:
    """Render and write the output; with ``svg`` the CSV goes next to the plot."""
    files = {}
    if config.format == "json":
        main = render_json(out)
    elif config.format == "csv":
        main = render_csv(out.header, out.rows)
    else:
        main = render_svg(out.series, config.command)
        if config.out is not None:
            files[Path(config.out).with_suffix(".csv")] = render_csv(out.header, out.rows)
    if config.out is None:
        sys.stdout.write(main)
        return
    files[Path(config.out)] = main
    for path, text in files.items():
        _atomic_write(path, text)


# --- commands ----------------------------------------------------------------------------


def _lambda_q_cutoff(N: int) -> float:
    """``Q = exp(log(N)^(1/10))``, at least 2."""
    return max(2.0, math.exp(math.log(N) ** 0.1))


def _signal(name: str, tables, N: int) -> np.ndarray:
    if name == "constant":
        return np.ones(N)
    if name == "mobius":
        return tables.interval("mobius", N)
    if name == "lambda_minus_q":
        lam_q = lambda_q_table(tables, _lambda_q_cutoff(N))
        return tables.interval("von_mangoldt", N) - lam_q[1 : N + 1]
    raise ConfigError(f"unknown function {name!r}")


def _norm_rows(ladders: dict, functions, threads: int, timings: bool, cap: int):
    top = max((max(v) for v in ladders.values() if v), default=1)
    tables = build_tables(max(top, 2))
    rows = []
    for s, ladder in ladders.items():
        for name in functions:
            for N in ladder:
                if s == 3 and N > cap:
                    log.warning("U3 skipped for N=%d above cap %d", N, cap)
                    rows.append([N, s, name, float("nan"), None])
                    continue
                start = time.perf_counter()
                value = u_norm_interval(_signal(name, tables, N), s, workers=threads)
                elapsed = time.perf_counter() - start if timings else None
                rows.append([N, s, name, value, elapsed])
    return rows


def _series(rows) -> dict:
    series = {}
    for N, s, name, value, *_ in rows:
        series.setdefault(f"U{s} {name}", []).append((N, value))
    return series


def run_norm_scan(config: ExperimentConfig) -> Output:
    """Rows ``N,s,function,norm,seconds``; U3 entries above the cap are reported as nan."""
    opts = config.options
    ladder = config.n or [1024, 4096]
    ladders = {int(s): ladder for s in opts["s"]}
    if set(ladders) - {2, 3}:
        raise ConfigError("s must be 2 or 3")
    rows = _norm_rows(ladders, opts["functions"], config.threads, opts["timings"], int(opts["u3_cap"]))
    for label, line in _series(rows).items():
        ratios = [b / a for (_, a), (_, b) in zip(line, line[1:]) if a and math.isfinite(a) and math.isfinite(b)]
        log.info("%s consecutive ratios %s", label, [fmt(r) for r in ratios])
    return Output(True, ["N", "s", "function", "norm", "seconds"], rows, series=_series(rows))


def run_decay_scan(config: ExperimentConfig) -> Output:
    """Norm ladders with consecutive ratios; fails when a ladder has too many increases."""
    opts = config.options
    ladders = {2: config.n or opts["u2_ladder"], 3: config.n or opts["u3_ladder"]}
    for s, ladder in ladders.items():
        if any(a >= b for a, b in zip(ladder, ladder[1:])):
            raise ConfigError(f"U{s} ladder must be ascending")
    rows = _norm_rows(ladders, [opts["function"]], config.threads, False, int(opts["u3_cap"]))
    table, summary, ok = [], {}, True
    for label, line in _series(rows).items():
        values = [(N, v) for N, v in line if math.isfinite(v)]
        exceptions = sum(1 for (_, a), (_, b) in zip(values, values[1:]) if b >= a)
        summary[label] = {"exceptions": exceptions, "strict": exceptions == 0}
        ok = ok and exceptions <= int(opts["max_exceptions"])
        prev = None
        for N, v in line:
            s = int(label[1])
            table.append([N, s, opts["function"], v, v / prev if prev and math.isfinite(v) else None])
            prev = v if math.isfinite(v) else prev
    payload = {"rows": [dict(zip(["N", "s", "function", "norm", "ratio"], r)) for r in table], "summary": summary, "ok": ok}
    return Output(ok, ["N", "s", "function", "norm", "ratio"], table, payload, _series(rows))


def run_bohr(config: ExperimentConfig) -> Output:
    opts = config.options
    S = [int(x) for x in opts["frequencies"]]
    rows, records = [], []
    for N in config.n or [10_000]:
        B = find_regular_radius(N, S, float(opts["rho"]), grid=int(opts["grid"]))
        rows.append([N, B.rank, float(opts["rho"]), B.radius, B.size, B.regular])
        records.append({"N": N, "frequencies": list(B.frequencies), "requested_rho": float(opts["rho"]),
                        "radius": B.radius, "size": B.size, "regular": B.regular, "members_hex": B.to_hex()})
    ok = all(r[-1] for r in rows)
    return Output(ok, ["N", "rank", "requested_rho", "radius", "size", "regular"], rows, {"bohr_sets": records, "ok": ok})


def run_vaughan_check(config: ExperimentConfig) -> Output:
    opts = config.options
    ladder = config.n or [100_000]
    tables = build_tables(max(ladder))
    rows = []
    for N in ladder:
        U = int(opts["U"]) if opts["U"] is not None else round(N ** (1 / 3))
        V = int(opts["V"]) if opts["V"] is not None else U
        for function in opts["functions"]:
            d = vaughan_decompose(tables, N, U, V, function)
            rows.append([N, function, U, V, reconstruction_defect(tables, d)])
    ok = all(r[-1] <= float(opts["tolerance"]) for r in rows)
    return Output(ok, ["N", "function", "U", "V", "max_defect"], rows)


def run_weyl(config: ExperimentConfig) -> Output:
    opts = config.options
    if opts["poly"] is not None:
        P = MultiPoly.from_json(json.dumps(opts["poly"]))
    else:
        P = MultiPoly(1, (2,), {(2,): (math.sqrt(5) - 1) / 2})
    box = [tuple(b) for b in opts["box"]] if opts["box"] is not None else [(1, N) for N in (config.n or [10_000])[:1]] * P.dimension
    value = weyl_sum(P, box)
    check = multi_dichotomy_check(P, box, float(opts["threshold"]), int(opts["q_max"]), float(opts["tol"]))
    payload = {
        "re": value.real, "im": value.imag, "abs": abs(value), "normalized": check.normalized,
        "large": check.large, "ok": check.ok,
        "recovered": [{"exponent": list(k), "q": q, "norm": v} for k, (q, v) in sorted(check.recovered.items())],
    }
    return Output(check.ok, payload=payload)


def run_series(config: ExperimentConfig) -> Output:
    opts = config.options
    if opts["system"] is None:
        raise ConfigError("series needs a system: {\"matrix\": [[...]], \"constants\": [...]}")
    try:
        Psi = LinearSystem.from_json(json.dumps(opts["system"]))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed system: {exc}") from None
    if opts["box"] is not None:
        lows, highs = zip(*opts["box"])
    else:
        lows, highs = [0.0] * Psi.d, [1.0] * Psi.d
    K = Polytope.box(list(lows), list(highs))
    s = singular_series(Psi, int(opts["pmax"]), K, int(opts["samples"]), config.seeds[0],
                        range_condition=bool(opts["range_condition"]))
    return Output(True, payload=s.to_dict())


def run_fourap(config: ExperimentConfig) -> Output:
    opts = config.options
    N = (config.n or [100_000])[-1]
    r = four_ap_experiment(N, int(opts["pmax"]), signed=bool(opts["signed"]))
    payload = r.to_dict()
    payload["tolerance"] = float(opts["tolerance"])
    return Output(r.gap <= float(opts["tolerance"]), payload=payload)


def run_lemma_suite(config: ExperimentConfig) -> Output:
    """JSON bundle of per-lemma reports; fails unless every suite passes."""
    opts = config.options
    try:
        reports = run_suites(opts["suites"], int(opts["samples"]), config.seeds[0], bool(opts["corrupt"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    ok = all(r.ok for r in reports.values())
    bundle = {"ok": ok, "seed": config.seeds[0], "corrupt": bool(opts["corrupt"]),
              "suites": {name: asdict(r) for name, r in reports.items()}}
    rows = [[name, r.samples, r.max_defect, r.ok] for name, r in reports.items()]
    return Output(ok, ["lemma", "samples", "max_defect", "ok"], rows, bundle)


def run_witness(config: ExperimentConfig) -> Output:
    """Recover planted quadratic phases under bounded noise."""
    opts = config.options
    rows = []
    for N in config.n or [1021]:
        for seed in config.seeds:
            rng = np.random.default_rng([seed, N])
            for trial in range(int(opts["trials"])):
                a = int(opts["a"]) % N if opts["a"] is not None else int(rng.integers(N))
                b = int(opts["b"]) % N if opts["b"] is not None else int(rng.integers(N))
                n = np.arange(N, dtype=np.int64)
                phase = np.exp(2j * np.pi * (((a * n * n) % N + b * n) % N) / N)
                # multiplicative bounded noise: 1 + xi with xi uniform in the disc of radius `noise`
                r = float(opts["noise"]) * np.sqrt(rng.random(N))
                f = phase * (1.0 + r * np.exp(2j * np.pi * rng.random(N)))
                w = quadratic_witness_search(f, workers=config.threads)
                rows.append([N, seed, trial, a, b, w.a, w.b, w.correlation])
    ok = all(r[3:5] == r[5:7] and r[7] >= float(opts["min_correlation"]) for r in rows)
    return Output(ok, ["N", "seed", "trial", "a", "b", "found_a", "found_b", "correlation"], rows)


@dataclass(frozen=True)
class Command:
    run: object
    formats: tuple
    defaults: dict
    help: str


COMMANDS = {
    "norms": Command(run_norm_scan, ("csv", "json", "svg"),
                     {"functions": ["constant", "mobius", "lambda_minus_q"], "s": [2, 3], "u3_cap": U3_CAP, "timings": False},
                     "interval Gowers norms of arithmetic functions"),
    "decay-scan": Command(run_decay_scan, ("csv", "json", "svg"),
                          {"function": "mobius", "u2_ladder": [2**10, 2**12, 2**14, 2**16],
                           "u3_ladder": [2**9, 2**10, 2**11, 2**12, 2**13], "u3_cap": U3_CAP, "max_exceptions": 1},
                          "norm decay ladders with consecutive ratios"),
    "bohr": Command(run_bohr, ("json", "csv"), {"frequencies": [1], "rho": 0.1, "grid": 200},
                    "regular Bohr set search"),
    "vaughan-check": Command(run_vaughan_check, ("csv", "json"),
                             {"U": None, "V": None, "functions": ["von_mangoldt", "mobius"], "tolerance": 1e-9},
                             "exact reconstruction of a Vaughan decomposition"),
    "weyl": Command(run_weyl, ("json",), {"poly": None, "box": None, "threshold": 0.1, "q_max": 400, "tol": 1e-6},
                    "Weyl sum and dichotomy check"),
    "series": Command(run_series, ("json",),
                      {"system": None, "pmax": 100, "samples": 100_000, "box": None, "range_condition": False},
                      "singular series of a linear system"),
    "fourap": Command(run_fourap, ("json",), {"pmax": 1000, "signed": False, "tolerance": 0.15},
                      "4-term progressions of primes against the singular series"),
    "lemmas": Command(run_lemma_suite, ("json", "csv"),
                      {"suites": list(SUITES), "samples": 1000, "corrupt": False},
                      "seeded verifier suites"),
    "witness": Command(run_witness, ("csv", "json"),
                       {"a": None, "b": None, "noise": 0.1, "trials": 20, "min_correlation": 0.85},
                       "quadratic witness recovery under noise"),
}


# --- argument parsing ----------------------------------------------------------------------

# command-specific flags: (flag, option key, argparse kwargs)
_FLAGS = {
    "norms": [("--functions", "functions", {"nargs": "+"}), ("--s", "s", {"nargs": "+", "type": int}),
              ("--u3-cap", "u3_cap", {"type": int}), ("--timings", "timings", {"action": "store_true", "default": None})],
    "decay-scan": [("--function", "function", {}), ("--max-exceptions", "max_exceptions", {"type": int}),
                   ("--u3-cap", "u3_cap", {"type": int})],
    "bohr": [("--frequencies", "frequencies", {"nargs": "+", "type": int}), ("--rho", "rho", {"type": float}),
             ("--grid", "grid", {"type": int})],
    "vaughan-check": [("--U", "U", {"type": int}), ("--V", "V", {"type": int}),
                      ("--functions", "functions", {"nargs": "+", "choices": ["von_mangoldt", "mobius"]})],
    "weyl": [("--poly", "poly", {"type": json.loads}), ("--box", "box", {"type": json.loads}),
             ("--threshold", "threshold", {"type": float}), ("--q-max", "q_max", {"type": int})],
    "series": [("--system", "system", {"type": json.loads}), ("--pmax", "pmax", {"type": int}),
               ("--samples", "samples", {"type": int}), ("--box", "box", {"type": json.loads}),
               ("--range-condition", "range_condition", {"action": "store_true", "default": None})],
    "fourap": [("--pmax", "pmax", {"type": int}), ("--signed", "signed", {"action": "store_true", "default": None}),
               ("--tolerance", "tolerance", {"type": float})],
    "lemmas": [("--suites", "suites", {"nargs": "*"}), ("--samples", "samples", {"type": int}),
               ("--corrupt", "corrupt", {"action": "store_true", "default": None})],
    "witness": [("--a", "a", {"type": int}), ("--b", "b", {"type": int}), ("--noise", "noise", {"type": float}),
                ("--trials", "trials", {"type": int})],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quadfourier", description=__doc__.splitlines()[0], allow_abbrev=False)
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, cmd in COMMANDS.items():
        p = sub.add_parser(name, help=cmd.help, allow_abbrev=False)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--n", nargs="+", type=int, help="ascending sizes N")
        p.add_argument("--seed", nargs="+", type=int, help="RNG seeds")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--format", choices=FORMATS)
        p.add_argument("--threads", type=int, help="worker cap; results do not depend on it")
        for flag, key, kwargs in _FLAGS[name]:
            p.add_argument(flag, dest=f"opt_{key}", **kwargs)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    base = {}
    if args.config:
        base = asdict(ExperimentConfig.from_file(args.config, args.command))
        base["options"] = {k: v for k, v in base["options"].items()}
    base["command"] = args.command
    for attr, key in (("n", "n"), ("seed", "seeds"), ("out", "out"), ("format", "format"), ("threads", "threads")):
        value = getattr(args, attr)
        if value is not None:
            base[key] = value
    options = dict(base.get("options", {}))
    for flag, key, _ in _FLAGS[args.command]:
        value = getattr(args, f"opt_{key}")
        if value is not None:
            options[key] = value
    base["options"] = options
    return ExperimentConfig(**base)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = config_from_args(args)
        out = COMMANDS[config.command].run(config)
        emit(config, out)
    except ConfigError as exc:
        print(f"quadfourier: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"quadfourier: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not out.ok:
        print(f"quadfourier: {config.command} outside tolerance", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
