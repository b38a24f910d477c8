"""Command-line driver.

    ptscarf <subcommand> [flags]

Configuration precedence is defaults < JSON file named by $PTSCARF_CONFIG <
flags. Exit status: 0 when every hard check passes, 1 when one fails, 2 for
configuration or output errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import fields, replace
from pathlib import Path

from .report import SUITES, RunConfig, run_full_report

__all__ = ["main", "build_parser", "load_config", "dumps", "render_outputs"]

CONFIG_ENV = "PTSCARF_CONFIG"
SUBCOMMANDS = list(SUITES) + ["full-report"]

_FLAGS = {
    "alpha_re": float, "alpha_im": float, "n_max": int,
    "quad_panels": int, "quad_order": int, "abel_k_min": int, "abel_k_max": int,
    "tol_orth": float, "tol_kernel": float, "tol_action": float, "tol_complete": float,
    "grid_points": int,
}


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# Serialisation
# ---------------------------------------------------------------------------


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if all(ch not in s for ch in ".en"):
        s += ".0"
    return s


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {dumps(v, indent, _level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    if hasattr(obj, "item"):  # numpy scalar
        return dumps(obj.item(), indent, _level)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _csv_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "" if not math.isfinite(v) else format(v, ".17g")
    if v is None:
        return ""
    return str(v)


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(_csv_cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _check_rows(report):
    return [[c["id"], c["residual"], c["tolerance"], c["comparison"], c["passed"],
             c["informational"]] for c in report["checks"]]


_CHECK_HEADER = ["id", "residual", "tolerance", "comparison", "passed", "informational"]
_SAMPLE_HEADER = ["x", "y", "re_closed", "im_closed", "re_abel", "im_abel", "rel_err"]
_CONVERGENCE_HEADER = ["function", "N", "sup_error"]


def _tables_of(report):
    """Yield (suffix, csv_text) for the data tables attached to a report."""
    subs = report.get("suites", [report])
    for r in subs:
        tables = r.get("tables") or {}
        if "kernel_samples" in tables:
            yield "samples", _csv(_SAMPLE_HEADER, tables["kernel_samples"])
        if "convergence" in tables:
            yield "convergence", _csv(_CONVERGENCE_HEADER, tables["convergence"])


def render_outputs(report: dict, cfg: RunConfig):
    """Map output path -> text for this report (nothing written yet)."""
    out = Path(cfg.out_path) if cfg.out_path else None
    files = {}
    if cfg.format == "json":
        body = dumps(report) + "\n"
        if out is None:
            return {None: body}
        files[out] = body
        for suffix, text in _tables_of(report):
            files[out.with_name(f"{out.stem}_{suffix}.csv")] = text
        return files
    # csv: one file per suite plus an index
    base = out if out is not None else Path("ptscarf_report.csv")
    subs = report.get("suites", [report])
    index_rows = []
    for r in subs:
        name = r["suite"]
        path = base.with_name(f"{base.stem}_{name}.csv")
        files[path] = _csv(_CHECK_HEADER, _check_rows(r))
        index_rows.append([name, path.name, "checks", r["passed"]])
    for suffix, text in _tables_of(report):
        path = base.with_name(f"{base.stem}_{suffix}.csv")
        files[path] = text
        index_rows.append(["", path.name, suffix, ""])
    files[base] = _csv(["suite", "file", "kind", "passed"], index_rows)
    return files


def write_atomic(files: dict) -> None:
    """Write every file via temp + rename; nothing is written if a parent is missing."""
    for path in files:
        if path is not None and not path.parent.is_dir():
            raise ConfigError(f"output directory does not exist: {path.parent}")
    staged = []
    try:
        for path, text in files.items():
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            staged.append((tmp, path))
        for tmp, path in staged:
            os.replace(tmp, path)
    except BaseException:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ptscarf",
        description="Verify the C operator of the PT-symmetric Scarf I potential.")
    parser.add_argument("command", choices=SUBCOMMANDS)
    for name, typ in _FLAGS.items():
        parser.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None)
    parser.add_argument("--n-list", dest="n_list", default=None,
                        help="comma-separated truncation orders for the completeness suite")
    parser.add_argument("--out", dest="out_path", default=None)
    parser.add_argument("--format", dest="format", choices=["json", "csv"], default=None)
    parser.add_argument("--parallel", dest="parallel", action="store_true", default=None)
    return parser


def load_config(args: argparse.Namespace, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    values = {}
    path = environ.get(CONFIG_ENV)
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read config file {path}: {err}") from err
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        known = set(RunConfig.field_names())
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        values.update(data)
    for name in RunConfig.field_names():
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    if isinstance(values.get("n_list"), str):
        try:
            values["n_list"] = tuple(int(t) for t in values["n_list"].split(",") if t.strip())
        except ValueError as err:
            raise ConfigError(f"bad --n-list: {err}") from err
    try:
        return RunConfig(**values)
    except (TypeError, ValueError) as err:
        raise ConfigError(str(err)) from err


def run(command: str, cfg: RunConfig) -> dict:
    if command == "full-report":
        return run_full_report(cfg)
    return SUITES[command](cfg)


def main(argv=None, environ=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args, environ)
        if cfg.out_path:
            parent = Path(cfg.out_path).parent
            if not parent.is_dir():
                raise ConfigError(f"output directory does not exist: {parent}")
    except ConfigError as err:
        print(f"ptscarf: error: {err}", file=sys.stderr)
        return 2
    report = run(args.command, cfg)
    files = render_outputs(report, cfg)
    try:
        if None in files:
            sys.stdout.write(files.pop(None))
        write_atomic(files)
    except (ConfigError, OSError) as err:
        print(f"ptscarf: error: {err}", file=sys.stderr)
        return 2
    for c in report["checks"]:
        flag = "PASS" if c["passed"] else ("INFO" if c["informational"] else "FAIL")
        print(f"{flag} {c['id']} residual={c['residual']} tol={c['tolerance']}", file=sys.stderr)
    return 0 if report["passed"] else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
