"""TOML run configurations.

A minimal file names a builtin test and inherits everything from it::

    test = "burgers.test2"

Every field can be given explicitly instead::

    t_end = 0.03
    snapshots = [0.01, 0.02]
    output = "out"

    [system]
    id = "burgers"          # burgers | gas | msw
    path = "viscous"        # burgers only: segments | viscous
    gamma = 1.4             # gas only

    [scheme]
    order = 2
    disrec = true
    base = "godunov"        # roe | godunov
    strategy = "roe"        # roe | exact
    cfl = 0.5
    alpha = 1.0
    dt_max = 0.01

    [grid]
    domain = [0.0, 1.0]
    cells = 100
    boundary = "transmissive"   # or periodic

    [initial]
    riemann = { left = [7.99, 11.01], right = [0.25, 0.75], x0 = 0.5 }
    # or: test = "burgers.test2"   or: function = "burgers.stationary"
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError, ParseError, ValidationError
from .models import make_system
from .registry import FUNCTIONS, TESTS
from .stepper import SchemeConfig

__all__ = ["RunConfig", "parse_config", "load_config"]

SYSTEMS = ("burgers", "gas", "msw")
MIN_CELLS = 10

_TOP = {"test", "t_end", "snapshots", "output", "system", "scheme", "grid", "initial"}
_SCHEME = {"order", "disrec", "base", "strategy", "cfl", "alpha", "dt_max", "min_dt_ratio"}
_GRID = {"domain", "cells", "boundary"}
_SYSTEM = {"id", "path", "gamma"}


@dataclass(frozen=True)
class RunConfig:
    """Validated run description.

    ``initial`` is one of ``{'riemann': (left, right, x0)}``,
    ``{'function': name}``; a builtin test id resolves to one of them.
    """

    system: str
    system_options: dict
    scheme: SchemeConfig
    domain: tuple
    cells: int
    t_end: float
    initial: dict
    boundary: str = "transmissive"
    snapshots: tuple = ()
    output: str = "out"
    test: Optional[str] = None
    nquad: int = 1

    def with_overrides(self, cfl=None, cells=None, order=None, disrec=None, strategy=None):
        """Copy with command-line overrides applied and revalidated."""
        kw = {k: v for k, v in dict(cfl=cfl, order=order, disrec=disrec,
                                     strategy=strategy).items() if v is not None}
        try:
            scheme = replace(self.scheme, **kw)
        except ConfigError as exc:
            raise ValidationError(str(exc), exc.problems) from None
        out = replace(self, scheme=scheme)
        if cells is not None:
            if cells < MIN_CELLS:
                raise ValidationError(f"cells must be >= {MIN_CELLS}, got {cells}")
            out = replace(out, cells=int(cells))
        return out

    @property
    def label(self):
        return self.test or self.system


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config(text)


def parse_config(text):
    """Parse and validate a TOML configuration.

    Raises
    ------
    ParseError
        Malformed TOML; the message carries the line and column.
    ValidationError
        Every violated constraint, listed in ``problems``.
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"invalid TOML: {exc}") from None

    problems = []
    _unknown(doc, _TOP, "", problems)
    for name, keys in (("system", _SYSTEM), ("scheme", _SCHEME), ("grid", _GRID)):
        sub = doc.get(name, {})
        if not isinstance(sub, dict):
            problems.append(f"[{name}] must be a table")
            doc[name] = {}
        else:
            _unknown(sub, keys, name + ".", problems)

    initial = doc.get("initial", {})
    test_id = doc.get("test", initial.get("test") if isinstance(initial, dict) else None)
    case = None
    if test_id is not None:
        if test_id not in TESTS:
            problems.append(f"test: unknown test id {test_id!r}")
        else:
            case = TESTS[test_id]

    sysd = doc.get("system", {})
    system = sysd.get("id", case.system if case else None)
    if system is None:
        problems.append("system.id is required when no test is named")
    elif system not in SYSTEMS:
        problems.append(f"system.id: unknown system {system!r} (expected one of {SYSTEMS})")
    options = dict(case.system_options) if case and case.system == system else {}
    if "path" in sysd:
        if sysd["path"] not in ("segments", "viscous"):
            problems.append(f"system.path: expected 'segments' or 'viscous', got {sysd['path']!r}")
        options["path"] = sysd["path"]
    if "gamma" in sysd:
        if not _num(sysd["gamma"]) or not sysd["gamma"] > 1:
            problems.append("system.gamma must be a number > 1")
        options["gamma"] = float(sysd["gamma"]) if _num(sysd["gamma"]) else sysd["gamma"]

    sch = dict(doc.get("scheme", {}))
    if case is not None:
        sch.setdefault("base", case.base)
        sch.setdefault("cfl", case.cfl)
    scheme = None
    try:
        scheme = SchemeConfig(**sch)
    except ConfigError as exc:
        problems.extend("scheme: " + p for p in exc.problems)
    except TypeError as exc:
        problems.append(f"scheme: {exc}")

    grid = doc.get("grid", {})
    domain = grid.get("domain", case.domain if case else None)
    if domain is None:
        problems.append("grid.domain is required when no test is named")
    elif (not isinstance(domain, (list, tuple)) or len(domain) != 2
          or not all(_num(v) for v in domain) or not domain[0] < domain[1]):
        problems.append(f"grid.domain must be [a, b] with a < b, got {domain!r}")
    cells = grid.get("cells", case.cells[0] if case else None)
    if cells is None:
        problems.append("grid.cells is required when no test is named")
    elif not isinstance(cells, int) or isinstance(cells, bool) or cells < MIN_CELLS:
        problems.append(f"grid.cells must be an integer >= {MIN_CELLS}, got {cells!r}")
    boundary = grid.get("boundary", case.boundary if case else "transmissive")
    if boundary not in ("transmissive", "periodic"):
        problems.append(f"grid.boundary must be 'transmissive' or 'periodic', got {boundary!r}")

    t_end = doc.get("t_end", case.t_end if case else None)
    if t_end is None:
        problems.append("t_end is required when no test is named")
    elif not _num(t_end) or not t_end > 0:
        problems.append(f"t_end must be a positive number, got {t_end!r}")
    snaps = doc.get("snapshots", list(case.snapshots) if case else [])
    if not isinstance(snaps, list) or not all(_num(s) and s >= 0 for s in snaps):
        problems.append("snapshots must be a list of non-negative numbers")
        snaps = []
    elif _num(t_end) and any(s > t_end for s in snaps):
        problems.append("snapshot times must not exceed t_end")

    init = _initial(initial, case, system, problems)
    if "riemann" in init and not problems:
        left, right, x0 = init["riemann"]
        if not domain[0] <= x0 <= domain[1]:
            problems.append(f"initial.riemann.x0={x0} lies outside the domain {domain}")
        model = make_system(system, **options)
        for side, v in (("left", left), ("right", right)):
            if not bool(model.in_domain(np.asarray(v, dtype=float))):
                problems.append(f"initial.riemann.{side}={list(v)} is not an admissible state")
    output = doc.get("output", "out")
    if not isinstance(output, str):
        problems.append("output must be a string path")

    if problems:
        raise ValidationError("invalid configuration:\n  " + "\n  ".join(problems), problems)
    return RunConfig(system=system, system_options=options, scheme=scheme,
                     domain=(float(domain[0]), float(domain[1])), cells=int(cells),
                     t_end=float(t_end), initial=init, boundary=boundary,
                     snapshots=tuple(float(s) for s in snaps), output=output, test=test_id,
                     nquad=_nquad(init))


def _num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and np.isfinite(v)


def _unknown(table, allowed, prefix, problems):
    for key in table:
        if key not in allowed:
            problems.append(f"{prefix}{key}: unknown field")


def _nquad(init):
    return 4 if init.get("function") == "burgers.smooth" else 1


def _initial(initial, case, system, problems):
    if not isinstance(initial, dict):
        problems.append("[initial] must be a table")
        return {}
    given = [k for k in ("riemann", "function") if k in initial]
    extra = set(initial) - {"riemann", "function", "test"}
    for k in sorted(extra):
        problems.append(f"initial.{k}: unknown field")
    if len(given) > 1:
        problems.append("initial: give only one of riemann or function")
        return {}
    if not given:
        if case is None:
            problems.append("initial: one of test, riemann or function is required")
            return {}
        if case.kind == "riemann":
            return {"riemann": (tuple(case.left), tuple(case.right), float(case.x0))}
        return {"function": case.function}
    if "function" in initial:
        name = initial["function"]
        if name not in FUNCTIONS:
            problems.append(f"initial.function: unknown builtin {name!r} "
                            f"(expected one of {sorted(FUNCTIONS)})")
        elif system is not None and not name.startswith(system + "."):
            problems.append(f"initial.function {name!r} does not belong to system {system!r}")
        return {"function": name}
    r = initial["riemann"]
    if not isinstance(r, dict) or not {"left", "right"} <= set(r):
        problems.append("initial.riemann needs left and right")
        return {}
    left, right = r["left"], r["right"]
    n = {"burgers": 2, "gas": 3, "msw": 2}.get(system)
    for side, v in (("left", left), ("right", right)):
        if not isinstance(v, list) or not all(_num(x) for x in v):
            problems.append(f"initial.riemann.{side} must be a list of numbers")
        elif n is not None and len(v) != n:
            problems.append(f"initial.riemann.{side} needs {n} components for {system}")
    x0 = r.get("x0", 0.0)
    if not _num(x0):
        problems.append("initial.riemann.x0 must be a number")
    return {"riemann": (tuple(left), tuple(right), float(x0) if _num(x0) else 0.0)}
