"""Flat ``key = value`` experiment configuration with typed parsing.

A config file holds one assignment per line; ``#`` starts a comment and
blank lines are ignored.  Every subcommand declares a schema mapping each
key to a parser and a default; unknown or repeated keys are errors that
report the offending line.  Command-line flags override file values.

Value syntax
------------
int, float, str, bool (``true``/``false``/``yes``/``no``/``1``/``0``),
lists separated by commas, integer ranges ``a..b`` (inclusive) and
float grids ``logspace:a,b,n`` / ``linspace:a,b,n``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Optional

import numpy as np

from .errors import ConfigError


# ------------------------------------------------------------------------------
# value parsers
# ------------------------------------------------------------------------------

def p_int(s: str) -> int:
    return int(s)


def p_float(s: str) -> float:
    return float(s)


def p_str(s: str) -> str:
    return s


def p_bool(s: str) -> bool:
    t = s.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def p_int_list(s: str) -> list:
    out = []
    for part in s.split(","):
        part = part.strip()
        if ".." in part:
            a, b = part.split("..")
            a, b = int(a), int(b)
            if b < a:
                raise ValueError(f"empty range {part!r}")
            out.extend(range(a, b + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise ValueError("empty list")
    return out


def p_float_list(s: str) -> list:
    s = s.strip()
    for kind, fn in (("logspace:", np.geomspace), ("linspace:", np.linspace)):
        if s.startswith(kind):
            a, b, n = s[len(kind):].split(",")
            return [float(v) for v in fn(float(a), float(b), int(n))]
    out = [float(p) for p in s.split(",") if p.strip()]
    if not out:
        raise ValueError("empty list")
    return out


def p_choice(*options: str) -> Callable[[str], str]:
    def parse(s: str) -> str:
        if s not in options:
            raise ValueError(f"expected one of {', '.join(options)}; got {s!r}")
        return s
    parse.__name__ = "choice"
    return parse


def p_auto_float(s: str):
    return "auto" if s.strip() == "auto" else float(s)


def p_opt_float(s: str):
    return None if s.strip() in ("", "none") else float(s)


@dataclass(frozen=True)
class Key:
    parse: Callable[[str], Any]
    default: Any
    help: str = ""


# ------------------------------------------------------------------------------
# file parsing and resolution
# ------------------------------------------------------------------------------

def parse_text(text: str, schema: dict, source: Optional[str] = None) -> dict:
    """Parse config text against ``schema``; returns ``{key: (value, line)}``."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno, source)
        key, val = (t.strip() for t in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in schema:
            raise ConfigError(f"unknown key {key!r}", lineno, source)
        if key in out:
            raise ConfigError(f"duplicate key {key!r} (first set on line {out[key][1]})", lineno, source)
        try:
            out[key] = (schema[key].parse(val), lineno)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", lineno, source) from None
    return out


def resolve(schema: dict, file_text: Optional[str] = None, source: Optional[str] = None,
            overrides: Optional[dict] = None) -> dict:
    """Defaults, then file values, then string ``overrides`` (flags), in schema order."""
    values = {k: spec.default for k, spec in schema.items()}
    if file_text is not None:
        for k, (v, _) in parse_text(file_text, schema, source).items():
            values[k] = v
    for k, raw in (overrides or {}).items():
        if raw is None:
            continue
        k = k.replace("-", "_")
        if k not in schema:
            raise ConfigError(f"unknown key {k!r}", source="flags")
        try:
            values[k] = schema[k].parse(raw) if isinstance(raw, str) else raw
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value for --{k.replace('_', '-')}: {exc}", source="flags") from None
    return values


def render(values: dict) -> str:
    """The resolved config as ``key = value`` text (round-trips through the parsers)."""
    lines = []
    for k, v in values.items():
        if isinstance(v, bool):
            s = "true" if v else "false"
        elif isinstance(v, (list, tuple)):
            s = ",".join(repr(x) if isinstance(x, float) else str(x) for x in v)
        elif v is None:
            s = "none"
        elif isinstance(v, float):
            s = repr(v)
        else:
            s = str(v)
        lines.append(f"{k} = {s}")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------------------
# literals for geometric objects
# ------------------------------------------------------------------------------

def _floats(s: str) -> list:
    return [float(t) for t in s.split(",") if t.strip()]


def parse_domain(s: str, chart: str = "euclidean"):
    """Domain literal.

    ``ball:cx,cy[,cz];r``, ``box:x0,y0;x1,y1``, ``rect:cx,cy;hx,hy`` or
    ``polygon:x,y;x,y;...`` (counterclockwise vertices).
    """
    from .domains import Domain

    kind, _, body = s.partition(":")
    parts = [p for p in body.split(";") if p.strip()]
    if kind == "ball" and len(parts) == 2:
        return Domain.ball(_floats(parts[0]), float(parts[1]), chart=chart)
    if kind == "box" and len(parts) == 2:
        return Domain.box(_floats(parts[0]), _floats(parts[1]), chart=chart)
    if kind == "rect" and len(parts) == 2:
        return Domain.rectangle(_floats(parts[0]), _floats(parts[1]), chart=chart)
    if kind == "polygon" and len(parts) >= 3:
        return Domain.polygon([_floats(p) for p in parts], chart=chart)
    raise ValueError(f"cannot read domain literal {s!r}")


def parse_factor(s: str):
    """Conformal factor literal: ``flat[:K]``, ``poincare``, ``sphere-stereo:R``,
    ``inverse-square`` or ``sphere-chart:K``."""
    from .conformal import ConformalFactor

    kind, _, arg = s.partition(":")
    if kind == "flat":
        return ConformalFactor.flat(float(arg) if arg else 0.0)
    if kind == "poincare" and not arg:
        return ConformalFactor.poincare()
    if kind == "sphere-stereo" and arg:
        return ConformalFactor.sphere_stereo(float(arg))
    if kind == "inverse-square" and not arg:
        return ConformalFactor.inverse_square()
    if kind == "sphere-chart" and arg:
        return ConformalFactor.sphere_chart(float(arg))
    raise ValueError(f"cannot read conformal factor literal {s!r}")


def parse_weight(s: str):
    """Weight literal for the 2D solver: ``const:c`` or any conformal factor literal
    (the weight is then ``exp(2 phi)``).  Returns a float or a vectorised callable."""
    kind, _, arg = s.partition(":")
    if kind == "const":
        return float(arg)
    cf = parse_factor(s)
    return lambda p: cf.exp2phi(p)


def parse_profile(s: str) -> dict:
    """1D profile literal: ``const:c`` or ``quadratic:sigma,C``."""
    kind, _, arg = s.partition(":")
    if kind == "const":
        return {"sigma": 0.0, "C": float(arg)}
    if kind == "quadratic":
        sigma, C = _floats(arg)
        return {"sigma": sigma, "C": C}
    raise ValueError(f"cannot read profile literal {s!r}")


def literal(validator: Callable[[str], Any]) -> Callable[[str], str]:
    """Keep the literal text (so configs render verbatim) after validating it."""
    def parse(s: str) -> str:
        validator(s.strip())
        return s.strip()
    parse.__name__ = getattr(validator, "__name__", "literal")
    return parse
