"""Human-editable key-value manifold configs.

A config file is plain ``key = value`` lines with ``#`` comments.  Dotted
keys group related settings.  The manifold schema (documented in the CLI
module) covers the interval, dimension, fiber, and warping; command
parameters may also be given here and are overridden by command-line
flags.
"""

import math
from pathlib import Path

from .errors import ConfigError
from .geometry import (
    ConstantWarping,
    CoshWarping,
    FiberSpec,
    Interval,
    IntervalKind,
    LinearWarping,
    PowerLogWarping,
    PowerWarping,
    SampledWarping,
    SinhWarping,
    WarpedProductSpec,
)

__all__ = ["parse_kv_file", "parse_kv_text", "manifold_from_config", "manifold_to_config"]


def parse_kv_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def parse_kv_file(path) -> dict[str, str]:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    return parse_kv_text(p.read_text())


def _get_float(cfg: dict, key: str, default=None) -> float | None:
    if key not in cfg:
        if default is None:
            return None
        return default
    try:
        return float(cfg[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: expected a number, got {cfg[key]!r}") from exc


def _get_floats(cfg: dict, key: str) -> list[float] | None:
    if key not in cfg:
        return None
    raw = cfg[key]
    if isinstance(raw, (list, tuple)):
        return [float(x) for x in raw]
    try:
        return [float(x) for x in str(raw).split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"{key}: expected comma-separated numbers") from exc


def _require(cfg: dict, key: str) -> str:
    if key not in cfg:
        raise ConfigError(f"missing required config key {key!r}")
    return str(cfg[key])


def manifold_from_config(cfg: dict) -> WarpedProductSpec:
    """Build a WarpedProductSpec from (string-valued or typed) config keys."""
    ik = _require(cfg, "interval").lower()
    if ik == "half_line":
        interval = Interval.half_line()
    elif ik == "full_line":
        interval = Interval.full_line()
    elif ik == "segment":
        lo = _get_float(cfg, "interval.lo")
        hi = _get_float(cfg, "interval.hi")
        if lo is None or hi is None:
            raise ConfigError("segment interval needs interval.lo and interval.hi")
        interval = Interval.segment(lo, hi)
    else:
        raise ConfigError(f"unknown interval kind {ik!r}")

    try:
        n = int(str(cfg.get("n", "")))
    except ValueError as exc:
        raise ConfigError("n must be an integer >= 3") from exc

    fk = str(cfg.get("fiber.kind", "sphere")).lower()
    if fk == "sphere":
        radius = _get_float(cfg, "fiber.radius", 1.0)
        fiber = FiberSpec.round_sphere(n - 1, radius)
    elif fk == "custom":
        s = _get_float(cfg, "fiber.scalar_curvature")
        area = _get_float(cfg, "fiber.area")
        if s is None or area is None:
            raise ConfigError("custom fiber needs fiber.scalar_curvature and fiber.area")
        fiber = FiberSpec(dim=n - 1, scalar_curvature=s, area=area)
    else:
        raise ConfigError(f"unknown fiber kind {fk!r}")

    wk = _require(cfg, "warping.kind").lower()
    try:
        if wk == "power":
            warping = PowerWarping(
                coefficient=_get_float(cfg, "warping.coefficient", 1.0),
                exponent=_get_float(cfg, "warping.exponent", 1.0),
            )
        elif wk == "power_log":
            warping = PowerLogWarping(
                exponent=_get_float(cfg, "warping.exponent", 1.0),
                log_power=_get_float(cfg, "warping.log_power", 1.0),
            )
        elif wk == "sinh":
            warping = SinhWarping()
        elif wk == "cosh":
            warping = CoshWarping()
        elif wk == "linear":
            warping = LinearWarping(
                slope=_get_float(cfg, "warping.slope", 1.0),
                intercept=_get_float(cfg, "warping.intercept", 0.0),
            )
        elif wk == "constant":
            warping = ConstantWarping(c=_get_float(cfg, "warping.value", 1.0))
        elif wk == "sampled":
            grid = _get_floats(cfg, "warping.grid")
            values = _get_floats(cfg, "warping.values")
            if grid is None or values is None:
                raise ConfigError("sampled warping needs warping.grid and warping.values")
            warping = SampledWarping(grid, values)
        else:
            raise ConfigError(f"unknown warping kind {wk!r}")
    except ValueError as exc:
        raise ConfigError(f"invalid warping parameters: {exc}") from exc

    try:
        return WarpedProductSpec(interval=interval, n=n, fiber=fiber, warping=warping)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def manifold_to_config(spec: WarpedProductSpec) -> dict:
    """Flat dotted-key echo of a manifold, replayable by manifold_from_config."""
    out: dict = {"interval": spec.interval.kind.value, "n": spec.n}
    if spec.interval.kind is IntervalKind.SEGMENT:
        out["interval.lo"] = spec.interval.lo
        out["interval.hi"] = spec.interval.hi
    if spec.fiber.round_sphere_radius is not None:
        out["fiber.kind"] = "sphere"
        out["fiber.radius"] = spec.fiber.round_sphere_radius
    else:
        out["fiber.kind"] = "custom"
        out["fiber.scalar_curvature"] = spec.fiber.scalar_curvature
        out["fiber.area"] = spec.fiber.area
    params = spec.warping.params()
    kind = params.pop("kind")
    out["warping.kind"] = kind
    rename = {"c": "value", "grid": "grid", "values": "values"}
    for key, value in params.items():
        cfg_key = rename.get(key, key)
        if isinstance(value, list):
            out[f"warping.{cfg_key}"] = ",".join(repr(v) for v in value)
        else:
            out[f"warping.{cfg_key}"] = value
    return out
