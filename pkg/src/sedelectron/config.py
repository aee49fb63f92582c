"""Run configuration: a small sectioned ``key = value`` format.

Only two kinds of section are accepted: ``[run]`` and the section named
after the selected experiment.  Every key has a type and a default; values
are checked as they are read so errors can point at the offending line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable

from .errors import ConfigurationError
from .units import UNIT_SYSTEMS

EXPERIMENTS = ("vacuum-sample", "oscillator-run", "commutator-sum", "nelson-run", "hlike-ground")
AUTO = "auto"


@dataclass(frozen=True)
class Key:
    kind: str  # int | float | str | float-or-auto
    default: Any
    help: str
    choices: tuple[str, ...] = ()
    check: Callable[[Any], bool] | None = None
    rule: str = ""


def _pos(v) -> bool:
    return v > 0


def _nonneg(v) -> bool:
    return v >= 0


def _frac(v) -> bool:
    return 0.0 <= v <= 1.0


RUN_KEYS = {
    "experiment": Key("str", None, "experiment family", EXPERIMENTS),
    "seed": Key("int", 0, "master seed (64-bit)", check=lambda v: 0 <= v < 2**64, rule="0 <= seed < 2**64"),
    "unit_system": Key("str", "natural", "unit system", UNIT_SYSTEMS),
    "workers": Key("int", 1, "worker processes; never changes results", check=_pos, rule="workers >= 1"),
    "output_dir": Key("str", "sedelectron-out", "directory for artifacts"),
}

SECTION_KEYS: dict[str, dict[str, Key]] = {
    "vacuum-sample": {
        "count": Key("int", 1000, "number of sampled modes", check=_nonneg, rule="count >= 0"),
        "omega_min": Key("float", 0.5, "lower frequency cutoff"),
        "omega_max": Key("float", 2.0, "upper frequency cutoff"),
        "sampling_law": Key("str", "uniform", "frequency sampling law", ("uniform", "stratified")),
        "resonance_center": Key("float-or-auto", AUTO, "stratified: line centre (auto = geometric mean of cutoffs)"),
        "resonance_width": Key("float-or-auto", AUTO, "stratified: line half-width (auto = 1% of centre)"),
        "resonance_fraction": Key("float", 0.9, "stratified: share of modes on the line", check=_frac, rule="0 <= x <= 1"),
        "volume": Key("float", 1.0, "normalization volume", check=_pos, rule="volume > 0"),
        "n_times": Key("int", 256, "time samples for the field statistics", check=_pos, rule="n_times >= 1"),
    },
    "oscillator-run": {
        "omega0": Key("float", 1.0, "natural frequency", check=_pos, rule="omega0 > 0"),
        "tau_omega0": Key("float", 1e-4, "tau * omega0 (natural units only)", check=lambda v: 0 < v < 1, rule="0 < tau*omega0 < 1"),
        "drive": Key("str", "single", "drive: one mode or a sampled mode set", ("single", "sampled")),
        "drive_ratio": Key("float", 1.0, "single drive: omega / omega0", check=_pos, rule="ratio > 0"),
        "count": Key("int", 200, "sampled drive: number of modes", check=_pos, rule="count >= 1"),
        "span": Key("float", 50.0, "sampled drive: cutoffs omega0/span .. omega0*span", check=lambda v: v > 1, rule="span > 1"),
        "dt_omega0": Key("float", 0.01, "integrator step times omega0", check=_pos, rule="dt > 0"),
        "damping_times": Key("float", 20.0, "transient length in units of 1/(tau omega0^2)", check=_pos, rule="> 0"),
        "window_periods": Key("float", 32.0, "comparison window in periods 2 pi/omega0", check=_pos, rule="> 0"),
        "record_every": Key("int", 10, "record every n-th step", check=_pos, rule=">= 1"),
        "realizations": Key("int", 0, "phase-ensemble realizations for dispersions (0 = skip)", check=_nonneg, rule=">= 0"),
        "dispersion_modes": Key("int", 2000, "modes per dispersion realization", check=_pos, rule=">= 1"),
        "dispersion_tau_omega0": Key("float", 1e-3, "tau * omega0 for the dispersion ensemble (natural units)", check=lambda v: 0 < v < 1, rule="0 < x < 1"),
        "n_times": Key("int", 64, "time samples per dispersion realization", check=_pos, rule=">= 1"),
    },
    "commutator-sum": {
        "omega0": Key("float", 1.0, "natural frequency", check=_pos, rule="omega0 > 0"),
        "tau_omega0": Key("float", 1e-6, "tau * omega0 (natural units only)", check=lambda v: 0 < v < 1, rule="0 < tau*omega0 < 1"),
        "count": Key("int", 4000, "number of modes", check=_pos, rule="count >= 1"),
        "span": Key("float", 50.0, "cutoffs omega0/span .. omega0*span", check=lambda v: v > 1, rule="span > 1"),
        "resonance_fraction": Key("float", 0.9, "share of modes on the line", check=_frac, rule="0 <= x <= 1"),
    },
    "nelson-run": {
        "omega": Key("float", 1.0, "oscillator frequency", check=_pos, rule="omega > 0"),
        "n_walkers": Key("int", 100000, "number of walkers", check=_pos, rule=">= 1"),
        "dt": Key("float", 1e-3, "time step", check=_pos, rule="dt > 0"),
        "steps": Key("int", 10000, "number of steps", check=_nonneg, rule=">= 0"),
        "x_min": Key("float", -8.0, "grid lower edge"),
        "x_max": Key("float", 8.0, "grid upper edge"),
        "n_grid": Key("int", 3201, "grid points", check=lambda v: v >= 5, rule=">= 5"),
        "drift": Key("str", "analytic", "drift source", ("analytic", "grid")),
        "boundary": Key("str", "reflect", "walker boundary policy", ("reflect", "clip", "error", "none")),
        "bins": Key("int", 100, "histogram bins over [-5, 5] oscillator lengths", check=_pos, rule=">= 1"),
    },
    "hlike-ground": {
        "z_min": Key("int", 1, "first nuclear charge", check=_pos, rule="Z >= 1"),
        "z_max": Key("int", 1, "last nuclear charge", check=_pos, rule="Z >= 1"),
        "radial_spread": Key("float", 1.0, "<(dr)^2> / <r>^2", check=_pos, rule="> 0"),
    },
}


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    seed: int
    unit_system: str
    workers: int
    output_dir: str
    params: tuple[tuple[str, Any], ...]  # experiment section, schema order

    def __getitem__(self, key: str) -> Any:
        for k, v in self.params:
            if k == key:
                return v
        raise KeyError(key)

    def param_dict(self) -> dict[str, Any]:
        return dict(self.params)

    def replace(self, **changes) -> "RunConfig":
        kw = {f: getattr(self, f) for f in ("experiment", "seed", "unit_system", "workers", "output_dir", "params")}
        kw.update(changes)
        return RunConfig(**kw)

    def canonical_text(self, include_execution: bool = False) -> str:
        """Deterministic serialization of everything that affects results.

        With ``include_execution`` the worker count and output directory are
        added too, and :func:`parse_config` maps the text back to ``self``.
        """
        lines = ["[run]", f"experiment = {self.experiment}", f"seed = {self.seed}", f"unit_system = {self.unit_system}"]
        if include_execution:
            lines.append(f"workers = {self.workers}")
            lines.append(f"output_dir = {self.output_dir}")
        lines.append("")
        lines.append(f"[{self.experiment}]")
        lines.extend(f"{k} = {_format(v)}" for k, v in self.params)
        return "\n".join(lines) + "\n"


def _format(v: Any) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _convert(raw: str, key: str, spec: Key, where: str) -> Any:
    try:
        if spec.kind == "int":
            val: Any = int(raw, 0)
        elif spec.kind == "float":
            val = float(raw)
        elif spec.kind == "float-or-auto":
            val = AUTO if raw == AUTO else float(raw)
        else:
            val = raw
    except ValueError:
        raise ConfigurationError(f"{where}: {key} expects {spec.kind}, got {raw!r}") from None
    if isinstance(val, float) and not math.isfinite(val):
        raise ConfigurationError(f"{where}: {key} must be finite")
    if spec.choices and val not in spec.choices:
        raise ConfigurationError(f"{where}: {key} must be one of {', '.join(spec.choices)}; got {raw!r}")
    if spec.check is not None and val != AUTO and not spec.check(val):
        raise ConfigurationError(f"{where}: {key} = {raw} violates {spec.rule}")
    return val


def _read_sections(text: str) -> dict[str, dict[str, tuple[str, int]]]:
    sections: dict[str, dict[str, tuple[str, int]]] = {}
    current = None
    for n, line in enumerate(text.splitlines(), 1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
            if current in sections:
                raise ConfigurationError(f"line {n}: duplicate section [{current}]")
            sections[current] = {}
            continue
        if "=" not in s:
            raise ConfigurationError(f"line {n}: expected 'key = value', got {line.strip()!r}")
        if current is None:
            raise ConfigurationError(f"line {n}: key outside any section")
        key, value = (p.strip() for p in s.split("=", 1))
        if key in sections[current]:
            raise ConfigurationError(f"line {n}: duplicate key {key!r} in [{current}]")
        sections[current][key] = (value, n)
    return sections


def parse_config(text: str, *, experiment: str | None = None, seed: int | None = None) -> RunConfig:
    """Parse and validate a configuration document.

    ``experiment`` and ``seed`` come from the command line; the experiment
    must match the file's when both are given, the seed overrides it.
    """
    sections = _read_sections(text)
    run_raw = sections.get("run")
    if run_raw is None:
        if experiment is None:
            raise ConfigurationError("missing section [run]")
        run_raw = {}
    run: dict[str, Any] = {}
    for key, (raw, n) in run_raw.items():
        if key not in RUN_KEYS:
            raise ConfigurationError(f"line {n}: unknown key {key!r} in [run]")
        run[key] = _convert(raw, key, RUN_KEYS[key], f"line {n}")
    if "experiment" not in run:
        if experiment is None:
            raise ConfigurationError("missing required key 'experiment' in [run]")
        run["experiment"] = experiment
    elif experiment is not None and run["experiment"] != experiment:
        raise ConfigurationError(f"config is for {run['experiment']!r}, command line asks for {experiment!r}")
    exp = run["experiment"]
    if exp not in EXPERIMENTS:
        raise ConfigurationError(f"unknown experiment {exp!r}")
    for name in sections:
        if name not in ("run", exp):
            raise ConfigurationError(f"unknown section [{name}] for experiment {exp}")
    if seed is not None:
        run["seed"] = _convert(str(seed), "seed", RUN_KEYS["seed"], "--seed")
    for key, spec in RUN_KEYS.items():
        run.setdefault(key, spec.default)

    schema = SECTION_KEYS[exp]
    given = sections.get(exp, {})
    values: dict[str, Any] = {}
    for key, (raw, n) in given.items():
        if key not in schema:
            raise ConfigurationError(f"line {n}: unknown key {key!r} in [{exp}]")
        values[key] = _convert(raw, key, schema[key], f"line {n}")
    params = tuple((k, values.get(k, spec.default)) for k, spec in schema.items())
    rc = RunConfig(exp, run["seed"], run["unit_system"], run["workers"], run["output_dir"], params)
    validate(rc)
    return rc


def default_config(experiment: str, seed: int = 0) -> RunConfig:
    return parse_config("", experiment=experiment, seed=seed)


def validate(rc: RunConfig) -> None:
    """Cross-key rules the per-key checks cannot see."""
    p = rc.param_dict()
    if rc.experiment == "vacuum-sample":
        try:
            vacuum_sampling(rc).validate()
        except ConfigurationError as exc:
            raise ConfigurationError(f"[vacuum-sample] {exc}") from None
    elif rc.experiment == "nelson-run":
        if rc.unit_system != "natural":
            raise ConfigurationError("nelson-run works in natural units (hbar = m = 1)")
        if not p["x_min"] < p["x_max"]:
            raise ConfigurationError("[nelson-run] needs x_min < x_max")
    elif rc.experiment == "hlike-ground":
        if p["z_max"] < p["z_min"]:
            raise ConfigurationError("[hlike-ground] needs z_min <= z_max")
    elif rc.experiment == "oscillator-run":
        from .experiments import oscillator_step_count

        steps = oscillator_step_count(rc)
        if steps > 5e7:
            raise ConfigurationError(f"[oscillator-run] needs {steps:.3g} integrator steps (limit 5e7)")


def vacuum_sampling(rc: RunConfig):
    from .experiments import constants_for
    from .vacuum_field import ModeSamplingConfig

    p = rc.param_dict()
    k = constants_for(rc)
    lo, hi = p["omega_min"], p["omega_max"]
    centre = p["resonance_center"]
    if centre == AUTO:
        centre = math.sqrt(lo * hi) if lo > 0 and hi > 0 else 1.0
    width = p["resonance_width"]
    if width == AUTO:
        width = 0.01 * centre
    return ModeSamplingConfig(
        count=p["count"],
        omega_min=lo,
        omega_max=hi,
        sampling_law=p["sampling_law"],
        seed=rc.seed,
        resonance_center=centre,
        resonance_width=width,
        resonance_fraction=p["resonance_fraction"],
        hbar=k.hbar,
        light_speed=k.light_speed,
        volume=p["volume"],
    )


def print_defaults(experiment: str) -> str:
    """Default configuration with one comment per key."""
    lines = ["[run]"]
    for key, spec in RUN_KEYS.items():
        default = experiment if key == "experiment" else spec.default
        lines.append(f"# {spec.help}" + (f" ({', '.join(spec.choices)})" if spec.choices else ""))
        lines.append(f"{key} = {_format(default)}")
    lines.append("")
    lines.append(f"[{experiment}]")
    for key, spec in SECTION_KEYS[experiment].items():
        lines.append(f"# {spec.help}" + (f" ({', '.join(spec.choices)})" if spec.choices else ""))
        lines.append(f"{key} = {_format(spec.default)}")
    return "\n".join(lines) + "\n"
