"""Run configuration: dataclass sections plus a flat ``section.key = value`` loader.

Example file::

    # comments start with '#'
    combine.identification_coefficient = 0.5
    evaluate.subjective_weights = 0.15, 0.2, 0.3, 0.2, 0.15
    svm.method3_params = 0.1245, 639.559

Unknown keys are errors unless ``strict=False``.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

KERNEL_KINDS = ("rbf", "polynomial", "sigmoid", "mexican_hat_wavelet")
COMBINE_METHODS = ("avg", "std", "devcoef", "lsm", "lsm_exact", "ed", "grd", "gro", "rs")


@dataclass(frozen=True)
class EmbeddingConfig:
    mode: str = "fixed"
    tau: int = 1
    dim: int = 4
    max_lag: int = 20
    ami_bins: int = 16
    delay_rule: str = "first_minimum"
    max_dim: int = 8
    fnn_threshold_percent: float = 1.0
    fnn_distance_threshold: float = 15.0

    def validate(self):
        _choice("embedding.mode", self.mode, ("auto", "fixed"))
        _choice("embedding.delay_rule", self.delay_rule, ("first_minimum", "global_minimum"))
        for key in ("tau", "dim", "max_lag", "max_dim"):
            _positive(f"embedding.{key}", getattr(self, key))
        if self.ami_bins < 2:
            raise ConfigError("embedding.ami_bins must be >= 2")
        if not 0 <= self.fnn_threshold_percent <= 100:
            raise ConfigError("embedding.fnn_threshold_percent must lie in [0, 100]")
        _positive("embedding.fnn_distance_threshold", self.fnn_distance_threshold)


@dataclass(frozen=True)
class WaveletConfig:
    enabled: bool = True
    family: str = "coif3"
    level: int = 3
    threshold_rule: str = "universal_soft"
    extension: str = "symmetric"

    def validate(self):
        _choice("wavelet.family", self.family, ("coif3", "coiflet3", "db4", "daubechies4"))
        _choice("wavelet.threshold_rule", self.threshold_rule, ("universal_soft", "universal_hard"))
        _choice("wavelet.extension", self.extension, ("symmetric", "periodization"))
        _positive("wavelet.level", self.level)


@dataclass(frozen=True)
class SvmConfig:
    kernel_kind: str = "mexican_hat_wavelet"
    # (kernel width a, regularization gamma) couples reported for methods 1, 3 and 4
    method1_params: tuple = (0.0064, 591.9507)
    method3_params: tuple = (0.1245, 639.559)
    method4_params: tuple = (0.0241, 687.4275)
    poly_offset: float = 1.0
    poly_degree: int = 2
    sigmoid_scale: float = 1.0
    tune: bool = False

    def validate(self):
        _choice("svm.kernel_kind", self.kernel_kind, KERNEL_KINDS)
        for key in ("method1_params", "method3_params", "method4_params"):
            val = getattr(self, key)
            if len(val) != 2 or min(val) <= 0:
                raise ConfigError(f"svm.{key} must be two positive numbers (a, gamma)")
        _positive("svm.poly_degree", self.poly_degree)


@dataclass(frozen=True)
class GaConfig:
    population: int = 20
    generations: int = 30
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    mutation_scale: float = 0.1
    blend_alpha: float = 0.5
    rng_seed: int = 0
    eta1: float = 0.3
    eta2: float = 0.7
    a_min: float = 1e-3
    a_max: float = 10.0
    gamma_min: float = 1.0
    gamma_max: float = 2000.0
    calibration_fraction: float = 0.2

    def validate(self):
        if self.population < 2:
            raise ConfigError("ga.population must be >= 2")
        if self.generations < 0:
            raise ConfigError("ga.generations must be >= 0")
        for key in ("crossover_rate", "mutation_rate"):
            if not 0 <= getattr(self, key) <= 1:
                raise ConfigError(f"ga.{key} must lie in [0, 1]")
        if not (0 < self.a_min < self.a_max):
            raise ConfigError("ga.a_min/a_max must satisfy 0 < a_min < a_max")
        if not (0 < self.gamma_min < self.gamma_max):
            raise ConfigError("ga.gamma_min/gamma_max must satisfy 0 < gamma_min < gamma_max")
        if self.eta1 < 0 or self.eta2 < 0 or self.eta1 + self.eta2 == 0:
            raise ConfigError("ga.eta1/eta2 must be nonnegative and not both zero")
        if not 0 < self.calibration_fraction < 1:
            raise ConfigError("ga.calibration_fraction must lie in (0, 1)")

    def normalized(self) -> "GaConfig":
        s = self.eta1 + self.eta2
        if abs(s - 1.0) <= 1e-12:  # already normalized; keep bits so snapshots round-trip
            return self
        return dataclasses.replace(self, eta1=self.eta1 / s, eta2=self.eta2 / s)

    @property
    def bounds(self) -> tuple:
        return ((self.a_min, self.a_max), (self.gamma_min, self.gamma_max))


@dataclass(frozen=True)
class MarkovConfig:
    state_count: int = 5
    partition_rule: str = "quantile"
    max_order: int = 3
    significance: float = 0.05
    midpoint_reading: str = "destination"

    def validate(self):
        if self.state_count < 2:
            raise ConfigError("markov.state_count must be >= 2")
        _choice("markov.partition_rule", self.partition_rule, ("quantile", "equal_width"))
        _choice("markov.midpoint_reading", self.midpoint_reading, ("destination", "source"))
        _positive("markov.max_order", self.max_order)
        if not 0 < self.significance < 1:
            raise ConfigError("markov.significance must lie in (0, 1)")


@dataclass(frozen=True)
class CombineConfig:
    methods: tuple = ("rs", "gro", "grd", "lsm", "ed")
    identification_coefficient: float = 0.5
    rough_set_classes: int = 5
    two_stage_base: tuple = (3, 4)

    def validate(self):
        for m in self.methods:
            _choice("combine.methods", m, COMBINE_METHODS)
        if not 0 < self.identification_coefficient < 1:
            raise ConfigError("combine.identification_coefficient must lie in (0, 1)")
        if self.rough_set_classes < 2:
            raise ConfigError("combine.rough_set_classes must be >= 2")
        if len(self.two_stage_base) != 2 or not all(1 <= m <= 7 for m in self.two_stage_base):
            raise ConfigError("combine.two_stage_base must name two methods in 1..7")


@dataclass(frozen=True)
class EvaluateConfig:
    feasibility_threshold: float = 0.005
    subjective_weights: tuple = (0.15, 0.2, 0.3, 0.2, 0.15)
    theil: str = "printed"

    def validate(self):
        _positive("evaluate.feasibility_threshold", self.feasibility_threshold)
        w = self.subjective_weights
        if len(w) != 5 or min(w) < 0 or sum(w) <= 0:
            raise ConfigError("evaluate.subjective_weights must be 5 nonnegative reals, not all 0")
        _choice("evaluate.theil", self.theil, ("printed", "classical"))

    def normalized(self) -> "EvaluateConfig":
        s = sum(self.subjective_weights)
        if abs(s - 1.0) <= 1e-12:
            return self
        return dataclasses.replace(self, subjective_weights=tuple(x / s for x in self.subjective_weights))


@dataclass(frozen=True)
class RunConfig:
    embedding: EmbeddingConfig = field(default_factory=EmbeddingConfig)
    wavelet: WaveletConfig = field(default_factory=WaveletConfig)
    svm: SvmConfig = field(default_factory=SvmConfig)
    ga: GaConfig = field(default_factory=GaConfig)
    markov: MarkovConfig = field(default_factory=MarkovConfig)
    combine: CombineConfig = field(default_factory=CombineConfig)
    evaluate: EvaluateConfig = field(default_factory=EvaluateConfig)

    def __post_init__(self):
        for f in dataclasses.fields(self):
            getattr(self, f.name).validate()
        # normalize the weight-like sections so every consumer sees sums of 1
        object.__setattr__(self, "ga", self.ga.normalized())
        object.__setattr__(self, "evaluate", self.evaluate.normalized())

    def to_text(self) -> str:
        """Serialize in the loader's format (round-trips through :func:`parse_config`)."""
        lines = []
        for f in dataclasses.fields(self):
            section = getattr(self, f.name)
            for sf in dataclasses.fields(section):
                lines.append(f"{f.name}.{sf.name} = {_format_value(getattr(section, sf.name))}")
        return "\n".join(lines) + "\n"


def _choice(key, value, allowed):
    if value not in allowed:
        raise ConfigError(f"{key}: {value!r} not one of {list(allowed)}")


def _positive(key, value):
    if not value > 0:
        raise ConfigError(f"{key} must be positive, got {value!r}")


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ", ".join(_format_value(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _coerce(key: str, raw: str, default):
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            items = [x.strip() for x in raw.split(",") if x.strip()]
            proto = default[0] if default else ""
            if isinstance(proto, (int, float)) and not isinstance(proto, bool):
                return tuple(type(proto)(x) if isinstance(proto, int) else float(x) for x in items)
            return tuple(items)
        return raw
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {type(default).__name__}") from None


def parse_config(text: str, strict: bool = True) -> RunConfig:
    sections = {f.name: f.default_factory() for f in dataclasses.fields(RunConfig)}
    updates: dict[str, dict] = {name: {} for name in sections}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        section, _, name = key.partition(".")
        if section not in sections or name not in {f.name for f in dataclasses.fields(sections[section])}:
            if strict:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            continue
        updates[section][name] = _coerce(key, raw, getattr(sections[section], name))
    built = {}
    for name, default in sections.items():
        try:
            built[name] = dataclasses.replace(default, **updates[name])
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
    return RunConfig(**built)


def load_config(path, strict: bool = True) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"no such config file: {path}")
    return parse_config(path.read_text(), strict=strict)
