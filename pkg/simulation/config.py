"""
This module defines the simulation configuration and loads it from TOML,
JSON or plain ``key=value`` files.

Keys mirror the ``SimConfig`` field names exactly. Validation never stops at
the first problem: every problem found is reported in one ``ConfigError``.
"""
import hashlib
import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from covariance.covmodels import parse_model_spec
from covariance.errors import ConfigError, ModelSpecError
from covariance.pipeline import PipelineSettings

GENERATORS = ("fourier", "spatial")

VARIANCE_SHAPES = ("auto", "exp5", "exp5_half", "exp30_half")

# Fields that change how much is computed but not what a replicate computes.
RUN_KEY_EXCLUDED = ("reps", "workers", "name")

# Execution settings left out of reports, which depend only on the experiment.
REPORT_EXCLUDED = ("workers",)


@dataclass(frozen=True)
class SimConfig:
    """
    One Monte-Carlo experiment.

    Attributes:
        name (str): Label used in reports.
        generator (str): fourier or spatial.
        model (str): Covariance model spec for the spatial generator.
        N (int): Grid size.
        n (int): Number of curves; floor(0.8 N) when omitted.
        sigma_eps (float): Noise level.
        hetero (bool): Heteroscedastic noise.
        variance_shape (str): Noise shape when hetero is set; ``auto`` picks it from the generator.
        knots (str or int): Knot selection method or fixed J_s.
        order (int): Spline order.
        knot_c (float), knot_gamma (float): Knot formula constants.
        h0 (float): Largest lag.
        fve (float): Variance fraction selecting kappa.
        zeta_reps (int): Simulated zeta paths per replicate.
        alphas (tuple): Band levels.
        quad_points (int): Trapezoid abscissae; None means N.
        reps (int): Number of replications.
        seed (int): Root seed.
        series_terms (int): Truncation of the Fourier series in the generator.
        workers (int): Worker processes; None defers to the environment.
    """
    name: str = "simulation"
    generator: str = "fourier"
    model: str = None
    N: int = 50
    n: int = None
    sigma_eps: float = 0.1
    hetero: bool = False
    variance_shape: str = "auto"
    knots: object = "formula"
    order: int = 4
    knot_c: float = 0.8
    knot_gamma: float = 0.375
    h0: float = 0.5
    fve: float = 0.95
    zeta_reps: int = 1000
    alphas: tuple = (0.05, 0.01)
    quad_points: int = None
    reps: int = 200
    seed: int = None
    series_terms: int = 1000
    workers: int = None

    @property
    def model_spec(self):
        return None if self.model is None else parse_model_spec(self.model)

    @property
    def shape(self):
        """Resolved variance shape, or None for homogeneous noise."""
        if not self.hetero:
            return None
        if self.variance_shape != "auto":
            return self.variance_shape
        if self.generator == "fourier":
            return "exp5"
        return "exp5_half" if self.model_spec.family == "spherical" else "exp30_half"

    def pipeline_settings(self):
        return PipelineSettings(
            order=self.order, knots=self.knots, knot_c=self.knot_c, knot_gamma=self.knot_gamma,
            h0=self.h0, fve=self.fve, zeta_reps=self.zeta_reps, alphas=self.alphas,
            quad_points=self.quad_points,
        )

    def to_dict(self):
        result = asdict(self)
        result["alphas"] = list(self.alphas)
        return result

    def report_dict(self):
        """The config as reported: everything except execution settings."""
        return {k: v for k, v in self.to_dict().items() if k not in REPORT_EXCLUDED}

    def run_key(self):
        """SHA-256 of the canonical config, ignoring fields that do not change replicate results."""
        canonical = {k: v for k, v in self.to_dict().items() if k not in RUN_KEY_EXCLUDED}
        payload = json.dumps(canonical, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


_FIELD_NAMES = tuple(f.name for f in fields(SimConfig))


def _is_int(value):
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _check_types(raw, problems):
    """Append type problems to ``problems``; return the keys whose values have the wrong type."""
    mistyped = set()

    def reject(key, message):
        problems.append(message)
        mistyped.add(key)

    int_fields = ("N", "n", "order", "zeta_reps", "quad_points", "reps", "seed",
                  "series_terms", "workers")
    for key in int_fields:
        if key in raw and raw[key] is not None and not _is_int(raw[key]):
            reject(key, f"{key} must be an integer, got {raw[key]!r}")
    for key in ("sigma_eps", "knot_c", "knot_gamma", "h0", "fve"):
        if key in raw and not _is_number(raw[key]):
            reject(key, f"{key} must be a number, got {raw[key]!r}")
    if "hetero" in raw and not isinstance(raw["hetero"], bool):
        reject("hetero", f"hetero must be true or false, got {raw['hetero']!r}")
    for key in ("name", "generator", "variance_shape"):
        if key in raw and not isinstance(raw[key], str):
            reject(key, f"{key} must be a string, got {raw[key]!r}")
    if "model" in raw and raw["model"] is not None and not isinstance(raw["model"], str):
        reject("model", f"model must be a string such as 'gaussian:sill=2,range=3', "
                        f"got {raw['model']!r}")
    if "alphas" in raw:
        alphas = raw["alphas"]
        if not isinstance(alphas, (list, tuple)) or not all(_is_number(a) for a in alphas):
            reject("alphas", f"alphas must be a list of numbers, got {alphas!r}")
    return mistyped



def _check_values(values, problems, mistyped=()):
    if values["generator"] not in GENERATORS:
        problems.append(
            f"generator must be one of {', '.join(GENERATORS)}, got {values['generator']!r}")
    if values["generator"] == "spatial":
        if values["model"] is None:
            problems.append("spatial generator needs a model, e.g. 'spherical:sill=2,range=1'")
        else:
            try:
                parse_model_spec(values["model"])
            except ModelSpecError as err:
                problems.append(str(err))
    elif values["model"] is not None:
        problems.append("model only applies to the spatial generator")
    if values["variance_shape"] not in VARIANCE_SHAPES:
        problems.append(f"variance_shape must be one of {', '.join(VARIANCE_SHAPES)}, "
                        f"got {values['variance_shape']!r}")
    if _is_int(values["N"]) and values["N"] < 4:
        problems.append(f"N must be at least 4, got {values['N']}")
    if _is_int(values["n"]) and values["n"] < 2:
        problems.append(f"n must be at least 2, got {values['n']}")
    if _is_number(values["sigma_eps"]) and values["sigma_eps"] < 0:
        problems.append(f"sigma_eps must be non-negative, got {values['sigma_eps']}")
    if _is_int(values["reps"]) and values["reps"] < 1:
        problems.append(f"reps must be at least 1, got {values['reps']}")
    if values["seed"] is None and "seed" not in mistyped:
        problems.append("seed is required (set it in the config or pass --seed)")
    elif _is_int(values["seed"]) and values["seed"] < 0:
        problems.append(f"seed must be non-negative, got {values['seed']}")
    if _is_int(values["series_terms"]) and values["series_terms"] < 1:
        problems.append(f"series_terms must be at least 1, got {values['series_terms']}")
    if values["workers"] is not None and _is_int(values["workers"]) and values["workers"] < 1:
        problems.append(f"workers must be at least 1, got {values['workers']}")


def build_config(raw, **overrides):
    """
    Validate a mapping of settings and build a SimConfig.

    Args:
        raw (dict): Keys mirroring SimConfig fields.
        **overrides: Values that replace ``raw`` entries when not None (CLI flags).

    Raises:
        ConfigError: Listing every problem found.
    """
    raw = dict(raw)
    raw.update({k: v for k, v in overrides.items() if v is not None})
    problems = [f"unknown key '{key}'" for key in raw if key not in _FIELD_NAMES]
    raw = {k: v for k, v in raw.items() if k in _FIELD_NAMES}
    mistyped = _check_types(raw, problems)

    # mistyped fields keep their defaults so the remaining value checks still run
    values = {f.name: f.default for f in fields(SimConfig)}
    values.update({k: v for k, v in raw.items() if k not in mistyped})
    if values["n"] is None and _is_int(values["N"]):
        values["n"] = int(math.floor(0.8 * values["N"]))
    values["alphas"] = tuple(float(a) for a in values["alphas"])
    if isinstance(values["knots"], str):
        values["knots"] = values["knots"].lower()
    _check_values(values, problems, mistyped)

    settings_fields = ("order", "knots", "knot_c", "knot_gamma", "h0", "fve",
                       "zeta_reps", "alphas", "quad_points")
    try:
        PipelineSettings(**{key: values[key] for key in settings_fields})
    except ConfigError as err:
        problems.extend(err.problems)
    if _is_int(values["knots"]) and _is_int(values["order"]) and _is_int(values["N"]) \
            and values["knots"] + values["order"] > values["N"]:
        problems.append(f"knots={values['knots']} with order {values['order']} "
                        f"exceeds the grid size N={values['N']}")
    if problems:
        raise ConfigError(problems)
    return SimConfig(**values)


def _parse_scalar(text):
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    # model specs such as gaussian:sill=2,range=3 keep their commas
    if "," in text and ":" not in text:
        return [_parse_scalar(part) for part in text.split(",") if part.strip()]
    return text.strip("'\"")


def parse_key_value(text):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    raw, problems = {}, []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            problems.append(f"line {number}: expected 'key = value', got {line!r}")
            continue
        raw[key.strip()] = _parse_scalar(value)
    if problems:
        raise ConfigError(problems)
    return raw


def read_config_file(path):
    """Raw settings from a .toml, .json or key=value file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError([f"cannot read config file {path}: {err.strerror}"]) from err
    try:
        if path.suffix == ".toml":
            return tomllib.loads(text)
        if path.suffix == ".json":
            return json.loads(text)
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as err:
        raise ConfigError([f"cannot parse {path}: {err}"]) from err
    return parse_key_value(text)


def load_config(path, **overrides):
    """Read, validate and build a SimConfig from ``path``."""
    return build_config(read_config_file(path), **overrides)


