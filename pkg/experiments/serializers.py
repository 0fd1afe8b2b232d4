"""
Serializers for experiment configuration files.

A config is a flat INI file with the sections [problem], [nonlinearity], [solver],
[continuation], [checks] and [run]. Every key is optional; missing keys take the
defaults below or the LAB_DEFAULTS setting.
"""

import ast
import configparser
import hashlib
import json
import math
import operator
import re
from dataclasses import dataclass, field

from django.conf import settings
from rest_framework import serializers

from core.exceptions import ConfigError, LabError
from spectral.params import KAPPA_EXPLICIT, KAPPA_MODES, ProblemParams
from variational.hypotheses import SamplerConfig
from variational.nonlinearities import Nonlinearity, builtin_nonlinearity, parse_label
from variational.refine import SolverOptions

SECTIONS = ("problem", "nonlinearity", "solver", "continuation", "checks", "run")

_OPERATORS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}
_NAMES = {"pi": math.pi}
_GEOMETRIC_RE = re.compile(r"^\s*geometric\s*:(?P<start>[^:]+):(?P<ratio>[^:]+):(?P<count>\s*\d+\s*)$")


def evaluate_expression(text: str) -> float:
    """
    Arithmetic on numbers and `pi` only, e.g. "2*pi" or "2**-6".
    """

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _OPERATORS:
            return _OPERATORS[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPERATORS:
            return _OPERATORS[type(node.op)](walk(node.operand))
        raise ValueError(f"unsupported expression {text!r}")

    try:
        return float(walk(ast.parse(text.strip(), mode="eval")))
    except (SyntaxError, ZeroDivisionError, OverflowError, TypeError) as exc:
        raise ValueError(f"cannot evaluate {text!r}") from exc


class ExpressionField(serializers.FloatField):
    """
    FloatField that also accepts arithmetic expressions in `pi`.
    """

    def to_internal_value(self, data):
        if isinstance(data, str):
            try:
                data = evaluate_expression(data)
            except ValueError as exc:
                raise serializers.ValidationError(str(exc)) from exc
        return super().to_internal_value(data)


class ExpressionListField(serializers.ListField):
    child = ExpressionField()

    def to_internal_value(self, data):
        if isinstance(data, str):
            data = [item for item in data.split(",") if item.strip()]
        return tuple(super().to_internal_value(data))


class ScheduleField(serializers.Field):
    """
    A comma list of masses, or `geometric:start:ratio:count`.
    """

    def to_internal_value(self, data):
        if not isinstance(data, str):
            data = ",".join(str(item) for item in data)
        try:
            match = _GEOMETRIC_RE.match(data)
            if match:
                start = evaluate_expression(match["start"])
                ratio = evaluate_expression(match["ratio"])
                count = int(match["count"])
                if count < 1:
                    raise serializers.ValidationError("geometric schedule needs at least one mass")
                return tuple(start * ratio**i for i in range(count))
            values = tuple(evaluate_expression(item) for item in data.split(",") if item.strip())
        except ValueError as exc:
            raise serializers.ValidationError(str(exc)) from exc
        if not values:
            raise serializers.ValidationError("schedule is empty")
        return values

    def to_representation(self, value):
        return list(value)


class ProblemSerializer(serializers.Serializer):
    dim = serializers.IntegerField(min_value=1, default=1)
    period = ExpressionField(default=2.0 * math.pi)
    order = ExpressionField(default=0.5)
    mass = ExpressionField(min_value=0.0, default=1.0)
    cutoff = serializers.IntegerField(min_value=1, default=32)
    grid = serializers.IntegerField(min_value=4, default=128)
    kappa_mode = serializers.ChoiceField(choices=KAPPA_MODES, default=KAPPA_EXPLICIT)

    def validate(self, attrs):
        try:
            ProblemParams(**attrs)
        except LabError as exc:
            raise serializers.ValidationError(exc.detail) from exc
        return attrs


class NonlinearitySerializer(serializers.Serializer):
    label = serializers.CharField(default="log_superlinear")
    exponent = ExpressionField(allow_null=True, default=None)

    def validate_label(self, value):
        try:
            parse_label(value)
        except LabError as exc:
            raise serializers.ValidationError(exc.detail) from exc
        return value.strip()


class SolverSerializer(serializers.Serializer):
    cerami_tol = ExpressionField(required=False)
    max_iterations = serializers.IntegerField(min_value=1, required=False)
    mesh_radial = serializers.IntegerField(min_value=2, required=False)
    mesh_angular = serializers.IntegerField(min_value=2, required=False)
    mesh_grading = ExpressionField(required=False)
    max_sweeps = serializers.IntegerField(min_value=1, required=False)
    probe_tol = ExpressionField(required=False)
    level_tol = ExpressionField(required=False)
    dual = serializers.ChoiceField(choices=("dual", "l2"), required=False)

    def validate(self, attrs):
        for name in ("cerami_tol", "mesh_grading", "probe_tol", "level_tol"):
            if name in attrs and not attrs[name] > 0:
                raise serializers.ValidationError({name: "must be positive"})
        return attrs


class ContinuationSerializer(serializers.Serializer):
    schedule = ScheduleField(default=tuple(2.0**-i for i in range(1, 7)))
    warm_start = serializers.BooleanField(default=True)


class ChecksSerializer(serializers.Serializer):
    samples = serializers.IntegerField(min_value=1, required=False)
    t_max = ExpressionField(required=False)
    epsilons = ExpressionListField(required=False)
    amplitudes = ExpressionListField(required=False)
    deltas = ExpressionListField(required=False)

    def validate(self, attrs):
        if "t_max" in attrs and not attrs["t_max"] > 0:
            raise serializers.ValidationError({"t_max": "must be positive"})
        for name in ("epsilons", "amplitudes", "deltas"):
            if any(not value > 0 for value in attrs.get(name, ())):
                raise serializers.ValidationError({name: "values must be positive"})
        return attrs


class RunSerializer(serializers.Serializer):
    seed = serializers.IntegerField(min_value=0, required=False)
    output_dir = serializers.CharField(required=False)


class RunConfigSerializer(serializers.Serializer):
    problem = ProblemSerializer()
    nonlinearity = NonlinearitySerializer()
    solver = SolverSerializer()
    continuation = ContinuationSerializer()
    checks = ChecksSerializer()
    run = RunSerializer()


@dataclass(frozen=True)
class RunConfig:
    """
    A validated experiment configuration.
    """

    problem: dict
    nonlinearity: dict
    solver: dict = field(default_factory=dict)
    continuation: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    run: dict = field(default_factory=dict)
    text: str = ""

    @property
    def params(self) -> ProblemParams:
        return ProblemParams(**self.problem)

    @property
    def seed(self) -> int:
        return self.run.get("seed", settings.LAB_DEFAULT_SEED)

    @property
    def output_dir(self):
        return self.run.get("output_dir") or str(settings.LAB_OUTPUT_ROOT)

    @property
    def schedule(self) -> tuple:
        return tuple(self.continuation["schedule"])

    @property
    def warm_start(self) -> bool:
        return self.continuation["warm_start"]

    def build_nonlinearity(self) -> Nonlinearity:
        return builtin_nonlinearity(
            self.nonlinearity["label"], exponent=self.nonlinearity.get("exponent"), period=self.problem["period"]
        )

    def solver_options(self, tol: float = None) -> SolverOptions:
        return SolverOptions.from_settings(**{**self.solver, "cerami_tol": tol or self.solver.get("cerami_tol")})

    def sampler(self) -> SamplerConfig:
        overrides = {key: self.checks.get(key) for key in ("samples", "t_max", "epsilons", "amplitudes")}
        return SamplerConfig.from_settings(**overrides)

    @property
    def deltas(self) -> tuple:
        return tuple(self.checks.get("deltas") or settings.LAB_DEFAULTS["deltas"])

    def with_overrides(self, seed: int = None, tol: float = None, output_dir: str = None) -> "RunConfig":
        run = dict(self.run)
        solver = dict(self.solver)
        if seed is not None:
            run["seed"] = seed
        if output_dir is not None:
            run["output_dir"] = str(output_dir)
        if tol is not None:
            solver["cerami_tol"] = tol
        return RunConfig(self.problem, self.nonlinearity, solver, self.continuation, self.checks, run, self.text)

    def normalized(self) -> dict:
        """
        Everything that changes results, in a canonical form. The output directory is left out.
        """
        run = {key: value for key, value in self.run.items() if key != "output_dir"}
        run.setdefault("seed", self.seed)
        data = {
            "problem": self.problem,
            "nonlinearity": self.nonlinearity,
            "solver": self.solver,
            "continuation": {**self.continuation, "schedule": list(self.schedule)},
            "checks": {key: list(value) if isinstance(value, tuple) else value for key, value in self.checks.items()},
            "run": run,
        }
        return json.loads(json.dumps(data, sort_keys=True))

    @property
    def config_hash(self) -> str:
        payload = json.dumps(self.normalized(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()


def _key_lines(text: str) -> dict:
    """
    Maps (section, key) to the 1-based line where the key is set.
    """
    lines = {}
    section = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            lines.setdefault((section, None), number)
            continue
        key = re.split(r"[=:]", line, maxsplit=1)[0].strip().lower()
        lines[(section, key)] = number
    return lines


def _first_error(errors, prefix: tuple = ()) -> tuple:
    """
    Depth-first (path, message) of the first DRF error.
    """
    if isinstance(errors, dict):
        for key in errors:
            path = prefix if key == "non_field_errors" else prefix + (key,)
            return _first_error(errors[key], path)
    if isinstance(errors, list) and errors:
        return _first_error(errors[0], prefix)
    return prefix, str(errors)


def parse_config(text: str) -> RunConfig:
    """
    Parses and validates an INI experiment configuration. Raises ConfigError naming the field
    and, when it can be located, the line.
    """
    parser = configparser.ConfigParser(interpolation=None, default_section="__defaults__")
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], line=getattr(exc, "lineno", None)) from exc

    lines = _key_lines(text)
    unknown = [name for name in parser.sections() if name.lower() not in SECTIONS]
    if unknown:
        raise ConfigError("unknown section", field=unknown[0], line=lines.get((unknown[0].lower(), None)))

    data = {name: {} for name in SECTIONS}
    data.update({name.lower(): dict(parser.items(name)) for name in parser.sections()})
    for section, values in data.items():
        known = RunConfigSerializer().fields[section].fields
        for key in values:
            if key not in known:
                raise ConfigError("unknown key", field=f"{section}.{key}", line=lines.get((section, key)))

    serializer = RunConfigSerializer(data=data)
    if not serializer.is_valid():
        path, message = _first_error(serializer.errors)
        section = path[0] if path else None
        key = path[1] if len(path) > 1 else None
        line = lines.get((section, key)) or lines.get((section, None))
        raise ConfigError(message, field=".".join(path) or None, line=line)

    attrs = serializer.validated_data
    solver = {key: value for key, value in attrs["solver"].items() if value is not None}
    return RunConfig(
        problem=dict(attrs["problem"]),
        nonlinearity=dict(attrs["nonlinearity"]),
        solver=solver,
        continuation=dict(attrs["continuation"]),
        checks=dict(attrs["checks"]),
        run=dict(attrs["run"]),
        text=text,
    )


def load_config(path) -> RunConfig:
    try:
        with open(path) as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(text)
