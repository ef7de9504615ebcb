from django.conf import settings
from rest_framework import serializers

from .models import ExperimentConfig, ProblemSpec, SolverSpec
from .problems import MIN_SIZE, PROBLEMS
from .solvers import SOLVER_NAMES

UNSHIFTED_SOLVERS = ("gmres", "qmr", "tsvd")


def default_eta():
    return settings.KRR_DEFAULT_ETA


def default_max_iter():
    return settings.KRR_DEFAULT_MAX_ITER


class ProblemSerializer(serializers.Serializer):
    """Problem name plus its size parameters: n for 1D problems, N/band/sigma for blur2d."""
    name = serializers.ChoiceField(
        choices=sorted(PROBLEMS), error_messages={"invalid_choice": 'unknown problem "{input}"'}
    )
    n = serializers.IntegerField(min_value=MIN_SIZE, default=256)
    N = serializers.IntegerField(min_value=MIN_SIZE, default=32)
    band = serializers.IntegerField(min_value=1, default=6)
    sigma = serializers.FloatField(default=1.5)

    def validate_sigma(self, value):
        if value <= 0:
            raise serializers.ValidationError("sigma must be positive.")
        return value

    def validate(self, data):
        if data["name"] == "blur2d" and data["band"] > data["N"]:
            raise serializers.ValidationError({"band": "band cannot exceed the image side N."})
        return data

    def create(self, validated_data):
        name = validated_data["name"]
        if name == "blur2d":
            params = {key: validated_data[key] for key in ("N", "band", "sigma")}
        else:
            params = {"n": validated_data["n"]}
        return ProblemSpec(name=name, params=params)


class SolverSerializer(serializers.Serializer):
    name = serializers.ChoiceField(
        choices=SOLVER_NAMES, error_messages={"invalid_choice": 'unknown solver "{input}"'}
    )
    shifts = serializers.ListField(
        child=serializers.IntegerField(min_value=0), required=False, allow_empty=False
    )

    def to_internal_value(self, data):
        # "gmres" is shorthand for {"name": "gmres"}
        if isinstance(data, str):
            data = {"name": data}
        return super().to_internal_value(data)

    def validate(self, data):
        name = data["name"]
        shifts = data.get("shifts")
        if shifts is None:
            shifts = [1] if name.startswith("rr") else [0]
        if name in UNSHIFTED_SOLVERS and any(shifts):
            raise serializers.ValidationError({"shifts": f"{name} takes no shift; use rr{name}."})
        data["shifts"] = list(dict.fromkeys(shifts))
        return data


class ExperimentConfigSerializer(serializers.Serializer):
    problem = ProblemSerializer()
    solvers = SolverSerializer(many=True, allow_empty=False)
    noise_levels_percent = serializers.ListField(
        child=serializers.FloatField(min_value=0.0), allow_empty=False
    )
    assumed_noise_levels_percent = serializers.ListField(
        child=serializers.FloatField(min_value=0.0), required=False, allow_null=True, default=None
    )
    seeds = serializers.ListField(child=serializers.IntegerField(min_value=0), allow_empty=False)
    eta = serializers.FloatField(default=default_eta)
    max_iter = serializers.IntegerField(min_value=1, default=default_max_iter)
    output_dir = serializers.CharField(default="results")
    write_plots = serializers.BooleanField(default=True)

    def validate_eta(self, value):
        if value <= 1.0:
            raise serializers.ValidationError("eta must exceed 1.")
        return value

    def validate_seeds(self, value):
        if len(set(value)) != len(value):
            raise serializers.ValidationError("seeds must be unique.")
        return value

    def validate_noise_levels_percent(self, value):
        if len(set(value)) != len(value):
            raise serializers.ValidationError("noise levels must be unique.")
        return value

    def validate(self, data):
        assumed = data.get("assumed_noise_levels_percent")
        if assumed is not None and len(assumed) != len(data["noise_levels_percent"]):
            raise serializers.ValidationError({
                "assumed_noise_levels_percent": "must pair one assumed level with each noise level."
            })
        seen = set()
        for solver in data["solvers"]:
            for shift in solver["shifts"]:
                key = (solver["name"], shift)
                if key in seen:
                    raise serializers.ValidationError({"solvers": f"{key[0]} with shift {shift} listed twice."})
                seen.add(key)
        return data

    def create(self, validated_data):
        problem = ProblemSerializer().create(validated_data["problem"])
        solvers = tuple(
            SolverSpec(name=solver["name"], ell=shift)
            for solver in validated_data["solvers"]
            for shift in solver["shifts"]
        )
        assumed = validated_data.get("assumed_noise_levels_percent")
        return ExperimentConfig(
            problem=problem,
            solvers=solvers,
            noise_levels_percent=tuple(validated_data["noise_levels_percent"]),
            assumed_noise_levels_percent=tuple(assumed) if assumed is not None else None,
            seeds=tuple(validated_data["seeds"]),
            eta=validated_data["eta"],
            max_iter=validated_data["max_iter"],
            output_dir=validated_data["output_dir"],
            write_plots=validated_data["write_plots"],
        )


def flatten_errors(detail, prefix=""):
    """Turn a nested DRF error structure into 'field.path: message' lines."""
    if isinstance(detail, dict):
        lines = []
        for key, value in detail.items():
            path = f"{prefix}.{key}" if prefix else str(key)
            lines.extend(flatten_errors(value, path))
        return lines
    if isinstance(detail, list):
        if all(not isinstance(item, (dict, list)) for item in detail):
            return [f"{prefix}: {item}" if prefix else str(item) for item in detail]
        lines = []
        for index, item in enumerate(detail):
            if item:
                lines.extend(flatten_errors(item, f"{prefix}.{index}" if prefix else str(index)))
        return lines
    return [f"{prefix}: {detail}" if prefix else str(detail)]
