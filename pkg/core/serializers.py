# core/serializers.py

import json

from rest_framework import serializers
from rest_framework.renderers import JSONRenderer

from .catalog import FUNCTION_KINDS, FunctionSpec, Interval, ModulusSpec
from .conf import jensen_setting
from .exceptions import InputError, JensenError
from .functional import Instance, WeightVector


class StrictSerializer(serializers.Serializer):
    """Rejects keys the serializer does not declare."""

    def to_internal_value(self, data):
        if isinstance(data, dict):
            unknown = sorted(set(data) - set(self.fields))
            if unknown:
                raise serializers.ValidationError({key: ['Unknown field.'] for key in unknown})
        return super().to_internal_value(data)


class FunctionSerializer(StrictSerializer):
    kind = serializers.ChoiceField(choices=FUNCTION_KINDS)
    exponent = serializers.FloatField(required=False, allow_null=True)
    scale = serializers.FloatField(required=False, default=1.0)

    def validate(self, attrs):
        try:
            attrs['spec'] = FunctionSpec(attrs['kind'], attrs.get('exponent'), attrs['scale'])
        except InputError as exc:
            raise serializers.ValidationError(str(exc))
        return attrs


class ModulusSerializer(StrictSerializer):
    kind = serializers.ChoiceField(choices=['power'], required=False, default='power')
    coefficient = serializers.FloatField()
    exponent = serializers.FloatField(required=False, default=2.0)

    def validate(self, attrs):
        try:
            attrs['spec'] = ModulusSpec(attrs['coefficient'], attrs['exponent'])
        except InputError as exc:
            raise serializers.ValidationError(str(exc))
        return attrs


class InstanceFileSerializer(StrictSerializer):
    """
    {"x": [...], "p": [...], "q": [...], "f": {...}, "phi": {...}, "interval": [a, b]}
    p and q default to uniform weights; phi is optional.
    """

    x = serializers.ListField(child=serializers.FloatField(), min_length=2)
    p = serializers.ListField(child=serializers.FloatField(), required=False)
    q = serializers.ListField(child=serializers.FloatField(), required=False)
    f = FunctionSerializer()
    phi = ModulusSerializer(required=False, allow_null=True)
    interval = serializers.ListField(child=serializers.FloatField(), min_length=2, max_length=2)

    def _weights(self, attrs, name):
        n = len(attrs['x'])
        values = attrs.get(name)
        if values is None:
            return WeightVector.uniform(n)
        if len(values) != n:
            raise serializers.ValidationError({name: [f"expected {n} entries to match x, got {len(values)}"]})
        try:
            return WeightVector(tuple(values))
        except InputError as exc:
            raise serializers.ValidationError({name: [str(exc)]})

    def validate(self, attrs):
        p = self._weights(attrs, 'p')
        q = self._weights(attrs, 'q')
        try:
            interval = Interval(*attrs['interval'])
        except InputError as exc:
            raise serializers.ValidationError({'interval': [str(exc)]})
        phi = attrs.get('phi')
        try:
            attrs['instance'] = Instance(
                x=tuple(attrs['x']),
                p=p,
                q=q,
                f=attrs['f']['spec'],
                interval=interval,
                phi=phi['spec'] if phi else None,
            )
        except JensenError as exc:
            raise serializers.ValidationError({'x': [str(exc)]})
        return attrs

    def create(self, validated_data):
        return validated_data['instance']


def flatten_errors(errors, prefix=''):
    """DRF's nested error structure as 'field.sub[index]: message' lines."""
    lines = []
    if isinstance(errors, dict):
        for key, value in errors.items():
            if isinstance(key, int):
                location = f"{prefix}[{key}]"
            elif key == 'non_field_errors':
                location = prefix
            else:
                location = f"{prefix}.{key}" if prefix else str(key)
            lines.extend(flatten_errors(value, location))
    elif isinstance(errors, list):
        for item in errors:
            lines.extend(flatten_errors(item, prefix))
    else:
        lines.append(f"{prefix}: {errors}" if prefix else str(errors))
    return lines


def parse_instance_document(text: str) -> Instance:
    """Parse an InstanceFile; every problem surfaces as an InputError naming its location."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise InputError("instance file must hold a JSON object")
    serializer = InstanceFileSerializer(data=data)
    if not serializer.is_valid():
        raise InputError('; '.join(flatten_errors(serializer.errors)))
    return serializer.save()


class TermSerializer(serializers.Serializer):
    name = serializers.CharField()
    value = serializers.FloatField()


class ReportSerializer(serializers.Serializer):
    theorem = serializers.CharField()
    verdict = serializers.CharField()
    scale = serializers.FloatField()
    tolerance = serializers.SerializerMethodField()
    notes = serializers.ListField(child=serializers.CharField())
    extras = serializers.DictField()

    def get_tolerance(self, obj):
        return obj.tolerance.as_dict()


class BoundReportSerializer(ReportSerializer):
    terms = TermSerializer(many=True)
    slacks = serializers.ListField(child=serializers.FloatField())
    worst_slack = serializers.FloatField()


class RefinementReportSerializer(ReportSerializer):
    gap = TermSerializer()
    terms = TermSerializer(many=True)
    total = serializers.FloatField()
    slack = serializers.FloatField()


class CertificateSerializer(serializers.Serializer):
    kind = serializers.CharField()
    passed = serializers.BooleanField()
    worst_slack = serializers.FloatField()
    worst_at = serializers.ListField(child=serializers.FloatField())
    grid = serializers.ListField(child=serializers.IntegerField())
    function = serializers.CharField()
    modulus = serializers.CharField()


class ViolationSerializer(serializers.Serializer):
    check = serializers.CharField()
    seed = serializers.IntegerField()
    index = serializers.IntegerField()
    slack = serializers.FloatField()
    scale = serializers.FloatField()
    instance = serializers.DictField()


class CampaignSummarySerializer(serializers.Serializer):
    config = serializers.SerializerMethodField()
    theorems = serializers.ListField(child=serializers.CharField())
    trials = serializers.IntegerField()
    passed = serializers.BooleanField()
    violations = ViolationSerializer(many=True)
    stats = serializers.SerializerMethodField()
    skipped = serializers.DictField(child=serializers.IntegerField())
    equality_residuals = serializers.DictField(child=serializers.FloatField())
    worst_normalized_slack = serializers.FloatField(allow_null=True)

    def get_config(self, obj):
        return obj.config.as_dict()

    def get_stats(self, obj):
        return {
            check: {
                'count': s.count,
                'min_normalized': s.min_normalized,
                'median_normalized': s.median_normalized,
            }
            for check, s in obj.stats.items()
        }


class RankedBoundSerializer(serializers.Serializer):
    name = serializers.CharField()
    lower_bound = serializers.FloatField()
    refinement = serializers.FloatField()


class TightnessRankingSerializer(serializers.Serializer):
    gap = serializers.FloatField()
    ranked = RankedBoundSerializer(many=True)
    tightest = serializers.ListField(child=serializers.CharField())
    skipped = serializers.DictField(child=serializers.CharField())


class ComparatorSerializer(serializers.Serializer):
    p1 = serializers.FloatField()
    rhs_pointwise = serializers.FloatField()
    rhs_two_point = serializers.FloatField()
    rhs_two_point_best = serializers.FloatField()
    stronger = serializers.CharField()
    phi_over_square_increasing = serializers.BooleanField()


def report_document(command, verdict, payload, instance=None, seed=None, tolerance=None):
    """Envelope shared by every command's machine-readable output."""
    document = {
        'tool': 'jensenlab',
        'version': jensen_setting('VERSION'),
        'command': command,
        'verdict': verdict,
    }
    if instance is not None:
        document['instance'] = instance.as_dict()
    if tolerance is not None:
        document['tolerance'] = tolerance.as_dict()
    if seed is not None:
        document['seed'] = seed
    document.update(payload)
    return document


def render_json(document) -> str:
    return JSONRenderer().render(document, renderer_context={'indent': 2}).decode('utf-8')
