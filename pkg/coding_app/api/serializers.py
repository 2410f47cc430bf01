import numpy as np
from rest_framework import serializers

from channel_app.exceptions import InputError
from coding_app import hypothesis_testing
from coding_app.metaconverse import LPSolution


class FloatVectorField(serializers.ListField):
    child = serializers.FloatField()


class FloatMatrixField(serializers.ListField):
    child = FloatVectorField()


class CodeSerializer(serializers.Serializer):
    """
    Serializer for a deterministic code: codewords in message order and the
    decoded message of every output.
    """
    k = serializers.IntegerField(read_only=True)
    codewords = serializers.ListField(child=serializers.IntegerField(), read_only=True)
    decoder = serializers.ListField(child=serializers.IntegerField(), read_only=True)


class LPSolutionSerializer(serializers.Serializer):
    """
    LP solution JSON: {"k": ..., "value": ..., "p": [...], "r": [[...]]}.
    Saving returns a checked LPSolution.
    """
    k = serializers.IntegerField(min_value=1)
    value = serializers.FloatField()
    p = FloatVectorField(allow_empty=False)
    r = FloatMatrixField(allow_empty=False)

    def validate(self, attrs):
        try:
            attrs['solution'] = LPSolution(
                r=np.array(attrs['r'], dtype=float),
                p=np.array(attrs['p'], dtype=float),
                value=attrs['value'],
                k=attrs['k'],
            ).check()
        except (InputError, ValueError) as exc:
            raise serializers.ValidationError({"r": str(exc)}) from exc
        return attrs

    def create(self, validated_data):
        return validated_data['solution']


class NSBoxSerializer(serializers.Serializer):
    """
    Full four-index table P(x, j | i, y) with both marginals.
    """
    k = serializers.IntegerField(read_only=True)
    probs = serializers.SerializerMethodField()
    marginal_a = serializers.SerializerMethodField()
    marginal_b = serializers.SerializerMethodField()

    def get_probs(self, obj):
        return obj.probs.tolist()

    def get_marginal_a(self, obj):
        return obj.marginal_a.tolist()

    def get_marginal_b(self, obj):
        return obj.marginal_b.tolist()


class DistributionSerializer(serializers.Serializer):
    """
    Distribution JSON file: {"probs": [...]}. Saving returns the validated vector.
    """
    probs = FloatVectorField(allow_empty=False)

    def validate(self, attrs):
        try:
            attrs['distribution'] = hypothesis_testing.as_distribution(attrs['probs'])
        except InputError as exc:
            raise serializers.ValidationError({"probs": str(exc)}) from exc
        return attrs

    def create(self, validated_data):
        return validated_data['distribution']


class HypothesisInstanceSerializer(serializers.Serializer):
    p = FloatVectorField(read_only=True)
    q = FloatVectorField(read_only=True)
    alpha = serializers.FloatField(read_only=True)
    test = FloatVectorField(read_only=True)
    beta = serializers.FloatField(read_only=True)


class ChannelTestSerializer(serializers.Serializer):
    """
    A test T(x, y) with its input distribution mu and value.
    """
    k = serializers.IntegerField(read_only=True)
    value = serializers.FloatField(read_only=True)
    mu = FloatVectorField(read_only=True)
    test = FloatMatrixField(read_only=True)


class MinMaxReportSerializer(serializers.Serializer):
    k = serializers.IntegerField(read_only=True)
    ns_value = serializers.FloatField(read_only=True)
    target = serializers.FloatField(read_only=True)
    at_lp_mu = serializers.FloatField(read_only=True)
    sampled = FloatVectorField(read_only=True)
    seed = serializers.IntegerField(read_only=True)
    optimum_matches = serializers.BooleanField(read_only=True)
    samples_dominate = serializers.BooleanField(read_only=True)
    passed = serializers.BooleanField(read_only=True)


class RoundingReportSerializer(serializers.Serializer):
    """
    Serializer for a randomised rounding run; the seed is always recorded.
    """
    l = serializers.IntegerField(read_only=True)
    k = serializers.IntegerField(read_only=True)
    exact_expectation = serializers.FloatField(read_only=True)
    mc_mean = serializers.FloatField(read_only=True)
    mc_stddev = serializers.FloatField(read_only=True)
    mc_trials = serializers.IntegerField(read_only=True)
    standard_error = serializers.FloatField(read_only=True)
    bound = serializers.FloatField(read_only=True)
    ns_value = serializers.FloatField(read_only=True)
    seed = serializers.IntegerField(read_only=True)
    consistent = serializers.SerializerMethodField()

    def get_consistent(self, obj):
        return obj.consistent()


class CheckSerializer(serializers.Serializer):
    name = serializers.CharField(read_only=True)
    lhs = serializers.FloatField(read_only=True)
    rhs = serializers.FloatField(read_only=True)
    residual = serializers.FloatField(read_only=True)
    passed = serializers.BooleanField(read_only=True)


class BoundReportSerializer(serializers.Serializer):
    """
    Serializer for a bound verification with every named check and its residual.
    """
    channel = serializers.CharField(read_only=True)
    k = serializers.IntegerField(read_only=True)
    l = serializers.IntegerField(read_only=True)
    s_exact = serializers.FloatField(read_only=True)
    s_greedy = serializers.FloatField(read_only=True)
    s_ns_k = serializers.FloatField(read_only=True)
    s_ns_l = serializers.FloatField(read_only=True)
    rounding_expectation = serializers.FloatField(read_only=True)
    ratio = serializers.FloatField(read_only=True)
    checks = CheckSerializer(many=True, read_only=True)
    passed = serializers.BooleanField(read_only=True)


class SweepRowSerializer(serializers.Serializer):
    """
    One row of the sweep table: l, s_method, s_value, s_ns, method.
    """
    l = serializers.IntegerField(read_only=True)
    s_method = serializers.CharField(read_only=True)
    s_value = serializers.FloatField(read_only=True)
    s_ns = serializers.FloatField(read_only=True)
    method = serializers.CharField(read_only=True)
