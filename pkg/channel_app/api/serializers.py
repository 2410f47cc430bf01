from rest_framework import serializers

from channel_app import channels
from channel_app.exceptions import InputError


class ChannelSerializer(serializers.Serializer):
    """
    Channel JSON file: {"name": ..., "x": |X|, "y": |Y|, "rows": [[W(y|x) ...] per x]}.
    Saving returns a validated, immutable Channel.
    """
    name = serializers.CharField(required=False, allow_blank=True, default='')
    x = serializers.IntegerField(min_value=1, source='x_size')
    y = serializers.IntegerField(min_value=1, source='y_size')
    rows = serializers.ListField(
        child=serializers.ListField(child=serializers.FloatField()),
        source='w',
    )

    def validate(self, attrs):
        """
        The declared alphabet sizes must match the matrix, and the matrix must
        be a channel.
        """
        rows = attrs['w']
        if len(rows) != attrs['x_size']:
            raise serializers.ValidationError(
                {"rows": f"expected {attrs['x_size']} rows, found {len(rows)}"}
            )
        for x, row in enumerate(rows):
            if len(row) != attrs['y_size']:
                raise serializers.ValidationError(
                    {"rows": f"row {x} has {len(row)} entries, expected {attrs['y_size']}"}
                )
        try:
            attrs['channel'] = channels.validate(rows, name=attrs.get('name', ''))
        except InputError as exc:
            raise serializers.ValidationError({"rows": str(exc)}) from exc
        return attrs

    def create(self, validated_data):
        return validated_data['channel']


class SetSystemSerializer(serializers.Serializer):
    """
    SetSystem JSON file: {"ground": |Y|, "d": d, "sets": [[element ...] per x]}.
    """
    ground = serializers.IntegerField(min_value=1, source='ground_size')
    d = serializers.IntegerField(min_value=1, source='uniform_size')
    sets = serializers.ListField(
        child=serializers.ListField(child=serializers.IntegerField(min_value=0)),
        allow_empty=False,
    )

    def validate(self, attrs):
        try:
            attrs['system'] = channels.SetSystem(
                ground_size=attrs['ground_size'],
                sets=tuple(tuple(members) for members in attrs['sets']),
                uniform_size=attrs['uniform_size'],
            )
        except InputError as exc:
            raise serializers.ValidationError({"sets": str(exc)}) from exc
        return attrs

    def create(self, validated_data):
        return validated_data['system']
