import hashlib
import json
from pathlib import Path

from channel_app.exceptions import InputError
from channel_app.api.serializers import ChannelSerializer, SetSystemSerializer


def read_json_file(path):
    """
    Reads a JSON document from `path`.

    Returns:
        tuple: (parsed document, raw bytes) so callers can digest the exact file.
    """
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(raw), raw
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def deserialize(serializer_class, data, label='input'):
    """
    Runs a serializer over `data` and returns the saved object, turning
    validation errors into InputError.
    """
    serializer = serializer_class(data=data)
    if not serializer.is_valid():
        raise InputError(f"invalid {label}: {json.dumps(serializer.errors, sort_keys=True)}")
    return serializer.save()


def load_channel(path):
    """
    Loads and re-validates a channel file.

    Returns:
        tuple: (Channel, raw file bytes)
    """
    data, raw = read_json_file(path)
    return deserialize(ChannelSerializer, data, label=f'channel file {path}'), raw


def load_set_system(path):
    data, raw = read_json_file(path)
    return deserialize(SetSystemSerializer, data, label=f'set system file {path}'), raw


def channel_to_json(channel):
    return dict(ChannelSerializer(channel).data)


def dumps(document):
    """
    Canonical JSON text used for every payload and file we write.
    """
    return json.dumps(document, indent=2)


def write_json_file(document, path):
    Path(path).write_text(dumps(document) + '\n')


def inputs_digest(params, *blobs):
    """
    sha256 over the given file contents followed by the canonical JSON of the
    command parameters.
    """
    digest = hashlib.sha256()
    for blob in blobs:
        digest.update(blob)
    digest.update(json.dumps(params, sort_keys=True).encode())
    return digest.hexdigest()
