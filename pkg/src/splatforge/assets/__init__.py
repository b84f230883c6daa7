"""Bit-exact persistence: splat assets, PLY, pointmaps, manifests, images."""

from .images import read_pfm, read_png, write_pfm, write_png
from .manifest import (
    MANIFEST_VERSION,
    SceneManifest,
    manifest_from_json,
    manifest_to_json,
    read_manifest,
    write_manifest,
)
from .ply import PLY_PROPERTIES, export_ply, import_ply
from .pointmaps import (
    decode_pointmap,
    encode_pointmap,
    read_pointmap,
    write_pointmap,
)
from .splat import (
    CHUNK_SIZE,
    PER_GAUSSIAN_BYTES,
    decode_splat,
    encode_splat,
    export_splat,
    import_splat,
)

__all__ = [
    "CHUNK_SIZE",
    "MANIFEST_VERSION",
    "PER_GAUSSIAN_BYTES",
    "PLY_PROPERTIES",
    "SceneManifest",
    "decode_pointmap",
    "decode_splat",
    "encode_pointmap",
    "encode_splat",
    "export_ply",
    "export_splat",
    "import_ply",
    "import_splat",
    "manifest_from_json",
    "manifest_to_json",
    "read_manifest",
    "read_pfm",
    "read_png",
    "read_pointmap",
    "write_manifest",
    "write_pfm",
    "write_png",
    "write_pointmap",
]
