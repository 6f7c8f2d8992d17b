"""Reader, writer and validator for the chunked binary ``.plex`` mesh format.

File layout (little-endian throughout):

* global header: magic ``PLEX`` + uint32 format version (currently 1)
* a sequence of chunks: 4-char type code, uint64 payload length, payload,
  then a CRC-32 over the type code and payload bytes (ISO-HDLC polynomial,
  the familiar zlib/PNG CRC).

Standard chunks are META (fixed layout, see ``pack_meta``), VERT/VERD
(vertex coordinates, float32/float64, a bare contiguous V*N array with no
counts), FACE (uint64 facet count then uint32 vertex indices), NORM/NRMD
(facet normals, VERT-style layout) and optional CENT/CNTD (cached facet
centroids). Any type code containing a lowercase letter is a custom chunk;
readers skip and report chunk types they do not understand, so files with
future extensions still load.
"""
from __future__ import annotations

import json
import struct
import time
import zlib
from dataclasses import dataclass, field

import numpy as np

from .mesh import NMesh, facet_centroids

__all__ = [
    "MAGIC",
    "FORMAT_VERSION",
    "PlexError",
    "BadMagic",
    "BadCrc",
    "MissingRequiredChunk",
    "TruncatedChunk",
    "MetaMismatch",
    "FormatCapacity",
    "PlexMeta",
    "PlexFile",
    "crc32",
    "is_custom_chunk",
    "pack_meta",
    "unpack_meta",
    "write_plex",
    "read_plex",
    "to_json",
]

MAGIC = b"PLEX"
FORMAT_VERSION = 1

_META_STRUCT = struct.Struct("<iIQQQB3xI")  # ends at offset 0x28, then the name
_CHUNK_HEAD = struct.Struct("<4sQ")

PRECISION_SINGLE = 0
PRECISION_DOUBLE = 1


class PlexError(ValueError):
    """Malformed or inconsistent .plex data."""


class BadMagic(PlexError):
    pass


class BadCrc(PlexError):
    def __init__(self, chunk_type: str):
        super().__init__(f"CRC mismatch in chunk {chunk_type!r}")
        self.chunk_type = chunk_type


class MissingRequiredChunk(PlexError):
    def __init__(self, chunk_type: str):
        super().__init__(f"required chunk {chunk_type!r} missing")
        self.chunk_type = chunk_type


class TruncatedChunk(PlexError):
    pass


class MetaMismatch(PlexError):
    pass


class FormatCapacity(PlexError):
    pass


def crc32(data: bytes) -> int:
    """CRC-32/ISO-HDLC (reflected, poly 0x04C11DB7, init/xorout all-ones)."""
    return zlib.crc32(data) & 0xFFFFFFFF


def is_custom_chunk(type_code: str) -> bool:
    """Codes with any lowercase letter are reserved for custom chunks."""
    return any(c.islower() for c in type_code)


@dataclass
class PlexMeta:
    dimension: int
    vertex_count: int
    created: int
    modified: int
    precision_flag: int
    software_name: str = "hullspace"
    reserved0: int = 0


def pack_meta(meta: PlexMeta) -> bytes:
    name = meta.software_name.encode("utf-8")
    return _META_STRUCT.pack(
        meta.dimension,
        meta.reserved0,
        meta.vertex_count,
        meta.created,
        meta.modified,
        meta.precision_flag,
        len(name),
    ) + name


def unpack_meta(payload: bytes) -> PlexMeta:
    if len(payload) < _META_STRUCT.size:
        raise TruncatedChunk("META payload shorter than its fixed layout")
    dim, reserved0, vcount, created, modified, precision, name_len = _META_STRUCT.unpack_from(payload)
    if precision not in (PRECISION_SINGLE, PRECISION_DOUBLE):
        raise MetaMismatch(f"precision flag must be 0 or 1, got {precision}")
    name_bytes = payload[_META_STRUCT.size : _META_STRUCT.size + name_len]
    if len(name_bytes) != name_len:
        raise TruncatedChunk("META software name runs past the payload")
    return PlexMeta(
        dimension=dim,
        vertex_count=vcount,
        created=created,
        modified=modified,
        precision_flag=precision,
        software_name=name_bytes.decode("utf-8"),
        reserved0=reserved0,
    )


def _chunk(type_code: bytes, payload: bytes) -> bytes:
    return (
        _CHUNK_HEAD.pack(type_code, len(payload))
        + payload
        + struct.pack("<I", crc32(type_code + payload))
    )


def write_plex(
    mesh: NMesh,
    precision: str = "double",
    software: str = "hullspace",
    created: int | None = None,
    modified: int | None = None,
    with_centroids: bool = False,
    extra_chunks: list[tuple[str, bytes]] | None = None,
) -> bytes:
    """Serialize a mesh. Timestamps can be injected for deterministic output."""
    if precision not in ("single", "double"):
        raise ValueError("precision must be 'single' or 'double'")
    if mesh.vertex_count >= 1 << 32:
        raise FormatCapacity("vertex count exceeds 32-bit facet index space")
    now = int(time.time())
    meta = PlexMeta(
        dimension=mesh.dim,
        vertex_count=mesh.vertex_count,
        created=now if created is None else created,
        modified=now if modified is None else modified,
        precision_flag=PRECISION_SINGLE if precision == "single" else PRECISION_DOUBLE,
        software_name=software,
    )
    fdtype = "<f4" if precision == "single" else "<f8"

    out = [MAGIC, struct.pack("<I", FORMAT_VERSION)]
    out.append(_chunk(b"META", pack_meta(meta)))
    vert_code = b"VERT" if precision == "single" else b"VERD"
    out.append(_chunk(vert_code, mesh.vertices.astype(fdtype).tobytes()))
    face_payload = struct.pack("<Q", mesh.facet_count) + mesh.facets.astype("<u4").tobytes()
    out.append(_chunk(b"FACE", face_payload))
    norm_code = b"NORM" if precision == "single" else b"NRMD"
    out.append(_chunk(norm_code, mesh.normals.astype(fdtype).tobytes()))
    if with_centroids:
        cent_code = b"CENT" if precision == "single" else b"CNTD"
        out.append(_chunk(cent_code, facet_centroids(mesh).astype(fdtype).tobytes()))
    for code, payload in extra_chunks or ():
        code_b = code.encode("ascii")
        if len(code_b) != 4:
            raise ValueError(f"chunk type code must be 4 ASCII characters, got {code!r}")
        out.append(_chunk(code_b, payload))
    return b"".join(out)


@dataclass
class PlexFile:
    mesh: NMesh
    meta: PlexMeta
    skipped_chunks: list[str] = field(default_factory=list)
    custom_chunks: dict[str, bytes] = field(default_factory=dict)


def _iter_chunks(data: bytes):
    pos = 8
    end = len(data)
    while pos < end:
        if pos + _CHUNK_HEAD.size > end:
            raise TruncatedChunk("chunk header runs past end of file")
        code, length = _CHUNK_HEAD.unpack_from(data, pos)
        pos += _CHUNK_HEAD.size
        if pos + length + 4 > end:
            raise TruncatedChunk(f"chunk {code!r} payload runs past end of file")
        payload = data[pos : pos + length]
        pos += length
        (crc,) = struct.unpack_from("<I", data, pos)
        pos += 4
        try:
            code_str = code.decode("ascii")
        except UnicodeDecodeError as exc:
            raise PlexError(f"chunk type {code!r} is not ASCII") from exc
        if crc != crc32(code + payload):
            raise BadCrc(code_str)
        yield code_str, payload


def _parse_array(payload: bytes, count: int, dim: int, dtype: str, what: str) -> np.ndarray:
    itemsize = np.dtype(dtype).itemsize
    expect = count * dim * itemsize
    if len(payload) != expect:
        raise MetaMismatch(
            f"{what} payload holds {len(payload)} bytes, expected {expect} "
            f"({count} x {dim} x {itemsize})"
        )
    return np.frombuffer(payload, dtype=dtype).astype(np.float64).reshape(count, dim)


def read_plex(data: bytes) -> PlexFile:
    """Parse and validate a .plex byte string.

    Every chunk's CRC is verified, required chunks must be present, and
    unknown chunk types are skipped with their codes recorded. A cached
    centroid chunk is only trusted after spot-checking eight facets.
    """
    if len(data) < 8 or data[:4] != MAGIC:
        raise BadMagic("not a .plex file (bad magic)")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != FORMAT_VERSION:
        raise PlexError(f"unsupported format version {version}")

    chunks: dict[str, bytes] = {}
    skipped: list[str] = []
    custom: dict[str, bytes] = {}
    known = {"META", "VERT", "VERD", "FACE", "NORM", "NRMD", "CENT", "CNTD"}
    for code, payload in _iter_chunks(data):
        if code in known:
            if code in chunks:
                raise PlexError(f"duplicate chunk {code!r}")
            chunks[code] = payload
        else:
            skipped.append(code)
            if is_custom_chunk(code):
                custom[code] = payload

    if "META" not in chunks:
        raise MissingRequiredChunk("META")
    meta = unpack_meta(chunks["META"])
    if meta.dimension <= 0:
        raise MetaMismatch(f"dimension must be positive, got {meta.dimension}")
    dim = meta.dimension

    single = meta.precision_flag == PRECISION_SINGLE
    vert_code, norm_code, cent_code = ("VERT", "NORM", "CENT") if single else ("VERD", "NRMD", "CNTD")
    fdtype = "<f4" if single else "<f8"
    if vert_code not in chunks:
        raise MissingRequiredChunk(vert_code)
    if "FACE" not in chunks:
        raise MissingRequiredChunk("FACE")
    if norm_code not in chunks:
        raise MissingRequiredChunk(norm_code)

    vertices = _parse_array(chunks[vert_code], meta.vertex_count, dim, fdtype, vert_code)

    face_payload = chunks["FACE"]
    if len(face_payload) < 8:
        raise TruncatedChunk("FACE payload shorter than its facet count field")
    (facet_count,) = struct.unpack_from("<Q", face_payload)
    idx_bytes = face_payload[8:]
    if len(idx_bytes) != facet_count * dim * 4:
        raise TruncatedChunk(
            f"FACE payload holds {len(idx_bytes)} index bytes, "
            f"expected {facet_count * dim * 4}"
        )
    facets = np.frombuffer(idx_bytes, dtype="<u4").astype(np.int64).reshape(facet_count, dim)
    if facet_count and facets.max() >= meta.vertex_count:
        raise MetaMismatch("facet index exceeds vertex count")

    normals = _parse_array(chunks[norm_code], facet_count, dim, fdtype, norm_code)

    centroids = None
    if cent_code in chunks:
        cand = _parse_array(chunks[cent_code], facet_count, dim, fdtype, cent_code)
        if _centroids_pass_spot_check(vertices, facets, cand):
            centroids = cand

    mesh = NMesh(dim, vertices, facets, normals, centroids=centroids)
    return PlexFile(mesh=mesh, meta=meta, skipped_chunks=skipped, custom_chunks=custom)


def _centroids_pass_spot_check(vertices, facets, centroids, tol: float = 1e-6) -> bool:
    """Cached centroids are only trusted if 8 sampled facets agree."""
    count = facets.shape[0]
    if count == 0:
        return True
    rng = np.random.default_rng(0x43454E54)  # fixed seed: deterministic reads
    sample = rng.integers(0, count, size=min(8, count))
    expect = vertices[facets[sample]].mean(axis=1)
    return bool(np.max(np.abs(centroids[sample] - expect)) <= tol)


# ---------------------------------------------------------------------------
# One-way JSON export.


def _fmt(value: float, digits: int) -> str:
    return format(value, f".{digits}g")


def to_json(mesh: NMesh, meta: PlexMeta) -> str:
    """Render the mesh as a flat JSON document.

    Doubles carry 17 significant digits and singles 9, which is enough for
    an exact decimal round trip of the underlying binary values.
    """
    digits = 9 if meta.precision_flag == PRECISION_SINGLE else 17
    precision = "single" if meta.precision_flag == PRECISION_SINGLE else "double"

    def rows(arr: np.ndarray) -> str:
        return "[" + ",".join(
            "[" + ",".join(_fmt(x, digits) for x in row) + "]" for row in arr
        ) + "]"

    facet_rows = "[" + ",".join(
        "[" + ",".join(str(int(i)) for i in row) + "]" for row in mesh.facets
    ) + "]"
    return (
        "{"
        f'"dimension":{meta.dimension},'
        f'"vertexCount":{mesh.vertex_count},'
        f'"precision":{json.dumps(precision)},'
        f'"software":{json.dumps(meta.software_name)},'
        f'"vertices":{rows(mesh.vertices)},'
        f'"facets":{facet_rows},'
        f'"normals":{rows(mesh.normals)}'
        "}"
    )
