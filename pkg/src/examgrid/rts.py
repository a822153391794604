"""RTS container: named typed entries, DEFLATE, passkey encryption, integrity tag.

Layout (little-endian):

    magic "RTS1" (4) | flags u8 (bit0 = encrypted)
    [salt 16 | nonce 16]              only when encrypted
    body_len u64 | body (body_len)
    [tag 32]                          only when encrypted

Body, plaintext or ciphertext of:

    entry_count u16, then per entry:
      name_len u16 | name UTF-8 | type_tag u8 | method u8
      raw_len u64 | stored_len u64 | crc32 u32 | payload (stored_len)

Key derivation is an iterated SHA-256 chain over (salt, passkey); the body
cipher XORs SHA-256 counter-mode keystream blocks; the tag is HMAC-SHA256
over everything after the magic, keyed separately from the cipher. This is
a desk-scale posture built from one hash primitive, not production crypto.
"""

from __future__ import annotations

import enum
import hashlib
import hmac as _hmac
import secrets
import struct
import zlib
from dataclasses import dataclass

MAGIC = b"RTS1"
KDF_ITERATIONS = 10000
_FLAG_ENCRYPTED = 0x01


class TypeTag(enum.IntEnum):
    OTHER = 0
    VQP = 1
    MEDIA = 2
    ENVREC = 3


class Method(enum.IntEnum):
    STORED = 0
    DEFLATE = 1


class RtsError(Exception):
    """Base class for container failures."""


class EmptyPasskey(RtsError):
    pass


class DuplicateEntryName(RtsError):
    pass


class DuplicateTypeTag(RtsError):
    pass


class BadMagic(RtsError):
    pass


class NeedPasskey(RtsError):
    pass


class TagMismatch(RtsError):
    """Wrong passkey or tampering; indistinguishable by design."""


class CrcMismatch(RtsError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"entry {name!r} failed its checksum")


class Truncated(RtsError):
    pass


@dataclass(frozen=True)
class CryptoParams:
    salt: bytes
    nonce: bytes
    iterations: int = KDF_ITERATIONS


@dataclass(frozen=True)
class RtsEntry:
    name: str
    type_tag: TypeTag
    data: bytes
    method: Method = Method.STORED

    @classmethod
    def auto(cls, name: str, type_tag: TypeTag, data: bytes) -> "RtsEntry":
        """Pick DEFLATE only when it actually shrinks the payload."""
        method = Method.DEFLATE if len(_deflate(data)) < len(data) else Method.STORED
        return cls(name, type_tag, data, method)


def _deflate(data: bytes) -> bytes:
    co = zlib.compressobj(9, zlib.DEFLATED, -15)
    return co.compress(data) + co.flush()


def _inflate(data: bytes, raw_len: int) -> bytes:
    try:
        out = zlib.decompress(data, -15)
    except zlib.error as exc:
        raise Truncated(f"bad DEFLATE stream: {exc}") from None
    if len(out) != raw_len:
        raise Truncated("inflated size disagrees with raw_len")
    return out


def derive_key(salt: bytes, passkey: str) -> bytes:
    """Iterated SHA-256 chain: K0 = H(salt || passkey), Ki = H(Ki-1), return K10000."""
    if not passkey:
        raise EmptyPasskey("passkey must be non-empty")
    if len(salt) != 16:
        raise RtsError("salt must be 16 bytes")
    k = hashlib.sha256(salt + passkey.encode("utf-8")).digest()
    for _ in range(KDF_ITERATIONS):
        k = hashlib.sha256(k).digest()
    return k


def _keystream_xor(key: bytes, nonce: bytes, data: bytes) -> bytes:
    out = bytearray(len(data))
    for i in range((len(data) + 31) // 32):
        block = hashlib.sha256(key + nonce + struct.pack("<Q", i)).digest()
        lo = i * 32
        chunk = data[lo:lo + 32]
        out[lo:lo + len(chunk)] = bytes(a ^ b for a, b in zip(chunk, block))
    return bytes(out)


def _mac(key: bytes, header_after_magic: bytes, body: bytes) -> bytes:
    mac_key = hashlib.sha256(key + b"mac").digest()
    return _hmac.new(mac_key, header_after_magic + body, hashlib.sha256).digest()


def _encode_body(entries: list[RtsEntry]) -> bytes:
    parts = [struct.pack("<H", len(entries))]
    for e in entries:
        name = e.name.encode("utf-8")
        stored = _deflate(e.data) if e.method is Method.DEFLATE else e.data
        parts.append(struct.pack("<H", len(name)))
        parts.append(name)
        parts.append(struct.pack("<BBQQI", int(e.type_tag), int(e.method),
                                 len(e.data), len(stored), zlib.crc32(e.data)))
        parts.append(stored)
    return b"".join(parts)


def pack(entries: list[RtsEntry], passkey: str | None = None, *,
         salt: bytes | None = None, nonce: bytes | None = None) -> bytes:
    """Pack entries into an RTS blob; encrypt and tag when a passkey is given."""
    names = set()
    tags_used = set()
    for e in entries:
        if not e.name:
            raise RtsError("entry name must be non-empty")
        if e.name in names:
            raise DuplicateEntryName(e.name)
        names.add(e.name)
        if e.type_tag in (TypeTag.VQP, TypeTag.MEDIA, TypeTag.ENVREC):
            if e.type_tag in tags_used:
                raise DuplicateTypeTag(e.type_tag.name)
            tags_used.add(e.type_tag)

    body = _encode_body(list(entries))
    if passkey is None:
        header = struct.pack("<B", 0) + struct.pack("<Q", len(body))
        return MAGIC + header + body
    params = CryptoParams(salt if salt is not None else secrets.token_bytes(16),
                          nonce if nonce is not None else secrets.token_bytes(16))
    key = derive_key(params.salt, passkey)
    ciphertext = _keystream_xor(key, params.nonce, body)
    header = struct.pack("<B", _FLAG_ENCRYPTED) + params.salt + params.nonce + struct.pack("<Q", len(ciphertext))
    return MAGIC + header + ciphertext + _mac(key, header, ciphertext)


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise Truncated(f"needed {n} more bytes at offset {self.pos}")
        out = self.blob[self.pos:self.pos + n]
        self.pos += n
        return out


def unpack(blob: bytes, passkey: str | None = None) -> list[RtsEntry]:
    """Unpack and verify a container. Encrypted blobs are tag-checked before
    any decryption, decompression or CRC work happens."""
    r = _Reader(blob)
    if r.take(4) != MAGIC:
        raise BadMagic("not an RTS1 container")
    flags = r.take(1)[0]
    encrypted = bool(flags & _FLAG_ENCRYPTED)
    header_after_magic = struct.pack("<B", flags)
    if encrypted:
        salt = r.take(16)
        nonce = r.take(16)
        header_after_magic += salt + nonce
    (body_len,) = struct.unpack("<Q", r.take(8))
    header_after_magic += struct.pack("<Q", body_len)
    body = r.take(body_len)

    if encrypted:
        if passkey is None:
            raise NeedPasskey("container is encrypted")
        tag = r.take(32)
        key = derive_key(salt, passkey)
        if not _hmac.compare_digest(tag, _mac(key, header_after_magic, body)):
            raise TagMismatch("integrity tag does not verify")
        body = _keystream_xor(key, nonce, body)
    if r.pos != len(blob):
        raise RtsError(f"{len(blob) - r.pos} trailing bytes after container")

    br = _Reader(body)
    (count,) = struct.unpack("<H", br.take(2))
    entries: list[RtsEntry] = []
    for _ in range(count):
        (name_len,) = struct.unpack("<H", br.take(2))
        name = br.take(name_len).decode("utf-8")
        type_tag, method, raw_len, stored_len, crc = struct.unpack("<BBQQI", br.take(22))
        payload = br.take(stored_len)
        data = _inflate(payload, raw_len) if method == Method.DEFLATE else payload
        if len(data) != raw_len:
            raise Truncated(f"entry {name!r}: payload size disagrees with raw_len")
        if zlib.crc32(data) != crc:
            raise CrcMismatch(name)
        entries.append(RtsEntry(name, TypeTag(type_tag), data, Method(method)))
    if br.pos != len(body):
        raise RtsError(f"{len(body) - br.pos} trailing bytes after entries")
    return entries


def is_encrypted(blob: bytes) -> bool:
    """Peek at the flags byte without unpacking."""
    if len(blob) < 5:
        raise Truncated("blob shorter than the fixed header")
    if blob[:4] != MAGIC:
        raise BadMagic("not an RTS1 container")
    return bool(blob[4] & _FLAG_ENCRYPTED)


def check_structure(blob: bytes) -> bool:
    """Verify the outer layout (lengths only, no crypto, no body parse);
    returns the encrypted flag. Lets a receiver reject a truncated
    container before asking anyone for a passkey."""
    r = _Reader(blob)
    if r.take(4) != MAGIC:
        raise BadMagic("not an RTS1 container")
    encrypted = bool(r.take(1)[0] & _FLAG_ENCRYPTED)
    if encrypted:
        r.take(32)  # salt + nonce
    (body_len,) = struct.unpack("<Q", r.take(8))
    r.take(body_len)
    if encrypted:
        r.take(32)  # tag
    if r.pos != len(blob):
        raise RtsError(f"{len(blob) - r.pos} trailing bytes after container")
    return encrypted


def entry_by_tag(entries: list[RtsEntry], tag: TypeTag) -> RtsEntry:
    for e in entries:
        if e.type_tag == tag:
            return e
    raise RtsError(f"container has no {tag.name} entry")
