import hashlib
import random
import zlib

import pytest

from examgrid import rts
from examgrid.rts import Method, RtsEntry, TypeTag

# --- independent oracles -------------------------------------------------

def crc32_table_driven(data: bytes) -> int:
    """Reference CRC-32/ISO-HDLC, built from the reflected polynomial."""
    table = []
    for n in range(256):
        c = n
        for _ in range(8):
            c = (c >> 1) ^ 0xEDB88320 if c & 1 else c >> 1
        table.append(c)
    crc = 0xFFFFFFFF
    for byte in data:
        crc = table[(crc ^ byte) & 0xFF] ^ (crc >> 8)
    return crc ^ 0xFFFFFFFF


def hash_chain_key(salt: bytes, passkey: bytes, iterations: int = 10000) -> bytes:
    """Standalone hash-chain oracle for the key derivation."""
    # hashlib sanity against FIPS 180-4 vectors before trusting it
    assert hashlib.sha256(b"abc").hexdigest() == (
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad")
    assert hashlib.sha256(b"").hexdigest() == (
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855")
    k = hashlib.sha256(salt + passkey).digest()
    for _ in range(iterations):
        k = hashlib.sha256(k).digest()
    return k


# Regression vector frozen from hash_chain_key(bytes(16), b"abc")
FROZEN_KEY_HEX = "9dbe3e69647f65c5cf674083225cf3374a38cffe48837145f4edca829791e279"


def rand_entries(rng: random.Random) -> list[RtsEntry]:
    entries = []
    tags = [TypeTag.VQP, TypeTag.MEDIA, TypeTag.ENVREC]
    rng.shuffle(tags)
    for i in range(rng.randint(1, 5)):
        tag = tags.pop() if tags and rng.random() < 0.5 else TypeTag.OTHER
        if rng.random() < 0.5:
            data = bytes(rng.getrandbits(8) for _ in range(rng.randint(0, 400)))  # incompressible
        else:
            data = (b"lorem ipsum " * rng.randint(1, 60))  # compressible
        entries.append(RtsEntry.auto(f"entry-{i}.bin", tag, data))
    return entries


# --- key derivation -------------------------------------------------------

def test_derive_key_deterministic():
    salt = bytes(range(16))
    assert rts.derive_key(salt, "pass") == rts.derive_key(salt, "pass")


def test_derive_key_frozen_vector_and_oracle():
    salt = bytes(16)
    key = rts.derive_key(salt, "abc")
    assert key.hex() == FROZEN_KEY_HEX
    assert hash_chain_key(salt, b"abc") == key


def test_derive_key_salt_sensitivity():
    rng = random.Random(11)
    base = bytes(rng.getrandbits(8) for _ in range(16))
    k0 = rts.derive_key(base, "pk")
    for i in range(16):
        flipped = bytearray(base)
        flipped[i] ^= 0x01
        assert rts.derive_key(bytes(flipped), "pk") != k0


def test_derive_key_rejects_empty_passkey():
    with pytest.raises(rts.EmptyPasskey):
        rts.derive_key(bytes(16), "")


# --- pack / unpack --------------------------------------------------------

def test_crc32_check_value():
    assert zlib.crc32(b"123456789") == 0xCBF43926
    assert crc32_table_driven(b"123456789") == 0xCBF43926


def test_crc_oracle_agrees_with_zlib_on_random_data():
    rng = random.Random(3)
    for _ in range(50):
        data = bytes(rng.getrandbits(8) for _ in range(rng.randint(0, 300)))
        assert crc32_table_driven(data) == zlib.crc32(data)


def test_roundtrip_with_passkey():
    entries = [
        RtsEntry.auto("paper.vqp", TypeTag.VQP, b"%VQP 1\n" * 40),
        RtsEntry.auto("recording.frs", TypeTag.MEDIA, bytes(range(256))),
    ]
    blob = rts.pack(entries, "k")
    assert rts.unpack(blob, "k") == entries


def test_roundtrip_unencrypted_layout():
    entries = [RtsEntry("a", TypeTag.OTHER, b"payload", Method.STORED)]
    blob = rts.pack(entries, None)
    assert blob[:4] == b"RTS1"
    assert blob[4] == 0  # flags bit0 clear
    # no salt/nonce: body_len immediately follows flags
    assert int.from_bytes(blob[5:13], "little") == len(blob) - 13
    assert b"payload" in blob  # body readable directly
    assert rts.unpack(blob) == entries


def test_roundtrip_200_generated_entry_sets():
    rng = random.Random(99)
    used_deflate = used_stored = False
    for i in range(200):
        entries = rand_entries(rng)
        passkey = f"pk{i}" if rng.random() < 0.7 else None
        assert rts.unpack(rts.pack(entries, passkey), passkey) == entries
        used_deflate |= any(e.method is Method.DEFLATE for e in entries)
        used_stored |= any(e.method is Method.STORED for e in entries)
    assert used_deflate and used_stored


def test_auto_method_only_deflates_when_smaller():
    compressible = RtsEntry.auto("t", TypeTag.OTHER, b"aaaa" * 100)
    incompressible = RtsEntry.auto("r", TypeTag.OTHER, random.Random(1).randbytes(64))
    assert compressible.method is Method.DEFLATE
    assert incompressible.method is Method.STORED


def test_wrong_passkey_is_tag_mismatch():
    blob = rts.pack([RtsEntry("a", TypeTag.OTHER, b"x", Method.STORED)], "right")
    with pytest.raises(rts.TagMismatch):
        rts.unpack(blob, "wrong")


def test_missing_passkey_is_need_passkey():
    blob = rts.pack([RtsEntry("a", TypeTag.OTHER, b"x", Method.STORED)], "k")
    with pytest.raises(rts.NeedPasskey):
        rts.unpack(blob)


def test_bad_magic():
    with pytest.raises(rts.BadMagic):
        rts.unpack(b"NOPE" + bytes(20))


def test_truncated():
    blob = rts.pack([RtsEntry("a", TypeTag.OTHER, b"x" * 100, Method.STORED)], "k")
    with pytest.raises(rts.Truncated):
        rts.unpack(blob[:30], "k")


def test_duplicate_entry_name_rejected():
    entries = [RtsEntry("a", TypeTag.OTHER, b"1", Method.STORED),
               RtsEntry("a", TypeTag.OTHER, b"2", Method.STORED)]
    with pytest.raises(rts.DuplicateEntryName):
        rts.pack(entries)


def test_duplicate_type_tag_rejected():
    entries = [RtsEntry("a", TypeTag.VQP, b"1", Method.STORED),
               RtsEntry("b", TypeTag.VQP, b"2", Method.STORED)]
    with pytest.raises(rts.DuplicateTypeTag):
        rts.pack(entries)
    # OTHER may repeat freely
    rts.pack([RtsEntry("a", TypeTag.OTHER, b"1", Method.STORED),
              RtsEntry("b", TypeTag.OTHER, b"2", Method.STORED)])


def test_tamper_100_random_body_flips_all_tag_mismatch():
    rng = random.Random(2024)
    entries = [RtsEntry.auto("paper.vqp", TypeTag.VQP, b"question text " * 50),
               RtsEntry.auto("rec.frs", TypeTag.MEDIA, bytes(rng.getrandbits(8) for _ in range(2000)))]
    blob = rts.pack(entries, "secret")
    body_start = 4 + 1 + 16 + 16 + 8
    body_end = len(blob) - 32
    hits = 0
    for _ in range(100):
        pos = rng.randrange(body_start, body_end)
        tampered = bytearray(blob)
        tampered[pos] ^= 1 << rng.randrange(8)
        try:
            rts.unpack(bytes(tampered), "secret")
        except rts.TagMismatch:
            hits += 1
    assert hits == 100


def test_tag_checked_before_any_decompression(monkeypatch):
    entries = [RtsEntry.auto("z", TypeTag.OTHER, b"deflate me " * 100)]
    blob = rts.pack(entries, "k")
    tampered = bytearray(blob)
    tampered[-40] ^= 0xFF  # inside ciphertext body
    calls = []
    real = rts._inflate

    def spy(data, raw_len):
        calls.append(1)
        return real(data, raw_len)

    monkeypatch.setattr(rts, "_inflate", spy)
    with pytest.raises(rts.TagMismatch):
        rts.unpack(bytes(tampered), "k")
    assert calls == []


def test_crc_mismatch_on_unencrypted_corruption():
    entries = [RtsEntry("raw", TypeTag.OTHER, b"A" * 64, Method.STORED)]
    blob = bytearray(rts.pack(entries))
    blob[-10] ^= 0x01  # stored payload byte
    with pytest.raises(rts.CrcMismatch) as exc:
        rts.unpack(bytes(blob))
    assert exc.value.name == "raw"


def test_deterministic_layout_with_fixed_salt_nonce():
    entries = [RtsEntry.auto("e", TypeTag.OTHER, b"fixed content")]
    salt, nonce = bytes(16), bytes(range(16))
    a = rts.pack(entries, "k", salt=salt, nonce=nonce)
    b = rts.pack(entries, "k", salt=salt, nonce=nonce)
    assert a == b


def test_keystream_blocks_do_not_repeat():
    # identical plaintext blocks must encrypt differently under the counter
    entries = [RtsEntry("e", TypeTag.OTHER, bytes(64), Method.STORED)]
    blob = rts.pack(entries, "k", salt=bytes(16), nonce=bytes(16))
    body_start = 4 + 1 + 32 + 8
    body = blob[body_start:-32]
    # plaintext body has a 64-byte zero run (the payload); the XORed
    # ciphertext of consecutive 32-byte keystream blocks must differ
    tail = body[-64:]
    assert tail[:32] != tail[32:]


def test_keystream_blocks_unique_over_long_body():
    key = bytes(32)
    nonce = bytes(16)
    blocks = set()
    data = bytes(32 * 20)
    stream = rts._keystream_xor(key, nonce, data)
    for i in range(20):
        blocks.add(stream[i * 32:(i + 1) * 32])
    assert len(blocks) == 20


def test_is_encrypted_peek():
    enc = rts.pack([RtsEntry("a", TypeTag.OTHER, b"x", Method.STORED)], "k")
    plain = rts.pack([RtsEntry("a", TypeTag.OTHER, b"x", Method.STORED)])
    assert rts.is_encrypted(enc) is True
    assert rts.is_encrypted(plain) is False
    with pytest.raises(rts.Truncated):
        rts.is_encrypted(b"RT")
