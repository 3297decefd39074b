#!/usr/bin/env python3
"""Cross-checks golden soft-authenticator fixtures with Python's own CBOR
reading (cbor2 when installed) and the cryptography package, independently
of the C++ codec."""

import base64
import hashlib
import json
import struct
import sys

try:
    import cbor2
except ImportError:
    cbor2 = None
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric import ec


def _cbor_item(data, pos):
    head = data[pos]
    major, info = head >> 5, head & 0x1F
    pos += 1
    if info < 24:
        arg = info
    elif info in (24, 25, 26, 27):
        n = 1 << (info - 24)
        arg = int.from_bytes(data[pos:pos + n], "big")
        pos += n
    else:
        raise ValueError("unsupported CBOR head %#x" % head)
    if major == 0:
        return arg, pos
    if major == 1:
        return -1 - arg, pos
    if major in (2, 3):
        raw = data[pos:pos + arg]
        if len(raw) != arg:
            raise ValueError("truncated string")
        return (bytes(raw) if major == 2 else raw.decode()), pos + arg
    if major == 4:
        items = []
        for _ in range(arg):
            item, pos = _cbor_item(data, pos)
            items.append(item)
        return items, pos
    if major == 5:
        out = {}
        for _ in range(arg):
            key, pos = _cbor_item(data, pos)
            out[key], pos = _cbor_item(data, pos)
        return out, pos
    if major == 7 and info in (20, 21, 22):
        return {20: False, 21: True, 22: None}[info], pos
    raise ValueError("unsupported CBOR major type %d" % major)


def cbor_loads(data):
    """Decodes one item and returns (item, bytes consumed)."""
    if cbor2 is not None:
        import io

        stream = io.BytesIO(data)
        item = cbor2.CBORDecoder(stream).decode()
        return item, stream.tell()
    return _cbor_item(data, 0)


def b64url(text):
    return base64.urlsafe_b64decode(text + "=" * (-len(text) % 4))


def check(path):
    fx = json.load(open(path))
    opts, resp, expect = fx["options"], fx["response"], fx["expect"]

    client_data = b64url(resp["client_data_b64"])
    cd = json.loads(client_data)
    assert cd["type"] == "webauthn.create", cd
    assert cd["challenge"] == opts["challenge"], cd
    assert cd["origin"] == fx["origin"], cd

    raw_att = b64url(resp["attestation_object_b64"])
    att, used = cbor_loads(raw_att)
    assert used == len(raw_att), "trailing bytes after the attestation object"
    assert set(att) == {"fmt", "attStmt", "authData"}, att.keys()
    auth = att["authData"]

    rp_hash = hashlib.sha256(opts["rp"]["id"].encode()).digest()
    assert auth[:32] == rp_hash
    assert auth[:32].hex() == expect["rp_id_hash"]
    flags = auth[32]
    assert flags == expect["flags"] and flags & 0x41 == 0x41
    (count,) = struct.unpack(">I", auth[33:37])
    assert count == expect["sign_count"]

    cred_len = struct.unpack(">H", auth[53:55])[0]
    cred_id = auth[55:55 + cred_len]
    assert cred_id.hex() == expect["credential_id"]
    key_bytes = auth[55 + cred_len:]
    cose, used = cbor_loads(key_bytes)
    assert used == len(key_bytes), "trailing bytes after the credential key"
    assert cose[1] == 2 and cose[3] == -7 and cose[-1] == 1
    assert len(cose[-2]) == 32 and len(cose[-3]) == 32
    assert cose[-2].hex() == expect["x"] and cose[-3].hex() == expect["y"]

    if fx["attestation"] == "none":
        assert att["fmt"] == "none" and att["attStmt"] == {}
        return
    assert att["fmt"] == "packed"
    stmt = att["attStmt"]
    assert stmt["alg"] == -7 and "x5c" not in stmt
    sig = stmt["sig"]
    assert 70 <= len(sig) <= 72 and sig.hex() == expect["signature"]
    key = ec.EllipticCurvePublicNumbers(
        int.from_bytes(cose[-2], "big"), int.from_bytes(cose[-3], "big"), ec.SECP256R1()
    ).public_key()
    key.verify(sig, auth + hashlib.sha256(client_data).digest(), ec.ECDSA(hashes.SHA256()))


def main(paths):
    for path in paths:
        check(path)
        print(f"ok {path}")


if __name__ == "__main__":
    main(sys.argv[1:])
