"""Canonical binary encoding: type-tagged, length-prefixed, field-ordered.

This is the byte layout used for signing payloads and for persistence.
Encoding is deterministic, and injective per record type: two records of
the same type produce equal bytes iff they are equal. Integers are 8-byte
big-endian, variable-length data carries a 4-byte big-endian length prefix,
and every signing payload starts with a domain-separation tag so payloads
of different kinds can never collide.
"""

from __future__ import annotations

import struct
from collections.abc import Mapping

from .errors import EncodingError

# Domain-separation tags for signing payloads.
PAYLOAD_DECISION = 0xD1
PAYLOAD_TOKEN = 0xD2
PAYLOAD_VC = 0xD3
PAYLOAD_PRESENTATION = 0xD4


class ByteWriter:
    """Accumulates the canonical byte form of one record."""

    def __init__(self) -> None:
        self._buf = bytearray()

    def u8(self, value: int) -> "ByteWriter":
        self._buf.append(value & 0xFF)
        return self

    def u64(self, value: int) -> "ByteWriter":
        if value < 0:
            raise EncodingError(f"cannot encode negative integer {value}")
        self._buf += struct.pack(">Q", value)
        return self

    def boolean(self, value: bool) -> "ByteWriter":
        return self.u8(1 if value else 0)

    def blob(self, data: bytes) -> "ByteWriter":
        self._buf += struct.pack(">I", len(data))
        self._buf += data
        return self

    def text(self, value: str) -> "ByteWriter":
        return self.blob(value.encode("utf-8"))

    def text_map(self, mapping: Mapping[str, str]) -> "ByteWriter":
        # Stored order is preserved: an ordered mapping is part of the record.
        self.u64(len(mapping))
        for key, value in mapping.items():
            self.text(key)
            self.text(value)
        return self

    def getvalue(self) -> bytes:
        return bytes(self._buf)


class ByteReader:
    """Mirror of :class:`ByteWriter`; raises ``EncodingError`` on underrun."""

    def __init__(self, data: bytes) -> None:
        self._data = data
        self._pos = 0

    def _take(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise EncodingError("truncated canonical encoding")
        chunk = self._data[self._pos : self._pos + n]
        self._pos += n
        return chunk

    def u8(self) -> int:
        return self._take(1)[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self._take(8))[0]

    def boolean(self) -> bool:
        flag = self.u8()
        if flag not in (0, 1):
            raise EncodingError(f"invalid boolean byte {flag}")
        return flag == 1

    def blob(self) -> bytes:
        (length,) = struct.unpack(">I", self._take(4))
        return self._take(length)

    def text(self) -> str:
        try:
            return self.blob().decode("utf-8")
        except UnicodeDecodeError as exc:
            raise EncodingError("invalid utf-8 in canonical encoding") from exc

    def text_map(self) -> dict[str, str]:
        return {self.text(): self.text() for _ in range(self.u64())}

    def expect_end(self) -> None:
        if self._pos != len(self._data):
            raise EncodingError("trailing bytes after canonical encoding")


def sorted_claims(claims: Mapping[str, str]) -> list[tuple[str, str]]:
    """Claims in signing order: key-sorted, so logically equal claim sets sign
    identically regardless of insertion order."""
    return sorted(claims.items())


def decision_payload(did: str, proposal_id: int, base_version: int, verdict: str) -> bytes:
    """Signing payload for a controller decision.

    Binding the DID, proposal id, and base version prevents replaying the
    signature against any other proposal or a later document state.
    """
    w = ByteWriter().u8(PAYLOAD_DECISION)
    w.text(did).u64(proposal_id).u64(base_version).text(verdict)
    return w.getvalue()


def token_payload(nonce: bytes) -> bytes:
    """Signing payload for a bearer token: the nonce alone."""
    return ByteWriter().u8(PAYLOAD_TOKEN).blob(nonce).getvalue()


def vc_payload(holder_key: bytes, claims: Mapping[str, str]) -> bytes:
    """Issuer signing payload for a verifiable credential."""
    w = ByteWriter().u8(PAYLOAD_VC).blob(holder_key)
    ordered = sorted_claims(claims)
    w.u64(len(ordered))
    for key, value in ordered:
        w.text(key)
        w.text(value)
    return w.getvalue()


def presentation_payload(did: str, proposal_id: int, credential: bytes) -> bytes:
    """Holder signing payload proving possession of a credential.

    Binds (did, proposal_id, credential). Proposal ids start at 1, so
    presentations made at proposal time (no id allocated yet) use 0; a
    captured propose-presentation can therefore never be replayed as a
    decision on a real proposal.
    """
    w = ByteWriter().u8(PAYLOAD_PRESENTATION)
    w.text(did).u64(proposal_id).blob(credential)
    return w.getvalue()
