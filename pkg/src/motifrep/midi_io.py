"""Standard MIDI File reading and writing (formats 0 and 1).

The reader resolves note-on/note-off pairs into Note records, captures the
tempo map, and rejects anything that is not 4/4. Parse failures report the
byte offset where decoding broke down.
"""

from __future__ import annotations

import struct
import warnings
from pathlib import Path

from .notes import Note, NoteSequence


class MidiParseError(ValueError):
    """Malformed or truncated MIDI data; carries the failing byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class UnsupportedMeterError(ValueError):
    """The file declares a time signature other than 4/4."""


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def read(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise MidiParseError(
                f"unexpected end of data, wanted {n} bytes", self.pos
            )
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u8(self) -> int:
        return self.read(1)[0]

    def varlen(self) -> int:
        value = 0
        for _ in range(4):
            byte = self.u8()
            value = (value << 7) | (byte & 0x7F)
            if not byte & 0x80:
                return value
        raise MidiParseError("variable-length quantity longer than 4 bytes", self.pos)


def _parse_track(
    reader: _Reader,
    notes: list[Note],
    tempo_events: list[tuple[int, float]],
) -> None:
    """Parse one MTrk chunk, appending resolved notes and tempo events."""
    start = reader.pos
    if reader.read(4) != b"MTrk":
        raise MidiParseError("expected MTrk chunk", start)
    (length,) = struct.unpack(">I", reader.read(4))
    end = reader.pos + length
    if end > len(reader.data):
        raise MidiParseError(f"track length {length} overruns file", reader.pos - 4)

    tick = 0
    running_status: int | None = None
    # (channel, pitch) -> list of (onset_tick, velocity), FIFO per key
    open_notes: dict[tuple[int, int], list[tuple[int, int]]] = {}

    while reader.pos < end:
        tick += reader.varlen()
        status = reader.u8()
        if status < 0x80:
            if running_status is None:
                raise MidiParseError("data byte with no running status", reader.pos - 1)
            reader.pos -= 1
            status = running_status

        if status == 0xFF:  # meta event
            running_status = None
            meta_type = reader.u8()
            meta_len = reader.varlen()
            payload = reader.read(meta_len)
            if meta_type == 0x51 and meta_len == 3:
                mpq = int.from_bytes(payload, "big")
                if mpq > 0:
                    tempo_events.append((tick, 60_000_000.0 / mpq))
            elif meta_type == 0x58 and meta_len >= 2:
                numerator, dd = payload[0], payload[1]
                if (numerator, 1 << dd) != (4, 4):
                    raise UnsupportedMeterError(
                        f"time signature {numerator}/{1 << dd} is not supported; "
                        "only 4/4 pieces are handled"
                    )
            elif meta_type == 0x2F:
                reader.pos = end
                break
            continue
        if status in (0xF0, 0xF7):  # sysex
            running_status = None
            reader.read(reader.varlen())
            continue
        if status >= 0xF0:
            raise MidiParseError(f"unsupported system message 0x{status:02x}", reader.pos - 1)

        running_status = status
        kind = status & 0xF0
        channel = status & 0x0F
        if kind in (0x80, 0x90, 0xA0, 0xB0, 0xE0):
            d1, d2 = reader.u8(), reader.u8()
        elif kind in (0xC0, 0xD0):
            d1, d2 = reader.u8(), 0
        else:  # unreachable: kind < 0x80 handled above
            raise MidiParseError(f"bad status byte 0x{status:02x}", reader.pos - 1)

        if kind == 0x90 and d2 > 0:
            open_notes.setdefault((channel, d1), []).append((tick, d2))
        elif kind == 0x80 or (kind == 0x90 and d2 == 0):
            stack = open_notes.get((channel, d1))
            if stack:
                onset, velocity = stack.pop(0)
                if tick > onset:
                    notes.append(Note(d1, onset, tick - onset, max(1, velocity)))

    # notes still sounding terminate at end of track
    dangling = sum(len(v) for v in open_notes.values())
    if dangling:
        warnings.warn(
            f"{dangling} note-on event(s) had no matching note-off; "
            "terminated at end of track",
            stacklevel=3,
        )
        for (channel, pitch), stack in open_notes.items():
            for onset, velocity in stack:
                if tick > onset:
                    notes.append(Note(pitch, onset, tick - onset, max(1, velocity)))
    reader.pos = end


def parse_midi(data: bytes) -> NoteSequence:
    """Parse a format 0 or 1 Standard MIDI File into a NoteSequence."""
    reader = _Reader(data)
    if reader.read(4) != b"MThd":
        raise MidiParseError("missing MThd header", 0)
    (header_len,) = struct.unpack(">I", reader.read(4))
    if header_len < 6:
        raise MidiParseError(f"header length {header_len} < 6", 4)
    fmt, ntrks, division = struct.unpack(">HHH", reader.read(6))
    reader.pos = 8 + header_len
    if fmt not in (0, 1):
        raise MidiParseError(f"unsupported SMF format {fmt}", 8)
    if division & 0x8000:
        raise MidiParseError("SMPTE time division is not supported", 12)
    if division == 0:
        raise MidiParseError("zero ticks-per-quarter", 12)

    notes: list[Note] = []
    tempo_events: list[tuple[int, float]] = []
    for _ in range(ntrks):
        _parse_track(reader, notes, tempo_events)

    return NoteSequence(
        notes=tuple(notes),
        ticks_per_quarter=division,
        tempo_events=tuple(tempo_events),
    )


def parse_midi_file(path: str | Path) -> NoteSequence:
    return parse_midi(Path(path).read_bytes())


def _varlen(value: int) -> bytes:
    chunks = [value & 0x7F]
    value >>= 7
    while value:
        chunks.append((value & 0x7F) | 0x80)
        value >>= 7
    return bytes(reversed(chunks))


def write_midi(seq: NoteSequence) -> bytes:
    """Serialize a NoteSequence as a single-track (format 0) SMF."""
    events: list[tuple[int, int, bytes]] = []  # (tick, order, payload)
    for tick, bpm in seq.tempo_events or ((0, 120.0),):
        mpq = max(1, int(round(60_000_000.0 / bpm)))
        events.append((tick, 0, b"\xff\x51\x03" + mpq.to_bytes(3, "big")))
    events.append((0, 0, b"\xff\x58\x04\x04\x02\x18\x08"))
    for n in seq.notes:
        events.append((n.onset, 1, bytes((0x90, n.pitch, n.velocity))))
        events.append((n.end, 2, bytes((0x80, n.pitch, 0))))
    events.sort(key=lambda e: (e[0], e[1]))

    body = bytearray()
    last_tick = 0
    for tick, _, payload in events:
        body += _varlen(tick - last_tick)
        body += payload
        last_tick = tick
    body += _varlen(0) + b"\xff\x2f\x00"

    header = struct.pack(">4sIHHH", b"MThd", 6, 0, 1, seq.ticks_per_quarter)
    track = struct.pack(">4sI", b"MTrk", len(body)) + bytes(body)
    return header + track


def write_midi_file(seq: NoteSequence, path: str | Path) -> None:
    Path(path).write_bytes(write_midi(seq))
