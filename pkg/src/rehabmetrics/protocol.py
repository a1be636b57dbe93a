"""Wire protocol for the sensor link: newline-delimited ASCII frames.

Frame grammar (one frame per line, LF terminated):

    SAMPLE,<t_ms>,<device>,<yaw>,<pitch>,<roll>
    HELLO,<protocol_version>
    BYE

t_ms is a non-negative integer, device is 1 or 2, angles are decimal degrees
formatted with two digits after the point. Encoding then decoding a frame
reproduces the angles to within the 0.005 degree quantization of %.2f.
"""

from __future__ import annotations

from dataclasses import dataclass

PROTOCOL_VERSION = 1

_TERM = "\n"


class ProtocolError(ValueError):
    """Malformed frame; the message carries the offending line."""


@dataclass(frozen=True)
class Sample:
    t_ms: int
    device: int
    yaw: float
    pitch: float
    roll: float


@dataclass(frozen=True)
class Hello:
    version: int


@dataclass(frozen=True)
class Bye:
    pass


Message = Sample | Hello | Bye


def encode(msg: Message) -> bytes:
    if isinstance(msg, Sample):
        line = (
            f"SAMPLE,{msg.t_ms},{msg.device},"
            f"{msg.yaw:.2f},{msg.pitch:.2f},{msg.roll:.2f}"
        )
    elif isinstance(msg, Hello):
        line = f"HELLO,{msg.version}"
    elif isinstance(msg, Bye):
        line = "BYE"
    else:
        raise TypeError(f"not a protocol message: {msg!r}")
    return (line + _TERM).encode("ascii")


def parse_line(line: str) -> Message:
    """Parse one frame (no terminator). Raises ProtocolError on anything off."""
    fields = line.split(",")
    kind = fields[0]
    try:
        if kind == "SAMPLE":
            if len(fields) != 6:
                raise ValueError("expected 6 fields")
            t_ms = int(fields[1])
            device = int(fields[2])
            if t_ms < 0:
                raise ValueError("negative timestamp")
            if device not in (1, 2):
                raise ValueError(f"bad device {device}")
            return Sample(
                t_ms=t_ms,
                device=device,
                yaw=float(fields[3]),
                pitch=float(fields[4]),
                roll=float(fields[5]),
            )
        if kind == "HELLO":
            if len(fields) != 2:
                raise ValueError("expected 2 fields")
            return Hello(version=int(fields[1]))
        if kind == "BYE":
            if len(fields) != 1:
                raise ValueError("expected 1 field")
            return Bye()
    except ProtocolError:
        raise
    except ValueError as e:
        raise ProtocolError(f"malformed frame {line!r}: {e}") from None
    raise ProtocolError(f"malformed frame {line!r}: unknown kind {kind!r}")


class LineDecoder:
    """Incremental decoder tolerant of arbitrary read boundaries.

    Feed byte chunks as they arrive; complete frames come out in order.
    Bytes after the last LF stay buffered for the next feed.
    """

    def __init__(self):
        self._buf = bytearray()

    def feed(self, chunk: bytes) -> list[Message]:
        self._buf.extend(chunk)
        out = []
        while True:
            idx = self._buf.find(b"\n")
            if idx < 0:
                break
            raw = bytes(self._buf[:idx])
            del self._buf[: idx + 1]
            line = raw.decode("ascii", errors="replace").rstrip("\r")
            if line:
                out.append(parse_line(line))
        return out

    @property
    def pending(self) -> int:
        """Bytes buffered without a terminator yet."""
        return len(self._buf)
