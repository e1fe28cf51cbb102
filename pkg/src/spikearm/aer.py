"""Address-event wire path.

Models the spike output port end to end: every spike leaves the chip as two
consecutive 13-bit words on a 15-line port (two lines carry the REQ/ACK
handshake), crosses a 4-phase handshake link, and is reassembled by a
two-state decoder FSM.  A separate nibble-serial link models the 4-bit
inter-board interface that moves 16-bit words four bits at a time.

Bit layout (13-bit payloads):

* word 0 (tag): bits [12:11] = core index, bits [10:0] reserved, zero.
* word 1 (address): bits [9:0] = global neuron index, bits [12:10] zero.

Reserved bits double as the malformed-word detector: a word with reserved
bits set drops any held word and resynchronizes the FSM.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

from .errors import ConfigError, FramingError
from .events import SpikeEvent

PAYLOAD_BITS = 13
PAYLOAD_MASK = (1 << PAYLOAD_BITS) - 1
NEURON_BITS = 10
CORE_SHIFT = 11
WORD0_RESERVED = 0x07FF   # low 11 bits of the tag word must be zero
WORD1_RESERVED = 0x1C00   # high 3 bits of the address word must be zero


@dataclass(frozen=True)
class AerWord:
    """One 13-bit payload on the event bus."""

    payload: int

    def __post_init__(self):
        if not 0 <= self.payload <= PAYLOAD_MASK:
            raise ConfigError(f"payload {self.payload:#x} exceeds {PAYLOAD_BITS} bits")


@dataclass(frozen=True)
class SpikeFrame:
    """The two-word frame carrying one spike (tag word first)."""

    word0: AerWord
    word1: AerWord

    @property
    def core(self) -> int:
        return self.word0.payload >> CORE_SHIFT

    @property
    def neuron_id(self) -> int:
        return self.word1.payload & ((1 << NEURON_BITS) - 1)


def encode_spike(event: SpikeEvent) -> SpikeFrame:
    """Frame a spike: core bits from the global index, address in word 1."""
    nid = event.neuron_id
    if not 0 <= nid < 1024:
        raise ConfigError(f"neuron_id {nid} not addressable (0..1023)")
    core = nid >> 8
    return SpikeFrame(AerWord(core << CORE_SHIFT), AerWord(nid))


def decode_frame(frame: SpikeFrame) -> int:
    """Inverse of :func:`encode_spike`; returns the global neuron index."""
    if frame.word0.payload & WORD0_RESERVED:
        raise FramingError("tag word has reserved bits set")
    if frame.word1.payload & WORD1_RESERVED:
        raise FramingError("address word has reserved bits set")
    return frame.neuron_id


class FsmState(enum.Enum):
    AWAIT_WORD0 = "await_word0"
    AWAIT_WORD1 = "await_word1"


class DecoderFsm:
    """Two-state reassembler for the two-word spike frames.

    Feeding any word with reserved bits set drops the held word and returns
    to AWAIT_WORD0, so a single spurious or corrupted word costs at most
    one garbled event before the stream re-locks.
    """

    def __init__(self):
        self.state = FsmState.AWAIT_WORD0
        self.held: AerWord | None = None
        self.resyncs = 0

    def step(self, word: AerWord) -> int | None:
        """Consume one word; returns a neuron ID when a frame completes."""
        if self.state is FsmState.AWAIT_WORD0:
            if word.payload & WORD0_RESERVED:
                self.resyncs += 1
                return None
            self.held = word
            self.state = FsmState.AWAIT_WORD1
            return None
        # AWAIT_WORD1
        if word.payload & WORD1_RESERVED:
            self.held = None
            self.state = FsmState.AWAIT_WORD0
            self.resyncs += 1
            return None
        self.held = None
        self.state = FsmState.AWAIT_WORD0
        return word.payload & ((1 << NEURON_BITS) - 1)


class LinkState(enum.Enum):
    IDLE = "idle"
    REQ_ASSERTED = "req_asserted"
    ACKED = "acked"


class HandshakeLink:
    """4-phase REQ/ACK word transfer with per-phase latency and a timeout.

    Words are never reordered: a transfer starts no earlier than the
    previous one finished, so the delivered rate can never exceed one word
    per round trip.
    """

    def __init__(self, req_us: float = 0.5, ack_us: float = 0.5,
                 timeout_us: float = 100.0):
        if req_us < 0 or ack_us < 0 or timeout_us < 0:
            raise ConfigError("link latencies must be nonnegative")
        self.req_us = req_us
        self.ack_us = ack_us
        self.timeout_us = timeout_us
        self.state = LinkState.IDLE
        self.free_at = 0.0
        self.errors: list[tuple[int, int]] = []     # (t_us, payload)
        self.phase_log: list[LinkState] | None = None

    def _enter(self, state: LinkState) -> None:
        legal = {
            LinkState.IDLE: LinkState.REQ_ASSERTED,
            LinkState.REQ_ASSERTED: LinkState.ACKED,
            LinkState.ACKED: LinkState.IDLE,
        }
        if legal[self.state] is not state:
            raise RuntimeError(f"illegal handshake transition {self.state} -> {state}")
        self.state = state
        if self.phase_log is not None:
            self.phase_log.append(state)

    def transfer(self, word: AerWord, t_us: float) -> int | None:
        """Send one word offered at ``t_us``; returns delivery time in µs.

        Returns None when the ACK phase overruns the timeout; the word is
        dropped, the error recorded, and the link returns to idle.
        """
        start = max(float(t_us), self.free_at)
        self._enter(LinkState.REQ_ASSERTED)
        if self.ack_us > self.timeout_us:
            self.errors.append((int(math.ceil(start - 1e-9)), word.payload))
            self.state = LinkState.IDLE
            if self.phase_log is not None:
                self.phase_log.append(LinkState.IDLE)
            self.free_at = start + self.timeout_us
            return None
        self._enter(LinkState.ACKED)
        done = start + self.req_us + self.ack_us
        self._enter(LinkState.IDLE)
        self.free_at = done
        return int(math.ceil(done - 1e-9))

    @property
    def round_trip_us(self) -> float:
        return self.req_us + self.ack_us


class AerLink:
    """Chip output port: framing + handshake + decoder, with a wiretap."""

    def __init__(self, link: HandshakeLink | None = None,
                 wiretap: list | None = None):
        self.link = link if link is not None else HandshakeLink()
        self.fsm = DecoderFsm()
        self.wiretap = wiretap

    def send_spike(self, event: SpikeEvent) -> SpikeEvent | None:
        """Push one spike through the wire; returns the decoded event.

        The decoded timestamp is the delivery time of the address word.
        """
        frame = encode_spike(event)
        out = None
        for word in (frame.word0, frame.word1):
            t_deliver = self.link.transfer(word, event.t)
            if self.wiretap is not None:
                self.wiretap.append((event.t, "tx", word.payload))
            if t_deliver is None:
                continue
            if self.wiretap is not None:
                self.wiretap.append((t_deliver, "rx", word.payload))
            nid = self.fsm.step(word)
            if nid is not None:
                out = SpikeEvent(t_deliver, nid)
        return out


def dump_wiretap(path, taps) -> None:
    """Write a wire capture as ``t_us,direction,payload_hex`` CSV."""
    with open(path, "w", newline="") as fh:
        fh.write("t_us,direction,payload_hex\n")
        for t, direction, payload in taps:
            fh.write(f"{int(t)},{direction},{payload:04x}\n")


# --- 4-bit inter-board link -------------------------------------------------

def nibble_serialize(word16: int) -> tuple[int, int, int, int]:
    """Split a 16-bit word into four nibbles, most significant first."""
    if not 0 <= word16 < (1 << 16):
        raise ConfigError(f"word {word16:#x} exceeds 16 bits")
    return ((word16 >> 12) & 0xF, (word16 >> 8) & 0xF,
            (word16 >> 4) & 0xF, word16 & 0xF)


def nibble_deserialize(nibbles) -> int:
    """Reassemble four nibbles (MSB first) into a 16-bit word."""
    seq = list(nibbles)
    if len(seq) != 4:
        raise FramingError(f"expected 4 nibbles, got {len(seq)}")
    word = 0
    for n in seq:
        if not 0 <= n <= 0xF:
            raise FramingError(f"nibble {n!r} out of range")
        word = (word << 4) | n
    return word


class NibbleLink:
    """16-bit words over a 4-bit bus: four handshakes per word."""

    def __init__(self, link: HandshakeLink | None = None):
        self.link = link if link is not None else HandshakeLink(0.0, 0.0)

    def transfer_word(self, word16: int, t_us: float) -> int | None:
        """Returns the delivery time of the final nibble, None on timeout."""
        done = None
        for nib in nibble_serialize(word16):
            done = self.link.transfer(AerWord(nib), t_us)
            if done is None:
                return None
            t_us = done
        return done


# --- fault injection for protocol tests ------------------------------------

@dataclass
class Fault:
    """One scheduled disturbance on a word stream.

    ``index`` addresses the word position in the clean stream; ``mode`` is
    ``insert`` (payload inserted before that word), ``corrupt`` (XOR the
    word with ``mask``) or ``drop``.
    """

    index: int
    mode: str
    payload: int = 0
    mask: int = 0

    def __post_init__(self):
        if self.mode not in ("insert", "corrupt", "drop"):
            raise ConfigError(f"unknown fault mode {self.mode!r}")


def load_fault_schedule(path) -> list[Fault]:
    with open(path) as fh:
        raw = json.load(fh)
    return [Fault(int(f["index"]), f["mode"],
                  int(f.get("payload", 0)), int(f.get("mask", 0))) for f in raw]


def apply_faults(words: list[AerWord], faults: list[Fault]) -> list[AerWord]:
    """Return the disturbed word stream."""
    by_index: dict[int, list[Fault]] = {}
    for f in faults:
        by_index.setdefault(f.index, []).append(f)
    out: list[AerWord] = []
    for i, w in enumerate(words):
        for f in by_index.get(i, ()):
            if f.mode == "insert":
                out.append(AerWord(f.payload & PAYLOAD_MASK))
        dropped = any(f.mode == "drop" for f in by_index.get(i, ()))
        payload = w.payload
        for f in by_index.get(i, ()):
            if f.mode == "corrupt":
                payload ^= f.mask & PAYLOAD_MASK
        if not dropped:
            out.append(AerWord(payload))
    return out
