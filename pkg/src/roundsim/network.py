"""Network fabric: topology, channels, packets, delay and loss.

Channels are unicast and FIFO by default. A packet's delivery round is
fixed at enqueue time (send round + sampled delay, clamped so delivery
order matches enqueue order on FIFO channels); delivery itself is a
bucket lookup per round, so idle channels cost nothing.
"""

from dataclasses import dataclass
from typing import Optional

from .errors import ConfigError
from .rng import StreamFactory
from .runlog import NET_DELIVER, NET_DROP, NET_SEND, RunLogger

DETERMINISTIC = "deterministic"
UNIFORM = "uniform"
POISSON = "poisson"


@dataclass(frozen=True)
class DelayDistribution:
    """Per-message delay law; every sample is an integer number of rounds >= 1.

    Poisson is shifted by one (1 + Poisson(mean - 1)) so the one-round
    minimum holds while the configured mean is preserved.
    """

    kind: str
    value: int = 0        # deterministic
    min: int = 0          # uniform, inclusive
    max: int = 0          # uniform, inclusive
    mean: float = 0.0     # poisson

    @staticmethod
    def deterministic(value: int) -> "DelayDistribution":
        return DelayDistribution(DETERMINISTIC, value=value)

    @staticmethod
    def uniform(lo: int, hi: int) -> "DelayDistribution":
        return DelayDistribution(UNIFORM, min=lo, max=hi)

    @staticmethod
    def poisson(mean: float) -> "DelayDistribution":
        return DelayDistribution(POISSON, mean=mean)

    @property
    def is_random(self) -> bool:
        return self.kind != DETERMINISTIC

    def upper_bound(self) -> Optional[int]:
        """Largest possible sample, None if unbounded."""
        if self.kind == DETERMINISTIC:
            return self.value
        if self.kind == UNIFORM:
            return self.max
        return None

    def expected(self) -> float:
        if self.kind == DETERMINISTIC:
            return float(self.value)
        if self.kind == UNIFORM:
            return (self.min + self.max) / 2.0
        return self.mean

    def to_json(self) -> dict:
        if self.kind == DETERMINISTIC:
            return {"kind": DETERMINISTIC, "value": self.value}
        if self.kind == UNIFORM:
            return {"kind": UNIFORM, "min": self.min, "max": self.max}
        return {"kind": POISSON, "mean": self.mean}


def sample_delay(dist: DelayDistribution, rng) -> int:
    """Draw one delay; integer, always >= 1."""
    if dist.kind == DETERMINISTIC:
        return dist.value
    if dist.kind == UNIFORM:
        return int(rng.integers(dist.min, dist.max + 1))
    return 1 + int(rng.poisson(dist.mean - 1.0))


@dataclass(slots=True)
class Packet:
    """Envelope around an algorithm message while in transit."""

    source: int
    destination: int
    send_round: int
    delay: int
    delivery_round: int
    payload: object
    chan_seq: int  # enqueue order on the owning channel


class Channel:
    """Unicast link from one sender to one receiver."""

    __slots__ = ("sender", "receiver", "delay", "loss_probability", "fifo",
                 "last_delivery_round", "pending", "_seq", "_rng", "_streams")

    def __init__(self, sender: int, receiver: int, delay: DelayDistribution,
                 loss_probability: float, streams: StreamFactory, fifo: bool = True):
        self.sender = sender
        self.receiver = receiver
        self.delay = delay
        self.loss_probability = loss_probability
        self.fifo = fifo
        self.last_delivery_round = 0
        self.pending = 0
        self._seq = 0
        self._rng = None  # created on first random draw
        self._streams = streams

    @property
    def rng(self):
        if self._rng is None:
            self._rng = self._streams.channel(self.sender, self.receiver)
        return self._rng

    def make_packet(self, payload, send_round: int) -> Optional[Packet]:
        """Loss trial, then delay sample; None when the message is lost.

        The loss trial comes first so a lost message never consumes a
        delay sample.
        """
        if self.loss_probability > 0.0 and self.rng.random() < self.loss_probability:
            return None
        if self.delay.kind == DETERMINISTIC:
            delay = self.delay.value
        else:
            delay = sample_delay(self.delay, self.rng)
        delivery = send_round + delay
        if self.fifo and delivery < self.last_delivery_round:
            delivery = self.last_delivery_round
        self.last_delivery_round = delivery
        self._seq += 1
        self.pending += 1
        return Packet(self.sender, self.receiver, send_round, delay, delivery,
                      payload, self._seq)


class Network:
    """All channels of one computation plus the in-flight packet schedule."""

    def __init__(self, adjacency: dict, delay: DelayDistribution,
                 loss_probability: float, streams: StreamFactory,
                 fifo: bool = True, logger: Optional[RunLogger] = None):
        self.adjacency = adjacency
        self.channels = {}
        for u in sorted(adjacency):
            for v in adjacency[u]:
                self.channels[(u, v)] = Channel(u, v, delay, loss_probability,
                                                streams, fifo=fifo)
        self._buckets = {}  # delivery round -> list[Packet]
        self._logger = logger
        self.in_flight = 0
        self.total_sent = 0
        self.total_delivered = 0
        self.total_dropped = 0

    def neighbors(self, node_id: int) -> tuple:
        return self.adjacency[node_id]

    def channel(self, sender: int, receiver: int) -> Channel:
        try:
            return self.channels[(sender, receiver)]
        except KeyError:
            raise ConfigError("topology", f"no channel {sender}->{receiver}") from None

    def enqueue(self, sender: int, receiver: int, payload, send_round: int) -> Optional[Packet]:
        channel = self.channel(sender, receiver)
        packet = channel.make_packet(payload, send_round)
        log = self._logger
        if packet is None:
            self.total_dropped += 1
            if log is not None and log.enabled(NET_DROP):
                log.append(NET_DROP, {"from": sender, "to": receiver})
            return None
        self._buckets.setdefault(packet.delivery_round, []).append(packet)
        self.in_flight += 1
        self.total_sent += 1
        if log is not None and log.enabled(NET_SEND):
            log.append(NET_SEND, {"from": sender, "to": receiver,
                                  "deliveryRound": packet.delivery_round})
        return packet

    def collect_deliverable(self, round_: int) -> dict:
        """Packets whose delivery round has arrived, grouped by destination.

        Within a destination, packets are ordered by (sender id, channel
        enqueue order). Must be called once per round, in round order.
        """
        bucket = self._buckets.pop(round_, None)
        if not bucket:
            return {}
        self.in_flight -= len(bucket)
        self.total_delivered += len(bucket)
        by_dest = {}
        for packet in bucket:
            self.channels[(packet.source, packet.destination)].pending -= 1
            by_dest.setdefault(packet.destination, []).append(packet)
        log = self._logger
        deliver_enabled = log is not None and log.enabled(NET_DELIVER)
        for dest, packets in by_dest.items():
            packets.sort(key=lambda p: (p.source, p.chan_seq))
            if deliver_enabled:
                for p in packets:
                    log.append(NET_DELIVER, {"from": p.source, "to": dest,
                                             "sentRound": p.send_round})
        return by_dest
