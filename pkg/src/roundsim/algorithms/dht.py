"""Distributed hash table lookups on a ring: Chord-style greedy ring
routing (no fingers) and Kademlia-style prefix-group shortcuts.

Nodes get ids 0..n-1 on a ring. The query workload (one record per
query: injection round, origin, target) is drawn up front from the
workload stream, so variants run the exact same queries under one seed.
Kademlia adds one shortcut link per prefix group on top of the ring,
chosen from the topology stream, and needs n to be a power of two so
the identifier space is fully populated.
"""

from ..errors import ConfigError, MetricError
from ..node import AlgorithmNode
from .base import Algorithm, register

CHORD = "chord"
KADEMLIA = "kademlia"

TAG_RESOLVED = "queryResolved"
TAG_FORWARDED = "queryForwarded"


def ring_next_hop(node_id: int, target: int, n: int) -> int:
    """Neighbor in the direction of the shorter ring distance; clockwise
    wins ties."""
    clockwise = (target - node_id) % n
    if clockwise <= (node_id - target) % n:
        return (node_id + 1) % n
    return (node_id - 1) % n


def common_prefix_len(a: int, b: int, bits: int) -> int:
    diff = a ^ b
    if diff == 0:
        return bits
    return bits - diff.bit_length()


def prefix_groups(node_id: int, bits: int):
    """For each prefix length l, the id range [lo, hi) of peers sharing
    the first l bits with node_id and differing at bit l."""
    groups = []
    for l in range(bits):
        width = bits - l - 1
        lo = ((node_id >> width) ^ 1) << width
        groups.append((lo, lo + (1 << width)))
    return groups


class DhtNode(AlgorithmNode):
    def __init__(self, node_id, n, variant, bits, shortcuts, schedule):
        self.id = node_id
        self.n = n
        self.variant = variant
        self.bits = bits
        self.shortcuts = shortcuts  # per prefix length, kademlia only
        self.schedule = schedule

    def perform_computation(self, ctx):
        while ctx.in_stream:
            _, qid, target, hops = ctx.pop_in_stream().payload
            self._handle(ctx, qid, target, hops)
        for qid, origin, target in self.schedule.get(ctx.round, ()):
            if origin == self.id:
                self._handle(ctx, qid, target, 0)

    def _handle(self, ctx, qid, target, hops):
        if target == self.id:
            ctx.log(TAG_RESOLVED, {"query": qid, "target": target, "hops": hops})
            return
        if self.variant == CHORD:
            nxt = ring_next_hop(self.id, target, self.n)
            ctx.log(TAG_FORWARDED, {"query": qid, "to": nxt})
        else:
            nxt, fallback = self._kademlia_next_hop(target)
            ctx.log(TAG_FORWARDED, {"query": qid, "to": nxt, "fallback": fallback})
        ctx.unicast(nxt, ("q", qid, target, hops + 1))

    def _kademlia_next_hop(self, target):
        own = common_prefix_len(self.id, target, self.bits)
        best, best_len = None, own
        for peer in self.shortcuts:
            length = common_prefix_len(peer, target, self.bits)
            if length > best_len or (length == best_len and best is not None
                                     and peer < best):
                best, best_len = peer, length
        if best is not None:
            return best, False
        # No shortcut improves the prefix; fall back to XOR distance over
        # everything this node links to. Unreachable on a populated space.
        candidates = sorted(set(self.shortcuts)
                            | {(self.id + 1) % self.n, (self.id - 1) % self.n})
        return min(candidates, key=lambda p: (p ^ target, p)), True


@register
class DhtFamily(Algorithm):
    variants = (CHORD, KADEMLIA)

    @classmethod
    def default_params(cls, algorithm_id):
        return {"variant": algorithm_id, "queriesPerRound": 1}

    @classmethod
    def validate(cls, config):
        super().validate(config)
        rate = config.algorithm_params.get("queriesPerRound")
        if isinstance(rate, bool) or not isinstance(rate, int) or rate < 0:
            raise ConfigError("algorithmParams.queriesPerRound",
                              f"expected an integer >= 0, got {rate!r}")
        n = config.n_nodes
        if n < 2:
            raise ConfigError("topology", "a ring needs at least 2 nodes")
        if set(config.adjacency) != set(range(n)):
            raise ConfigError("topology", "node ids must be 0..n-1")
        for u in range(n):
            ring = {(u - 1) % n, (u + 1) % n}
            if not ring.issubset(config.adjacency[u]):
                raise ConfigError("topology",
                                  f"node {u} is missing a ring neighbor")
        if config.algorithm_params["variant"] == KADEMLIA and n & (n - 1):
            raise ConfigError("topology.nodes",
                              f"kademlia needs a power-of-two node count, got {n}")

    def __init__(self, config, streams):
        super().__init__(config, streams)
        self.n = config.n_nodes
        self.bits = max(1, (self.n - 1).bit_length())
        self.schedule = self._draw_schedule()
        self.shortcuts = {}
        if self.params["variant"] == KADEMLIA:
            rng = streams.topology()
            for u in range(self.n):
                picks = []
                for lo, hi in prefix_groups(u, self.bits):
                    picks.append(lo + int(rng.integers(hi - lo)))
                self.shortcuts[u] = tuple(picks)

    def _draw_schedule(self):
        rate = self.params["queriesPerRound"]
        if rate == 0:
            return {}
        rng = self.streams.workload()
        schedule = {}
        qid = 0
        for round_ in range(self.config.rounds_per_computation):
            entries = []
            for _ in range(rate):
                origin = int(rng.integers(self.n))
                target = int(rng.integers(self.n))
                entries.append((qid, origin, target))
                qid += 1
            schedule[round_] = entries
        return schedule

    def adjacency(self):
        if not self.shortcuts:
            return self.config.adjacency
        merged = {}
        for u, neighbors in self.config.adjacency.items():
            merged[u] = tuple(sorted(set(neighbors) | set(self.shortcuts[u])))
        return merged

    def create_node(self, node_id):
        return DhtNode(node_id, self.n, self.params["variant"], self.bits,
                       self.shortcuts.get(node_id, ()), self.schedule)


def mean_hops(doc):
    """Pooled mean hop count over every resolved query in the run."""
    resolved = doc.payloads(TAG_RESOLVED)
    if not resolved:
        raise MetricError("no resolved queries in the log")
    return sum(r["hops"] for r in resolved) / len(resolved), len(resolved), None
