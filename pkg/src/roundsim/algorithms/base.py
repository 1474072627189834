"""Algorithm family base class and the name registry.

A family class covers one or more registered algorithm ids (its variants).
The engine builds a fresh family instance per computation, so instance
state never leaks between computations; per-computation randomness comes
from the StreamFactory handed to __init__.
"""

from typing import Dict, Type

from ..node import AlgorithmNode


class Algorithm:
    # Registered ids served by this family, e.g. ("bitcoin", "ethereum").
    variants: tuple = ()
    # Datalink protocols opt out to exercise reordering channels.
    fifo_channels: bool = True

    @classmethod
    def default_params(cls, algorithm_id: str) -> dict:
        return {"variant": algorithm_id}

    @classmethod
    def validate(cls, config) -> None:
        """Reject configurations the family cannot run. Raises ConfigError."""
        from ..errors import ConfigError
        variant = config.algorithm_params.get("variant")
        if variant not in cls.variants:
            raise ConfigError("algorithmParams.variant",
                              f"expected one of {sorted(cls.variants)}, got {variant!r}")

    def __init__(self, config, streams):
        self.config = config
        self.params = config.algorithm_params
        self.streams = streams

    def adjacency(self) -> dict:
        """Channel map for this computation (families may augment it)."""
        return self.config.adjacency

    def create_node(self, node_id: int) -> AlgorithmNode:
        raise NotImplementedError

    def end_of_round(self, round_: int, nodes, ctxs, logger) -> None:
        pass

    def finalize(self, nodes, ctxs, logger) -> None:
        pass


_REGISTRY: Dict[str, Type[Algorithm]] = {}


def register(cls: Type[Algorithm]) -> Type[Algorithm]:
    for name in cls.variants:
        if name in _REGISTRY:
            raise ValueError(f"algorithm id {name!r} registered twice")
        _REGISTRY[name] = cls
    return cls


def get_algorithm(name: str) -> Type[Algorithm]:
    return _REGISTRY[name]


def registered_names() -> list:
    return sorted(_REGISTRY)
