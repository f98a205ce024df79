"""Counter-based random streams keyed by (seed, stream ids).

Each logical unit of work (a trajectory, a grid node, a sampling block) gets
its own Philox generator derived from the root seed and a tuple of integer
ids, so results do not depend on scheduling or on how work is batched.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, *keys: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


# stream-id namespaces, so different experiments never share a stream
NS_SAMPLING = 1
NS_TRAJECTORY = 2
NS_NODE = 3
NS_PASSAGE = 4
NS_PATH = 5
NS_FUNCTIONAL = 6
NS_PARETO = 7
NS_CONFIG = 8
