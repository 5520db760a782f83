import os
import random
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from osrace.abstract import precompute_eis
from osrace.generators import RandomTraceConfig, add_fork_join, gen_random_trace
from osrace.index import build_indices
from osrace.trace import read_trace

settings.register_profile("dev", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=300, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "dev"))

DATA = Path(__file__).parent / "data"


def load(name):
    tr = read_trace(DATA / f"{name}.trace")
    ix = build_indices(tr)
    return tr, ix, precompute_eis(ix)


def small_trace(seed, max_events=12, max_threads=3, max_locks=2, max_vars=2):
    """The small random family shared by the oracle comparisons."""
    rng = random.Random(seed)
    cfg = RandomTraceConfig(
        threads=rng.randint(2, max_threads),
        locks=rng.randint(1, max_locks),
        vars=rng.randint(1, max_vars),
        events=rng.randint(2, max_events),
        lock_density=rng.choice([0.3, 0.5, 0.7, 0.9]),
        read_ratio=rng.choice([0.3, 0.5]),
        close_all=rng.random() < 0.7,
    )
    tr = gen_random_trace(cfg, seed)
    if rng.random() < 0.3:
        tr = add_fork_join(tr, seed)
        # keep the size bound after inserting fork/join events
        if len(tr) > max_events:
            tr = gen_random_trace(cfg, seed)
    return tr


def medium_trace(seed, n=None):
    rng = random.Random(seed)
    cfg = RandomTraceConfig(
        threads=rng.randint(2, 6),
        locks=rng.randint(1, 4),
        vars=rng.randint(1, 8),
        events=n if n is not None else rng.randint(20, 300),
        lock_density=rng.choice([0.2, 0.4, 0.6]),
        read_ratio=rng.choice([0.3, 0.5, 0.7]),
        close_all=rng.random() < 0.8,
    )
    tr = gen_random_trace(cfg, seed)
    if rng.random() < 0.3:
        tr = add_fork_join(tr, seed)
    return tr


@pytest.fixture(params=["sigma1", "sigma2", "sigma3", "sync_preserving_only", "memory_reversal"])
def fixture_trace(request):
    return load(request.param)
