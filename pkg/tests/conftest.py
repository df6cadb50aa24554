import numpy as np
import pytest

from evohist import GenerationRecord, RunConfig, RunHistory, make_spec, run


def synthetic_history(xs, ys, problem="dtlz2", algorithm="nsga2", seed=1):
    """Assemble a RunHistory directly from per-generation x/y matrices."""
    xs = [np.asarray(x, dtype=float) for x in xs]
    ys = [np.asarray(y, dtype=float) for y in ys]
    gens = tuple(GenerationRecord(t, x, y) for t, (x, y) in enumerate(zip(xs, ys)))
    return RunHistory(
        problem=problem,
        M=ys[0].shape[1],
        D=xs[0].shape[1],
        algorithm=algorithm,
        population_size=xs[0].shape[0],
        evaluation_budget=xs[0].shape[0] * len(xs),
        seed=seed,
        generations=gens,
    )


@pytest.fixture(scope="session")
def short_run():
    """A small but real DTLZ2 optimisation shared by read-only tests."""
    return run(make_spec("dtlz2", 3), RunConfig(population_size=20, evaluation_budget=400, seed=3))
