from opinionnet import rng


def test_streams_are_reproducible_and_keyed():
    a = rng.stream(5, rng.STEP, 3, rng.CHOOSE).random(4)
    assert (a == rng.stream(5, rng.STEP, 3, rng.CHOOSE).random(4)).all()
    assert not (a == rng.stream(5, rng.STEP, 4, rng.CHOOSE).random(4)).any()
    assert not (a == rng.stream(6, rng.STEP, 3, rng.CHOOSE).random(4)).any()


def test_derived_seed_range():
    s = rng.derive_seed(rng.MAX_SEED, rng.INIT, rng.GRAPH)
    assert 0 <= s <= rng.MAX_SEED
    assert s == rng.derive_seed(rng.MAX_SEED, rng.INIT, rng.GRAPH)
