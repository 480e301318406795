import numpy as np

from chainbounds.seeding import label_id, stream


def test_streams_are_reproducible():
    a = stream(5, "x", 3).standard_normal(8)
    b = stream(5, "x", 3).standard_normal(8)
    assert np.array_equal(a, b)


def test_streams_differ_by_label_index_and_seed():
    base = stream(5, "x", 3).standard_normal(4)
    for other in (stream(5, "y", 3), stream(5, "x", 4), stream(6, "x", 3)):
        assert not np.array_equal(base, other.standard_normal(4))


def test_label_id_is_crc32():
    import zlib
    assert label_id("trial") == zlib.crc32(b"trial")
    assert label_id("a") == label_id("a")
