"""Tests for the deterministic thread pool helpers."""

import pytest

from src.workers import first_hit, map_ordered, split_chunks


def test_single_worker_keeps_one_chunk():
    assert split_chunks([1, 2, 3], 1) == [[1, 2, 3]]


def test_chunks_are_contiguous_and_cover_everything():
    items = list(range(10))
    chunks = split_chunks(items, 2)
    assert len(chunks) == 8
    assert [x for chunk in chunks for x in chunk] == items
    assert [len(c) for c in chunks] == [2, 2, 1, 1, 1, 1, 1, 1]


@pytest.mark.parametrize("workers", [1, 2, 3, 8])
def test_first_hit_is_the_earliest_in_order(workers):
    items = list(range(100))

    def scan(chunk):
        for x in chunk:
            if x % 7 == 3 and x > 20:
                return x
        return None

    assert first_hit(items, scan, workers) == 24


def test_first_hit_without_hits():
    assert first_hit(list(range(20)), lambda chunk: None, 4) is None


@pytest.mark.parametrize("workers", [1, 4])
def test_map_ordered_keeps_input_order(workers):
    assert map_ordered(list(range(12)), lambda x: x * x, workers) == [x * x for x in range(12)]
