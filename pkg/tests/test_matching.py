"""Matching container, invariants, and text serialization."""

from __future__ import annotations

import numpy as np
import pytest

from manymatch import (
    Matching,
    parse_matching,
    read_matching,
    serialize_matching,
    write_matching,
)


def example() -> Matching:
    return Matching.from_parts([((0, 1), (2,)), ((2,), (0, 1))], 4.5)


def test_from_parts_canonicalizes():
    a = Matching.from_parts([((1, 0), (2,)), ((2,), (1, 0)), ((), ())], 4.5)
    assert a == example()
    assert a.clusters == (((0, 1), (2,)), ((2,), (0, 1)))


def test_validate_accepts_the_example():
    example().validate(n_g=3, n_h=3, k_max=2)


@pytest.mark.parametrize(
    "clusters, n_g, n_h, k_max, fragment",
    [
        ([((0, 1, 2), ())], 3, 0, 2, "exceeds k_max"),
        ([((0,), (0,)), ((0,), (1,))], 1, 2, 2, "repeated"),
        ([((0,), (0,))], 2, 1, 2, "exactly once"),
        ([((0,), (5,))], 1, 1, 2, "out of range"),
    ],
)
def test_validate_rejects_broken_matchings(clusters, n_g, n_h, k_max, fragment):
    with pytest.raises(ValueError, match=fragment):
        Matching.from_parts(clusters, 0.0).validate(n_g, n_h, k_max)


def test_to_matrices_one_hot_rows():
    p1, p2 = example().to_matrices(3, 3)
    assert np.array_equal(p1, [[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    assert np.array_equal(p2, [[0.0, 0.0, 1.0], [1.0, 1.0, 0.0]])


def test_cluster_index_lookup():
    m = example()
    assert np.array_equal(m.cluster_of_g(3), [0, 0, 1])
    assert np.array_equal(m.cluster_of_h(3), [1, 1, 0])


def test_serialized_form_is_pinned():
    text = serialize_matching(example())
    assert text == ("cluster 0 | G: 0,1 | H: 2\ncluster 1 | G: 2 | H: 0,1\nobjective 4.5\n")


def test_round_trip_through_text(tmp_path):
    m = Matching.from_parts([((0,), ()), ((1, 2), (0, 1)), ((), (2, 3))], 1.0 / 3.0)
    assert parse_matching(serialize_matching(m)) == m
    path = tmp_path / "out.match"
    write_matching(m, path)
    assert read_matching(path) == m


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ValueError, match="line 1"):
        parse_matching("not a cluster line\nobjective 0.0\n")
    with pytest.raises(ValueError, match="objective"):
        parse_matching("cluster 0 | G: 0 | H: 0\n")


def test_read_errors_name_the_file(tmp_path):
    path = tmp_path / "bad.match"
    path.write_text("cluster 0 | G: zero | H: 0\nobjective 0.0\n")
    with pytest.raises(ValueError) as err:
        read_matching(path)
    assert str(path) in str(err.value)
