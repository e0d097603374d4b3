import math

import hypothesis as hyp
import numpy as np
import pytest
from hypothesis import strategies as st

from qcfa.qkernel import (
    ChannelError,
    ContractionError,
    QuantumChannel,
    QuantumState,
    apply_channel,
    basis_measurement,
    check_channel,
    coin_channel,
    completion_unitary,
    dilate_contraction,
    identity_channel,
    matrix_from_json,
    matrix_to_json,
    projective_measurement,
    rotation_channel,
    unitary_channel,
)

# frozen independently of the package: math.sin(k * math.pi * math.sqrt(2)) ** 2
SIN2_1 = 0.9291080928344088
SIN2_5 = 0.04902497746944555

THETA = math.pi * math.sqrt(2)


def counter_matrix(d):
    # (u, x, y, z) -> (u, 4x, 4y + d*u, z + d*x); the two tape-symbol updates
    # used by the palindrome core, written out independently here.
    return np.array(
        [
            [1, 0, 0, 0],
            [0, 4, 0, 0],
            [d, 0, 4, 0],
            [0, d, 0, 1],
        ],
        dtype=float,
    )


def test_identity_channel_is_noop():
    psi = QuantumState([0.6, 0.8j])
    (label, p, post), = apply_channel(identity_channel(2), psi)
    assert label == "-"
    assert p == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(post.amplitudes, psi.amplitudes)


def test_projective_measurement_born_rule():
    psi = QuantumState([3 / 5, 4 / 5])
    res = apply_channel(projective_measurement(2, {"zero": [0], "one": [1]}), psi)
    probs = {label: p for label, p, _ in res}
    assert probs["zero"] == pytest.approx(9 / 25, abs=1e-12)
    assert probs["one"] == pytest.approx(16 / 25, abs=1e-12)


def test_rotation_then_measurement_single_pass():
    psi = QuantumState.basis(2)
    (_, _, rotated), = apply_channel(rotation_channel(THETA), psi)
    probs = {label: p for label, p, _ in apply_channel(basis_measurement(2), rotated)}
    assert probs["1"] == pytest.approx(SIN2_1, rel=1e-12)


def test_rotation_five_passes():
    psi = QuantumState.basis(2)
    ch = rotation_channel(THETA)
    for _ in range(5):
        (_, _, psi), = apply_channel(ch, psi)
    probs = {label: p for label, p, _ in apply_channel(basis_measurement(2), psi)}
    assert probs["1"] == pytest.approx(SIN2_5, rel=1e-10)


def test_rotation_balanced_passes_cancel():
    psi = QuantumState.basis(2)
    for theta in (THETA, THETA, -THETA, -THETA):
        (_, _, psi), = apply_channel(rotation_channel(theta), psi)
    res = apply_channel(basis_measurement(2), psi)
    # outcome "1" has probability ~sin^2(0) and is pruned as exactly 0 or dust
    p1 = sum(p for label, p, _ in res if label == "1")
    assert p1 < 1e-25


def test_duplicate_outcome_label_rejected():
    with pytest.raises(ChannelError, match="one operator per outcome"):
        QuantumChannel([("m", np.eye(2) * 0.5), ("m", np.eye(2) * 0.5)])


def test_incomplete_channel_rejected_on_apply():
    bad = QuantumChannel([("only", np.eye(2) * 0.5)])
    with pytest.raises(ChannelError, match="not complete"):
        apply_channel(bad, QuantumState.basis(2))


def test_check_channel_reports():
    good = check_channel(basis_measurement(3))
    assert good.ok and good.residual < 1e-15

    doubled = QuantumChannel([("a", np.eye(2)), ("b", np.eye(2))])
    rep = check_channel(doubled)
    assert not rep.ok
    assert rep.residual == pytest.approx(1.0, abs=1e-15)
    assert rep.branch_norms == {"a": 1.0, "b": 1.0}


def test_dilate_identity():
    ch = dilate_contraction(np.eye(2), 1.0)
    res = apply_channel(ch, QuantumState([1 / math.sqrt(2), 1j / math.sqrt(2)]))
    assert [label for label, _, _ in res] == ["go"]
    assert res[0][1] == pytest.approx(1.0, abs=1e-12)


def test_dilate_projector_restart_branch():
    ch = dilate_contraction(np.diag([1.0, 0.0]), 1.0)
    branches = dict(ch.branches)
    assert np.allclose(branches["restart"], np.diag([0.0, 1.0]), atol=1e-12)


def test_dilate_counter_matrices_complete():
    for d in (1, 2):
        ch = dilate_contraction(counter_matrix(d), 8.0)
        assert ch.completeness_residual() <= 1e-12
        assert check_channel(ch).ok


def test_dilate_rejects_oversized_matrix():
    with pytest.raises(ContractionError, match="c >="):
        dilate_contraction(2.0 * np.eye(2), 1.0)


def test_coin_channel_splits_evenly_and_keeps_ray():
    psi = QuantumState([0.6, 0.8])
    res = apply_channel(coin_channel(dim=2), psi)
    assert sorted(label for label, _, _ in res) == ["h", "t"]
    for _, p, post in res:
        assert p == pytest.approx(0.5, abs=1e-12)
        assert post.overlap2(psi) == pytest.approx(1.0, abs=1e-12)


def test_completion_unitary_hits_target():
    target = np.array([1, 1, 0, 0]) / math.sqrt(2)
    for src in range(4):
        U = completion_unitary(target, source=src)
        assert np.max(np.abs(U.conj().T @ U - np.eye(4))) < 1e-12
        assert np.allclose(U[:, src], target, atol=1e-12)


def test_projector_groups_must_partition():
    with pytest.raises(ChannelError):
        projective_measurement(3, {"a": [0], "b": [2]})


def test_unitary_channel_validates():
    with pytest.raises(ChannelError):
        unitary_channel(np.array([[1.0, 0.0], [0.0, 0.5]]))


amplitude = st.tuples(
    st.floats(-1, 1, allow_nan=False), st.floats(-1, 1, allow_nan=False)
).map(lambda t: complex(*t))


@hyp.given(
    st.lists(amplitude, min_size=2, max_size=2).filter(
        lambda v: sum(abs(x) ** 2 for x in v) > 1e-6
    ),
    st.floats(-10, 10, allow_nan=False),
)
def test_rotation_preserves_norm(vec, theta):
    psi = QuantumState(vec).normalized()
    (_, p, post), = apply_channel(rotation_channel(theta), psi)
    assert abs(p - 1.0) < 1e-12
    assert abs(post.norm() - 1.0) < 1e-12


@hyp.given(st.integers(2, 5), st.data())
def test_measurement_probabilities_sum_to_one(dim, data):
    vec = data.draw(
        st.lists(amplitude, min_size=dim, max_size=dim).filter(
            lambda v: sum(abs(x) ** 2 for x in v) > 1e-6
        )
    )
    psi = QuantumState(vec).normalized()
    res = apply_channel(basis_measurement(dim), psi)
    assert abs(sum(p for _, p, _ in res) - 1.0) < 1e-9
    assert all(p > 0 for _, p, _ in res)


def test_matrix_json_round_trip():
    m = np.array([[1 + 2j, 0.25], [-1j, 3.5]])
    assert np.array_equal(matrix_from_json(matrix_to_json(m), 2), m)
    with pytest.raises(ChannelError):
        matrix_from_json([[1.0, 0.0]], 2)
