import numpy as np
import pytest

from ksz import hadamard as hd
from ksz.errors import NotHadamardError, RegistryExhaustedError


def gram(h):
    e = np.asarray(h.entries if hasattr(h, "entries") else h, dtype=np.int64)
    return e @ e.T


def is_hadamard_oracle(h):
    t = len(h.entries)
    return np.array_equal(gram(h), t * np.eye(t, dtype=np.int64))


def test_base_matrices():
    assert hd.base_matrix(1).entries.tolist() == [[1]]
    assert hd.base_matrix(2).entries.tolist() == [[1, 1], [1, -1]]
    with pytest.raises(ValueError):
        hd.base_matrix(3)


def test_sylvester_h4_literal():
    h4 = hd.sylvester_double(hd.base_matrix(2))
    assert h4.entries.tolist() == [[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]]
    assert h4.hadamard_certified and h4.is_normalized


@pytest.mark.parametrize("q", [3, 7, 11, 19, 23, 31, 43, 47, 59, 67, 71, 79, 83, 103])
def test_paley_orders(q):
    h = hd.paley_one(q)
    assert h.order == q + 1
    assert is_hadamard_oracle(h)
    assert h.is_normalized


@pytest.mark.parametrize("q", [5, 13, 9, 15, 1, 2])
def test_paley_rejects_bad_q(q):
    with pytest.raises(ValueError):
        hd.paley_one(q)


def test_kronecker_orthogonal():
    k = hd.kronecker(hd.paley_one(3), hd.paley_one(11))
    assert k.order == 48 and is_hadamard_oracle(k) and k.is_normalized


def test_operations_reject_uncertified():
    bad = hd.SignMatrix(np.array([[1, 1], [1, 1]], dtype=np.int8))
    assert not hd.verify_hadamard(bad)
    with pytest.raises(NotHadamardError):
        hd.sylvester_double(bad)
    with pytest.raises(NotHadamardError):
        hd.kronecker(bad, hd.base_matrix(2))


def test_sign_matrix_validation():
    with pytest.raises(ValueError):
        hd.SignMatrix(np.array([[1, 0], [1, 1]]))
    with pytest.raises(ValueError):
        hd.SignMatrix(np.ones((2, 3)))


def test_verify_detects_single_flip():
    h = hd.paley_one(11).entries.copy()
    h[5, 7] *= -1
    assert not hd.verify_hadamard(hd.SignMatrix(h))


@pytest.mark.parametrize("t", [3, 6, 10])
def test_verify_rejects_impossible_orders(t):
    assert not hd.verify_hadamard(hd.SignMatrix(np.ones((t, t), dtype=np.int8)))


def test_normalize_keeps_orthogonality():
    rng = np.random.default_rng(0)
    h = hd.paley_one(19).entries.astype(np.int8)
    d1 = rng.choice([-1, 1], 20).astype(np.int8)
    d2 = rng.choice([-1, 1], 20).astype(np.int8)
    scrambled = hd.certify(hd.SignMatrix(d1[:, None] * h * d2[None, :]))
    n = hd.normalize(scrambled)
    assert n.is_normalized and is_hadamard_oracle(n)


def test_pm1_roundtrip(tmp_path):
    h = hd.paley_one(11)
    path = tmp_path / "h12.pm1"
    hd.write_pm1(path, h)
    back = hd.read_pm1(path)
    assert back == h and back.hadamard_certified
    assert path.read_text() == hd.format_pm1(back)


def test_pm1_rejects_garbage():
    with pytest.raises(ValueError):
        hd.parse_pm1("2\n+x\n++\n")
    with pytest.raises(ValueError):
        hd.parse_pm1("2\n++\n")
    # a well-formed sign matrix loads, but only orthogonal ones come back certified
    assert not hd.parse_pm1("2\n++\n++\n").hadamard_certified
    assert hd.parse_pm1("2\n++\n+-\n").hadamard_certified


def test_strict_registry_exact_set():
    reg = hd.registry_orders(hd.Mode.STRICT412, 2048)
    expected = sorted({4 ** i * 12 ** j for i in range(7) for j in range(5) if 4 ** i * 12 ** j <= 2048})
    assert list(reg.orders) == expected
    assert len(reg) == 13


def test_extended_registry_closure():
    reg = hd.registry_orders(hd.Mode.EXTENDED, 400)
    gens = [2] + [q + 1 for q in range(3, 400) if q % 4 == 3 and all(q % d for d in range(2, int(q ** 0.5) + 1))]
    closure = {1}
    frontier = [1]
    while frontier:
        x = frontier.pop()
        for g in gens:
            if x * g <= 400 and x * g not in closure:
                closure.add(x * g)
                frontier.append(x * g)
    assert set(reg.orders) == closure
    for t in reg.orders:
        assert reg.recipe_for(t).order == t


def test_conjecture_mode_marks_unknown_orders():
    reg = hd.registry_orders(hd.Mode.CONJECTURE, 100)
    assert set(reg.orders) == {1, 2} | set(range(4, 101, 4))
    ext = hd.registry_orders(hd.Mode.EXTENDED, 100)
    for t in reg.orders:
        assert (reg.recipe_for(t) is None) == (t not in ext)
    # 92 = 4 * 23 is not reachable by doubling or Paley products below the limit
    assert reg.recipe_for(92) is None
    with pytest.raises(RegistryExhaustedError):
        reg.realize(92)


@pytest.mark.parametrize("n,t", [(1, 1), (2, 4), (5, 12), (12, 12), (13, 16), (1000, 1024), (5000, 6912)])
def test_nearest_order_strict(n, t):
    c = hd.nearest_order(hd.registry_orders(), n)
    assert c.order == t
    assert c.delta == pytest.approx(t / n - 1)


def test_nearest_order_exhausted():
    with pytest.raises(RegistryExhaustedError):
        hd.nearest_order(hd.registry_orders(hd.Mode.STRICT412, 100), 200)


def test_consecutive_ratios_small():
    reg = hd.registry_orders(hd.Mode.STRICT412, 200)
    assert hd.consecutive_ratios(reg) == [(1, 4.0), (4, 3.0), (12, 16 / 12), (16, 3.0), (48, 64 / 48),
                                          (64, 144 / 64), (144, 192 / 144)]


def test_realized_registry_matrices_are_hadamard():
    reg = hd.registry_orders(hd.Mode.EXTENDED, 260)
    for t in reg.orders:
        h = reg.realize(t)
        assert h.order == t and is_hadamard_oracle(h)


def test_backends_agree_on_verification():
    from ksz import _engine
    h = hd.registry_orders().realize(192)
    bad = h.entries.copy()
    bad[100, 3] *= -1
    for b in _engine.available_backends():
        assert hd.verify_hadamard(h, backend=b)
        assert not hd.verify_hadamard(hd.SignMatrix(bad), backend=b)
