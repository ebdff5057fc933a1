import random

import pytest

from wittdegen import _kernels_py, kernels

try:
    from wittdegen import _kernels_c
except ImportError:  # extension not built
    _kernels_c = None

needs_ext = pytest.mark.skipif(_kernels_c is None, reason="compiled kernels not built")


def rand_terms(rng, p, n, nvars=3):
    return {tuple([rng.randint(-2, 3)] + [rng.randint(0, 2 * p) for _ in range(nvars)]):
            rng.randint(1, p - 1) for _ in range(n)}


def rules(p):
    # slot 1: x^p -> x + pi ; slot 2: y^p -> y + x^(p-1) ; slot 3 free
    return ((2, {(0, 0, 1, 0): 1, (0, p - 1, 0, 0): 1}), (1, {(0, 1, 0, 0): 1, (1, 0, 0, 0): 1}))


def test_backend_is_selected():
    assert kernels.BACKEND in ("python", "cython")


@needs_ext
@pytest.mark.parametrize("seed", range(10))
def test_backends_agree(seed):
    rng = random.Random(seed)
    p = rng.choice([2, 3, 5, 7])
    a, b = rand_terms(rng, p, 20), rand_terms(rng, p, 15)
    for fn, args in (("add_terms", (a, b, p)), ("add_terms", (a, b, p, -1)),
                     ("scale_terms", (a, 3, p)), ("mul_terms", (a, b, p)),
                     ("shift_terms", (a, (1, 0, 2, 0)))):
        assert getattr(_kernels_c, fn)(*args) == getattr(_kernels_py, fn)(*args)
    assert _kernels_c.reduce_terms(a, rules(p), p, {}) == _kernels_py.reduce_terms(a, rules(p), p, {})
    acc_c, acc_p = {}, {}
    _kernels_c.accumulate(acc_c, a, 4)
    _kernels_py.accumulate(acc_p, a, 4)
    assert _kernels_c.finish(acc_c, p) == _kernels_py.finish(acc_p, p)


def test_pure_python_reduction_normalizes():
    p = 3
    out = _kernels_py.reduce_terms({(0, 3, 0, 0): 1}, rules(p), p, {})
    assert out == {(0, 1, 0, 0): 1, (1, 0, 0, 0): 1}
