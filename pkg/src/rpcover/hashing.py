"""Hit-and-miss hash families and their Boolean alphabet reduction.

A family of functions [N] -> [q] is (a, b)-hit-and-miss when every pair of
disjoint item sets A, B with |A| <= a and |B| <= b is separated by some
function, meaning no item of A collides with an item of B. The strong
variant asks for at least half of the functions to separate every pair.
"""

from functools import cached_property
from itertools import combinations
from math import comb

import numpy as np

from .budget import check_budget
from .codes import RsCode, first_primes, smallest_prime_geq


def ceil_log(n: int, base: int) -> int:
    """Smallest k >= 0 with base**k >= n."""
    k, power = 0, 1
    while power < n:
        power *= base
        k += 1
    return k


class HashFamily:
    """A q-ary family of ell functions over the items 0..N-1.

    Values are produced lazily; `matrix()` materializes the full (ell, N)
    table for consumers that need every function.
    """

    def __init__(self, N, q, size, kind, params=None, table=None):
        self.N = int(N)
        self.q = int(q)
        self.size = int(size)
        self.kind = kind
        self.params = dict(params or {})
        self._table = table

    @property
    def ell(self):
        return self.size

    def __repr__(self):
        return f"HashFamily(kind={self.kind!r}, N={self.N}, q={self.q}, ell={self.size})"

    def evaluate(self, i: int, x: int) -> int:
        if not 0 <= i < self.size or not 0 <= x < self.N:
            raise IndexError(f"function {i} / item {x} out of range")
        if self.kind == "naive":
            return x
        if self.kind == "prime-modulus":
            return x % self.params["primes"][i]
        return int(self.matrix()[i, x])

    def row(self, i: int) -> np.ndarray:
        if self.kind == "prime-modulus":
            return np.arange(self.N, dtype=np.int64) % self.params["primes"][i]
        return self.matrix()[i]

    def matrix(self) -> np.ndarray:
        if self._table is None:
            self._table = self._materialize()
            self._table.setflags(write=False)
        return self._table

    def _materialize(self):
        if self.kind == "naive":
            return np.arange(self.N, dtype=np.int64)[None, :]
        if self.kind == "prime-modulus":
            primes = np.asarray(self.params["primes"], dtype=np.int64)
            return np.arange(self.N, dtype=np.int64)[None, :] % primes[:, None]
        if self.kind == "reed-solomon":
            return RsCode(self.q, self.params["k"]).encode_items(self.N)
        raise ValueError(f"family of kind {self.kind!r} carries no table")

    @property
    def is_code(self):
        return self.kind == "reed-solomon"

    def to_json(self) -> dict:
        out = {"kind": self.kind, "N": self.N, "q": self.q, "ell": self.size}
        out.update(self.params)
        if self.kind == "explicit":
            out["table"] = self.matrix().tolist()
        return out

    @classmethod
    def from_json(cls, data: dict) -> "HashFamily":
        kind = data["kind"]
        if kind == "naive":
            return build_naive_hm(data["N"])
        if kind == "prime-modulus":
            return build_prime_modulus_hm(data["N"], data["a"], data["b"])
        if kind == "reed-solomon":
            fam = build_rs_hm(data["N"], data["a"], data["b"], strong=data["strong"])
            if (fam.q, fam.params["k"]) != (data["q"], data["k"]):
                raise ValueError("stored (q, k) disagree with the rebuilt family")
            return fam
        if kind == "explicit":
            return explicit_family(data["table"], data["q"])
        raise ValueError(f"unknown family kind {kind!r}")


def explicit_family(table, q) -> HashFamily:
    """Wrap an explicit (ell, N) value table, mainly for tests."""
    arr = np.array(table, dtype=np.int64, ndmin=2)
    if arr.size and (arr.min() < 0 or arr.max() >= q):
        raise ValueError("table values must lie in [0, q)")
    arr.setflags(write=False)
    return HashFamily(arr.shape[1], q, arr.shape[0], "explicit", table=arr)


def build_naive_hm(N: int) -> HashFamily:
    """The identity map, which separates every disjoint pair."""
    if N < 1:
        raise ValueError("N must be positive")
    return HashFamily(N, N, 1, "naive")


def build_prime_modulus_hm(N: int, a: int, b: int) -> HashFamily:
    """Functions x -> x mod p over the first 1 + ceil(a*b*log2 N) primes.

    Two distinct items collide modulo p only if p divides their difference,
    and a product of at most a*b differences below N has fewer than
    a*b*log2(N) + 1 distinct prime factors.
    """
    if N < 1 or a < 1 or b < 1:
        raise ValueError("need N, a, b >= 1")
    # ceil(a*b*log2 N) computed exactly as the bit length of N**(ab) - 1
    count = 1 + (N ** (a * b) - 1).bit_length()
    primes = first_primes(count)
    return HashFamily(N, primes[-1], count, "prime-modulus", {"a": a, "b": b, "primes": primes})


def build_rs_hm(N: int, a: int, b: int, strong: bool = False) -> HashFamily:
    """Reed-Solomon family with the smallest prime alphabet that works.

    For each prime q (increasing) take k = max(1, ceil(log_q N)) and accept
    when the code's collision rate (k-1)/q is strictly below 1/(ab), or at
    most 1/(2ab) for the strong variant.
    """
    if N < 1 or a < 1 or b < 1:
        raise ValueError("need N, a, b >= 1")
    q = 2
    while True:
        k = max(1, ceil_log(N, q))
        if strong:
            ok = 2 * a * b * (k - 1) <= q
        else:
            ok = a * b * (k - 1) < q
        if ok and k <= q:
            break
        q = smallest_prime_geq(q + 1)
    params = {"a": a, "b": b, "k": k, "strong": bool(strong)}
    return HashFamily(N, q, q, "reed-solomon", params)


def subsets_upto(q: int, b: int) -> list[tuple[int, ...]]:
    """All subsets of range(q) with at most b elements, by size then lexicographically."""
    out = []
    for j in range(min(b, q) + 1):
        out.extend(combinations(range(q), j))
    return out


def subset_count(q: int, b: int) -> int:
    return sum(comb(q, j) for j in range(min(b, q) + 1))


class BooleanHashFamily:
    """Alphabet reduction of a q-ary family.

    Function (i, S) maps x to 0 when h_i(x) lies in S and to 1 otherwise.
    Functions are ordered by i, then by S as listed by `subsets_upto`.
    """

    def __init__(self, source: HashFamily, b: int):
        if b > source.q:
            raise ValueError(f"b={b} exceeds alphabet size {source.q}")
        self.source = source
        self.b = b
        self.subsets = subsets_upto(source.q, b)
        self.N = source.N
        self.q = 2

    @property
    def size(self):
        return self.source.size * len(self.subsets)

    def index_of(self, i, S):
        return i * len(self.subsets) + self.subsets.index(tuple(sorted(S)))

    def function(self, index):
        i, j = divmod(index, len(self.subsets))
        return i, self.subsets[j]

    def functions(self):
        for i in range(self.source.size):
            for S in self.subsets:
                yield i, S

    def evaluate(self, func, x) -> int:
        i, S = self.function(func) if isinstance(func, int) else func
        return 0 if self.source.evaluate(i, x) in S else 1

    @cached_property
    def _matrix(self):
        src = self.source.matrix()
        rows = [np.where(np.isin(src[i], S), 0, 1) for i, S in self.functions()]
        out = np.array(rows, dtype=np.int64).reshape(self.size, self.N)
        out.setflags(write=False)
        return out

    def matrix(self) -> np.ndarray:
        return self._matrix


def reduce_to_boolean(H: HashFamily, b: int) -> BooleanHashFamily:
    return BooleanHashFamily(H, b)


def _pair_count(N, a, b):
    return sum(comb(N, j) for j in range(b + 1)) * sum(comb(N, i) for i in range(a + 1))


def separation_profile(H, a: int, b: int, budget=None, chunk=4096):
    """Minimum number of separating functions over all disjoint (A, B).

    Returns (min_count, witness) where witness is an (A, B) pair attaining
    the minimum, or (size, None) when every pair is trivially separated.
    Pairs with an empty side are separated by every function.
    """
    check_budget(_pair_count(H.N, a, b), budget, "hit-and-miss verification")
    M = np.asarray(H.matrix())
    ell, N = M.shape
    best, witness = ell, None
    for bsize in range(1, min(b, N) + 1):
        for B in combinations(range(N), bsize):
            vals = M[:, list(B)]
            blocked = (M[:, :, None] == vals[:, None, :]).any(axis=2)
            rest = np.setdiff1d(np.arange(N), B)
            for asize in range(1, min(a, rest.size) + 1):
                combos = combinations(rest.tolist(), asize)
                while True:
                    block = list(_take(combos, chunk))
                    if not block:
                        break
                    idx = np.array(block, dtype=np.int64)
                    hit = blocked[:, idx].any(axis=2)
                    counts = ell - hit.sum(axis=0)
                    j = int(np.argmin(counts))
                    if counts[j] < best:
                        best, witness = int(counts[j]), (block[j], B)
    return best, witness


def _take(it, n):
    for _, item in zip(range(n), it):
        yield item


def verify_hm(H, a: int, b: int, budget=None) -> bool:
    """Exhaustively check the (a, b) hit-and-miss property."""
    best, _ = separation_profile(H, a, b, budget)
    return best >= 1


def verify_strong_hm(H, a: int, b: int, budget=None) -> bool:
    """Exhaustively check that at least half the functions separate every pair."""
    best, _ = separation_profile(H, a, b, budget)
    return 2 * best >= H.size
