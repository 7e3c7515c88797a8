"""Prime fields, prime search and Reed-Solomon encoding.

Only prime alphabets are supported. Codewords are evaluations of a
polynomial of degree < k at every field element 0..q-1, so the block
length equals q.
"""

from dataclasses import dataclass

import numpy as np

# Witness set that makes Miller-Rabin deterministic for every n < 3.3e24,
# which covers the full 64-bit range.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_U64_MAX = (1 << 64) - 1


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def smallest_prime_geq(n: int) -> int:
    """Least prime p >= n.

    Raises OverflowError when the search would leave the 64-bit range.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if n > _U64_MAX:
        raise OverflowError("prime search starts beyond 64 bits")
    p = n
    while not is_prime(p):
        p += 1
        if p > _U64_MAX:
            raise OverflowError(f"no prime >= {n} below 2**64")
    return p


def first_primes(count: int) -> list[int]:
    """The first `count` primes in increasing order."""
    primes: list[int] = []
    p = 2
    while len(primes) < count:
        primes.append(p)
        p = smallest_prime_geq(p + 1)
    return primes


@dataclass(frozen=True)
class PrimeField:
    p: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    def add(self, x, y):
        return (x + y) % self.p

    def sub(self, x, y):
        return (x - y) % self.p

    def neg(self, x):
        return (-x) % self.p

    def mul(self, x, y):
        return x * y % self.p

    def inv(self, x):
        x %= self.p
        if x == 0:
            raise ZeroDivisionError("0 has no inverse")
        return pow(x, self.p - 2, self.p)

    def pow(self, x, e):
        return pow(x, e, self.p)


def index_to_message(x: int, q: int, k: int) -> tuple[int, ...]:
    """Base-q digits of x, least significant first, padded to length k."""
    if x < 0 or x >= q**k:
        raise ValueError(f"item {x} outside [0, {q}^{k})")
    digits = []
    for _ in range(k):
        x, r = divmod(x, q)
        digits.append(r)
    return tuple(digits)


def message_to_index(message, q: int) -> int:
    x = 0
    for digit in reversed(message):
        x = x * q + digit
    return x


@dataclass(frozen=True)
class RsCode:
    """Reed-Solomon code over GF(q) with k coefficients and block length q."""

    q: int
    k: int

    def __post_init__(self):
        if not is_prime(self.q):
            raise ValueError(f"alphabet size {self.q} is not prime")
        if not 1 <= self.k <= self.q:
            raise ValueError(f"need 1 <= k <= q, got k={self.k}, q={self.q}")

    @property
    def length(self) -> int:
        return self.q

    @property
    def relative_distance(self) -> float:
        return 1 - (self.k - 1) / self.q

    def encode(self, message) -> tuple[int, ...]:
        if len(message) != self.k:
            raise ValueError(f"message has length {len(message)}, expected {self.k}")
        q = self.q
        if any(not 0 <= c < q for c in message):
            raise ValueError("message symbols must lie in [0, q)")
        out = []
        for point in range(q):
            acc = 0
            for c in reversed(message):
                acc = (acc * point + c) % q
            out.append(acc)
        return tuple(out)

    def encode_items(self, n_items: int) -> np.ndarray:
        """Codewords of items 0..n_items-1 as a (q, n_items) array.

        Row i holds coordinate i of every codeword, i.e. the values of the
        i-th hash function.
        """
        q, k = self.q, self.k
        if n_items > q**k:
            raise ValueError(f"{n_items} items do not fit in {q}^{k} messages")
        x = np.arange(n_items, dtype=np.int64)
        digits = np.empty((k, n_items), dtype=np.int64)
        for j in range(k):
            x, digits[j] = np.divmod(x, q)
        points = np.arange(q, dtype=np.int64)[:, None]
        acc = np.zeros((q, n_items), dtype=np.int64)
        for j in reversed(range(k)):
            acc = (acc * points + digits[j][None, :]) % q
        return acc


def rs_encode(code: RsCode, message) -> tuple[int, ...]:
    return code.encode(message)
