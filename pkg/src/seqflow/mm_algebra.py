"""Max-min semiring {0, 1, ω} and square matrices over it.

Concrete capacities live in ℕ ∪ {ω}; ω is the singleton :data:`OMEGA`, never an
integer sentinel. Abstract matrices store two Boolean row masks per row (entry
≥ 1, entry = ω), so the max-min product is computed as a pair of Boolean matrix
products.
"""
from __future__ import annotations

import enum
import functools
from typing import Iterable, Sequence, Union


@functools.total_ordering
class _Omega:
    """The unbounded capacity ω. Compares greater than every integer."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "OMEGA"

    def __str__(self):
        return "ω"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("seqflow.omega")

    def __lt__(self, other):
        if other is self:
            return False
        if isinstance(other, int):
            return False
        return NotImplemented

    def __reduce__(self):
        return (_Omega, ())


OMEGA = _Omega()

ExtNat = Union[int, _Omega]


def is_omega(x) -> bool:
    return x is OMEGA


def ext_add(x: ExtNat, y: ExtNat) -> ExtNat:
    """Saturating addition on ℕ ∪ {ω}."""
    if x is OMEGA or y is OMEGA:
        return OMEGA
    return x + y


def ext_min(x: ExtNat, y: ExtNat) -> ExtNat:
    if x is OMEGA:
        return y
    if y is OMEGA:
        return x
    return min(x, y)


def ext_sum(values: Iterable[ExtNat]) -> ExtNat:
    total: ExtNat = 0
    for v in values:
        total = ext_add(total, v)
    return total


def ext_to_json(x: ExtNat):
    return "omega" if x is OMEGA else int(x)


class MMValue(enum.IntEnum):
    ZERO = 0
    ONE = 1
    OMEGA = 2

    def __str__(self):
        return ("0", "1", "ω")[self.value]


def mm_max(x: MMValue, y: MMValue) -> MMValue:
    return x if x >= y else y


def mm_min(x: MMValue, y: MMValue) -> MMValue:
    return x if x <= y else y


def abstract_value(c: ExtNat) -> MMValue:
    if c is OMEGA:
        return MMValue.OMEGA
    if c < 0:
        raise ValueError(f"negative capacity {c}")
    return MMValue.ONE if c > 0 else MMValue.ZERO


def _bool_product(xrows: Sequence[int], yrows: Sequence[int]) -> tuple:
    out = []
    for r in xrows:
        acc = 0
        k = 0
        while r:
            if r & 1:
                acc |= yrows[k]
            r >>= 1
            k += 1
        out.append(acc)
    return tuple(out)


class AbstractMatrix:
    """Immutable square matrix over {0, 1, ω}.

    ``one[i]`` has bit j set iff entry (i, j) ≥ 1; ``om[i]`` has bit j set iff
    entry (i, j) = ω. Equality and hashing are structural.
    """

    __slots__ = ("n", "one", "om", "_hash")

    def __init__(self, n: int, one: Sequence[int], om: Sequence[int]):
        one = tuple(one)
        om = tuple(om)
        if len(one) != n or len(om) != n:
            raise ValueError("row count does not match dimension")
        full = (1 << n) - 1
        for a, b in zip(one, om):
            if b & ~a or a & ~full:
                raise ValueError("malformed row masks")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "one", one)
        object.__setattr__(self, "om", om)
        object.__setattr__(self, "_hash", hash((n, one, om)))

    def __setattr__(self, key, value):
        raise AttributeError("AbstractMatrix is immutable")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "AbstractMatrix":
        """Build from nested rows of MMValue / 0 / 1 / 2 (2 = ω) / OMEGA."""
        n = len(rows)
        one, om = [], []
        for row in rows:
            if len(row) != n:
                raise ValueError("matrix must be square")
            a = b = 0
            for j, v in enumerate(row):
                v = MMValue.OMEGA if v is OMEGA else MMValue(int(v))
                if v >= MMValue.ONE:
                    a |= 1 << j
                if v == MMValue.OMEGA:
                    b |= 1 << j
            one.append(a)
            om.append(b)
        return cls(n, one, om)

    @classmethod
    def zero(cls, n: int) -> "AbstractMatrix":
        return cls(n, (0,) * n, (0,) * n)

    def __getitem__(self, ij) -> MMValue:
        i, j = ij
        if (self.om[i] >> j) & 1:
            return MMValue.OMEGA
        if (self.one[i] >> j) & 1:
            return MMValue.ONE
        return MMValue.ZERO

    def rows(self) -> list[list[MMValue]]:
        return [[self[i, j] for j in range(self.n)] for i in range(self.n)]

    def __eq__(self, other):
        if not isinstance(other, AbstractMatrix):
            return NotImplemented
        return self.n == other.n and self.one == other.one and self.om == other.om

    def __hash__(self):
        return self._hash

    def __repr__(self):
        body = "; ".join(" ".join(str(v) for v in row) for row in self.rows())
        return f"AbstractMatrix[{body}]"

    def __mul__(self, other: "AbstractMatrix") -> "AbstractMatrix":
        return product(self, other)

    def __le__(self, other: "AbstractMatrix") -> bool:
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        return all(a & ~c == 0 and b & ~d == 0
                   for a, b, c, d in zip(self.one, self.om, other.one, other.om))

    def encode(self) -> bytes:
        """Canonical row-major encoding, 2 bits per entry."""
        out = bytearray()
        acc = nbits = 0
        for i in range(self.n):
            for j in range(self.n):
                acc = (acc << 2) | int(self[i, j])
                nbits += 2
                if nbits == 8:
                    out.append(acc)
                    acc = nbits = 0
        if nbits:
            out.append(acc << (8 - nbits))
        return bytes([self.n]) + bytes(out)

    def sort_key(self):
        return self.encode()

    def entries_equal_to(self, value: MMValue) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in range(self.n) if self[i, j] == value]

    def boolean_pair(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """The embedding into pairs of Boolean matrices: (≥1 mask, =ω mask)."""
        return self.one, self.om


class CapacityMatrix:
    """Square table of concrete capacities over ℕ ∪ {ω}."""

    __slots__ = ("rows",)

    def __init__(self, rows: Sequence[Sequence[ExtNat]]):
        n = len(rows)
        checked = []
        for row in rows:
            if len(row) != n:
                raise ValueError("capacity matrix must be square")
            out = []
            for c in row:
                if c is not OMEGA:
                    if isinstance(c, bool) or not isinstance(c, int) or c < 0:
                        raise ValueError(f"invalid capacity {c!r}")
                out.append(c)
            checked.append(tuple(out))
        object.__setattr__(self, "rows", tuple(checked))

    def __setattr__(self, key, value):
        raise AttributeError("CapacityMatrix is immutable")

    @classmethod
    def zeros(cls, n: int) -> "CapacityMatrix":
        return cls([[0] * n for _ in range(n)])

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij) -> ExtNat:
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        return isinstance(other, CapacityMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"CapacityMatrix({[list(r) for r in self.rows]!r})"

    def max_finite(self) -> int:
        return max((c for row in self.rows for c in row if c is not OMEGA), default=0)

    def finite_total(self) -> int:
        return sum(c for row in self.rows for c in row if c is not OMEGA)


def abstract(capacity) -> AbstractMatrix:
    """0 ↦ 0, ω ↦ ω, every finite k ≥ 1 ↦ 1."""
    rows = capacity.rows if isinstance(capacity, CapacityMatrix) else capacity
    return AbstractMatrix.from_rows([[abstract_value(c) for c in row] for row in rows])


def product(x: AbstractMatrix, y: AbstractMatrix) -> AbstractMatrix:
    """(x·y)(v, v') = max_v'' min(x(v, v''), y(v'', v'))."""
    if x.n != y.n:
        raise ValueError(f"dimension mismatch: {x.n} vs {y.n}")
    return AbstractMatrix(x.n, _bool_product(x.one, y.one), _bool_product(x.om, y.om))


def product_all(xs: Iterable[AbstractMatrix]) -> AbstractMatrix:
    it = iter(xs)
    acc = next(it)
    for x in it:
        acc = product(acc, x)
    return acc


def is_idempotent(x: AbstractMatrix) -> bool:
    return product(x, x) == x


def idempotent_power(x: AbstractMatrix) -> AbstractMatrix:
    """The unique idempotent among the powers of x."""
    seen = []
    p = x
    while True:
        if is_idempotent(p):
            return p
        seen.append(p)
        p = product(p, x)
        if len(seen) > 4 ** (x.n * x.n):  # pragma: no cover - cannot happen
            raise RuntimeError("no idempotent power found")


def all_matrices(n: int):
    """Every matrix in {0,1,ω}^{n×n}, in canonical encoding order."""
    cells = n * n
    for code in range(3 ** cells):
        digits = []
        c = code
        for _ in range(cells):
            digits.append(c % 3)
            c //= 3
        digits.reverse()
        yield AbstractMatrix.from_rows([digits[i * n:(i + 1) * n] for i in range(n)])
