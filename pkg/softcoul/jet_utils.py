"""
절단 테일러 급수(jet) 산술

f(r0 + t) ≈ Σ_{k=0}^{M} c_k t^k  (정규화된 테일러 계수 c_k = f^(k)(r0)/k!)

AIM 재귀식의 λ_n(r), s_n(r) 을 담는 자료구조입니다.
미분은 차수를 하나 소모하고, 이항 연산은 두 피연산자 중 낮은 차수로 잘립니다.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np
from numpy.polynomial import polynomial as P

from .exceptions import ConvergenceError, InvalidInputError

Operand = Union["TaylorJet", float, int]


@dataclass(frozen=True)
class TaylorJet:
    """중심 center 에서의 M 차 절단 테일러 급수"""

    center: float
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise InvalidInputError("jet 계수는 비어 있지 않은 1차원 배열이어야 합니다")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "center", float(self.center))

    # ---------- 생성 ----------

    @classmethod
    def constant(cls, value: float, center: float, order: int) -> "TaylorJet":
        coeffs = np.zeros(order + 1)
        coeffs[0] = value
        return cls(center, coeffs)

    @classmethod
    def variable(cls, center: float, order: int) -> "TaylorJet":
        """r 자체의 jet: r0 + t"""
        coeffs = np.zeros(order + 1)
        coeffs[0] = center
        if order >= 1:
            coeffs[1] = 1.0
        return cls(center, coeffs)

    # ---------- 속성 ----------

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def evaluate(self, offset: float) -> float:
        """f(center + offset) 근사"""
        return float(P.polyval(offset, self.coeffs))

    def derivative_at_center(self, k: int) -> float:
        """f^(k)(center) = k!·c_k"""
        if k > self.order:
            raise ConvergenceError(f"jet 차수 부족: {k}차 미분 요청, 차수 {self.order}")
        return float(np.prod(np.arange(1, k + 1)) * self.coeffs[k])

    # ---------- 산술 ----------

    def _coerce(self, other: Operand) -> "TaylorJet":
        if isinstance(other, TaylorJet):
            if other.center != self.center:
                raise InvalidInputError(
                    f"jet 중심이 다릅니다 ({self.center} vs {other.center})"
                )
            return other
        return TaylorJet.constant(float(other), self.center, self.order)

    def __add__(self, other: Operand) -> "TaylorJet":
        other = self._coerce(other)
        m = min(self.order, other.order) + 1
        return TaylorJet(self.center, self.coeffs[:m] + other.coeffs[:m])

    __radd__ = __add__

    def __neg__(self) -> "TaylorJet":
        return TaylorJet(self.center, -self.coeffs)

    def __sub__(self, other: Operand) -> "TaylorJet":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Operand) -> "TaylorJet":
        return self._coerce(other) - self

    def __mul__(self, other: Operand) -> "TaylorJet":
        if not isinstance(other, TaylorJet):
            return TaylorJet(self.center, self.coeffs * float(other))
        other = self._coerce(other)
        m = min(self.order, other.order) + 1
        return TaylorJet(self.center, np.convolve(self.coeffs[:m], other.coeffs[:m])[:m])

    __rmul__ = __mul__

    def __truediv__(self, other: Operand) -> "TaylorJet":
        if not isinstance(other, TaylorJet):
            return TaylorJet(self.center, self.coeffs / float(other))
        return self * other.reciprocal()

    def reciprocal(self) -> "TaylorJet":
        """
        1/f 의 jet

        b_0 = 1/c_0,  b_k = -(1/c_0) Σ_{j=1..k} c_j b_{k-j}
        """
        c = self.coeffs
        if c[0] == 0:
            raise InvalidInputError("역수 jet 은 c_0 ≠ 0 이어야 합니다")
        b = np.zeros_like(c)
        b[0] = 1.0 / c[0]
        for k in range(1, c.size):
            b[k] = -np.dot(c[1 : k + 1], b[k - 1 :: -1][:k]) / c[0]
        return TaylorJet(self.center, b)

    def power(self, alpha: float) -> "TaylorJet":
        """
        f^α 의 jet (c_0 > 0)

        f·g' = α·f'·g 에서 나오는 재귀:
        b_k = 1/(k c_0) Σ_{j=1..k} ((α+1) j - k) c_j b_{k-j}
        """
        c = self.coeffs
        if not c[0] > 0:
            raise InvalidInputError(f"실수 거듭제곱 jet 은 c_0 > 0 이어야 합니다 (c_0={c[0]})")
        b = np.zeros_like(c)
        b[0] = c[0] ** alpha
        for k in range(1, c.size):
            j = np.arange(1, k + 1)
            b[k] = np.sum(((alpha + 1.0) * j - k) * c[1 : k + 1] * b[k - j]) / (k * c[0])
        return TaylorJet(self.center, b)

    def derivative(self) -> "TaylorJet":
        """미분 (차수 1 감소)"""
        if self.order < 1:
            raise ConvergenceError("jet 차수 소진: 0차 jet 은 미분할 수 없습니다")
        return TaylorJet(self.center, P.polyder(self.coeffs))

    def scaled(self, factor: float) -> "TaylorJet":
        return TaylorJet(self.center, self.coeffs * factor)
