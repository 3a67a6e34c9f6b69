#ifndef PILM_SPLINE_BASIS_HPP
#define PILM_SPLINE_BASIS_HPP

// Uniform cubic B-spline reference function and the translated, boundary
// truncated 1-D basis families built from it.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "pilm/error.hpp"

namespace pilm {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Cubic polynomial c0 + c1 x + c2 x^2 + c3 x^3 (ascending coefficients).
template <typename Scalar>
using Cubic = std::array<Scalar, 4>;

inline constexpr int kMaxDerivativeOrder = 2;

inline void check_derivative_order(int order) {
  if (order < 0 || order > kMaxDerivativeOrder)
    throw ConfigError("derivative order " + std::to_string(order) +
                      " not supported (cubic B-splines are C2; allowed 0..2)");
}

/// The reference cubic B-spline, supported on (-2, 2), as four pieces over
/// [-2,-1], [-1,0], [0,1], [1,2]. The piece on [-1,0] is the mirror image of
/// the piece on [0,1], i.e. (-3x^3 - 6x^2 + 4)/6.
template <typename Scalar>
struct ReferencePolynomial {
  static constexpr std::array<Cubic<Scalar>, 4> pieces() {
    const Scalar six(6);
    return {{
        {Scalar(8) / six, Scalar(12) / six, Scalar(6) / six, Scalar(1) / six},    // (x+2)^3/6
        {Scalar(4) / six, Scalar(0), Scalar(-6) / six, Scalar(-3) / six},         // (-3x^3-6x^2+4)/6
        {Scalar(4) / six, Scalar(0), Scalar(-6) / six, Scalar(3) / six},          // (3x^3-6x^2+4)/6
        {Scalar(8) / six, Scalar(-12) / six, Scalar(6) / six, Scalar(-1) / six},  // -(x-2)^3/6
    }};
  }
};

namespace detail {

template <typename Scalar>
constexpr Cubic<Scalar> derivative(const Cubic<Scalar>& p, int order) {
  Cubic<Scalar> q = p;
  for (int n = 0; n < order; ++n) {
    q = {q[1], Scalar(2) * q[2], Scalar(3) * q[3], Scalar(0)};
  }
  return q;
}

template <typename Scalar>
constexpr Scalar horner(const Cubic<Scalar>& p, Scalar x) {
  return ((p[3] * x + p[2]) * x + p[1]) * x + p[0];
}

/// Taylor shift: coefficients of q(s) = p(s + h).
template <typename Scalar>
constexpr Cubic<Scalar> shift(const Cubic<Scalar>& p, Scalar h) {
  return {horner(p, h), p[1] + Scalar(2) * p[2] * h + Scalar(3) * p[3] * h * h,
          p[2] + Scalar(3) * p[3] * h, p[3]};
}

}  // namespace detail

/// Value or derivative (order 0..2) of the reference B-spline at x.
/// Exactly zero for |x| >= 2.
template <typename Scalar>
Scalar eval_reference(Scalar x, int order) {
  check_derivative_order(order);
  if (!(x > Scalar(-2) && x < Scalar(2))) return Scalar(0);
  const auto pieces = ReferencePolynomial<Scalar>::pieces();
  int piece = x < Scalar(-1) ? 0 : x < Scalar(0) ? 1 : x < Scalar(1) ? 2 : 3;
  return detail::horner(detail::derivative(pieces[piece], order), x);
}

/// The four uniform-B-spline segments in the local knot-interval coordinate
/// s in [0, 1]. Segment r is reference piece r shifted by x = s + r - 2; on
/// knot interval j, basis function j + 3 - r is described by segment r.
template <typename Scalar>
std::array<Cubic<Scalar>, 4> local_segments() {
  const auto pieces = ReferencePolynomial<Scalar>::pieces();
  std::array<Cubic<Scalar>, 4> out{};
  for (int r = 0; r < 4; ++r) out[r] = detail::shift(pieces[r], Scalar(r - 2));
  return out;
}

/// M translated cubic B-splines on [origin, origin + length], spacing
/// length / (M - 3), function i centered at origin + (i - 1) * spacing.
/// Functions 0..2 and M-3..M-1 are truncated by the domain edges.
template <typename Scalar>
class BSplineBasis1D {
 public:
  BSplineBasis1D(Scalar length, Index count, Scalar origin = Scalar(0))
      : length_(length), count_(count), origin_(origin) {
    if (count < 4) throw ConfigError("basis needs at least 4 functions, got " + std::to_string(count));
    if (!(length > Scalar(0)) || !std::isfinite(static_cast<double>(length)))
      throw ConfigError("basis domain length must be positive and finite");
    spacing_ = length / Scalar(count - 3);
  }

  Scalar length() const { return length_; }
  Scalar origin() const { return origin_; }
  Scalar upper() const { return origin_ + length_; }
  Index size() const { return count_; }
  Scalar spacing() const { return spacing_; }
  Index intervals() const { return count_ - 3; }
  Scalar center(Index i) const { return origin_ + Scalar(i - 1) * spacing_; }

  bool contains(Scalar t) const {
    const Scalar slack = Scalar(1e-12) * length_;
    return t >= origin_ - slack && t <= upper() + slack;
  }

  /// Knot interval holding t, and the local coordinate s in [0, 1].
  std::pair<Index, Scalar> locate(Scalar t) const {
    if (!contains(t))
      throw DomainError("coordinate " + std::to_string(static_cast<double>(t)) + " outside [" +
                        std::to_string(static_cast<double>(origin_)) + ", " +
                        std::to_string(static_cast<double>(upper())) + "]");
    Scalar u = (t - origin_) / spacing_;
    u = std::clamp(u, Scalar(0), Scalar(intervals()));
    Index j = static_cast<Index>(std::floor(static_cast<double>(u)));
    if (j >= intervals()) j = intervals() - 1;
    return {j, u - Scalar(j)};
  }

 private:
  Scalar length_;
  Index count_;
  Scalar origin_;
  Scalar spacing_{};
};

template <typename Scalar>
BSplineBasis1D<Scalar> build_basis(Scalar length, Index count, Scalar origin = Scalar(0)) {
  return BSplineBasis1D<Scalar>(length, count, origin);
}

/// The (at most) four nonzero entries of a basis evaluation vector:
/// values[r] belongs to function first + r.
template <typename Scalar>
struct BasisSpan {
  Index first = 0;
  Eigen::Matrix<Scalar, 4, 1> values = Eigen::Matrix<Scalar, 4, 1>::Zero();
};

template <typename Scalar>
BasisSpan<Scalar> eval_basis_span(const BSplineBasis1D<Scalar>& basis, Scalar t, int order) {
  check_derivative_order(order);
  static const auto segments = local_segments<Scalar>();
  const auto [j, s] = basis.locate(t);
  Scalar scale = Scalar(1);
  for (int n = 0; n < order; ++n) scale /= basis.spacing();
  BasisSpan<Scalar> span;
  span.first = j;
  // function j + k is segment 3 - k
  for (int k = 0; k < 4; ++k)
    span.values[k] = scale * detail::horner(detail::derivative(segments[3 - k], order), s);
  return span;
}

/// Dense length-M vector Phi^(order)(t).
template <typename Scalar>
Vector<Scalar> eval_basis_vector(const BSplineBasis1D<Scalar>& basis, Scalar t, int order = 0) {
  const auto span = eval_basis_span(basis, t, order);
  Vector<Scalar> out = Vector<Scalar>::Zero(basis.size());
  out.template segment<4>(span.first) = span.values;
  return out;
}

}  // namespace pilm

#endif  // PILM_SPLINE_BASIS_HPP
