#ifndef PILM_INTEGRAL_MATRICES_HPP
#define PILM_INTEGRAL_MATRICES_HPP

#include <array>

#include "pilm/spline_basis.hpp"

namespace pilm {

/// R^ab = integral over the basis domain of Phi^(a) Phi^(b)^T for
/// a, b in {0, 1, 2}. Dense M x M; entries vanish for |i - j| >= 4.
template <typename Scalar>
class IntegralMatrixSet {
 public:
  IntegralMatrixSet() = default;

  const Matrix<Scalar>& operator()(int a, int b) const {
    check_derivative_order(a);
    check_derivative_order(b);
    return r_[a][b];
  }
  Matrix<Scalar>& at(int a, int b) { return r_[a][b]; }
  Index size() const { return r_[0][0].rows(); }

 private:
  std::array<std::array<Matrix<Scalar>, 3>, 3> r_;
};

namespace detail {

/// Exact integral over [0, 1] of the product of two cubics.
template <typename Scalar>
Scalar product_integral(const Cubic<Scalar>& p, const Cubic<Scalar>& q) {
  Scalar sum(0);
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) sum += p[m] * q[n] / Scalar(m + n + 1);
  return sum;
}

}  // namespace detail

/// All nine R^ab by closed-form integration of the piecewise polynomial
/// products, knot interval by knot interval. Truncated boundary functions
/// only contribute over their part inside the domain.
template <typename Scalar>
IntegralMatrixSet<Scalar> integral_matrices(const BSplineBasis1D<Scalar>& basis) {
  const auto segments = local_segments<Scalar>();
  const Index m = basis.size();
  const Scalar h = basis.spacing();

  IntegralMatrixSet<Scalar> set;
  for (int a = 0; a <= kMaxDerivativeOrder; ++a) {
    for (int b = a; b <= kMaxDerivativeOrder; ++b) {
      // local[k][l]: functions j+k and j+l on interval j (segments 3-k, 3-l)
      Eigen::Matrix<Scalar, 4, 4> local;
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l)
          local(k, l) = (a == b && l < k) ? local(l, k)
                                          : detail::product_integral(detail::derivative(segments[3 - k], a),
                                                                     detail::derivative(segments[3 - l], b));
      Scalar scale = h;
      for (int n = 0; n < a + b; ++n) scale /= h;
      local *= scale;

      Matrix<Scalar> r = Matrix<Scalar>::Zero(m, m);
      for (Index j = 0; j < basis.intervals(); ++j) r.template block<4, 4>(j, j) += local;
      if (b != a) set.at(b, a) = r.transpose();
      set.at(a, b) = std::move(r);
    }
  }
  return set;
}

}  // namespace pilm

#endif  // PILM_INTEGRAL_MATRICES_HPP
