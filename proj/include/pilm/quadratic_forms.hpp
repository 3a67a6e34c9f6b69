#ifndef PILM_QUADRATIC_FORMS_HPP
#define PILM_QUADRATIC_FORMS_HPP

// Penalty matrices G with a^T G a equal to the integrated squared residual
// of a constant-coefficient linear differential operator applied to the
// spline expansion.
//
// Layout convention for two input axes: parameter index i = k * M2 + l,
// where k indexes the first axis and l the second; G terms are
// (first-axis factor) kron (second-axis factor). Multi-component fields
// stack component blocks: a = (a_0, a_1, ...).

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "pilm/integral_matrices.hpp"

namespace pilm {

/// One term weight * d^{o1}/dx1^{o1} d^{o2}/dx2^{o2} u_component.
/// For 1-D operators orders[1] must be zero.
template <typename Scalar>
struct ResidualTerm {
  int component = 0;
  std::array<int, 2> orders{0, 0};
  Scalar weight = Scalar(1);
};

/// A system of residual equations; the penalty is the integral of the sum
/// of the squared equations. Constant coefficients only.
template <typename Scalar>
struct ResidualOperator {
  int components = 1;
  std::vector<std::vector<ResidualTerm<Scalar>>> equations;
};

/// eigenvalue-based quantities of a symmetric PSD matrix
template <typename Scalar>
struct Spectrum {
  Index rank = 0;
  Scalar log_pseudo_determinant = Scalar(0);
  Scalar min_eigenvalue = Scalar(0);
  Scalar max_eigenvalue = Scalar(0);
  Scalar tolerance = Scalar(0);
};

inline constexpr double kDefaultRankTolerance = 1e-10;

/// Spectrum from sorted eigenvalues: values below tol * max count as zero.
template <typename Scalar>
Spectrum<Scalar> spectrum_from_eigenvalues(const Vector<Scalar>& eig, Scalar tol) {
  Spectrum<Scalar> out;
  out.tolerance = tol;
  if (eig.size() == 0) return out;
  out.min_eigenvalue = eig.minCoeff();
  out.max_eigenvalue = eig.maxCoeff();
  const Scalar cutoff = tol * std::max(out.max_eigenvalue, Scalar(0));
  for (Index i = 0; i < eig.size(); ++i) {
    if (eig[i] > cutoff && eig[i] > Scalar(0)) {
      ++out.rank;
      out.log_pseudo_determinant += std::log(eig[i]);
    }
  }
  return out;
}

template <typename Scalar>
Vector<Scalar> symmetric_eigenvalues(const Matrix<Scalar>& g) {
  if (!g.allFinite()) throw NumericalError("matrix has non-finite entries");
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(g, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
  return solver.eigenvalues();
}

/// Rank and log pseudo-determinant of a symmetric PSD matrix.
template <typename Scalar>
Spectrum<Scalar> spectrum(const Matrix<Scalar>& g, Scalar tol = Scalar(kDefaultRankTolerance)) {
  return spectrum_from_eigenvalues(symmetric_eigenvalues(g), tol);
}

/// Symmetric PSD penalty matrix with a label and a lazily computed,
/// thread-safe eigenvalue cache. Copies share the immutable storage.
template <typename Scalar>
class PenaltyMatrix {
 public:
  PenaltyMatrix() : PenaltyMatrix(Matrix<Scalar>(), "empty") {}
  PenaltyMatrix(Matrix<Scalar> g, std::string label)
      : data_(std::make_shared<Data>(std::move(g), std::move(label))) {}

  const Matrix<Scalar>& matrix() const { return data_->g; }
  const std::string& label() const { return data_->label; }
  Index size() const { return data_->g.rows(); }

  Scalar quadratic(const Vector<Scalar>& a) const { return a.dot(data_->g * a); }

  const Vector<Scalar>& eigenvalues() const {
    std::call_once(data_->once, [this] { data_->eig = symmetric_eigenvalues(data_->g); });
    return data_->eig;
  }

  Spectrum<Scalar> spectrum(Scalar tol = Scalar(kDefaultRankTolerance)) const {
    return spectrum_from_eigenvalues(eigenvalues(), tol);
  }

 private:
  struct Data {
    Data(Matrix<Scalar> m, std::string l) : g(std::move(m)), label(std::move(l)) {}
    Matrix<Scalar> g;
    std::string label;
    std::once_flag once;
    Vector<Scalar> eig;
  };
  std::shared_ptr<Data> data_;
};

template <typename Scalar>
struct WeightedPenalty {
  Scalar weight;
  PenaltyMatrix<Scalar> penalty;
};

namespace detail {

template <typename Scalar>
void check_operator(const ResidualOperator<Scalar>& op, int axes) {
  if (op.components < 1) throw ConfigError("residual operator needs at least one component");
  for (const auto& eq : op.equations) {
    for (const auto& term : eq) {
      check_derivative_order(term.orders[0]);
      check_derivative_order(term.orders[1]);
      if (axes == 1 && term.orders[1] != 0)
        throw ConfigError("second-axis derivative in a one-axis residual");
      if (term.component < 0 || term.component >= op.components)
        throw ConfigError("residual term refers to component " + std::to_string(term.component));
    }
  }
}

// (p, q, a1, b1, a2, b2) -> accumulated coefficient
using TermKey = std::tuple<int, int, int, int, int, int>;

template <typename Scalar>
std::map<TermKey, Scalar> expand_products(const ResidualOperator<Scalar>& op) {
  std::map<TermKey, Scalar> coeffs;
  for (const auto& eq : op.equations)
    for (const auto& s : eq)
      for (const auto& t : eq)
        coeffs[{s.component, t.component, s.orders[0], t.orders[0], s.orders[1], t.orders[1]}] +=
            s.weight * t.weight;
  return coeffs;
}

template <typename Scalar>
Matrix<Scalar> symmetrized(Matrix<Scalar> g) {
  Matrix<Scalar> out = (g + g.transpose()) / Scalar(2);
  return out;
}

}  // namespace detail

/// Penalty for a residual operator on one input axis.
template <typename Scalar>
PenaltyMatrix<Scalar> assemble_penalty(const IntegralMatrixSet<Scalar>& r,
                                       const ResidualOperator<Scalar>& op, std::string label) {
  detail::check_operator(op, 1);
  const Index m = r.size();
  Matrix<Scalar> g = Matrix<Scalar>::Zero(m * op.components, m * op.components);
  for (const auto& [key, w] : detail::expand_products(op)) {
    const auto [p, q, a1, b1, a2, b2] = key;
    (void)a2;
    (void)b2;
    g.block(p * m, q * m, m, m) += w * r(a1, b1);
  }
  return PenaltyMatrix<Scalar>(detail::symmetrized(std::move(g)), std::move(label));
}

/// Penalty for a residual operator on a tensor-product basis over two axes.
template <typename Scalar>
PenaltyMatrix<Scalar> assemble_penalty(const IntegralMatrixSet<Scalar>& r1,
                                       const IntegralMatrixSet<Scalar>& r2,
                                       const ResidualOperator<Scalar>& op, std::string label) {
  detail::check_operator(op, 2);
  const Index m = r1.size() * r2.size();
  Matrix<Scalar> g = Matrix<Scalar>::Zero(m * op.components, m * op.components);
  for (const auto& [key, w] : detail::expand_products(op)) {
    const auto [p, q, a1, b1, a2, b2] = key;
    if (w == Scalar(0)) continue;
    g.block(p * m, q * m, m, m) += w * Matrix<Scalar>(Eigen::kroneckerProduct(r1(a1, b1), r2(a2, b2)));
  }
  return PenaltyMatrix<Scalar>(detail::symmetrized(std::move(g)), std::move(label));
}

/// Damped oscillator m u'' + c u' + k u.
template <typename Scalar>
ResidualOperator<Scalar> oscillator_operator(Scalar mass, Scalar damping, Scalar stiffness) {
  return {1, {{{0, {2, 0}, mass}, {0, {1, 0}, damping}, {0, {0, 0}, stiffness}}}};
}

/// Diffusion u_t - k u_xx with t on the first axis.
template <typename Scalar>
ResidualOperator<Scalar> diffusion_operator(Scalar diffusivity) {
  return {1, {{{0, {1, 0}, Scalar(1)}, {0, {0, 2}, -diffusivity}}}};
}

/// Sum of squared second derivatives of each component (u_xy counted twice).
template <typename Scalar>
ResidualOperator<Scalar> smoothness_operator(int components = 2) {
  ResidualOperator<Scalar> op{components, {}};
  for (int c = 0; c < components; ++c) {
    op.equations.push_back({{c, {2, 0}, Scalar(1)}});
    op.equations.push_back({{c, {1, 1}, Scalar(1)}});
    op.equations.push_back({{c, {1, 1}, Scalar(1)}});
    op.equations.push_back({{c, {0, 2}, Scalar(1)}});
  }
  return op;
}

/// Coupling constants of thin-sheet elastic equilibrium.
template <typename Scalar>
struct ElasticConstants {
  Scalar a;
  Scalar b;
};

template <typename Scalar>
ElasticConstants<Scalar> elastic_constants(Scalar poisson) {
  if (!(poisson >= Scalar(-1) && poisson <= Scalar(0.5)))
    throw ConfigError("Poisson ratio " + std::to_string(static_cast<double>(poisson)) +
                      " outside [-1, 0.5]");
  return {Scalar(2) / (Scalar(1) - poisson), (Scalar(1) + poisson) / (Scalar(1) - poisson)};
}

/// In-plane equilibrium residuals
///   A u_xx + B v_xy + u_yy,   A v_yy + B u_xy + v_xx.
template <typename Scalar>
ResidualOperator<Scalar> elasticity_operator(Scalar poisson) {
  const auto [a, b] = elastic_constants(poisson);
  return {2,
          {{{0, {2, 0}, a}, {1, {1, 1}, b}, {0, {0, 2}, Scalar(1)}},
           {{1, {0, 2}, a}, {0, {1, 1}, b}, {1, {2, 0}, Scalar(1)}}}};
}

template <typename Scalar>
PenaltyMatrix<Scalar> ode_penalty(const IntegralMatrixSet<Scalar>& r, Scalar mass, Scalar damping,
                                  Scalar stiffness) {
  return assemble_penalty(r, oscillator_operator(mass, damping, stiffness), "ode");
}

template <typename Scalar>
PenaltyMatrix<Scalar> pde_penalty_2d(const IntegralMatrixSet<Scalar>& r1, const IntegralMatrixSet<Scalar>& r2,
                                     const ResidualOperator<Scalar>& op) {
  return assemble_penalty(r1, r2, op, "pde");
}

/// Block-diagonal smoothness penalty over (a_x, a_y).
template <typename Scalar>
PenaltyMatrix<Scalar> smoothness_penalty(const IntegralMatrixSet<Scalar>& rx, const IntegralMatrixSet<Scalar>& ry) {
  return assemble_penalty(rx, ry, smoothness_operator<Scalar>(2), "math");
}

template <typename Scalar>
PenaltyMatrix<Scalar> elasticity_penalty(const IntegralMatrixSet<Scalar>& rx, const IntegralMatrixSet<Scalar>& ry,
                                         Scalar poisson) {
  return assemble_penalty(rx, ry, elasticity_operator(poisson), "phys");
}

/// Weighted sum of penalties. A single unit-weight term is returned as is.
template <typename Scalar>
PenaltyMatrix<Scalar> combine(const std::vector<WeightedPenalty<Scalar>>& terms) {
  if (terms.empty()) throw ConfigError("combine needs at least one penalty");
  const Index n = terms.front().penalty.size();
  for (const auto& t : terms) {
    if (t.penalty.size() != n) throw ConfigError("combine: penalty sizes differ");
    if (!(t.weight >= Scalar(0))) throw ConfigError("combine: negative weight");
  }
  if (terms.size() == 1 && terms.front().weight == Scalar(1)) return terms.front().penalty;
  Matrix<Scalar> g = Matrix<Scalar>::Zero(n, n);
  std::string label;
  for (const auto& t : terms) {
    if (t.weight != Scalar(0)) g += t.weight * t.penalty.matrix();
    label += (label.empty() ? "" : "+") + t.penalty.label();
  }
  return PenaltyMatrix<Scalar>(std::move(g), terms.size() > 1 ? "hybrid" : label);
}

}  // namespace pilm

#endif  // PILM_QUADRATIC_FORMS_HPP
