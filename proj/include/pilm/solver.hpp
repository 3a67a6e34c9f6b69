#ifndef PILM_SOLVER_HPP
#define PILM_SOLVER_HPP

#include <Eigen/Cholesky>

#include <limits>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "pilm/quadratic_forms.hpp"

namespace pilm {

/// Per-axis bases of a (tensor-product) expansion with one or more field
/// components. Component c occupies parameters [c * P, (c + 1) * P) with
/// P = prod(M_axis).
template <typename Scalar>
struct FieldLayout {
  std::vector<BSplineBasis1D<Scalar>> axes;
  int components = 1;

  int dimension() const { return static_cast<int>(axes.size()); }
  Index size_per_component() const {
    Index p = 1;
    for (const auto& b : axes) p *= b.size();
    return p;
  }
  Index size() const { return size_per_component() * components; }
};

template <typename Scalar>
FieldLayout<Scalar> layout_1d(const BSplineBasis1D<Scalar>& basis) {
  return {{basis}, 1};
}

template <typename Scalar>
FieldLayout<Scalar> layout_2d(const BSplineBasis1D<Scalar>& first, const BSplineBasis1D<Scalar>& second,
                              int components = 1) {
  return {{first, second}, components};
}

/// Visits the nonzero entries of the row Phi^(orders)(coords) of one
/// component: f(parameter index, value).
template <typename Scalar, typename F>
void for_each_basis_entry(const FieldLayout<Scalar>& layout, const std::array<Scalar, 2>& coords,
                          const std::array<int, 2>& orders, int component, F&& f) {
  if (component < 0 || component >= layout.components)
    throw ConfigError("component " + std::to_string(component) + " out of range");
  const Index offset = component * layout.size_per_component();
  if (layout.dimension() == 1) {
    if (orders[1] != 0) throw ConfigError("second-axis derivative on a one-axis layout");
    const auto s = eval_basis_span(layout.axes[0], coords[0], orders[0]);
    for (int k = 0; k < 4; ++k) f(offset + s.first + k, s.values[k]);
  } else if (layout.dimension() == 2) {
    const auto s1 = eval_basis_span(layout.axes[0], coords[0], orders[0]);
    const auto s2 = eval_basis_span(layout.axes[1], coords[1], orders[1]);
    const Index m2 = layout.axes[1].size();
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 4; ++l) f(offset + (s1.first + k) * m2 + s2.first + l, s1.values[k] * s2.values[l]);
  } else {
    throw ConfigError("only one- and two-axis layouts are supported");
  }
}

enum class RowKind { value, derivative };

template <typename Scalar>
struct RowDescriptor {
  RowKind kind = RowKind::value;
  std::array<Scalar, 2> location{};
  int component = 0;
  std::array<int, 2> orders{0, 0};
};

/// Scalar measurement of u_component^(orders) at coords.
template <typename Scalar>
struct PointObservation {
  std::array<Scalar, 2> coords{};
  int component = 0;
  Scalar value = Scalar(0);
  std::array<int, 2> orders{0, 0};
};

/// Cached products H^T H, H^T d, d^T d.
template <typename Scalar>
struct Gram {
  Matrix<Scalar> hth;
  Vector<Scalar> htd;
  Scalar dtd = Scalar(0);
};

/// Design matrix H, data d and row descriptors. Immutable; the Gram
/// products are computed once on first use and shared between copies.
template <typename Scalar>
class ObservationSystem {
 public:
  ObservationSystem(Matrix<Scalar> design, Vector<Scalar> data, std::vector<RowDescriptor<Scalar>> rows)
      : data_(std::make_shared<Data>()) {
    if (design.rows() != data.size() || static_cast<Index>(rows.size()) != data.size())
      throw ConfigError("observation system: row counts of H, d and descriptors differ");
    data_->h = std::move(design);
    data_->d = std::move(data);
    data_->rows = std::move(rows);
  }

  const Matrix<Scalar>& design() const { return data_->h; }
  const Vector<Scalar>& data() const { return data_->d; }
  const std::vector<RowDescriptor<Scalar>>& rows() const { return data_->rows; }
  Index observations() const { return data_->h.rows(); }
  Index parameters() const { return data_->h.cols(); }

  const Gram<Scalar>& gram() const {
    std::call_once(data_->once, [this] {
      auto& g = data_->gram;
      g.hth = Matrix<Scalar>::Zero(parameters(), parameters());
      g.hth.template selfadjointView<Eigen::Lower>().rankUpdate(data_->h.transpose());
      g.hth = g.hth.template selfadjointView<Eigen::Lower>();
      g.htd = data_->h.transpose() * data_->d;
      g.dtd = data_->d.squaredNorm();
    });
    return data_->gram;
  }

  Scalar misfit(const Vector<Scalar>& a) const { return (data_->d - data_->h * a).squaredNorm(); }

 private:
  struct Data {
    Matrix<Scalar> h;
    Vector<Scalar> d;
    std::vector<RowDescriptor<Scalar>> rows;
    std::once_flag once;
    Gram<Scalar> gram;
  };
  std::shared_ptr<Data> data_;
};

/// Rows Phi(0)^T and Phi'(0)^T with data (u0, v0).
template <typename Scalar>
ObservationSystem<Scalar> ic_system(const BSplineBasis1D<Scalar>& basis, Scalar u0, Scalar v0) {
  const Scalar t0 = basis.origin();
  Matrix<Scalar> h(2, basis.size());
  h.row(0) = eval_basis_vector(basis, t0, 0).transpose();
  h.row(1) = eval_basis_vector(basis, t0, 1).transpose();
  Vector<Scalar> d(2);
  d << u0, v0;
  std::vector<RowDescriptor<Scalar>> rows{{RowKind::value, {t0, Scalar(0)}, 0, {0, 0}},
                                          {RowKind::derivative, {t0, Scalar(0)}, 0, {1, 0}}};
  return ObservationSystem<Scalar>(std::move(h), std::move(d), std::move(rows));
}

/// One row per scalar measurement.
template <typename Scalar>
ObservationSystem<Scalar> point_system(const FieldLayout<Scalar>& layout,
                                       std::span<const PointObservation<Scalar>> points) {
  const Index n = static_cast<Index>(points.size());
  Matrix<Scalar> h = Matrix<Scalar>::Zero(n, layout.size());
  Vector<Scalar> d(n);
  std::vector<RowDescriptor<Scalar>> rows;
  rows.reserve(points.size());
  for (Index i = 0; i < n; ++i) {
    const auto& p = points[i];
    try {
      for_each_basis_entry(layout, p.coords, p.orders, p.component, [&](Index col, Scalar v) { h(i, col) += v; });
    } catch (const DomainError& e) {
      throw DomainError("observation " + std::to_string(i) + ": " + e.what());
    }
    d[i] = p.value;
    const bool derivative = p.orders[0] + p.orders[1] > 0;
    rows.push_back({derivative ? RowKind::derivative : RowKind::value, p.coords, p.component, p.orders});
  }
  return ObservationSystem<Scalar>(std::move(h), std::move(d), std::move(rows));
}

template <typename Scalar>
ObservationSystem<Scalar> point_system(const FieldLayout<Scalar>& layout,
                                       const std::vector<PointObservation<Scalar>>& points) {
  return point_system(layout, std::span<const PointObservation<Scalar>>(points));
}

/// Stack several systems row-wise (same parameter count).
template <typename Scalar>
ObservationSystem<Scalar> stack(const std::vector<ObservationSystem<Scalar>>& parts) {
  if (parts.empty()) throw ConfigError("stack: no observation systems");
  Index n = 0;
  for (const auto& p : parts) {
    if (p.parameters() != parts.front().parameters()) throw ConfigError("stack: parameter counts differ");
    n += p.observations();
  }
  Matrix<Scalar> h(n, parts.front().parameters());
  Vector<Scalar> d(n);
  std::vector<RowDescriptor<Scalar>> rows;
  Index at = 0;
  for (const auto& p : parts) {
    h.middleRows(at, p.observations()) = p.design();
    d.segment(at, p.observations()) = p.data();
    rows.insert(rows.end(), p.rows().begin(), p.rows().end());
    at += p.observations();
  }
  return ObservationSystem<Scalar>(std::move(h), std::move(d), std::move(rows));
}

inline constexpr double kConditionWarning = 1e12;

/// Minimizer of |d - H a|^2 + sum_i w_i a^T G_i a with its loss terms.
template <typename Scalar>
struct PilmFit {
  Vector<Scalar> coefficients;
  Scalar misfit = Scalar(0);
  std::vector<Scalar> weights;
  std::vector<Scalar> penalty_values;  // a^T G_i a, unweighted
  Scalar total_loss = Scalar(0);
  Scalar log_det_normal = Scalar(0);  // log det(H^T H + sum w G)
  Scalar condition_estimate = Scalar(0);
  bool ill_conditioned = false;
  Scalar normal_residual = Scalar(0);  // |N a - H^T d| / |H^T d|
};

namespace detail {

template <typename Scalar>
Matrix<Scalar> normal_matrix(const ObservationSystem<Scalar>& obs,
                             const std::vector<WeightedPenalty<Scalar>>& penalties) {
  Matrix<Scalar> n = obs.gram().hth;
  for (const auto& p : penalties) {
    if (p.penalty.size() != obs.parameters())
      throw ConfigError("penalty size " + std::to_string(p.penalty.size()) + " does not match " +
                        std::to_string(obs.parameters()) + " parameters");
    if (!(p.weight >= Scalar(0))) throw ConfigError("penalty weights must be non-negative");
    if (p.weight != Scalar(0)) n += p.weight * p.penalty.matrix();
  }
  return n;
}

template <typename Scalar>
[[noreturn]] void throw_underdetermined(const Matrix<Scalar>& n) {
  const auto eig = symmetric_eigenvalues(n);
  const Scalar cutoff = Scalar(kDefaultRankTolerance) * std::max(eig.maxCoeff(), Scalar(0));
  Index deficiency = 0;
  for (Index i = 0; i < eig.size(); ++i)
    if (eig[i] <= cutoff) ++deficiency;
  throw UnderdeterminedError("underdetermined system: normal matrix is singular or indefinite (deficiency " +
                                 std::to_string(deficiency) + " of " + std::to_string(n.rows()) + ")",
                             static_cast<long>(deficiency));
}

}  // namespace detail

/// Closed-form solve through a Cholesky factorization of the normal matrix.
template <typename Scalar>
PilmFit<Scalar> solve(const ObservationSystem<Scalar>& obs, const std::vector<WeightedPenalty<Scalar>>& penalties) {
  const Matrix<Scalar> n = detail::normal_matrix(obs, penalties);
  if (!n.allFinite()) throw NumericalError("normal matrix has non-finite entries");
  Eigen::LLT<Matrix<Scalar>> llt(n);
  if (llt.info() != Eigen::Success) detail::throw_underdetermined(n);
  const Vector<Scalar> diag = llt.matrixLLT().diagonal();
  if (!(diag.minCoeff() > Scalar(0)) || !diag.allFinite()) detail::throw_underdetermined(n);

  const auto& gram = obs.gram();
  PilmFit<Scalar> fit;
  fit.coefficients = llt.solve(gram.htd);
  // one step of iterative refinement
  Vector<Scalar> r = gram.htd - n * fit.coefficients;
  fit.coefficients += llt.solve(r);
  r = gram.htd - n * fit.coefficients;
  const Scalar scale = gram.htd.norm();
  fit.normal_residual = scale > Scalar(0) ? r.norm() / scale : r.norm();

  fit.misfit = obs.misfit(fit.coefficients);
  fit.total_loss = fit.misfit;
  for (const auto& p : penalties) {
    const Scalar value = p.penalty.quadratic(fit.coefficients);
    fit.weights.push_back(p.weight);
    fit.penalty_values.push_back(value);
    fit.total_loss += p.weight * value;
  }
  fit.log_det_normal = Scalar(2) * diag.array().log().sum();
  const Scalar rcond = llt.rcond();
  fit.condition_estimate = rcond > Scalar(0) ? Scalar(1) / rcond : std::numeric_limits<Scalar>::infinity();
  fit.ill_conditioned = fit.condition_estimate > Scalar(kConditionWarning);
  return fit;
}

/// Samples of the expansion (component, derivative orders) at coordinates.
template <typename Scalar>
Vector<Scalar> evaluate(const Vector<Scalar>& coefficients, const FieldLayout<Scalar>& layout,
                        std::span<const std::array<Scalar, 2>> points, std::array<int, 2> orders = {0, 0},
                        int component = 0) {
  if (coefficients.size() != layout.size()) throw ConfigError("coefficient vector does not match layout");
  Vector<Scalar> out(static_cast<Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    Scalar sum(0);
    for_each_basis_entry(layout, points[i], orders, component, [&](Index col, Scalar v) { sum += coefficients[col] * v; });
    out[static_cast<Index>(i)] = sum;
  }
  return out;
}

template <typename Scalar>
Vector<Scalar> evaluate(const PilmFit<Scalar>& fit, const FieldLayout<Scalar>& layout,
                        std::span<const std::array<Scalar, 2>> points, std::array<int, 2> orders = {0, 0},
                        int component = 0) {
  return evaluate(fit.coefficients, layout, points, orders, component);
}

/// 1-D convenience: values at t for a single-axis layout.
template <typename Scalar>
Vector<Scalar> evaluate_1d(const Vector<Scalar>& coefficients, const BSplineBasis1D<Scalar>& basis,
                           const Vector<Scalar>& t, int order = 0) {
  std::vector<std::array<Scalar, 2>> pts(static_cast<std::size_t>(t.size()));
  for (Index i = 0; i < t.size(); ++i) pts[static_cast<std::size_t>(i)] = {t[i], Scalar(0)};
  return evaluate(coefficients, layout_1d(basis), std::span<const std::array<Scalar, 2>>(pts), {order, 0}, 0);
}

}  // namespace pilm

#endif  // PILM_SOLVER_HPP
