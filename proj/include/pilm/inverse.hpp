#ifndef PILM_INVERSE_HPP
#define PILM_INVERSE_HPP

// Profile-likelihood estimation of a scalar equation coefficient: for every
// grid value theta the coefficients are eliminated in closed form and the
// minimized loss L*(theta) is scanned.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pilm/solver.hpp"

namespace pilm {

template <typename Scalar>
struct ProfileInstance {
  ObservationSystem<Scalar> observations;
  std::vector<WeightedPenalty<Scalar>> penalties;
};

/// theta -> (observation system, penalties) over a strictly increasing grid.
template <typename Scalar>
struct ProfileProblem {
  std::function<ProfileInstance<Scalar>(Scalar)> instance;
  std::vector<Scalar> grid;
};

template <typename Scalar>
struct ProfilePoint {
  Scalar theta = Scalar(0);
  bool solvable = false;
  Scalar loss = std::numeric_limits<Scalar>::quiet_NaN();
  std::optional<PilmFit<Scalar>> fit;
  std::string failure;
};

template <typename Scalar>
void check_grid(const std::vector<Scalar>& grid) {
  if (grid.empty()) throw ConfigError("search grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw ConfigError("search grid must be strictly increasing");
}

/// Evaluates L*(theta) in grid order. Grid points whose system cannot be
/// solved are flagged and kept out of the minimum.
template <typename Scalar>
std::vector<ProfilePoint<Scalar>> profile_curve(const ProfileProblem<Scalar>& problem) {
  check_grid(problem.grid);
  std::vector<ProfilePoint<Scalar>> curve;
  curve.reserve(problem.grid.size());
  for (const Scalar theta : problem.grid) {
    ProfilePoint<Scalar> point;
    point.theta = theta;
    try {
      const auto inst = problem.instance(theta);
      auto fit = solve(inst.observations, inst.penalties);
      point.loss = fit.total_loss;
      point.fit = std::move(fit);
      point.solvable = true;
    } catch (const NumericalError& e) {
      point.failure = e.what();
    }
    curve.push_back(std::move(point));
  }
  return curve;
}

template <typename Scalar>
struct ProfileMinimum {
  Scalar theta = Scalar(0);
  Scalar loss = Scalar(0);
  std::size_t index = 0;
  PilmFit<Scalar> fit;
  bool boundary = false;  // minimum sits on the first or last grid point
};

/// Grid point with the smallest L*; ties go to the smaller theta.
template <typename Scalar>
ProfileMinimum<Scalar> argmin(const std::vector<ProfilePoint<Scalar>>& curve) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (!curve[i].solvable) continue;
    if (!best || curve[i].loss < curve[*best].loss) best = i;
  }
  if (!best) throw NumericalError("profile curve has no solvable grid point");
  ProfileMinimum<Scalar> out;
  out.index = *best;
  out.theta = curve[*best].theta;
  out.loss = curve[*best].loss;
  out.fit = *curve[*best].fit;
  out.boundary = curve.size() > 1 && (*best == 0 || *best + 1 == curve.size());
  return out;
}

/// Inclusive grid lo, lo + step, ..., hi (hi included up to rounding).
template <typename Scalar>
std::vector<Scalar> linear_grid(Scalar lo, Scalar hi, Scalar step) {
  if (!(step > Scalar(0)) || hi < lo) throw ConfigError("invalid grid bounds or step");
  std::vector<Scalar> g;
  const auto n = static_cast<long>(std::floor(static_cast<double>((hi - lo) / step) + 1e-9));
  for (long i = 0; i <= n; ++i) g.push_back(lo + Scalar(i) * step);
  return g;
}

}  // namespace pilm

#endif  // PILM_INVERSE_HPP
