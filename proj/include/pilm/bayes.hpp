#ifndef PILM_BAYES_HPP
#define PILM_BAYES_HPP

// Hyperparameter selection by maximizing the log marginal likelihood of a
// Gaussian data model with a (possibly rank-deficient) Gaussian prior
// exp(-a^T G a / 2 rho^2). alpha^2 = sigma^2 / rho^2 weights the penalty.

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pilm/inverse.hpp"
#include "pilm/solver.hpp"

namespace pilm {

template <typename Scalar>
struct MarginalLikelihoodResult {
  Scalar alpha2 = Scalar(0);
  Scalar log_likelihood = Scalar(0);
  Scalar sigma2 = Scalar(0);  // optimal noise variance
  Index rank = 0;             // rank of G
  Scalar log_pseudo_determinant = Scalar(0);
  Index observations = 0;
  Index parameters = 0;
  PilmFit<Scalar> fit;

  Scalar sigma() const { return std::sqrt(sigma2); }
  /// root-mean-square misfit on the data
  Scalar rmse() const { return std::sqrt(fit.misfit / Scalar(observations)); }
  Index degrees_of_freedom() const { return observations - parameters + rank; }
};

/// LL for a penalty whose spectrum is already known.
template <typename Scalar>
MarginalLikelihoodResult<Scalar> log_marginal_likelihood(const ObservationSystem<Scalar>& obs, Scalar alpha2,
                                                         const PenaltyMatrix<Scalar>& g,
                                                         const Spectrum<Scalar>& spec) {
  if (!(alpha2 > Scalar(0)) || !std::isfinite(static_cast<double>(alpha2)))
    throw ConfigError("alpha^2 must be positive and finite");
  MarginalLikelihoodResult<Scalar> out;
  out.alpha2 = alpha2;
  out.rank = spec.rank;
  out.log_pseudo_determinant = spec.log_pseudo_determinant;
  out.observations = obs.observations();
  out.parameters = obs.parameters();
  const Index dof = out.degrees_of_freedom();
  if (dof <= 0)
    throw DataError("insufficient effective data: N - M + P = " + std::to_string(dof));

  out.fit = solve(obs, {{alpha2, g}});
  out.sigma2 = out.fit.total_loss / Scalar(dof);
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  out.log_likelihood = Scalar(0.5) * (-Scalar(dof) * (std::log(two_pi * out.sigma2) + Scalar(1)) +
                                      Scalar(spec.rank) * std::log(alpha2) + spec.log_pseudo_determinant -
                                      out.fit.log_det_normal);
  if (!std::isfinite(static_cast<double>(out.log_likelihood)))
    throw NumericalError("log marginal likelihood is not finite");
  return out;
}

template <typename Scalar>
MarginalLikelihoodResult<Scalar> log_marginal_likelihood(const ObservationSystem<Scalar>& obs, Scalar alpha2,
                                                         const PenaltyMatrix<Scalar>& g,
                                                         Scalar tol = Scalar(kDefaultRankTolerance)) {
  return log_marginal_likelihood(obs, alpha2, g, g.spectrum(tol));
}

template <typename Scalar>
struct LikelihoodSample {
  Scalar log10_alpha2 = Scalar(0);
  bool feasible = false;
  Scalar log_likelihood = std::numeric_limits<Scalar>::quiet_NaN();
};

template <typename Scalar>
struct AlphaOptimum {
  MarginalLikelihoodResult<Scalar> best;
  bool boundary = false;                        // maximizer on the edge of the coarse grid
  std::vector<LikelihoodSample<Scalar>> curve;  // coarse samples, then refinement samples
};

/// Default coarse grid of log10 alpha^2.
inline std::vector<double> default_log_alpha_grid() { return linear_grid(-12.0, 6.0, 0.25); }

/// Grid search of LL over log10 alpha^2, refined once around the coarse
/// maximizer with a tenth of the coarse step.
template <typename Scalar>
AlphaOptimum<Scalar> optimize_alpha(const ObservationSystem<Scalar>& obs, const PenaltyMatrix<Scalar>& g,
                                    const std::vector<Scalar>& log10_grid, bool refine = true,
                                    Scalar tol = Scalar(kDefaultRankTolerance)) {
  check_grid(log10_grid);
  const auto spec = g.spectrum(tol);
  AlphaOptimum<Scalar> out;
  std::optional<MarginalLikelihoodResult<Scalar>> best;
  std::size_t best_index = 0;

  auto sample = [&](Scalar lg) {
    LikelihoodSample<Scalar> s;
    s.log10_alpha2 = lg;
    try {
      auto r = log_marginal_likelihood(obs, static_cast<Scalar>(std::pow(Scalar(10), lg)), g, spec);
      s.feasible = true;
      s.log_likelihood = r.log_likelihood;
      if (!best || r.log_likelihood > best->log_likelihood) {
        best = std::move(r);
        return std::make_pair(s, true);
      }
    } catch (const NumericalError&) {
    }
    return std::make_pair(s, false);
  };

  for (std::size_t i = 0; i < log10_grid.size(); ++i) {
    auto [s, improved] = sample(log10_grid[i]);
    if (improved) best_index = i;
    out.curve.push_back(s);
  }
  if (!best) throw NumericalError("no feasible alpha^2 on the grid");
  out.boundary = log10_grid.size() > 1 && (best_index == 0 || best_index + 1 == log10_grid.size());

  if (refine && log10_grid.size() > 1 && !out.boundary) {
    const Scalar center = log10_grid[best_index];
    const Scalar lo = log10_grid[best_index - 1];
    const Scalar hi = log10_grid[best_index + 1];
    for (int k = -9; k <= 9; ++k) {
      if (k == 0) continue;
      const Scalar lg = center + Scalar(k) * (k < 0 ? center - lo : hi - center) / Scalar(10);
      out.curve.push_back(sample(lg).first);
    }
  }
  out.best = std::move(*best);
  return out;
}

/// Which prior carries alpha^2 in the single-penalty form of the hybrid
/// likelihood: G~_i = G_i + (alpha^2_{-i} / alpha^2_i) G_{-i}.
enum class HybridForm { math, phys };

template <typename Scalar>
PenaltyMatrix<Scalar> hybrid_penalty(const PenaltyMatrix<Scalar>& g_math, const PenaltyMatrix<Scalar>& g_phys,
                                     Scalar alpha2_math, Scalar alpha2_phys, HybridForm form) {
  if (form == HybridForm::math && alpha2_phys == Scalar(0)) return g_math;
  if (form == HybridForm::phys && alpha2_math == Scalar(0)) return g_phys;
  if (form == HybridForm::math)
    return combine<Scalar>({{Scalar(1), g_math}, {alpha2_phys / alpha2_math, g_phys}});
  return combine<Scalar>({{Scalar(1), g_phys}, {alpha2_math / alpha2_phys, g_math}});
}

/// LL of the two-penalty prior, through the G~_i factorization chosen.
template <typename Scalar>
MarginalLikelihoodResult<Scalar> hybrid_log_likelihood(const ObservationSystem<Scalar>& obs,
                                                       const PenaltyMatrix<Scalar>& g_math,
                                                       const PenaltyMatrix<Scalar>& g_phys, Scalar alpha2_math,
                                                       Scalar alpha2_phys, HybridForm form,
                                                       Scalar tol = Scalar(kDefaultRankTolerance)) {
  const Scalar lead = form == HybridForm::math ? alpha2_math : alpha2_phys;
  return log_marginal_likelihood(obs, lead, hybrid_penalty(g_math, g_phys, alpha2_math, alpha2_phys, form), tol);
}

template <typename Scalar>
struct HybridSurface {
  std::vector<Scalar> alpha2_math;
  std::vector<Scalar> alpha2_phys;
  Matrix<Scalar> log_likelihood;         // (math index, phys index)
  Eigen::Matrix<bool, -1, -1> feasible;  // false: cell failed
  Scalar max_log_likelihood = -std::numeric_limits<Scalar>::infinity();
  std::pair<std::size_t, std::size_t> argmax{0, 0};
};

/// LL over all (alpha^2_math, alpha^2_phys) pairs; zero weights allowed on
/// one axis. Each cell uses the form led by the larger weight; spectra of
/// G~ are cached by weight ratio.
template <typename Scalar>
HybridSurface<Scalar> hybrid_surface(const ObservationSystem<Scalar>& obs, const PenaltyMatrix<Scalar>& g_math,
                                     const PenaltyMatrix<Scalar>& g_phys, const std::vector<Scalar>& alpha2_math,
                                     const std::vector<Scalar>& alpha2_phys,
                                     Scalar tol = Scalar(kDefaultRankTolerance)) {
  if (alpha2_math.empty() || alpha2_phys.empty()) throw ConfigError("hybrid grids must be nonempty");
  HybridSurface<Scalar> out;
  out.alpha2_math = alpha2_math;
  out.alpha2_phys = alpha2_phys;
  const auto nm = static_cast<Index>(alpha2_math.size());
  const auto np = static_cast<Index>(alpha2_phys.size());
  out.log_likelihood = Matrix<Scalar>::Constant(nm, np, std::numeric_limits<Scalar>::quiet_NaN());
  out.feasible = Eigen::Matrix<bool, -1, -1>::Constant(nm, np, false);

  std::map<std::pair<int, Scalar>, Spectrum<Scalar>> spectra;
  for (Index i = 0; i < nm; ++i) {
    for (Index j = 0; j < np; ++j) {
      const Scalar am = alpha2_math[static_cast<std::size_t>(i)];
      const Scalar ap = alpha2_phys[static_cast<std::size_t>(j)];
      if (am < Scalar(0) || ap < Scalar(0) || (am == Scalar(0) && ap == Scalar(0))) continue;
      const HybridForm form = am >= ap ? HybridForm::math : HybridForm::phys;
      const Scalar lead = form == HybridForm::math ? am : ap;
      const Scalar ratio = form == HybridForm::math ? ap / am : am / ap;
      try {
        const auto g = hybrid_penalty(g_math, g_phys, am, ap, form);
        Spectrum<Scalar> spec;
        if (ratio == Scalar(0)) {
          spec = g.spectrum(tol);
        } else {
          const auto key = std::make_pair(static_cast<int>(form), ratio);
          auto it = spectra.find(key);
          if (it == spectra.end()) it = spectra.emplace(key, g.spectrum(tol)).first;
          spec = it->second;
        }
        const auto r = log_marginal_likelihood(obs, lead, g, spec);
        out.log_likelihood(i, j) = r.log_likelihood;
        out.feasible(i, j) = true;
        if (r.log_likelihood > out.max_log_likelihood) {
          out.max_log_likelihood = r.log_likelihood;
          out.argmax = {static_cast<std::size_t>(i), static_cast<std::size_t>(j)};
        }
      } catch (const Error&) {
      }
    }
  }
  return out;
}

/// Akaike's Bayesian information criterion.
template <typename Scalar>
Scalar abic(Scalar log_likelihood, int hyperparameters) {
  if (hyperparameters < 1) throw ConfigError("ABIC needs at least one hyperparameter");
  if (!std::isfinite(static_cast<double>(log_likelihood))) throw NumericalError("ABIC of non-finite LL");
  return Scalar(-2) * log_likelihood + Scalar(2 * hyperparameters);
}

}  // namespace pilm

#endif  // PILM_BAYES_HPP
