#pragma once

// Single-model and two-model ("mixed") EMOS: Gaussian predictive distributions
// whose mean and spread are linear in the ensemble statistics, with coefficients
// chosen by minimizing the mean CRPS over a training set.

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "emos/domain.hpp"

namespace emos {

/// mu = a + b * mean, sigma = sqrt(c^2 + d^2 * std^2)
struct EmosCoefficients {
  double a = 0.0;
  double b = 1.0;
  double c = 0.0;
  double d = 1.0;

  static EmosCoefficients identity() { return {0.0, 1.0, 0.0, 1.0}; }
  friend bool operator==(const EmosCoefficients&, const EmosCoefficients&) = default;
};

/// mu = a + b1 * mean1 + b2 * mean2, sigma = sqrt(c^2 + d1^2 std1^2 + d2^2 std2^2),
/// with b1, b2, d1, d2 >= 0.
struct MixedEmosCoefficients {
  double a = 0.0;
  double b1 = 0.5;
  double b2 = 0.5;
  double c = 0.0;
  double d1 = 0.70710678118654752;
  double d2 = 0.70710678118654752;

  static MixedEmosCoefficients identity() { return {}; }
  friend bool operator==(const MixedEmosCoefficients&, const MixedEmosCoefficients&) = default;
};

/// Upper bounds on the first model's coefficients in a mixed fit.
struct CoefficientBounds {
  std::optional<double> b1_max;
  std::optional<double> d1_max;
};

inline constexpr double kDefaultMinSigma = 1e-3;

struct FitOptions {
  int max_iterations = 1000;
  double objective_tolerance = 1e-8;
  CoefficientBounds bounds;
  double min_sigma = kDefaultMinSigma;

  void validate() const;
};

struct FitDiagnostics {
  std::size_t sample_count = 0;
  double initial_objective = 0.0;
  double objective = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  bool used_simplex = false;
  /// Training objective after each accepted optimizer iteration.
  std::vector<double> trace;
};

template <class Coefficients>
struct FitResult {
  Coefficients coefficients;
  FitDiagnostics diagnostics;
};

/// Optimizer exhausted max_iterations.
class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// NonConvergence carrying the best coefficients found.
template <class Coefficients>
class FitFailure : public NonConvergence {
 public:
  explicit FitFailure(FitResult<Coefficients> best)
      : NonConvergence("EMOS fit did not converge within max_iterations"), best_(std::move(best)) {}
  const FitResult<Coefficients>& best() const noexcept { return best_; }

 private:
  FitResult<Coefficients> best_;
};

GaussianPredictive predict_single(const EmosCoefficients& coef, const EnsembleStats& stats,
                                  double min_sigma = kDefaultMinSigma);

GaussianPredictive predict_mixed(const MixedEmosCoefficients& coef, const EnsembleStats& stats1,
                                 const EnsembleStats& stats2,
                                 double min_sigma = kDefaultMinSigma);

/// Mean CRPS of predict_single over the samples.
double training_objective(const EmosCoefficients& coef, std::span<const TrainingSample> samples,
                          const ModelId& model, double min_sigma = kDefaultMinSigma);

/// Mean CRPS of predict_mixed over the samples.
double training_objective(const MixedEmosCoefficients& coef,
                          std::span<const TrainingSample> samples,
                          const std::pair<ModelId, ModelId>& models,
                          double min_sigma = kDefaultMinSigma);

/// Fits without throwing on non-convergence; inspect diagnostics.converged.
/// Throws InvalidInput on an empty training set or missing model statistics.
FitResult<EmosCoefficients> try_fit_single(std::span<const TrainingSample> samples,
                                           const ModelId& model, const FitOptions& options);

/// Throws FitFailure<EmosCoefficients> when the optimizer does not converge.
FitResult<EmosCoefficients> fit_single(std::span<const TrainingSample> samples,
                                       const ModelId& model, const FitOptions& options);

/// Extra starting points for a mixed fit: single-model optima for either model,
/// embedded with the other model's coefficients at zero. When absent they are
/// fitted internally, which makes the mixed optimum never worse than either
/// single-model optimum on the training set.
struct MixedStarts {
  std::optional<EmosCoefficients> first;
  std::optional<EmosCoefficients> second;
};

FitResult<MixedEmosCoefficients> try_fit_mixed(std::span<const TrainingSample> samples,
                                               const std::pair<ModelId, ModelId>& models,
                                               const FitOptions& options,
                                               const MixedStarts& starts = {});

/// Throws FitFailure<MixedEmosCoefficients> when the optimizer does not converge.
FitResult<MixedEmosCoefficients> fit_mixed(std::span<const TrainingSample> samples,
                                           const std::pair<ModelId, ModelId>& models,
                                           const FitOptions& options,
                                           const MixedStarts& starts = {});

/// Fractional weight of the first model for the mean and the spread.
struct ModelWeights {
  double weight_mean = 0.5;
  double weight_std = 0.5;
  bool defined_mean = false;
  bool defined_std = false;
};

ModelWeights model_weights(const MixedEmosCoefficients& coef);

}  // namespace emos
