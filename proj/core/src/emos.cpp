#include "emos/emos.hpp"

#include <algorithm>
#include <cmath>

#include "emos/error.hpp"
#include "emos/optimize.hpp"
#include "emos/scoring.hpp"

namespace emos {

void FitOptions::validate() const {
  if (max_iterations <= 0) throw InvalidInput("fit options: max_iterations must be positive");
  if (!(objective_tolerance > 0.0)) throw InvalidInput("fit options: tolerance must be positive");
  if (!(min_sigma > 0.0)) throw InvalidInput("fit options: min_sigma must be positive");
  if (bounds.b1_max && !(*bounds.b1_max >= 0.0)) {
    throw InvalidInput("fit options: b1 upper bound must be non-negative");
  }
  if (bounds.d1_max && !(*bounds.d1_max >= 0.0)) {
    throw InvalidInput("fit options: d1 upper bound must be non-negative");
  }
}

GaussianPredictive predict_single(const EmosCoefficients& coef, const EnsembleStats& stats,
                                  double min_sigma) {
  const double var = coef.c * coef.c + coef.d * coef.d * stats.std * stats.std;
  return {coef.a + coef.b * stats.mean, std::max(std::sqrt(var), min_sigma)};
}

GaussianPredictive predict_mixed(const MixedEmosCoefficients& coef, const EnsembleStats& stats1,
                                 const EnsembleStats& stats2, double min_sigma) {
  const double var = coef.c * coef.c + coef.d1 * coef.d1 * stats1.std * stats1.std +
                     coef.d2 * coef.d2 * stats2.std * stats2.std;
  return {coef.a + coef.b1 * stats1.mean + coef.b2 * stats2.mean,
          std::max(std::sqrt(var), min_sigma)};
}

double training_objective(const EmosCoefficients& coef, std::span<const TrainingSample> samples,
                          const ModelId& model, double min_sigma) {
  if (samples.empty()) throw InvalidInput("training_objective: no samples");
  double sum = 0.0;
  for (const auto& s : samples) {
    sum += gaussian_crps(predict_single(coef, s.stats(model), min_sigma), s.observation);
  }
  return sum / static_cast<double>(samples.size());
}

double training_objective(const MixedEmosCoefficients& coef,
                          std::span<const TrainingSample> samples,
                          const std::pair<ModelId, ModelId>& models, double min_sigma) {
  if (samples.empty()) throw InvalidInput("training_objective: no samples");
  double sum = 0.0;
  for (const auto& s : samples) {
    sum += gaussian_crps(
        predict_mixed(coef, s.stats(models.first), s.stats(models.second), min_sigma),
        s.observation);
  }
  return sum / static_cast<double>(samples.size());
}

namespace {

// Training data flattened for the objective. Ensemble means are centered so the
// intercept and slopes are less correlated during the search.
struct Design {
  std::size_t predictors = 0;
  std::vector<double> centered_mean;  // row-major n x predictors
  std::vector<double> variance;       // row-major n x predictors
  std::vector<double> y;
  std::vector<double> mean_offset;    // per predictor
  double min_sigma = kDefaultMinSigma;

  std::size_t size() const { return y.size(); }
};

Design make_design(std::span<const TrainingSample> samples, const std::vector<ModelId>& models,
                   double min_sigma) {
  if (samples.empty()) throw InvalidInput("EMOS fit: empty training set");
  Design d;
  d.predictors = models.size();
  d.min_sigma = min_sigma;
  d.mean_offset.assign(models.size(), 0.0);
  const std::size_t n = samples.size();
  d.centered_mean.resize(n * models.size());
  d.variance.resize(n * models.size());
  d.y.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    if (!std::isfinite(samples[t].observation)) {
      throw InvalidInput("EMOS fit: non-finite observation in training set");
    }
    d.y[t] = samples[t].observation;
    for (std::size_t k = 0; k < models.size(); ++k) {
      const auto& st = samples[t].stats(models[k]);
      d.centered_mean[t * models.size() + k] = st.mean;
      d.variance[t * models.size() + k] = st.std * st.std;
      d.mean_offset[k] += st.mean;
    }
  }
  for (auto& m : d.mean_offset) m /= static_cast<double>(n);
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t k = 0; k < models.size(); ++k)
      d.centered_mean[t * models.size() + k] -= d.mean_offset[k];
  return d;
}

// Search coordinates for K predictors:
//   [alpha, b_1..b_K, v_0, v_1..v_K]
// with mu = alpha + sum b_k (mean_k - offset_k) and sigma^2 = v_0 + sum v_k std_k^2,
// so v_0 = c^2 and v_k = d_k^2. The variance is linear in the v's, which keeps
// the gradient informative on the boundary v = 0. Positivity of b and v is a
// box constraint.
double objective(const Design& d, std::span<const double> x, std::span<double> grad) {
  const std::size_t k_count = d.predictors;
  const double alpha = x[0];
  const double v0 = x[1 + k_count];
  const bool want_grad = !grad.empty();
  if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);

  double sum = 0.0;
  CrpsGradient g;
  for (std::size_t t = 0; t < d.size(); ++t) {
    const double* cm = &d.centered_mean[t * k_count];
    const double* var = &d.variance[t * k_count];
    double mu = alpha;
    double sigma2 = v0;
    for (std::size_t k = 0; k < k_count; ++k) {
      mu += x[1 + k] * cm[k];
      sigma2 += x[2 + k_count + k] * var[k];
    }
    const double raw_sigma = std::sqrt(std::max(sigma2, 0.0));
    const bool floored = !(raw_sigma > d.min_sigma);
    const double sigma = floored ? d.min_sigma : raw_sigma;
    sum += gaussian_crps_with_gradient(mu, sigma, d.y[t], g);
    if (!want_grad) continue;
    grad[0] += g.d_mu;
    for (std::size_t k = 0; k < k_count; ++k) grad[1 + k] += g.d_mu * cm[k];
    if (!floored) {
      const double ds = 0.5 * g.d_sigma / raw_sigma;
      grad[1 + k_count] += ds;
      for (std::size_t k = 0; k < k_count; ++k) grad[2 + k_count + k] += ds * var[k];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(d.size());
  if (want_grad)
    for (auto& e : grad) e *= inv_n;
  return sum * inv_n;
}

optimize::Result run_search(const Design& d, std::vector<double> x0, const optimize::Box& box,
                            const FitOptions& options) {
  optimize::Options opt;
  opt.max_iterations = options.max_iterations;
  opt.relative_tolerance = options.objective_tolerance;
  const optimize::Objective f = [&d](std::span<const double> x, std::span<double> g) {
    return objective(d, x, g);
  };
  box.project(x0);
  return optimize::minimize(f, std::move(x0), box, opt);
}

// Slopes and variance coefficients are non-negative; alpha is free.
optimize::Box search_box(std::size_t predictors) {
  auto box = optimize::Box::unbounded(2 * predictors + 2);
  for (std::size_t i = 1; i < box.lower.size(); ++i) box.lower[i] = 0.0;
  return box;
}

std::vector<double> to_internal(const EmosCoefficients& c, const Design& d) {
  return {c.a + c.b * d.mean_offset[0], c.b, c.c * c.c, c.d * c.d};
}

EmosCoefficients single_from_internal(std::span<const double> x, const Design& d) {
  EmosCoefficients c;
  c.b = x[1];
  c.a = x[0] - c.b * d.mean_offset[0];
  c.c = std::sqrt(x[2]);
  c.d = std::sqrt(x[3]);
  return c;
}

std::vector<double> to_internal(const MixedEmosCoefficients& c, const Design& d) {
  return {c.a + c.b1 * d.mean_offset[0] + c.b2 * d.mean_offset[1],
          c.b1,
          c.b2,
          c.c * c.c,
          c.d1 * c.d1,
          c.d2 * c.d2};
}

MixedEmosCoefficients mixed_from_internal(std::span<const double> x, const Design& d) {
  MixedEmosCoefficients c;
  c.b1 = x[1];
  c.b2 = x[2];
  c.a = x[0] - c.b1 * d.mean_offset[0] - c.b2 * d.mean_offset[1];
  c.c = std::sqrt(x[3]);
  c.d1 = std::sqrt(x[4]);
  c.d2 = std::sqrt(x[5]);
  return c;
}

FitDiagnostics diagnostics_from(const optimize::Result& r, std::size_t n, double initial) {
  FitDiagnostics diag;
  diag.sample_count = n;
  diag.initial_objective = initial;
  diag.objective = r.value;
  diag.iterations = r.iterations;
  diag.evaluations = r.evaluations;
  diag.converged = r.converged;
  diag.used_simplex = r.used_simplex;
  diag.trace = r.trace;
  return diag;
}

// Initial coefficients: a = 0, unit slope(s) shared across predictors, c = d = 1.
const EmosCoefficients kSingleStart{0.0, 1.0, 1.0, 1.0};
const MixedEmosCoefficients kMixedStart{0.0, 0.5, 0.5, 1.0, 1.0, 1.0};

}  // namespace

FitResult<EmosCoefficients> try_fit_single(std::span<const TrainingSample> samples,
                                           const ModelId& model, const FitOptions& options) {
  options.validate();
  const Design d = make_design(samples, {model}, options.min_sigma);
  const auto box = search_box(1);

  const auto start = to_internal(kSingleStart, d);
  const double initial = objective(d, start, {});
  auto best = run_search(d, start, box, options);

  // The fit must not end above the identity mapping of the raw ensemble.
  const auto identity = to_internal(EmosCoefficients::identity(), d);
  const double identity_value = objective(d, identity, {});
  if (best.value > identity_value + options.objective_tolerance * std::abs(identity_value)) {
    auto alt = run_search(d, identity, box, options);
    alt.evaluations += best.evaluations;
    if (alt.value < best.value) best = std::move(alt);
  }
  return {single_from_internal(best.x, d), diagnostics_from(best, samples.size(), initial)};
}

FitResult<EmosCoefficients> fit_single(std::span<const TrainingSample> samples,
                                       const ModelId& model, const FitOptions& options) {
  auto r = try_fit_single(samples, model, options);
  if (!r.diagnostics.converged) throw FitFailure<EmosCoefficients>(std::move(r));
  return r;
}

FitResult<MixedEmosCoefficients> try_fit_mixed(std::span<const TrainingSample> samples,
                                               const std::pair<ModelId, ModelId>& models,
                                               const FitOptions& options,
                                               const MixedStarts& starts) {
  options.validate();
  const Design d = make_design(samples, {models.first, models.second}, options.min_sigma);

  auto box = search_box(2);
  if (options.bounds.b1_max) box.upper[1] = *options.bounds.b1_max;
  if (options.bounds.d1_max) box.upper[4] = *options.bounds.d1_max * *options.bounds.d1_max;

  FitOptions single_options = options;
  single_options.bounds = {};
  const EmosCoefficients first =
      starts.first ? *starts.first : try_fit_single(samples, models.first, single_options).coefficients;
  const EmosCoefficients second =
      starts.second ? *starts.second
                    : try_fit_single(samples, models.second, single_options).coefficients;

  std::vector<MixedEmosCoefficients> candidates{
      kMixedStart,
      {first.a, first.b, 0.0, first.c, first.d, 0.0},
      {second.a, 0.0, second.b, second.c, 0.0, second.d},
  };

  auto default_start = to_internal(kMixedStart, d);
  box.project(default_start);
  const double initial = objective(d, default_start, {});

  optimize::Result best;
  bool have_best = false;
  int evaluations = 0;
  for (const auto& cand : candidates) {
    auto x0 = to_internal(cand, d);
    auto r = run_search(d, std::move(x0), box, options);
    evaluations += r.evaluations;
    // Strict comparison keeps the earliest candidate on ties, so results are deterministic.
    if (!have_best || r.value < best.value) {
      best = std::move(r);
      have_best = true;
    }
  }
  best.evaluations = evaluations;
  auto coef = mixed_from_internal(best.x, d);
  // The square root of the bounded variance coefficient can overshoot the bound by one ulp.
  if (options.bounds.d1_max) coef.d1 = std::min(coef.d1, *options.bounds.d1_max);
  return {coef, diagnostics_from(best, samples.size(), initial)};
}

FitResult<MixedEmosCoefficients> fit_mixed(std::span<const TrainingSample> samples,
                                           const std::pair<ModelId, ModelId>& models,
                                           const FitOptions& options,
                                           const MixedStarts& starts) {
  auto r = try_fit_mixed(samples, models, options, starts);
  if (!r.diagnostics.converged) throw FitFailure<MixedEmosCoefficients>(std::move(r));
  return r;
}

ModelWeights model_weights(const MixedEmosCoefficients& coef) {
  ModelWeights w;
  const double bsum = coef.b1 + coef.b2;
  if (bsum > 0.0) {
    w.weight_mean = coef.b1 / bsum;
    w.defined_mean = true;
  }
  const double dsum = coef.d1 + coef.d2;
  if (dsum > 0.0) {
    w.weight_std = coef.d1 / dsum;
    w.defined_std = true;
  }
  return w;
}

}  // namespace emos
