#include "emos/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "emos/error.hpp"

namespace emos::optimize {

void Box::project(std::span<double> x) const {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
}

namespace {

enum class Status { converged, stalled, exhausted };

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e));
  return m;
}

double relative_change(double before, double after) {
  return std::abs(before - after) / std::max(std::abs(before), 1e-300);
}

class Bfgs {
 public:
  Bfgs(const Objective& f, const Box& box, const Options& opt, Result& out)
      : f_(f), box_(box), opt_(opt), out_(out), n_(out.x.size()) {}

  Status run() {
    std::vector<double> x = out_.x;
    std::vector<double> g(n_), g_new(n_), p(n_), xt(n_), pg(n_);
    double fx = eval(x, g);
    std::vector<double> h = identity();
    bool fresh = true;   // h is the identity
    bool first = true;   // no update applied yet
    int quiet_steps = 0;

    while (out_.iterations < opt_.max_iterations) {
      for (std::size_t i = 0; i < n_; ++i) {
        const bool at_lower = x[i] <= box_.lower[i] && g[i] > 0.0;
        const bool at_upper = x[i] >= box_.upper[i] && g[i] < 0.0;
        pg[i] = (at_lower || at_upper) ? 0.0 : g[i];
      }
      if (inf_norm(pg) <= opt_.gradient_tolerance) return Status::converged;

      double slope = 0.0;
      for (std::size_t i = 0; i < n_; ++i) {
        p[i] = 0.0;
        if (pg[i] == 0.0 && g[i] != 0.0) continue;  // active bound
        for (std::size_t j = 0; j < n_; ++j) p[i] -= h[i * n_ + j] * pg[j];
        slope += g[i] * p[i];
      }
      if (!(slope < 0.0)) {
        h = identity();
        fresh = true;
        first = true;
        for (std::size_t i = 0; i < n_; ++i) p[i] = -pg[i];
      }

      double t = first ? std::min(1.0, 1.0 / inf_norm(pg)) : 1.0;
      double ft = 0.0;
      bool accepted = false;
      for (int k = 0; k < 60; ++k, t *= 0.5) {
        for (std::size_t i = 0; i < n_; ++i) xt[i] = x[i] + t * p[i];
        box_.project(xt);
        double decrease = 0.0;
        for (std::size_t i = 0; i < n_; ++i) decrease += g[i] * (xt[i] - x[i]);
        if (decrease >= 0.0) continue;
        ft = eval(xt, g_new);
        if (std::isfinite(ft) && ft <= fx + 1e-4 * decrease) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        if (fresh) return Status::stalled;
        h = identity();
        fresh = true;
        first = true;
        continue;
      }

      ++out_.iterations;
      const double change = relative_change(fx, ft);
      std::vector<double> s(n_), y(n_);
      double sy = 0.0, yy = 0.0, ss = 0.0;
      for (std::size_t i = 0; i < n_; ++i) {
        // Coordinates held at a bound stay out of the curvature update.
        const bool held = pg[i] == 0.0 && g[i] != 0.0;
        s[i] = held ? 0.0 : xt[i] - x[i];
        y[i] = held ? 0.0 : g_new[i] - g[i];
        sy += s[i] * y[i];
        yy += y[i] * y[i];
        ss += s[i] * s[i];
      }
      x = xt;
      fx = ft;
      g = g_new;
      out_.x = x;
      out_.value = fx;
      out_.trace.push_back(fx);

      if (sy > 1e-12 * std::sqrt(ss * yy)) {
        if (first) {
          const double scale = sy / yy;
          for (double& e : h) e *= scale;
          first = false;
        }
        update(h, s, y, 1.0 / sy);
        fresh = false;
      }

      quiet_steps = change < opt_.relative_tolerance ? quiet_steps + 1 : 0;
      if (quiet_steps >= 2) return Status::converged;
    }
    return Status::exhausted;
  }

 private:
  double eval(std::span<const double> x, std::span<double> g) {
    ++out_.evaluations;
    return f_(x, g);
  }

  std::vector<double> identity() const {
    std::vector<double> h(n_ * n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) h[i * n_ + i] = 1.0;
    return h;
  }

  // H <- (I - rho s y') H (I - rho y s') + rho s s'
  void update(std::vector<double>& h, const std::vector<double>& s, const std::vector<double>& y,
              double rho) const {
    std::vector<double> hy(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) hy[i] += h[i * n_ + j] * y[j];
    double yhy = 0.0;
    for (std::size_t i = 0; i < n_; ++i) yhy += y[i] * hy[i];
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        h[i * n_ + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) +
                         (rho * rho * yhy + rho) * s[i] * s[j];
      }
    }
  }

  const Objective& f_;
  const Box& box_;
  const Options& opt_;
  Result& out_;
  std::size_t n_;
};

}  // namespace

Result nelder_mead(const Objective& f, std::vector<double> x0, const Box& box, const Options& opt,
                   double initial_step) {
  const std::size_t n = x0.size();
  Result out;
  box.project(x0);
  auto eval = [&](const std::vector<double>& x) {
    ++out.evaluations;
    const double v = f(x, {});
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> values(n + 1);
  values[0] = eval(x0);
  for (std::size_t i = 0; i < n; ++i) {
    auto& v = simplex[i + 1];
    const double step = initial_step * std::max(1.0, std::abs(v[i]));
    v[i] += step;
    box.project(v);
    if (v[i] == x0[i]) {  // pinned at a bound: step the other way
      v[i] -= 2.0 * step;
      box.project(v);
    }
    values[i + 1] = eval(v);
  }

  std::vector<std::size_t> order(n + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<std::vector<double>> s2;
    std::vector<double> v2;
    for (auto i : order) {
      s2.push_back(simplex[i]);
      v2.push_back(values[i]);
    }
    simplex = std::move(s2);
    values = std::move(v2);
  };
  sort_simplex();
  out.trace.push_back(values[0]);

  auto along = [&](const std::vector<double>& centroid, double coef) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = centroid[i] + coef * (simplex[n][i] - centroid[i]);
    box.project(x);
    return x;
  };

  while (out.iterations < opt.max_iterations) {
    const double spread = values[n] - values[0];
    if (spread <= opt.relative_tolerance * std::max(std::abs(values[0]), 1e-300)) {
      out.converged = true;
      break;
    }
    ++out.iterations;
    std::vector<double> centroid(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[k][i] / static_cast<double>(n);

    const auto xr = along(centroid, -1.0);
    const double fr = eval(xr);
    if (fr < values[0]) {
      const auto xe = along(centroid, -2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[n] = xe;
        values[n] = fe;
      } else {
        simplex[n] = xr;
        values[n] = fr;
      }
    } else if (fr < values[n - 1]) {
      simplex[n] = xr;
      values[n] = fr;
    } else {
      const bool outside = fr < values[n];
      const auto xc = along(centroid, outside ? -0.5 : 0.5);
      const double fc = eval(xc);
      if (fc < std::min(fr, values[n])) {
        simplex[n] = xc;
        values[n] = fc;
      } else {
        for (std::size_t k = 1; k <= n; ++k) {
          for (std::size_t i = 0; i < n; ++i)
            simplex[k][i] = simplex[0][i] + 0.5 * (simplex[k][i] - simplex[0][i]);
          box.project(simplex[k]);
          values[k] = eval(simplex[k]);
        }
      }
    }
    sort_simplex();
    out.trace.push_back(values[0]);
  }
  out.x = simplex[0];
  out.value = values[0];
  out.used_simplex = true;
  return out;
}

Result minimize(const Objective& f, std::vector<double> x0, const Box& box, const Options& opt) {
  if (box.lower.size() != x0.size() || box.upper.size() != x0.size()) {
    throw InvalidInput("optimize: bound dimensions do not match the start point");
  }
  Result out;
  box.project(x0);
  out.x = std::move(x0);
  {
    std::vector<double> g(out.x.size());
    out.value = f(out.x, g);
    ++out.evaluations;
  }
  out.trace.push_back(out.value);

  Status status = Bfgs(f, box, opt, out).run();
  if (status == Status::stalled) {
    Options rest = opt;
    rest.max_iterations = std::max(0, opt.max_iterations - out.iterations);
    Result nm = nelder_mead(f, out.x, box, rest);
    out.used_simplex = true;
    out.iterations += nm.iterations;
    out.evaluations += nm.evaluations;
    if (nm.value < out.value) {
      out.x = nm.x;
      out.value = nm.value;
      out.trace.push_back(nm.value);
      status = Bfgs(f, box, opt, out).run();
      if (status == Status::stalled) status = Status::converged;
    } else {
      // Neither search improves on the current point: treat it as the minimum.
      status = nm.iterations < rest.max_iterations ? Status::converged : Status::exhausted;
    }
  }
  out.converged = status == Status::converged;
  return out;
}

}  // namespace emos::optimize
