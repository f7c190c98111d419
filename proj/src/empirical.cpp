#include "warpfit/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace warpfit {

namespace {

double abs_pow(double d, double r) {
  if (r == 2.0) return d * d;
  if (r == 1.0) return std::abs(d);
  return std::pow(std::abs(d), r);
}

// Walks the union of breakpoint grids of `qs`, invoking
// visit(width, upper, levels) once per merged cell. Levels are scratch storage.
template <typename Visit>
void merge_quantiles(std::span<const QuantileFunction> qs, Visit&& visit) {
  const std::size_t J = qs.size();
  std::vector<std::size_t> cursor(J, 0);
  std::vector<double> levels(J);
  double prev = 0.0;
  while (true) {
    double next = std::numeric_limits<double>::infinity();
    bool done = true;
    for (std::size_t j = 0; j < J; ++j) {
      if (cursor[j] < qs[j].breakpoints.size()) {
        done = false;
        next = std::min(next, qs[j].breakpoints[cursor[j]]);
      }
    }
    if (done) break;
    for (std::size_t j = 0; j < J; ++j) {
      std::size_t k = std::min(cursor[j], qs[j].levels.size() - 1);
      levels[j] = qs[j].levels[k];
    }
    visit(next - prev, next, std::span<const double>(levels));
    for (std::size_t j = 0; j < J; ++j) {
      if (cursor[j] < qs[j].breakpoints.size() && qs[j].breakpoints[cursor[j]] == next)
        ++cursor[j];
    }
    prev = next;
  }
}

// Minimizes (1/J) sum_j |q_j - z|^r over z. Convex in z for r >= 1.
double cell_minimizer(std::span<const double> q, double r, std::vector<double>& scratch) {
  const std::size_t J = q.size();
  if (r == 2.0) {
    double s = 0.0;
    for (double v : q) s += v;
    return s / static_cast<double>(J);
  }
  if (r == 1.0) {
    scratch.assign(q.begin(), q.end());
    std::sort(scratch.begin(), scratch.end());
    return scratch[(J - 1) / 2];  // lower median
  }
  auto cost = [&](double z) {
    double s = 0.0;
    for (double v : q) s += abs_pow(v - z, r);
    return s;
  };
  double lo = *std::min_element(q.begin(), q.end());
  double hi = *std::max_element(q.begin(), q.end());
  const double gold = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - gold * (b - a), x2 = a + gold * (b - a);
  double f1 = cost(x1), f2 = cost(x2);
  for (int it = 0; it < 300 && (b - a) > 1e-10; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gold * (b - a);
      f1 = cost(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gold * (b - a);
      f2 = cost(x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

EmpiricalDistribution EmpiricalDistribution::from_samples(std::span<const double> raw) {
  if (raw.empty()) throw error(errc::empty_sample, "sample must contain at least one value");
  for (double v : raw) {
    if (!std::isfinite(v))
      throw error(errc::non_finite_value, "sample values must be finite");
  }
  EmpiricalDistribution d;
  d.values_.assign(raw.begin(), raw.end());
  std::sort(d.values_.begin(), d.values_.end());
  return d;
}

QuantileFunction::QuantileFunction(std::vector<double> bps, std::vector<double> lvls)
    : breakpoints(std::move(bps)), levels(std::move(lvls)) {
  if (breakpoints.empty() || breakpoints.size() != levels.size())
    throw error(errc::bad_argument, "breakpoints and levels must be nonempty and equal length");
  if (breakpoints.back() != 1.0)
    throw error(errc::bad_argument, "last breakpoint must equal 1");
  for (std::size_t k = 0; k < breakpoints.size(); ++k) {
    if (!(breakpoints[k] > 0.0) || (k > 0 && !(breakpoints[k] > breakpoints[k - 1])))
      throw error(errc::bad_argument, "breakpoints must be strictly increasing in (0,1]");
    if (k > 0 && levels[k] < levels[k - 1])
      throw error(errc::bad_argument, "levels must be nondecreasing");
  }
}

QuantileFunction QuantileFunction::of(const EmpiricalDistribution& d) {
  QuantileFunction q;
  const std::int64_t n = d.n();
  q.breakpoints.resize(n);
  for (std::int64_t i = 1; i <= n; ++i)
    q.breakpoints[i - 1] = static_cast<double>(i) / static_cast<double>(n);
  q.breakpoints.back() = 1.0;
  q.levels = d.values();
  return q;
}

double QuantileFunction::operator()(double t) const {
  if (!(t > 0.0) || t > 1.0) throw error(errc::out_of_range, "quantile level must lie in (0,1]");
  auto it = std::lower_bound(breakpoints.begin(), breakpoints.end(), t);
  return levels[static_cast<std::size_t>(it - breakpoints.begin())];
}

double quantile(const EmpiricalDistribution& d, double t) {
  if (!(t > 0.0) || t > 1.0) throw error(errc::out_of_range, "quantile level must lie in (0,1]");
  const std::int64_t n = d.n();
  auto idx = static_cast<std::int64_t>(std::ceil(t * static_cast<double>(n)));
  idx = std::clamp<std::int64_t>(idx, 1, n);
  return d.values()[idx - 1];
}

double wasserstein_r(const QuantileFunction& a, const QuantileFunction& b, double r) {
  if (!(r >= 1.0)) throw error(errc::invalid_order, "Wasserstein order must satisfy r >= 1");
  const QuantileFunction qs[2] = {a, b};
  double acc = 0.0;
  merge_quantiles(std::span<const QuantileFunction>(qs, 2),
                  [&](double width, double, std::span<const double> lv) {
                    acc += width * abs_pow(lv[0] - lv[1], r);
                  });
  return std::pow(acc, 1.0 / r);
}

double wasserstein_r(const EmpiricalDistribution& a, const EmpiricalDistribution& b, double r) {
  if (!(r >= 1.0)) throw error(errc::invalid_order, "Wasserstein order must satisfy r >= 1");
  if (a.n() == b.n()) {
    // Equal sizes pair order statistics directly.
    double acc = 0.0;
    for (std::int64_t i = 0; i < a.n(); ++i)
      acc += abs_pow(a.values()[i] - b.values()[i], r);
    return std::pow(acc / static_cast<double>(a.n()), 1.0 / r);
  }
  return wasserstein_r(QuantileFunction::of(a), QuantileFunction::of(b), r);
}

QuantileFunction barycenter_quantile(std::span<const QuantileFunction> qs) {
  if (qs.empty()) throw error(errc::empty_collection, "barycenter needs at least one input");
  if (qs.size() == 1) return qs[0];
  QuantileFunction out;
  const double invJ = 1.0 / static_cast<double>(qs.size());
  merge_quantiles(qs, [&](double, double upper, std::span<const double> lv) {
    double s = 0.0;
    for (double v : lv) s += v;
    out.breakpoints.push_back(upper);
    out.levels.push_back(s * invJ);
  });
  return out;
}

MergedGrid MergedGrid::build(std::span<const std::int64_t> sizes) {
  const std::size_t J = sizes.size();
  MergedGrid g;
  g.uniform = std::all_of(sizes.begin(), sizes.end(),
                          [&](std::int64_t n) { return n == sizes[0]; });
  if (g.uniform) {
    const std::int64_t n = sizes[0];
    g.width.assign(n, 1.0 / static_cast<double>(n));
    return g;
  }
  g.index.resize(J);
  std::vector<std::int64_t> cursor(J, 1);  // next breakpoint, 1-based
  double prev = 0.0;
  while (true) {
    // Smallest pending fraction cursor[j]/sizes[j], compared exactly.
    std::size_t arg = J;
    for (std::size_t j = 0; j < J; ++j) {
      if (cursor[j] > sizes[j]) continue;
      if (arg == J || cursor[j] * sizes[arg] < cursor[arg] * sizes[j]) arg = j;
    }
    if (arg == J) break;
    double boundary = static_cast<double>(cursor[arg]) / static_cast<double>(sizes[arg]);
    if (cursor[arg] == sizes[arg]) boundary = 1.0;
    g.width.push_back(boundary - prev);
    for (std::size_t j = 0; j < J; ++j)
      g.index[j].push_back(static_cast<std::int32_t>(cursor[j] - 1));
    for (std::size_t j = 0; j < J; ++j) {
      if (cursor[j] <= sizes[j] && cursor[j] * sizes[arg] == cursor[arg] * sizes[j] && j != arg)
        ++cursor[j];
    }
    ++cursor[arg];
    prev = boundary;
  }
  return g;
}

double MergedGrid::mean_squared_spread(std::span<const double* const> levels) const {
  const std::size_t J = levels.size();
  const double invJ = 1.0 / static_cast<double>(J);
  double acc = 0.0;
  if (uniform) {
    const std::size_t n = width.size();
    if (J == 2) {
      const double* w0 = levels[0];
      const double* w1 = levels[1];
      for (std::size_t c = 0; c < n; ++c) {
        double d = w0[c] - w1[c];
        acc += d * d;
      }
      return 0.25 * acc * width[0];
    }
    for (std::size_t c = 0; c < n; ++c) {
      double s = 0.0, s2 = 0.0;
      for (std::size_t j = 0; j < J; ++j) {
        double v = levels[j][c];
        s += v;
        s2 += v * v;
      }
      acc += s2 - s * s * invJ;
    }
    return acc * width[0] * invJ;
  }
  for (std::size_t c = 0; c < width.size(); ++c) {
    double s = 0.0, s2 = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      double v = levels[j][index[j][c]];
      s += v;
      s2 += v * v;
    }
    acc += width[c] * (s2 - s * s * invJ);
  }
  return acc * invJ;
}

QuantileFunction variation_minimizer(std::span<const QuantileFunction> qs, double r) {
  if (qs.size() < 2) throw error(errc::empty_collection, "variation needs at least two inputs");
  if (!(r >= 1.0)) throw error(errc::invalid_order, "variation order must satisfy r >= 1");
  QuantileFunction out;
  std::vector<double> scratch;
  merge_quantiles(qs, [&](double, double upper, std::span<const double> lv) {
    out.breakpoints.push_back(upper);
    out.levels.push_back(cell_minimizer(lv, r, scratch));
  });
  // The pointwise minimizer inherits monotonicity from the inputs up to
  // the golden-section tolerance; enforce it exactly.
  for (std::size_t k = 1; k < out.levels.size(); ++k)
    out.levels[k] = std::max(out.levels[k], out.levels[k - 1]);
  return out;
}

double variation_r(std::span<const QuantileFunction> qs, double r) {
  if (qs.size() < 2) throw error(errc::empty_collection, "variation needs at least two inputs");
  if (!(r >= 1.0)) throw error(errc::invalid_order, "variation order must satisfy r >= 1");
  const double invJ = 1.0 / static_cast<double>(qs.size());
  std::vector<double> scratch;
  double acc = 0.0;
  merge_quantiles(qs, [&](double width, double, std::span<const double> lv) {
    double z = cell_minimizer(lv, r, scratch);
    double s = 0.0;
    for (double v : lv) s += abs_pow(v - z, r);
    acc += width * s;
  });
  return std::pow(acc * invJ, 1.0 / r);
}

double variation_r(std::span<const EmpiricalDistribution> ds, double r) {
  if (ds.size() < 2) throw error(errc::empty_collection, "variation needs at least two inputs");
  if (!(r >= 1.0)) throw error(errc::invalid_order, "variation order must satisfy r >= 1");
  if (r == 2.0) {
    std::vector<std::int64_t> sizes(ds.size());
    std::vector<const double*> levels(ds.size());
    for (std::size_t j = 0; j < ds.size(); ++j) {
      sizes[j] = ds[j].n();
      levels[j] = ds[j].values().data();
    }
    MergedGrid grid = MergedGrid::build(sizes);
    return std::sqrt(grid.mean_squared_spread(levels));
  }
  std::vector<QuantileFunction> qs;
  qs.reserve(ds.size());
  for (const auto& d : ds) qs.push_back(QuantileFunction::of(d));
  return variation_r(std::span<const QuantileFunction>(qs), r);
}

EmpiricalDistribution resample(const EmpiricalDistribution& d, std::int64_t m,
                               RandomStream& stream) {
  if (m < 1) throw error(errc::bad_argument, "resample size must be positive");
  std::vector<double> out(static_cast<std::size_t>(m));
  const auto& v = d.values();
  const auto n = static_cast<std::uint64_t>(d.n());
  for (std::int64_t i = 0; i < m; ++i)
    out[static_cast<std::size_t>(i)] = v[stream.next_below(n)];
  return EmpiricalDistribution::from_samples(out);
}

}  // namespace warpfit
