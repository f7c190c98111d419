#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "warpfit/empirical.hpp"

namespace warpfit {

namespace {

// min_z (1/J) sum_j |y_j - z|^r for r in {1, 2}.
double point_cost(std::vector<double>& y, double r) {
  const double J = static_cast<double>(y.size());
  if (r == 2.0) {
    double mean = std::accumulate(y.begin(), y.end(), 0.0) / J;
    double s = 0.0;
    for (double v : y) s += (v - mean) * (v - mean);
    return s / J;
  }
  std::sort(y.begin(), y.end());
  double med = y[(y.size() - 1) / 2];
  double s = 0.0;
  for (double v : y) s += std::abs(v - med);
  return s / J;
}

// Dense two-phase primal simplex with Bland's rule for
//   min c.x  s.t.  A x = b, x >= 0.
// Sized for the tiny coupling programs the oracle is restricted to.
class SimplexLP {
 public:
  SimplexLP(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double> c)
      : rows_(a.size()), cols_(c.size()), a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {}

  const std::vector<double>& solution() const { return solution_; }

  double solve() {
    const std::size_t total = cols_ + rows_;  // structural + artificial
    tab_.assign(rows_, std::vector<double>(total + 1, 0.0));
    basis_.resize(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      double sign = b_[i] < 0.0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < cols_; ++j) tab_[i][j] = sign * a_[i][j];
      tab_[i][cols_ + i] = 1.0;
      tab_[i][total] = sign * b_[i];
      basis_[i] = cols_ + i;
    }

    std::vector<double> phase1(total, 0.0);
    for (std::size_t j = cols_; j < total; ++j) phase1[j] = 1.0;
    run(phase1, total);
    if (objective(phase1) > 1e-7)
      throw error(errc::bad_argument, "coupling program is infeasible");

    // Pivot leftover artificials out of the basis where possible.
    for (std::size_t i = 0; i < rows_; ++i) {
      if (basis_[i] < cols_) continue;
      std::size_t enter = cols_;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (std::abs(tab_[i][j]) > 1e-9) {
          enter = j;
          break;
        }
      }
      if (enter < cols_) pivot(i, enter);
    }

    std::vector<double> phase2(total, 0.0);
    for (std::size_t j = 0; j < cols_; ++j) phase2[j] = c_[j];
    run(phase2, cols_);

    solution_.assign(cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i)
      if (basis_[i] < cols_) solution_[basis_[i]] = tab_[i][total];
    return objective(phase2);
  }

 private:
  void run(const std::vector<double>& cost, std::size_t active_cols) {
    const std::size_t total = cols_ + rows_;
    for (long iter = 0; iter < 200000; ++iter) {
      std::vector<double> dual(rows_);
      for (std::size_t i = 0; i < rows_; ++i) dual[i] = cost[basis_[i]];
      std::size_t enter = total;
      for (std::size_t j = 0; j < active_cols; ++j) {
        double reduced = cost[j];
        for (std::size_t i = 0; i < rows_; ++i) reduced -= dual[i] * tab_[i][j];
        if (reduced < -1e-9) {
          enter = j;  // Bland: first improving column
          break;
        }
      }
      if (enter == total) return;
      std::size_t leave = rows_;
      double best = 0.0;
      for (std::size_t i = 0; i < rows_; ++i) {
        if (tab_[i][enter] > 1e-11) {
          double ratio = tab_[i][total] / tab_[i][enter];
          if (leave == rows_ || ratio < best - 1e-12 ||
              (ratio < best + 1e-12 && basis_[i] < basis_[leave])) {
            leave = i;
            best = ratio;
          }
        }
      }
      if (leave == rows_)
        throw error(errc::bad_argument, "coupling program is unbounded");
      pivot(leave, enter);
    }
    throw error(errc::no_convergence, "simplex iteration limit reached");
  }

  void pivot(std::size_t row, std::size_t col) {
    const std::size_t total = cols_ + rows_;
    double p = tab_[row][col];
    for (std::size_t j = 0; j <= total; ++j) tab_[row][j] /= p;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (i == row) continue;
      double f = tab_[i][col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= total; ++j) tab_[i][j] -= f * tab_[row][j];
    }
    basis_[row] = col;
  }

  double objective(const std::vector<double>& cost) const {
    double z = 0.0;
    for (std::size_t i = 0; i < rows_; ++i)
      z += cost[basis_[i]] * tab_[i][cols_ + rows_];
    return z;
  }

  std::size_t rows_, cols_;
  std::vector<std::vector<double>> a_;
  std::vector<double> b_, c_;
  std::vector<std::vector<double>> tab_;
  std::vector<std::size_t> basis_;
  std::vector<double> solution_;
};

double oracle_permutations(const EmpiricalDistribution& a, const EmpiricalDistribution& b,
                           double r) {
  const std::size_t n = static_cast<std::size_t>(a.n());
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> pair(2);
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      pair[0] = a.values()[i];
      pair[1] = b.values()[perm[i]];
      total += point_cost(pair, r);
    }
    best = std::min(best, total / static_cast<double>(n));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Coupling oracle_lp(std::span<const EmpiricalDistribution> ds, double r) {
  const std::size_t J = ds.size();
  std::size_t vars = 1;
  for (const auto& d : ds) vars *= static_cast<std::size_t>(d.n());

  std::size_t rows = 0;
  for (const auto& d : ds) rows += static_cast<std::size_t>(d.n());

  std::vector<std::vector<double>> a(rows, std::vector<double>(vars, 0.0));
  std::vector<double> b(rows);
  std::vector<double> c(vars);

  std::vector<std::size_t> offset(J, 0);
  {
    std::size_t acc = 0;
    for (std::size_t j = 0; j < J; ++j) {
      offset[j] = acc;
      acc += static_cast<std::size_t>(ds[j].n());
    }
  }
  for (std::size_t j = 0; j < J; ++j)
    for (std::int64_t i = 0; i < ds[j].n(); ++i)
      b[offset[j] + static_cast<std::size_t>(i)] = 1.0 / static_cast<double>(ds[j].n());

  std::vector<std::size_t> idx(J, 0);
  std::vector<double> point(J);
  for (std::size_t m = 0; m < vars; ++m) {
    for (std::size_t j = 0; j < J; ++j) {
      point[j] = ds[j].values()[idx[j]];
      a[offset[j] + idx[j]][m] = 1.0;
    }
    c[m] = point_cost(point, r);
    for (std::size_t j = J; j-- > 0;) {
      if (++idx[j] < static_cast<std::size_t>(ds[j].n())) break;
      idx[j] = 0;
    }
  }

  SimplexLP lp(std::move(a), std::move(b), std::move(c));
  Coupling out;
  out.cost = lp.solve();
  out.weights = lp.solution();
  out.shape.reserve(J);
  for (const auto& d : ds) out.shape.push_back(d.n());
  return out;
}

void check_oracle_preconditions(std::span<const EmpiricalDistribution> ds, double r) {
  if (ds.size() < 2) throw error(errc::empty_collection, "oracle needs at least two inputs");
  if (r != 1.0 && r != 2.0)
    throw error(errc::bad_argument, "oracle supports r = 1 and r = 2 only");
  double product = 1.0;
  for (const auto& d : ds) product *= static_cast<double>(d.n());
  if (product > 1e4)
    throw error(errc::instance_too_large, "coupling tensor exceeds the 1e4 entry cap");
}

}  // namespace

double Coupling::marginal(std::size_t j, std::int64_t i) const {
  std::int64_t stride = 1;
  for (std::size_t k = shape.size(); k-- > j + 1;) stride *= shape[k];
  const std::int64_t nj = shape[j];
  double total = 0.0;
  for (std::size_t m = 0; m < weights.size(); ++m) {
    std::int64_t idx = (static_cast<std::int64_t>(m) / stride) % nj;
    if (idx == i) total += weights[m];
  }
  return total;
}

double multimarginal_variation_oracle(std::span<const EmpiricalDistribution> ds, double r) {
  check_oracle_preconditions(ds, r);
  if (ds.size() == 2 && ds[0].n() == ds[1].n() && ds[0].n() <= 7)
    return oracle_permutations(ds[0], ds[1], r);
  return oracle_lp(ds, r).cost;
}

Coupling multimarginal_variation_coupling(std::span<const EmpiricalDistribution> ds, double r) {
  check_oracle_preconditions(ds, r);
  return oracle_lp(ds, r);
}

}  // namespace warpfit
