#include "warpfit/common.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

namespace warpfit {

const char* errc_name(errc code) {
  switch (code) {
    case errc::ok: return "ok";
    case errc::empty_sample: return "EmptySample";
    case errc::non_finite_value: return "NonFiniteValue";
    case errc::out_of_range: return "OutOfRange";
    case errc::invalid_order: return "InvalidOrder";
    case errc::empty_collection: return "EmptyCollection";
    case errc::instance_too_large: return "InstanceTooLarge";
    case errc::param_out_of_box: return "ParamOutOfBox";
    case errc::degenerate_denominator: return "DegenerateDenominator";
    case errc::no_convergence: return "NoConvergence";
    case errc::singular_sigma: return "SingularSigma";
    case errc::quadrature_divergence: return "QuadratureDivergence";
    case errc::invalid_spec: return "InvalidSpec";
    case errc::empty_stats: return "EmptyStats";
    case errc::bad_argument: return "BadArgument";
  }
  return "UnknownError";
}

void parallel_for(std::int64_t count, int threads, const std::function<void(std::int64_t)>& fn) {
  if (count <= 0) return;
  if (threads <= 1 || count == 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  int nworkers = static_cast<int>(std::min<std::int64_t>(threads, count));
  std::atomic<std::int64_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto work = [&]() {
    for (;;) {
      std::int64_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nworkers) - 1);
  for (int w = 1; w < nworkers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

EigenSym eigen_sym(const SymMatrix& m) {
  const int n = m.dim;
  SymMatrix a = m;
  SymMatrix v(n);
  for (int i = 0; i < n; ++i) v.at(i, i) = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a.at(i, j) * a.at(i, j);
    if (off < 1e-300) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = a.at(p, q);
        if (apq == 0.0) continue;
        double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = a.at(k, p), akq = a.at(k, q);
          a.at(k, p) = c * akp - s * akq;
          a.at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = a.at(p, k), aqk = a.at(q, k);
          a.at(p, k) = c * apk - s * aqk;
          a.at(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          double vkp = v.at(k, p), vkq = v.at(k, q);
          v.at(k, p) = c * vkp - s * vkq;
          v.at(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  EigenSym out;
  out.values.resize(n);
  for (int i = 0; i < n; ++i) out.values[i] = a.at(i, i);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int x, int y) { return out.values[x] < out.values[y]; });
  EigenSym sorted;
  sorted.values.resize(n);
  sorted.vectors = SymMatrix(n);
  for (int i = 0; i < n; ++i) {
    sorted.values[i] = out.values[order[i]];
    for (int k = 0; k < n; ++k) sorted.vectors.at(k, i) = v.at(k, order[i]);
  }
  return sorted;
}

}  // namespace warpfit
