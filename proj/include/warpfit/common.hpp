#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace warpfit {

enum class errc : int {
  ok = 0,
  empty_sample,
  non_finite_value,
  out_of_range,
  invalid_order,
  empty_collection,
  instance_too_large,
  param_out_of_box,
  degenerate_denominator,
  no_convergence,
  singular_sigma,
  quadrature_divergence,
  invalid_spec,
  empty_stats,
  bad_argument,
};

const char* errc_name(errc code);

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

// Counter-based stream: output k is a pure function of (key, k), so streams
// derived from the same key tuple agree across threads and platforms.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : key_(mix(seed + 0x2545F4914F6CDD1DULL)) {}

  // Derives an independent stream keyed by (this stream's key, index).
  RandomStream child(std::uint64_t index) const {
    RandomStream s(0);
    s.key_ = mix(key_ ^ mix(index * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL));
    s.counter_ = 0;
    return s;
  }

  std::uint64_t next_u64() {
    ++counter_;
    return mix(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  // Uniform on the open interval (0, 1); never returns an exact endpoint,
  // so inverse-CDF sampling stays finite.
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// Runs fn(i) for i in [0, count). Work items must not share mutable state;
// results may not depend on the schedule. threads <= 1 runs inline.
void parallel_for(std::int64_t count, int threads, const std::function<void(std::int64_t)>& fn);

// Dense symmetric matrix, row-major.
struct SymMatrix {
  int dim = 0;
  std::vector<double> a;  // dim*dim

  SymMatrix() = default;
  explicit SymMatrix(int d) : dim(d), a(static_cast<std::size_t>(d) * d, 0.0) {}
  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * dim + j]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * dim + j]; }
};

// Cyclic Jacobi eigendecomposition; eigenvalues ascending, columns of `vectors`
// are the corresponding eigenvectors.
struct EigenSym {
  std::vector<double> values;
  SymMatrix vectors;
};
EigenSym eigen_sym(const SymMatrix& m);

}  // namespace warpfit
