#pragma once

#include <string>

#include "warpfit/common.hpp"

namespace warpfit {

// Scalar distribution used both for scenario generation and as the error law
// of the limiting functionals. All sampling goes through the inverse CDF fed
// by a single uniform stream, which keeps runs reproducible bit for bit.
struct Distribution {
  enum class Kind { normal, uniform, exponential, laplace, student_t };

  Kind kind = Kind::normal;
  double p1 = 0.0;  // normal: mean; uniform: lower; student_t: degrees of freedom
  double p2 = 1.0;  // normal: sd; uniform: upper

  static Distribution normal(double mean, double sd);
  static Distribution uniform01();
  static Distribution uniform(double lo, double hi);
  static Distribution exponential1();
  static Distribution laplace01();
  static Distribution student_t(double df);

  // Parses ids like "normal:0,1", "exp", "laplace", "t3", "t4", "uniform".
  static Distribution parse(const std::string& id);

  double cdf(double x) const;
  double density(double x) const;
  double quantile(double t) const;
  double sample(RandomStream& stream) const { return quantile(stream.next_uniform()); }

  // Whether t(1-t)/density(quantile(t))^2 is integrable over (0,1). Only
  // compactly supported laws with density bounded away from zero qualify here.
  bool integrable_quantile_tail() const { return kind == Kind::uniform; }

  std::string name() const;
};

}  // namespace warpfit
