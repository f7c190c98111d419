#include "warpfit/distributions.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <sstream>

namespace warpfit {

Distribution Distribution::normal(double mean, double sd) {
  if (!(sd > 0.0) || !std::isfinite(mean) || !std::isfinite(sd))
    throw error(errc::invalid_spec, "normal distribution needs finite mean and sd > 0");
  return Distribution{Kind::normal, mean, sd};
}

Distribution Distribution::uniform01() { return Distribution{Kind::uniform, 0.0, 1.0}; }

Distribution Distribution::uniform(double lo, double hi) {
  if (!(hi > lo)) throw error(errc::invalid_spec, "uniform needs hi > lo");
  return Distribution{Kind::uniform, lo, hi};
}

Distribution Distribution::exponential1() { return Distribution{Kind::exponential, 1.0, 0.0}; }

Distribution Distribution::laplace01() { return Distribution{Kind::laplace, 0.0, 1.0}; }

Distribution Distribution::student_t(double df) {
  if (!(df >= 1.0)) throw error(errc::invalid_spec, "student_t needs df >= 1");
  return Distribution{Kind::student_t, df, 0.0};
}

Distribution Distribution::parse(const std::string& id) {
  if (id == "uniform") return uniform01();
  if (id == "exp" || id == "exponential") return exponential1();
  if (id == "laplace") return laplace01();
  if (id == "gaussian" || id == "normal") return normal(0.0, 1.0);
  if (id.size() > 1 && id[0] == 't') {
    try {
      return student_t(std::stod(id.substr(1)));
    } catch (const std::invalid_argument&) {
    }
  }
  if (id.rfind("normal:", 0) == 0) {
    std::istringstream in(id.substr(7));
    double mean = 0.0, sd = 0.0;
    char comma = 0;
    if (in >> mean >> comma >> sd && comma == ',') return normal(mean, sd);
  }
  throw error(errc::invalid_spec, "unknown distribution id '" + id + "'");
}

double Distribution::cdf(double x) const {
  switch (kind) {
    case Kind::normal:
      return boost::math::cdf(boost::math::normal_distribution<double>(p1, p2), x);
    case Kind::uniform:
      if (x <= p1) return 0.0;
      if (x >= p2) return 1.0;
      return (x - p1) / (p2 - p1);
    case Kind::exponential:
      return x <= 0.0 ? 0.0 : 1.0 - std::exp(-p1 * x);
    case Kind::laplace:
      return x < p1 ? 0.5 * std::exp((x - p1) / p2) : 1.0 - 0.5 * std::exp(-(x - p1) / p2);
    case Kind::student_t:
      return boost::math::cdf(boost::math::students_t_distribution<double>(p1), x);
  }
  return 0.0;
}

double Distribution::density(double x) const {
  switch (kind) {
    case Kind::normal:
      return boost::math::pdf(boost::math::normal_distribution<double>(p1, p2), x);
    case Kind::uniform:
      return (x < p1 || x > p2) ? 0.0 : 1.0 / (p2 - p1);
    case Kind::exponential:
      return x < 0.0 ? 0.0 : p1 * std::exp(-p1 * x);
    case Kind::laplace:
      return 0.5 / p2 * std::exp(-std::abs(x - p1) / p2);
    case Kind::student_t:
      return boost::math::pdf(boost::math::students_t_distribution<double>(p1), x);
  }
  return 0.0;
}

double Distribution::quantile(double t) const {
  if (!(t > 0.0 && t < 1.0)) throw error(errc::out_of_range, "quantile level must lie in (0,1)");
  switch (kind) {
    case Kind::normal:
      return boost::math::quantile(boost::math::normal_distribution<double>(p1, p2), t);
    case Kind::uniform:
      return p1 + t * (p2 - p1);
    case Kind::exponential:
      return -std::log1p(-t) / p1;
    case Kind::laplace:
      return t < 0.5 ? p1 + p2 * std::log(2.0 * t) : p1 - p2 * std::log(2.0 * (1.0 - t));
    case Kind::student_t:
      return boost::math::quantile(boost::math::students_t_distribution<double>(p1), t);
  }
  return 0.0;
}

std::string Distribution::name() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::normal: out << "normal(" << p1 << "," << p2 << ")"; break;
    case Kind::uniform: out << "uniform(" << p1 << "," << p2 << ")"; break;
    case Kind::exponential: out << "exponential(" << p1 << ")"; break;
    case Kind::laplace: out << "laplace(" << p1 << "," << p2 << ")"; break;
    case Kind::student_t: out << "student_t(" << p1 << ")"; break;
  }
  return out.str();
}

}  // namespace warpfit
