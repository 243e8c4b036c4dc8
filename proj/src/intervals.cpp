#include "rpid/intervals.h"

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "rpid/errors.h"
#include "rpid/special_functions.h"

namespace rpid {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_nonnegative(double x, const char* op) {
  if (!(x >= 0.0)) {
    std::ostringstream os;
    os << op << ": argument must be >= 0, got " << x;
    throw DomainError(os.str());
  }
}

}  // namespace

std::string_view to_string(IntervalFamily family) {
  switch (family) {
    case IntervalFamily::Exponential:
      return "exponential";
    case IntervalFamily::Gamma:
      return "gamma";
  }
  return "unknown";
}

IntervalFamily parse_interval_family(std::string_view name) {
  if (name == "exponential") return IntervalFamily::Exponential;
  if (name == "gamma") return IntervalFamily::Gamma;
  throw ParameterError("unknown interval family '" + std::string(name) + "' (expected exponential or gamma)");
}

IntervalModel::IntervalModel(IntervalFamily family, double shape, double rate)
    : family_(family), shape_(shape), rate_(rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    std::ostringstream os;
    os << "interval model: rate must be positive and finite, got " << rate;
    throw ParameterError(os.str());
  }
  if (!(shape > 0.5) || !std::isfinite(shape)) {
    std::ostringstream os;
    os << "interval model: shape must be > 0.5 so that E[f(tau)] is finite, got " << shape;
    throw ParameterError(os.str());
  }
  log_rate_ = std::log(rate);
  lgamma_shape_ = std::lgamma(shape);
  // E[f] = rate^{2k} Gamma(2k-1) / (Gamma(k)^2 (2 rate)^{2k-1})
  const double log_two_rate = std::log(2.0 * rate);
  log_mean_density_ = 2.0 * shape * log_rate_ + std::lgamma(2.0 * shape - 1.0) - 2.0 * lgamma_shape_ -
                      (2.0 * shape - 1.0) * log_two_rate;
  // int tau f^2 = rate^{2k} Gamma(2k) / (Gamma(k)^2 (2 rate)^{2k})
  log_first_sq_moment_ =
      2.0 * shape * log_rate_ + std::lgamma(2.0 * shape) - 2.0 * lgamma_shape_ - 2.0 * shape * log_two_rate;
}

IntervalModel IntervalModel::exponential(double rate) { return IntervalModel(IntervalFamily::Exponential, 1.0, rate); }

IntervalModel IntervalModel::gamma(double shape, double rate) {
  return IntervalModel(IntervalFamily::Gamma, shape, rate);
}

double IntervalModel::log_density(double tau) const {
  require_nonnegative(tau, "log_density");
  if (tau == 0.0) {
    if (shape_ == 1.0) return log_rate_;
    return shape_ > 1.0 ? kNegInf : kInf;
  }
  return shape_ * log_rate_ + (shape_ - 1.0) * std::log(tau) - rate_ * tau - lgamma_shape_;
}

double IntervalModel::log_survival(double x) const {
  require_nonnegative(x, "log_survival");
  return special::log_gamma_q(shape_, rate_ * x);
}

double IntervalModel::log_sq_tail(double x) const {
  require_nonnegative(x, "log_sq_tail");
  // f^2 is proportional to a Gamma(2k - 1, 2 rate) density.
  return log_mean_density_ + special::log_gamma_q(2.0 * shape_ - 1.0, 2.0 * rate_ * x);
}

double IntervalModel::log_lb_tail(double t) const {
  require_nonnegative(t, "log_lb_tail");
  const double log_mean = std::log(shape_) - log_rate_;
  const double first = log_mean + special::log_gamma_q(shape_ + 1.0, rate_ * t);
  if (t == 0.0) return first;
  const double second = std::log(t) + special::log_gamma_q(shape_, rate_ * t);
  return special::log_diff_exp(first, second);
}

double IntervalModel::log_lb_sq_tail(double t) const {
  require_nonnegative(t, "log_lb_sq_tail");
  const double first = log_first_sq_moment_ + special::log_gamma_q(2.0 * shape_, 2.0 * rate_ * t);
  if (t == 0.0) return first;
  const double second = std::log(t) + log_sq_tail(t);
  return special::log_diff_exp(first, second);
}

double IntervalModel::sample(Rng& rng) const {
  std::gamma_distribution<double> dist(shape_, 1.0 / rate_);
  return dist(rng);
}

namespace {

struct GammaFit {
  double shape;
  double mean;
};

// Unrestricted shape MLE; the caller checks the finite-E[f] bound.
GammaFit fit_gamma_shape(std::span<const double> intervals) {
  const double n = static_cast<double>(intervals.size());
  const double mean = std::accumulate(intervals.begin(), intervals.end(), 0.0) / n;
  double mean_log = 0.0;
  double var = 0.0;
  for (double v : intervals) {
    mean_log += std::log(v);
    var += (v - mean) * (v - mean);
  }
  mean_log /= n;
  var /= n;
  const double s = std::log(mean) - mean_log;
  if (!(var > 0.0) || !(s > 0.0)) {
    throw EstimationError("fit_mle: gamma fit needs at least two distinct intervals (zero variance)");
  }

  double shape = mean * mean / var;
  bool converged = false;
  for (int iter = 0; iter < 100; ++iter) {
    const double g = std::log(shape) - special::digamma(shape) - s;
    const double dg = 1.0 / shape - special::trigamma(shape);
    double next = shape - g / dg;
    if (!(next > 0.0)) next = 0.5 * shape;
    const double step = std::fabs(next - shape);
    shape = next;
    if (step <= 1e-10 * std::max(1.0, shape)) {
      converged = true;
      break;
    }
  }
  if (!converged || !std::isfinite(shape)) throw EstimationError("fit_mle: gamma shape iteration did not converge");
  return {shape, mean};
}

void check_intervals(std::span<const double> intervals) {
  if (intervals.empty()) throw EstimationError("fit_mle: no intervals to fit");
  for (double v : intervals) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      std::ostringstream os;
      os << "fit_mle: intervals must be positive and finite, got " << v;
      throw EstimationError(os.str());
    }
  }
}

}  // namespace

IntervalModel fit_mle(IntervalFamily family, std::span<const double> intervals) {
  check_intervals(intervals);
  if (family == IntervalFamily::Exponential) {
    const double mean = std::accumulate(intervals.begin(), intervals.end(), 0.0) / static_cast<double>(intervals.size());
    return IntervalModel::exponential(1.0 / mean);
  }
  const GammaFit fit = fit_gamma_shape(intervals);
  if (!(fit.shape > 0.5)) {
    std::ostringstream os;
    os << "fit_mle: fitted gamma shape " << fit.shape << " <= 0.5; E[f(tau)] would be infinite";
    throw EstimationError(os.str());
  }
  return IntervalModel::gamma(fit.shape, fit.shape / fit.mean);
}

IntervalModel fit_mle_bounded(IntervalFamily family, std::span<const double> intervals, double min_shape) {
  if (!(min_shape > 0.5)) throw ParameterError("fit_mle_bounded: min_shape must exceed 0.5");
  if (family == IntervalFamily::Exponential) return fit_mle(family, intervals);
  check_intervals(intervals);
  const GammaFit fit = fit_gamma_shape(intervals);
  const double shape = std::max(fit.shape, min_shape);
  return IntervalModel::gamma(shape, shape / fit.mean);
}

double quadrature_reference(const IntervalModel& m, TailIntegral integral, double x) {
  require_nonnegative(x, "quadrature_reference");

  // Truncate where the remaining probability mass is 1e-14 of the mass beyond x.
  const double log_target = m.log_survival(x) + std::log(1e-14);
  double upper = x + m.mean();
  while (m.log_survival(upper) > log_target) upper = x + 2.0 * (upper - x);

  auto density = [&](double tau) { return std::exp(m.log_density(tau)); };
  std::function<double(double)> integrand;
  switch (integral) {
    case TailIntegral::Survival:
      integrand = density;
      break;
    case TailIntegral::SqTail:
      integrand = [&](double tau) { return std::exp(2.0 * m.log_density(tau)); };
      break;
    case TailIntegral::LbTail:
      integrand = [&](double tau) { return (tau - x) * density(tau); };
      break;
    case TailIntegral::LbSqTail:
      integrand = [&](double tau) { return (tau - x) * std::exp(2.0 * m.log_density(tau)); };
      break;
  }

  boost::math::quadrature::tanh_sinh<double> integrator(15);
  double error = 0.0;
  double l1 = 0.0;
  std::size_t levels = 0;
  double value = 0.0;
  try {
    value = integrator.integrate(integrand, x, upper, 1e-12, &error, &l1, &levels);
  } catch (const std::exception& e) {
    throw NumericError(std::string("quadrature_reference: ") + e.what());
  }
  if (!std::isfinite(value) || error > 1e-10 * std::fabs(value)) {
    std::ostringstream os;
    os << "quadrature_reference: did not reach tolerance (value=" << value << ", error=" << error << ")";
    throw NumericError(os.str());
  }
  return value;
}

}  // namespace rpid
