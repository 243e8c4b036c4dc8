#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>

namespace rpid {

using Rng = std::mt19937_64;

enum class IntervalFamily { Exponential, Gamma };

std::string_view to_string(IntervalFamily family);
IntervalFamily parse_interval_family(std::string_view name);

// Interarrival distribution of a renewal process. Exponential is carried as
// Gamma(shape = 1) internally, so both families share every code path.
//
// All integral accessors return natural logs. The shape must exceed 0.5: below
// that the integral of f^2 diverges at 0 and the expected density E[f(tau)],
// which normalizes every inference factor, is infinite.
class IntervalModel {
 public:
  static IntervalModel exponential(double rate);
  static IntervalModel gamma(double shape, double rate);

  IntervalFamily family() const { return family_; }
  double shape() const { return shape_; }
  double rate() const { return rate_; }
  double mean() const { return shape_ / rate_; }

  // ln f(tau). -inf at tau = 0 for shape > 1, +inf at tau = 0 for shape < 1.
  double log_density(double tau) const;

  // ln of the integral of f over [x, inf).
  double log_survival(double x) const;

  // ln of the integral of f^2 over [x, inf).
  double log_sq_tail(double x) const;

  // ln E_{tau ~ F}[f(tau)], i.e. log_sq_tail(0).
  double log_mean_density() const { return log_mean_density_; }

  // ln of the integral of (tau - t) f(tau) over [t, inf).
  double log_lb_tail(double t) const;

  // ln of the integral of (tau - t) f(tau)^2 over [t, inf).
  double log_lb_sq_tail(double t) const;

  double sample(Rng& rng) const;

  friend bool operator==(const IntervalModel&, const IntervalModel&) = default;

 private:
  IntervalModel(IntervalFamily family, double shape, double rate);

  IntervalFamily family_;
  double shape_;
  double rate_;
  double log_rate_;
  double lgamma_shape_;
  double log_mean_density_;
  // ln of the integral of tau f(tau)^2 over [0, inf).
  double log_first_sq_moment_;
};

// Maximum-likelihood fit. Exponential: rate = 1 / mean. Gamma: Newton iteration
// on ln k - digamma(k) = ln(mean) - mean(ln x), started from the moment estimate.
// Throws EstimationError for empty/non-positive data, degenerate Gamma input, or
// a fitted shape <= 0.5.
IntervalModel fit_mle(IntervalFamily family, std::span<const double> intervals);

// Gamma MLE restricted to shape >= min_shape (min_shape > 0.5). The profile
// log-likelihood is concave in the shape, so an unrestricted optimum below the
// bound maps onto it. Exponential fits are unrestricted.
IntervalModel fit_mle_bounded(IntervalFamily family, std::span<const double> intervals, double min_shape);

enum class TailIntegral { Survival, SqTail, LbTail, LbSqTail };

// Linear-domain value of one of the tail integrals by adaptive tanh-sinh
// quadrature (relative tolerance 1e-10). Independent of the closed forms above;
// used to validate them. Throws NumericError if the quadrature fails.
double quadrature_reference(const IntervalModel& m, TailIntegral integral, double x);

}  // namespace rpid
