#include "rpid/special_functions.h"

#include <cmath>
#include <limits>
#include <sstream>

#include "rpid/errors.h"

namespace rpid::special {

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 100000;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_args(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0) || std::isnan(x)) {
    std::ostringstream os;
    os << "incomplete gamma: need a > 0 and x >= 0 (a=" << a << ", x=" << x << ")";
    throw DomainError(os.str());
  }
}

[[noreturn]] void no_convergence(const char* what, double a, double x) {
  std::ostringstream os;
  os << what << " did not converge (a=" << a << ", x=" << x << ")";
  throw NumericError(os.str());
}

// ln P(a, x) by the power series; converges for any x but is used for x < a + 1.
double log_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int n = 0; n < kMaxIter; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) {
      return -x + a * std::log(x) - std::lgamma(a) + std::log(sum);
    }
  }
  no_convergence("incomplete gamma series", a, x);
}

// ln Q(a, x) by the modified Lentz continued fraction; used for x >= a + 1.
double log_q_continued_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) {
      return -x + a * std::log(x) - std::lgamma(a) + std::log(h);
    }
  }
  no_convergence("incomplete gamma continued fraction", a, x);
}

}  // namespace

double log_gamma_p(double a, double x) {
  check_args(a, x);
  if (x == 0.0) return kNegInf;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return log_p_series(a, x);
  return std::log1p(-std::exp(log_q_continued_fraction(a, x)));
}

double log_gamma_q(double a, double x) {
  check_args(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return kNegInf;
  if (x < a + 1.0) return std::log1p(-std::exp(log_p_series(a, x)));
  return log_q_continued_fraction(a, x);
}

double digamma(double x) {
  if (!(x > 0.0)) throw DomainError("digamma: argument must be positive");
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Asymptotic expansion in Bernoulli numbers.
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 * (1.0 / 132)))));
  return result;
}

double trigamma(double x) {
  if (!(x > 0.0)) throw DomainError("trigamma: argument must be positive");
  double result = 0.0;
  while (x < 10.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += inv + 0.5 * inv2 +
            inv * inv2 * (1.0 / 6 - inv2 * (1.0 / 30 - inv2 * (1.0 / 42 - inv2 * (1.0 / 30 - inv2 * (5.0 / 66)))));
  return result;
}

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

double log_diff_exp(double a, double b) {
  if (b > a) throw NumericError("log_diff_exp: second argument exceeds first");
  if (b == kNegInf) return a;
  if (a == b) return kNegInf;
  const double d = b - a;
  // log(-expm1(d)) is accurate near 0; log1p(-exp(d)) for strongly negative d.
  return a + (d > -0.6931471805599453 ? std::log(-std::expm1(d)) : std::log1p(-std::exp(d)));
}

}  // namespace rpid::special
