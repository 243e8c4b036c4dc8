#pragma once

// Special functions backing the interval closed forms. Everything here works in
// natural-log space where the result can underflow.

namespace rpid::special {

// ln P(a, x), the regularized lower incomplete gamma function. a > 0, x >= 0.
double log_gamma_p(double a, double x);

// ln Q(a, x) = ln(1 - P(a, x)), the regularized upper incomplete gamma function.
// Accurate deep into the tail (returns values far below ln DBL_MIN).
double log_gamma_q(double a, double x);

double digamma(double x);
double trigamma(double x);

// ln(e^a + e^b), with -inf absorbing.
double log_add_exp(double a, double b);

// ln(e^a - e^b) for a >= b. Returns -inf when a == b.
double log_diff_exp(double a, double b);

}  // namespace rpid::special
