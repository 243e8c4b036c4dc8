#include "rpid/inference.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rpid/errors.h"
#include "rpid/special_functions.h"

namespace rpid {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();

// ln sum exp(values); -inf for an all -inf input.
double log_sum_exp(std::span<const double> values) {
  double hi = kNegInf;
  for (double v : values) hi = std::max(hi, v);
  if (hi == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - hi);
  return hi + std::log(sum);
}

double probability_from_complement(double log_complement, double log_total) {
  const double p = -std::expm1(log_complement - log_total);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

MapResult map_subsequence(const FactorTable& f) {
  const std::size_t n = f.size();
  const std::size_t end = n + 1;
  // dist[k]: shortest e_0 -> e_k; hops[k]: vertices on that path.
  std::vector<double> dist(n + 2, kInf);
  std::vector<std::size_t> hops(n + 2, 0);
  std::vector<std::size_t> pred(n + 2, 0);
  dist[0] = 0.0;

  for (std::size_t k = 1; k <= end; ++k) {
    dist[k] = -f.log_p(k);
    hops[k] = 1;
    pred[k] = 0;
    for (std::size_t j = 1; j < k; ++j) {
      const double w = k == end ? -f.log_r(j) : -f.log_q(j, k);
      const double d = dist[j] + w;
      if (d < dist[k] || (d == dist[k] && hops[j] + 1 > hops[k])) {
        dist[k] = d;
        hops[k] = hops[j] + 1;
        pred[k] = j;
      }
    }
  }

  std::vector<std::size_t> path;  // process event vertices, end to start
  for (std::size_t v = pred[end]; v != 0; v = pred[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());

  MapResult out;
  std::vector<char> on_path(n, 0);
  for (std::size_t v : path) on_path[v - 1] = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (!on_path[i]) out.intrusion_indices.push_back(i);
  }

  // Re-accumulate in path order so path_length is exactly -log_posterior.
  if (path.empty()) {
    out.path_length = -f.log_p(end);
  } else {
    double len = -f.log_p(path.front());
    for (std::size_t i = 1; i < path.size(); ++i) len += -f.log_q(path[i - 1], path[i]);
    len += -f.log_r(path.back());
    out.path_length = len;
  }
  out.log_posterior = log_prob_subsequence(f, out.intrusion_indices);
  return out;
}

MarginalLikelihood log_marginal_likelihood(const FactorTable& f) {
  const std::size_t n = f.size();
  MarginalLikelihood out;
  out.log_prefix.resize(n);
  std::vector<double> terms;
  terms.reserve(n + 1);

  for (std::size_t k = 1; k <= n; ++k) {
    terms.clear();
    terms.push_back(f.log_p(k));
    const auto q = f.log_q_into(k);
    for (std::size_t j = 1; j < k; ++j) terms.push_back(out.log_prefix[j - 1] + q[j - 1]);
    out.log_prefix[k - 1] = log_sum_exp(terms);
  }

  terms.clear();
  terms.push_back(f.log_p(n + 1));
  for (std::size_t j = 1; j <= n; ++j) terms.push_back(out.log_prefix[j - 1] + f.log_r(j));
  out.log_total = log_sum_exp(terms);
  return out;
}

InferenceResult infer_all(const EventSequence& seq, const IntervalModel& m, double p_epsilon,
                          const std::optional<MarkModel>& marks) {
  const FactorTable forward = build_factors(seq, m, p_epsilon, marks);
  const FactorTable backward = build_factors(seq.reversed(), m, p_epsilon, marks);
  const MarginalLikelihood fwd = log_marginal_likelihood(forward);
  const MarginalLikelihood bwd = log_marginal_likelihood(backward);
  const std::size_t n = seq.size();

  InferenceResult out;
  out.log_marginal = fwd.log_total;
  out.intrusion_probability = probability_from_complement(log_prob_subsequence(forward, {}), fwd.log_total);
  out.log_forward = fwd.log_prefix;
  out.log_backward.resize(n);
  out.event_marginals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.log_backward[i] = bwd.log_prefix[n - 1 - i];
    // Forward and backward sums both contain event i's incoming factor terms
    // except one (1 - p_epsilon), and both contain its mark term.
    const double log_not_intrusion =
        out.log_forward[i] + out.log_backward[i] + forward.log1m_p_epsilon() - forward.mark_term(i + 1);
    out.event_marginals[i] = probability_from_complement(log_not_intrusion, fwd.log_total);
  }
  return out;
}

BruteForceResult brute_force_posterior(const FactorTable& f) {
  const std::size_t n = f.size();
  if (n > kBruteForceMaxEvents) {
    std::ostringstream os;
    os << "brute_force_posterior: refusing to enumerate 2^" << n << " subsets (limit " << kBruteForceMaxEvents
       << " events)";
    throw ParameterError(os.str());
  }

  BruteForceResult out;
  out.log_marginal = kNegInf;
  out.map_log_posterior = kNegInf;
  std::vector<double> log_not_in(n, kNegInf);
  double log_empty = kNegInf;
  IndexSet set;
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    set.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1U) set.push_back(i);
    }
    const double lp = log_prob_subsequence(f, set);
    out.log_marginal = special::log_add_exp(out.log_marginal, lp);
    if (mask == 0) log_empty = lp;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask >> i & 1U)) log_not_in[i] = special::log_add_exp(log_not_in[i], lp);
    }
    if (lp > out.map_log_posterior ||
        (lp == out.map_log_posterior && std::lexicographical_compare(set.begin(), set.end(), out.map_set.begin(),
                                                                     out.map_set.end()))) {
      out.map_log_posterior = lp;
      out.map_set = set;
    }
  }

  out.intrusion_probability = probability_from_complement(log_empty, out.log_marginal);
  out.event_marginals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.event_marginals[i] = probability_from_complement(log_not_in[i], out.log_marginal);
  }
  return out;
}

}  // namespace rpid
