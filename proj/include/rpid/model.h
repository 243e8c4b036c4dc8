#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rpid/intervals.h"

namespace rpid {

enum class EventLabel { Process, Intrusion };

struct Event {
  double t = 0.0;
  std::optional<double> mark;
  // Ground truth for evaluation. Inference never reads it.
  std::optional<EventLabel> label;
};

// Observation window [t_start, t_end] with time-ordered events inside it.
// Marks are present on every event or on none.
class EventSequence {
 public:
  EventSequence(double t_start, double t_end, std::vector<Event> events);

  double t_start() const { return t_start_; }
  double t_end() const { return t_end_; }
  double duration() const { return t_end_ - t_start_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  const std::vector<Event>& events() const { return events_; }
  const Event& operator[](std::size_t i) const { return events_[i]; }

  bool has_marks() const { return !events_.empty() && events_.front().mark.has_value(); }
  bool has_labels() const;

  // Indices (0-based) of events labeled as intrusions.
  std::vector<std::size_t> intrusion_indices() const;

  // Time-reversed copy: window [-t_end, -t_start], event k maps to -t_{N-1-k}
  // with its mark and label carried along.
  EventSequence reversed() const;

  // Copy without the given (sorted, 0-based) event indices; same window.
  EventSequence without(std::span<const std::size_t> removed) const;

 private:
  double t_start_;
  double t_end_;
  std::vector<Event> events_;
};

// Log-normal mark density g with its cached ln E_{y~g}[g(y)].
class MarkModel {
 public:
  static MarkModel log_normal(double mu, double sigma);

  double mu() const { return mu_; }
  double sigma() const { return sigma_; }
  double log_density(double y) const;
  double log_mean_density() const { return log_mean_density_; }
  double sample(Rng& rng) const;

  friend bool operator==(const MarkModel&, const MarkModel&) = default;

 private:
  MarkModel(double mu, double sigma);

  double mu_;
  double sigma_;
  double log_mean_density_;
};

// Log-normal MLE: mu and sigma are the mean and (population) standard
// deviation of ln y. Needs at least two distinct positive values.
MarkModel fit_mark_model(std::span<const double> marks);

// Log-domain transition factors of one sequence.
//
// Indexing follows the path graph over vertices e_0 .. e_{N+1}: events are
// vertices 1..N, e_0 and e_{N+1} are the unobserved boundary renewals.
//   log_p(k), 1 <= k <= N+1 : e_0 -> e_k (k = N+1 is the all-intrusion path)
//   log_q(j, k), 1 <= j < k <= N : e_j -> e_k
//   log_r(k), 0 <= k <= N : e_k -> e_{N+1}; log_r(0) = 0
// Every factor carries the 1 / E[f] normalization, and the product along a
// path is the unnormalized posterior of the skipped events being the intrusion.
class FactorTable {
 public:
  std::size_t size() const { return n_; }
  double p_epsilon() const { return p_epsilon_; }
  double log_p_epsilon() const { return log_p_epsilon_; }
  double log1m_p_epsilon() const { return log1m_p_epsilon_; }

  double log_p(std::size_t k) const { return log_p_[k - 1]; }
  double log_q(std::size_t j, std::size_t k) const { return log_q_[row_offset(k) + (j - 1)]; }
  double log_r(std::size_t k) const { return log_r_[k]; }

  // Contiguous log_q(1..k-1, k).
  std::span<const double> log_q_into(std::size_t k) const { return {log_q_.data() + row_offset(k), k - 1}; }

  // ln g(y_k) - ln E[g] for event vertex k (0 without marks). Included in the
  // incoming factor of every process event.
  double mark_term(std::size_t k) const { return mark_term_[k - 1]; }

  friend bool operator==(const FactorTable&, const FactorTable&) = default;

  friend FactorTable build_factors(const EventSequence&, const IntervalModel&, double,
                                   const std::optional<MarkModel>&);

 private:
  static std::size_t row_offset(std::size_t k) { return (k - 1) * (k - 2) / 2; }

  std::size_t n_ = 0;
  double p_epsilon_ = 0.0;
  double log_p_epsilon_ = 0.0;
  double log1m_p_epsilon_ = 0.0;
  std::vector<double> log_p_;
  std::vector<double> log_q_;
  std::vector<double> log_r_;
  std::vector<double> mark_term_;
};

// Throws ParameterError if p_epsilon is outside (0, 1) or marks are requested
// for an unmarked sequence, DomainError if coincident events meet a density
// that is unbounded at zero.
FactorTable build_factors(const EventSequence& seq, const IntervalModel& m, double p_epsilon,
                          const std::optional<MarkModel>& marks = std::nullopt);

// ln of the unnormalized posterior that exactly the given events (0-based,
// any order, no duplicates) form the intrusion.
double log_prob_subsequence(const FactorTable& f, std::span<const std::size_t> intrusion);

}  // namespace rpid
