#include "rpid/model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rpid/errors.h"

namespace rpid {

EventSequence::EventSequence(double t_start, double t_end, std::vector<Event> events)
    : t_start_(t_start), t_end_(t_end), events_(std::move(events)) {
  if (!std::isfinite(t_start) || !std::isfinite(t_end) || !(t_end > t_start)) {
    std::ostringstream os;
    os << "event sequence: window must satisfy t_start < t_end, got [" << t_start << ", " << t_end << "]";
    throw DomainError(os.str());
  }
  const bool marked = !events_.empty() && events_.front().mark.has_value();
  double prev = t_start;
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const Event& e = events_[i];
    if (!std::isfinite(e.t) || e.t < prev || e.t > t_end) {
      std::ostringstream os;
      os << "event sequence: event " << i << " at t=" << e.t
         << (e.t > t_end ? " lies after t_end" : " is out of order or before t_start");
      throw DomainError(os.str());
    }
    if (e.mark.has_value() != marked) {
      std::ostringstream os;
      os << "event sequence: event " << i << " mark presence differs from event 0";
      throw DomainError(os.str());
    }
    if (marked && !(*e.mark > 0.0 && std::isfinite(*e.mark))) {
      std::ostringstream os;
      os << "event sequence: event " << i << " mark must be positive, got " << *e.mark;
      throw DomainError(os.str());
    }
    prev = e.t;
  }
}

bool EventSequence::has_labels() const {
  return std::all_of(events_.begin(), events_.end(), [](const Event& e) { return e.label.has_value(); });
}

std::vector<std::size_t> EventSequence::intrusion_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < events_.size(); ++i) {
    if (events_[i].label == EventLabel::Intrusion) out.push_back(i);
  }
  return out;
}

EventSequence EventSequence::reversed() const {
  std::vector<Event> rev;
  rev.reserve(events_.size());
  for (auto it = events_.rbegin(); it != events_.rend(); ++it) {
    Event e = *it;
    e.t = -e.t;
    rev.push_back(e);
  }
  return EventSequence(-t_end_, -t_start_, std::move(rev));
}

EventSequence EventSequence::without(std::span<const std::size_t> removed) const {
  std::vector<Event> kept;
  kept.reserve(events_.size());
  std::size_t r = 0;
  for (std::size_t i = 0; i < events_.size(); ++i) {
    if (r < removed.size() && removed[r] == i) {
      ++r;
      continue;
    }
    kept.push_back(events_[i]);
  }
  return EventSequence(t_start_, t_end_, std::move(kept));
}

MarkModel::MarkModel(double mu, double sigma) : mu_(mu), sigma_(sigma) {
  if (!std::isfinite(mu)) throw ParameterError("mark model: mu must be finite");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    std::ostringstream os;
    os << "mark model: sigma must be positive, got " << sigma;
    throw ParameterError(os.str());
  }
  // Integral of g^2 for the log-normal: exp(sigma^2 / 4 - mu) / (2 sigma sqrt(pi)).
  log_mean_density_ = sigma * sigma / 4.0 - mu - std::log(2.0 * sigma * std::sqrt(std::numbers::pi));
}

MarkModel MarkModel::log_normal(double mu, double sigma) { return MarkModel(mu, sigma); }

double MarkModel::log_density(double y) const {
  if (!(y > 0.0)) throw DomainError("mark density: mark must be positive");
  const double z = (std::log(y) - mu_) / sigma_;
  return -std::log(y) - std::log(sigma_) - 0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * z * z;
}

double MarkModel::sample(Rng& rng) const {
  std::lognormal_distribution<double> dist(mu_, sigma_);
  return dist(rng);
}

MarkModel fit_mark_model(std::span<const double> marks) {
  if (marks.size() < 2) throw EstimationError("fit_mark_model: need at least two marks");
  double mean = 0.0;
  for (double y : marks) {
    if (!(y > 0.0) || !std::isfinite(y)) throw EstimationError("fit_mark_model: marks must be positive");
    mean += std::log(y);
  }
  mean /= static_cast<double>(marks.size());
  double var = 0.0;
  for (double y : marks) {
    const double d = std::log(y) - mean;
    var += d * d;
  }
  var /= static_cast<double>(marks.size());
  if (!(var > 0.0)) throw EstimationError("fit_mark_model: need at least two distinct marks (zero variance)");
  return MarkModel::log_normal(mean, std::sqrt(var));
}

FactorTable build_factors(const EventSequence& seq, const IntervalModel& m, double p_epsilon,
                          const std::optional<MarkModel>& marks) {
  if (!(p_epsilon > 0.0 && p_epsilon < 1.0)) {
    std::ostringstream os;
    os << "build_factors: p_epsilon must lie in (0, 1), got " << p_epsilon;
    throw ParameterError(os.str());
  }
  if (marks && !seq.empty() && !seq.has_marks()) {
    throw ParameterError("build_factors: mark model supplied for a sequence without marks");
  }

  const std::size_t n = seq.size();
  FactorTable f;
  f.n_ = n;
  f.p_epsilon_ = p_epsilon;
  f.log_p_epsilon_ = std::log(p_epsilon);
  f.log1m_p_epsilon_ = std::log1p(-p_epsilon);
  const double lp = f.log_p_epsilon_;
  const double l1mp = f.log1m_p_epsilon_;
  const double norm = -m.log_mean_density();

  f.mark_term_.assign(n, 0.0);
  if (marks) {
    for (std::size_t i = 0; i < n; ++i) {
      f.mark_term_[i] = marks->log_density(*seq[i].mark) - marks->log_mean_density();
    }
  }

  const double ts = seq.t_start();
  const double te = seq.t_end();
  const double window = seq.duration();

  f.log_p_.resize(n + 1);
  for (std::size_t k = 1; k <= n; ++k) {
    const double x = seq[k - 1].t - ts;
    f.log_p_[k - 1] = norm + static_cast<double>(k - 1) * lp + m.log_sq_tail(x) - m.log_survival(x) +
                      f.mark_term_[k - 1];
  }
  f.log_p_[n] = norm + static_cast<double>(n) * lp + m.log_lb_sq_tail(window) - m.log_lb_tail(window);

  f.log_r_.resize(n + 1);
  f.log_r_[0] = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double x = te - seq[k - 1].t;
    f.log_r_[k] = norm + l1mp + static_cast<double>(n - k) * lp + m.log_sq_tail(x) - m.log_survival(x);
  }

  f.log_q_.resize(n >= 2 ? n * (n - 1) / 2 : 0);
  for (std::size_t k = 2; k <= n; ++k) {
    double* row = f.log_q_.data() + FactorTable::row_offset(k);
    const double tk = seq[k - 1].t;
    const double base = norm + l1mp + f.mark_term_[k - 1];
    for (std::size_t j = 1; j < k; ++j) {
      const double ld = m.log_density(tk - seq[j - 1].t);
      if (ld == std::numeric_limits<double>::infinity()) {
        std::ostringstream os;
        os << "build_factors: events " << j - 1 << " and " << k - 1
           << " coincide and the interval density is unbounded at 0 (shape < 1)";
        throw DomainError(os.str());
      }
      row[j - 1] = base + static_cast<double>(k - j - 1) * lp + ld;
    }
  }
  return f;
}

double log_prob_subsequence(const FactorTable& f, std::span<const std::size_t> intrusion) {
  const std::size_t n = f.size();
  std::vector<char> is_intrusion(n, 0);
  for (std::size_t i : intrusion) {
    if (i >= n) {
      std::ostringstream os;
      os << "log_prob_subsequence: event index " << i << " out of range for " << n << " events";
      throw DomainError(os.str());
    }
    if (is_intrusion[i]) throw DomainError("log_prob_subsequence: duplicate event index");
    is_intrusion[i] = 1;
  }

  std::size_t prev = 0;  // vertex of the previous process event, 0 = e_0
  double total = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    if (is_intrusion[k - 1]) continue;
    total += prev == 0 ? f.log_p(k) : f.log_q(prev, k);
    prev = k;
  }
  if (prev == 0) return f.log_p(n + 1);
  return total + f.log_r(prev);
}

}  // namespace rpid
