#include "rpid/estimation.h"

#include <cmath>
#include <sstream>

#include "rpid/errors.h"
#include "rpid/evalkit.h"

namespace rpid {

namespace {

// Lower shape bound for the initial whole-sequence M-step.
constexpr double kInitialMinShape = 0.51;

FittedParameters fit_pooled(IntervalFamily family, std::span<const EventSequence> sequences, bool fit_marks,
                            double min_shape) {
  std::vector<double> intervals;
  std::vector<double> marks;
  for (const EventSequence& seq : sequences) {
    for (std::size_t i = 1; i < seq.size(); ++i) intervals.push_back(seq[i].t - seq[i - 1].t);
    if (fit_marks) {
      if (!seq.empty() && !seq.has_marks()) throw EstimationError("fit_from_history: marks requested but missing");
      for (const Event& e : seq.events()) marks.push_back(*e.mark);
    }
  }
  if (intervals.empty()) {
    throw EstimationError("fit_from_history: no interior intervals (every sequence has fewer than 2 events)");
  }
  FittedParameters out{min_shape > 0.0 ? fit_mle_bounded(family, intervals, min_shape) : fit_mle(family, intervals),
                       std::nullopt};
  if (fit_marks) out.mark_model = fit_mark_model(marks);
  return out;
}

FittedParameters fit_remaining(const EventSequence& seq, const IndexSet& removed, const EmConfig& cfg,
                               double min_shape = 0.0) {
  const EventSequence rest = seq.without(removed);
  if (rest.size() < 3) {
    throw EstimationError("em: fewer than two interior intervals remain after removing the MAP set");
  }
  return fit_pooled(cfg.family, std::span<const EventSequence>(&rest, 1), cfg.fit_marks, min_shape);
}

}  // namespace

FittedParameters fit_from_history(IntervalFamily family, std::span<const EventSequence> sequences,
                                  bool fit_marks) {
  return fit_pooled(family, sequences, fit_marks, 0.0);
}

void EmConfig::validate() const {
  if (n_iter_max < 1) throw ParameterError("em: n_iter_max must be >= 1");
  if (!(k_max_fraction > 0.0 && k_max_fraction < 1.0)) throw ParameterError("em: k_max_fraction must lie in (0, 1)");
}

std::string_view to_string(EmTermination t) {
  switch (t) {
    case EmTermination::FixedPoint:
      return "fixed_point";
    case EmTermination::MaxIterations:
      return "max_iterations";
    case EmTermination::KMaxExceeded:
      return "k_max_exceeded";
  }
  return "unknown";
}

EmResult em_fit(const EventSequence& seq, double p_epsilon, const EmConfig& cfg) {
  return em_fit_from(seq, p_epsilon, cfg, {});
}

EmResult em_fit_from(const EventSequence& seq, double p_epsilon, const EmConfig& cfg, const IndexSet& initial_map) {
  cfg.validate();
  if (seq.size() < 3) throw EstimationError("em: sequence needs at least 3 events");
  const auto k_max = static_cast<std::size_t>(std::floor(static_cast<double>(seq.size()) * cfg.k_max_fraction));

  IndexSet prev = initial_map;
  FittedParameters params = fit_remaining(seq, prev, cfg, kInitialMinShape);
  EmResult out{params.interval_model, params.mark_model, 1, EmTermination::MaxIterations, prev, {}};

  for (;;) {
    if (out.iterations == cfg.n_iter_max) {
      out.termination = EmTermination::MaxIterations;
      out.final_map = prev;
      break;
    }
    const FactorTable f = build_factors(seq, params.interval_model, p_epsilon, params.mark_model);
    IndexSet map = map_subsequence(f).intrusion_indices;
    out.map_sizes.push_back(map.size());
    if (map == prev) {
      out.termination = EmTermination::FixedPoint;
      out.final_map = std::move(map);
      break;
    }
    if (map.size() > k_max) {
      out.termination = EmTermination::KMaxExceeded;
      out.final_map = std::move(map);
      break;
    }
    try {
      params = fit_remaining(seq, map, cfg);
    } catch (const Error&) {
      out.termination = EmTermination::KMaxExceeded;
      out.final_map = std::move(map);
      break;
    }
    prev = std::move(map);
    ++out.iterations;
  }

  out.interval_model = params.interval_model;
  out.mark_model = params.mark_model;
  return out;
}

std::vector<double> default_p_epsilon_grid() {
  std::vector<double> grid;
  constexpr int n = 10;
  const double lo = std::log(0.005);
  const double hi = std::log(0.5);
  for (int i = 0; i < n; ++i) grid.push_back(std::exp(lo + (hi - lo) * i / (n - 1)));
  return grid;
}

double tune_p_epsilon(std::span<const EventSequence> train, std::span<const double> candidates,
                      IntervalFamily family, bool use_marks, const EmConfig& em) {
  if (candidates.empty()) throw ParameterError("tune_p_epsilon: no candidate priors");
  const std::vector<bool> labels = entry_labels(train);

  ScorerConfig scorer;
  scorer.family = family;
  scorer.use_em = true;
  scorer.em = em;
  if (use_marks) {
    scorer.mode = family == IntervalFamily::Exponential ? ScoringMode::MarksOnly : ScoringMode::Combined;
  } else {
    scorer.mode = ScoringMode::IntervalsOnly;
  }

  double best_p = candidates.front();
  double best_auc = -1.0;
  for (double p : candidates) {
    scorer.p_epsilon = p;
    std::vector<double> scores;
    scores.reserve(train.size());
    for (const EntryScore& s : score_all(train, scorer)) scores.push_back(s.intrusion_probability);
    const double a = auc(scores, labels);
    if (a > best_auc || (a == best_auc && p < best_p)) {
      best_auc = a;
      best_p = p;
    }
  }
  return best_p;
}

}  // namespace rpid
