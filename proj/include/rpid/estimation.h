#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rpid/inference.h"
#include "rpid/intervals.h"
#include "rpid/model.h"

namespace rpid {

struct FittedParameters {
  IntervalModel interval_model;
  std::optional<MarkModel> mark_model;
};

// Pooled MLE over consecutive interior intervals of every sequence (and their
// marks when fit_marks is set). Boundary gaps to t_start / t_end are censored
// and excluded. Throws EstimationError when nothing can be fit.
FittedParameters fit_from_history(IntervalFamily family, std::span<const EventSequence> sequences,
                                  bool fit_marks);

struct EmConfig {
  int n_iter_max = 10;
  double k_max_fraction = 0.5;  // K_max = floor(N * k_max_fraction)
  IntervalFamily family = IntervalFamily::Gamma;
  bool fit_marks = false;

  void validate() const;
};

enum class EmTermination { FixedPoint, MaxIterations, KMaxExceeded };

std::string_view to_string(EmTermination t);

struct EmResult {
  IntervalModel interval_model;
  std::optional<MarkModel> mark_model;
  int iterations = 0;
  EmTermination termination = EmTermination::MaxIterations;
  IndexSet final_map;
  // |I_MAP| after each E-step, in order.
  std::vector<std::size_t> map_sizes;
};

// Alternates an M-step (refit on the events outside the previous MAP set) and
// an E-step (MAP intrusion set under the refit parameters). Stops at a fixed
// point, after n_iter_max M-steps, or once the MAP set exceeds K_max; returns
// the parameters of the last completed M-step. A refit that becomes impossible
// mid-loop ends the run as KMaxExceeded with the previous parameters.
// The initial M-step fits S minus initial_map with the Gamma shape held at or
// above 0.51 (see fit_mle_bounded) and propagates its errors.
EmResult em_fit(const EventSequence& seq, double p_epsilon, const EmConfig& cfg);

// Same loop with I_MAP_prev initialized to initial_map instead of the empty set.
EmResult em_fit_from(const EventSequence& seq, double p_epsilon, const EmConfig& cfg, const IndexSet& initial_map);

// Entry-level AUC-maximizing prior over the candidates, scoring every training
// entry with per-entry EM. Ties go to the smaller p_epsilon. Marks-only scoring
// is selected with family = Exponential and use_marks = true.
// Throws EvaluationError if the training entries are single-class.
double tune_p_epsilon(std::span<const EventSequence> train, std::span<const double> candidates,
                      IntervalFamily family, bool use_marks, const EmConfig& em = {});

// Default p_epsilon grid: 10 log-spaced values in [0.005, 0.5].
std::vector<double> default_p_epsilon_grid();

}  // namespace rpid
