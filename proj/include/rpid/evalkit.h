#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rpid/estimation.h"
#include "rpid/inference.h"
#include "rpid/model.h"

namespace rpid {

// Which evidence the scorer uses.
//   IntervalsOnly: interval model, marks ignored.
//   MarksOnly: marks with the interval family forced to Exponential, whose
//              posterior carries no interval information.
//   Combined: interval model and marks.
enum class ScoringMode { IntervalsOnly, MarksOnly, Combined };

std::string_view to_string(ScoringMode mode);

struct ScorerConfig {
  IntervalFamily family = IntervalFamily::Gamma;
  double p_epsilon = 0.1;
  ScoringMode mode = ScoringMode::IntervalsOnly;
  bool use_em = false;
  EmConfig em;
  // Parameters used when use_em is false.
  std::optional<FittedParameters> known;
};

struct EntryScore {
  double intrusion_probability = 0.0;
  double log_marginal = 0.0;
  std::vector<double> event_marginals;
  IndexSet map_indices;
  FittedParameters params;
};

// Scores one entry. Errors are rethrown with the entry index prefixed.
EntryScore score_entry(const EventSequence& seq, const ScorerConfig& scorer, std::size_t entry_index = 0);

// Scores every entry, fanning out over up to `threads` workers (0 = hardware
// concurrency). Results are in input order and identical to a serial run; the
// error of the lowest failing entry index is rethrown.
std::vector<EntryScore> score_all(std::span<const EventSequence> data, const ScorerConfig& scorer,
                                  unsigned threads = 0);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct EvalReport {
  double entry_auc = 0.0;
  double event_auc = 0.0;
  double mean_jaccard = 0.0;           // all entries
  double mean_jaccard_positive = 0.0;  // entries with an intrusion only
  double mean_posterior_positive = 0.0;
  double mean_posterior_negative = 0.0;
  std::vector<RocPoint> roc_entry;
  std::vector<RocPoint> roc_event;
  std::size_t n_entries = 0;
};

// Mann-Whitney AUC with midranks for ties. Throws EvaluationError if a class is
// missing or the lengths differ.
double auc(std::span<const double> scores, const std::vector<bool>& labels);

// |a ∩ b| / |a ∪ b| for sorted index sets; two empty sets give 1.
double jaccard(std::span<const std::size_t> predicted, std::span<const std::size_t> truth);

// One point per distinct score (descending), preceded by (+inf, 0, 0).
std::vector<RocPoint> roc_curve(std::span<const double> scores, const std::vector<bool>& labels);

// True for entries with at least one intrusion-labeled event. Throws
// EvaluationError for unlabeled events.
std::vector<bool> entry_labels(std::span<const EventSequence> data);

// Aggregates precomputed scores (scores[i] belongs to data[i]).
EvalReport evaluate_scores(std::span<const EventSequence> data, std::span<const EntryScore> scores);

EvalReport evaluate_dataset(std::span<const EventSequence> data, const ScorerConfig& scorer);

}  // namespace rpid
