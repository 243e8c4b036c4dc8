#include "rpid/evalkit.h"

#include <algorithm>
#include <exception>
#include <thread>
#include <limits>
#include <numeric>
#include <string>

#include "rpid/errors.h"

namespace rpid {

namespace {

template <class E>
[[noreturn]] void rethrow_for_entry(const E& e, std::size_t entry_index) {
  throw E("entry " + std::to_string(entry_index) + ": " + e.what());
}

void check_classes(std::size_t n_pos, std::size_t n_neg, const char* what) {
  if (n_pos == 0 || n_neg == 0) {
    throw EvaluationError(std::string(what) + ": both classes must be present (AUC undefined)");
  }
}

EntryScore score_entry_unchecked(const EventSequence& seq, const ScorerConfig& scorer) {
  const bool use_marks = scorer.mode != ScoringMode::IntervalsOnly;
  const IntervalFamily family =
      scorer.mode == ScoringMode::MarksOnly ? IntervalFamily::Exponential : scorer.family;

  EntryScore out{0.0, 0.0, {}, {}, {IntervalModel::exponential(1.0), std::nullopt}};
  if (scorer.use_em) {
    EmConfig cfg = scorer.em;
    cfg.family = family;
    cfg.fit_marks = use_marks;
    EmResult em = em_fit(seq, scorer.p_epsilon, cfg);
    out.params = {em.interval_model, em.mark_model};
  } else {
    if (!scorer.known) throw ParameterError("scorer: no parameters supplied and EM disabled");
    out.params = *scorer.known;
    if (family == IntervalFamily::Exponential && out.params.interval_model.family() != IntervalFamily::Exponential) {
      out.params.interval_model = IntervalModel::exponential(1.0 / out.params.interval_model.mean());
    }
    if (use_marks && !out.params.mark_model) throw ParameterError("scorer: marks mode needs a mark model");
  }
  if (!use_marks) out.params.mark_model.reset();

  const InferenceResult inf = infer_all(seq, out.params.interval_model, scorer.p_epsilon, out.params.mark_model);
  out.intrusion_probability = inf.intrusion_probability;
  out.log_marginal = inf.log_marginal;
  out.event_marginals = inf.event_marginals;
  out.map_indices =
      map_subsequence(build_factors(seq, out.params.interval_model, scorer.p_epsilon, out.params.mark_model))
          .intrusion_indices;
  return out;
}

}  // namespace

std::string_view to_string(ScoringMode mode) {
  switch (mode) {
    case ScoringMode::IntervalsOnly:
      return "intervals";
    case ScoringMode::MarksOnly:
      return "marks";
    case ScoringMode::Combined:
      return "combined";
  }
  return "unknown";
}

EntryScore score_entry(const EventSequence& seq, const ScorerConfig& scorer, std::size_t entry_index) {
  try {
    return score_entry_unchecked(seq, scorer);
  } catch (const EstimationError& e) {
    rethrow_for_entry(e, entry_index);
  } catch (const ParameterError& e) {
    rethrow_for_entry(e, entry_index);
  } catch (const DomainError& e) {
    rethrow_for_entry(e, entry_index);
  } catch (const NumericError& e) {
    rethrow_for_entry(e, entry_index);
  }
}

std::vector<EntryScore> score_all(std::span<const EventSequence> data, const ScorerConfig& scorer,
                                  unsigned threads) {
  const std::size_t n = data.size();
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));

  std::vector<std::optional<EntryScore>> results(n);
  std::vector<std::exception_ptr> errors(n);
  auto work = [&](std::size_t worker) {
    for (std::size_t i = worker; i < n; i += threads) {
      try {
        results[i] = score_entry(data[i], scorer, i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
  }

  std::vector<EntryScore> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*results[i]));
  }
  return out;
}

double auc(std::span<const double> scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) throw EvaluationError("auc: scores and labels differ in length");
  const std::size_t n = scores.size();
  const auto n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  const std::size_t n_neg = n - n_pos;
  check_classes(n_pos, n_neg, "auc");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]]) pos_rank_sum += midrank;
    }
    i = j + 1;
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double jaccard(std::span<const std::size_t> predicted, std::span<const std::size_t> truth) {
  if (predicted.empty() && truth.empty()) return 1.0;
  std::vector<std::size_t> inter;
  std::set_intersection(predicted.begin(), predicted.end(), truth.begin(), truth.end(), std::back_inserter(inter));
  const std::size_t uni = predicted.size() + truth.size() - inter.size();
  return static_cast<double>(inter.size()) / static_cast<double>(uni);
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) throw EvaluationError("roc: scores and labels differ in length");
  const std::size_t n = scores.size();
  const auto n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  check_classes(n_pos, n - n_pos, "roc");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<RocPoint> out;
  out.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t i = 0;
  while (i < n) {
    const double threshold = scores[order[i]];
    while (i < n && scores[order[i]] == threshold) {
      if (labels[order[i]]) {
        ++tp;
      } else {
        ++fp;
      }
      ++i;
    }
    out.push_back({threshold, static_cast<double>(fp) / static_cast<double>(n - n_pos),
                   static_cast<double>(tp) / static_cast<double>(n_pos)});
  }
  return out;
}

std::vector<bool> entry_labels(std::span<const EventSequence> data) {
  std::vector<bool> labels;
  labels.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!data[i].has_labels()) {
      throw EvaluationError("entry " + std::to_string(i) + ": events must carry ground-truth labels");
    }
    labels.push_back(!data[i].intrusion_indices().empty());
  }
  return labels;
}

EvalReport evaluate_scores(std::span<const EventSequence> data, std::span<const EntryScore> scores) {
  if (data.size() != scores.size()) throw EvaluationError("evaluate: one score per entry required");
  const std::vector<bool> labels = entry_labels(data);

  EvalReport report;
  report.n_entries = data.size();
  std::vector<double> entry_scores;
  std::vector<double> event_scores;
  std::vector<bool> event_labels;
  double jac_all = 0.0;
  double jac_pos = 0.0;
  double post_pos = 0.0;
  double post_neg = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const EntryScore& s = scores[i];
    entry_scores.push_back(s.intrusion_probability);
    const IndexSet truth = data[i].intrusion_indices();
    const double jac = jaccard(s.map_indices, truth);
    jac_all += jac;
    if (labels[i]) {
      ++n_pos;
      jac_pos += jac;
      post_pos += s.intrusion_probability;
    } else {
      post_neg += s.intrusion_probability;
    }
    for (std::size_t k = 0; k < data[i].size(); ++k) {
      event_scores.push_back(s.event_marginals[k]);
      event_labels.push_back(data[i][k].label == EventLabel::Intrusion);
    }
  }
  const std::size_t n_neg = data.size() - n_pos;
  check_classes(n_pos, n_neg, "evaluate");

  report.entry_auc = auc(entry_scores, labels);
  report.event_auc = auc(event_scores, event_labels);
  report.roc_entry = roc_curve(entry_scores, labels);
  report.roc_event = roc_curve(event_scores, event_labels);
  report.mean_jaccard = jac_all / static_cast<double>(data.size());
  report.mean_jaccard_positive = jac_pos / static_cast<double>(n_pos);
  report.mean_posterior_positive = post_pos / static_cast<double>(n_pos);
  report.mean_posterior_negative = post_neg / static_cast<double>(n_neg);
  return report;
}

EvalReport evaluate_dataset(std::span<const EventSequence> data, const ScorerConfig& scorer) {
  const std::vector<bool> labels = entry_labels(data);
  check_classes(static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true)),
                static_cast<std::size_t>(std::count(labels.begin(), labels.end(), false)), "evaluate");
  return evaluate_scores(data, score_all(data, scorer));
}

}  // namespace rpid
