// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   rpid_acceptance            run all criteria
//   rpid_acceptance 3 8        run the listed criteria only

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rpid/evalkit.h"
#include "rpid/inference.h"
#include "rpid/intervals.h"
#include "rpid/synth.h"

using namespace rpid;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

EventSequence random_sequence(Rng& rng, std::size_t n, bool with_marks) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double t_start = 10.0 * (u(rng) - 0.5);
  const double length = 0.5 + 10.0 * u(rng);
  std::vector<double> times(n);
  for (double& t : times) t = t_start + length * u(rng);
  std::sort(times.begin(), times.end());
  std::lognormal_distribution<double> mark(0.0, 0.6);
  std::vector<Event> events;
  for (double t : times) events.push_back(Event{t, with_marks ? std::optional(mark(rng)) : std::nullopt, {}});
  return EventSequence(t_start, t_start + length, std::move(events));
}

EventSequence renewal_sequence(Rng& rng, const IntervalModel& m, std::size_t n) {
  double t = 0.0;
  std::vector<Event> events;
  for (std::size_t i = 0; i < n; ++i) {
    t += m.sample(rng);
    events.push_back(Event{t, {}, {}});
  }
  return EventSequence(0.0, t + m.sample(rng), std::move(events));
}

// Synthetic replication settings. The scorer prior equals the generator's
// per-event intrusion probability.
constexpr int kEntries = 1000;
constexpr int kEventsPerEntry = 20;
constexpr double kReferenceRate = 0.07;
const std::vector<double> kRateGrid{0.02, 0.05, 0.07, 0.1, 0.2, 0.3, 0.5};
const std::vector<double> kShapes{1.0, 2.0, 4.0, 8.0};

std::uint64_t dataset_seed(double shape, double rate) {
  return 20240000u + static_cast<std::uint64_t>(shape) * 1000u + static_cast<std::uint64_t>(std::lround(rate * 1000));
}

struct SyntheticRun {
  EvalReport known;
  EvalReport em;
};

const SyntheticRun& synthetic(double shape, double rate) {
  static std::map<std::pair<double, double>, SyntheticRun> cache;
  const auto key = std::make_pair(shape, rate);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  GenSpec spec;
  spec.n_events = kEventsPerEntry;
  spec.interval_model = IntervalModel::gamma(shape, shape);
  spec.injection_rate = rate;
  spec.positive_fraction = 0.5;
  spec.seed = dataset_seed(shape, rate);
  const auto data = gen_dataset(spec, kEntries);

  ScorerConfig known;
  known.p_epsilon = rate;
  known.known = FittedParameters{spec.interval_model, std::nullopt};
  ScorerConfig em;
  em.p_epsilon = rate;
  em.use_em = true;
  return cache.emplace(key, SyntheticRun{evaluate_dataset(data, known), evaluate_dataset(data, em)}).first->second;
}

Outcome oracle_equivalence() {
  static const double shapes[] = {1.0, 2.0, 4.0, 8.0};
  static const double rates[] = {0.5, 1.0, 4.0};
  static const double priors[] = {0.05, 0.2};
  Rng rng(1);
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng() % 10);
    const bool marks = c % 2 == 1;
    const EventSequence seq = random_sequence(rng, n, marks);
    const IntervalModel m = IntervalModel::gamma(shapes[c % 4], rates[(c / 4) % 3]);
    const double p = priors[(c / 12) % 2];
    std::optional<MarkModel> g;
    if (marks) g = MarkModel::log_normal(0.2, 0.5);

    const FactorTable f = build_factors(seq, m, p, g);
    const BruteForceResult b = brute_force_posterior(f);
    const InferenceResult r = infer_all(seq, m, p, g);
    const MapResult map = map_subsequence(f);
    worst = std::max(worst, std::fabs(r.log_marginal - b.log_marginal));
    worst = std::max(worst, std::fabs(r.intrusion_probability - b.intrusion_probability));
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::fabs(r.event_marginals[i] - b.event_marginals[i]));
    worst = std::max(worst, std::fabs(map.log_posterior - b.map_log_posterior));
    worst = std::max(worst, std::fabs(-map.path_length - b.map_log_posterior));
  }
  return {worst <= 1e-9, "100 cases, max abs deviation " + fmt("%.3g", worst)};
}

Outcome analytic_spot_check() {
  const EventSequence seq(0.0, 2.0, {Event{1.0, {}, {}}});
  const double q = infer_all(seq, IntervalModel::exponential(1.0), 0.1).intrusion_probability;
  return {std::fabs(q - 1.0 / 19.0) <= 1e-9, "intrusion probability " + fmt("%.12f", q) + " vs 1/19"};
}

Outcome closed_form_vs_quadrature() {
  double worst = 0.0;
  int count = 0;
  for (double k : {0.75, 1.0, 2.0, 4.0, 8.0}) {
    for (double rate : {0.5, 1.0, 4.0}) {
      const IntervalModel m = IntervalModel::gamma(k, rate);
      for (double x : {0.0, 0.1, 1.0, 5.0}) {
        const std::pair<TailIntegral, double> cases[] = {{TailIntegral::Survival, m.log_survival(x)},
                                                         {TailIntegral::SqTail, m.log_sq_tail(x)},
                                                         {TailIntegral::LbTail, m.log_lb_tail(x)},
                                                         {TailIntegral::LbSqTail, m.log_lb_sq_tail(x)}};
        for (const auto& [kind, closed] : cases) {
          const double quad = quadrature_reference(m, kind, x);
          worst = std::max(worst, std::fabs(std::exp(closed) / quad - 1.0));
          ++count;
        }
      }
    }
  }
  return {worst <= 1e-8, std::to_string(count) + " integrals, max relative deviation " + fmt("%.3g", worst)};
}

Outcome posterior_by_shape() {
  bool pass = true;
  std::ostringstream os;
  os << "rate " << kReferenceRate << ";";
  for (double shape : kShapes) {
    const EvalReport& r = synthetic(shape, kReferenceRate).known;
    const double pos = r.mean_posterior_positive;
    const double neg = r.mean_posterior_negative;
    os << " shape " << shape << " pos " << fmt("%.3f", pos) << " neg " << fmt("%.3f", neg) << ";";
    if (shape == 1.0) {
      pass = pass && std::fabs(pos - 0.5) <= 0.1 && std::fabs(neg - 0.5) <= 0.1;
    } else {
      pass = pass && pos - neg >= 0.1;
    }
  }
  return {pass, os.str()};
}

Outcome entry_auc() {
  bool pass = true;
  std::ostringstream os;
  os << "rate " << kReferenceRate << ";";
  for (double shape : {2.0, 4.0, 8.0}) {
    const SyntheticRun& r = synthetic(shape, kReferenceRate);
    os << " shape " << shape << " known " << fmt("%.3f", r.known.entry_auc) << " em " << fmt("%.3f", r.em.entry_auc)
       << ";";
    pass = pass && r.known.entry_auc > 0.6 && r.em.entry_auc > 0.6;
  }
  double peak_known = 0.0;
  double peak_em = 0.0;
  for (double rate : kRateGrid) {
    peak_known = std::max(peak_known, synthetic(8.0, rate).known.entry_auc);
    peak_em = std::max(peak_em, synthetic(8.0, rate).em.entry_auc);
  }
  os << " shape 8 peak known " << fmt("%.3f", peak_known) << " em " << fmt("%.3f", peak_em);
  pass = pass && peak_known >= 0.8 && peak_em >= 0.8;
  return {pass, os.str()};
}

Outcome jaccard_by_shape() {
  bool pass = true;
  std::ostringstream os;
  os << "rate " << kReferenceRate << ", positives only;";
  const double shape1 = synthetic(1.0, kReferenceRate).known.mean_jaccard_positive;
  os << " shape 1 " << fmt("%.3f", shape1) << ";";
  for (double shape : {2.0, 4.0, 8.0}) {
    const double j = synthetic(shape, kReferenceRate).known.mean_jaccard_positive;
    os << " shape " << shape << " " << fmt("%.3f", j) << ";";
    pass = pass && j >= 0.45 && shape1 < j;
  }
  return {pass, os.str()};
}

Outcome mark_ordering() {
  GenSpec spec;
  spec.n_events = kEventsPerEntry;
  spec.interval_model = IntervalModel::gamma(4.0, 4.0);
  spec.injection_rate = kReferenceRate;
  spec.marks = MarkPair{MarkModel::log_normal(0.0, 0.4), MarkModel::log_normal(0.7, 0.4)};
  spec.seed = 7;
  const auto data = gen_dataset(spec, kEntries);
  auto auc_for = [&](ScoringMode mode) {
    ScorerConfig s;
    s.p_epsilon = kReferenceRate;
    s.mode = mode;
    s.use_em = true;
    return evaluate_dataset(data, s).entry_auc;
  };
  const double combined = auc_for(ScoringMode::Combined);
  const double intervals = auc_for(ScoringMode::IntervalsOnly);
  const double marks = auc_for(ScoringMode::MarksOnly);
  return {combined >= intervals && intervals >= marks - 0.02,
          "shape 4, per-entry EM: combined " + fmt("%.3f", combined) + " intervals " + fmt("%.3f", intervals) +
              " marks " + fmt("%.3f", marks)};
}

Outcome quadratic_scaling() {
  Rng rng(3);
  const IntervalModel m = IntervalModel::gamma(4.0, 4.0);
  ScorerConfig scorer;
  scorer.p_epsilon = kReferenceRate;
  scorer.known = FittedParameters{m, std::nullopt};
  auto best_time = [&](std::size_t n) {
    const EventSequence seq = renewal_sequence(rng, m, n);
    double best = HUGE_VAL;
    for (int rep = 0; rep < 5; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      const EntryScore s = score_entry(seq, scorer);
      const auto t1 = std::chrono::steady_clock::now();
      if (!std::isfinite(s.log_marginal)) return HUGE_VAL;
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
  };
  const double t1000 = best_time(1000);
  const double t2000 = best_time(2000);
  const double ratio = t2000 / t1000;
  return {ratio >= 3.0 && ratio <= 6.0 && t2000 < 2.0,
          "N=1000 " + fmt("%.4f", t1000) + " s, N=2000 " + fmt("%.4f", t2000) + " s, ratio " + fmt("%.2f", ratio)};
}

Outcome exchangeability() {
  Rng rng(9);
  double worst = 0.0;
  int sets = 0;
  for (int c = 0; c < 20; ++c) {
    const std::size_t n = 3 + static_cast<std::size_t>(c % 10);
    const EventSequence seq = random_sequence(rng, n, false);
    const FactorTable f = build_factors(seq, IntervalModel::exponential(0.25 + 0.5 * c), 0.05 + 0.02 * c);
    const std::size_t interior = n - 2;
    std::vector<double> first(n, std::nan(""));
    for (std::uint32_t mask = 0; mask < (1u << interior); ++mask) {
      std::vector<std::size_t> set;
      for (std::size_t i = 0; i < interior; ++i)
        if (mask & (1u << i)) set.push_back(i + 1);
      const double lp = log_prob_subsequence(f, set);
      double& ref = first[set.size()];
      if (std::isnan(ref)) ref = lp;
      worst = std::max(worst, std::fabs(lp - ref));
      ++sets;
    }
  }
  return {worst <= 1e-12, std::to_string(sets) + " interior sets, max spread " + fmt("%.3g", worst)};
}

Outcome time_reversal() {
  Rng rng(10);
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng() % 30);
    const bool marks = c % 2 == 0;
    const EventSequence seq = random_sequence(rng, n, marks);
    const IntervalModel m = IntervalModel::gamma(1.0 + c % 8, 0.5 + 0.1 * (c % 7));
    std::optional<MarkModel> g;
    if (marks) g = MarkModel::log_normal(-0.1, 0.7);
    const double p = 0.01 + 0.4 * (c % 10) / 10.0;
    const double fwd = log_marginal_likelihood(build_factors(seq, m, p, g)).log_total;
    const double bwd = log_marginal_likelihood(build_factors(seq.reversed(), m, p, g)).log_total;
    worst = std::max(worst, std::fabs(fwd - bwd));
  }
  return {worst <= 1e-9, "100 cases, max deviation " + fmt("%.3g", worst)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle equivalence", oracle_equivalence},
      {"analytic N=1 spot check", analytic_spot_check},
      {"closed form vs quadrature", closed_form_vs_quadrature},
      {"posterior by shape", posterior_by_shape},
      {"entry AUC", entry_auc},
      {"MAP Jaccard", jaccard_by_shape},
      {"marks ordering", mark_ordering},
      {"quadratic scaling", quadratic_scaling},
      {"exponential exchangeability", exchangeability},
      {"time reversal", time_reversal},
  };

  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) selected.push_back(i);

  int failed = 0;
  for (int id : selected) {
    if (id < 1 || id > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion %d\n", id);
      return 2;
    }
    const auto& [name, run] = criteria[static_cast<std::size_t>(id - 1)];
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %2d  %-28s %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(selected.size()) - failed, selected.size());
  return failed == 0 ? 0 : 1;
}
