#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rpid/intervals.h"
#include "rpid/model.h"

namespace rpid {

struct MarkPair {
  MarkModel process;
  MarkModel intrusion;
};

// Generator settings. Construct through make(), which validates.
struct GenSpec {
  int n_events = 20;
  IntervalModel interval_model = IntervalModel::exponential(1.0);
  double injection_rate = 0.1;
  double positive_fraction = 0.5;
  std::optional<MarkPair> marks;
  std::uint64_t seed = 0;

  void validate() const;
};

// One labeled entry with exactly spec.n_events events.
//
// The process is simulated from t_0 = 0 for N - K + 1 intervals; the first and
// last renewals become t_start and t_end and the N - K renewals between them
// are kept as process events. A positive entry draws K ~ Binomial(N, rate)
// conditioned on K >= 1 and places its K intrusion events uniformly on one
// subinterval of length ~ Uniform(0, 2T/3) at a uniform feasible offset.
EventSequence gen_entry(const GenSpec& spec, bool positive, Rng& rng);

// floor(positive_fraction * n) positive entries spread evenly through the
// dataset; entry i is drawn from an RNG seeded by (spec.seed, i).
std::vector<EventSequence> gen_dataset(const GenSpec& spec, int n_entries);

// Whether entry i of an n-entry dataset is positive.
bool is_positive_slot(double positive_fraction, int index);

}  // namespace rpid
