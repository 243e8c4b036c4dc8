#include "rpid/synth.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "rpid/errors.h"

namespace rpid {

void GenSpec::validate() const {
  if (n_events < 2) throw ParameterError("generator: n_events must be >= 2");
  if (!(injection_rate > 0.0 && injection_rate < 1.0)) {
    throw ParameterError("generator: injection_rate must lie in (0, 1)");
  }
  if (!(positive_fraction >= 0.0 && positive_fraction <= 1.0)) {
    throw ParameterError("generator: positive_fraction must lie in [0, 1]");
  }
}

EventSequence gen_entry(const GenSpec& spec, bool positive, Rng& rng) {
  spec.validate();
  const int n = spec.n_events;

  int k = 0;
  if (positive) {
    std::binomial_distribution<int> binom(n, spec.injection_rate);
    do {
      k = binom(rng);
    } while (k == 0);
  }

  // Renewals t_0 .. t_{N-K+1}.
  const int n_process = n - k;
  std::vector<double> renewals(static_cast<std::size_t>(n_process) + 2);
  renewals[0] = 0.0;
  for (std::size_t i = 1; i < renewals.size(); ++i) renewals[i] = renewals[i - 1] + spec.interval_model.sample(rng);
  const double t_start = renewals.front();
  const double t_end = renewals.back();

  std::vector<Event> events;
  events.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n_process; ++i) {
    Event e;
    e.t = renewals[static_cast<std::size_t>(i)];
    e.label = EventLabel::Process;
    if (spec.marks) e.mark = spec.marks->process.sample(rng);
    events.push_back(e);
  }

  if (k > 0) {
    const double window = t_end - t_start;
    std::uniform_real_distribution<double> length_dist(0.0, 2.0 * window / 3.0);
    const double length = length_dist(rng);
    std::uniform_real_distribution<double> start_dist(t_start, t_end - length);
    const double sub_start = start_dist(rng);
    std::uniform_real_distribution<double> place(sub_start, sub_start + length);
    for (int i = 0; i < k; ++i) {
      Event e;
      e.t = std::clamp(place(rng), t_start, t_end);
      e.label = EventLabel::Intrusion;
      if (spec.marks) e.mark = spec.marks->intrusion.sample(rng);
      events.push_back(e);
    }
  }

  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
  return EventSequence(t_start, t_end, std::move(events));
}

bool is_positive_slot(double positive_fraction, int index) {
  return std::floor((index + 1) * positive_fraction) > std::floor(index * positive_fraction);
}

std::vector<EventSequence> gen_dataset(const GenSpec& spec, int n_entries) {
  spec.validate();
  if (n_entries < 1) throw ParameterError("generator: n_entries must be >= 1");
  std::vector<EventSequence> out;
  out.reserve(static_cast<std::size_t>(n_entries));
  for (int i = 0; i < n_entries; ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(i)};
    Rng rng(seq);
    out.push_back(gen_entry(spec, is_positive_slot(spec.positive_fraction, i), rng));
  }
  return out;
}

}  // namespace rpid
