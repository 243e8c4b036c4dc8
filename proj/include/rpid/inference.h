#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "rpid/model.h"

namespace rpid {

using IndexSet = std::vector<std::size_t>;

struct MapResult {
  IndexSet intrusion_indices;  // 0-based, ascending
  double log_posterior = 0.0;  // ln of the unnormalized posterior of intrusion_indices
  double path_length = 0.0;    // sum of edge weights along the shortest path
};

struct MarginalLikelihood {
  double log_total = 0.0;  // ln of the sum over all 2^N intrusion hypotheses
  // log_prefix[k-1]: ln of the summed weight of all paths from e_0 that end at
  // process event e_k (the forward accumulator).
  std::vector<double> log_prefix;
};

struct InferenceResult {
  double log_marginal = 0.0;
  double intrusion_probability = 0.0;
  std::vector<double> event_marginals;  // P(event k is an intrusion | S), 0-based
  std::vector<double> log_forward;
  std::vector<double> log_backward;
};

struct BruteForceResult {
  double log_marginal = 0.0;
  double intrusion_probability = 0.0;
  std::vector<double> event_marginals;
  IndexSet map_set;
  double map_log_posterior = 0.0;
};

// MAP intrusion set as the complement of a shortest e_0 -> e_{N+1} path in the
// forward DAG with weights -log P, -log Q, -log R. Single topological sweep,
// O(N^2). Ties prefer the path through more events.
MapResult map_subsequence(const FactorTable& f);

// Forward recursion over prefixes; O(N^2).
MarginalLikelihood log_marginal_likelihood(const FactorTable& f);

// Intrusion probability and per-event marginals from a forward pass on the
// sequence and a second forward pass on its time reversal.
InferenceResult infer_all(const EventSequence& seq, const IntervalModel& m, double p_epsilon,
                          const std::optional<MarkModel>& marks = std::nullopt);

inline constexpr std::size_t kBruteForceMaxEvents = 20;

// Exhaustive enumeration of all 2^N intrusion sets. Reference oracle for tests.
// MAP ties resolve to the lexicographically smallest index set.
// Throws ParameterError for N > kBruteForceMaxEvents.
BruteForceResult brute_force_posterior(const FactorTable& f);

}  // namespace rpid
