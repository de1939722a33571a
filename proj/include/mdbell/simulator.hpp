#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mdbell/bell_core.hpp"
#include "mdbell/lhv_model.hpp"

namespace mdbell {

/// Identifier of the sampling algorithm recorded in every SimReport.
inline constexpr const char* kGeneratorId = "mt19937_64/splitmix64-seed/inverse-cdf";

struct SimConfig {
  std::uint64_t n_trials = 1;
  std::uint64_t seed = 0;
  LhvEnsemble ensemble;

  /// Throws ValidationError if n_trials is zero or the ensemble violates
  /// weight normalization or the averaging constraint.
  void validate() const;
};

struct SimReport {
  TrialCounts counts;
  double j_estimate = 0.0;
  double std_error = 0.0;
  double j_exact = 0.0;
  std::string generator = kGeneratorId;
  std::uint64_t n_trials = 0;
  std::uint64_t seed = 0;
};

struct ChEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// SplitMix64 step; also used to derive independent seeds for batches.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);

/// Samples lambda, then (x, y), then the strategy's outputs, trial by trial.
/// Singles count whenever the relevant setting occurs, whatever the other.
TrialCounts run_trials(const SimConfig& cfg);

/// CH estimate from counts, with the error of six independent binomial ratios.
ChEstimate empirical_ch(const TrialCounts& counts);

SimReport simulate(const SimConfig& cfg);

/// One report per seed, computed on up to `threads` threads (0 = hardware
/// concurrency). Results are in seed order and independent of thread count.
std::vector<SimReport> simulate_batch(const LhvEnsemble& ensemble, std::uint64_t n_trials,
                                      std::span<const std::uint64_t> seeds, unsigned threads = 0);

}  // namespace mdbell
