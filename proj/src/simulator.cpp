#include "mdbell/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <random>
#include <thread>

#include "mdbell/errors.hpp"

namespace mdbell {

namespace {

struct Outcome {
  int setting = 0;
  DeterministicStrategy strategy;
};

struct SamplingTable {
  std::vector<double> cdf;
  std::vector<Outcome> outcomes;
};

SamplingTable build_table(const LhvEnsemble& e) {
  SamplingTable t;
  double acc = 0.0;
  for (const auto& atom : e.atoms()) {
    const InputConditional ic = atom.input_conditional();
    for (int s = 0; s < 4; ++s) {
      const double mass = atom.weight * ic[static_cast<std::size_t>(s)];
      if (mass <= 0.0) continue;
      acc += mass;
      t.cdf.push_back(acc);
      t.outcomes.push_back({s, atom.outputs});
    }
  }
  for (auto& c : t.cdf) c /= acc;
  return t;
}

}  // namespace

void SimConfig::validate() const {
  if (n_trials == 0) throw ValidationError("n_trials must be at least 1");
  const ValidationReport report = validate_ensemble(ensemble, RandomnessBounds::make(1.0, 0.0));
  if (!report.ok()) throw ValidationError("invalid ensemble: " + report.summary());
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

TrialCounts run_trials(const SimConfig& cfg) {
  cfg.validate();
  const SamplingTable table = build_table(cfg.ensemble);
  std::mt19937_64 rng(splitmix64(cfg.seed));
  TrialCounts c;
  c.n_total = cfg.n_trials;
  for (std::uint64_t t = 0; t < cfg.n_trials; ++t) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    auto it = std::upper_bound(table.cdf.begin(), table.cdf.end(), u);
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(it - table.cdf.begin()), table.cdf.size() - 1);
    const Outcome& o = table.outcomes[k];
    const int x = o.setting / 2;
    const int y = o.setting % 2;
    const bool a_zero = o.strategy.alice_outputs_zero(x);
    const bool b_zero = o.strategy.bob_outputs_zero(y);
    ++c.n_setting[static_cast<std::size_t>(o.setting)];
    if (a_zero && b_zero) ++c.coincidences[static_cast<std::size_t>(o.setting)];
    if (x == 0) {
      ++c.n_a0;
      if (a_zero) ++c.singles_a;
    }
    if (y == 0) {
      ++c.n_b0;
      if (b_zero) ++c.singles_b;
    }
  }
  return c;
}

ChEstimate empirical_ch(const TrialCounts& counts) {
  ChEstimate out;
  out.estimate = ch_from_counts(counts);
  double var = 0.0;
  auto add = [&](std::uint64_t num, std::uint64_t den) {
    const double p = static_cast<double>(num) / static_cast<double>(den);
    var += p * (1.0 - p) / static_cast<double>(den);
  };
  for (std::size_t i = 0; i < 4; ++i) add(counts.coincidences[i], counts.n_setting[i]);
  add(counts.singles_a, counts.n_a0);
  add(counts.singles_b, counts.n_b0);
  out.std_error = std::sqrt(var);
  return out;
}

SimReport simulate(const SimConfig& cfg) {
  SimReport r;
  r.counts = run_trials(cfg);
  const ChEstimate est = empirical_ch(r.counts);
  r.j_estimate = est.estimate;
  r.std_error = est.std_error;
  r.j_exact = ensemble_bell_value(cfg.ensemble, Functional::CH);
  r.n_trials = cfg.n_trials;
  r.seed = cfg.seed;
  return r;
}

std::vector<SimReport> simulate_batch(const LhvEnsemble& ensemble, std::uint64_t n_trials,
                                      std::span<const std::uint64_t> seeds, unsigned threads) {
  SimConfig base{n_trials, 0, ensemble};
  base.validate();
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(seeds.size(), 1)));
  std::vector<SimReport> reports(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      SimConfig cfg = base;
      cfg.seed = seeds[i];
      try {
        reports[i] = simulate(cfg);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return reports;
}

}  // namespace mdbell
