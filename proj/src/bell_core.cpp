#include "mdbell/bell_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mdbell/errors.hpp"

namespace mdbell {

namespace {

std::string setting_name(int x, int y) {
  return "(" + std::to_string(x) + "," + std::to_string(y) + ")";
}

// Alice's probability of output 0 on x = 0 under the chosen convention.
double single_a0(const JointConditional& d, SingleCountConvention conv) {
  switch (conv) {
    case SingleCountConvention::OtherSettingZero:
      return d.alice_marginal(0, 0, 0);
    case SingleCountConvention::OtherSettingOne:
      return d.alice_marginal(0, 0, 1);
    case SingleCountConvention::AverageOverOtherSetting:
      break;
  }
  return 0.5 * (d.alice_marginal(0, 0, 0) + d.alice_marginal(0, 0, 1));
}

double single_b0(const JointConditional& d, SingleCountConvention conv) {
  switch (conv) {
    case SingleCountConvention::OtherSettingZero:
      return d.bob_marginal(0, 0, 0);
    case SingleCountConvention::OtherSettingOne:
      return d.bob_marginal(0, 1, 0);
    case SingleCountConvention::AverageOverOtherSetting:
      break;
  }
  return 0.5 * (d.bob_marginal(0, 0, 0) + d.bob_marginal(0, 1, 0));
}

}  // namespace

JointConditional::JointConditional(const Table& table) : table_(table) {
  for (double v : table_) {
    if (!std::isfinite(v) || v < -kProbabilityTolerance || v > 1.0 + kProbabilityTolerance) {
      throw ValidationError("joint distribution entry outside [0,1]");
    }
  }
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      double total = 0.0;
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) total += (*this)(a, b, x, y);
      }
      if (std::abs(total - 1.0) > kProbabilityTolerance) {
        throw ValidationError("joint distribution not normalized for setting " + setting_name(x, y));
      }
    }
  }
}

double JointConditional::alice_marginal(int a, int x, int y) const {
  return (*this)(a, 0, x, y) + (*this)(a, 1, x, y);
}

double JointConditional::bob_marginal(int b, int x, int y) const {
  return (*this)(0, b, x, y) + (*this)(1, b, x, y);
}

JointConditional mix(const JointConditional& first, const JointConditional& second, double weight) {
  if (!(weight >= 0.0 && weight <= 1.0)) throw ValidationError("mixing weight outside [0,1]");
  JointConditional::Table t{};
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = weight * first.table()[i] + (1.0 - weight) * second.table()[i];
  }
  return JointConditional(t);
}

JointConditional pr_box() {
  JointConditional::Table t{};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) t[JointConditional::index(a, b, x, y)] = ((a ^ b) == (x & y)) ? 0.5 : 0.0;
  return JointConditional(t);
}

JointConditional tsirelson_box() {
  const double visibility = 1.0 / std::numbers::sqrt2;
  JointConditional::Table t{};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
          const double sign = ((a + b + x * y) % 2 == 0) ? 1.0 : -1.0;
          t[JointConditional::index(a, b, x, y)] = 0.25 * (1.0 + sign * visibility);
        }
  return JointConditional(t);
}

JointConditional uniform_noise() {
  JointConditional::Table t{};
  t.fill(0.25);
  return JointConditional(t);
}

double BellFunctional::evaluate(const JointConditional& dist) const {
  double total = 0.0;
  for (std::size_t i = 0; i < coefficients.size(); ++i) total += coefficients[i] * dist.table()[i];
  return total;
}

BellFunctional ch_functional(SingleCountConvention conv) {
  BellFunctional f;
  f.classical_bound = 0.0;
  f.quantum_bound = kQuantumChBound;
  auto& c = f.coefficients;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) c[JointConditional::index(0, 0, x, y)] += (x == 1 && y == 1) ? -1.0 : 1.0;

  // Weight each other-party setting carries in the single-count term.
  std::array<double, 2> other{0.5, 0.5};
  if (conv == SingleCountConvention::OtherSettingZero) other = {1.0, 0.0};
  if (conv == SingleCountConvention::OtherSettingOne) other = {0.0, 1.0};
  for (int s = 0; s < 2; ++s) {
    for (int out = 0; out < 2; ++out) {
      c[JointConditional::index(0, out, 0, s)] -= other[s];  // Alice, x = 0
      c[JointConditional::index(out, 0, s, 0)] -= other[s];  // Bob, y = 0
    }
  }
  return f;
}

BellFunctional chsh_functional() {
  BellFunctional f;
  f.classical_bound = 2.0;
  f.quantum_bound = kQuantumChshBound;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
          f.coefficients[JointConditional::index(a, b, x, y)] = ((x * y + a + b) % 2 == 0) ? 1.0 : -1.0;
  return f;
}

double ch_value(const JointConditional& d, SingleCountConvention conv) {
  return d(0, 0, 0, 0) + d(0, 0, 0, 1) + d(0, 0, 1, 0) - d(0, 0, 1, 1) - single_a0(d, conv) -
         single_b0(d, conv);
}

double chsh_value(const JointConditional& d) {
  double total = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) total += (((x * y + a + b) % 2 == 0) ? 1.0 : -1.0) * d(a, b, x, y);
  return total;
}

NoSignalingReport is_no_signaling(const JointConditional& d, double tol) {
  if (!(tol >= 0.0)) throw ValidationError("tolerance must be non-negative");
  double residual = 0.0;
  for (int out = 0; out < 2; ++out) {
    for (int s = 0; s < 2; ++s) {
      residual = std::max(residual, std::abs(d.alice_marginal(out, s, 0) - d.alice_marginal(out, s, 1)));
      residual = std::max(residual, std::abs(d.bob_marginal(out, 0, s) - d.bob_marginal(out, 1, s)));
    }
  }
  return {residual <= tol, residual};
}

double ch_chsh_residual(const JointConditional& dist, SingleCountConvention conv) {
  return std::abs(ch_value(dist, conv) - (chsh_value(dist) - 2.0) / 4.0);
}

void TrialCounts::validate() const {
  std::uint64_t total = 0;
  for (int i = 0; i < 4; ++i) {
    total += n_setting[i];
    if (coincidences[i] > n_setting[i]) {
      throw ValidationError("coincidences exceed trials for setting " + setting_name(i / 2, i % 2));
    }
  }
  if (total != n_total) throw ValidationError("per-setting trial counts do not sum to n_total");
  if (n_a0 != n_setting[0] + n_setting[1]) throw ValidationError("n_a0 != N_AB(0,0) + N_AB(0,1)");
  if (n_b0 != n_setting[0] + n_setting[2]) throw ValidationError("n_b0 != N_AB(0,0) + N_AB(1,0)");
  if (singles_a > n_a0) throw ValidationError("singles_a exceeds n_a0");
  if (singles_b > n_b0) throw ValidationError("singles_b exceeds n_b0");
}

double ch_from_counts(const TrialCounts& c) {
  c.validate();
  for (int i = 0; i < 4; ++i) {
    if (c.n_setting[i] == 0) {
      throw ValidationError("insufficient trials for setting " + setting_name(i / 2, i % 2));
    }
  }
  if (c.n_a0 == 0) throw ValidationError("insufficient trials for Alice setting x=0");
  if (c.n_b0 == 0) throw ValidationError("insufficient trials for Bob setting y=0");
  auto ratio = [](std::uint64_t num, std::uint64_t den) {
    return static_cast<double>(num) / static_cast<double>(den);
  };
  return ratio(c.coincidences[0], c.n_setting[0]) + ratio(c.coincidences[1], c.n_setting[1]) +
         ratio(c.coincidences[2], c.n_setting[2]) - ratio(c.coincidences[3], c.n_setting[3]) -
         ratio(c.singles_a, c.n_a0) - ratio(c.singles_b, c.n_b0);
}

}  // namespace mdbell
