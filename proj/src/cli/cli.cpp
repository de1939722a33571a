#include "cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>

#include "mdbell/closed_form.hpp"
#include "mdbell/errors.hpp"
#include "mdbell/oracle.hpp"
#include "mdbell/serialization.hpp"
#include "mdbell/simulator.hpp"

namespace mdbell::cli {

std::string format_number(double v) {
  if (v == 0.0) return "0";  // also folds -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

namespace {

const std::vector<std::string> kConditionNames = {"general", "factorizable", "ns", "ns-factorizable"};

struct GlobalOptions {
  bool json = false;
  std::string out_path;
  std::uint64_t seed = 1;
};

/// --P/--Q or --delta, shared by the point commands.
struct PointOptions {
  std::optional<double> upper;
  std::optional<double> lower;
  std::optional<double> delta;

  void attach(CLI::App& cmd) {
    auto* p = cmd.add_option("--P", upper, "upper bound on p(x,y|lambda)");
    auto* q = cmd.add_option("--Q", lower, "lower bound on p(x,y|lambda)");
    auto* d = cmd.add_option("--delta", delta, "symmetric deviation: P = 1/4 + delta, Q = 1/4 - delta");
    d->excludes(p)->excludes(q);
  }

  bool given() const { return upper || lower || delta; }

  RandomnessBounds bounds() const {
    if (delta) return RandomnessBounds::from_delta(*delta);
    if (!upper || !lower) throw ValidationError("both --P and --Q (or --delta) are required");
    return RandomnessBounds::make(*upper, *lower);
  }
};

Functional parse_functional(const std::string& name) { return name == "chsh" ? Functional::CHSH : Functional::CH; }

const char* functional_name(Functional f) { return f == Functional::CH ? "ch" : "chsh"; }

/// Prints to --out when given, to `out` otherwise.
void emit(const GlobalOptions& g, std::ostream& out, const std::string& text) {
  if (g.out_path.empty()) {
    out << text;
  } else {
    write_file_atomically(g.out_path, text);
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------- oracle

struct OracleRun {
  OracleResult result;
  double closed_form = 0.0;
};

/// Oracle for any condition. No-signaling CH values come from the CHSH
/// program through J_CH = (J_CHSH - 2) / 4, with an output-symmetrized witness.
OracleRun run_oracle(ConditionFlags cond, Functional f, const RandomnessBounds& rb, int grid_n, bool all_strategies,
                     LpMethod method) {
  const bool via_chsh = cond.no_signaling && f == Functional::CH;
  const Functional solved = via_chsh ? Functional::CHSH : f;
  OracleRun run;
  run.result = cond.factorizable ? optimize_factorizable(solved, rb, grid_n)
                                 : optimize_general(solved, rb, GeneralOracleOptions{all_strategies, method});
  if (via_chsh) {
    run.result.value = (run.result.value - 2.0) / 4.0;
    run.result.certificate.error_bound /= 4.0;
    run.result.witness = symmetrize_outputs(run.result.witness);
  }
  run.closed_form = bound(f, cond, rb).value;
  return run;
}

// ---------------------------------------------------------------- sweep

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.0;

  std::vector<double> values() const {
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long k = 0; k <= n; ++k) out.push_back(lo + static_cast<double>(k) * step);
    return out;
  }
};

Range parse_range(const std::string& text, const std::string& flag) {
  Range r;
  char sep1 = 0;
  char sep2 = 0;
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  if (!(in >> r.lo >> sep1 >> r.hi >> sep2 >> r.step) || sep1 != ':' || sep2 != ':' || !(in >> std::ws).eof()) {
    throw ValidationError(flag + " expects lo:hi:step, got '" + text + "'");
  }
  if (!(r.step > 0.0) || r.hi < r.lo) throw ValidationError(flag + " needs step > 0 and hi >= lo");
  return r;
}

struct SweepRow {
  std::string condition;
  double upper = 0.0;
  double lower = 0.0;
  std::optional<double> delta;
  double closed_form = 0.0;
  std::string branch;
  std::optional<double> oracle;
  std::optional<double> gap;
};

/// Smallest P with bound(cond, P, Q) >= target, by bisection (the bound is
/// nondecreasing in P). Empty if even P = 1 - 3Q falls short.
std::optional<double> critical_upper(ConditionFlags cond, double q, double target) {
  double lo = std::max(0.25, q);
  double hi = std::max(lo, 1.0 - 3.0 * q);
  if (ch_bound(cond, RandomnessBounds::make(hi, q)).value < target) return std::nullopt;
  if (ch_bound(cond, RandomnessBounds::make(lo, q)).value >= target) return lo;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ch_bound(cond, RandomnessBounds::make(mid, q)).value >= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

std::string sweep_csv(const std::vector<SweepRow>& rows, bool with_oracle) {
  std::string text = "condition,P,Q,delta,closed_form,branch";
  if (with_oracle) text += ",oracle,gap";
  text += "\n";
  for (const auto& r : rows) {
    text += r.condition + "," + format_number(r.upper) + "," + format_number(r.lower) + "," +
            (r.delta ? format_number(*r.delta) : "") + "," + format_number(r.closed_form) + "," + r.branch;
    if (with_oracle) {
      text += "," + (r.oracle ? format_number(*r.oracle) : "") + "," + (r.gap ? format_number(*r.gap) : "");
    }
    text += "\n";
  }
  return text;
}

Json sweep_json(const std::vector<SweepRow>& rows) {
  Json out = Json::array();
  for (const auto& r : rows) {
    Json row{{"condition", r.condition}, {"P", r.upper},   {"Q", r.lower},
             {"closed_form", r.closed_form}, {"branch", r.branch}};
    row["delta"] = r.delta ? Json(*r.delta) : Json(nullptr);
    if (r.oracle) row["oracle"] = *r.oracle;
    if (r.gap) row["gap"] = *r.gap;
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bell-test bounds under limited measurement independence", "mdbell"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_flag("--json", g.json, "machine-readable JSON output");
  app.add_option("--out", g.out_path, "write the primary output to this file");
  app.add_option("--seed", g.seed, "seed for randomized computations");

  auto make_command = [&](const char* name, const char* help) {
    CLI::App* cmd = app.add_subcommand(name, help);
    cmd->fallthrough();
    return cmd;
  };

  std::string cond_name = "general";
  std::string func_name = "ch";
  auto add_condition = [&](CLI::App* cmd) {
    cmd->add_option("--cond", cond_name, "general | factorizable | ns | ns-factorizable")
        ->check(CLI::IsMember(kConditionNames));
  };
  auto add_functional = [&](CLI::App* cmd) {
    cmd->add_option("--func", func_name, "ch | chsh")->check(CLI::IsMember({"ch", "chsh"}));
  };

  // bound
  PointOptions bound_point;
  CLI::App* bound_cmd = make_command("bound", "closed-form optimal Bell value");
  add_condition(bound_cmd);
  add_functional(bound_cmd);
  bound_point.attach(*bound_cmd);

  // attack
  PointOptions attack_point;
  std::string attack_method = "analytic";
  CLI::App* attack_cmd = make_command("attack", "build an ensemble that attains the bound");
  add_condition(attack_cmd);
  attack_point.attach(*attack_cmd);
  attack_cmd->add_option("--method", attack_method, "analytic | numerical")
      ->check(CLI::IsMember({"analytic", "numerical"}));

  // oracle
  PointOptions oracle_point;
  int grid_n = 512;
  bool all_strategies = false;
  std::string lp_name = "basis";
  CLI::App* oracle_cmd = make_command("oracle", "numerical optimum with certificate");
  add_condition(oracle_cmd);
  add_functional(oracle_cmd);
  oracle_point.attach(*oracle_cmd);
  oracle_cmd->add_option("--grid", grid_n, "grid resolution for factorizable conditions")->check(CLI::Range(64, 1 << 14));
  oracle_cmd->add_flag("--all-strategies", all_strategies, "pair every vertex with all 16 strategies");
  oracle_cmd->add_option("--lp", lp_name, "basis | simplex")->check(CLI::IsMember({"basis", "simplex"}));

  // sweep
  std::vector<std::string> sweep_conds;
  std::string sweep_mode = "grid";
  std::string p_range = "0.25:1:0.05";
  std::string q_range = "0:0.25:0.05";
  std::string delta_range = "0:0.25:0.005";
  std::string q_critical_range = "0:0.25:0.005";
  double sweep_target = kQuantumChBound;
  bool sweep_oracle = false;
  int sweep_grid = 128;
  CLI::App* sweep_cmd = make_command("sweep", "tabulate bounds over a parameter grid (CSV)");
  sweep_cmd->add_option("--cond", sweep_conds, "conditions to tabulate (repeatable)")
      ->check(CLI::IsMember(kConditionNames));
  sweep_cmd->add_option("--mode", sweep_mode, "grid | delta | critical")
      ->check(CLI::IsMember({"grid", "delta", "critical"}));
  sweep_cmd->add_option("--P-range", p_range, "lo:hi:step for P (grid mode)");
  sweep_cmd->add_option("--Q-range", q_range, "lo:hi:step for Q (grid and critical modes)");
  sweep_cmd->add_option("--delta-range", delta_range, "lo:hi:step for delta (delta mode)");
  sweep_cmd->add_option("--target", sweep_target, "CH value traced in critical mode (default: quantum maximum)");
  sweep_cmd->add_flag("--oracle", sweep_oracle, "add oracle and gap columns");
  sweep_cmd->add_option("--grid", sweep_grid, "oracle grid resolution for factorizable conditions")
      ->check(CLI::Range(64, 1 << 14));

  // simulate
  std::string sim_path;
  std::uint64_t sim_trials = 0;
  CLI::App* sim_cmd = make_command("simulate", "Monte-Carlo run of an ensemble file");
  sim_cmd->add_option("ensemble", sim_path, "ensemble JSON file")->required();
  sim_cmd->add_option("-n,--trials", sim_trials, "number of trials")->required()->check(CLI::PositiveNumber);

  // verify
  std::string verify_path;
  PointOptions verify_point;
  std::optional<std::string> verify_cond;
  CLI::App* verify_cmd = make_command("verify", "check an ensemble file and evaluate it exactly");
  verify_cmd->add_option("ensemble", verify_path, "ensemble JSON file")->required();
  verify_point.attach(*verify_cmd);
  verify_cmd->add_option("--cond", verify_cond, "compare with the optimum for this condition")
      ->check(CLI::IsMember(kConditionNames));

  std::vector<std::string> argv_storage;
  argv_storage.push_back("mdbell");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    const ConditionFlags cond = ConditionFlags::parse(cond_name);
    const Functional func = parse_functional(func_name);

    if (*bound_cmd) {
      const RandomnessBounds rb = bound_point.bounds();
      emit(g, out, dump(to_json(bound(func, cond, rb))));
      return kSuccess;
    }

    if (*attack_cmd) {
      const RandomnessBounds rb = attack_point.bounds();
      const AttackOptions options{attack_method == "numerical" ? AttackMethod::Numerical : AttackMethod::Analytic,
                                  g.seed};
      const LhvEnsemble e = build_attack(cond, rb, options);
      const ValidationReport report = validate_ensemble(e, rb);
      const double target = attack_target(cond, rb);
      const double achieved = ensemble_bell_value(e, Functional::CH);
      const std::string ensemble_text = dump(to_json(e));
      std::ostream& summary_stream = g.out_path.empty() ? err : out;
      if (g.out_path.empty()) {
        out << ensemble_text;
      } else {
        write_file_atomically(g.out_path, ensemble_text);
      }
      if (g.json) {
        summary_stream << Json{{"achieved", achieved},
                               {"closed_form", target},
                               {"valid", report.ok()},
                               {"atoms", e.size()},
                               {"label", e.label()}}
                              .dump()
                       << "\n";
      } else {
        summary_stream << "achieved=" << format_number(achieved) << " closed_form=" << format_number(target)
                       << " valid=" << (report.ok() ? "yes" : "no") << " atoms=" << e.size() << " label=\""
                       << e.label() << "\"\n";
      }
      if (!report.ok()) {
        err << "constructed ensemble failed validation: " << report.summary() << "\n";
        return kComputationError;
      }
      return kSuccess;
    }

    if (*oracle_cmd) {
      const RandomnessBounds rb = oracle_point.bounds();
      const OracleRun run = run_oracle(cond, func, rb, grid_n, all_strategies,
                                       lp_name == "simplex" ? LpMethod::Simplex : LpMethod::BasisEnumeration);
      Json j = to_json(run.result);
      j["closed_form"] = run.closed_form;
      j["gap"] = std::abs(run.result.value - run.closed_form);
      j["condition"] = cond.name();
      j["functional"] = functional_name(func);
      j["P"] = rb.upper();
      j["Q"] = rb.lower();
      emit(g, out, dump(j));
      return kSuccess;
    }

    if (*sweep_cmd) {
      if (sweep_conds.empty()) sweep_conds.push_back("general");
      std::vector<SweepRow> rows;
      auto add_point = [&](ConditionFlags c, double upper, double lower, std::optional<double> delta) {
        SweepRow row;
        const RandomnessBounds rb = delta ? RandomnessBounds::from_delta(*delta) : RandomnessBounds::make(upper, lower);
        const BoundResult b = bound(func, c, rb);
        row.condition = c.name();
        row.upper = rb.upper();
        row.lower = rb.lower();
        row.delta = delta;
        row.closed_form = b.value;
        row.branch = b.branch;
        if (sweep_oracle) {
          row.oracle = run_oracle(c, func, rb, sweep_grid, false, LpMethod::BasisEnumeration).result.value;
          row.gap = std::abs(*row.oracle - b.value);
        }
        rows.push_back(std::move(row));
      };
      std::size_t skipped = 0;
      for (const auto& name : sweep_conds) {
        const ConditionFlags c = ConditionFlags::parse(name);
        if (sweep_mode == "grid") {
          for (double p : parse_range(p_range, "--P-range").values()) {
            for (double q : parse_range(q_range, "--Q-range").values()) {
              if (p < 0.25 || p > 1.0 || q < 0.0 || q > 0.25) {
                ++skipped;
                continue;
              }
              add_point(c, p, q, std::nullopt);
            }
          }
        } else if (sweep_mode == "delta") {
          for (double d : parse_range(delta_range, "--delta-range").values()) {
            if (d < 0.0 || d > 0.25) {
              ++skipped;
              continue;
            }
            add_point(c, 0.0, 0.0, d);
          }
        } else {
          if (func != Functional::CH) throw ValidationError("critical mode traces the CH bound; drop --func chsh");
          for (double q : parse_range(q_range, "--Q-range").values()) {
            if (q < 0.0 || q > 0.25) {
              ++skipped;
              continue;
            }
            const auto p = critical_upper(c, q, sweep_target);
            if (!p) {
              ++skipped;
              continue;
            }
            add_point(c, *p, q, std::nullopt);
          }
        }
      }
      if (skipped > 0) err << "warning: skipped " << skipped << " infeasible grid point(s)\n";
      if (rows.empty()) err << "warning: no feasible grid points; writing header only\n";
      emit(g, out, g.json ? dump(sweep_json(rows)) : sweep_csv(rows, sweep_oracle));
      return kSuccess;
    }

    if (*sim_cmd) {
      SimConfig cfg{sim_trials, g.seed, ensemble_from_json(read_json_file(sim_path))};
      emit(g, out, dump(to_json(simulate(cfg))));
      return kSuccess;
    }

    if (*verify_cmd) {
      const LhvEnsemble e = ensemble_from_json(read_json_file(verify_path));
      const RandomnessBounds rb =
          verify_point.given() ? verify_point.bounds() : RandomnessBounds::make(1.0, 0.0);
      const ValidationReport report = validate_ensemble(e, rb);
      Json j{{"valid", report.ok()}, {"report", to_json(report)}, {"P", rb.upper()}, {"Q", rb.lower()}};
      if (report.ok()) {
        j["ch"] = ensemble_bell_value(e, Functional::CH);
        j["chsh"] = ensemble_bell_value(e, Functional::CHSH);
        if (verify_cond) {
          const ConditionFlags c = ConditionFlags::parse(*verify_cond);
          j["closed_form"] = attack_target(c, rb);
          j["gap"] = std::abs(j["ch"].get<double>() - j["closed_form"].get<double>());
        }
      }
      if (g.json) {
        emit(g, out, dump(j));
      } else {
        std::ostringstream text;
        text << "valid=" << (report.ok() ? "yes" : "no");
        if (report.ok()) {
          text << " ch=" << format_number(j["ch"].get<double>()) << " chsh=" << format_number(j["chsh"].get<double>());
          if (verify_cond) text << " closed_form=" << format_number(j["closed_form"].get<double>());
        }
        text << "\n";
        emit(g, out, text.str());
      }
      if (!report.ok()) {
        err << "ensemble is invalid: " << report.summary() << "\n";
        return kUsageError;
      }
      return kSuccess;
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ComputationError& e) {
    err << "computation failed: " << e.what() << "\n";
    return kComputationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace mdbell::cli
