#include "mdbell/serialization.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include "mdbell/errors.hpp"

namespace mdbell {

namespace {

std::string joint_key(int a, int b, int x, int y) {
  return std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(x) + "," + std::to_string(y);
}

const Json& member(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(path + "." + key + ": missing");
  return *it;
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path + ": expected a number");
  return j.get<double>();
}

std::uint64_t count(const Json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    throw SchemaError(path + ": expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

std::array<std::uint64_t, 4> count_array(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 4) throw SchemaError(path + ": expected an array of 4 counts");
  std::array<std::uint64_t, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) out[i] = count(j[i], path + "[" + std::to_string(i) + "]");
  return out;
}

LhvAtom atom_from_json(const Json& j, const std::string& path) {
  LhvAtom atom;
  atom.weight = number(member(j, "q", path), path + ".q");
  const Json& p = member(j, "p", path);
  try {
    if (p.is_array()) {
      if (p.size() != 4) throw SchemaError(path + ".p: expected 4 entries");
      std::array<double, 4> v{};
      for (std::size_t i = 0; i < 4; ++i) v[i] = number(p[i], path + ".p[" + std::to_string(i) + "]");
      atom.inputs = InputConditional(v);
    } else if (p.is_object()) {
      FactorizedInputConditional f{number(member(p, "alpha", path + ".p"), path + ".p.alpha"),
                                   number(member(p, "beta", path + ".p"), path + ".p.beta")};
      f.validate();
      atom.inputs = f;
    } else {
      throw SchemaError(path + ".p: expected an array or an {alpha, beta} object");
    }
  } catch (const SchemaError&) {
    throw;
  } catch (const ValidationError& e) {
    throw SchemaError(path + ".p: " + e.what());
  }
  const Json& s = member(j, "s", path);
  if (!s.is_array() || s.size() != 4) throw SchemaError(path + ".s: expected 4 bits");
  std::array<bool, 4> bits{};
  for (std::size_t i = 0; i < 4; ++i) {
    const Json& b = s[i];
    const std::string bit_path = path + ".s[" + std::to_string(i) + "]";
    if (b.is_boolean()) {
      bits[i] = b.get<bool>();
    } else if (b.is_number_integer() && (b.get<std::int64_t>() == 0 || b.get<std::int64_t>() == 1)) {
      bits[i] = b.get<std::int64_t>() == 1;
    } else {
      throw SchemaError(bit_path + ": expected 0 or 1");
    }
  }
  atom.outputs = {bits[0], bits[1], bits[2], bits[3]};
  return atom;
}

}  // namespace

Json to_json(const JointConditional& dist) {
  Json p = Json::object();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) p[joint_key(a, b, x, y)] = dist(a, b, x, y);
  return Json{{"p", p}};
}

JointConditional joint_from_json(const Json& j) {
  const Json& p = member(j, "p", "$");
  if (!p.is_object()) throw SchemaError("$.p: expected an object");
  if (p.size() != 16) throw SchemaError("$.p: expected 16 entries");
  JointConditional::Table t{};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
          const std::string key = joint_key(a, b, x, y);
          t[JointConditional::index(a, b, x, y)] = number(member(p, key, "$.p"), "$.p." + key);
        }
  try {
    return JointConditional(t);
  } catch (const ValidationError& e) {
    throw SchemaError(std::string("$.p: ") + e.what());
  }
}

Json to_json(const TrialCounts& c) {
  return Json{{"n_total", c.n_total},         {"n_setting", c.n_setting}, {"coincidences", c.coincidences},
              {"singles_a", c.singles_a},     {"singles_b", c.singles_b}, {"n_a0", c.n_a0},
              {"n_b0", c.n_b0}};
}

TrialCounts counts_from_json(const Json& j) {
  TrialCounts c;
  c.n_total = count(member(j, "n_total", "$"), "$.n_total");
  c.n_setting = count_array(member(j, "n_setting", "$"), "$.n_setting");
  c.coincidences = count_array(member(j, "coincidences", "$"), "$.coincidences");
  c.singles_a = count(member(j, "singles_a", "$"), "$.singles_a");
  c.singles_b = count(member(j, "singles_b", "$"), "$.singles_b");
  c.n_a0 = count(member(j, "n_a0", "$"), "$.n_a0");
  c.n_b0 = count(member(j, "n_b0", "$"), "$.n_b0");
  try {
    c.validate();
  } catch (const ValidationError& e) {
    throw SchemaError(std::string("$: ") + e.what());
  }
  return c;
}

Json to_json(const LhvEnsemble& e) {
  Json atoms = Json::array();
  for (const auto& atom : e.atoms()) {
    Json a;
    a["q"] = atom.weight;
    if (const auto* f = std::get_if<FactorizedInputConditional>(&atom.inputs)) {
      a["p"] = Json{{"alpha", f->alpha}, {"beta", f->beta}};
    } else {
      a["p"] = std::get<InputConditional>(atom.inputs).values();
    }
    const auto& s = atom.outputs;
    a["s"] = {int{s.a0}, int{s.a1}, int{s.b0}, int{s.b1}};
    atoms.push_back(std::move(a));
  }
  Json out{{"atoms", atoms}};
  if (!e.label().empty()) out["label"] = e.label();
  return out;
}

LhvEnsemble ensemble_from_json(const Json& j) {
  const Json& atoms = member(j, "atoms", "$");
  if (!atoms.is_array()) throw SchemaError("$.atoms: expected an array");
  if (atoms.empty()) throw SchemaError("$.atoms: expected at least one atom");
  std::vector<LhvAtom> out;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    out.push_back(atom_from_json(atoms[i], "$.atoms[" + std::to_string(i) + "]"));
  }
  std::string label;
  if (auto it = j.find("label"); it != j.end()) {
    if (!it->is_string()) throw SchemaError("$.label: expected a string");
    label = it->get<std::string>();
  }
  return LhvEnsemble(std::move(out), std::move(label));
}

Json to_json(const BoundResult& r) {
  return Json{{"value", r.value},
              {"branch", r.branch},
              {"P", r.bounds.upper()},
              {"Q", r.bounds.lower()},
              {"condition", r.condition.name()},
              {"functional", r.functional == Functional::CH ? "ch" : "chsh"}};
}

Json to_json(const Certificate& c) {
  if (c.kind == Certificate::Kind::Exact) return Json{{"kind", "exact"}, {"error_bound", 0.0}};
  return Json{{"kind", "grid"}, {"resolution", c.resolution}, {"error_bound", c.error_bound}};
}

Json to_json(const OracleResult& r) {
  return Json{{"value", r.value}, {"certificate", to_json(r.certificate)}, {"witness", to_json(r.witness)}};
}

Json to_json(const SimReport& r) {
  return Json{{"counts", to_json(r.counts)},
              {"j_estimate", r.j_estimate},
              {"std_error", r.std_error},
              {"j_exact", r.j_exact},
              {"generator", r.generator},
              {"config", {{"n_trials", r.n_trials}, {"seed", r.seed}}}};
}

Json to_json(const ValidationReport& r) {
  Json violations = Json::array();
  for (const auto& v : r.violations) {
    Json item{{"kind", to_string(v.kind)}, {"magnitude", v.magnitude}, {"message", v.describe()}};
    if (v.atom) item["atom"] = *v.atom;
    if (v.setting) item["setting"] = *v.setting;
    violations.push_back(std::move(item));
  }
  return Json{{"ok", r.ok()}, {"violations", violations}};
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError(std::string("$: malformed JSON: ") + e.what());
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_json(text.str());
}

void write_file_atomically(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw std::runtime_error("cannot write " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cannot write " + path.string());
  }
}

}  // namespace mdbell
