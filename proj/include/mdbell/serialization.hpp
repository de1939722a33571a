#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "mdbell/bell_core.hpp"
#include "mdbell/closed_form.hpp"
#include "mdbell/lhv_model.hpp"
#include "mdbell/oracle.hpp"
#include "mdbell/simulator.hpp"

namespace mdbell {

using Json = nlohmann::json;

/// {"p": {"a,b,x,y": value, ...}} with all 16 keys.
Json to_json(const JointConditional& dist);
JointConditional joint_from_json(const Json& j);

Json to_json(const TrialCounts& counts);
TrialCounts counts_from_json(const Json& j);

/// {"atoms": [{"q": w, "p": [p00, p01, p10, p11] | {"alpha": a, "beta": b},
///   "s": [a0, a1, b0, b1]}], "label": "..."}; "label" is optional on input.
Json to_json(const LhvEnsemble& e);
LhvEnsemble ensemble_from_json(const Json& j);

Json to_json(const BoundResult& r);
Json to_json(const Certificate& c);
Json to_json(const OracleResult& r);
Json to_json(const SimReport& r);
Json to_json(const ValidationReport& r);

/// Parses a JSON document; SchemaError on malformed text.
Json parse_json(const std::string& text);
Json read_json_file(const std::filesystem::path& path);

/// Writes through a sibling temporary file and a rename, so a failed write
/// never leaves a partial file behind. Throws std::runtime_error on I/O errors.
void write_file_atomically(const std::filesystem::path& path, const std::string& content);

}  // namespace mdbell
