#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fptx/error.hpp"
#include "fptx/harness.hpp"

namespace fptx {

ExperimentSpec parse_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw PreconditionError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw PreconditionError("config: top level must be an object");
  static const std::set<std::string> known = {"experiment", "seed",   "reps",       "precisions",
                                              "variant",    "d",      "n",          "D",
                                              "layers",     "depths", "grid",       "placements",
                                              "softmax",    "threads", "bounds"};
  for (const auto& [k, _] : j.items())
    if (!known.count(k)) throw PreconditionError("config: unknown key '" + k + "'");
  if (!j.contains("experiment")) throw PreconditionError("config: 'experiment' is required");

  try {
    ExperimentSpec s = ExperimentSpec::defaults(parse_experiment(j.at("experiment").get<std::string>()));
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("reps")) s.reps = j["reps"].get<int>();
    if (j.contains("precisions")) {
      s.precisions.clear();
      for (const auto& p : j["precisions"]) s.precisions.push_back(PrecisionSpec::parse(p.get<std::string>()));
    }
    if (j.contains("variant")) s.variant = parse_variant(j["variant"].get<std::string>());
    if (j.contains("d")) s.d = j["d"].get<std::size_t>();
    if (j.contains("n")) s.n = j["n"].get<std::size_t>();
    if (j.contains("D")) s.D = j["D"].get<std::size_t>();
    if (j.contains("layers")) s.layers = j["layers"].get<std::size_t>();
    if (j.contains("depths")) s.depths = j["depths"].get<std::vector<std::size_t>>();
    if (j.contains("grid")) s.grid = j["grid"].get<std::vector<double>>();
    if (j.contains("placements")) {
      s.placements.clear();
      for (const auto& p : j["placements"]) s.placements.push_back(parse_placement(p.get<std::string>()));
    }
    if (j.contains("softmax")) s.softmax = parse_softmax_mode(j["softmax"].get<std::string>());
    if (j.contains("threads")) s.threads = j["threads"].get<int>();
    if (j.contains("bounds")) s.bounds = j["bounds"].get<bool>();
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("config: ") + e.what());
  }
}

ExperimentSpec load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace fptx
