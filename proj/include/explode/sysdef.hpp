#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "explode/error.hpp"
#include "explode/finite_system.hpp"
#include "explode/scalar.hpp"
#include "explode/shift_system.hpp"
#include "explode/weights.hpp"

namespace explode {

/// Parsed form of a definition file. Scalars stay as strings here so one
/// parse serves both arithmetic modes; the build_* functions below convert.
struct system_definition {
  std::string backend;  // "finite" | "shift"
  std::string mode = "rational";
  std::vector<std::string> mu;   // finite backend
  std::vector<int> map;          // finite backend
  int alphabet = 0;              // shift backend
  std::vector<std::string> p;    // shift backend
  std::string levels_kind;       // "geometric" | "custom"
  std::string ratio;             // geometric levels
  std::vector<std::string> a;    // custom levels
  int cap = 0;
  std::optional<unsigned long long> seed;
};

namespace detail {

inline std::string scalar_field(const nlohmann::json& node, const std::string& where) {
  if (node.is_string()) return node.get<std::string>();
  if (node.is_number_integer()) return std::to_string(node.get<long long>());
  if (node.is_number_float()) {
    // JSON floats are converted through their exact binary value, so dyadic
    // literals like 0.5 stay exact in rational mode.
    return format_scalar(rational_from_double(node.get<double>()));
  }
  fail(errc::parse_error, where + " must be a number or a fraction string");
}

inline std::vector<std::string> scalar_array(const nlohmann::json& node, const std::string& where) {
  require(node.is_array(), errc::parse_error, where + " must be an array");
  std::vector<std::string> out;
  out.reserve(node.size());
  for (std::size_t i = 0; i < node.size(); ++i) {
    out.push_back(scalar_field(node[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

}  // namespace detail

inline system_definition parse_definition(const nlohmann::json& doc) {
  require(doc.is_object(), errc::parse_error, "definition must be a JSON object");
  system_definition def;
  require(doc.contains("backend") && doc["backend"].is_string(), errc::parse_error,
          "missing backend tag");
  def.backend = doc["backend"].get<std::string>();
  require(def.backend == "finite" || def.backend == "shift", errc::parse_error,
          "backend must be \"finite\" or \"shift\", got \"" + def.backend + "\"");
  if (doc.contains("mode")) {
    require(doc["mode"].is_string(), errc::parse_error, "mode must be a string");
    def.mode = doc["mode"].get<std::string>();
    require(def.mode == "rational" || def.mode == "float", errc::unsupported_mode,
            "mode must be \"rational\" or \"float\", got \"" + def.mode + "\"");
  }
  if (def.backend == "finite") {
    require(doc.contains("mu"), errc::parse_error, "finite backend needs a mu array");
    require(doc.contains("map"), errc::parse_error, "finite backend needs a map array");
    def.mu = detail::scalar_array(doc["mu"], "mu");
    require(doc["map"].is_array(), errc::parse_error, "map must be an array");
    for (const auto& entry : doc["map"]) {
      require(entry.is_number_integer(), errc::parse_error, "map entries must be integers");
      def.map.push_back(entry.get<int>());
    }
  } else {
    require(doc.contains("alphabet") && doc["alphabet"].is_number_integer(), errc::parse_error,
            "shift backend needs an integer alphabet size");
    def.alphabet = doc["alphabet"].get<int>();
    require(doc.contains("p"), errc::parse_error, "shift backend needs a p array");
    def.p = detail::scalar_array(doc["p"], "p");
  }
  require(doc.contains("levels") && doc["levels"].is_object(), errc::parse_error,
          "missing levels object");
  const auto& levels = doc["levels"];
  require(levels.contains("kind") && levels["kind"].is_string(), errc::parse_error,
          "levels.kind must be a string");
  def.levels_kind = levels["kind"].get<std::string>();
  require(levels.contains("cap") && levels["cap"].is_number_integer(), errc::parse_error,
          "levels.cap must be an integer");
  def.cap = levels["cap"].get<int>();
  if (def.levels_kind == "geometric") {
    require(levels.contains("ratio"), errc::parse_error, "geometric levels need a ratio");
    def.ratio = detail::scalar_field(levels["ratio"], "levels.ratio");
  } else if (def.levels_kind == "custom") {
    require(levels.contains("a"), errc::parse_error, "custom levels need an a array");
    def.a = detail::scalar_array(levels["a"], "levels.a");
  } else {
    fail(errc::parse_error, "levels.kind must be \"geometric\" or \"custom\", got \"" +
                                def.levels_kind + "\"");
  }
  if (doc.contains("seed")) {
    require(doc["seed"].is_number_unsigned() || doc["seed"].is_number_integer(),
            errc::parse_error, "seed must be an integer");
    def.seed = doc["seed"].get<unsigned long long>();
  }
  return def;
}

inline system_definition load_definition(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), errc::parse_error, "cannot open definition file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(errc::parse_error, std::string("invalid JSON: ") + e.what());
  }
  return parse_definition(doc);
}

template <class S>
S parse_scalar(const std::string& text) {
  return parse_fraction_string<S>(text);
}

template <class S>
std::vector<S> parse_scalars(const std::vector<std::string>& texts) {
  std::vector<S> out;
  out.reserve(texts.size());
  for (const auto& text : texts) out.push_back(parse_scalar<S>(text));
  return out;
}

template <class S>
capped_weights<S> build_weights(const system_definition& def) {
  if (def.levels_kind == "geometric") {
    return capped_weights<S>::geometric(parse_scalar<S>(def.ratio), def.cap);
  }
  return capped_weights<S>::custom(parse_scalars<S>(def.a), def.cap);
}

template <class S>
finite_system<S> build_finite(const system_definition& def) {
  require(def.backend == "finite", errc::unsupported_mode, "definition is not a finite system");
  return finite_system<S>(parse_scalars<S>(def.mu), def.map);
}

template <class S>
bernoulli_shift<S> build_shift(const system_definition& def) {
  require(def.backend == "shift", errc::unsupported_mode, "definition is not a shift system");
  return bernoulli_shift<S>(def.alphabet, parse_scalars<S>(def.p));
}

/// Normalized echo of a validated definition, with every scalar re-parsed
/// and reformatted so output bytes do not depend on input spelling.
template <class S>
nlohmann::json normalized_definition(const system_definition& def) {
  nlohmann::json out;
  out["backend"] = def.backend;
  out["mode"] = def.mode;
  const capped_weights<S> w = build_weights<S>(def);
  if (def.backend == "finite") {
    const finite_system<S> sys = build_finite<S>(def);
    nlohmann::json mu = nlohmann::json::array();
    for (const auto& value : sys.mu()) mu.push_back(format_scalar(value));
    out["mu"] = std::move(mu);
    out["map"] = sys.map_table();
  } else {
    const bernoulli_shift<S> sh = build_shift<S>(def);
    out["alphabet"] = sh.alphabet();
    nlohmann::json p = nlohmann::json::array();
    for (const auto& value : sh.p()) p.push_back(format_scalar(value));
    out["p"] = std::move(p);
  }
  nlohmann::json levels;
  levels["kind"] = def.levels_kind;
  levels["cap"] = w.cap();
  if (def.levels_kind == "geometric") levels["ratio"] = format_scalar(parse_scalar<S>(def.ratio));
  nlohmann::json a = nlohmann::json::array();
  nlohmann::json b = nlohmann::json::array();
  for (int k = 1; k <= w.cap(); ++k) {
    a.push_back(format_scalar(w.level_mass(k)));
    b.push_back(format_scalar(w.reset_prob(k)));
  }
  levels["a"] = std::move(a);
  levels["b"] = std::move(b);
  out["levels"] = std::move(levels);
  if (def.seed) out["seed"] = *def.seed;
  return out;
}

}  // namespace explode
