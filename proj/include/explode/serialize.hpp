#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "explode/analysis.hpp"
#include "explode/operator.hpp"
#include "explode/scalar.hpp"

namespace explode {

/// Rationals serialize as "p/q" strings; doubles as JSON numbers.
inline nlohmann::json scalar_json(const rational& value) { return format_scalar(value); }
inline nlohmann::json scalar_json(double value) { return value; }

template <class S>
nlohmann::json scalar_array_json(const std::vector<S>& values) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& value : values) out.push_back(scalar_json(value));
  return out;
}

inline nlohmann::json to_json(const ds_report& report) {
  return nlohmann::json{{"positivity", report.positivity},
                        {"unit", report.unit},
                        {"nu_preservation", report.nu_preservation},
                        {"pass", report.pass()},
                        {"witness", report.witness}};
}

inline nlohmann::json to_json(const ergodicity_report& report) {
  return nlohmann::json{{"eig_multiplicity", report.eig_multiplicity},
                        {"scc_irreducible", report.scc_irreducible},
                        {"sum_positivity", report.sum_positivity},
                        {"map_ergodic", report.map_ergodic},
                        {"cycles", report.cycles},
                        {"agree", report.agree()}};
}

inline nlohmann::json to_json(const finite_factor_report& report) {
  return nlohmann::json{{"backend", "finite"},
                        {"trivial_quotient", report.trivial_quotient},
                        {"classes", report.classes},
                        {"witness_class", report.witness_class}};
}

inline nlohmann::json to_json(const shift_factor_report& report) {
  return nlohmann::json{{"backend", "shift"},
                        {"trivial_quotient", report.trivial_quotient},
                        {"inside", report.inside},
                        {"outside", report.outside},
                        {"separated", report.separated}};
}

template <class S>
nlohmann::json to_json(const lemma_row<S>& row) {
  return nlohmann::json{{"i", row.i},
                        {"n", row.n},
                        {"lhs", scalar_json(row.lhs)},
                        {"bound", scalar_json(row.bound)},
                        {"margin", scalar_json(row.margin)}};
}

template <class S>
nlohmann::json to_json(const std::vector<lemma_row<S>>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : rows) out.push_back(to_json(row));
  return out;
}

template <class S>
nlohmann::json to_json(const r_summability_report<S>& report) {
  nlohmann::json out{{"r", scalar_array_json(report.r)},
                     {"total", scalar_json(report.total)}};
  if (report.geometric_reference) {
    out["geometric_reference"] = scalar_array_json(*report.geometric_reference);
    out["matches_reference_below_cap"] = report.matches_reference_below_cap;
  }
  return out;
}

inline nlohmann::json to_json(const birkhoff_report& report) {
  return nlohmann::json{{"tv_distance", report.tv_distance},
                        {"birkhoff_average", report.birkhoff_average},
                        {"nu_integral", report.nu_integral}};
}

template <class S>
nlohmann::json to_json(const definition_example_report<S>& report) {
  nlohmann::json out{{"example_equals_reindexed", report.example_equals_reindexed},
                     {"definition_equals_example", report.definition_equals_example}};
  if (!report.definition_equals_example) {
    out["witness_word"] = report.witness_word;
    out["definition_value"] = scalar_json(report.definition_value);
    out["example_value"] = scalar_json(report.example_value);
  }
  return out;
}

/// Finite level functions export as arrays of per-level value arrays; shift
/// level functions as per-level {depth, table} objects.
template <class S>
nlohmann::json to_json(const finite_levels<S>& f) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& component : f) out.push_back(scalar_array_json(component));
  return out;
}

template <class S>
nlohmann::json to_json(const shift_levels<S>& f) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& component : f) {
    out.push_back(nlohmann::json{{"depth", component.depth()},
                                 {"table", scalar_array_json(component.table())}});
  }
  return out;
}

/// Sparse kernel CSV, rows in source-state order, targets in state order.
template <class S>
std::string kernel_csv(const finite_operator<S>& op) {
  std::string out = "from_x,from_k,to_x,to_k,prob\n";
  for (int index = 0; index < op.state_count(); ++index) {
    const state from = op.state_of(index);
    for (const auto& target : op.kernel_row(from)) {
      out += std::to_string(from.x) + "," + std::to_string(from.level) + "," +
             std::to_string(target.x) + "," + std::to_string(target.level) + "," +
             format_scalar(target.prob) + "\n";
    }
  }
  return out;
}

template <class S>
std::string lemma_csv(const std::vector<lemma_row<S>>& rows) {
  std::string out = "i,n,lhs,bound,margin\n";
  for (const auto& row : rows) {
    out += std::to_string(row.i) + "," + std::to_string(row.n) + "," + format_scalar(row.lhs) +
           "," + format_scalar(row.bound) + "," + format_scalar(row.margin) + "\n";
  }
  return out;
}

/// Empirical occupancy CSV for simulate: one row per state.
template <class S>
std::string occupancy_csv(const finite_operator<S>& op, const birkhoff_report& report) {
  std::string out = "x,k,nu,empirical\n";
  const std::vector<S> nu = op.nu_flat();
  for (int index = 0; index < op.state_count(); ++index) {
    const state s = op.state_of(index);
    out += std::to_string(s.x) + "," + std::to_string(s.level) + "," +
           format_scalar(nu[static_cast<std::size_t>(index)]) + "," +
           format_scalar(report.occupancy[static_cast<std::size_t>(index)]) + "\n";
  }
  return out;
}

}  // namespace explode
