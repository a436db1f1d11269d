#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace explode {

/// Error categories raised by validation and by misuse of module contracts.
/// Each rejected input names one of these, so callers (and the CLI) can map
/// failures to stable machine-readable codes.
enum class errc {
  bad_ratio,
  bad_cap,
  weights_not_decreasing,
  weights_not_positive,
  weights_sum_not_one,
  index_out_of_range,
  map_out_of_range,
  map_not_injective,
  measure_not_positive,
  measure_sum_not_one,
  measure_not_preserved,
  length_mismatch,
  cap_mismatch,
  bad_alphabet,
  bad_letter,
  bad_partition,
  bad_table,
  unsupported_mode,
  depth_budget_exceeded,
  invalid_start,
  indicator_not_binary,
  indicator_constant,
  set_not_invariant,
  set_trivial,
  parse_error,
};

constexpr std::string_view errc_name(errc c) {
  switch (c) {
    case errc::bad_ratio: return "bad_ratio";
    case errc::bad_cap: return "bad_cap";
    case errc::weights_not_decreasing: return "weights_not_decreasing";
    case errc::weights_not_positive: return "weights_not_positive";
    case errc::weights_sum_not_one: return "weights_sum_not_one";
    case errc::index_out_of_range: return "index_out_of_range";
    case errc::map_out_of_range: return "map_out_of_range";
    case errc::map_not_injective: return "map_not_injective";
    case errc::measure_not_positive: return "measure_not_positive";
    case errc::measure_sum_not_one: return "measure_sum_not_one";
    case errc::measure_not_preserved: return "measure_not_preserved";
    case errc::length_mismatch: return "length_mismatch";
    case errc::cap_mismatch: return "cap_mismatch";
    case errc::bad_alphabet: return "bad_alphabet";
    case errc::bad_letter: return "bad_letter";
    case errc::bad_partition: return "bad_partition";
    case errc::bad_table: return "bad_table";
    case errc::unsupported_mode: return "unsupported_mode";
    case errc::depth_budget_exceeded: return "depth_budget_exceeded";
    case errc::invalid_start: return "invalid_start";
    case errc::indicator_not_binary: return "indicator_not_binary";
    case errc::indicator_constant: return "indicator_constant";
    case errc::set_not_invariant: return "set_not_invariant";
    case errc::set_trivial: return "set_trivial";
    case errc::parse_error: return "parse_error";
  }
  return "unknown";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
  throw error(code, message);
}

inline void require(bool cond, errc code, const std::string& message) {
  if (!cond) fail(code, message);
}

}  // namespace explode
