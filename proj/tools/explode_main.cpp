#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "explode/explode.hpp"

namespace {

struct cli_options {
  std::string command;
  std::string path;
  std::string out;
  std::string mode;    // empty = take the definition file's mode
  std::string format;  // empty = command default
  std::string observable = "const:1";
  std::string start;
  std::string word = "1";
  int i_max = 6;
  int n_max = 6;
  int horizon = 8;
  int steps = 10000;
  unsigned long long seed = 0;
  bool seed_given = false;
};

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(out_path, std::ios::binary);
  explode::require(file.good(), explode::errc::parse_error,
                   "cannot open output file: " + out_path);
  file << text;
}

void emit_json(const nlohmann::json& doc, const std::string& out_path) {
  emit(doc.dump(2) + "\n", out_path);
}

int fail_with_json(const explode::error& e) {
  nlohmann::json doc{{"error", {{"code", std::string(explode::errc_name(e.code()))},
                                {"message", e.what()}}}};
  std::cerr << doc.dump() << "\n";
  return 2;
}

std::vector<int> parse_word(const std::string& text) {
  explode::require(!text.empty(), explode::errc::parse_error, "cylinder word must be nonempty");
  std::vector<int> word;
  for (char c : text) {
    explode::require(c >= '0' && c <= '9', explode::errc::parse_error,
                     "cylinder word must be a string of digits, got '" + text + "'");
    word.push_back(c - '0');
  }
  return word;
}

template <class S>
explode::finite_levels<S> parse_observable(const explode::finite_operator<S>& op,
                                           const std::string& text) {
  const int n = op.system().size();
  const int K = op.cap();
  const auto colon = text.find(':');
  explode::require(colon != std::string::npos, explode::errc::parse_error,
                   "observable must look like points:..., level:... or const:..., got '" + text +
                       "'");
  const std::string kind = text.substr(0, colon);
  const std::string body = text.substr(colon + 1);
  explode::finite_levels<S> f(static_cast<std::size_t>(K),
                              std::vector<S>(static_cast<std::size_t>(n), S(0)));
  if (kind == "points") {
    std::size_t pos = 0;
    while (pos < body.size()) {
      const auto comma = body.find(',', pos);
      const std::string token = body.substr(pos, comma == std::string::npos ? comma : comma - pos);
      std::size_t used = 0;
      int x = -1;
      try {
        x = std::stoi(token, &used);
      } catch (const std::exception&) {
        explode::fail(explode::errc::parse_error, "bad point index '" + token + "'");
      }
      explode::require(used == token.size() && x >= 0 && x < n, explode::errc::parse_error,
                       "point index '" + token + "' outside 0.." + std::to_string(n - 1));
      for (int k = 0; k < K; ++k) f[static_cast<std::size_t>(k)][static_cast<std::size_t>(x)] = S(1);
      pos = comma == std::string::npos ? body.size() : comma + 1;
    }
    return f;
  }
  if (kind == "level") {
    int k = -1;
    try {
      k = std::stoi(body);
    } catch (const std::exception&) {
      explode::fail(explode::errc::parse_error, "bad level '" + body + "'");
    }
    explode::require(k >= 1 && k <= K, explode::errc::parse_error,
                     "level " + body + " outside 1.." + std::to_string(K));
    f[static_cast<std::size_t>(k - 1)].assign(static_cast<std::size_t>(n), S(1));
    return f;
  }
  if (kind == "const") {
    const S value = explode::parse_fraction_string<S>(body);
    for (auto& component : f) component.assign(static_cast<std::size_t>(n), value);
    return f;
  }
  explode::fail(explode::errc::parse_error, "unknown observable kind '" + kind + "'");
}

std::optional<explode::state> parse_start(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto comma = text.find(',');
  explode::require(comma != std::string::npos, explode::errc::parse_error,
                   "start must look like x,k, got '" + text + "'");
  try {
    return explode::state{std::stoi(text.substr(0, comma)), std::stoi(text.substr(comma + 1))};
  } catch (const std::exception&) {
    explode::fail(explode::errc::parse_error, "start must look like x,k, got '" + text + "'");
  }
}

template <class S>
int run_command(const cli_options& opt, const explode::system_definition& def) {
  using namespace explode;
  const capped_weights<S> weights = build_weights<S>(def);
  const unsigned long long seed = opt.seed_given ? opt.seed : def.seed.value_or(1);

  if (opt.command == "validate") {
    if (def.backend == "finite") {
      build_finite<S>(def);
    } else {
      build_shift<S>(def);
    }
    emit_json(normalized_definition<S>(def), opt.out);
    return 0;
  }

  if (opt.command == "kernel") {
    require(def.backend == "finite", errc::unsupported_mode,
            "kernel export needs the finite backend");
    const finite_operator<S> op(build_finite<S>(def), weights);
    if (opt.format == "json") {
      nlohmann::json rows = nlohmann::json::array();
      for (int index = 0; index < op.state_count(); ++index) {
        const state from = op.state_of(index);
        nlohmann::json targets = nlohmann::json::array();
        for (const auto& target : op.kernel_row(from)) {
          targets.push_back(nlohmann::json{{"x", target.x},
                                           {"k", target.level},
                                           {"prob", scalar_json(target.prob)}});
        }
        rows.push_back(nlohmann::json{{"from", {{"x", from.x}, {"k", from.level}}},
                                      {"targets", std::move(targets)}});
      }
      emit_json(nlohmann::json{{"states", op.state_count()}, {"rows", std::move(rows)}}, opt.out);
    } else {
      emit(kernel_csv(op), opt.out);
    }
    return 0;
  }

  if (opt.command == "check") {
    nlohmann::json doc;
    bool pass = false;
    if (def.backend == "finite") {
      const finite_operator<S> op(build_finite<S>(def), weights);
      const ds_report ds = check_doubly_stochastic(op);
      const ergodicity_report erg = compute_ergodicity(op);
      pass = ds.pass() && erg.agree();
      doc = nlohmann::json{{"doubly_stochastic", to_json(ds)},
                           {"ergodicity", to_json(erg)},
                           {"pass", pass}};
    } else {
      const shift_operator<S> op(build_shift<S>(def), weights);
      const ds_report ds = check_doubly_stochastic(op, static_cast<unsigned>(seed));
      pass = ds.pass();
      doc = nlohmann::json{{"doubly_stochastic", to_json(ds)}, {"pass", pass}};
    }
    emit_json(doc, opt.out);
    return pass ? 0 : 1;
  }

  if (opt.command == "factors") {
    if (def.backend == "finite") {
      emit_json(to_json(pointwise_factor_report(build_finite<S>(def))), opt.out);
      return 0;
    }
    const bernoulli_shift<S> sh = build_shift<S>(def);
    const auto indicator =
        cylinder_function<S>::cylinder_indicator(sh.alphabet(), parse_word(opt.word));
    const shift_factor_report report = pointwise_factor_report(sh, indicator);
    emit_json(to_json(report), opt.out);
    return report.separated ? 0 : 1;
  }

  if (opt.command == "lemma") {
    require(def.backend == "shift", errc::unsupported_mode,
            "the transport-error table needs the shift backend");
    const shift_operator<S> op(build_shift<S>(def), weights);
    const auto rows = lemma_bound_table(op, parse_word(opt.word), opt.i_max, opt.n_max);
    bool all_nonnegative = true;
    S min_margin = rows.front().margin;
    for (const auto& row : rows) {
      if (row.margin < S(0)) all_nonnegative = false;
      if (row.margin < min_margin) min_margin = row.margin;
    }
    const nlohmann::json summary{{"rows", static_cast<int>(rows.size())},
                                 {"all_margins_nonnegative", all_nonnegative},
                                 {"min_margin", scalar_json(min_margin)}};
    if (!opt.out.empty()) {
      emit(lemma_csv(rows), opt.out);
      emit_json(summary, "");
    } else if (opt.format == "json") {
      emit_json(nlohmann::json{{"rows", to_json(rows)}, {"summary", summary}}, "");
    } else {
      emit(lemma_csv(rows), "");
    }
    return all_nonnegative ? 0 : 1;
  }

  if (opt.command == "entropy") {
    std::vector<double> values;
    if (def.backend == "finite") {
      const finite_system<S> sys = build_finite<S>(def);
      std::vector<std::vector<int>> points;
      for (int x = 0; x < sys.size(); ++x) points.push_back({x});
      values = ks_entropy_report(sys, points, opt.horizon);
    } else {
      const shift_operator<S> op(build_shift<S>(def), weights);
      values = ks_entropy_report(op, opt.horizon);
    }
    if (opt.format == "csv") {
      std::string csv = "n,value\n";
      for (std::size_t i = 0; i < values.size(); ++i) {
        csv += std::to_string(i + 1) + "," + format_scalar(values[i]) + "\n";
      }
      emit(csv, opt.out);
    } else {
      emit_json(nlohmann::json{{"entropy_per_step", values},
                               {"r_summability", to_json(r_summability(weights))}},
                opt.out);
    }
    return 0;
  }

  if (opt.command == "simulate") {
    require(def.backend == "finite", errc::unsupported_mode,
            "trajectory statistics need the finite backend");
    const finite_operator<S> op(build_finite<S>(def), weights);
    const finite_levels<S> f = parse_observable(op, opt.observable);
    const birkhoff_report report =
        stationarity_and_birkhoff(op, f, opt.steps, seed, parse_start(opt.start));
    nlohmann::json doc = to_json(report);
    doc["steps"] = opt.steps;
    doc["seed"] = seed;
    doc["observable"] = opt.observable;
    if (!opt.out.empty()) {
      emit(occupancy_csv(op, report), opt.out);
      emit_json(doc, "");
    } else if (opt.format == "csv") {
      emit(occupancy_csv(op, report), "");
    } else {
      emit_json(doc, "");
    }
    return 0;
  }

  fail(explode::errc::parse_error, "unknown command '" + opt.command + "'");
}

}  // namespace

int main(int argc, char** argv) {
  cli_options opt;
  CLI::App app{"exploding doubly stochastic operators over finite and shift systems"};
  app.require_subcommand(1);

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("file", opt.path, "system definition JSON")->required();
    sub->add_option("--out", opt.out, "write the primary artifact to this path");
    sub->add_option("--mode", opt.mode, "arithmetic mode")
        ->check(CLI::IsMember({"rational", "float"}));
    sub->add_option("--format", opt.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--seed", opt.seed, "RNG seed")->each([&](const std::string&) {
      opt.seed_given = true;
    });
  };

  add_common(app.add_subcommand("validate", "parse and echo a normalized definition"));
  add_common(app.add_subcommand("kernel", "export the finite-backend kernel"));
  add_common(app.add_subcommand("check", "run the Markov-axiom and ergodicity checks"));
  CLI::App* factors = app.add_subcommand("factors", "pointwise-factor report");
  add_common(factors);
  factors->add_option("--word", opt.word, "cylinder word for the shift witness");
  CLI::App* lemma = app.add_subcommand("lemma", "transport-error table with tail bounds");
  add_common(lemma);
  lemma->add_option("--word", opt.word, "cylinder word");
  lemma->add_option("--imax", opt.i_max, "largest offset i")->check(CLI::PositiveNumber);
  lemma->add_option("--nmax", opt.n_max, "largest iterate n")->check(CLI::PositiveNumber);
  CLI::App* entropy = app.add_subcommand("entropy", "KS entropy sequence and tail summability");
  add_common(entropy);
  entropy->add_option("--horizon", opt.horizon, "number of join levels")
      ->check(CLI::PositiveNumber);
  CLI::App* simulate = app.add_subcommand("simulate", "sample a trajectory and compare to nu");
  add_common(simulate);
  simulate->add_option("--steps", opt.steps, "transition count")->check(CLI::PositiveNumber);
  simulate->add_option("--observable", opt.observable,
                       "points:i,j | level:k | const:value");
  simulate->add_option("--start", opt.start, "start state as x,k (default: nu-random)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    nlohmann::json doc{{"error", {{"code", "bad_arguments"}, {"message", e.what()}}}};
    std::cerr << doc.dump() << "\n";
    return 2;
  }
  opt.command = app.get_subcommands().front()->get_name();

  try {
    const explode::system_definition def = explode::load_definition(opt.path);
    const std::string mode = opt.mode.empty() ? def.mode : opt.mode;
    if (mode == "float") return run_command<double>(opt, def);
    return run_command<explode::rational>(opt, def);
  } catch (const explode::error& e) {
    return fail_with_json(e);
  } catch (const std::exception& e) {
    nlohmann::json doc{{"error", {{"code", "internal"}, {"message", e.what()}}}};
    std::cerr << doc.dump() << "\n";
    return 2;
  }
}
