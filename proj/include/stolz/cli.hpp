#pragma once

#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "stolz/data_sequence.hpp"
#include "stolz/error.hpp"
#include "stolz/estimator.hpp"
#include "stolz/expr.hpp"
#include "stolz/recursion.hpp"
#include "stolz/report.hpp"

namespace stolz::cli {

enum class Command { Limit, Hypotheses, Recursion, Trace };
enum class OutputFormat { Table, Json, Csv };

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitHypothesis = 2;
inline constexpr int kExitCertification = 3;

struct RunConfig {
  Command command = Command::Limit;
  std::optional<std::string> f_spec;
  std::optional<std::string> g_spec;
  std::optional<std::string> a_spec;
  std::optional<std::string> b_spec;
  ParamBindings params;
  Index n_max = 100000;
  double epsilon = 0.01;
  std::optional<double> g1;
  std::optional<OutputFormat> format;  // unset: csv for trace, table otherwise
  std::optional<double> threshold;     // divergence or a_sum threshold
  double tail_window = 0.1;
};

struct RunResult {
  int exit_code = kExitOk;
  std::string output;  // report in the requested format
  Json report;         // null when the run aborted with an error
  std::string error;
};

inline std::string to_string(Command c) {
  switch (c) {
    case Command::Limit: return "limit";
    case Command::Hypotheses: return "hypotheses";
    case Command::Recursion: return "recursion";
    case Command::Trace: return "trace";
  }
  return "unknown";
}

inline std::string to_string(OutputFormat f) {
  switch (f) {
    case OutputFormat::Table: return "table";
    case OutputFormat::Json: return "json";
    case OutputFormat::Csv: return "csv";
  }
  return "unknown";
}

inline OutputFormat resolved_format(const RunConfig& c) {
  return c.format.value_or(c.command == Command::Trace ? OutputFormat::Csv
                                                       : OutputFormat::Table);
}

/// Splits `NAME=VALUE` and binds it.
inline void bind_param(ParamBindings& params, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw InvalidArgument("--param expects NAME=VALUE, got '" + assignment + "'");
  }
  const std::string name = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw InvalidArgument("--param value for '" + name + "' is not a number: '" + text + "'");
  }
  params.bind(name, value);
}

/// Expression text, or a data file when prefixed with '@'.
inline Sequence resolve_sequence(const std::string& spec, const ParamBindings& params) {
  if (!spec.empty() && spec.front() == '@') return load_data_sequence(spec.substr(1));
  return to_sequence(parse(spec), params);
}

inline Json config_json(const RunConfig& c) {
  auto spec = [](const std::optional<std::string>& s) {
    return s ? Json(*s) : Json(nullptr);
  };
  Json params = Json::object();
  for (const auto& [name, value] : c.params.values()) params[name] = value;
  return Json{{"command", to_string(c.command)},
              {"f", spec(c.f_spec)},
              {"g", spec(c.g_spec)},
              {"a", spec(c.a_spec)},
              {"b", spec(c.b_spec)},
              {"params", params},
              {"n_max", c.n_max},
              {"epsilon", c.epsilon},
              {"g1", c.g1 ? Json(*c.g1) : Json(nullptr)},
              {"format", to_string(resolved_format(c))},
              {"threshold", c.threshold ? Json(*c.threshold) : Json(nullptr)},
              {"tail_window", c.tail_window}};
}

inline void validate(const RunConfig& c) {
  const bool ratio_command = c.command == Command::Limit || c.command == Command::Hypotheses;
  auto require = [](bool wanted, const std::optional<std::string>& spec, const char* flag) {
    if (wanted && !spec) throw InvalidArgument(std::string("missing required flag ") + flag);
    if (!wanted && spec) throw InvalidArgument(std::string("flag ") + flag + " is not used by this command");
  };
  require(ratio_command, c.f_spec, "--f");
  require(ratio_command, c.g_spec, "--g");
  require(!ratio_command, c.a_spec, "--a");
  require(!ratio_command, c.b_spec, "--b");
  if (!ratio_command && !c.g1) throw InvalidArgument("missing required flag --g1");
  if (ratio_command && c.g1) throw InvalidArgument("flag --g1 is not used by this command");
  if (c.n_max < kMinPrefix) throw InvalidArgument("--n-max must be at least 10");
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw InvalidArgument("--eps must lie in (0, 1)");
  if (!(c.tail_window > 0.0 && c.tail_window <= 1.0)) {
    throw InvalidArgument("--tail-window must lie in (0, 1]");
  }
  if (c.threshold && !(*c.threshold > 0.0)) throw InvalidArgument("--threshold must be positive");
  if (c.command != Command::Trace && resolved_format(c) == OutputFormat::Csv) {
    throw InvalidArgument("csv output is only available for the trace command");
  }
}

inline Json base_report(const RunConfig& c) {
  return Json{{"command", to_string(c.command)},
              {"config", config_json(c)},
              {"hypotheses", nullptr},
              {"certificate", nullptr},
              {"recursion", nullptr},
              {"disclaimer", kDisclaimer},
              {"version", kVersion}};
}

namespace detail {

inline std::string scalar_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

inline void render_table(const Json& node, int depth, std::ostringstream& out) {
  const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
  for (const auto& [key, value] : node.items()) {
    const bool nested = value.is_object() && !value.empty();
    if (nested) {
      out << indent << key << '\n';
      render_table(value, depth + 1, out);
    } else {
      std::string label = indent + key;
      if (label.size() < 28) label.resize(28, ' ');
      out << label << ' ' << scalar_text(value) << '\n';
    }
  }
}

}  // namespace detail

inline std::string render(const Json& report, OutputFormat format) {
  if (format == OutputFormat::Json) return report.dump(2) + "\n";
  std::ostringstream out;
  detail::render_table(report, 0, out);
  return out.str();
}

inline RunResult finish(Json report, int exit_code, OutputFormat format) {
  RunResult result;
  result.exit_code = exit_code;
  result.output = render(report, format);
  result.report = std::move(report);
  return result;
}

inline RunResult run_limit(const RunConfig& c) {
  validate(c);
  PartialSumSeries f(resolve_sequence(*c.f_spec, c.params));
  PartialSumSeries g(resolve_sequence(*c.g_spec, c.params));

  Json report = base_report(c);
  HypothesisOptions options;
  options.divergence_threshold = c.threshold;
  options.tail_window = c.tail_window;
  const HypothesisReport hypotheses = check_hypotheses(f, g, c.n_max, options);
  report["hypotheses"] = to_json(hypotheses);
  if (!hypotheses.passed() || c.command == Command::Hypotheses) {
    return finish(std::move(report), hypotheses.passed() ? kExitOk : kExitHypothesis,
                  resolved_format(c));
  }

  const auto cert = certify(f, g, hypotheses.ratio_limit.estimate, c.epsilon, c.n_max);
  report["certificate"] = to_json(cert);
  return finish(std::move(report), cert.certified() ? kExitOk : kExitCertification,
                resolved_format(c));
}

inline RunResult run_hypotheses(const RunConfig& c) { return run_limit(c); }

inline RecursionSchedule resolve_schedule(const RunConfig& c) {
  return {resolve_sequence(*c.a_spec, c.params), resolve_sequence(*c.b_spec, c.params),
          *c.g1};
}

inline RunResult run_recursion(const RunConfig& c) {
  validate(c);
  const RecursionSchedule schedule = resolve_schedule(c);
  Json report = base_report(c);

  const auto schedule_report = check_schedule(
      schedule, c.n_max, c.threshold.value_or(kDefaultASumThreshold), c.tail_window);
  Json recursion{{"schedule_report", to_json(schedule_report)},
                 {"trace_summary", nullptr},
                 {"final_ratio_tail_max", nullptr},
                 {"conclusion", nullptr}};
  if (!schedule_report.passed()) {
    recursion["conclusion"] = Json{{"evidence_holds", false},
                                   {"path", "schedule_hypotheses"},
                                   {"summary", "schedule hypotheses failed"}};
    report["recursion"] = std::move(recursion);
    return finish(std::move(report), kExitHypothesis, resolved_format(c));
  }

  const auto trace = envelope_trace(schedule, c.n_max);
  const EnvelopeTrace& last = trace.back();
  recursion["trace_summary"] = Json{{"n", last.n},
                                    {"h_next", last.h_next},
                                    {"J", last.j_term},
                                    {"J_ratio_form", j_term_ratio_form(schedule, c.n_max)},
                                    {"tail_term", last.tail_term},
                                    {"log_prod", last.log_prod},
                                    {"closed_form_bound", closed_form_bound(schedule, c.n_max)}};
  recursion["final_ratio_tail_max"] = final_limit_check(schedule, c.n_max);

  ReductionOptions options;
  options.epsilon = c.epsilon;
  const auto reduction = stolz_reduction(schedule, c.n_max, options);
  int exit_code = kExitOk;
  Json conclusion;
  if (reduction.bounded_numerator) {
    conclusion = Json{{"evidence_holds", true},
                      {"path", "bounded_numerator"},
                      {"examined_n_max", c.n_max},
                      {"summary",
                       "numerator partial sums are bounded and the denominator product "
                       "diverges, so J_n -> 0 and the envelope tends to 0"}};
  } else {
    report["certificate"] = to_json(*reduction.certificate);
    const bool ok = reduction.certificate->certified();
    exit_code = ok ? kExitOk : kExitCertification;
    conclusion = Json{{"evidence_holds", ok},
                      {"path", "ratio_certificate"},
                      {"examined_n_max", reduction.examined_n_max},
                      {"summary", ok ? "ratio certificate with L = 0 holds on the prefix, "
                                       "so J_n -> 0 and the envelope tends to 0"
                                     : "ratio certificate with L = 0 failed on the prefix"}};
  }
  recursion["conclusion"] = std::move(conclusion);
  report["recursion"] = std::move(recursion);
  return finish(std::move(report), exit_code, resolved_format(c));
}

inline std::string trace_csv(const std::vector<EnvelopeTrace>& trace) {
  std::ostringstream out;
  out << "n,h,J,tail_term,log_prod,r\n";
  using stolz::detail::format_number;
  for (const auto& row : trace) {
    out << row.n << ',' << format_number(row.h) << ',' << format_number(row.j_term) << ','
        << format_number(row.tail_term) << ',' << format_number(row.log_prod) << ','
        << (row.r ? format_number(*row.r) : std::string()) << '\n';
  }
  return out.str();
}

inline RunResult run_trace(const RunConfig& c) {
  validate(c);
  const auto trace = envelope_trace(resolve_schedule(c), c.n_max);
  const OutputFormat format = resolved_format(c);
  RunResult result;
  if (format == OutputFormat::Csv) {
    result.output = trace_csv(trace);
    return result;
  }
  Json report = base_report(c);
  Json rows = Json::array();
  for (const auto& row : trace) rows.push_back(to_json(row));
  report["recursion"] = Json{{"trace", std::move(rows)}};
  if (format == OutputFormat::Json) return finish(std::move(report), kExitOk, format);
  result.output = trace_csv(trace);
  result.report = std::move(report);
  return result;
}

/// Runs a command and maps every failure onto the documented exit codes.
inline RunResult run(const RunConfig& c) {
  try {
    switch (c.command) {
      case Command::Limit: return run_limit(c);
      case Command::Hypotheses: return run_hypotheses(c);
      case Command::Recursion: return run_recursion(c);
      case Command::Trace: return run_trace(c);
    }
  } catch (const ScheduleViolation& e) {
    return {kExitHypothesis, {}, nullptr, e.what()};
  } catch (const PositivityError& e) {
    return {kExitHypothesis, {}, nullptr, e.what()};
  } catch (const std::exception& e) {
    return {kExitUsage, {}, nullptr, e.what()};
  }
  return {kExitUsage, {}, nullptr, "unknown command"};
}

}  // namespace stolz::cli
