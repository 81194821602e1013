#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stolz/cli.hpp"

namespace {

void add_common_flags(CLI::App* sub, stolz::cli::RunConfig& config,
                      std::vector<std::string>& params, std::string& format) {
  sub->add_option("--n-max", config.n_max, "prefix length to examine")->capture_default_str();
  sub->add_option("--eps", config.epsilon, "certificate epsilon in (0, 1)")->capture_default_str();
  sub->add_option("--param", params, "NAME=VALUE parameter binding (repeatable)");
  sub->add_option("--format", format, "table | json | csv")
      ->check(CLI::IsMember({"table", "json", "csv"}));
  sub->add_option("--threshold", config.threshold,
                  "divergence threshold (limit, hypotheses) or sum-of-a threshold (recursion)");
  sub->add_option("--tail-window", config.tail_window, "tail fraction for oscillation and maxima")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  using stolz::cli::Command;
  using stolz::cli::OutputFormat;

  CLI::App app{"Discrete L'Hospital (Stolz-Cesaro) limit estimation and recursion analysis"};
  app.set_version_flag("--version", stolz::kVersion);
  app.require_subcommand(1);

  stolz::cli::RunConfig config;
  std::vector<std::string> params;
  std::string format;
  std::string f_spec, g_spec, a_spec, b_spec;
  double g1 = 0.0;

  auto* limit = app.add_subcommand("limit", "estimate and certify lim F_n / G_n");
  auto* hypotheses = app.add_subcommand("hypotheses", "check positivity, divergence and ratio limit");
  auto* recursion = app.add_subcommand("recursion", "analyze g_{n+1} <= (1 - a_n) g_n + b_n");
  auto* trace = app.add_subcommand("trace", "export the envelope trace");

  for (auto* sub : {limit, hypotheses}) {
    sub->add_option("--f", f_spec, "numerator terms: expression or @file.csv")->required();
    sub->add_option("--g", g_spec, "denominator terms: expression or @file.csv")->required();
    add_common_flags(sub, config, params, format);
  }
  for (auto* sub : {recursion, trace}) {
    sub->add_option("--a", a_spec, "step sizes a_n: expression or @file.csv")->required();
    sub->add_option("--b", b_spec, "perturbations b_n: expression or @file.csv")->required();
    sub->add_option("--g1", g1, "initial value g_1")->required();
    add_common_flags(sub, config, params, format);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return stolz::cli::kExitUsage;
  }

  if (limit->parsed()) config.command = Command::Limit;
  if (hypotheses->parsed()) config.command = Command::Hypotheses;
  if (recursion->parsed()) config.command = Command::Recursion;
  if (trace->parsed()) config.command = Command::Trace;

  if (config.command == Command::Limit || config.command == Command::Hypotheses) {
    config.f_spec = f_spec;
    config.g_spec = g_spec;
  } else {
    config.a_spec = a_spec;
    config.b_spec = b_spec;
    config.g1 = g1;
  }
  if (format == "table") config.format = OutputFormat::Table;
  if (format == "json") config.format = OutputFormat::Json;
  if (format == "csv") config.format = OutputFormat::Csv;

  try {
    for (const auto& p : params) stolz::cli::bind_param(config.params, p);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return stolz::cli::kExitUsage;
  }

  const auto result = stolz::cli::run(config);
  if (!result.error.empty()) std::cerr << "error: " << result.error << '\n';
  std::cout << result.output;
  return result.exit_code;
}
