#include <cctype>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "socnet/config.hpp"
#include "socnet/errors.hpp"
#include "socnet/experiments.hpp"

namespace {

constexpr const char* kUsage = R"(usage: socnet_cli SUBCOMMAND [options]

subcommands:
  qd        change-detector value function and stop/continue policy
  herding   herding regions across a risk-level grid
  cascade   cascade onset epochs over repeated runs
  pricing   posted-price policy and price-drift check
  sis       epidemic tracking traces and deviation table
  degdist   degree-tracker error trace and step-size scaling
  gce       two-color growth, influence trace and network export
  poll      polling method error comparison

options:
  --config PATH   key = value file with [section] blocks
  --seed N        master seed (required here or as `seed` in the config)
  --jobs N        worker threads for trial fan-out (default 1)
  --out DIR       output directory (default .)
  --set K=V       override one config key, repeatable
)";

std::uint64_t parse_seed(const std::string& s) {
  if (s.empty()) throw socnet::ConfigError("seed: empty value");
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw socnet::ConfigError("seed: not a nonnegative integer: " + s);
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw socnet::ConfigError("seed: out of range: " + s);
  }
}

long parse_jobs(const std::string& s) {
  try {
    std::size_t pos = 0;
    long j = std::stol(s, &pos);
    if (pos != s.size() || j < 1) throw socnet::ConfigError("");
    return j;
  } catch (const std::exception&) {
    throw socnet::ConfigError("jobs: not a positive integer: " + s);
  }
}

struct Cli {
  std::string subcommand;
  std::string config_path;
  std::string seed_arg;
  std::string out_dir = ".";
  long jobs = 1;
  std::vector<std::pair<std::string, std::string>> overrides;
};

Cli parse_args(int argc, char** argv) {
  Cli cli;
  std::vector<std::string> args(argv + 1, argv + argc);
  std::size_t i = 0;
  if (i < args.size() && args[i][0] != '-') cli.subcommand = args[i++];
  auto need_value = [&](const std::string& flag) -> std::string {
    if (i + 1 >= args.size())
      throw socnet::ConfigError(flag + ": missing value");
    return args[++i];
  };
  for (; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--config") {
      cli.config_path = need_value(a);
    } else if (a == "--seed") {
      cli.seed_arg = need_value(a);
    } else if (a == "--jobs") {
      cli.jobs = parse_jobs(need_value(a));
    } else if (a == "--out") {
      cli.out_dir = need_value(a);
    } else if (a == "--set") {
      std::string kv = need_value(a);
      std::size_t eq = kv.find('=');
      if (eq == std::string::npos || eq == 0)
        throw socnet::ConfigError("--set: expected K=V, got " + kv);
      cli.overrides.emplace_back(
          socnet::detail::trim(kv.substr(0, eq)),
          socnet::detail::trim(kv.substr(eq + 1)));
    } else {
      throw socnet::ConfigError("unknown option: " + a);
    }
  }
  if (cli.subcommand.empty())
    throw socnet::ConfigError("missing subcommand");
  return cli;
}

}  // namespace

int main(int argc, char** argv) {
  Cli cli;
  socnet::Config cfg;
  std::uint64_t seed = 0;
  try {
    cli = parse_args(argc, argv);
    if (!cli.config_path.empty())
      cfg = socnet::Config::from_file(cli.config_path);
    for (const auto& [k, v] : cli.overrides) cfg.set(k, v);

    std::string seed_text =
        cli.seed_arg.empty() ? cfg.get_string("seed", "") : cli.seed_arg;
    if (seed_text.empty())
      throw socnet::ConfigError(
          "seed is required (--seed or a `seed` config key)");
    seed = parse_seed(seed_text);

    std::filesystem::create_directories(cli.out_dir);
  } catch (const socnet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n\n" << kUsage;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    socnet::RunContext ctx{cfg, seed, cli.jobs, cli.out_dir};
    std::vector<std::string> files =
        socnet::run_experiment(cli.subcommand, ctx);
    for (const std::string& f : files) std::cout << "wrote " << f << "\n";
    return 0;
  } catch (const socnet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
