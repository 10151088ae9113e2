#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fasa/campaign.hpp"
#include "fasa/csv.hpp"
#include "fasa/validation.hpp"

namespace {

using nlohmann::json;
using namespace fasa::experiments;

constexpr int kExitUsage = 2;
constexpr int kExitFailed = 1;

struct CampaignFlags {
  std::string config;
  std::string out;
  unsigned workers = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::vector<std::string> schemes;
};

void add_campaign_flags(CLI::App* cmd, CampaignFlags& f) {
  cmd->add_option("--config", f.config, "JSON campaign document")->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output directory (default: output_path or out/<name>)");
  cmd->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "override base_seed");
  cmd->add_option("--trials", f.trials, "override trials")->check(CLI::PositiveNumber);
  cmd->add_option("--scheme", f.schemes, "scheme string; repeat to replace the config list");
}

const std::vector<std::string> kDefaultDriftSchemes = {
    "fasa:eta=1,nu=1", "fasa:eta=1,nu=2", "fasa:eta=1,nu=3", "fasa:eta=0.5,nu=2",
    "fasa:eta=2,nu=2", "pb"};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError(path + ": cannot read");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_campaign_command(CampaignKind kind, const CampaignFlags& f) {
  json doc = json::object();
  if (!f.config.empty()) {
    const std::string text = read_file(f.config);
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("$: syntax error: ") + e.what());
    }
    if (!doc.is_object()) {
      throw ConfigError("$: expected an object");
    }
  }
  if (!doc.contains("kind")) {
    doc["kind"] = std::string(to_string(kind));
  } else if (!doc["kind"].is_string() || doc["kind"].get<std::string>() != to_string(kind)) {
    throw ConfigError("$.kind: config is for '" + doc["kind"].dump() +
                      "', subcommand expects '" + std::string(to_string(kind)) + "'");
  }
  if (!f.schemes.empty()) {
    doc["schemes"] = f.schemes;
  } else if (!doc.contains("schemes") && kind == CampaignKind::Drift) {
    doc["schemes"] = kDefaultDriftSchemes;
  }
  if (f.seed) {
    doc["base_seed"] = *f.seed;
  }
  if (f.trials) {
    doc["trials"] = *f.trials;
  }

  const Campaign c = parse_campaign(doc.dump());
  std::filesystem::path out = !f.out.empty()              ? f.out
                              : !c.output_path.empty()    ? c.output_path
                                                          : "out/" + c.name;
  const auto result = run_campaign(c, RunOptions{f.workers, out});
  for (const auto& r : result.rows) {
    std::printf("%-32s %-34s %-22s %s +/- %s (%llu)\n", r.scheme.c_str(), r.param.c_str(),
                r.metric.c_str(), fasa::csv::number(r.value).c_str(),
                fasa::csv::number(r.ci95).c_str(), static_cast<unsigned long long>(r.trials));
  }
  for (const auto& file : result.files) {
    std::printf("wrote %s\n", (out / file).string().c_str());
  }
  return 0;
}

int run_validate() {
  const auto checks = fasa::validation::run_validation();
  for (const auto& c : checks) {
    std::printf("%s  %s: %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
  }
  const bool ok = fasa::validation::all_passed(checks);
  std::printf("%s\n", ok ? "all checks passed" : "validation failed");
  return ok ? 0 : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Slotted ALOHA backlog estimation experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", build_fingerprint());

  struct Sub {
    const char* name;
    CampaignKind kind;
    const char* help;
  };
  const Sub subs[] = {
      {"drift", CampaignKind::Drift, "estimate drift curves over offered load"},
      {"step", CampaignKind::Step, "step response: rising time and stationary throughput"},
      {"single-event", CampaignKind::SingleEvent, "one burst of n devices: delay percentiles"},
      {"repetitive", CampaignKind::Repetitive, "interrupted Poisson traffic: mean delay"},
      {"scan", CampaignKind::StabilityScan, "residual backlog and delay across rates/horizons"},
  };
  std::vector<CampaignFlags> flags(std::size(subs));
  std::vector<CLI::App*> commands;
  for (std::size_t i = 0; i < std::size(subs); ++i) {
    auto* cmd = app.add_subcommand(subs[i].name, subs[i].help);
    add_campaign_flags(cmd, flags[i]);
    commands.push_back(cmd);
  }
  auto* validate = app.add_subcommand("validate", "check the analytic properties");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (validate->parsed()) {
      return run_validate();
    }
    for (std::size_t i = 0; i < commands.size(); ++i) {
      if (commands[i]->parsed()) {
        return run_campaign_command(subs[i].kind, flags[i]);
      }
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailed;
  }
  return kExitUsage;
}
