// Copyright 2026 The vnm-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// vnm-lab: runs measurement scenarios from JSON configs.
// Exit codes: 0 success, 2 config error, 3 runtime error.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vnm/cli.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

using vnm::cli::json;

int report_config_errors(const std::vector<vnm::cli::ConfigError>& errors) {
  json list = json::array();
  for (const auto& e : errors) list.push_back(json{{"path", e.path}, {"message", e.message}});
  std::cerr << json{{"error", "config"}, {"details", list}}.dump(2) << "\n";
  for (const auto& e : errors) std::cerr << e.str() << "\n";
  return kConfigError;
}

int report_runtime_error(const std::string& code, const std::string& what) {
  std::cerr << json{{"error", "runtime"}, {"code", code}, {"message", what}}.dump(2) << "\n";
  return kRuntimeError;
}

vnm::cli::ValidationResult load(const std::string& path) {
  std::string text;
  try {
    text = vnm::io::read_text(path);
  } catch (const vnm::Error& e) {
    vnm::cli::ValidationResult r;
    r.errors.push_back({"$", e.what()});
    return r;
  }
  return vnm::cli::validate_config(text, std::filesystem::path(path).parent_path());
}

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("VNM_SEED");
  if (!s || !*s) return std::nullopt;
  char* end = nullptr;
  const auto v = std::strtoull(s, &end, 10);
  if (*end != '\0') return std::nullopt;
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vnm-lab: successive von Neumann measurement scenarios"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  auto* run = app.add_subcommand("run", "run a scenario config and write its outputs");
  run->add_option("--config", config_path, "scenario config (JSON)")->required();
  run->add_option("--out", out_dir, "output directory");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "check a config and print it with defaults filled in");
  validate->add_option("--config", validate_path, "scenario config (JSON)")->required();

  auto* list = app.add_subcommand("list-scenarios", "list available scenarios");

  std::string defaults_name;
  auto* defaults = app.add_subcommand("defaults", "print the default config of a scenario");
  defaults->add_option("scenario", defaults_name, "scenario name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  if (*list) {
    for (const auto& s : vnm::cli::scenarios()) std::cout << s.name << "\t" << s.description << "\n";
    return 0;
  }
  if (*defaults) {
    if (!vnm::cli::find_scenario(defaults_name)) {
      return report_config_errors({{"scenario", "unknown scenario '" + defaults_name + "'"}});
    }
    std::cout << json{{"scenario", defaults_name}, {"params", vnm::cli::default_params(defaults_name)}}.dump(2) << "\n";
    return 0;
  }
  if (*validate) {
    const auto r = load(validate_path);
    if (!r.ok()) return report_config_errors(r.errors);
    std::cout << r.config->to_json().dump(2) << "\n";
    return 0;
  }

  auto r = load(config_path);
  if (!r.ok()) return report_config_errors(r.errors);
  if (const auto seed = env_seed()) vnm::cli::apply_seed_override(*r.config, *seed);
  try {
    const auto m = vnm::cli::run(*r.config, out_dir);
    std::cout << json{{"scenario", r.config->scenario}, {"out", out_dir}, {"files", m.files},
                      {"all_checks_passed", m.all_passed}}
                     .dump(2)
              << "\n";
  } catch (const vnm::Error& e) {
    return report_runtime_error(e.code(), e.what());
  } catch (const std::exception& e) {
    return report_runtime_error("Internal", e.what());
  }
  return 0;
}
