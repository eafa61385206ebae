#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "paraprobe/core/config.hpp"
#include "paraprobe/core/types.hpp"
#include "paraprobe/defense/defense.hpp"
#include "paraprobe/document/document.hpp"
#include "paraprobe/prompts/conference.hpp"
#include "paraprobe/prompts/prompts.hpp"
#include "paraprobe/providers/providers.hpp"

namespace paraprobe::cli {

/// Process exit status of every command.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,    // bad flags, config, input files or records
  kExitProvider = 2,  // provider failure after retries
  kExitEmptyPool = 3, // every candidate of an iteration was filtered
  kExitInternal = 4,  // invariant violated or unexpected failure
};

/// Everything a command needs besides its own flags. Loaded from one JSON
/// file; command-line flags override individual fields.
struct RunConfig {
  SearchConfig search;
  std::string conference = "acl";
  std::string conferences_dir;  // extra *.json venues, searched before the builtins
  prompts::TemplateId template_id = prompts::TemplateId::kDelimiters;
  std::string template_path;  // optional template body override
  std::string document_format;  // "latex", "plain" or empty for by-extension
  std::string providers = "mock";
  nlohmann::json mock = nlohmann::json::object();
  nlohmann::json remote = nlohmann::json::object();
  int retries = 3;
  int retry_backoff_ms = 0;
  doc::CompileHook compile;
  std::string work_dir = "paraprobe-work";
  defense::DefenseOptions defense;
  nlohmann::json simulation = nlohmann::json::object();
};

/// Throws Error(kInvalidConfig) on unknown provider kinds or bad values and
/// Error(kIo) when the file cannot be read.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
nlohmann::json to_json(const RunConfig& config);

/// Venue named by the config, from `conferences_dir` first.
prompts::ConferenceConfig resolve_conference(const RunConfig& config);
prompts::ReviewerTemplate resolve_template(const RunConfig& config, prompts::TemplateId id);

/// Mock providers default to the simulation world. The mock perplexity
/// model is fitted on `reference_text` unless the config names a file.
providers::ProviderSet make_providers(const RunConfig& config, const prompts::ConferenceConfig& conference,
                                      const std::string& reference_text);

DocumentFormat format_for(const RunConfig& config, const std::string& path);

nlohmann::json to_json(const prompts::ReviewOutput& review);

/// Parses argv and runs one command. JSON results go to `out`, logs and
/// error messages to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace paraprobe::cli
