#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "polurl/common.hpp"
#include "polurl/corpus/visits.hpp"
#include "polurl/gateway/backend.hpp"
#include "polurl/metrics/metrics.hpp"

namespace polurl::cli {

// INI sections as parsed: section -> key -> value.
using IniSections = std::map<std::string, std::map<std::string, std::string>>;
IniSections parse_ini_file(const std::string& path);

struct RunConfig {
  std::string config_path;
  std::string dataset_id = "dataset";
  std::string out_dir;  // resolved
  std::uint64_t seed = 42;

  std::string visits_path;
  corpus::VisitFormat visits_format = corpus::VisitFormat::csv;
  std::map<Country, std::string> outlet_paths;
  std::size_t sample_per_country = 0;  // stratified when > 0
  std::size_t sample_size = 0;         // simple random sample otherwise
  std::string snapshot_path;           // offline fetch source; live HTTP when empty
  std::string gold_path;               // empty: <out>/annotation/gold.jsonl

  std::string prompts_dir;
  std::string text_template = "text_v1";
  std::string url_template = "url_v1";
  std::size_t truncation_chars = 4000;
  bool enable_skip = true;
  std::size_t workers = 8;
  std::string cache_dir;  // empty: <out>/cache

  std::map<std::string, gateway::BackendConfig> backends;
  metrics::BootstrapConfig bootstrap;

  std::string annotation_host = "127.0.0.1";
  int annotation_port = 8765;
  std::string coder_a = "coder_a";
  std::string coder_b = "coder_b";
  std::uint64_t coder_seed_a = 1;
  std::uint64_t coder_seed_b = 2;
  std::string ui_dir;

  std::string published_table;  // Table 2 fixture for `audit`
  std::string run_id;           // empty: derived from the config digest
  std::string digest;           // sha256 of the canonical parsed config
};

// Loads and validates a config. Relative paths resolve against the config
// file's directory; every referenced input file must exist. Throws
// gateway::ConfigError.
RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override = {},
                      std::optional<std::string> out_dir_override = {});

}  // namespace polurl::cli
