#include "polurl/cli/config.hpp"

#include <algorithm>
#include <filesystem>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "polurl/hash.hpp"

namespace polurl::cli {

namespace fs = std::filesystem;
using gateway::ConfigError;

IniSections parse_ini_file(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  IniSections out;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(path + ": key '" + section + "' outside a section");
    auto& kv = out[section];
    for (const auto& [key, value] : body) kv[key] = trim(value.data());
  }
  return out;
}

namespace {

class Section {
 public:
  Section(std::string name, const std::map<std::string, std::string>* kv)
      : name_(std::move(name)), kv_(kv) {}

  std::optional<std::string> get(const std::string& key) const {
    if (!kv_) return std::nullopt;
    const auto it = kv_->find(key);
    if (it == kv_->end()) return std::nullopt;
    return it->second;
  }
  std::string str(const std::string& key, std::string def) const { return get(key).value_or(def); }
  std::uint64_t u64(const std::string& key, std::uint64_t def) const {
    const auto v = get(key);
    if (!v) return def;
    try {
      std::size_t used = 0;
      const auto x = std::stoull(*v, &used);
      if (used != v->size() || (*v)[0] == '-') throw std::invalid_argument(*v);
      return x;
    } catch (const std::exception&) {
      throw ConfigError("[" + name_ + "] " + key + ": not a non-negative integer: '" + *v + "'");
    }
  }
  double real(const std::string& key, double def) const {
    const auto v = get(key);
    if (!v) return def;
    try {
      std::size_t used = 0;
      const double x = std::stod(*v, &used);
      if (used != v->size()) throw std::invalid_argument(*v);
      return x;
    } catch (const std::exception&) {
      throw ConfigError("[" + name_ + "] " + key + ": not a number: '" + *v + "'");
    }
  }
  bool flag(const std::string& key, bool def) const {
    const auto v = get(key);
    if (!v) return def;
    const auto l = to_lower_ascii(*v);
    if (l == "true" || l == "yes" || l == "1" || l == "on") return true;
    if (l == "false" || l == "no" || l == "0" || l == "off") return false;
    throw ConfigError("[" + name_ + "] " + key + ": not a boolean: '" + *v + "'");
  }

 private:
  std::string name_;
  const std::map<std::string, std::string>* kv_;
};

Section section(const IniSections& ini, const std::string& name) {
  const auto it = ini.find(name);
  return Section(name, it == ini.end() ? nullptr : &it->second);
}

std::string resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return p;
  const fs::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal().string();
}

void require_file(const std::string& what, const std::string& path) {
  if (!fs::exists(path)) throw ConfigError(what + " not found: " + path);
}

}  // namespace

RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override,
                      std::optional<std::string> out_dir_override) {
  require_file("config file", path);
  const IniSections ini = parse_ini_file(path);
  const fs::path base = fs::absolute(path).parent_path();
  for (const auto& [name, kv] : ini) {
    static const char* known[] = {"run", "outlets", "bootstrap", "annotation"};
    if (name.rfind("backend.", 0) == 0) continue;
    if (std::find(std::begin(known), std::end(known), name) == std::end(known))
      throw ConfigError(path + ": unknown section [" + name + "]");
  }

  RunConfig c;
  c.config_path = path;
  const auto run = section(ini, "run");
  c.dataset_id = run.str("dataset_id", c.dataset_id);
  c.seed = seed_override.value_or(run.u64("seed", c.seed));
  c.out_dir = out_dir_override ? fs::absolute(*out_dir_override).lexically_normal().string()
                               : resolve(base, run.str("out_dir", "out"));
  c.visits_path = resolve(base, run.str("visits", ""));
  if (const auto f = run.get("visits_format")) {
    const auto fmt = corpus::parse_visit_format(*f);
    if (!fmt) throw ConfigError("[run] visits_format must be csv or jsonl");
    c.visits_format = *fmt;
  } else if (c.visits_path.size() > 6 &&
             c.visits_path.compare(c.visits_path.size() - 6, 6, ".jsonl") == 0) {
    c.visits_format = corpus::VisitFormat::jsonl;
  }
  c.sample_per_country = run.u64("sample_per_country", 0);
  c.sample_size = run.u64("sample_size", 0);
  c.snapshot_path = resolve(base, run.str("snapshot", ""));
  c.gold_path = resolve(base, run.str("gold", ""));
  c.prompts_dir = resolve(base, run.str("prompts_dir", "prompts"));
  c.text_template = run.str("text_template", c.text_template);
  c.url_template = run.str("url_template", c.url_template);
  c.truncation_chars = run.u64("truncation_chars", c.truncation_chars);
  c.enable_skip = run.flag("enable_skip", c.enable_skip);
  c.workers = std::max<std::uint64_t>(1, run.u64("workers", c.workers));
  c.cache_dir = resolve(base, run.str("cache_dir", ""));
  c.published_table = resolve(base, run.str("published_table", ""));
  c.run_id = run.str("run_id", "");
  if (c.truncation_chars == 0) throw ConfigError("[run] truncation_chars must be positive");

  if (const auto it = ini.find("outlets"); it != ini.end()) {
    for (const auto& [key, value] : it->second) {
      const auto country = parse_country(key);
      if (!country) throw ConfigError("[outlets] unknown country " + key);
      c.outlet_paths[*country] = resolve(base, value);
    }
  }

  const auto boot = section(ini, "bootstrap");
  c.bootstrap.resamples = static_cast<int>(boot.u64("resamples", 2000));
  c.bootstrap.seed = boot.u64("seed", c.seed);
  c.bootstrap.level = boot.real("level", 0.95);
  c.bootstrap.workers = c.workers;
  if (c.bootstrap.resamples < 100) throw ConfigError("[bootstrap] resamples must be >= 100");
  if (!(c.bootstrap.level > 0 && c.bootstrap.level < 1))
    throw ConfigError("[bootstrap] level must be in (0,1)");

  const auto ann = section(ini, "annotation");
  const std::string bind = ann.str("bind", "127.0.0.1:8765");
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw ConfigError("[annotation] bind must be host:port");
  c.annotation_host = bind.substr(0, colon);
  try {
    c.annotation_port = std::stoi(bind.substr(colon + 1));
  } catch (const std::exception&) {
    throw ConfigError("[annotation] bind must be host:port");
  }
  c.coder_a = ann.str("coder_a", c.coder_a);
  c.coder_b = ann.str("coder_b", c.coder_b);
  c.coder_seed_a = ann.u64("seed_a", c.coder_seed_a);
  c.coder_seed_b = ann.u64("seed_b", c.coder_seed_b);
  c.ui_dir = resolve(base, ann.str("ui_dir", ""));

  for (const auto& [name, kv] : ini) {
    if (name.rfind("backend.", 0) != 0) continue;
    const std::string id = name.substr(8);
    c.backends[id] = gateway::backend_from_section(id, kv);
  }

  if (!c.visits_path.empty()) require_file("[run] visits", c.visits_path);
  for (const auto& [country, p] : c.outlet_paths)
    require_file("[outlets] " + std::string(to_string(country)), p);
  if (!c.snapshot_path.empty()) require_file("[run] snapshot", c.snapshot_path);
  if (!fs::is_directory(c.prompts_dir)) throw ConfigError("prompts_dir not found: " + c.prompts_dir);
  if (!c.published_table.empty()) require_file("[run] published_table", c.published_table);
  if (!c.ui_dir.empty() && !fs::is_directory(c.ui_dir))
    throw ConfigError("[annotation] ui_dir not found: " + c.ui_dir);

  // Digest over the parsed values; the output directory and credentials are
  // not part of it.
  nlohmann::json canon = nlohmann::json::object();
  for (const auto& [name, kv] : ini) {
    for (const auto& [key, value] : kv) {
      if (key == "api_key" || (name == "run" && key == "out_dir")) continue;
      canon[name][key] = value;
    }
  }
  canon["run"]["seed"] = std::to_string(c.seed);
  c.digest = sha256_hex(canon.dump());
  if (c.run_id.empty()) c.run_id = "run-" + c.digest.substr(0, 12);
  if (c.cache_dir.empty()) c.cache_dir = (fs::path(c.out_dir) / "cache").string();
  return c;
}

}  // namespace polurl::cli
