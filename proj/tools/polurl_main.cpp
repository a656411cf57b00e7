#include <atomic>
#include <csignal>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "polurl/cli/config.hpp"
#include "polurl/cli/pipeline.hpp"
#include "polurl/gateway/backend.hpp"
#include "polurl/prompt/template.hpp"
#include "polurl/urlkit/url.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kBackend = 3 };

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

int urlscan(const std::vector<std::string>& urls, int threshold) {
  using namespace polurl::urlkit;
  int rc = kOk;
  for (const auto& u : urls) {
    try {
      const auto canon = canonicalize(u);
      const auto tokens = tokenize_path(canon);
      const auto v = assess_descriptiveness(tokens, threshold);
      std::cout << to_string(canon) << "\tscore=" << v.score
                << "\tskip_eligible=" << (v.skip_eligible ? "true" : "false")
                << "\treason=" << to_string(v.reason) << "\ttokens=";
      for (std::size_t i = 0; i < tokens.tokens.size(); ++i)
        std::cout << (i ? " " : "") << tokens.tokens[i] << (tokens.id_like[i] ? "#" : "");
      std::cout << '\n';
    } catch (const UrlError& e) {
      std::cerr << u << ": invalid URL (" << e.component() << "): " << e.what() << '\n';
      rc = kData;
    }
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polurl: political-content classification from URLs and article text"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  app.add_option("-c,--config", config_path, "Run configuration (INI)");
  app.add_option("--seed", seed, "Override the sampling seed");
  app.add_option("--out-dir", out_dir, "Override the output directory");

  auto* ingest = app.add_subcommand("ingest", "Read the visit log");
  auto* filter = app.add_subcommand("filter", "Keep visits on listed news outlets");
  auto* sample = app.add_subcommand("sample", "Draw the item sample");
  auto* fetch = app.add_subcommand("fetch", "Fetch article text for sampled items");
  bool refetch = false;
  fetch->add_flag("--refetch", refetch, "Fetch items that already have a status");
  auto* classify = app.add_subcommand("classify", "Classify items with a backend");
  std::string backend, mode_name;
  classify->add_option("--backend", backend, "Backend id from the config")->required();
  classify->add_option("--mode", mode_name, "text or url")
      ->required()
      ->check(CLI::IsMember({"text", "url"}));
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against gold labels");
  auto* diagnose = app.add_subcommand("diagnose", "Stratified agreement diagnostics");
  auto* report = app.add_subcommand("report", "Write Table 2 and figure data");
  auto* audit = app.add_subcommand("audit", "Check published metrics for integer consistency");
  std::string table;
  audit->add_option("--table", table, "Published table fixture (JSON)");
  auto* serve = app.add_subcommand("serve", "Run the annotation service");
  bool serve_annotation = false;
  serve->add_flag("--annotation", serve_annotation, "Serve the coder API")->required();
  std::optional<int> port;
  serve->add_option("--port", port, "Port override (0 picks a free port)");
  auto* gold = app.add_subcommand("export-gold", "Write gold labels from the annotation log");
  auto* run_all = app.add_subcommand(
      "run", "ingest, filter, sample, fetch, classify every backend in both modes, evaluate, report");
  auto* scan = app.add_subcommand("urlscan", "Show URL tokens and the SKIP verdict");
  std::vector<std::string> urls;
  int threshold = polurl::urlkit::kDefaultCueThreshold;
  scan->add_option("urls", urls, "URLs")->required();
  scan->add_option("--threshold", threshold, "Minimum number of word tokens");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kOk : kUsage;
  }

  if (scan->parsed()) return urlscan(urls, threshold);
  if (config_path.empty()) {
    std::cerr << "--config is required for this subcommand\n";
    return kUsage;
  }

  using namespace polurl;
  try {
    auto cfg = cli::load_config(config_path, seed, out_dir);
    const auto say = [](const cli::StageResult& r) {
      std::cout << r.summary << (r.changed ? "" : " [unchanged]") << '\n';
    };
    if (ingest->parsed()) say(cli::run_ingest(cfg));
    if (filter->parsed()) say(cli::run_filter(cfg));
    if (sample->parsed()) say(cli::run_sample(cfg));
    if (fetch->parsed()) say(cli::run_fetch(cfg, refetch));
    if (classify->parsed()) say(cli::run_classify(cfg, backend, *parse_mode(mode_name)));
    if (evaluate->parsed()) say(cli::run_evaluate(cfg));
    if (diagnose->parsed()) say(cli::run_diagnose(cfg));
    if (report->parsed()) say(cli::run_report(cfg));
    if (audit->parsed()) say(cli::run_audit(cfg, table));
    if (gold->parsed()) say(cli::export_gold(cfg));
    if (run_all->parsed()) {
      say(cli::run_ingest(cfg));
      say(cli::run_filter(cfg));
      say(cli::run_sample(cfg));
      say(cli::run_fetch(cfg));
      for (const auto& [id, b] : cfg.backends) {
        say(cli::run_classify(cfg, id, Mode::full_text));
        say(cli::run_classify(cfg, id, Mode::url_only));
      }
      say(cli::run_evaluate(cfg));
      say(cli::run_report(cfg));
    }
    if (serve->parsed()) {
      if (port) cfg.annotation_port = *port;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "annotation service on " << cfg.annotation_host << ":" << cfg.annotation_port
                << " (Ctrl-C to stop)" << std::endl;
      say(cli::run_serve(cfg, g_stop));
    }
  } catch (const gateway::BackendError& e) {
    std::cerr << "backend error: " << e.what() << '\n';
    for (const auto& line : e.attempt_log()) std::cerr << "  " << line << '\n';
    return kBackend;
  } catch (const cli::StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const gateway::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kData;
  } catch (const prompt::TemplateError& e) {
    std::cerr << "template error: " << e.what() << '\n';
    return kData;
  } catch (const urlkit::UrlError& e) {
    std::cerr << "url error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kOk;
}
