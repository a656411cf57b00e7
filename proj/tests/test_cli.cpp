#include <doctest.h>

#include <array>
#include <atomic>
#include <cstdio>
#include <thread>

#include <httplib.h>

#include "polurl/cli/config.hpp"
#include "polurl/cli/pipeline.hpp"
#include "polurl/corpus/dataset.hpp"
#include "support.hpp"

using namespace polurl;
using testing_support::source_path;
using testing_support::TempDir;
using testing_support::write;

namespace {

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr
};

CommandResult run_cli(const std::string& args) {
  const std::string cmd = std::string(POLURL_CLI_PATH) + " " + args + " 2>&1";
  CommandResult r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string synthetic_config() { return source_path("data/synthetic/config.ini"); }

std::string with_config(const TempDir& out, const std::string& sub) {
  return "-c " + synthetic_config() + " --out-dir " + out.path().string() + " " + sub;
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(run_cli("").exit_code == 1);
  CHECK(run_cli("frobnicate").exit_code == 1);
  CHECK(run_cli("classify --backend mock --mode pdf -c x.ini").exit_code == 1);
  CHECK(run_cli("ingest").exit_code == 1);
  CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("stages out of order exit 2 and name the missing stage") {
  TempDir out;
  auto r = run_cli(with_config(out, "classify --backend mock --mode url"));
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("polurl sample") != std::string::npos);
  r = run_cli(with_config(out, "filter"));
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("polurl ingest") != std::string::npos);
  r = run_cli(with_config(out, "evaluate"));
  CHECK(r.exit_code == 2);
  CHECK(run_cli("-c " + out.file("missing.ini") + " ingest").exit_code == 2);
}

TEST_CASE("unknown backends and text runs without fetch exit 2") {
  TempDir out;
  REQUIRE(run_cli(with_config(out, "ingest")).exit_code == 0);
  REQUIRE(run_cli(with_config(out, "filter")).exit_code == 0);
  REQUIRE(run_cli(with_config(out, "sample")).exit_code == 0);
  CHECK(run_cli(with_config(out, "classify --backend nope --mode url")).exit_code == 2);
  const auto r = run_cli(with_config(out, "classify --backend mock --mode text"));
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("polurl fetch") != std::string::npos);
  CHECK(run_cli(with_config(out, "classify --backend mock --mode url")).exit_code == 0);
}

TEST_CASE("backend failures exit 3") {
  TempDir dir;
  write(dir.file("cfg/config.ini"),
        "[run]\nvisits = " + source_path("data/synthetic/visits.csv") +
            "\nsample_per_country = 2\nprompts_dir = " + source_path("prompts") +
            "\nworkers = 1\n[outlets]\nUK = " + source_path("data/synthetic/outlets_uk.txt") +
            "\nUS = " + source_path("data/synthetic/outlets_us.txt") +
            "\nFR = " + source_path("data/synthetic/outlets_fr.txt") +
            "\nDE = " + source_path("data/synthetic/outlets_de.txt") +
            "\nES = " + source_path("data/synthetic/outlets_es.txt") +
            "\n[backend.down]\nkind = http_chat\nendpoint_url = http://127.0.0.1:1/v1/chat\n"
            "model_name = m\nmax_retries = 1\nretry_backoff_ms = 1\nrequest_timeout_ms = 500\n");
  const std::string base = "-c " + dir.file("cfg/config.ini") + " ";
  REQUIRE(run_cli(base + "ingest").exit_code == 0);
  REQUIRE(run_cli(base + "filter").exit_code == 0);
  REQUIRE(run_cli(base + "sample").exit_code == 0);
  const auto r = run_cli(base + "classify --backend down --mode url");
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("attempt 2") != std::string::npos);
}

TEST_CASE("full mock run is idempotent") {
  TempDir out;
  const auto first = run_cli(with_config(out, "run"));
  REQUIRE(first.exit_code == 0);
  const auto cfg = cli::load_config(synthetic_config(), {}, out.path().string());
  const auto report_dir = cli::layout::report_dir(cfg);
  const auto table = read_file(report_dir + "/table2.csv");
  CHECK(table.find("mock,Text,") != std::string::npos);
  CHECK(table.find("mock,URL,") != std::string::npos);
  for (const char* f : {"fig2.csv", "fig3.csv", "fig4.csv", "fig5.csv", "fig6.csv", "fig7.csv",
                        "manifest.json", "table2.json"})
    CHECK(std::filesystem::exists(report_dir + "/" + f));

  const auto second = run_cli(with_config(out, "run"));
  REQUIRE(second.exit_code == 0);
  CHECK(read_file(report_dir + "/table2.csv") == table);
  // Every data stage reports no change on the second pass.
  std::size_t unchanged = 0;
  for (std::size_t pos = 0; (pos = second.output.find("[unchanged]", pos)) != std::string::npos; ++pos)
    ++unchanged;
  CHECK(unchanged >= 7);

  CHECK(run_cli(with_config(out, "diagnose")).exit_code == 0);
  CHECK(std::filesystem::exists(cli::layout::diagnostics(cfg)));
  const auto audit = run_cli(with_config(out, "audit"));
  CHECK(audit.exit_code == 0);
  const auto audit_json = nlohmann::json::parse(read_file(report_dir + "/audit.json"));
  CHECK(audit_json["all_consistent"] == true);
  CHECK(audit_json["negative_control_flagged"] == true);
}

TEST_CASE("urlscan needs no config") {
  const auto r = run_cli("urlscan https://www.bbc.com/world-europe-60547473 "
                         "https://www.lemonde.fr/politique/macron-candidat-election.html");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("skip_eligible=true\treason=no_linguistic_cues") != std::string::npos);
  CHECK(r.output.find("descriptive") != std::string::npos);
}

TEST_CASE("config loading resolves paths and derives a stable digest") {
  const auto a = cli::load_config(synthetic_config());
  const auto b = cli::load_config(synthetic_config());
  CHECK(a.digest == b.digest);
  CHECK(a.run_id == "run-" + a.digest.substr(0, 12));
  CHECK(std::filesystem::path(a.visits_path).is_absolute());
  CHECK(a.outlet_paths.size() == 5);
  CHECK(a.backends.count("mock") == 1);
  CHECK(a.bootstrap.seed == 7);
  const auto c = cli::load_config(synthetic_config(), 99);
  CHECK(c.seed == 99);
  CHECK(c.digest != a.digest);
  CHECK(cli::load_config(synthetic_config(), {}, "/tmp/elsewhere").digest == a.digest);

  TempDir dir;
  write(dir.file("bad.ini"), "[run]\nvisits = v.csv\n[mystery]\nx = 1\n");
  write(dir.file("v.csv"), "");
  CHECK_THROWS_AS(cli::load_config(dir.file("bad.ini")), gateway::ConfigError);
  write(dir.file("bad2.ini"), "[run]\nvisits = v.csv\nvisitz = 2\n");
  CHECK_THROWS_AS(cli::load_config(dir.file("bad2.ini")), gateway::ConfigError);
  write(dir.file("bad3.ini"), "[run]\nvisits = absent.csv\n");
  CHECK_THROWS_AS(cli::load_config(dir.file("bad3.ini")), gateway::ConfigError);
}

TEST_CASE("in-process stages: resample is a no-op and predictions join gold") {
  TempDir out;
  const auto cfg = cli::load_config(synthetic_config(), {}, out.path().string());
  cli::run_ingest(cfg);
  cli::run_filter(cfg);
  CHECK(cli::run_sample(cfg).changed);
  CHECK_FALSE(cli::run_sample(cfg).changed);
  cli::run_fetch(cfg);
  cli::run_classify(cfg, "mock", Mode::full_text);
  cli::run_classify(cfg, "mock", Mode::url_only);
  const auto runs = cli::load_scored_runs(cfg);
  REQUIRE(runs.size() == 2);
  for (const auto& r : runs) {
    CHECK(r.backend == "mock");
    CHECK(r.without_gold == 0);
    CHECK(r.items.size() == (r.mode == Mode::full_text ? 375u : 400u));
  }
}

TEST_CASE("serve exposes the annotation API and exports gold on stop") {
  TempDir out;
  auto cfg = cli::load_config(synthetic_config(), {}, out.path().string());
  cfg.gold_path.clear();
  cfg.annotation_port = 0;
  cli::run_ingest(cfg);
  cli::run_filter(cfg);
  cli::run_sample(cfg);
  std::atomic<bool> stop{false};
  std::atomic<int> port{0};
  std::thread server([&] { cli::run_serve(cfg, stop, &port); });
  for (int i = 0; i < 200 && port.load() == 0; ++i)
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  REQUIRE(port.load() > 0);

  httplib::Client client("127.0.0.1", port.load());
  httplib::Result next;
  for (int i = 0; i < 100 && !next; ++i) {
    next = client.Get("/api/next?coder=coder_a");
    if (!next) std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  REQUIRE(next);
  const auto j = nlohmann::json::parse(next->body);
  CHECK(j["total"] == 400);
  const std::string id = j["item"]["item_id"];
  for (const char* coder : {"coder_a", "coder_b"}) {
    const nlohmann::json body = {{"item_id", id}, {"coder_id", coder}, {"label", "POL"}};
    CHECK(client.Post("/api/decision", body.dump(), "application/json")->status == 200);
  }
  stop = true;
  server.join();

  const auto gold = corpus::read_jsonl(cli::layout::gold(cfg));
  CHECK(gold.size() == 400);
  std::size_t finals = 0;
  for (const auto& g : gold) {
    if (g["final"].is_null()) continue;
    ++finals;
    CHECK(g["item_id"] == id);
    CHECK(g["final"] == "POL");
    CHECK(g["status"] == "agreed");
  }
  CHECK(finals == 1);
}

TEST_CASE("synthetic generator is deterministic and matches the bundled corpus") {
  TempDir out;
  const std::string cmd = std::string(POLURL_GENERATOR_PATH) + " " + out.path().string() +
                          " > /dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  for (const char* f : {"visits.csv", "snapshot.jsonl", "gold.jsonl", "config.ini",
                        "outlets_fr.txt", "outlets_de.txt", "outlets_es.txt", "outlets_uk.txt",
                        "outlets_us.txt"}) {
    CAPTURE(f);
    CHECK(read_file(out.file(f)) == read_file(source_path(std::string("data/synthetic/") + f)));
  }
}

TEST_CASE("example backend sections load") {
  TempDir dir;
  write(dir.file("v.csv"), "");
  write(dir.file("run.ini"), "[run]\nvisits = v.csv\nprompts_dir = " + source_path("prompts") +
                                 "\n\n" + read_file(source_path("configs/backends.example.ini")));
  const auto cfg = cli::load_config(dir.file("run.ini"));
  REQUIRE(cfg.backends.size() == 3);
  CHECK(cfg.backends.at("mistral").kind == gateway::BackendKind::http_chat);
  CHECK(cfg.backends.at("mistral").rate_limit == 2.0);
  CHECK(cfg.backends.at("llama").request_timeout == std::chrono::milliseconds(120000));
  CHECK(cfg.backends.at("mock").kind == gateway::BackendKind::mock_lexicon);
}
