#include <doctest.h>

#include <algorithm>
#include <thread>

#include <httplib.h>

#include "polurl/annotation/server.hpp"
#include "polurl/annotation/store.hpp"
#include "support.hpp"

using namespace polurl;
using namespace polurl::annotation;
using testing_support::TempDir;

namespace {

std::vector<std::string> item_ids(int n) {
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) ids.push_back("item-" + std::to_string(i));
  return ids;
}

CoderDecision decision(const std::string& item, const std::string& coder, Label l) {
  return CoderDecision{item, coder, l, *parse_rfc3339("2024-01-01T00:00:00Z")};
}

AnnotationError::Kind error_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const AnnotationError& e) {
    return e.kind();
  }
  FAIL("expected AnnotationError");
  return AnnotationError::Kind::invalid;
}

corpus::ArticleRecord article(int i) {
  corpus::ArticleRecord a;
  a.item_id = "item-" + std::to_string(i);
  a.url = "https://www.theguardian.com/politics/2022/mar/0" + std::to_string(i % 9 + 1) +
          "/theguardian-budget-vote";
  a.country = Country::UK;
  if (i % 2 == 0) {
    a.fetch_status = corpus::FetchStatus::ok;
    a.body_text = "Reported by TheGuardian.com staff: the budget vote at www.theguardian.com "
                  "was delayed. Guardian readers asked questions.";
  }
  return a;
}

}  // namespace

TEST_CASE("presentation order is a seeded permutation") {
  const auto ids = item_ids(30);
  const auto a = presentation_order(ids, 1);
  CHECK(a == presentation_order(ids, 1));
  CHECK(a != presentation_order(ids, 2));
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  auto expect = ids;
  std::sort(expect.begin(), expect.end());
  CHECK(sorted == expect);
}

TEST_CASE("agreeing coders finalize an item; disagreeing coders queue it") {
  AnnotationStore store;
  store.assign_blind(item_ids(3), "ann", "bob", 1, 2);
  store.record_decision(decision("item-0", "ann", Label::POL));
  auto g = store.record_decision(decision("item-0", "bob", Label::POL));
  CHECK(g.status == GoldStatus::agreed);
  CHECK(g.final_label == Label::POL);

  store.record_decision(decision("item-1", "ann", Label::POL));
  g = store.record_decision(decision("item-1", "bob", Label::NON));
  CHECK(g.status == GoldStatus::pending);
  CHECK(g.in_disagreement());
  REQUIRE(store.disagreements().size() == 1);

  g = store.adjudicate("item-1", "carol", Label::NON);
  CHECK(g.status == GoldStatus::adjudicated);
  CHECK(g.final_label == Label::NON);
  CHECK(store.disagreements().empty());

  const auto p = store.progress();
  CHECK(p.agreed == 1);
  CHECK(p.adjudicated == 1);
  CHECK(p.pending == 1);
  CHECK(p.decisions_by_coder.at("ann") == 2);
}

TEST_CASE("store rules map to error kinds") {
  AnnotationStore store;
  CHECK(error_kind([&] { store.record_decision(decision("item-0", "ann", Label::POL)); }) ==
        AnnotationError::Kind::conflict);
  CHECK(error_kind([&] { store.assign_blind(item_ids(2), "ann", "ann", 1, 2); }) ==
        AnnotationError::Kind::invalid);
  store.assign_blind(item_ids(2), "ann", "bob", 1, 2);
  CHECK(error_kind([&] { store.assign_blind(item_ids(2), "ann", "bob", 1, 2); }) ==
        AnnotationError::Kind::conflict);
  CHECK(error_kind([&] { store.record_decision(decision("item-0", "eve", Label::POL)); }) ==
        AnnotationError::Kind::forbidden);
  CHECK(error_kind([&] { store.record_decision(decision("nope", "ann", Label::POL)); }) ==
        AnnotationError::Kind::not_found);
  store.record_decision(decision("item-0", "ann", Label::POL));
  CHECK(error_kind([&] { store.record_decision(decision("item-0", "ann", Label::NON)); }) ==
        AnnotationError::Kind::conflict);
  store.record_decision(decision("item-0", "bob", Label::NON));
  CHECK(error_kind([&] { store.adjudicate("item-0", "ann", Label::POL); }) ==
        AnnotationError::Kind::forbidden);
  CHECK(error_kind([&] { store.adjudicate("item-1", "carol", Label::POL); }) ==
        AnnotationError::Kind::conflict);
  store.adjudicate("item-0", "carol", Label::POL);
  CHECK(error_kind([&] { store.adjudicate("item-0", "carol", Label::POL); }) ==
        AnnotationError::Kind::conflict);
}

TEST_CASE("next_item follows each coder's own order and skips decided items") {
  AnnotationStore store;
  const auto& a = store.assign_blind(item_ids(5), "ann", "bob", 7, 8);
  const auto order_a = a.order_a;
  CHECK(store.next_item("ann") == order_a[0]);
  store.record_decision(decision(order_a[0], "ann", Label::NON));
  CHECK(store.next_item("ann") == order_a[1]);
  for (std::size_t i = 1; i < order_a.size(); ++i)
    store.record_decision(decision(order_a[i], "ann", Label::NON));
  CHECK_FALSE(store.next_item("ann").has_value());
  CHECK(store.next_item("bob").has_value());
}

TEST_CASE("log replay rebuilds identical state") {
  TempDir dir;
  const auto log = dir.file("events.jsonl");
  std::vector<GoldLabel> before;
  {
    AnnotationStore store(log);
    store.assign_blind(item_ids(4), "ann", "bob", 1, 2);
    store.record_decision(decision("item-0", "ann", Label::POL));
    store.record_decision(decision("item-0", "bob", Label::NON));
    store.record_decision(decision("item-1", "ann", Label::NON));
    store.record_decision(decision("item-1", "bob", Label::NON));
    store.adjudicate("item-0", "carol", Label::POL, *parse_rfc3339("2024-01-02T00:00:00Z"));
    before = store.gold_labels();
  }
  AnnotationStore reopened(log);
  CHECK(reopened.gold_labels() == before);
  CHECK(reopened.assignment().order_a == presentation_order(item_ids(4), 1));
  reopened.record_decision(decision("item-2", "ann", Label::POL));

  const auto replayed = AnnotationStore::replay(reopened.events());
  CHECK(replayed->gold_labels() == reopened.gold_labels());
  CHECK(replayed->events() == reopened.events());

  testing_support::write(dir.file("broken.jsonl"), "{not json\n");
  CHECK_THROWS_AS(AnnotationStore(dir.file("broken.jsonl")), DataError);
}

TEST_CASE("gold labels round-trip through JSON") {
  GoldLabel g{"x", Label::POL, Label::NON, Label::NON, Label::NON, GoldStatus::adjudicated};
  CHECK(gold_from_json(to_json(g)) == g);
}

TEST_CASE("intercoder agreement uses only double-coded items") {
  std::vector<GoldLabel> labels;
  for (int i = 0; i < 10; ++i) {
    GoldLabel g;
    g.item_id = std::to_string(i);
    g.coder_a = i < 5 ? Label::POL : Label::NON;
    g.coder_b = i < 4 || i >= 9 ? Label::POL : Label::NON;
    labels.push_back(g);
  }
  GoldLabel half;
  half.coder_a = Label::POL;
  labels.push_back(half);
  const auto s = intercoder_agreement(labels);
  CHECK(s.n_items == 10);
  CHECK(s.n_agreed == 8);
  CHECK(s.percent_agreement == doctest::Approx(0.8));
  REQUIRE(s.kappa.has_value());
  CHECK(*s.kappa == doctest::Approx(0.6));
  CHECK_THROWS_AS(intercoder_agreement({labels[0]}), AnnotationError);
}

TEST_CASE("blinded payloads hide the outlet") {
  for (int i = 0; i < 2; ++i) {
    const auto p = make_blinded_payload(article(i));
    CAPTURE(p.text);
    CHECK(p.kind == (i == 0 ? "text" : "url_tokens"));
    const auto lower = to_lower_ascii(p.text);
    CHECK(lower.find("theguardian") == std::string::npos);
    CHECK(lower.find("www.") == std::string::npos);
    CHECK(p.text.find("[source]") != std::string::npos);
  }
  CHECK(make_blinded_payload(article(1)).text.find("budget") != std::string::npos);
}

TEST_CASE("HTTP API: 20 items, 3 disagreements, adjudication and intercoder stats") {
  AnnotationStore store;
  std::map<std::string, BlindedPayload> payloads;
  std::map<std::string, Label> truth;
  for (int i = 0; i < 20; ++i) {
    const auto a = article(i);
    payloads[a.item_id] = make_blinded_payload(a);
    truth[a.item_id] = i % 2 ? Label::POL : Label::NON;
  }
  store.assign_blind(item_ids(20), "ann", "bob", 3, 4);
  AnnotationServer server(store, payloads);
  const int port = server.bind_any();
  std::thread t([&] { server.serve(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);

  auto post = [&](const std::string& path, const nlohmann::json& body) {
    return client.Post(path, body.dump(), "application/json");
  };
  const std::set<std::string> planted = {"item-2", "item-7", "item-13"};
  for (const std::string coder : {"ann", "bob"}) {
    int seen = 0;
    while (true) {
      auto res = client.Get("/api/next?coder=" + coder);
      REQUIRE(res);
      REQUIRE(res->status == 200);
      CHECK(res->body.find("theguardian") == std::string::npos);
      const auto j = nlohmann::json::parse(res->body);
      CHECK(j["schema_version"] == kSchemaVersion);
      if (j["item"].is_null()) break;
      const std::string id = j["item"]["item_id"];
      Label l = truth[id];
      if (coder == "bob" && planted.count(id)) l = l == Label::POL ? Label::NON : Label::POL;
      auto r = post("/api/decision",
                    {{"item_id", id}, {"coder_id", coder}, {"label", std::string(to_string(l))}});
      REQUIRE(r);
      CHECK(r->status == 200);
      const auto rj = nlohmann::json::parse(r->body);
      CHECK_FALSE(rj.contains("coder_a"));
      CHECK_FALSE(rj.contains("coder_b"));
      CHECK_FALSE(rj.contains("gold"));
      ++seen;
    }
    CHECK(seen == 20);
  }

  auto dis = nlohmann::json::parse(client.Get("/api/disagreements")->body);
  CHECK(dis["count"] == 3);
  std::set<std::string> queued;
  for (const auto& row : dis["items"]) {
    queued.insert(row["item_id"].get<std::string>());
    CHECK(row["coder_a"] != row["coder_b"]);
    CHECK(row.contains("payload"));
  }
  CHECK(queued == planted);

  auto inter = nlohmann::json::parse(client.Get("/api/intercoder")->body);
  CHECK(inter["n_items"] == 20);
  CHECK(inter["n_agreed"] == 17);
  CHECK(inter["percent_agreement"].get<double>() == doctest::Approx(0.85));

  CHECK(post("/api/adjudication", {{"item_id", "item-2"}, {"adjudicator_id", "ann"}, {"label", "POL"}})
            ->status == 403);
  CHECK(post("/api/adjudication", {{"item_id", "item-3"}, {"adjudicator_id", "carol"}, {"label", "POL"}})
            ->status == 409);
  CHECK(post("/api/decision", {{"item_id", "item-3"}, {"coder_id", "ann"}, {"label", "POL"}})->status ==
        409);
  CHECK(post("/api/decision", {{"item_id", "nope"}, {"coder_id", "ann"}, {"label", "POL"}})->status ==
        404);
  CHECK(post("/api/decision", {{"item_id", "item-3"}, {"coder_id", "ann"}, {"label", "maybe"}})
            ->status == 400);
  CHECK(client.Post("/api/decision", "{oops", "application/json")->status == 400);
  CHECK(client.Get("/api/next")->status == 400);

  for (const auto& id : planted) {
    auto r = post("/api/adjudication", {{"item_id", id}, {"adjudicator_id", "carol"},
                                        {"label", std::string(to_string(truth[id]))}});
    REQUIRE(r);
    CHECK(r->status == 200);
  }
  dis = nlohmann::json::parse(client.Get("/api/disagreements")->body);
  CHECK(dis["count"] == 0);
  const auto progress = nlohmann::json::parse(client.Get("/api/progress")->body);
  CHECK(progress["agreed"] == 17);
  CHECK(progress["adjudicated"] == 3);
  CHECK(progress["pending"] == 0);
  for (const auto& g : store.gold_labels()) CHECK(g.final_label == truth[g.item_id]);

  server.stop();
  t.join();
}

TEST_CASE("intercoder endpoint answers 409 before enough double-coded items") {
  AnnotationStore store;
  store.assign_blind(item_ids(3), "ann", "bob", 1, 2);
  AnnotationServer server(store, {});
  const int port = server.bind_any();
  std::thread t([&] { server.serve(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);
  CHECK(client.Get("/api/intercoder")->status == 409);
  server.stop();
  t.join();
}
