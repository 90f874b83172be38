#include "swb/service.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "swb/error.h"
#include "swb/ingest.h"
#include "synthetic.h"

namespace swb {
namespace {

using Json = nlohmann::json;
namespace fs = std::filesystem;

std::shared_ptr<const Schema> ddl(const std::string& text, const std::string& id) {
  return std::make_shared<const Schema>(parse_ddl(text, id).schema);
}

Session toy_session() {
  auto a = ddl("CREATE TABLE Event (EVENT_DATE DATE, LOCATION_CODE INT, REMARKS VARCHAR(9));\n"
               "CREATE TABLE Person (LAST_NAME VARCHAR(40), FIRST_NAME VARCHAR(40));",
               "a");
  auto b = ddl("CREATE TABLE EventInfo (EventDate DATE, Location INT);\n"
               "CREATE TABLE Individual (Surname VARCHAR(40), GivenName VARCHAR(40), Age INT);",
               "b");
  MatchConfig config;
  config.threads = 1;
  Session s("toy", config);
  s.set_clock(testing::stepping_clock());
  s.add_schema(a);
  s.add_schema(b);
  s.add_matrix(std::make_shared<const MatchMatrix>(match(a, b, config)));
  return s;
}

class ServiceTest : public ::testing::Test {
 protected:
  ServiceTest() : store_(std::make_shared<SessionStore>()), service_(store_) {
    store_->add("toy", toy_session());
  }

  HttpResponse get(const std::string& path, std::multimap<std::string, std::string> query = {}) {
    return service_.handle(HttpRequest{"GET", path, std::move(query), {}});
  }
  HttpResponse post(const std::string& path, const Json& body) {
    return service_.handle(HttpRequest{"POST", path, {}, body.dump()});
  }

  std::shared_ptr<SessionStore> store_;
  Service service_;
};

TEST_F(ServiceTest, ListsSchemasAndSessions) {
  const Json schemas = Json::parse(get("/schemas").body)["schemas"];
  ASSERT_EQ(schemas.size(), 2u);
  EXPECT_EQ(schemas[0]["id"], "a");
  EXPECT_EQ(schemas[0]["elementCount"], 7);
  EXPECT_EQ(Json::parse(get("/sessions").body)["sessions"], Json::array({"toy"}));
  const HttpResponse tree = get("/schemas/b/tree");
  EXPECT_EQ(tree.status, 200);
  EXPECT_EQ(read_canonical(tree.body).element_count(), 7u);
  EXPECT_EQ(get("/schemas/zz/tree").status, 404);
}

TEST_F(ServiceTest, LinksDefaultToAllByScore) {
  const Json body = Json::parse(get("/sessions/toy/links").body);
  EXPECT_EQ(body["total"], 49);
  ASSERT_EQ(body["links"].size(), 49u);
  for (std::size_t k = 1; k < body["links"].size(); ++k) {
    EXPECT_GE(body["links"][k - 1]["score"].get<double>(), body["links"][k]["score"].get<double>());
  }
  EXPECT_EQ(body["links"][0]["status"], "none");
}

TEST_F(ServiceTest, PagesConcatenateToFullList) {
  for (const char* sort : {"score", "leftPath", "rightPath", "status"}) {
    const Json full = Json::parse(get("/sessions/toy/links", {{"sort", sort}}).body)["links"];
    Json joined = Json::array();
    for (int offset = 0; offset < 49; offset += 10) {
      const Json page = Json::parse(get("/sessions/toy/links", {{"sort", sort},
                                                                {"offset", std::to_string(offset)},
                                                                {"limit", "10"}})
                                        .body)["links"];
      EXPECT_LE(page.size(), 10u);
      for (const auto& l : page) joined.push_back(l);
    }
    EXPECT_EQ(joined, full) << sort;
  }
}

TEST_F(ServiceTest, SortByPathAscendingAndDescending) {
  const Json asc = Json::parse(get("/sessions/toy/links", {{"sort", "leftPath"}}).body)["links"];
  const Json desc =
      Json::parse(get("/sessions/toy/links", {{"sort", "leftPath"}, {"order", "desc"}}).body)["links"];
  EXPECT_EQ(asc.front()["leftPath"], "Event");
  EXPECT_EQ(desc.front()["leftPath"], "Person/LAST_NAME");
  for (std::size_t k = 1; k < asc.size(); ++k) {
    EXPECT_LE(asc[k - 1]["leftPath"].get<std::string>(), asc[k]["leftPath"].get<std::string>());
  }
}

TEST_F(ServiceTest, FiltersMatchLibrary) {
  const auto snap = store_->snapshot("toy");
  const MatchMatrix& m = *snap->matrices()[0];
  const ConfidenceRange range{0.0, 1.0};
  const auto expected =
      apply(m, std::span(&range, 1), node_filter(m.left(), FilterSpec{SubtreeRoot{"a", "a:5"}}),
            node_filter(m.right(), FilterSpec{DepthRange{2, 2}}));
  const Json body = Json::parse(get("/sessions/toy/links", {{"minScore", "0"},
                                                            {"leftSubtree", "a:5"},
                                                            {"rightDepthMin", "2"},
                                                            {"rightDepthMax", "2"}})
                                    .body);
  EXPECT_EQ(body["total"].get<std::size_t>(), expected.size());
  for (std::size_t k = 0; k < expected.size(); ++k) {
    EXPECT_EQ(body["links"][k]["leftId"], m.left().element(expected[k].left).id);
    EXPECT_EQ(body["links"][k]["rightId"], m.right().element(expected[k].right).id);
  }
}

TEST_F(ServiceTest, BadFiltersAre400) {
  EXPECT_EQ(get("/sessions/toy/links", {{"minScore", "high"}}).status, 400);
  EXPECT_EQ(get("/sessions/toy/links", {{"minScore", "0.8"}, {"maxScore", "0.2"}}).status, 400);
  EXPECT_EQ(get("/sessions/toy/links", {{"sort", "colour"}}).status, 400);
  EXPECT_EQ(get("/sessions/toy/links", {{"limit", "-1"}}).status, 400);
  EXPECT_EQ(get("/sessions/toy/links", {{"depthMin", "3"}, {"depthMax", "1"}}).status, 400);
  EXPECT_EQ(get("/sessions/toy/links", {{"leftSubtree", "a:99"}}).status, 404);
  EXPECT_EQ(post("/sessions/toy/decisions", Json{{"leftId", "a:2"}}).status, 400);
  EXPECT_EQ(service_.handle(HttpRequest{"POST", "/sessions/toy/decisions", {}, "{not json"}).status, 400);
}

TEST_F(ServiceTest, DecisionUpdatesPartition) {
  const Json before = Json::parse(get("/sessions/toy/partition").body);
  EXPECT_EQ(before["right"]["common"], 0);
  const HttpResponse r = post("/sessions/toy/decisions", Json{{"leftId", "b:2"},
                                                              {"rightId", "a:2"},
                                                              {"status", "accepted"},
                                                              {"annotation", "equivalent"},
                                                              {"author", "ana"},
                                                              {"assignee", "bo"}});
  ASSERT_EQ(r.status, 200) << r.body;
  const Json d = Json::parse(r.body);
  EXPECT_EQ(d["leftId"], "a:2");
  EXPECT_EQ(d["rightId"], "b:2");
  const Json after = Json::parse(get("/sessions/toy/partition").body);
  EXPECT_EQ(after["right"]["common"], 1);
  EXPECT_EQ(after["left"]["common"], 1);

  const Json links = Json::parse(get("/sessions/toy/links", {{"sort", "status"}, {"order", "desc"}}).body);
  EXPECT_EQ(links["links"][0]["status"], "accepted");
  EXPECT_EQ(links["links"][0]["assignee"], "bo");
}

TEST_F(ServiceTest, ErrorStatuses) {
  EXPECT_EQ(post("/sessions/toy/decisions", Json{{"leftId", "a:2"}, {"rightId", "a:3"}, {"status", "accepted"}})
                .status,
            404);
  ASSERT_EQ(post("/sessions/toy/decisions", Json{{"leftId", "a:2"}, {"rightId", "b:2"}, {"status", "accepted"}})
                .status,
            200);
  const HttpResponse illegal =
      post("/sessions/toy/decisions", Json{{"leftId", "a:2"}, {"rightId", "b:2"}, {"status", "candidate"}});
  EXPECT_EQ(illegal.status, 409);
  EXPECT_EQ(Json::parse(illegal.body)["error"], "illegal-transition");
  EXPECT_EQ(get("/sessions/nope/links").status, 404);
  EXPECT_EQ(get("/nowhere").status, 404);
  EXPECT_EQ(get("/sessions/toy/export/pdf").status, 404);
  ASSERT_EQ(post("/sessions/toy/concepts", Json{{"schemaId", "a"}, {"name", "Event"}, {"elementIds", {"a:1"}}})
                .status,
            200);
  EXPECT_EQ(post("/sessions/toy/concepts", Json{{"schemaId", "a"}, {"name", "Other"}, {"elementIds", {"a:1"}}})
                .status,
            409);
}

TEST_F(ServiceTest, ConceptsAndIncrementalMatch) {
  const HttpResponse c = post("/sessions/toy/concepts",
                              Json{{"schemaId", "a"}, {"name", "Event"}, {"elementIds", {"a:1", "a:2"}}});
  ASSERT_EQ(c.status, 200) << c.body;
  EXPECT_EQ(Json::parse(c.body)["id"], "a/C1");
  const Json inc = Json::parse(post("/sessions/toy/incremental-match", Json{{"conceptId", "a/C1"}, {"minScore", -1}}).body);
  EXPECT_EQ(inc["pairsConsidered"], 14);
  EXPECT_EQ(inc["links"].size(), 14u);
  EXPECT_EQ(inc["links"][0]["leftConcept"], "Event");

  post("/sessions/toy/concepts", Json{{"schemaId", "b"}, {"name", "EventInfo"}, {"elementIds", {"b:1", "b:2"}}});
  post("/sessions/toy/decisions", Json{{"leftId", "a:2"}, {"rightId", "b:2"}, {"status", "accepted"}});
  const Json cm = Json::parse(get("/sessions/toy/concept-matches").body)["conceptMatches"];
  ASSERT_EQ(cm.size(), 1u);
  EXPECT_EQ(cm[0]["leftConcept"], "Event");
  EXPECT_EQ(cm[0]["support"], 1);
}

TEST_F(ServiceTest, ExportsAreCsv) {
  const HttpResponse e = get("/sessions/toy/export/elements");
  EXPECT_EQ(e.content_type, "text/csv");
  EXPECT_EQ(e.body.rfind("row_type,", 0), 0u);
  const HttpResponse m = get("/sessions/toy/export/matrix", {{"lo", "-1"}});
  EXPECT_EQ(std::count(m.body.begin(), m.body.end(), '\n'), 50);
}

TEST_F(ServiceTest, ConcurrentWritersAndReaders) {
  const auto snap = store_->snapshot("toy");
  const MatchMatrix& m = *snap->matrices()[0];
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (std::size_t i = static_cast<std::size_t>(t); i < m.rows(); i += 4) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
          const HttpResponse r = post("/sessions/toy/decisions", Json{{"leftId", m.left().element(i).id},
                                                                      {"rightId", m.right().element(j).id},
                                                                      {"status", "rejected"}});
          EXPECT_EQ(r.status, 200);
        }
      }
    });
  }
  threads.emplace_back([&] {
    for (int k = 0; k < 50; ++k) {
      const auto s = store_->snapshot("toy");
      EXPECT_EQ(s->events().size(), s->decisions().size());
    }
  });
  for (auto& t : threads) t.join();
  EXPECT_EQ(store_->snapshot("toy")->decisions().size(), 49u);
  EXPECT_EQ(store_->snapshot("toy")->events().size(), 49u);
}

TEST(SessionStoreTest, PersistsEveryWrite) {
  const fs::path dir = fs::temp_directory_path() / "swb_store_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  Session s = toy_session();
  for (const auto& id : s.schema_ids()) {
    std::ofstream(dir / (id + ".json")) << write_canonical(s.schema(id));
  }
  // Rebuild the refs so the saved session resolves its schema files.
  Session fresh("toy", s.config());
  for (const auto& id : s.schema_ids()) {
    fresh.add_schema(s.schema_ptr(id), SchemaRef{id + ".json", sha256_hex(write_canonical(s.schema(id)))});
  }
  fresh.add_matrix(s.matrices()[0]);
  save_session_file(fresh, (dir / "toy.session.json").string());

  auto store = std::shared_ptr<SessionStore>(SessionStore::open_directory(dir.string()));
  Service service(store);
  const HttpResponse r = service.handle(HttpRequest{
      "POST", "/sessions/toy/decisions", {}, R"({"leftId":"a:2","rightId":"b:2","status":"accepted"})"});
  ASSERT_EQ(r.status, 200) << r.body;
  const Session reloaded = load_session_file((dir / "toy.session.json").string());
  EXPECT_EQ(reloaded.decisions().size(), 1u);
  EXPECT_EQ(SessionStore::open_directory(dir.string())->ids(), std::vector<std::string>{"toy"});
  fs::remove_all(dir);
}

TEST(ListenAddressTest, Forms) {
  EXPECT_EQ(parse_listen_address("0.0.0.0:9000"), (std::pair<std::string, int>{"0.0.0.0", 9000}));
  EXPECT_EQ(parse_listen_address(":81"), (std::pair<std::string, int>{"127.0.0.1", 81}));
  EXPECT_EQ(parse_listen_address("8080"), (std::pair<std::string, int>{"127.0.0.1", 8080}));
  EXPECT_THROW(parse_listen_address("host:"), Error);
  EXPECT_THROW(parse_listen_address("host:70000"), Error);
}

TEST(HttpTest, RoundTripOverSocket) {
  auto store = std::make_shared<SessionStore>();
  store->add("toy", toy_session());
  Service service(store);
  const int port = service.bind_ephemeral("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread server([&] { service.listen_after_bind(); });

  httplib::Client client("127.0.0.1", port);
  client.set_connection_timeout(5);
  auto links = client.Get("/sessions/toy/links?minScore=0&limit=3");
  ASSERT_TRUE(links);
  EXPECT_EQ(links->status, 200);
  EXPECT_LE(Json::parse(links->body)["links"].size(), 3u);

  auto posted = client.Post("/sessions/toy/decisions",
                            R"({"leftId":"a:2","rightId":"b:2","status":"accepted"})", "application/json");
  ASSERT_TRUE(posted);
  EXPECT_EQ(posted->status, 200);
  auto part = client.Get("/sessions/toy/partition");
  ASSERT_TRUE(part);
  EXPECT_EQ(Json::parse(part->body)["right"]["common"], 1);

  auto missing = client.Get("/sessions/none/links");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);

  service.stop();
  server.join();
}

}  // namespace
}  // namespace swb
