#include "scaffold/llm.hpp"

#include <atomic>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "scaffold/rng.hpp"
#include "test_support.hpp"

using namespace scaffold;
using nlohmann::json;
using test_support::completion_body;
using test_support::StubServer;

namespace {

EndpointConfig test_config(const StubServer& server) { return server.config(); }

bool is_selection(const ParseResult& r) {
  return std::holds_alternative<Selection>(r);
}

int index_of(const ParseResult& r) { return std::get<Selection>(r).index; }

ParseError error_of(const ParseResult& r) { return std::get<ParseError>(r); }

}  // namespace

TEST_SUITE("llm") {

TEST_CASE("parse_selection handles the canonical reply format") {
  auto r = parse_selection(
      "<reasoning> sphere base makes the tower unstable </reasoning>\n"
      "Selected action is : 3",
      10);
  REQUIRE(is_selection(r));
  CHECK(index_of(r) == 3);
  CHECK(std::get<Selection>(r).reasoning ==
        "sphere base makes the tower unstable");
}

TEST_CASE("parse_selection rejects out-of-range indices") {
  auto r = parse_selection("Selected action is: 12", 10);
  REQUIRE(!is_selection(r));
  CHECK(error_of(r).kind == ParseErrorKind::OutOfRange);
  CHECK(error_of(r).value == 12);
}

TEST_CASE("parse_selection falls back to the last standalone integer") {
  auto r = parse_selection("I would pick option 2 because it stacks.", 5);
  REQUIRE(is_selection(r));
  CHECK(index_of(r) == 2);
}

TEST_CASE("parse_selection hand corpus") {
  struct Variant {
    std::string reply;
    size_t menu = 10;
    bool ok;
    long long value;  // index when ok, offending value otherwise
    ParseErrorKind kind = ParseErrorKind::NoNumber;
  };
  // Twenty reply shapes seen or anticipated from chat models;
  // labels fix the parser contract for each.
  std::vector<Variant> corpus = {
      {"<reasoning> stacking creates height </reasoning>\n\nSelected action is : 3",
       10, true, 3},
      {"Selected action is: 12", 10, false, 12, ParseErrorKind::OutOfRange},
      {"I would pick option 2 because it stacks.", 5, true, 2},
      {"selected action = 7", 10, true, 7},
      {"The selected action is 4. The selected action is 9.", 10, true, 9},
      {"Selected Action Is : 10", 10, true, 10},
      {"No numbers here at all.", 10, false, 0, ParseErrorKind::NoNumber},
      {"Choose action 3 or action 5; final answer 5", 10, true, 5},
      {"3.5 seems interesting", 10, false, 0, ParseErrorKind::NoNumber},
      {"abc123def", 10, false, 0, ParseErrorKind::NoNumber},
      {"Answer: 0", 10, false, 0, ParseErrorKind::OutOfRange},
      {"-2", 10, true, 2},
      {"<reasoning>\n  the sphere rolls\n</reasoning>\nSelected action is : 1",
       10, true, 1},
      {"selected action\nnumber: 8", 10, true, 8},
      {"Action 4 was tempting. Selected action is the stacking one.", 10,
       false, 0, ParseErrorKind::NoNumber},
      {"The previously selected action was 2, but now selected action is : 6",
       10, true, 6},
      {"999999999999999999999999999999", 10, false,
       std::numeric_limits<long long>::max(), ParseErrorKind::OutOfRange},
      {"Option 12) then I choose 7", 10, true, 7},
      {"Selected action is : 03", 10, true, 3},
      {"  5  ", 10, true, 5},
  };
  CHECK(corpus.size() == 20);
  for (const auto& v : corpus) {
    CAPTURE(v.reply);
    auto r = parse_selection(v.reply, v.menu);
    if (v.ok) {
      REQUIRE(is_selection(r));
      CHECK(index_of(r) == v.value);
    } else {
      REQUIRE(!is_selection(r));
      CHECK(error_of(r).kind == v.kind);
      if (v.kind == ParseErrorKind::OutOfRange) {
        CHECK(error_of(r).value == v.value);
      }
    }
  }
}

TEST_CASE("parse_selection round-trips every menu index up to 60") {
  for (int n = 1; n <= 60; ++n) {
    auto r = parse_selection("Selected action is : " + std::to_string(n), 60);
    REQUIRE(is_selection(r));
    CHECK(index_of(r) == n);
  }
}

TEST_CASE("parse_selection is total over arbitrary bytes") {
  Rng rng(0x5EEDF00D);
  for (int i = 0; i < 10000; ++i) {
    size_t len = rng.uniform_index(201);
    std::string s;
    s.reserve(len);
    for (size_t j = 0; j < len; ++j) {
      s.push_back(static_cast<char>(rng.uniform_int(0, 255)));
    }
    size_t menu = 1 + rng.uniform_index(60);
    auto r = parse_selection(s, menu);
    if (is_selection(r)) {
      CHECK(index_of(r) >= 1);
      CHECK(static_cast<size_t>(index_of(r)) <= menu);
    }
  }
}

TEST_CASE("chat client returns the stub completion") {
  StubServer server([](const httplib::Request& req, httplib::Response& res) {
    auto body = json::parse(req.body);
    CHECK(body["model"] == "gpt-3.5-turbo");
    CHECK(body["temperature"] == 0.0);
    CHECK(req.get_header_value("Authorization") == "Bearer test-key");
    res.set_content(completion_body("Selected action is : 4"), "application/json");
  });
  ChatClient client(test_config(server));
  ChatRequest req;
  req.messages = {{"system", "sys"}, {"user", "usr"}};
  ChatResponse resp = client.complete(req);
  CHECK(resp.content == "Selected action is : 4");
  CHECK(resp.finish_reason == "stop");
  CHECK(resp.attempts == 1);
  CHECK(resp.raw_body.find("Selected action") != std::string::npos);
}

TEST_CASE("chat client retries transient statuses with backoff") {
  std::atomic<int> hits{0};
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    if (hits.fetch_add(1) < 2) {
      res.status = 429;
      res.set_content("slow down", "text/plain");
    } else {
      res.set_content(completion_body("1"), "application/json");
    }
  });
  ChatClient client(test_config(server));
  ChatRequest req;
  req.messages = {{"system", "s"}, {"user", "u"}};
  ChatResponse resp = client.complete(req);
  CHECK(resp.attempts == 3);
  CHECK(hits.load() == 3);
  CHECK(resp.content == "1");
}

TEST_CASE("chat client does not retry definitive API errors") {
  std::atomic<int> hits{0};
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    hits.fetch_add(1);
    res.status = 401;
    res.set_content("{\"error\":\"bad key\"}", "application/json");
  });
  ChatClient client(test_config(server));
  ChatRequest req;
  req.messages = {{"system", "s"}, {"user", "u"}};
  try {
    client.complete(req);
    FAIL("expected ApiError");
  } catch (const ApiError& e) {
    CHECK(e.status == 401);
    CHECK(e.body.find("bad key") != std::string::npos);
  }
  CHECK(hits.load() == 1);
}

TEST_CASE("chat client gives up after max attempts") {
  std::atomic<int> hits{0};
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    hits.fetch_add(1);
    res.status = 503;
  });
  EndpointConfig cfg = test_config(server);
  cfg.max_attempts = 2;
  ChatClient client(cfg);
  ChatRequest req;
  req.messages = {{"system", "s"}, {"user", "u"}};
  CHECK_THROWS_AS(client.complete(req), TransportError);
  CHECK(hits.load() == 2);
}

TEST_CASE("chat client rejects bodies that are not chat completions") {
  StubServer server([](const httplib::Request&, httplib::Response& res) {
    res.set_content("not json at all", "text/plain");
  });
  ChatClient client(test_config(server));
  ChatRequest req;
  req.messages = {{"system", "s"}, {"user", "u"}};
  CHECK_THROWS_AS(client.complete(req), ProtocolError);
}

TEST_CASE("chat client bounds concurrent requests") {
  std::atomic<int> active{0};
  std::atomic<int> peak{0};
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    int now = active.fetch_add(1) + 1;
    int seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    active.fetch_sub(1);
    res.set_content(completion_body("1"), "application/json");
  });
  EndpointConfig cfg = test_config(server);
  cfg.max_in_flight = 2;
  ChatClient client(cfg);
  std::vector<std::thread> workers;
  for (int i = 0; i < 6; ++i) {
    workers.emplace_back([&client] {
      ChatRequest req;
      req.messages = {{"system", "s"}, {"user", "u"}};
      client.complete(req);
    });
  }
  for (auto& w : workers) w.join();
  CHECK(peak.load() <= 2);
}

TEST_CASE("query_selection takes the direct path on a clean reply") {
  StubServer server([](const httplib::Request&, httplib::Response& res) {
    res.set_content(
        completion_body("<reasoning> tall tower </reasoning>\n"
                        "Selected action is : 5"),
        "application/json");
  });
  ChatClient client(test_config(server));
  QueryResult r = query_selection(client, "sys", "usr", 10);
  REQUIRE(r.selection.has_value());
  CHECK(r.selection->index == 5);
  CHECK(r.selection->reasoning == "tall tower");
  CHECK(r.log.path == QueryPath::Direct);
  CHECK(r.log.exchanges.size() == 1);
}

TEST_CASE("query_selection re-asks once with the corrective message") {
  StubServer server([](const httplib::Request& req, httplib::Response& res) {
    auto body = json::parse(req.body);
    if (body["messages"].size() == 2) {
      res.set_content(completion_body("happy to help!"), "application/json");
    } else {
      res.set_content(completion_body("4"), "application/json");
    }
  });
  ChatClient client(test_config(server));
  QueryResult r = query_selection(client, "sys", "usr", 10);
  REQUIRE(r.selection.has_value());
  CHECK(r.selection->index == 4);
  CHECK(r.log.path == QueryPath::Reask);
  REQUIRE(r.log.exchanges.size() == 2);

  auto second = json::parse(r.log.exchanges[1].request_body);
  REQUIRE(second["messages"].size() == 3);
  CHECK(second["messages"][0]["role"] == "system");
  CHECK(second["messages"][1]["role"] == "user");
  CHECK(second["messages"][1]["content"] == "usr");
  CHECK(second["messages"][2]["role"] == "user");
  CHECK(second["messages"][2]["content"] ==
        "Answer with the number of the selected action only.");
}

TEST_CASE("query_selection signals fallback after two bad replies") {
  std::atomic<int> hits{0};
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    hits.fetch_add(1);
    res.set_content(completion_body("no idea"), "application/json");
  });
  ChatClient client(test_config(server));
  QueryResult r = query_selection(client, "sys", "usr", 10);
  CHECK(!r.selection.has_value());
  CHECK(r.log.path == QueryPath::Fallback);
  CHECK(r.log.exchanges.size() == 2);
  CHECK(hits.load() == 2);  // at most two model calls per step
}

TEST_CASE("recorded exchanges replay to the same selection offline") {
  StubServer server([](const httplib::Request& req, httplib::Response& res) {
    auto body = json::parse(req.body);
    if (body["messages"].size() == 2) {
      res.set_content(completion_body("thinking..."), "application/json");
    } else {
      res.set_content(completion_body("Selected action is : 7"),
                      "application/json");
    }
  });
  ChatClient client(test_config(server));
  QueryResult live = query_selection(client, "sys", "usr", 10);
  REQUIRE(live.selection.has_value());

  // No network: rerun the parser over the captured contents.
  auto replayed = parse_selection(live.log.exchanges.back().content, 10);
  REQUIRE(std::holds_alternative<Selection>(replayed));
  CHECK(std::get<Selection>(replayed).index == live.selection->index);
  for (const auto& ex : live.log.exchanges) {
    auto parsed_body = json::parse(ex.response_body);
    CHECK(parsed_body["choices"][0]["message"]["content"] == ex.content);
  }
}

TEST_CASE("query path names are stable transcript tokens") {
  CHECK(std::string(query_path_name(QueryPath::Direct)) == "direct");
  CHECK(std::string(query_path_name(QueryPath::Reask)) == "reask");
  CHECK(std::string(query_path_name(QueryPath::Fallback)) == "fallback");
}

}  // TEST_SUITE
