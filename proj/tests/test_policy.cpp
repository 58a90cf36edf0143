#include "scaffold/policy.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "test_support.hpp"

using namespace scaffold;
using nlohmann::json;
using test_support::completion_body;
using test_support::StubServer;

namespace {

const std::set<Position> kAllPositions = {Position::Top, Position::Next,
                                          Position::Front};

struct Rollout {
  std::vector<int> heights;  // heights[0] = initial, heights[k] after step k
  std::vector<Decision> decisions;
  std::vector<uint64_t> pre_hashes;
  WorldState final_state;
};

// Minimal step loop, independent of the session runner, so policy
// guarantees are checked against first principles.
Rollout roll(Policy& policy, SceneConfig scene, const std::set<Position>& positions,
             int steps, uint64_t seed, size_t menu_size = 0) {
  Rng scene_rng(mix_seed(seed, 1));
  Rng menu_rng(mix_seed(seed, 2));
  Rng policy_rng(mix_seed(seed, 3));
  WorldState state = init_scene(scene, scene_rng);

  Rollout out;
  out.heights.push_back(max_tower_height(state));
  std::vector<HistoryEntry> history;
  for (int step = 0; step < steps; ++step) {
    ActionMenu menu;
    if (menu_size == 0) {
      menu.entries = legal_actions(state, positions);
    } else {
      menu = build_menu(state, positions, menu_size, menu_rng);
    }
    out.pre_hashes.push_back(state_hash(state));
    Decision d = policy.select(state, history, menu, policy_rng);
    REQUIRE(d.menu_index >= 1);
    REQUIRE(static_cast<size_t>(d.menu_index) <= menu.entries.size());
    REQUIRE(menu.entries[static_cast<size_t>(d.menu_index) - 1] == d.action);
    history.push_back({d.action, action_phrase(d.action, state.objects)});
    auto [next, effect] = apply_action(state, d.action);
    (void)effect;
    state = std::move(next);
    out.heights.push_back(max_tower_height(state));
    out.decisions.push_back(std::move(d));
  }
  out.final_state = std::move(state);
  return out;
}

}  // namespace

TEST_SUITE("policy") {

TEST_CASE("random policy is reproducible per seed") {
  Rng scene_rng(3);
  WorldState s = init_scene({5, 0}, scene_rng);
  ActionMenu menu{legal_actions(s, kAllPositions)};
  RandomPolicy p;
  Rng a(42), b(42);
  for (int i = 0; i < 50; ++i) {
    CHECK(p.select(s, {}, menu, a).menu_index == p.select(s, {}, menu, b).menu_index);
  }
}

TEST_CASE("random policy draws uniformly over the menu") {
  Rng scene_rng(3);
  WorldState s = init_scene({4, 0}, scene_rng);
  ActionMenu menu{legal_actions(s, {Position::Top, Position::Next})};
  menu.entries.resize(10);
  RandomPolicy p;
  Rng rng(2024);
  std::vector<int> counts(10, 0);
  for (int i = 0; i < 10000; ++i) {
    Decision d = p.select(s, {}, menu, rng);
    counts[static_cast<size_t>(d.menu_index) - 1]++;
  }
  // sigma = sqrt(n p (1-p)) = 30 for n=10000, p=0.1
  for (int c : counts) {
    CHECK(c > 1000 - 90);
    CHECK(c < 1000 + 90);
  }
}

TEST_CASE("greedy picks a stacking action from a scattered start") {
  Rng scene_rng(11);
  WorldState s = init_scene({5, 0}, scene_rng);
  ActionMenu menu{legal_actions(s, kAllPositions)};
  GreedyTowerPolicy p;
  Rng rng(0);
  Decision d = p.select(s, {}, menu, rng);
  CHECK(d.action.position == Position::Top);
  auto [next, effect] = apply_action(s, d.action);
  CHECK(std::holds_alternative<Stacked>(effect));
  CHECK(max_tower_height(next) == 2);
}

TEST_CASE("greedy with full menus reaches the ceiling at the first possible step") {
  GreedyTowerPolicy p;
  for (int cubes = 2; cubes <= 5; ++cubes) {
    for (int spheres = 0; spheres <= 1; ++spheres) {
      int ceiling = cubes + spheres;
      for (uint64_t session = 0; session < 40; ++session) {
        uint64_t seed = mix_seed(0xC0FFEE, session);
        Rollout r = roll(p, {cubes, spheres}, kAllPositions, 10, seed);
        CAPTURE(cubes);
        CAPTURE(spheres);
        CAPTURE(session);
        // First passage at step ceiling-1, not earlier.
        for (int k = 0; k < ceiling - 1; ++k) CHECK(r.heights[static_cast<size_t>(k)] < ceiling);
        REQUIRE(r.heights.size() > static_cast<size_t>(ceiling - 1));
        CHECK(r.heights[static_cast<size_t>(ceiling - 1)] == ceiling);
      }
    }
  }
}

TEST_CASE("greedy puts the sphere on last and topmost") {
  GreedyTowerPolicy p;
  for (uint64_t session = 0; session < 40; ++session) {
    uint64_t seed = mix_seed(0xBA11, session);
    Rng scene_rng(mix_seed(seed, 1));
    WorldState s = init_scene({4, 1}, scene_rng);
    std::vector<HistoryEntry> history;
    Rng policy_rng(mix_seed(seed, 3));
    int sphere_id = 4;
    for (int step = 0; step < 4; ++step) {
      ActionMenu menu{legal_actions(s, kAllPositions)};
      Decision d = p.select(s, history, menu, policy_rng);
      // The sphere is never grasped before every cube is stacked.
      if (step < 3) CHECK(d.action.source != sphere_id);
      history.push_back({d.action, action_phrase(d.action, s.objects)});
      s = apply_action(s, d.action).first;
    }
    auto [cell, level] = s.locate(sphere_id);
    const auto& column = s.columns.at(cell);
    CHECK(column.size() == 5);
    CHECK(level == 4);
    CHECK(column.back() == sphere_id);
  }
}

TEST_CASE("greedy falls back to the first Top entry, then to entry 1") {
  // Two cubes stacked, third loose: menu deliberately excludes the
  // action the primary rule wants.
  WorldState s;
  for (int id = 0; id < 3; ++id) {
    s.objects.push_back({id, ObjectKind::Cube, color_palette()[static_cast<size_t>(id)]});
  }
  s.columns[{0, 0}] = {0, 1};
  s.columns[{3, 3}] = {2};
  GreedyTowerPolicy p;
  Rng rng(0);

  ActionMenu no_qualifying{{{0, 2, Position::Next}, {1, 2, Position::Top}}};
  // (1, 2, Top) targets the loose cube, not the tall column, but it is
  // the first Top entry.
  Decision d1 = p.select(s, {}, no_qualifying, rng);
  CHECK(d1.menu_index == 2);

  ActionMenu no_top{{{0, 2, Position::Next}, {2, 0, Position::Front}}};
  Decision d2 = p.select(s, {}, no_top, rng);
  CHECK(d2.menu_index == 1);
}

TEST_CASE("greedy ignores sphere-topped columns as stacking targets") {
  // Sphere on a 2-stack is the tallest column; greedy must grow the
  // cube-topped column instead of feeding the sphere.
  WorldState s;
  for (int id = 0; id < 3; ++id) {
    s.objects.push_back({id, ObjectKind::Cube, color_palette()[static_cast<size_t>(id)]});
  }
  s.objects.push_back({3, ObjectKind::Sphere, color_palette()[3]});
  s.columns[{0, 0}] = {0, 3};  // cube with sphere on it, height 2
  s.columns[{2, 2}] = {1};
  s.columns[{4, 4}] = {2};
  GreedyTowerPolicy p;
  Rng rng(0);
  ActionMenu menu{legal_actions(s, kAllPositions)};
  Decision d = p.select(s, {}, menu, rng);
  CHECK(d.action.position == Position::Top);
  CHECK(s.object(d.action.target).kind == ObjectKind::Cube);
  // Target is the top of a cube-topped column, so stacking succeeds.
  auto [next, effect] = apply_action(s, d.action);
  CHECK(std::holds_alternative<Stacked>(effect));
  (void)next;
}

TEST_CASE("llm policy maps a direct reply onto the menu") {
  StubServer server([](const httplib::Request& req, httplib::Response& res) {
    auto body = json::parse(req.body);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][1]["role"] == "user");
    res.set_content(
        completion_body("<reasoning> build on the tallest </reasoning>\n"
                        "Selected action is : 2"),
        "application/json");
  });
  ChatClient client(server.config());
  LlmPolicy p(client, PromptTemplate::Interesting);
  Rng scene_rng(5);
  WorldState s = init_scene({5, 0}, scene_rng);
  ActionMenu menu{legal_actions(s, kAllPositions)};
  menu.entries.resize(3);
  Rng rng(9);
  Decision d = p.select(s, {}, menu, rng);
  CHECK(d.menu_index == 2);
  CHECK(d.action == menu.entries[1]);
  CHECK(d.source == DecisionSource::LlmDirect);
  CHECK(d.rationale == "build on the tallest");
  REQUIRE(d.query_log.has_value());
  CHECK(d.query_log->exchanges.size() == 1);
  // The user prompt reached the wire verbatim.
  auto sent = json::parse(d.query_log->exchanges[0].request_body);
  CHECK(sent["messages"][1]["content"] == build_user_prompt(s, {}, menu));
}

TEST_CASE("llm policy falls back to a uniform draw after two bad replies") {
  StubServer server([](const httplib::Request&, httplib::Response& res) {
    res.set_content(completion_body("cannot decide"), "application/json");
  });
  ChatClient client(server.config());
  LlmPolicy p(client, PromptTemplate::Interesting);
  Rng scene_rng(5);
  WorldState s = init_scene({5, 0}, scene_rng);
  ActionMenu menu{legal_actions(s, kAllPositions)};
  menu.entries.resize(10);

  Rng a(31), b(31);
  Decision d1 = p.select(s, {}, menu, a);
  Decision d2 = p.select(s, {}, menu, b);
  CHECK(d1.source == DecisionSource::LlmFallback);
  CHECK(d1.menu_index == d2.menu_index);  // drawn from the policy stream
  CHECK(d1.action == menu.entries[static_cast<size_t>(d1.menu_index) - 1]);
  REQUIRE(d1.query_log.has_value());
  CHECK(d1.query_log->exchanges.size() == 2);
  CHECK(d1.query_log->path == QueryPath::Fallback);
}

TEST_CASE("replay reproduces a recorded rollout and detects divergence") {
  RandomPolicy random;
  uint64_t seed = 0xFEED;
  Rollout recorded = roll(random, {4, 1}, kAllPositions, 10, seed, 10);

  std::vector<ReplayPolicy::Step> steps;
  for (size_t i = 0; i < recorded.decisions.size(); ++i) {
    steps.push_back({recorded.pre_hashes[i], recorded.decisions[i]});
  }

  ReplayPolicy replay(steps);
  Rollout replayed = roll(replay, {4, 1}, kAllPositions, 10, seed, 10);
  CHECK(replayed.heights == recorded.heights);
  CHECK(replayed.final_state == recorded.final_state);
  for (size_t i = 0; i < replayed.decisions.size(); ++i) {
    CHECK(replayed.decisions[i].action == recorded.decisions[i].action);
    CHECK(replayed.decisions[i].source == DecisionSource::Replay);
  }

  // Tampered hash: divergence is reported at the right step.
  auto tampered = steps;
  tampered[3].state_hash ^= 1;
  ReplayPolicy bad(tampered);
  CHECK_THROWS_WITH_AS(roll(bad, {4, 1}, kAllPositions, 10, seed, 10),
                       "state divergence at step 4", ReplayError);

  // Different seed: the very first scene differs.
  ReplayPolicy wrong_world(steps);
  CHECK_THROWS_AS(roll(wrong_world, {4, 1}, kAllPositions, 10, seed + 1, 10),
                  ReplayError);

  // Exhausted recording.
  ReplayPolicy short_replay({steps.begin(), steps.begin() + 2});
  CHECK_THROWS_WITH_AS(roll(short_replay, {4, 1}, kAllPositions, 10, seed, 10),
                       "replay exhausted at step 3", ReplayError);
}

TEST_CASE("decision source names round-trip") {
  for (DecisionSource s :
       {DecisionSource::Policy, DecisionSource::LlmDirect, DecisionSource::LlmReask,
        DecisionSource::LlmFallback, DecisionSource::Replay}) {
    auto back = decision_source_from_name(decision_source_name(s));
    REQUIRE(back.has_value());
    CHECK(*back == s);
  }
  CHECK(!decision_source_from_name("oracle").has_value());
}

}  // TEST_SUITE
