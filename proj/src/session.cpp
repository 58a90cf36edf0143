#include "scaffold/session.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <thread>

#include "json.hpp"

namespace scaffold {

namespace {

using nlohmann::json;

std::string hash_hex(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

uint64_t hex_hash(const std::string& s) {
  if (s.size() != 16 || s.find_first_not_of("0123456789abcdef") != std::string::npos) {
    throw TranscriptError("malformed state hash '" + s + "'");
  }
  return std::stoull(s, nullptr, 16);
}

std::string u64_str(uint64_t v) { return std::to_string(v); }

uint64_t str_u64(const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw TranscriptError("malformed seed '" + s + "'");
  }
  return std::stoull(s);
}

json action_to_json(const Action& a) {
  return json::array({a.source, a.target, static_cast<int>(a.position)});
}

Action action_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw TranscriptError("malformed action");
  int p = j[2].get<int>();
  if (p < 0 || p > 2) throw TranscriptError("malformed action position");
  return {j[0].get<int>(), j[1].get<int>(), static_cast<Position>(p)};
}

json state_to_json(const WorldState& s) {
  json objects = json::array();
  for (const auto& o : s.objects) {
    objects.push_back({{"id", o.id},
                       {"kind", o.kind == ObjectKind::Cube ? "cube" : "sphere"},
                       {"color", o.color}});
  }
  json columns = json::array();
  for (const auto& [cell, stack] : s.columns) {
    columns.push_back({{"cell", json::array({cell.x, cell.y})}, {"stack", stack}});
  }
  return {{"objects", objects}, {"columns", columns}};
}

WorldState state_from_json(const json& j) {
  WorldState s;
  if (!j.contains("objects") || !j.contains("columns")) {
    throw TranscriptError("malformed state");
  }
  for (const auto& o : j["objects"]) {
    ObjectInstance obj;
    obj.id = o.at("id").get<int>();
    std::string kind = o.at("kind").get<std::string>();
    if (kind == "cube") {
      obj.kind = ObjectKind::Cube;
    } else if (kind == "sphere") {
      obj.kind = ObjectKind::Sphere;
    } else {
      throw TranscriptError("unknown object kind '" + kind + "'");
    }
    obj.color = o.at("color").get<std::string>();
    s.objects.push_back(std::move(obj));
  }
  std::sort(s.objects.begin(), s.objects.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  for (size_t i = 0; i < s.objects.size(); ++i) {
    if (s.objects[i].id != static_cast<int>(i)) {
      throw TranscriptError("object ids are not dense");
    }
  }
  std::vector<int> seen(s.objects.size(), 0);
  for (const auto& c : j["columns"]) {
    const auto& cell_j = c.at("cell");
    if (!cell_j.is_array() || cell_j.size() != 2) throw TranscriptError("malformed cell");
    Cell cell{cell_j[0].get<int>(), cell_j[1].get<int>()};
    if (s.columns.count(cell)) throw TranscriptError("duplicate column cell");
    std::vector<int> stack = c.at("stack").get<std::vector<int>>();
    if (stack.empty()) throw TranscriptError("empty column stored");
    for (int id : stack) {
      if (id < 0 || static_cast<size_t>(id) >= seen.size() || seen[static_cast<size_t>(id)]++) {
        throw TranscriptError("column stacks do not partition the objects");
      }
    }
    s.columns[cell] = std::move(stack);
  }
  for (int count : seen) {
    if (count != 1) throw TranscriptError("column stacks do not partition the objects");
  }
  return s;
}

json config_to_json(const ExperimentConfig& c) {
  json positions = json::array();
  for (Position p : c.positions) positions.push_back(static_cast<int>(p));
  return {{"n_cubes", c.n_cubes},
          {"n_spheres", c.n_spheres},
          {"positions", positions},
          {"template", template_name(c.prompt_template)},
          {"steps", c.steps},
          {"sessions", c.sessions},
          {"menu_size", c.menu_size},
          {"master_seed", u64_str(c.master_seed)}};
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  c.n_cubes = j.at("n_cubes").get<int>();
  c.n_spheres = j.at("n_spheres").get<int>();
  for (const auto& p : j.at("positions")) {
    int v = p.get<int>();
    if (v < 0 || v > 2) throw TranscriptError("unknown position code");
    c.positions.insert(static_cast<Position>(v));
  }
  c.prompt_template = template_from_name(j.at("template").get<std::string>());
  c.steps = j.at("steps").get<int>();
  c.sessions = j.at("sessions").get<int>();
  c.menu_size = j.at("menu_size").get<int>();
  c.master_seed = str_u64(j.at("master_seed").get<std::string>());
  return c;
}

json effect_to_json(const Effect& e) {
  if (const auto* s = std::get_if<Stacked>(&e)) {
    return {{"kind", "stacked"}, {"on", s->on}};
  }
  if (const auto* p = std::get_if<PlacedOnTable>(&e)) {
    return {{"kind", "placed_on_table"}, {"cell", json::array({p->cell.x, p->cell.y})}};
  }
  const auto& d = std::get<DroppedFromSphere>(e);
  return {{"kind", "dropped_from_sphere"},
          {"sphere", d.sphere},
          {"cell", json::array({d.cell.x, d.cell.y})}};
}

Effect effect_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "stacked") return Stacked{j.at("on").get<int>()};
  if (kind == "placed_on_table") {
    const auto& c = j.at("cell");
    return PlacedOnTable{{c[0].get<int>(), c[1].get<int>()}};
  }
  if (kind == "dropped_from_sphere") {
    const auto& c = j.at("cell");
    return DroppedFromSphere{j.at("sphere").get<int>(), {c[0].get<int>(), c[1].get<int>()}};
  }
  throw TranscriptError("unknown effect kind '" + kind + "'");
}

json query_log_to_json(const QueryLog& log) {
  json exchanges = json::array();
  for (const auto& ex : log.exchanges) {
    exchanges.push_back({{"request", ex.request_body},
                         {"response", ex.response_body},
                         {"content", ex.content}});
  }
  return {{"path", query_path_name(log.path)}, {"exchanges", exchanges}};
}

QueryLog query_log_from_json(const json& j) {
  QueryLog log;
  std::string path = j.at("path").get<std::string>();
  if (path == "direct") {
    log.path = QueryPath::Direct;
  } else if (path == "reask") {
    log.path = QueryPath::Reask;
  } else if (path == "fallback") {
    log.path = QueryPath::Fallback;
  } else {
    throw TranscriptError("unknown query path '" + path + "'");
  }
  for (const auto& ex : j.at("exchanges")) {
    log.exchanges.push_back({ex.at("request").get<std::string>(),
                             ex.at("response").get<std::string>(),
                             ex.at("content").get<std::string>()});
  }
  return log;
}

json decision_to_json(const Decision& d) {
  return {{"menu_index", d.menu_index},
          {"action", action_to_json(d.action)},
          {"source", decision_source_name(d.source)},
          {"rationale", d.rationale}};
}

Decision decision_from_json(const json& j) {
  Decision d;
  d.menu_index = j.at("menu_index").get<int>();
  d.action = action_from_json(j.at("action"));
  auto source = decision_source_from_name(j.at("source").get<std::string>());
  if (!source) throw TranscriptError("unknown decision source");
  d.source = *source;
  d.rationale = j.at("rationale").get<std::string>();
  return d;
}

struct FooterTotals {
  int steps = 0;
  bool complete = true;
  uint64_t final_state = 0;
  int final_height = 1;
  int max_height = 1;
};

// Totals are derived, never trusted: save recomputes them by replaying
// the decisions so a transcript is internally consistent by construction.
FooterTotals derive_totals(const Transcript& t) {
  FooterTotals totals;
  totals.steps = static_cast<int>(t.steps.size());
  totals.complete = t.complete;
  WorldState state = t.initial_state;
  totals.max_height = max_tower_height(state);
  for (const auto& rec : t.steps) {
    state = apply_action(state, rec.decision.action).first;
    totals.max_height = std::max(totals.max_height, max_tower_height(state));
  }
  totals.final_state = state_hash(state);
  totals.final_height = max_tower_height(state);
  return totals;
}

void require_same_registry(const WorldState& a, const WorldState& b,
                           const std::string& what) {
  bool same = a.objects.size() == b.objects.size();
  for (size_t i = 0; same && i < a.objects.size(); ++i) {
    same = a.objects[i].id == b.objects[i].id &&
           a.objects[i].kind == b.objects[i].kind &&
           a.objects[i].color == b.objects[i].color;
  }
  if (!same || !(a.columns == b.columns)) {
    throw TranscriptError(what);
  }
}

}  // namespace

uint64_t session_seed_of(uint64_t master_seed, int session_index) {
  return mix_seed(master_seed, static_cast<uint64_t>(session_index));
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "exp1", "exp2", "exp3", "exp4", "exp5", "tower-cubes", "tower-sphere"};
  return names;
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.steps = 10;
  c.sessions = 40;
  c.menu_size = 10;
  const std::set<Position> two = {Position::Top, Position::Next};
  const std::set<Position> three = {Position::Top, Position::Next, Position::Front};
  if (name == "exp1") {
    c.n_cubes = 4;
    c.positions = two;
  } else if (name == "exp2") {
    c.n_cubes = 5;
    c.positions = two;
  } else if (name == "exp3") {
    c.n_cubes = 5;
    c.positions = three;
  } else if (name == "exp4") {
    c.n_cubes = 5;
    c.positions = two;
    c.prompt_template = PromptTemplate::Novel;
  } else if (name == "exp5") {
    c.n_cubes = 4;
    c.n_spheres = 1;
    c.positions = three;
  } else if (name == "tower-cubes") {
    c.n_cubes = 5;
    c.positions = three;
    c.prompt_template = PromptTemplate::TowerTask;
  } else if (name == "tower-sphere") {
    c.n_cubes = 4;
    c.n_spheres = 1;
    c.positions = three;
    c.prompt_template = PromptTemplate::TowerTask;
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  return c;
}

void validate(const ExperimentConfig& config) {
  if (config.n_cubes < 0 || config.n_spheres < 0) {
    throw std::invalid_argument("object counts must be non-negative");
  }
  if (config.n_cubes + config.n_spheres < 2) {
    throw std::invalid_argument("need at least two objects");
  }
  if (config.positions.empty()) {
    throw std::invalid_argument("positions must be non-empty");
  }
  if (config.steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (config.sessions < 1) throw std::invalid_argument("sessions must be >= 1");
  if (config.menu_size < 0) throw std::invalid_argument("menu_size must be >= 0");
}

Transcript run_session(const ExperimentConfig& config, int session_index,
                       Policy& policy) {
  validate(config);
  Transcript t;
  t.config = config;
  t.session_index = session_index;
  t.session_seed = session_seed_of(config.master_seed, session_index);

  Rng scene_rng(mix_seed(t.session_seed, 1));
  Rng menu_rng(mix_seed(t.session_seed, 2));
  Rng policy_rng(mix_seed(t.session_seed, 3));

  WorldState state = init_scene({config.n_cubes, config.n_spheres}, scene_rng);
  t.initial_state = state;

  std::vector<HistoryEntry> history;
  for (int step = 1; step <= config.steps; ++step) {
    ActionMenu menu;
    if (config.menu_size == 0) {
      menu.entries = legal_actions(state, config.positions);
    } else {
      menu = build_menu(state, config.positions,
                        static_cast<size_t>(config.menu_size), menu_rng);
    }

    StepRecord rec;
    rec.step = step;
    rec.state_before = state_hash(state);
    rec.menu.actions = menu.entries;
    for (const Action& a : menu.entries) {
      rec.menu.phrases.push_back(action_phrase(a, state.objects));
    }

    try {
      rec.decision = policy.select(state, history, menu, policy_rng);
    } catch (const LlmError& e) {
      t.complete = false;
      t.abort_reason = e.what();
      break;
    }

    auto [next_state, effect] = apply_action(state, rec.decision.action);
    rec.effect = effect;
    rec.height_after = max_tower_height(next_state);
    history.push_back({rec.decision.action, action_phrase(rec.decision.action, state.objects)});
    state = std::move(next_state);
    t.steps.push_back(std::move(rec));
  }
  return t;
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const PolicyFactory& factory,
                                const std::filesystem::path& out_dir, int jobs,
                                const std::string& policy_label) {
  validate(config);
  std::filesystem::create_directories(out_dir);

  size_t n = static_cast<size_t>(config.sessions);
  std::vector<Transcript> transcripts(n);
  std::atomic<size_t> cursor{0};

  auto worker = [&] {
    while (true) {
      size_t i = cursor.fetch_add(1);
      if (i >= n) break;
      int index = static_cast<int>(i);
      try {
        std::unique_ptr<Policy> policy = factory(index);
        transcripts[i] = run_session(config, index, *policy);
      } catch (const std::exception& e) {
        Transcript t;
        t.config = config;
        t.session_index = index;
        t.session_seed = session_seed_of(config.master_seed, index);
        Rng scene_rng(mix_seed(t.session_seed, 1));
        t.initial_state = init_scene({config.n_cubes, config.n_spheres}, scene_rng);
        t.complete = false;
        t.abort_reason = e.what();
        transcripts[i] = std::move(t);
      }
    }
  };

  size_t n_workers = std::min<size_t>(n, static_cast<size_t>(std::max(1, jobs)));
  std::vector<std::thread> pool;
  for (size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  ExperimentResult result;
  result.manifest.config = config;
  result.manifest.policy_label = policy_label;
  for (size_t i = 0; i < n; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "session_%04d.jsonl", static_cast<int>(i));
    save_transcript(transcripts[i], out_dir / name);
    result.manifest.entries.push_back({name, static_cast<int>(i),
                                       transcripts[i].session_seed,
                                       transcripts[i].complete,
                                       transcripts[i].abort_reason});
  }
  save_manifest(result.manifest, out_dir / "manifest.json");
  result.transcripts = std::move(transcripts);
  return result;
}

void save_transcript(const Transcript& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TranscriptError("cannot open '" + path.string() + "' for writing");

  json header = {{"type", "header"},
                 {"schema_version", kSchemaVersion},
                 {"generator", t.generator},
                 {"session_index", t.session_index},
                 {"session_seed", u64_str(t.session_seed)},
                 {"config", config_to_json(t.config)},
                 {"initial_state", state_to_json(t.initial_state)}};
  out << header.dump() << "\n";

  for (const auto& rec : t.steps) {
    json menu = json::array();
    for (size_t i = 0; i < rec.menu.actions.size(); ++i) {
      menu.push_back({{"action", action_to_json(rec.menu.actions[i])},
                      {"phrase", rec.menu.phrases[i]}});
    }
    json line = {{"type", "step"},
                 {"step", rec.step},
                 {"state_before", hash_hex(rec.state_before)},
                 {"menu", menu},
                 {"decision", decision_to_json(rec.decision)},
                 {"effect", effect_to_json(rec.effect)},
                 {"height_after", rec.height_after}};
    if (rec.decision.query_log) {
      line["query_log"] = query_log_to_json(*rec.decision.query_log);
    }
    out << line.dump() << "\n";
  }

  FooterTotals totals = derive_totals(t);
  json footer = {{"type", "footer"},
                 {"steps", totals.steps},
                 {"complete", totals.complete},
                 {"final_state", hash_hex(totals.final_state)},
                 {"final_height", totals.final_height},
                 {"max_height", totals.max_height}};
  if (!t.complete) footer["abort_reason"] = t.abort_reason;
  out << footer.dump() << "\n";
  if (!out) throw TranscriptError("write failed for '" + path.string() + "'");
}

Transcript load_transcript(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TranscriptError("cannot open '" + path.string() + "'");

  Transcript t;
  bool have_header = false;
  bool have_footer = false;
  FooterTotals recorded;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw TranscriptError(path.string() + ":" + std::to_string(line_no) +
                            ": not valid JSON");
    }
    std::string type = j.value("type", "");
    if (type == "header") {
      if (have_header) throw TranscriptError("duplicate header");
      std::string version = j.value("schema_version", "");
      if (version != kSchemaVersion) {
        throw TranscriptError("unsupported schema version '" + version + "'");
      }
      t.generator = j.value("generator", "");
      t.session_index = j.at("session_index").get<int>();
      t.session_seed = str_u64(j.at("session_seed").get<std::string>());
      t.config = config_from_json(j.at("config"));
      t.initial_state = state_from_json(j.at("initial_state"));
      have_header = true;
    } else if (type == "step") {
      if (!have_header) throw TranscriptError("step before header");
      if (have_footer) throw TranscriptError("step after footer");
      StepRecord rec;
      rec.step = j.at("step").get<int>();
      rec.state_before = hex_hash(j.at("state_before").get<std::string>());
      for (const auto& entry : j.at("menu")) {
        rec.menu.actions.push_back(action_from_json(entry.at("action")));
        rec.menu.phrases.push_back(entry.at("phrase").get<std::string>());
      }
      rec.decision = decision_from_json(j.at("decision"));
      if (j.contains("query_log")) {
        rec.decision.query_log = query_log_from_json(j.at("query_log"));
      }
      rec.effect = effect_from_json(j.at("effect"));
      rec.height_after = j.at("height_after").get<int>();
      t.steps.push_back(std::move(rec));
    } else if (type == "footer") {
      if (!have_header) throw TranscriptError("footer before header");
      if (have_footer) throw TranscriptError("duplicate footer");
      recorded.steps = j.at("steps").get<int>();
      recorded.complete = j.at("complete").get<bool>();
      recorded.final_state = hex_hash(j.at("final_state").get<std::string>());
      recorded.final_height = j.at("final_height").get<int>();
      recorded.max_height = j.at("max_height").get<int>();
      t.complete = recorded.complete;
      t.abort_reason = j.value("abort_reason", "");
      have_footer = true;
    } else {
      throw TranscriptError("unknown line type '" + type + "'");
    }
  }
  if (!have_header) throw TranscriptError("missing header in " + path.string());
  if (!have_footer) throw TranscriptError("missing footer in " + path.string());
  if (recorded.steps != static_cast<int>(t.steps.size())) {
    throw TranscriptError("footer step count does not match the records");
  }

  FooterTotals derived = derive_totals(t);
  if (derived.final_state != recorded.final_state ||
      derived.final_height != recorded.final_height ||
      derived.max_height != recorded.max_height) {
    throw TranscriptError("footer totals do not match the records in " +
                          path.string());
  }
  return t;
}

void save_manifest(const Manifest& m, const std::filesystem::path& path) {
  json entries = json::array();
  for (const auto& e : m.entries) {
    json entry = {{"file", e.file},
                  {"session_index", e.session_index},
                  {"session_seed", u64_str(e.session_seed)},
                  {"complete", e.complete}};
    if (!e.complete) entry["abort_reason"] = e.abort_reason;
    entries.push_back(std::move(entry));
  }
  json doc = {{"schema_version", kSchemaVersion},
              {"generator", kGeneratorTag},
              {"config", config_to_json(m.config)},
              {"policy", m.policy_label},
              {"sessions", entries}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TranscriptError("cannot open '" + path.string() + "' for writing");
  out << doc.dump(2) << "\n";
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TranscriptError("cannot open '" + path.string() + "'");
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw TranscriptError("manifest is not valid JSON");
  std::string version = doc.value("schema_version", "");
  if (version != kSchemaVersion) {
    throw TranscriptError("unsupported schema version '" + version + "'");
  }
  Manifest m;
  m.config = config_from_json(doc.at("config"));
  m.policy_label = doc.value("policy", "");
  for (const auto& e : doc.at("sessions")) {
    m.entries.push_back({e.at("file").get<std::string>(),
                         e.at("session_index").get<int>(),
                         str_u64(e.at("session_seed").get<std::string>()),
                         e.at("complete").get<bool>(),
                         e.value("abort_reason", "")});
  }
  return m;
}

void verify_transcript(const Transcript& t) {
  validate(t.config);
  auto fail = [&](int step, const std::string& what) {
    throw TranscriptError("step " + std::to_string(step) + ": " + what);
  };

  if (t.session_seed != session_seed_of(t.config.master_seed, t.session_index)) {
    throw TranscriptError("session seed does not derive from the master seed");
  }
  if (t.complete && static_cast<int>(t.steps.size()) != t.config.steps) {
    throw TranscriptError("complete transcript with missing steps");
  }
  if (!t.complete && t.abort_reason.empty()) {
    throw TranscriptError("incomplete transcript without an abort reason");
  }

  Rng scene_rng(mix_seed(t.session_seed, 1));
  WorldState expected_init =
      init_scene({t.config.n_cubes, t.config.n_spheres}, scene_rng);
  require_same_registry(expected_init, t.initial_state,
                        "initial state does not derive from the session seed");

  Rng menu_rng(mix_seed(t.session_seed, 2));
  WorldState state = t.initial_state;
  size_t object_count = state.objects.size();
  for (size_t record = 0; record < t.steps.size(); ++record) {
    const StepRecord& rec = t.steps[record];
    int step = static_cast<int>(record) + 1;
    if (rec.step != step) fail(step, "step numbering out of sequence");
    ActionMenu menu;
    if (t.config.menu_size == 0) {
      menu.entries = legal_actions(state, t.config.positions);
    } else {
      menu = build_menu(state, t.config.positions,
                        static_cast<size_t>(t.config.menu_size), menu_rng);
    }
    if (menu.entries != rec.menu.actions) fail(step, "menu does not reproduce");
    for (size_t i = 0; i < menu.entries.size(); ++i) {
      if (action_phrase(menu.entries[i], state.objects) != rec.menu.phrases[i]) {
        fail(step, "menu phrase does not reproduce");
      }
    }
    if (state_hash(state) != rec.state_before) fail(step, "state hash mismatch");
    size_t idx = static_cast<size_t>(rec.decision.menu_index);
    if (rec.decision.menu_index < 1 || idx > menu.entries.size()) {
      fail(step, "decision index outside the menu");
    }
    if (!(menu.entries[idx - 1] == rec.decision.action)) {
      fail(step, "decision action is not the indexed menu entry");
    }
    auto [next_state, effect] = apply_action(state, rec.decision.action);
    if (!(effect == rec.effect)) fail(step, "effect mismatch");
    if (max_tower_height(next_state) != rec.height_after) {
      fail(step, "height mismatch");
    }
    size_t placed = 0;
    for (const auto& [cell, stack] : next_state.columns) placed += stack.size();
    if (placed != object_count) fail(step, "object conservation violated");
    state = std::move(next_state);
  }
}

std::vector<int> height_trajectory(const Transcript& t) {
  std::vector<int> heights;
  heights.push_back(max_tower_height(t.initial_state));
  for (const auto& rec : t.steps) heights.push_back(rec.height_after);
  return heights;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TranscriptError("cannot open '" + path.string() + "'");
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw TranscriptError("config file is not valid JSON");
  ExperimentConfig c = config_from_json(doc);
  validate(c);
  return c;
}

SceneSpec load_scene_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TranscriptError("cannot open '" + path.string() + "'");
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw TranscriptError("scene spec is not valid JSON");

  SceneSpec spec;
  spec.state = state_from_json(doc.at("state"));
  if (doc.contains("history")) {
    for (const auto& a : doc["history"]) spec.history.push_back(action_from_json(a));
  }
  if (doc.contains("menu")) {
    for (const auto& a : doc["menu"]) spec.menu.push_back(action_from_json(a));
  }
  if (doc.contains("positions")) {
    for (const auto& p : doc["positions"]) {
      int v = p.get<int>();
      if (v < 0 || v > 2) throw TranscriptError("unknown position code");
      spec.positions.insert(static_cast<Position>(v));
    }
  } else {
    spec.positions = {Position::Top, Position::Next, Position::Front};
  }
  return spec;
}

}  // namespace scaffold
