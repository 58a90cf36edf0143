#include "scaffold/policy.hpp"

#include <algorithm>
#include <set>

namespace scaffold {

namespace {

bool column_contains(const std::vector<int>& column, int id) {
  return std::find(column.begin(), column.end(), id) != column.end();
}

// All cubes share one column (the point at which the sphere may go on).
bool all_cubes_stacked(const WorldState& state) {
  const std::vector<int>* home = nullptr;
  for (const auto& obj : state.objects) {
    if (obj.kind != ObjectKind::Cube) continue;
    const std::vector<int>& column = state.columns.at(state.locate(obj.id).first);
    if (home == nullptr) {
      home = &column;
    } else if (home != &column) {
      return false;
    }
  }
  return true;
}

}  // namespace

const char* decision_source_name(DecisionSource source) {
  switch (source) {
    case DecisionSource::Policy: return "policy";
    case DecisionSource::LlmDirect: return "llm_direct";
    case DecisionSource::LlmReask: return "llm_reask";
    case DecisionSource::LlmFallback: return "llm_fallback";
    case DecisionSource::Replay: return "replay";
  }
  return "policy";
}

std::optional<DecisionSource> decision_source_from_name(const std::string& name) {
  if (name == "policy") return DecisionSource::Policy;
  if (name == "llm_direct") return DecisionSource::LlmDirect;
  if (name == "llm_reask") return DecisionSource::LlmReask;
  if (name == "llm_fallback") return DecisionSource::LlmFallback;
  if (name == "replay") return DecisionSource::Replay;
  return std::nullopt;
}

Decision RandomPolicy::select(const WorldState&, const std::vector<HistoryEntry>&,
                              const ActionMenu& menu, Rng& rng) {
  size_t i = rng.uniform_index(menu.entries.size());
  return {static_cast<int>(i) + 1, menu.entries[i], "", DecisionSource::Policy, {}};
}

Decision GreedyTowerPolicy::select(const WorldState& state,
                                   const std::vector<HistoryEntry>&,
                                   const ActionMenu& menu, Rng&) {
  // Target the tallest column a stack can actually grow on: one whose
  // top object is a cube. A sphere-topped column sheds anything put on
  // it, so it is never a stacking destination.
  const std::vector<int>* target_column = nullptr;
  int target_top = -1;
  for (const auto& [cell, column] : state.columns) {
    if (state.object(column.back()).kind != ObjectKind::Cube) continue;
    if (target_column == nullptr || column.size() > target_column->size()) {
      target_column = &column;
      target_top = column.back();
    }
  }

  bool sphere_ready = all_cubes_stacked(state);
  if (target_column != nullptr) {
    for (size_t i = 0; i < menu.entries.size(); ++i) {
      const Action& a = menu.entries[i];
      if (a.position != Position::Top || a.target != target_top) continue;
      if (column_contains(*target_column, a.source)) continue;
      if (state.object(a.source).kind == ObjectKind::Sphere && !sphere_ready) continue;
      return {static_cast<int>(i) + 1, a, "", DecisionSource::Policy, {}};
    }
  }
  for (size_t i = 0; i < menu.entries.size(); ++i) {
    if (menu.entries[i].position == Position::Top) {
      return {static_cast<int>(i) + 1, menu.entries[i], "", DecisionSource::Policy, {}};
    }
  }
  return {1, menu.entries.front(), "", DecisionSource::Policy, {}};
}

LlmPolicy::LlmPolicy(ChatClient& client, PromptTemplate prompt_template)
    : client_(&client), template_(prompt_template) {}

Decision LlmPolicy::select(const WorldState& state,
                           const std::vector<HistoryEntry>& history,
                           const ActionMenu& menu, Rng& rng) {
  std::string system_text = system_prompt(template_);
  std::string user_text = build_user_prompt(state, history, menu);
  QueryResult result =
      query_selection(*client_, system_text, user_text, menu.entries.size());

  Decision d;
  d.query_log = std::move(result.log);
  if (result.selection) {
    d.menu_index = result.selection->index;
    d.rationale = result.selection->reasoning;
    d.source = d.query_log->path == QueryPath::Direct ? DecisionSource::LlmDirect
                                                      : DecisionSource::LlmReask;
  } else {
    d.menu_index = static_cast<int>(rng.uniform_index(menu.entries.size())) + 1;
    d.source = DecisionSource::LlmFallback;
  }
  d.action = menu.entries[static_cast<size_t>(d.menu_index) - 1];
  return d;
}

ReplayPolicy::ReplayPolicy(std::vector<Step> steps) : steps_(std::move(steps)) {}

Decision ReplayPolicy::select(const WorldState& state,
                              const std::vector<HistoryEntry>&,
                              const ActionMenu& menu, Rng&) {
  if (cursor_ >= steps_.size()) {
    throw ReplayError("replay exhausted at step " + std::to_string(cursor_ + 1));
  }
  const Step& step = steps_[cursor_];
  uint64_t live = state_hash(state);
  if (live != step.state_hash) {
    throw ReplayError("state divergence at step " + std::to_string(cursor_ + 1));
  }
  const Decision& d = step.decision;
  size_t idx = static_cast<size_t>(d.menu_index);
  if (d.menu_index < 1 || idx > menu.entries.size() ||
      !(menu.entries[idx - 1] == d.action)) {
    throw ReplayError("menu divergence at step " + std::to_string(cursor_ + 1));
  }
  ++cursor_;
  Decision out = d;
  out.source = DecisionSource::Replay;
  return out;
}

}  // namespace scaffold
