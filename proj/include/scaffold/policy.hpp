#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scaffold/describe.hpp"
#include "scaffold/llm.hpp"
#include "scaffold/rng.hpp"
#include "scaffold/world.hpp"

namespace scaffold {

enum class DecisionSource { Policy, LlmDirect, LlmReask, LlmFallback, Replay };

const char* decision_source_name(DecisionSource source);
std::optional<DecisionSource> decision_source_from_name(const std::string& name);

struct Decision {
  int menu_index = 0;  // 1-based into the offered menu
  Action action;
  std::string rationale;
  DecisionSource source = DecisionSource::Policy;
  std::optional<QueryLog> query_log;  // LLM selections only
};

class Policy {
 public:
  virtual ~Policy() = default;
  // rng is the per-session policy stream; deterministic policies ignore it.
  virtual Decision select(const WorldState& state,
                          const std::vector<HistoryEntry>& history,
                          const ActionMenu& menu, Rng& rng) = 0;
};

class RandomPolicy final : public Policy {
 public:
  Decision select(const WorldState& state, const std::vector<HistoryEntry>& history,
                  const ActionMenu& menu, Rng& rng) override;
};

// Scripted oracle: builds the tallest possible tower, sphere last.
class GreedyTowerPolicy final : public Policy {
 public:
  Decision select(const WorldState& state, const std::vector<HistoryEntry>& history,
                  const ActionMenu& menu, Rng& rng) override;
};

class LlmPolicy final : public Policy {
 public:
  LlmPolicy(ChatClient& client, PromptTemplate prompt_template);
  Decision select(const WorldState& state, const std::vector<HistoryEntry>& history,
                  const ActionMenu& menu, Rng& rng) override;

 private:
  ChatClient* client_;
  PromptTemplate template_;
};

class ReplayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Feeds back previously recorded decisions, checking at every step that
// the live state matches the state the decision was recorded against.
class ReplayPolicy final : public Policy {
 public:
  struct Step {
    uint64_t state_hash = 0;
    Decision decision;
  };

  explicit ReplayPolicy(std::vector<Step> steps);
  Decision select(const WorldState& state, const std::vector<HistoryEntry>& history,
                  const ActionMenu& menu, Rng& rng) override;

 private:
  std::vector<Step> steps_;
  size_t cursor_ = 0;
};

}  // namespace scaffold
