#pragma once

#include <string>
#include <vector>

#include "scaffold/world.hpp"

namespace scaffold {

// Wording of the system prompt: the open-ended exploration request with the
// "interesting" or "novel" adjective, or the explicit tower-building task.
enum class PromptTemplate { Interesting, Novel, TowerTask };

// One executed action plus the phrase it was offered as.
struct HistoryEntry {
  Action action;
  std::string phrase;
};

// Ordered subset of legal actions offered for selection; rendered 1-indexed.
struct ActionMenu {
  std::vector<Action> entries;
};

// "the {color} {cube|sphere}".
std::string object_label(const ObjectInstance& obj);
// "a"/"an" chosen by vowel-initial color name.
std::string indefinite_label(const ObjectInstance& obj);

// "There is <labels in id order> in the current scene."
std::string scene_sentence(const WorldState& state);

// "the A is stacked on|next to|in front of the B." (lowercase, trailing period)
std::string relation_sentence(const Relation& rel,
                              const std::vector<ObjectInstance>& registry);

// "Put the <source> on top of|next to|in front of the <target>" (no period)
std::string action_phrase(const Action& action,
                          const std::vector<ObjectInstance>& registry);

// Scene block, relation lines, optional history block, numbered menu block,
// blocks separated by blank lines. Menu lines read "1 ) <phrase>".
std::string build_user_prompt(const WorldState& state,
                              const std::vector<HistoryEntry>& history,
                              const ActionMenu& menu);

// Verbatim template text; the Novel variant swaps "an interesting" for
// "a novel" and changes nothing else.
std::string system_prompt(PromptTemplate tmpl);

// Uniform sample without replacement of min(menu_size, legal) actions, in the
// order the draw produced them.
ActionMenu build_menu(const WorldState& state,
                      const std::set<Position>& positions, int menu_size,
                      Rng& rng);

const char* template_name(PromptTemplate tmpl);
PromptTemplate template_from_name(const std::string& name);

}  // namespace scaffold
