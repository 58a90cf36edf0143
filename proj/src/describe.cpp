#include "scaffold/describe.hpp"

#include <sstream>
#include <stdexcept>

namespace scaffold {

namespace {

const char* kind_word(ObjectKind kind) {
  return kind == ObjectKind::Cube ? "cube" : "sphere";
}

bool vowel_initial(const std::string& word) {
  if (word.empty()) return false;
  switch (word[0]) {
    case 'a': case 'e': case 'i': case 'o': case 'u':
      return true;
    default:
      return false;
  }
}

constexpr const char* kInterestingPrompt =
    "There are some objects on the table. Which manipulation alternative on "
    "them yields an interesting outcome? Choose one and explain.\n"
    "\n"
    "Your output should be in the following format:\n"
    "\n"
    "<reasoning> some sentences </reasoning>\n"
    "\n"
    "Selected action is : <number of the selected action>";

constexpr const char* kTowerPrompt =
    "There are some objects on the table. For building the highest possible "
    "tower with the objects given below, select the most appropriate "
    "manipulation action. Choose one and explain.\n"
    "Your output should be in the following format:\n"
    "\n"
    "<reasoning> some sentences </reasoning>\n"
    "\n"
    "Selected action is : <number of the selected action>";

}  // namespace

std::string object_label(const ObjectInstance& obj) {
  return "the " + obj.color + " " + kind_word(obj.kind);
}

std::string indefinite_label(const ObjectInstance& obj) {
  const char* article = vowel_initial(obj.color) ? "an " : "a ";
  return article + obj.color + " " + kind_word(obj.kind);
}

std::string scene_sentence(const WorldState& state) {
  if (state.objects.empty()) {
    throw std::invalid_argument("scene_sentence needs at least one object");
  }
  std::string list;
  size_t n = state.objects.size();
  for (size_t i = 0; i < n; ++i) {
    if (i > 0) {
      if (n == 2) {
        list += " and ";
      } else {
        list += i + 1 == n ? ", and " : ", ";
      }
    }
    list += indefinite_label(state.objects[i]);
  }
  return "There is " + list + " in the current scene.";
}

std::string relation_sentence(const Relation& rel,
                              const std::vector<ObjectInstance>& registry) {
  const char* verb = nullptr;
  switch (rel.kind) {
    case RelationKind::StackedOn: verb = " is stacked on "; break;
    case RelationKind::NextTo: verb = " is next to "; break;
    case RelationKind::InFrontOf: verb = " is in front of "; break;
  }
  return object_label(registry[static_cast<size_t>(rel.subject)]) + verb +
         object_label(registry[static_cast<size_t>(rel.object)]) + ".";
}

std::string action_phrase(const Action& action,
                          const std::vector<ObjectInstance>& registry) {
  const char* connective = nullptr;
  switch (action.position) {
    case Position::Top: connective = " on top of "; break;
    case Position::Next: connective = " next to "; break;
    case Position::Front: connective = " in front of "; break;
  }
  return "Put " + object_label(registry[static_cast<size_t>(action.source)]) +
         connective + object_label(registry[static_cast<size_t>(action.target)]);
}

std::string build_user_prompt(const WorldState& state,
                              const std::vector<HistoryEntry>& history,
                              const ActionMenu& menu) {
  if (menu.entries.empty()) {
    throw std::invalid_argument("menu must be non-empty");
  }
  std::vector<std::string> blocks;
  blocks.push_back(scene_sentence(state));

  auto rels = relations(state);
  if (!rels.empty()) {
    std::string block;
    for (size_t i = 0; i < rels.size(); ++i) {
      if (i > 0) block += "\n";
      block += relation_sentence(rels[i], state.objects);
    }
    blocks.push_back(block);
  }

  if (!history.empty()) {
    std::string block = "Previously executed actions:";
    for (const auto& entry : history) block += "\n" + entry.phrase;
    blocks.push_back(block);
  }

  std::string block = "Possible actions:";
  for (size_t i = 0; i < menu.entries.size(); ++i) {
    block += "\n" + std::to_string(i + 1) + " ) " +
             action_phrase(menu.entries[i], state.objects);
  }
  blocks.push_back(block);

  std::string prompt;
  for (size_t i = 0; i < blocks.size(); ++i) {
    if (i > 0) prompt += "\n\n";
    prompt += blocks[i];
  }
  return prompt;
}

std::string system_prompt(PromptTemplate tmpl) {
  switch (tmpl) {
    case PromptTemplate::Interesting:
      return kInterestingPrompt;
    case PromptTemplate::Novel: {
      std::string text = kInterestingPrompt;
      auto pos = text.find("an interesting");
      text.replace(pos, std::string("an interesting").size(), "a novel");
      return text;
    }
    case PromptTemplate::TowerTask:
      return kTowerPrompt;
  }
  throw std::logic_error("unreachable");
}

ActionMenu build_menu(const WorldState& state,
                      const std::set<Position>& positions, int menu_size,
                      Rng& rng) {
  if (menu_size < 1) {
    throw std::invalid_argument("menu_size must be positive");
  }
  std::vector<Action> pool = legal_actions(state, positions);
  size_t k = std::min(static_cast<size_t>(menu_size), pool.size());
  rng.partial_shuffle(pool, k);
  pool.resize(k);
  return ActionMenu{std::move(pool)};
}

const char* template_name(PromptTemplate tmpl) {
  switch (tmpl) {
    case PromptTemplate::Interesting: return "interesting";
    case PromptTemplate::Novel: return "novel";
    case PromptTemplate::TowerTask: return "tower";
  }
  throw std::logic_error("unreachable");
}

PromptTemplate template_from_name(const std::string& name) {
  if (name == "interesting") return PromptTemplate::Interesting;
  if (name == "novel") return PromptTemplate::Novel;
  if (name == "tower") return PromptTemplate::TowerTask;
  throw std::invalid_argument("unknown prompt template: " + name);
}

}  // namespace scaffold
