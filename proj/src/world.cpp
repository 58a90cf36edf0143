#include "scaffold/world.hpp"

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <stdexcept>

namespace scaffold {

const ObjectInstance& WorldState::object(int id) const {
  if (id < 0 || static_cast<size_t>(id) >= objects.size()) {
    throw std::invalid_argument("unknown object id " + std::to_string(id));
  }
  return objects[static_cast<size_t>(id)];
}

std::pair<Cell, int> WorldState::locate(int id) const {
  for (const auto& [cell, column] : columns) {
    for (size_t i = 0; i < column.size(); ++i) {
      if (column[i] == id) return {cell, static_cast<int>(i)};
    }
  }
  throw std::logic_error("object " + std::to_string(id) + " missing from columns");
}

const std::vector<std::string>& color_palette() {
  static const std::vector<std::string> palette = {
      "orange", "green", "purple", "brown", "light green",
      "blue",   "black", "red",    "yellow", "pink"};
  return palette;
}

WorldState init_scene(const SceneConfig& config, Rng& rng) {
  if (config.n_cubes < 0 || config.n_spheres < 0) {
    throw std::invalid_argument("object counts must be non-negative");
  }
  int n = config.n_cubes + config.n_spheres;
  if (n < 2) {
    throw std::invalid_argument("scene needs at least two objects");
  }
  int capacity = kInitRegionSize * kInitRegionSize;
  if (n > capacity) {
    throw std::invalid_argument("object count " + std::to_string(n) +
                                " exceeds init region capacity " +
                                std::to_string(capacity));
  }
  if (static_cast<size_t>(n) > color_palette().size()) {
    throw std::invalid_argument("object count " + std::to_string(n) +
                                " exceeds color palette size " +
                                std::to_string(color_palette().size()));
  }

  std::vector<Cell> cells;
  cells.reserve(static_cast<size_t>(capacity));
  for (int x = 0; x < kInitRegionSize; ++x) {
    for (int y = 0; y < kInitRegionSize; ++y) cells.push_back({x, y});
  }
  rng.partial_shuffle(cells, static_cast<size_t>(n));

  WorldState state;
  state.objects.reserve(static_cast<size_t>(n));
  for (int id = 0; id < n; ++id) {
    ObjectKind kind = id < config.n_cubes ? ObjectKind::Cube : ObjectKind::Sphere;
    state.objects.push_back({id, kind, color_palette()[static_cast<size_t>(id)]});
    state.columns[cells[static_cast<size_t>(id)]] = {id};
  }
  return state;
}

std::vector<Action> legal_actions(const WorldState& state,
                                  const std::set<Position>& positions) {
  if (positions.empty()) {
    throw std::invalid_argument("positions must be non-empty");
  }
  int n = static_cast<int>(state.objects.size());
  std::vector<Action> out;
  out.reserve(static_cast<size_t>(n) * (n - 1) * positions.size());
  for (int source = 0; source < n; ++source) {
    for (int target = 0; target < n; ++target) {
      if (source == target) continue;
      for (Position p : positions) out.push_back({source, target, p});
    }
  }
  return out;
}

Cell nearest_free_cell(const WorldState& state, Cell origin) {
  if (!state.occupied(origin)) return origin;
  for (int d = 1;; ++d) {
    for (int x = origin.x - d; x <= origin.x + d; ++x) {
      int rem = d - std::abs(x - origin.x);
      Cell low{x, origin.y - rem};
      if (!state.occupied(low)) return low;
      if (rem != 0) {
        Cell high{x, origin.y + rem};
        if (!state.occupied(high)) return high;
      }
    }
  }
}

namespace {

// Lowest object resting directly on a sphere, in column order; nullopt when
// the state is stable.
struct Violation {
  Cell cell;
  size_t index;  // the object above the sphere
};

std::optional<Violation> find_violation(const WorldState& state) {
  for (const auto& [cell, column] : state.columns) {
    for (size_t i = 0; i + 1 < column.size(); ++i) {
      if (state.kind_of(column[i]) == ObjectKind::Sphere) {
        return Violation{cell, i + 1};
      }
    }
  }
  return std::nullopt;
}

}  // namespace

WorldState settle(WorldState state) {
  for (auto it = state.columns.begin(); it != state.columns.end();) {
    it = it->second.empty() ? state.columns.erase(it) : std::next(it);
  }
  while (auto v = find_violation(state)) {
    auto& column = state.columns.at(v->cell);
    int moved = column[v->index];
    column.erase(column.begin() + static_cast<long>(v->index));
    Cell landing = nearest_free_cell(state, v->cell);
    state.columns[landing] = {moved};
  }
  return state;
}

std::pair<WorldState, Effect> apply_action(const WorldState& state,
                                           const Action& action) {
  if (action.source == action.target) {
    throw std::invalid_argument("source and target must differ");
  }
  state.object(action.source);
  state.object(action.target);

  WorldState next = state;

  auto [source_cell, source_level] = next.locate(action.source);
  auto& source_column = next.columns.at(source_cell);
  source_column.erase(source_column.begin() + source_level);
  if (source_column.empty()) next.columns.erase(source_cell);

  Cell target_cell = next.locate(action.target).first;
  Cell dest = target_cell;
  switch (action.position) {
    case Position::Top: break;
    case Position::Next: dest.y += 1; break;
    case Position::Front: dest.x += 1; break;
  }

  Effect effect;
  auto it = next.columns.find(dest);
  if (it == next.columns.end()) {
    next.columns[dest] = {action.source};
    effect = PlacedOnTable{dest};
  } else if (next.kind_of(it->second.back()) == ObjectKind::Sphere) {
    // Whatever lands on a sphere slides off to the table.
    int sphere = it->second.back();
    Cell landing = nearest_free_cell(next, dest);
    next.columns[landing] = {action.source};
    effect = DroppedFromSphere{sphere, landing};
  } else {
    effect = Stacked{it->second.back()};
    it->second.push_back(action.source);
  }

  next = settle(std::move(next));
  return {std::move(next), effect};
}

int max_tower_height(const WorldState& state) {
  size_t best = 0;
  for (const auto& [cell, column] : state.columns) {
    best = std::max(best, column.size());
  }
  return static_cast<int>(best);
}

std::vector<Relation> relations(const WorldState& state) {
  std::vector<Relation> out;
  for (const auto& [cell, column] : state.columns) {
    for (size_t i = 1; i < column.size(); ++i) {
      out.push_back({column[i], column[i - 1], RelationKind::StackedOn});
    }
    auto same_level_neighbor = [&](Cell neighbor, size_t level) -> int {
      auto it = state.columns.find(neighbor);
      if (it == state.columns.end() || it->second.size() <= level) return -1;
      return it->second[level];
    };
    for (size_t level = 0; level < column.size(); ++level) {
      if (int behind = same_level_neighbor({cell.x, cell.y - 1}, level); behind >= 0) {
        out.push_back({column[level], behind, RelationKind::NextTo});
      }
      if (int left = same_level_neighbor({cell.x - 1, cell.y}, level); left >= 0) {
        out.push_back({column[level], left, RelationKind::InFrontOf});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Relation& a, const Relation& b) {
    if (a.subject != b.subject) return a.subject < b.subject;
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });
  return out;
}

uint64_t state_hash(const WorldState& state) {
  uint64_t h = 1469598103934665603ull;
  auto feed = [&h](int64_t value) {
    for (int i = 0; i < 8; ++i) {
      h ^= static_cast<uint64_t>(value >> (8 * i)) & 0xFFull;
      h *= 1099511628211ull;
    }
  };
  for (const auto& [cell, column] : state.columns) {
    feed(cell.x);
    feed(cell.y);
    feed(static_cast<int64_t>(column.size()));
    for (int id : column) feed(id);
  }
  return h;
}

}  // namespace scaffold
