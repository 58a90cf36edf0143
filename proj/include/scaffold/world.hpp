#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "scaffold/rng.hpp"

namespace scaffold {

enum class ObjectKind { Cube, Sphere };

struct ObjectInstance {
  int id = 0;
  ObjectKind kind = ObjectKind::Cube;
  std::string color;
};

// Integer table coordinate. One grid step equals one placement offset:
// "next" is +y, "front" is +x. The table is unbounded; initial placement is
// confined to [0, kInitRegionSize)^2.
struct Cell {
  int x = 0;
  int y = 0;
  auto operator<=>(const Cell&) const = default;
};

// Relative placement, integer codes fixed by the wire format.
enum class Position : int { Top = 0, Next = 1, Front = 2 };

// Pick-and-place tuple: grasp `source`, place it relative to `target`.
struct Action {
  int source = 0;
  int target = 0;
  Position position = Position::Top;
  auto operator<=>(const Action&) const = default;
};

// Where the grasped object finally came to rest.
struct Stacked {
  int on = 0;  // object it landed on
  auto operator<=>(const Stacked&) const = default;
};
struct PlacedOnTable {
  Cell cell;
  auto operator<=>(const PlacedOnTable&) const = default;
};
struct DroppedFromSphere {
  int sphere = 0;  // sphere it slid off
  Cell cell;       // landing cell, free before the drop
  auto operator<=>(const DroppedFromSphere&) const = default;
};
using Effect = std::variant<Stacked, PlacedOnTable, DroppedFromSphere>;

enum class RelationKind : int { StackedOn = 0, NextTo = 1, InFrontOf = 2 };

struct Relation {
  int subject = 0;
  int object = 0;
  RelationKind kind = RelationKind::StackedOn;
  auto operator<=>(const Relation&) const = default;
};

struct SceneConfig {
  int n_cubes = 0;
  int n_spheres = 0;
};

// Symbolic tabletop scene. `columns` maps occupied cells to their object
// stack, bottom to top; empty columns are never stored. Object ids are dense
// 0..n-1 and index `objects`. A settled state never has anything directly
// above a sphere.
struct WorldState {
  std::vector<ObjectInstance> objects;
  std::map<Cell, std::vector<int>> columns;

  bool operator==(const WorldState& other) const {
    return columns == other.columns && objects.size() == other.objects.size();
  }

  const ObjectInstance& object(int id) const;
  ObjectKind kind_of(int id) const { return object(id).kind; }
  bool occupied(Cell c) const { return columns.find(c) != columns.end(); }
  // Column cell and stack index (0 = table level) of an object.
  std::pair<Cell, int> locate(int id) const;
};

inline constexpr int kInitRegionSize = 5;

// Color names assigned to ids in order; also the bound on scene size since
// colors double as unique identifiers in prompts.
const std::vector<std::string>& color_palette();

// Scatters the objects over distinct cells of the init region, one per
// column. Cubes get ids 0..n_cubes-1, spheres the remaining ids.
WorldState init_scene(const SceneConfig& config, Rng& rng);

// Every (source, target, p) with source != target and p allowed, ordered by
// (source, target, p) ascending. Size is n*(n-1)*|positions| at any state.
std::vector<Action> legal_actions(const WorldState& state,
                                  const std::set<Position>& positions);

// Executes one pick-and-place: detach the source (objects above close the
// gap), land it at the target column (Top) or the +y/+x neighbor column
// (Next/Front), then let anything resting on a sphere drop to the nearest
// free cell. Pure; returns the new state and where the source ended up.
std::pair<WorldState, Effect> apply_action(const WorldState& state,
                                           const Action& action);

// Fixed point of gap-closing and sphere-drop cascades. Idempotent; a no-op
// on states produced by apply_action.
WorldState settle(WorldState state);

// Empty cell minimizing (Manhattan distance to origin, x, y) lexicographically.
Cell nearest_free_cell(const WorldState& state, Cell origin);

// Length of the longest column.
int max_tower_height(const WorldState& state);

// StackedOn for adjacent stack neighbors plus NextTo/InFrontOf for same-level
// objects one cell apart (+y / +x), sorted by (subject id, relation kind).
std::vector<Relation> relations(const WorldState& state);

// FNV-1a over the canonical serialization of sorted (cell, column) pairs.
// Stable across platforms; transcripts store it to detect replay divergence.
uint64_t state_hash(const WorldState& state);

}  // namespace scaffold
