#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "scaffold/describe.hpp"
#include "scaffold/policy.hpp"
#include "scaffold/world.hpp"

namespace scaffold {

inline constexpr const char* kSchemaVersion = "1";
inline constexpr const char* kGeneratorTag = "scaffold 0.1.0";

struct ExperimentConfig {
  int n_cubes = 0;
  int n_spheres = 0;
  std::set<Position> positions;
  PromptTemplate prompt_template = PromptTemplate::Interesting;
  int steps = 10;
  int sessions = 40;
  int menu_size = 10;  // 0 offers the full legal menu, unsampled
  uint64_t master_seed = 0;
};

// Named experiment setups; throws std::invalid_argument on unknown names.
ExperimentConfig preset(const std::string& name);
const std::vector<std::string>& preset_names();

// Throws std::invalid_argument when a field is out of contract.
void validate(const ExperimentConfig& config);

struct MenuRecord {
  std::vector<Action> actions;
  std::vector<std::string> phrases;  // parallel to actions
};

struct StepRecord {
  int step = 0;  // 1-based
  uint64_t state_before = 0;
  MenuRecord menu;
  Decision decision;
  Effect effect;
  int height_after = 1;
};

struct Transcript {
  ExperimentConfig config;
  int session_index = 0;
  uint64_t session_seed = 0;
  std::string generator = kGeneratorTag;
  WorldState initial_state;
  std::vector<StepRecord> steps;
  bool complete = true;
  std::string abort_reason;  // non-empty iff !complete
};

class TranscriptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Seed derivation, exposed so external checks can pin the streams.
uint64_t session_seed_of(uint64_t master_seed, int session_index);

// One 10-interaction episode. LLM transport/API failures end the session
// early with a partial transcript marked incomplete; everything else throws.
Transcript run_session(const ExperimentConfig& config, int session_index,
                       Policy& policy);

// One policy instance per session; sessions may run on different threads,
// so the factory must hand out either fresh or thread-safe instances.
using PolicyFactory = std::function<std::unique_ptr<Policy>(int session_index)>;

struct ManifestEntry {
  std::string file;
  int session_index = 0;
  uint64_t session_seed = 0;
  bool complete = true;
  std::string abort_reason;
};

struct Manifest {
  ExperimentConfig config;
  std::string policy_label;
  std::vector<ManifestEntry> entries;
};

struct ExperimentResult {
  std::vector<Transcript> transcripts;  // ordered by session index
  Manifest manifest;
};

// Runs config.sessions independent sessions, up to `jobs` at a time, and
// persists one JSONL transcript per session plus manifest.json under
// out_dir. Session aborts are recorded, not fatal.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const PolicyFactory& factory,
                                const std::filesystem::path& out_dir, int jobs,
                                const std::string& policy_label);

// JSONL persistence: header line, one line per step, footer with totals.
void save_transcript(const Transcript& transcript, const std::filesystem::path& path);
Transcript load_transcript(const std::filesystem::path& path);

void save_manifest(const Manifest& manifest, const std::filesystem::path& path);
Manifest load_manifest(const std::filesystem::path& path);

// Re-simulates the whole transcript from its recorded seeds and decisions;
// throws TranscriptError naming the first diverging step if any recorded
// hash, menu, effect, or height does not reproduce.
void verify_transcript(const Transcript& transcript);

// Instantaneous max height per step, index 0 = initial state.
std::vector<int> height_trajectory(const Transcript& transcript);

// Config file support (JSON mirroring ExperimentConfig).
ExperimentConfig load_config_file(const std::filesystem::path& path);

// Scene spec for prompt debugging: an explicit state, optional executed
// action history, optional explicit menu, optional position set.
struct SceneSpec {
  WorldState state;
  std::vector<Action> history;
  std::vector<Action> menu;      // empty = derive from positions
  std::set<Position> positions;  // defaults to all three
};

SceneSpec load_scene_spec(const std::filesystem::path& path);

}  // namespace scaffold
