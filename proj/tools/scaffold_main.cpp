#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "scaffold/metrics.hpp"
#include "scaffold/session.hpp"

using namespace scaffold;

namespace {

// Argument problems found after CLI11 parsing; mapped to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? v : fallback;
}

int parse_menu_size(const std::string& text) {
  if (text == "full") return 0;
  try {
    size_t used = 0;
    int v = std::stoi(text, &used);
    if (used != text.size() || v < 1) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError("--menu-size expects a positive integer or 'full'");
  }
}

struct CommonArgs {
  std::string preset_name;
  std::string config_path;
  std::optional<std::string> template_name_arg;
  std::optional<int> sessions;
  std::optional<int> steps;
  std::optional<std::string> menu_size;
  std::optional<uint64_t> seed;
};

ExperimentConfig resolve_config(const CommonArgs& args) {
  ExperimentConfig config;
  if (!args.config_path.empty()) {
    config = load_config_file(args.config_path);
  } else if (!args.preset_name.empty()) {
    try {
      config = preset(args.preset_name);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  } else {
    throw UsageError("one of --preset or --config is required");
  }
  if (args.template_name_arg) {
    try {
      config.prompt_template = template_from_name(*args.template_name_arg);
    } catch (const std::exception&) {
      throw UsageError("unknown template '" + *args.template_name_arg + "'");
    }
  }
  if (args.sessions) config.sessions = *args.sessions;
  if (args.steps) config.steps = *args.steps;
  if (args.menu_size) config.menu_size = parse_menu_size(*args.menu_size);
  if (args.seed) config.master_seed = *args.seed;
  try {
    validate(config);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return config;
}

void print_means(const Summary& summary) {
  std::printf("mean height per step (%d sessions):\n", summary.sessions);
  for (int step = 0; step <= summary.steps; ++step) {
    std::printf("  step %2d: %.4f\n", step,
                summary.mean_height[static_cast<size_t>(step)]);
  }
}

std::vector<Transcript> complete_only(const std::vector<Transcript>& all) {
  std::vector<Transcript> done;
  for (const auto& t : all) {
    if (t.complete) {
      done.push_back(t);
    } else {
      std::fprintf(stderr, "note: session %d incomplete (%s), excluded from metrics\n",
                   t.session_index, t.abort_reason.c_str());
    }
  }
  return done;
}

void write_metrics(const Summary& summary, const std::filesystem::path& dir) {
  export_summary(summary, dir / "summary.csv", "csv");
  export_summary(summary, dir / "summary.json", "json");
  export_matrix(summary.matrix, dir / "matrix.csv", "csv");
  export_sessions(summary, dir / "sessions.csv", "csv");
}

int cmd_run(const CommonArgs& common, const std::string& policy_name,
            const std::string& out_dir, std::optional<int> jobs_arg,
            const std::string& model_flag, const std::string& base_url_flag,
            const std::string& replay_from) {
  ExperimentConfig config = resolve_config(common);
  if (out_dir.empty()) throw UsageError("--out is required for run");

  std::shared_ptr<ChatClient> client;  // shared across sessions when llm
  PolicyFactory factory;
  if (policy_name == "random") {
    factory = [](int) -> std::unique_ptr<Policy> {
      return std::make_unique<RandomPolicy>();
    };
  } else if (policy_name == "greedy") {
    factory = [](int) -> std::unique_ptr<Policy> {
      return std::make_unique<GreedyTowerPolicy>();
    };
  } else if (policy_name == "llm") {
    EndpointConfig endpoint;
    endpoint.api_key = env_or("LLM_API_KEY", "");
    if (endpoint.api_key.empty()) {
      throw UsageError("--policy llm requires the LLM_API_KEY environment variable");
    }
    endpoint.base_url =
        !base_url_flag.empty() ? base_url_flag : env_or("LLM_BASE_URL", endpoint.base_url);
    endpoint.model = !model_flag.empty() ? model_flag : env_or("LLM_MODEL", endpoint.model);
    client = std::make_shared<ChatClient>(endpoint);
    PromptTemplate tmpl = config.prompt_template;
    factory = [client, tmpl](int) -> std::unique_ptr<Policy> {
      return std::make_unique<LlmPolicy>(*client, tmpl);
    };
  } else if (policy_name == "replay") {
    if (replay_from.empty()) {
      throw UsageError("--policy replay requires --replay-from");
    }
    std::filesystem::path source(replay_from);
    factory = [source](int index) -> std::unique_ptr<Policy> {
      char name[32];
      std::snprintf(name, sizeof name, "session_%04d.jsonl", index);
      Transcript t = load_transcript(source / name);
      std::vector<ReplayPolicy::Step> steps;
      for (const auto& rec : t.steps) {
        steps.push_back({rec.state_before, rec.decision});
      }
      return std::make_unique<ReplayPolicy>(std::move(steps));
    };
  } else {
    throw UsageError("unknown policy '" + policy_name + "'");
  }

  int jobs = jobs_arg.value_or(
      policy_name == "llm" ? 1
                           : static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
  if (jobs < 1) throw UsageError("--jobs must be >= 1");

  ExperimentResult result =
      run_experiment(config, factory, out_dir, jobs, policy_name);

  std::vector<Transcript> done = complete_only(result.transcripts);
  if (done.empty()) {
    std::fprintf(stderr, "error: every session aborted\n");
    return 1;
  }
  Summary summary = summarize(height_matrix(done));
  write_metrics(summary, out_dir);
  print_means(summary);
  std::printf("wrote %zu transcripts and metrics to %s\n",
              result.transcripts.size(), out_dir.c_str());
  return 0;
}

int cmd_analyze(const std::string& in_dir, const std::string& out_dir,
                const std::string& compare_dir) {
  std::filesystem::path dir(in_dir);
  Manifest manifest = load_manifest(dir / "manifest.json");

  std::vector<Transcript> all;
  for (const auto& entry : manifest.entries) {
    std::filesystem::path file = dir / entry.file;
    try {
      Transcript t = load_transcript(file);
      verify_transcript(t);
      all.push_back(std::move(t));
    } catch (const TranscriptError& e) {
      std::fprintf(stderr, "integrity failure in %s: %s\n", file.string().c_str(),
                   e.what());
      return 1;
    }
  }
  std::vector<Transcript> done = complete_only(all);
  if (done.empty()) {
    std::fprintf(stderr, "error: no complete sessions to analyze\n");
    return 1;
  }
  Summary summary = summarize(height_matrix(done));
  std::filesystem::path out = out_dir.empty() ? dir : std::filesystem::path(out_dir);
  std::filesystem::create_directories(out);
  write_metrics(summary, out);
  print_means(summary);

  if (!compare_dir.empty()) {
    std::filesystem::path other_dir(compare_dir);
    std::vector<Transcript> other_all;
    for (const auto& entry : load_manifest(other_dir / "manifest.json").entries) {
      Transcript t = load_transcript(other_dir / entry.file);
      verify_transcript(t);
      other_all.push_back(std::move(t));
    }
    std::vector<Transcript> other_done = complete_only(other_all);
    if (other_done.empty()) {
      std::fprintf(stderr, "error: no complete sessions in %s\n", compare_dir.c_str());
      return 1;
    }
    Summary other = summarize(height_matrix(other_done));
    Comparison cmp = compare(summary, other);
    export_comparison(cmp, out / "comparison.csv", "csv");
    export_comparison(cmp, out / "comparison.json", "json");
    std::printf("reach difference vs %s: %+.4f [%+.4f, %+.4f]\n",
                compare_dir.c_str(), cmp.reach_diff, cmp.reach_lo, cmp.reach_hi);
  }
  return 0;
}

int cmd_print_prompt(const std::string& scene_path, const std::string& transcript_path,
                     int step_arg, const std::string& template_arg) {
  std::string system_text;
  std::string user_text;

  if (!scene_path.empty()) {
    SceneSpec spec = load_scene_spec(scene_path);
    PromptTemplate tmpl = PromptTemplate::Interesting;
    if (!template_arg.empty()) {
      try {
        tmpl = template_from_name(template_arg);
      } catch (const std::exception&) {
        throw UsageError("unknown template '" + template_arg + "'");
      }
    }
    std::vector<HistoryEntry> history;
    for (const Action& a : spec.history) {
      history.push_back({a, action_phrase(a, spec.state.objects)});
    }
    ActionMenu menu;
    menu.entries =
        spec.menu.empty() ? legal_actions(spec.state, spec.positions) : spec.menu;
    system_text = system_prompt(tmpl);
    user_text = build_user_prompt(spec.state, history, menu);
  } else if (!transcript_path.empty()) {
    Transcript t = load_transcript(transcript_path);
    if (step_arg < 0 || static_cast<size_t>(step_arg) >= t.steps.size()) {
      std::fprintf(stderr, "error: step %d out of range (transcript has %zu)\n",
                   step_arg, t.steps.size());
      return 1;
    }
    WorldState state = t.initial_state;
    std::vector<HistoryEntry> history;
    for (int i = 0; i < step_arg; ++i) {
      const Action& a = t.steps[static_cast<size_t>(i)].decision.action;
      history.push_back({a, action_phrase(a, state.objects)});
      state = apply_action(state, a).first;
    }
    ActionMenu menu;
    menu.entries = t.steps[static_cast<size_t>(step_arg)].menu.actions;
    system_text = system_prompt(t.config.prompt_template);
    user_text = build_user_prompt(state, history, menu);
  } else {
    throw UsageError("print-prompt needs --scene or --transcript");
  }

  std::printf("--- system ---\n%s\n--- user ---\n%s\n", system_text.c_str(),
              user_text.c_str());
  return 0;
}

int cmd_replay(const std::string& path_arg) {
  std::filesystem::path path(path_arg);
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(path)) {
    for (const auto& entry : load_manifest(path / "manifest.json").entries) {
      files.push_back(path / entry.file);
    }
  } else {
    files.push_back(path);
  }

  std::vector<Transcript> complete;
  for (const auto& file : files) {
    try {
      Transcript t = load_transcript(file);
      verify_transcript(t);
      std::printf("%s: ok (%zu steps, final height %d)\n", file.string().c_str(),
                  t.steps.size(),
                  height_trajectory(t).back());
      if (t.complete) complete.push_back(std::move(t));
    } catch (const TranscriptError& e) {
      std::fprintf(stderr, "replay failed for %s: %s\n", file.string().c_str(),
                   e.what());
      return 1;
    }
  }
  if (!complete.empty()) {
    print_means(summarize(height_matrix(complete)));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symbolic tabletop exploration harness"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string policy_name = "random";
  std::string out_dir;
  std::optional<int> jobs;
  std::string model_flag;
  std::string base_url_flag;
  std::string replay_from;

  CLI::App* run = app.add_subcommand("run", "Run an experiment");
  auto* preset_opt = run->add_option("--preset", common.preset_name, "Named preset");
  run->add_option("--config", common.config_path, "Experiment config JSON")
      ->excludes(preset_opt);
  run->add_option("--policy", policy_name, "random|greedy|llm|replay");
  run->add_option("--template", common.template_name_arg, "interesting|novel|tower");
  run->add_option("--sessions", common.sessions, "Session count override");
  run->add_option("--steps", common.steps, "Steps per session override");
  run->add_option("--menu-size", common.menu_size, "Menu size or 'full'");
  run->add_option("--seed", common.seed, "Master seed");
  run->add_option("--jobs", jobs, "Max concurrent sessions");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--model", model_flag, "Model name override");
  run->add_option("--base-url", base_url_flag, "Endpoint base URL override");
  run->add_option("--replay-from", replay_from, "Transcript directory for --policy replay");

  std::string analyze_in;
  std::string analyze_out;
  std::string compare_dir;
  CLI::App* analyze = app.add_subcommand("analyze", "Validate and summarize transcripts");
  analyze->add_option("dir", analyze_in, "Transcript directory")->required();
  analyze->add_option("--out", analyze_out, "Metrics output directory");
  analyze->add_option("--compare", compare_dir, "Second directory to compare against");

  std::string scene_path;
  std::string transcript_path;
  int step_arg = 0;
  std::string prompt_template_arg;
  CLI::App* print_prompt = app.add_subcommand("print-prompt", "Show the exact prompts");
  print_prompt->add_option("--scene", scene_path, "Scene spec JSON");
  print_prompt->add_option("--transcript", transcript_path, "Recorded transcript");
  print_prompt->add_option("--step", step_arg, "0-based interaction index");
  print_prompt->add_option("--template", prompt_template_arg, "interesting|novel|tower");

  std::string replay_path;
  CLI::App* replay = app.add_subcommand("replay", "Re-simulate and verify transcripts");
  replay->add_option("path", replay_path, "Transcript file or directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      return cmd_run(common, policy_name, out_dir, jobs, model_flag, base_url_flag,
                     replay_from);
    }
    if (analyze->parsed()) {
      return cmd_analyze(analyze_in, analyze_out, compare_dir);
    }
    if (print_prompt->parsed()) {
      return cmd_print_prompt(scene_path, transcript_path, step_arg,
                              prompt_template_arg);
    }
    if (replay->parsed()) {
      return cmd_replay(replay_path);
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
