#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scaffold/session.hpp"

namespace scaffold {

inline constexpr uint64_t kDefaultBootstrapSeed = 0xB007B007;
inline constexpr int kDefaultResamples = 10000;

// Per-session instantaneous heights; column 0 is the initial state
// (always height 1), column j the height after step j.
struct HeightMatrix {
  int steps = 0;
  int object_count = 0;
  std::vector<std::vector<int>> rows;
};

// Throws std::invalid_argument on an empty set, mixed configs, or
// incomplete transcripts.
HeightMatrix height_matrix(const std::vector<Transcript>& transcripts);

struct Summary {
  int steps = 0;
  int object_count = 0;
  int sessions = 0;
  std::vector<double> mean_height;       // size steps+1
  std::vector<double> mean_running_max;  // size steps+1
  // histogram[step][h-1] = sessions whose height after `step` equals h
  std::vector<std::vector<int>> histogram;
  std::vector<int> session_max;                 // per session
  std::vector<int> max_histogram;               // [h-1] counts of session_max
  // first_passage[h-1][session] = earliest step with height >= h, or -1
  std::vector<std::vector<int>> first_passage;
  HeightMatrix matrix;  // kept for resampling
};

Summary summarize(const HeightMatrix& matrix);

struct Comparison {
  int steps = 0;
  int sessions_a = 0;
  int sessions_b = 0;
  std::vector<double> mean_diff;  // a - b, size steps+1
  std::vector<double> mean_diff_lo;
  std::vector<double> mean_diff_hi;
  double reach_diff = 0;  // P_a(session max = ceiling) - P_b(same)
  double reach_lo = 0;
  double reach_hi = 0;
  int resamples = 0;
  uint64_t seed = 0;
};

// Percentile bootstrap over sessions; resampling order and percentile
// indices are pinned, so equal seeds reproduce bit-for-bit.
Comparison compare(const Summary& a, const Summary& b,
                   int resamples = kDefaultResamples,
                   uint64_t seed = kDefaultBootstrapSeed);

struct BootstrapInterval {
  double diff = 0;
  double lo = 0;
  double hi = 0;
};

// Difference of indicator means (mean(a) - mean(b)) with a 95% interval;
// usable across configs with different ceilings.
BootstrapInterval bootstrap_reach_difference(const std::vector<int>& a,
                                             const std::vector<int>& b,
                                             int resamples = kDefaultResamples,
                                             uint64_t seed = kDefaultBootstrapSeed);

// format is "csv" or "json"; anything else throws std::invalid_argument.
void export_summary(const Summary& summary, const std::filesystem::path& path,
                    const std::string& format);
void export_matrix(const HeightMatrix& matrix, const std::filesystem::path& path,
                   const std::string& format);
void export_sessions(const Summary& summary, const std::filesystem::path& path,
                     const std::string& format);
void export_comparison(const Comparison& comparison,
                       const std::filesystem::path& path,
                       const std::string& format);

}  // namespace scaffold
