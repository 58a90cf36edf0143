#include "scaffold/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "scaffold/rng.hpp"

namespace scaffold {

namespace {

using nlohmann::json;

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void require_format(const std::string& format) {
  if (format != "csv" && format != "json") {
    throw std::invalid_argument("unknown export format '" + format + "'");
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  }
  return out;
}

double column_mean(const std::vector<std::vector<int>>& rows,
                   const std::vector<size_t>& picks, size_t col) {
  double sum = 0;
  for (size_t r : picks) sum += rows[r][col];
  return sum / static_cast<double>(picks.size());
}

// Pinned percentile rule: with R sorted resample statistics the 95%
// interval is [sorted[R*25/1000], sorted[R*975/1000 - 1]].
std::pair<double, double> percentile95(std::vector<double>& stats) {
  std::sort(stats.begin(), stats.end());
  size_t r = stats.size();
  size_t lo = r * 25 / 1000;
  size_t hi = r * 975 / 1000 - 1;
  return {stats[lo], stats[hi]};
}

}  // namespace

HeightMatrix height_matrix(const std::vector<Transcript>& transcripts) {
  if (transcripts.empty()) {
    throw std::invalid_argument("no transcripts to aggregate");
  }
  HeightMatrix m;
  m.steps = transcripts.front().config.steps;
  m.object_count = static_cast<int>(transcripts.front().initial_state.objects.size());
  for (size_t i = 0; i < transcripts.size(); ++i) {
    const Transcript& t = transcripts[i];
    if (!t.complete) {
      throw std::invalid_argument("transcript " + std::to_string(i) +
                                  " is incomplete");
    }
    if (t.config.steps != m.steps ||
        static_cast<int>(t.initial_state.objects.size()) != m.object_count) {
      throw std::invalid_argument("transcript " + std::to_string(i) +
                                  " has a different config shape");
    }
    m.rows.push_back(height_trajectory(t));
  }
  return m;
}

Summary summarize(const HeightMatrix& matrix) {
  if (matrix.rows.empty()) throw std::invalid_argument("empty height matrix");
  Summary s;
  s.steps = matrix.steps;
  s.object_count = matrix.object_count;
  s.sessions = static_cast<int>(matrix.rows.size());
  s.matrix = matrix;

  size_t cols = static_cast<size_t>(matrix.steps) + 1;
  size_t levels = static_cast<size_t>(matrix.object_count);
  s.mean_height.assign(cols, 0);
  s.mean_running_max.assign(cols, 0);
  s.histogram.assign(cols, std::vector<int>(levels, 0));
  s.max_histogram.assign(levels, 0);
  s.first_passage.assign(levels, std::vector<int>(matrix.rows.size(), -1));

  for (size_t r = 0; r < matrix.rows.size(); ++r) {
    const std::vector<int>& row = matrix.rows[r];
    if (row.size() != cols) throw std::invalid_argument("ragged height matrix");
    int running = 0;
    for (size_t c = 0; c < cols; ++c) {
      int h = row[c];
      if (h < 1 || h > matrix.object_count) {
        throw std::invalid_argument("height outside 1..object_count");
      }
      running = std::max(running, h);
      s.mean_height[c] += h;
      s.mean_running_max[c] += running;
      s.histogram[c][static_cast<size_t>(h) - 1] += 1;
      for (int level = 1; level <= h; ++level) {
        int& fp = s.first_passage[static_cast<size_t>(level) - 1][r];
        if (fp < 0) fp = static_cast<int>(c);
      }
    }
    s.session_max.push_back(running);
    s.max_histogram[static_cast<size_t>(running) - 1] += 1;
  }
  for (size_t c = 0; c < cols; ++c) {
    s.mean_height[c] /= s.sessions;
    s.mean_running_max[c] /= s.sessions;
  }
  return s;
}

Comparison compare(const Summary& a, const Summary& b, int resamples,
                   uint64_t seed) {
  if (a.steps != b.steps || a.object_count != b.object_count) {
    throw std::invalid_argument("summaries have different shapes");
  }
  if (resamples < 1) throw std::invalid_argument("resamples must be >= 1");

  Comparison cmp;
  cmp.steps = a.steps;
  cmp.sessions_a = a.sessions;
  cmp.sessions_b = b.sessions;
  cmp.resamples = resamples;
  cmp.seed = seed;

  size_t cols = static_cast<size_t>(a.steps) + 1;
  std::vector<size_t> all_a(a.matrix.rows.size());
  std::vector<size_t> all_b(b.matrix.rows.size());
  for (size_t i = 0; i < all_a.size(); ++i) all_a[i] = i;
  for (size_t i = 0; i < all_b.size(); ++i) all_b[i] = i;

  cmp.mean_diff.resize(cols);
  for (size_t c = 0; c < cols; ++c) {
    cmp.mean_diff[c] =
        column_mean(a.matrix.rows, all_a, c) - column_mean(b.matrix.rows, all_b, c);
  }
  auto reach = [](const Summary& s, const std::vector<size_t>& picks) {
    double hits = 0;
    for (size_t r : picks) hits += s.session_max[r] == s.object_count ? 1 : 0;
    return hits / static_cast<double>(picks.size());
  };
  cmp.reach_diff = reach(a, all_a) - reach(b, all_b);

  // One index stream drives every statistic: per resample, draw the a-rows
  // then the b-rows, then evaluate all columns on that common resample.
  Rng rng(seed);
  std::vector<std::vector<double>> col_stats(cols,
                                             std::vector<double>(static_cast<size_t>(resamples)));
  std::vector<double> reach_stats(static_cast<size_t>(resamples));
  std::vector<size_t> pa(all_a.size()), pb(all_b.size());
  for (int r = 0; r < resamples; ++r) {
    for (auto& i : pa) i = rng.uniform_index(all_a.size());
    for (auto& i : pb) i = rng.uniform_index(all_b.size());
    for (size_t c = 0; c < cols; ++c) {
      col_stats[c][static_cast<size_t>(r)] =
          column_mean(a.matrix.rows, pa, c) - column_mean(b.matrix.rows, pb, c);
    }
    reach_stats[static_cast<size_t>(r)] = reach(a, pa) - reach(b, pb);
  }
  cmp.mean_diff_lo.resize(cols);
  cmp.mean_diff_hi.resize(cols);
  for (size_t c = 0; c < cols; ++c) {
    auto [lo, hi] = percentile95(col_stats[c]);
    cmp.mean_diff_lo[c] = lo;
    cmp.mean_diff_hi[c] = hi;
  }
  auto [rlo, rhi] = percentile95(reach_stats);
  cmp.reach_lo = rlo;
  cmp.reach_hi = rhi;
  return cmp;
}

BootstrapInterval bootstrap_reach_difference(const std::vector<int>& a,
                                             const std::vector<int>& b,
                                             int resamples, uint64_t seed) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty indicator set");
  if (resamples < 1) throw std::invalid_argument("resamples must be >= 1");
  auto mean_of = [](const std::vector<int>& v) {
    double sum = 0;
    for (int x : v) sum += x ? 1 : 0;
    return sum / static_cast<double>(v.size());
  };
  BootstrapInterval out;
  out.diff = mean_of(a) - mean_of(b);

  Rng rng(seed);
  std::vector<double> stats(static_cast<size_t>(resamples));
  for (int r = 0; r < resamples; ++r) {
    double sa = 0;
    for (size_t i = 0; i < a.size(); ++i) sa += a[rng.uniform_index(a.size())] ? 1 : 0;
    double sb = 0;
    for (size_t i = 0; i < b.size(); ++i) sb += b[rng.uniform_index(b.size())] ? 1 : 0;
    stats[static_cast<size_t>(r)] =
        sa / static_cast<double>(a.size()) - sb / static_cast<double>(b.size());
  }
  auto [lo, hi] = percentile95(stats);
  out.lo = lo;
  out.hi = hi;
  return out;
}

void export_summary(const Summary& s, const std::filesystem::path& path,
                    const std::string& format) {
  require_format(format);
  std::ofstream out = open_out(path);
  if (format == "csv") {
    out << "step,mean_height,mean_running_max";
    for (int h = 1; h <= s.object_count; ++h) out << ",count_h" << h;
    out << "\n";
    for (int c = 0; c <= s.steps; ++c) {
      out << c << "," << fmt6(s.mean_height[static_cast<size_t>(c)]) << ","
          << fmt6(s.mean_running_max[static_cast<size_t>(c)]);
      for (int h = 1; h <= s.object_count; ++h) {
        out << "," << s.histogram[static_cast<size_t>(c)][static_cast<size_t>(h) - 1];
      }
      out << "\n";
    }
    return;
  }
  json doc = {{"steps", s.steps},
              {"object_count", s.object_count},
              {"sessions", s.sessions},
              {"mean_height", s.mean_height},
              {"mean_running_max", s.mean_running_max},
              {"histogram", s.histogram},
              {"session_max", s.session_max},
              {"max_histogram", s.max_histogram},
              {"first_passage", s.first_passage}};
  out << doc.dump(2) << "\n";
}

void export_matrix(const HeightMatrix& m, const std::filesystem::path& path,
                   const std::string& format) {
  require_format(format);
  std::ofstream out = open_out(path);
  if (format == "csv") {
    out << "session";
    for (int c = 0; c <= m.steps; ++c) out << ",step" << c;
    out << "\n";
    for (size_t r = 0; r < m.rows.size(); ++r) {
      out << r;
      for (int v : m.rows[r]) out << "," << v;
      out << "\n";
    }
    return;
  }
  json doc = {{"steps", m.steps},
              {"object_count", m.object_count},
              {"rows", m.rows}};
  out << doc.dump(2) << "\n";
}

void export_sessions(const Summary& s, const std::filesystem::path& path,
                     const std::string& format) {
  require_format(format);
  std::ofstream out = open_out(path);
  if (format == "csv") {
    out << "session,max_height";
    for (int h = 1; h <= s.object_count; ++h) out << ",first_h" << h;
    out << "\n";
    for (int r = 0; r < s.sessions; ++r) {
      out << r << "," << s.session_max[static_cast<size_t>(r)];
      for (int h = 1; h <= s.object_count; ++h) {
        out << ","
            << s.first_passage[static_cast<size_t>(h) - 1][static_cast<size_t>(r)];
      }
      out << "\n";
    }
    return;
  }
  json doc = {{"session_max", s.session_max}, {"first_passage", s.first_passage}};
  out << doc.dump(2) << "\n";
}

void export_comparison(const Comparison& c, const std::filesystem::path& path,
                       const std::string& format) {
  require_format(format);
  std::ofstream out = open_out(path);
  if (format == "csv") {
    out << "step,mean_diff,ci_lo,ci_hi\n";
    for (int i = 0; i <= c.steps; ++i) {
      size_t s = static_cast<size_t>(i);
      out << i << "," << fmt6(c.mean_diff[s]) << "," << fmt6(c.mean_diff_lo[s])
          << "," << fmt6(c.mean_diff_hi[s]) << "\n";
    }
    out << "reach," << fmt6(c.reach_diff) << "," << fmt6(c.reach_lo) << ","
        << fmt6(c.reach_hi) << "\n";
    return;
  }
  json doc = {{"steps", c.steps},
              {"sessions_a", c.sessions_a},
              {"sessions_b", c.sessions_b},
              {"mean_diff", c.mean_diff},
              {"mean_diff_lo", c.mean_diff_lo},
              {"mean_diff_hi", c.mean_diff_hi},
              {"reach_diff", c.reach_diff},
              {"reach_lo", c.reach_lo},
              {"reach_hi", c.reach_hi},
              {"resamples", c.resamples},
              {"seed", std::to_string(c.seed)}};
  out << doc.dump(2) << "\n";
}

}  // namespace scaffold
