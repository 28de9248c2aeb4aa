#pragma once

// Strategy comparison over an IPPP sequence with open-loop references
// (the original previous frames), rendered as CSV and markdown tables.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "subme/luma_plane.hpp"
#include "subme/mode_decision.hpp"
#include "subme/stats.hpp"
#include "subme/subpel.hpp"
#include "subme/video_io.hpp"

namespace subme {

struct BenchmarkConfig {
  SequenceConfig sequence;
  int qp = 28;
  int range = 0;  // 0 picks 16 for widths up to 176, else 32
  int refs = 1;
  std::vector<Strategy> methods{kAllStrategies.begin(), kAllStrategies.end()};
  bool audit = false;
  GateParams gates;
  int jobs = 1;

  int effective_range(int width) const { return range > 0 ? range : (width <= 176 ? 16 : 32); }
};

struct StrategyReport {
  Strategy strategy = Strategy::full;
  SearchStats stats;
};

struct BenchmarkReport {
  int width = 0;
  int height = 0;
  int frames = 0;
  int refs = 1;
  int range = 16;
  int qp = 28;
  bool audit = false;
  std::vector<StrategyReport> rows;
};

// References for frame t: the up-to-`refs` previous original frames, nearest first.
inline ReferenceList references_for(const std::vector<PaddedReference>& padded, std::size_t t, int refs) {
  ReferenceList list;
  for (std::size_t k = 1; k <= static_cast<std::size_t>(refs) && k <= t; ++k) list.emplace_back(padded[t - k]);
  return list;
}

inline SearchStats run_strategy(const std::vector<LumaPlane>& frames, const std::vector<PaddedReference>& padded,
                                const SearchParams& params, int refs) {
  SearchStats stats;
  for (std::size_t t = 1; t < frames.size(); ++t) {
    const ReferenceList list = references_for(padded, t, refs);
    const FrameResult fr = estimate_frame(frames[t], list, params);
    stats.record_frame(static_cast<int>(t), frames[t], fr);
  }
  return stats;
}

inline BenchmarkReport run_benchmark(const BenchmarkConfig& cfg, const std::vector<LumaPlane>& frames) {
  if (frames.size() < 2) throw std::invalid_argument("run_benchmark: need at least two frames");
  if (cfg.refs < 1) throw std::invalid_argument("run_benchmark: refs must be >= 1");
  if (cfg.methods.empty()) throw std::invalid_argument("run_benchmark: no methods requested");
  for (const LumaPlane& f : frames) {
    if (f.width() != frames[0].width() || f.height() != frames[0].height()) {
      throw std::invalid_argument("run_benchmark: inconsistent frame dimensions");
    }
  }

  BenchmarkReport report;
  report.width = frames[0].width();
  report.height = frames[0].height();
  report.frames = static_cast<int>(frames.size());
  report.refs = cfg.refs;
  report.range = cfg.effective_range(report.width);
  report.qp = cfg.qp;
  report.audit = cfg.audit;

  std::vector<PaddedReference> padded;
  padded.reserve(frames.size());
  for (const LumaPlane& f : frames) padded.emplace_back(f, report.range);

  report.rows.resize(cfg.methods.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.methods.size(); i = next++) {
      SearchParams params;
      params.strategy = cfg.methods[i];
      params.lambda = LambdaModel::from_qp(cfg.qp);
      params.gates = cfg.gates;
      params.range = report.range;
      params.audit = cfg.audit;
      report.rows[i] = {cfg.methods[i], run_strategy(frames, padded, params, cfg.refs)};
    }
  };
  const int workers = std::clamp(cfg.jobs, 1, static_cast<int>(cfg.methods.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  return report;
}

namespace detail {

inline std::string fixed(double v, int digits) {
  if (std::isinf(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::vector<std::vector<std::string>> report_cells(const BenchmarkReport& r) {
  std::vector<std::string> head{"strategy"};
  if (r.refs > 1) head.push_back("refs");
  for (const char* h : {"frames", "partitions", "points", "sp_per_pt", "refined", "total_cost", "mc_psnr_db"}) {
    head.emplace_back(h);
  }
  if (r.audit) {
    for (const char* h : {"d_samples", "d_le0", "d_le1", "d_le2"}) head.emplace_back(h);
  }
  std::vector<std::vector<std::string>> rows{head};
  for (const StrategyReport& s : r.rows) {
    std::vector<std::string> row{std::string(to_string(s.strategy))};
    if (r.refs > 1) row.push_back(std::to_string(r.refs));
    row.push_back(std::to_string(r.frames));
    row.push_back(std::to_string(s.stats.partitions));
    row.push_back(std::to_string(s.stats.points));
    row.push_back(fixed(s.stats.sp_per_pt(), 2));
    row.push_back(std::to_string(s.stats.refined_partitions));
    row.push_back(std::to_string(s.stats.total_cost));
    row.push_back(fixed(s.stats.mc_psnr(), 4));
    if (r.audit) {
      const DistanceHistogram& h = s.stats.distance;
      row.push_back(std::to_string(h.total()));
      for (int d = 0; d <= 2; ++d) row.push_back(fixed(100.0 * h.cumulative_share(d), 2));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

inline std::string to_csv(const BenchmarkReport& r) {
  std::ostringstream out;
  for (const auto& row : detail::report_cells(r)) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
  return out.str();
}

inline std::string to_markdown(const BenchmarkReport& r) {
  std::ostringstream out;
  out << "# Sub-pel ME comparison\n\n"
      << r.width << "x" << r.height << ", " << r.frames << " frames, QP " << r.qp << ", range " << r.range
      << ", refs " << r.refs << "\n\n";
  const auto rows = detail::report_cells(r);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out << '|';
    for (const auto& cell : rows[k]) out << ' ' << cell << " |";
    out << '\n';
    if (k == 0) {
      out << '|';
      for (std::size_t i = 0; i < rows[k].size(); ++i) out << (i == 0 ? " --- |" : " ---: |");
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace subme
