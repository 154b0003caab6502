#pragma once

#include <aebp/bound.hpp>

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace aebp {

/// One emitted bound on the query marginal.
struct StreamRecord {
  std::size_t step = 0;
  std::string method;
  double seconds = 0.0;
  std::vector<double> lower;
  std::vector<double> upper;
  double width = 1.0;
  std::size_t factors_processed = 0;
  std::uint64_t lookup_count = 0;
  std::vector<VarId> cutset;
  std::string label;
};

inline double interval_width(const std::vector<double>& lower, const std::vector<double>& upper) {
  double w = 0.0;
  for (std::size_t i = 0; i < lower.size(); ++i) w = std::max(w, upper[i] - lower[i]);
  return w;
}

inline void fill_intervals(StreamRecord& r, const std::vector<Interval>& iv) {
  r.lower.clear();
  r.upper.clear();
  for (const auto& i : iv) {
    r.lower.push_back(i.lower);
    r.upper.push_back(i.upper);
  }
  r.width = interval_width(r.lower, r.upper);
}

inline nlohmann::ordered_json to_json(const StreamRecord& r) {
  nlohmann::ordered_json j;
  j["step"] = r.step;
  j["method"] = r.method;
  j["seconds"] = r.seconds;
  j["lower"] = r.lower;
  j["upper"] = r.upper;
  j["width"] = r.width;
  j["factors_processed"] = r.factors_processed;
  j["lookup_count"] = r.lookup_count;
  j["cutset"] = r.cutset;
  j["label"] = r.label;
  return j;
}

inline std::string text_header() {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%6s %10s %12s %8s %10s  %s", "step", "seconds", "width", "factors",
                "lookups", "intervals");
  return buf;
}

/// One aligned text row; intervals as [lo,hi] per query value.
inline std::string to_text(const StreamRecord& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%6zu %10.6f %12.6g %8zu %10llu  ", r.step, r.seconds, r.width,
                r.factors_processed, static_cast<unsigned long long>(r.lookup_count));
  std::string out = buf;
  for (std::size_t i = 0; i < r.lower.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s[%.6f,%.6f]", i ? " " : "", r.lower[i], r.upper[i]);
    out += buf;
  }
  return out;
}

}  // namespace aebp
