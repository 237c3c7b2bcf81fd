#pragma once

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tada/cost/op_cost.hpp"

namespace tada::cost {

struct CostRow {
  std::string layer;
  std::string kind;
  Count ci = 0, co = 0, t = 0, h = 0, w = 0;
  Count flops = 0;
  Count params = 0;
};

struct CostDelta {
  std::string layer;
  std::int64_t flops = 0;
  std::int64_t params = 0;
};

struct CostComparison {
  std::string name, baseline;
  Count flops = 0, params = 0;
  Count baseline_flops = 0, baseline_params = 0;
  std::vector<CostDelta> rows;  // only layers that differ

  std::int64_t flops_delta() const { return static_cast<std::int64_t>(flops) - static_cast<std::int64_t>(baseline_flops); }
  std::int64_t params_delta() const { return static_cast<std::int64_t>(params) - static_cast<std::int64_t>(baseline_params); }
  double flops_delta_pct() const { return baseline_flops ? 100.0 * flops_delta() / baseline_flops : 0.0; }
  double params_delta_pct() const { return baseline_params ? 100.0 * params_delta() / baseline_params : 0.0; }
};

class CostReport {
 public:
  CostReport() = default;
  explicit CostReport(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  const std::vector<CostRow>& rows() const { return rows_; }
  void add(CostRow row) { rows_.push_back(std::move(row)); }

  Count total_flops() const {
    Count n = 0;
    for (const auto& r : rows_) n += r.flops;
    return n;
  }
  Count total_params() const {
    Count n = 0;
    for (const auto& r : rows_) n += r.params;
    return n;
  }

  /// Layer-by-layer deltas against `base`, matched by layer name.
  CostComparison compare(const CostReport& base) const {
    CostComparison c{name_, base.name_, total_flops(), total_params(), base.total_flops(),
                     base.total_params(), {}};
    std::map<std::string, const CostRow*> theirs;
    for (const auto& r : base.rows_) theirs[r.layer] = &r;
    std::map<std::string, bool> seen;
    for (const auto& r : rows_) {
      seen[r.layer] = true;
      auto it = theirs.find(r.layer);
      const std::int64_t bf = it == theirs.end() ? 0 : static_cast<std::int64_t>(it->second->flops);
      const std::int64_t bp = it == theirs.end() ? 0 : static_cast<std::int64_t>(it->second->params);
      CostDelta d{r.layer, static_cast<std::int64_t>(r.flops) - bf, static_cast<std::int64_t>(r.params) - bp};
      if (d.flops != 0 || d.params != 0) c.rows.push_back(d);
    }
    for (const auto& r : base.rows_) {
      if (seen.count(r.layer)) continue;
      CostDelta d{r.layer, -static_cast<std::int64_t>(r.flops), -static_cast<std::int64_t>(r.params)};
      if (d.flops != 0 || d.params != 0) c.rows.push_back(d);
    }
    return c;
  }

  void write_csv(std::ostream& os) const {
    os << "layer,kind,Ci,Co,T,H,W,flops,params\n";
    for (const auto& r : rows_) {
      os << r.layer << ',' << r.kind << ',' << r.ci << ',' << r.co << ',' << r.t << ',' << r.h << ','
         << r.w << ',' << r.flops << ',' << r.params << '\n';
    }
  }

  void write_table(std::ostream& os) const {
    std::size_t lw = 5;
    for (const auto& r : rows_) lw = std::max(lw, r.layer.size());
    os << std::left << std::setw(static_cast<int>(lw)) << "layer" << "  " << std::setw(12) << "kind"
       << std::right << std::setw(6) << "Ci" << std::setw(6) << "Co" << std::setw(4) << "T"
       << std::setw(5) << "H" << std::setw(5) << "W" << std::setw(15) << "flops" << std::setw(11)
       << "params" << '\n';
    for (const auto& r : rows_) {
      os << std::left << std::setw(static_cast<int>(lw)) << r.layer << "  " << std::setw(12) << r.kind
         << std::right << std::setw(6) << r.ci << std::setw(6) << r.co << std::setw(4) << r.t
         << std::setw(5) << r.h << std::setw(5) << r.w << std::setw(15) << r.flops << std::setw(11)
         << r.params << '\n';
    }
    os << std::left << std::setw(static_cast<int>(lw)) << "total" << std::right
       << std::setw(static_cast<int>(2 + 12 + 6 + 6 + 4 + 5 + 5 + 15)) << total_flops()
       << std::setw(11) << total_params() << '\n';
    os << name_ << ": " << std::fixed << std::setprecision(3) << total_flops() / 1e9 << " GFLOPs, "
       << total_params() / 1e6 << " M params\n";
    os.unsetf(std::ios::fixed);
  }

 private:
  std::string name_;
  std::vector<CostRow> rows_;
};

inline void write_comparison(std::ostream& os, const CostComparison& c) {
  std::ostringstream line;
  line << std::fixed << std::setprecision(3);
  for (const auto& d : c.rows) {
    os << "  " << d.layer << ": " << std::showpos << d.flops << " flops, " << d.params << " params"
       << std::noshowpos << '\n';
  }
  line << c.name << " vs " << c.baseline << ": " << std::showpos << c.flops_delta() / 1e9
       << " GFLOPs (" << c.flops_delta_pct() << "%), " << c.params_delta() / 1e6 << " M params ("
       << c.params_delta_pct() << "%)";
  os << line.str() << '\n';
}

}  // namespace tada::cost
