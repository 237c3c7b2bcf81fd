#pragma once

#include <chrono>
#include <cstddef>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace tada::harness {

/// Outcome of one verification suite. `worst` is the largest metric seen
/// (max abs diff or max relative gradient error); a case fails when its
/// metric exceeds `tolerance`, so failures == 0 iff worst <= tolerance.
struct SuiteResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  double worst = 0.0;
  double tolerance = 0.0;
  double seconds = 0.0;
  std::string worst_case;          // label of the case that produced `worst`
  std::vector<std::string> notes;  // failure diagnostics

  SuiteResult() = default;
  SuiteResult(std::string suite, double tol) : name(std::move(suite)), tolerance(tol) {}

  bool passed() const { return cases > 0 && failures == 0; }

  /// Folds one case metric into the result.
  void record(const std::string& label, double metric) {
    ++cases;
    if (!(metric <= tolerance)) {
      ++failures;
      std::ostringstream os;
      os << label << ": " << std::scientific << std::setprecision(3) << metric << " > " << tolerance;
      notes.push_back(os.str());
    }
    if (!(metric <= worst)) {  // also catches NaN
      worst = metric;
      worst_case = label;
    }
  }

  void merge(const SuiteResult& o) {
    cases += o.cases;
    failures += o.failures;
    if (!(o.worst <= worst)) {
      worst = o.worst;
      worst_case = o.worst_case;
    }
    notes.insert(notes.end(), o.notes.begin(), o.notes.end());
  }
};

inline void write_summary(std::ostream& os, const SuiteResult& r) {
  os << (r.passed() ? "PASS " : "FAIL ") << r.name << ": " << r.cases << " cases, " << r.failures
     << " failures, worst " << std::scientific << std::setprecision(3) << r.worst << " (tol "
     << r.tolerance << ")";
  if (!r.worst_case.empty()) os << " at " << r.worst_case;
  os << std::defaultfloat << std::setprecision(3) << ", " << r.seconds << " s\n";
  const std::size_t shown = r.notes.size() < 10 ? r.notes.size() : 10;
  for (std::size_t i = 0; i < shown; ++i) os << "  " << r.notes[i] << '\n';
  if (r.notes.size() > shown) os << "  ... " << r.notes.size() - shown << " more\n";
}

inline void write_csv(std::ostream& os, const std::vector<SuiteResult>& rs) {
  os << "suite,cases,failures,worst,tolerance,seconds\n";
  for (const auto& r : rs) {
    os << r.name << ',' << r.cases << ',' << r.failures << ',' << std::scientific
       << std::setprecision(6) << r.worst << ',' << r.tolerance << ',' << std::defaultfloat
       << r.seconds << '\n';
  }
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace tada::harness
