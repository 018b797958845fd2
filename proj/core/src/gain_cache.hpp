#pragma once

#include <map>
#include <memory>
#include <mutex>

#include "optcons/numkit.hpp"

namespace optcons::detail {

// Memo of a time-varying gain. Integrators query the same instants several
// times per step (RK4 midpoints, the recorder), and re-running quadrature for
// each query dominates simulation time. Results are identical either way.
class GainCache {
 public:
  template <typename Compute>
  Matrix get(double t, Compute&& compute) {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      const auto it = entries_.find(t);
      if (it != entries_.end()) return it->second;
    }
    Matrix value = compute(t);
    std::lock_guard<std::mutex> lock(mutex_);
    if (entries_.size() >= kMaxEntries) entries_.clear();
    entries_.emplace(t, value);
    return value;
  }

 private:
  static constexpr std::size_t kMaxEntries = 1 << 16;
  std::mutex mutex_;
  std::map<double, Matrix> entries_;
};

inline std::shared_ptr<GainCache> make_gain_cache() {
  return std::make_shared<GainCache>();
}

}  // namespace optcons::detail
