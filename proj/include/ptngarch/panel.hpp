#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ptngarch/error.hpp"

namespace ptngarch {

using Count = std::int64_t;

/// N × T panel of nonnegative counts, stored node-major: y(i, t) lives at
/// counts[i * T + t]. Time runs 0..T-1.
class Panel {
 public:
  Panel() = default;

  Panel(std::size_t n_nodes, std::size_t t_len)
      : n_(n_nodes), t_(t_len), counts_(n_nodes * t_len, 0) {}

  Panel(std::size_t n_nodes, std::size_t t_len, std::vector<Count> node_major)
      : n_(n_nodes), t_(t_len), counts_(std::move(node_major)) {
    if (counts_.size() != n_ * t_) throw ValidationError("panel data size does not match N*T");
    for (std::size_t k = 0; k < counts_.size(); ++k) {
      if (counts_[k] < 0) {
        throw ValidationError("negative count at node " + std::to_string(k / t_) + ", time " +
                              std::to_string(k % t_));
      }
    }
  }

  std::size_t n_nodes() const noexcept { return n_; }
  std::size_t t_len() const noexcept { return t_; }

  Count operator()(std::size_t i, std::size_t t) const { return counts_[i * t_ + t]; }
  Count& operator()(std::size_t i, std::size_t t) { return counts_[i * t_ + t]; }

  std::span<const Count> series(std::size_t i) const { return {counts_.data() + i * t_, t_}; }
  std::span<const Count> data() const noexcept { return counts_; }

  /// Optional labels, one per node (e.g. neighbourhood names from a CSV header).
  const std::vector<std::string>& node_ids() const noexcept { return ids_; }
  void set_node_ids(std::vector<std::string> ids) {
    if (!ids.empty() && ids.size() != n_) {
      throw ValidationError("node id count " + std::to_string(ids.size()) +
                            " does not match N = " + std::to_string(n_));
    }
    ids_ = std::move(ids);
  }

  double mean() const {
    if (counts_.empty()) return 0.0;
    long double s = 0;
    for (Count c : counts_) s += c;
    return static_cast<double>(s / counts_.size());
  }

  bool all_zero() const {
    for (Count c : counts_) {
      if (c != 0) return false;
    }
    return true;
  }

  friend bool operator==(const Panel& a, const Panel& b) {
    return a.n_ == b.n_ && a.t_ == b.t_ && a.counts_ == b.counts_;
  }

 private:
  std::size_t n_ = 0;
  std::size_t t_ = 0;
  std::vector<Count> counts_;
  std::vector<std::string> ids_;
};

}  // namespace ptngarch
