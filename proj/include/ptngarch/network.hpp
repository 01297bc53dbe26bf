#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ptngarch/error.hpp"
#include "ptngarch/rng.hpp"

namespace ptngarch {

using Edge = std::pair<std::size_t, std::size_t>;

/// Binary adjacency (directed in general) with its row-normalized weights.
///
/// Stored as compressed rows of sorted out-neighbours. Row i of W is
/// a_ij / d_i where d_i is the out-degree; rows of isolated nodes are zero,
/// so the neighbour average of an isolated node is 0.
class Network {
 public:
  Network() = default;

  /// Builds from an edge list. Duplicates are merged; self-loops and
  /// out-of-range endpoints throw ValidationError.
  static Network from_edges(std::size_t n_nodes, std::vector<Edge> edges) {
    if (n_nodes == 0) throw ValidationError("network must have at least one node");
    for (const auto& [i, j] : edges) {
      if (i >= n_nodes || j >= n_nodes) {
        throw ValidationError("edge (" + std::to_string(i) + "," + std::to_string(j) +
                              ") out of range for " + std::to_string(n_nodes) + " nodes");
      }
      if (i == j) throw ValidationError("self-loop at node " + std::to_string(i));
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    Network net;
    net.n_ = n_nodes;
    net.row_ptr_.assign(n_nodes + 1, 0);
    net.cols_.reserve(edges.size());
    for (const auto& [i, j] : edges) {
      ++net.row_ptr_[i + 1];
      net.cols_.push_back(static_cast<std::uint32_t>(j));
    }
    std::partial_sum(net.row_ptr_.begin(), net.row_ptr_.end(), net.row_ptr_.begin());
    return net;
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return cols_.size(); }

  std::span<const std::uint32_t> neighbours(std::size_t i) const {
    return {cols_.data() + row_ptr_[i], cols_.data() + row_ptr_[i + 1]};
  }

  std::size_t degree(std::size_t i) const { return row_ptr_[i + 1] - row_ptr_[i]; }

  bool adjacent(std::size_t i, std::size_t j) const {
    const auto row = neighbours(i);
    return std::binary_search(row.begin(), row.end(), static_cast<std::uint32_t>(j));
  }

  double weight(std::size_t i, std::size_t j) const {
    return adjacent(i, j) ? 1.0 / static_cast<double>(degree(i)) : 0.0;
  }

  /// Σ_j w_ij x_j for a node-indexed vector x.
  template <class Indexable>
  double neighbour_mean(std::size_t i, const Indexable& x) const {
    const auto row = neighbours(i);
    if (row.empty()) return 0.0;
    double s = 0.0;
    for (auto j : row) s += static_cast<double>(x[j]);
    return s / static_cast<double>(row.size());
  }

  bool symmetric() const {
    for (std::size_t i = 0; i < n_; ++i) {
      for (auto j : neighbours(i)) {
        if (!adjacent(j, i)) return false;
      }
    }
    return true;
  }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(cols_.size());
    for (std::size_t i = 0; i < n_; ++i) {
      for (auto j : neighbours(i)) out.emplace_back(i, j);
    }
    return out;
  }

  std::vector<std::vector<int>> dense_adjacency() const {
    std::vector<std::vector<int>> a(n_, std::vector<int>(n_, 0));
    for (std::size_t i = 0; i < n_; ++i) {
      for (auto j : neighbours(i)) a[i][j] = 1;
    }
    return a;
  }

  std::vector<std::vector<double>> dense_weights() const {
    std::vector<std::vector<double>> w(n_, std::vector<double>(n_, 0.0));
    for (std::size_t i = 0; i < n_; ++i) {
      for (auto j : neighbours(i)) w[i][j] = 1.0 / static_cast<double>(degree(i));
    }
    return w;
  }

  /// Relabels nodes: node i of the result is node perm[i] of this network.
  Network permuted(std::span<const std::size_t> perm) const {
    std::vector<std::size_t> inverse(n_);
    for (std::size_t k = 0; k < n_; ++k) inverse[perm[k]] = k;
    std::vector<Edge> e;
    e.reserve(cols_.size());
    for (std::size_t i = 0; i < n_; ++i) {
      for (auto j : neighbours(i)) e.emplace_back(inverse[i], inverse[j]);
    }
    return from_edges(n_, std::move(e));
  }

  friend bool operator==(const Network&, const Network&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::uint32_t> cols_;
};

/// Validates a dense 0/1 matrix with zero diagonal and row-normalizes it.
inline Network row_normalize(const std::vector<std::vector<int>>& adjacency) {
  const std::size_t n = adjacency.size();
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    if (adjacency[i].size() != n) {
      throw ValidationError("adjacency must be square: row " + std::to_string(i) + " has " +
                            std::to_string(adjacency[i].size()) + " entries, expected " +
                            std::to_string(n));
    }
    for (std::size_t j = 0; j < n; ++j) {
      const int a = adjacency[i][j];
      if (a != 0 && a != 1) {
        throw ValidationError("adjacency entry (" + std::to_string(i) + "," + std::to_string(j) +
                              ") = " + std::to_string(a) + " is not binary");
      }
      if (i == j && a != 0) {
        throw ValidationError("adjacency has nonzero diagonal at node " + std::to_string(i));
      }
      if (a == 1) edges.emplace_back(i, j);
    }
  }
  return Network::from_edges(n, std::move(edges));
}

// ---------------------------------------------------------------------------
// Generators

/// Band network: a_ij = 1 iff 0 < |i - j| <= band.
inline Network gen_d_neighbourhood(std::size_t n_nodes, long band) {
  if (n_nodes < 2) throw ValidationError("band network needs at least 2 nodes");
  if (band <= 0) throw ValidationError("band width D must be positive");
  if (static_cast<std::size_t>(band) >= n_nodes) {
    throw ValidationError("band width D must be smaller than the node count");
  }
  const auto d = static_cast<std::size_t>(band);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n_nodes; ++i) {
    const std::size_t lo = i >= d ? i - d : 0;
    const std::size_t hi = std::min(n_nodes - 1, i + d);
    for (std::size_t j = lo; j <= hi; ++j) {
      if (j != i) edges.emplace_back(i, j);
    }
  }
  return Network::from_edges(n_nodes, std::move(edges));
}

/// Random out-degree network: node i draws D_i ~ U(0, d_max) and links to
/// floor(D_i) distinct other nodes chosen uniformly.
inline Network gen_random(std::size_t n_nodes, double d_max, std::uint64_t seed) {
  if (n_nodes < 2) throw ValidationError("random network needs at least 2 nodes");
  if (!(d_max > 0.0)) throw ValidationError("d_max must be positive");
  Counter64 rng(seed);
  std::vector<Edge> edges;
  std::vector<std::size_t> pool(n_nodes - 1);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    const double di = d_max * rng.uniform();
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(std::floor(di)), n_nodes - 1);
    for (std::size_t j = 0, p = 0; j < n_nodes; ++j) {
      if (j != i) pool[p++] = j;
    }
    // partial Fisher-Yates
    for (std::size_t s = 0; s < k; ++s) {
      const std::size_t pick = s + rng.below(pool.size() - s);
      std::swap(pool[s], pool[pick]);
      edges.emplace_back(i, pool[s]);
    }
  }
  return Network::from_edges(n_nodes, std::move(edges));
}

/// Power-law attachment network. Each node gets an attractiveness s_i drawn
/// from P{s = x} ∝ x^(-a) on {1..N}; node i then links to floor(D_i),
/// D_i ~ U(0, d_max), distinct targets drawn with probability ∝ s_j.
/// Without-replacement sampling is sequential with renormalization.
inline Network gen_power_law(std::size_t n_nodes, double scaling, double d_max,
                             std::uint64_t seed) {
  if (n_nodes < 2) throw ValidationError("power-law network needs at least 2 nodes");
  if (!(scaling > 1.0)) throw ValidationError("power-law scaling a must exceed 1");
  if (!(d_max > 0.0)) throw ValidationError("d_max must be positive");
  Counter64 rng(seed);

  std::vector<double> cdf(n_nodes);
  double acc = 0.0;
  for (std::size_t x = 1; x <= n_nodes; ++x) {
    acc += std::pow(static_cast<double>(x), -scaling);
    cdf[x - 1] = acc;
  }
  std::vector<double> s(n_nodes);
  for (auto& si : s) {
    const double u = rng.uniform() * acc;
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    si = static_cast<double>(std::min<std::ptrdiff_t>(it - cdf.begin(),
                                                      static_cast<std::ptrdiff_t>(n_nodes) - 1) +
                             1);
  }

  std::vector<Edge> edges;
  std::vector<double> w(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    const double di = d_max * rng.uniform();
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(std::floor(di)), n_nodes - 1);
    w = s;
    w[i] = 0.0;
    double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (std::size_t draw = 0; draw < k; ++draw) {
      double u = rng.uniform() * total;
      std::size_t pick = n_nodes;
      for (std::size_t j = 0; j < n_nodes; ++j) {
        if (w[j] <= 0.0) continue;
        pick = j;
        if (u < w[j]) break;
        u -= w[j];
      }
      edges.emplace_back(i, pick);
      total -= w[pick];
      w[pick] = 0.0;
    }
  }
  return Network::from_edges(n_nodes, std::move(edges));
}

struct LabelledNetwork {
  Network network;
  std::vector<std::size_t> labels;
};

/// Stochastic block network: nodes are shuffled and dealt into K blocks; for i < j the pair is
/// linked (both directions) with probability p_in inside a block and
/// p_out_scale / N across blocks.
inline LabelledNetwork gen_block_labelled(std::size_t n_nodes, std::size_t blocks, double p_in,
                                          double p_out_scale, std::uint64_t seed) {
  if (n_nodes < 2) throw ValidationError("block network needs at least 2 nodes");
  if (blocks < 1 || blocks > n_nodes) throw ValidationError("block count K must lie in [1, N]");
  if (p_in < 0.0 || p_in > 1.0) throw ValidationError("p_in must lie in [0, 1]");
  const double p_out = p_out_scale / static_cast<double>(n_nodes);
  if (p_out < 0.0 || p_out > 1.0) throw ValidationError("p_out_scale / N must lie in [0, 1]");

  Counter64 rng(seed);
  LabelledNetwork out;
  // shuffled balanced split: each node's label is uniform on {0..K-1} and
  // block sizes differ by at most one
  std::vector<std::size_t> order(n_nodes);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  out.labels.resize(n_nodes);
  for (std::size_t k = 0; k < n_nodes; ++k) out.labels[order[k]] = k % blocks;
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n_nodes; ++i) {
    for (std::size_t j = i + 1; j < n_nodes; ++j) {
      const double p = out.labels[i] == out.labels[j] ? p_in : p_out;
      if (rng.uniform() < p) {
        edges.emplace_back(i, j);
        edges.emplace_back(j, i);
      }
    }
  }
  out.network = Network::from_edges(n_nodes, std::move(edges));
  return out;
}

inline Network gen_block(std::size_t n_nodes, std::size_t blocks, double p_in = 0.5,
                         double p_out_scale = 0.001, std::uint64_t seed = 0) {
  return gen_block_labelled(n_nodes, blocks, p_in, p_out_scale, seed).network;
}

// ---------------------------------------------------------------------------
// Edge-list files: one "i,j" per line, 0-based; '#' starts a comment.
// save_edge_list writes a "# nodes: N" directive so isolated trailing nodes
// survive a round trip.

struct EdgeListOptions {
  std::size_t n_nodes = 0;  // 0: take the directive, else max index + 1
  bool symmetrize = false;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline bool parse_index(std::string_view tok, std::size_t& out) {
  tok = trim(tok);
  if (tok.empty()) return false;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace detail

inline Network read_edge_list(std::istream& in, const EdgeListOptions& opts = {}) {
  std::vector<Edge> edges;
  std::vector<std::size_t> line_of;
  std::size_t declared = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      const auto comment = detail::trim(view.substr(hash + 1));
      constexpr std::string_view key = "nodes:";
      if (comment.substr(0, key.size()) == key) {
        if (!detail::parse_index(comment.substr(key.size()), declared)) {
          throw ValidationError("line " + std::to_string(lineno) + ": malformed nodes directive");
        }
      }
      view = view.substr(0, hash);
    }
    view = detail::trim(view);
    if (view.empty()) continue;
    const auto comma = view.find(',');
    std::size_t i = 0, j = 0;
    if (comma == std::string_view::npos || !detail::parse_index(view.substr(0, comma), i) ||
        !detail::parse_index(view.substr(comma + 1), j)) {
      throw ValidationError("line " + std::to_string(lineno) + ": expected \"i,j\", got \"" +
                            std::string(view) + "\"");
    }
    if (i == j) {
      throw ValidationError("line " + std::to_string(lineno) + ": self-loop " + std::to_string(i) +
                            "," + std::to_string(j) + " is not allowed");
    }
    edges.emplace_back(i, j);
    line_of.push_back(lineno);
  }

  std::size_t n = opts.n_nodes != 0 ? opts.n_nodes : declared;
  if (n == 0) {
    for (const auto& [i, j] : edges) n = std::max({n, i + 1, j + 1});
  }
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (edges[k].first >= n || edges[k].second >= n) {
      throw ValidationError("line " + std::to_string(line_of[k]) + ": index out of range for " +
                            std::to_string(n) + " nodes");
    }
  }
  if (opts.symmetrize) {
    const std::size_t m = edges.size();
    for (std::size_t k = 0; k < m; ++k) edges.emplace_back(edges[k].second, edges[k].first);
  }
  if (n == 0) throw ValidationError("edge list defines no nodes");
  return Network::from_edges(n, std::move(edges));
}

inline Network load_edge_list(const std::string& path, const EdgeListOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open edge list '" + path + "'");
  try {
    return read_edge_list(in, opts);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline void write_edge_list(const Network& net, std::ostream& out) {
  out << "# nodes: " << net.size() << '\n';
  for (const auto& [i, j] : net.edges()) out << i << ',' << j << '\n';
}

inline void save_edge_list(const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write edge list '" + path + "'");
  write_edge_list(net, out);
}

}  // namespace ptngarch
