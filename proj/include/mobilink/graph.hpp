#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mobilink/dataset.hpp"
#include "mobilink/rng.hpp"

namespace mobilink {

enum class NodeKind : std::uint8_t { user = 0, location = 1 };

struct NodeId {
  NodeKind kind = NodeKind::user;
  std::string id;

  friend bool operator==(const NodeId&, const NodeId&) = default;
  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

// Prefix-tagged token form used in corpus and embedding dumps.
inline std::string node_token(const NodeId& n) {
  return (n.kind == NodeKind::user ? "u:" : "l:") + n.id;
}

inline NodeId parse_node_token(const std::string& token) {
  if (token.size() < 3 || token[1] != ':')
    throw std::runtime_error("bad node token: '" + token + "'");
  NodeId n;
  if (token[0] == 'u')
    n.kind = NodeKind::user;
  else if (token[0] == 'l')
    n.kind = NodeKind::location;
  else
    throw std::runtime_error("bad node token: '" + token + "'");
  n.id = token.substr(2);
  return n;
}

// Vose alias table: O(n) build, O(1) sampling, exact to the normalized
// weights. prob[i] is the within-column probability of keeping i; alias[i]
// is the donor filling the rest of the column.
class AliasTable {
 public:
  static AliasTable build(const std::vector<double>& weights) {
    if (weights.empty()) throw std::invalid_argument("alias: empty weights");
    const std::size_t n = weights.size();
    double total = 0;
    for (double w : weights) {
      if (!(w > 0) || !std::isfinite(w))
        throw std::invalid_argument("alias: weights must be positive and finite");
      total += w;
    }
    AliasTable t;
    t.prob_.assign(n, 0.0);
    t.alias_.assign(n, 0);
    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i)
      scaled[i] = weights[i] * static_cast<double>(n) / total;

    // Two worklists, filled in ascending index order so lower indices are
    // paired first.
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < n; ++i)
      (scaled[i] < 1.0 ? small : large).push_back(i);
    std::size_t si = 0, li = 0;
    while (si < small.size() && li < large.size()) {
      std::size_t s = small[si++];
      std::size_t l = large[li];
      t.prob_[s] = scaled[s];
      t.alias_[s] = static_cast<std::uint32_t>(l);
      scaled[l] -= 1.0 - scaled[s];
      if (scaled[l] < 1.0) {
        ++li;
        small.push_back(l);
      }
    }
    while (li < large.size()) {
      t.prob_[large[li]] = 1.0;
      t.alias_[large[li]] = static_cast<std::uint32_t>(large[li]);
      ++li;
    }
    while (si < small.size()) {  // numerically stranded remainders
      t.prob_[small[si]] = 1.0;
      t.alias_[small[si]] = static_cast<std::uint32_t>(small[si]);
      ++si;
    }
    return t;
  }

  // One column pick plus one coin: the classic two-draw alias step.
  std::size_t sample(Rng& rng) const {
    auto col = static_cast<std::size_t>(rng.below(prob_.size()));
    return rng.unit() < prob_[col] ? col : alias_[col];
  }

  std::size_t size() const { return prob_.size(); }
  const std::vector<double>& prob() const { return prob_; }
  const std::vector<std::uint32_t>& alias() const { return alias_; }

  // Exact per-index mass implied by the table structure. Used by tests to
  // verify small tables analytically.
  std::vector<double> implied_mass() const {
    const std::size_t n = prob_.size();
    std::vector<double> mass(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      mass[i] += prob_[i] / static_cast<double>(n);
      mass[alias_[i]] += (1.0 - prob_[i]) / static_cast<double>(n);
    }
    return mass;
  }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

// Weighted user-location bipartite graph with alias samplers per node.
// Nodes are indexed densely: users first (sorted by id), then locations
// (sorted by id). Adjacency lists are sorted by neighbor identifier, so the
// whole structure, including every alias table, is a deterministic function
// of the dataset.
class BipartiteGraph {
 public:
  static BipartiteGraph build(const CheckInDataset& ds) {
    if (ds.empty()) throw std::invalid_argument("graph: empty dataset");
    BipartiteGraph g;
    // Only users with at least one check-in become nodes; a roster entry
    // emptied by obfuscation has no edges and cannot host walks.
    std::vector<std::string> active_users;
    for (const std::string& u : ds.users())
      if (ds.tau(u) > 0) active_users.push_back(u);
    g.n_users_ = active_users.size();
    for (const std::string& u : active_users)
      g.nodes_.push_back(NodeId{NodeKind::user, u});
    for (const std::string& l : ds.locations())
      g.nodes_.push_back(NodeId{NodeKind::location, l});
    for (std::uint32_t i = 0; i < g.nodes_.size(); ++i)
      g.index_.emplace(g.nodes_[i], i);

    g.adjacency_.resize(g.nodes_.size());
    g.weights_.resize(g.nodes_.size());
    for (std::size_t ui = 0; ui < g.n_users_; ++ui) {
      const std::string& u = g.nodes_[ui].id;
      for (const auto& [loc, count] : ds.omega(u)) {
        std::uint32_t li = g.index_.at(NodeId{NodeKind::location, loc});
        g.adjacency_[ui].push_back(li);
        g.weights_[ui].push_back(static_cast<double>(count));
        g.adjacency_[li].push_back(static_cast<std::uint32_t>(ui));
        g.weights_[li].push_back(static_cast<double>(count));
      }
    }
    // User rows come out sorted already (omega iterates by location id);
    // location rows collect users in ascending user index = ascending id.
    g.alias_.reserve(g.nodes_.size());
    for (std::size_t i = 0; i < g.nodes_.size(); ++i) {
      if (g.adjacency_[i].empty())
        throw std::runtime_error("graph: isolated node " + node_token(g.nodes_[i]));
      g.alias_.push_back(AliasTable::build(g.weights_[i]));
    }
    return g;
  }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t user_count() const { return n_users_; }
  std::size_t location_count() const { return nodes_.size() - n_users_; }

  const NodeId& node(std::uint32_t i) const { return nodes_[i]; }
  const std::vector<NodeId>& nodes() const { return nodes_; }

  bool contains(const NodeId& n) const { return index_.count(n) > 0; }
  std::uint32_t index_of(const NodeId& n) const {
    auto it = index_.find(n);
    if (it == index_.end())
      throw std::runtime_error("graph: unknown node " + node_token(n));
    return it->second;
  }

  const std::vector<std::uint32_t>& neighbors(std::uint32_t i) const {
    return adjacency_[i];
  }
  const std::vector<double>& neighbor_weights(std::uint32_t i) const {
    return weights_[i];
  }

  double weight_sum(std::uint32_t i) const {
    double z = 0;
    for (double w : weights_[i]) z += w;
    return z;
  }

  // Eq. 1 move: neighbor y of x with probability w(x,y) / Z.
  std::uint32_t sample_neighbor(std::uint32_t x, Rng& rng) const {
    return adjacency_[x][alias_[x].sample(rng)];
  }
  NodeId sample_neighbor(const NodeId& x, Rng& rng) const {
    return nodes_[sample_neighbor(index_of(x), rng)];
  }

  const AliasTable& alias_table(std::uint32_t i) const { return alias_[i]; }

 private:
  std::vector<NodeId> nodes_;  // users sorted, then locations sorted
  std::size_t n_users_ = 0;
  std::map<NodeId, std::uint32_t> index_;
  std::vector<std::vector<std::uint32_t>> adjacency_;
  std::vector<std::vector<double>> weights_;
  std::vector<AliasTable> alias_;
};

}  // namespace mobilink
