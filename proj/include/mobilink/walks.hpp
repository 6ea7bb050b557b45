#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mobilink/graph.hpp"
#include "mobilink/rng.hpp"

namespace mobilink {

struct ContextPair {
  NodeId center;
  NodeId context;
  friend bool operator==(const ContextPair&, const ContextPair&) = default;
};

// The walk corpus: |U| * t_w traces of exactly l_w nodes each, stored as
// indices into a private vocabulary (users sorted, then locations sorted).
// Keeping the vocabulary inside the corpus lets a corpus loaded from a dump
// behave exactly like one generated in memory.
class WalkCorpus {
 public:
  WalkCorpus() = default;

  WalkCorpus(std::vector<NodeId> vocab, std::vector<std::uint32_t> flat,
             std::size_t trace_len, int t_w, std::uint64_t seed)
      : vocab_(std::move(vocab)),
        flat_(std::move(flat)),
        trace_len_(trace_len),
        t_w_(t_w),
        seed_(seed) {
    if (trace_len_ == 0 || flat_.size() % trace_len_ != 0)
      throw std::invalid_argument("corpus: trace storage not a multiple of l_w");
  }

  std::size_t trace_count() const {
    return trace_len_ == 0 ? 0 : flat_.size() / trace_len_;
  }
  std::size_t trace_length() const { return trace_len_; }
  int walks_per_user() const { return t_w_; }
  std::uint64_t seed() const { return seed_; }

  const std::vector<NodeId>& vocab() const { return vocab_; }
  const NodeId& node(std::uint32_t i) const { return vocab_[i]; }

  const std::uint32_t* trace(std::size_t i) const {
    return flat_.data() + i * trace_len_;
  }

  // Occurrence count of every vocabulary entry over all traces.
  std::vector<std::int64_t> occurrence_counts() const {
    std::vector<std::int64_t> counts(vocab_.size(), 0);
    for (std::uint32_t v : flat_) ++counts[v];
    return counts;
  }

  void dump(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    for (std::size_t t = 0; t < trace_count(); ++t) {
      const std::uint32_t* tr = trace(t);
      for (std::size_t j = 0; j < trace_len_; ++j) {
        if (j) out << ' ';
        out << node_token(vocab_[tr[j]]);
      }
      out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
  }

  static WalkCorpus load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::vector<std::vector<NodeId>> traces;
    std::string line;
    std::size_t len = 0;
    std::set<NodeId> seen;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::istringstream is(line);
      std::vector<NodeId> tr;
      std::string tok;
      while (is >> tok) tr.push_back(parse_node_token(tok));
      if (len == 0)
        len = tr.size();
      else if (tr.size() != len)
        throw std::runtime_error(path + ": ragged trace lengths");
      for (const NodeId& n : tr) seen.insert(n);
      traces.push_back(std::move(tr));
    }
    if (traces.empty()) throw std::runtime_error(path + ": empty corpus");

    // Vocabulary in canonical order: users sorted, then locations sorted.
    // (NodeId ordering is (kind, id) with user < location.)
    std::vector<NodeId> vocab(seen.begin(), seen.end());
    std::map<NodeId, std::uint32_t> index;
    for (std::uint32_t i = 0; i < vocab.size(); ++i) index.emplace(vocab[i], i);

    std::vector<std::uint32_t> flat;
    flat.reserve(traces.size() * len);
    std::set<NodeId> starts;
    for (const auto& tr : traces) {
      starts.insert(tr.front());
      for (const NodeId& n : tr) flat.push_back(index.at(n));
    }
    int t_w = traces.size() % starts.size() == 0
                  ? static_cast<int>(traces.size() / starts.size())
                  : 0;
    return WalkCorpus(std::move(vocab), std::move(flat), len, t_w, 0);
  }

 private:
  std::vector<NodeId> vocab_;
  std::vector<std::uint32_t> flat_;  // trace_count * trace_len indices
  std::size_t trace_len_ = 0;
  int t_w_ = 0;
  std::uint64_t seed_ = 0;
};

// Runs t_w weighted random walks of l_w nodes from every user. Each trace
// draws from its own substream keyed by (seed, user id, trace index), so the
// corpus is one fixed value no matter how the work is scheduled.
inline WalkCorpus generate_walks(const BipartiteGraph& g, int t_w, int l_w,
                                 std::uint64_t seed, int threads = 1) {
  if (t_w < 1) throw std::invalid_argument("walks: t_w must be >= 1");
  if (l_w < 2) throw std::invalid_argument("walks: l_w must be >= 2");
  if (g.user_count() == 0) throw std::invalid_argument("walks: graph has no users");

  const std::size_t n_users = g.user_count();
  const auto len = static_cast<std::size_t>(l_w);
  std::vector<std::uint32_t> flat(n_users * static_cast<std::size_t>(t_w) * len);

  auto run_user = [&](std::size_t ui) {
    for (int k = 0; k < t_w; ++k) {
      Rng rng = substream(seed, "walk", g.node(static_cast<std::uint32_t>(ui)).id,
                          static_cast<std::uint64_t>(k));
      std::uint32_t* tr =
          flat.data() + (ui * static_cast<std::size_t>(t_w) + k) * len;
      tr[0] = static_cast<std::uint32_t>(ui);
      for (std::size_t j = 1; j < len; ++j)
        tr[j] = g.sample_neighbor(tr[j - 1], rng);
    }
  };

  if (threads <= 1) {
    for (std::size_t ui = 0; ui < n_users; ++ui) run_user(ui);
  } else {
    std::vector<std::thread> pool;
    auto n = static_cast<std::size_t>(threads);
    for (std::size_t w = 0; w < n; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t ui = w; ui < n_users; ui += n) run_user(ui);
      });
    for (auto& th : pool) th.join();
  }

  return WalkCorpus(g.nodes(), std::move(flat), len, t_w, seed);
}

// Visits every (center, context) pair within the window, clipped at trace
// boundaries: trace order, then center position, then context position, all
// ascending. fn receives vocabulary indices.
template <typename F>
void for_each_context_pair(const WalkCorpus& corpus, int window, F&& fn) {
  if (window < 1) throw std::invalid_argument("context window must be >= 1");
  const auto len = static_cast<std::ptrdiff_t>(corpus.trace_length());
  const auto w = static_cast<std::ptrdiff_t>(window);
  for (std::size_t t = 0; t < corpus.trace_count(); ++t) {
    const std::uint32_t* tr = corpus.trace(t);
    for (std::ptrdiff_t i = 0; i < len; ++i) {
      const std::ptrdiff_t lo = i - w < 0 ? 0 : i - w;
      const std::ptrdiff_t hi = i + w >= len ? len - 1 : i + w;
      for (std::ptrdiff_t j = lo; j <= hi; ++j) {
        if (j == i) continue;
        fn(tr[i], tr[j]);
      }
    }
  }
}

// Materialized form of the same stream, for small corpora and tests.
inline std::vector<ContextPair> extract_context_pairs(const WalkCorpus& corpus,
                                                      int window) {
  std::vector<ContextPair> pairs;
  for_each_context_pair(corpus, window, [&](std::uint32_t c, std::uint32_t x) {
    pairs.push_back(ContextPair{corpus.node(c), corpus.node(x)});
  });
  return pairs;
}

}  // namespace mobilink
