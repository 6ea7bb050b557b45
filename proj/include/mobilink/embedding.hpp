#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mobilink/csv.hpp"
#include "mobilink/graph.hpp"
#include "mobilink/rng.hpp"
#include "mobilink/walks.hpp"

namespace mobilink {

enum class TrainMode {
  deterministic_sequential,  // single worker, bitwise reproducible
  parallel_relaxed,          // hogwild: racy lock-free updates tolerated
};

struct TrainConfig {
  int dim = 128;
  int window = 10;
  int negatives = 5;
  double learning_rate = 0.025;
  int epochs = 5;
  std::uint64_t seed = 1;
  TrainMode mode = TrainMode::deterministic_sequential;
  double unigram_power = 0.75;
  int threads = 1;  // parallel_relaxed only

  void validate() const {
    if (dim < 1) throw std::invalid_argument("train: dim must be >= 1");
    if (window < 1) throw std::invalid_argument("train: window must be >= 1");
    if (negatives < 1) throw std::invalid_argument("train: negatives must be >= 1");
    if (!(learning_rate > 0))
      throw std::invalid_argument("train: learning_rate must be > 0");
    if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  }
};

// Input-side (f(v), used by all downstream scoring) and output-side vectors
// for every vocabulary node, as two contiguous row-major blocks. Location
// rows are kept although only user rows feed the attack; dropping them is a
// storage decision left to callers.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;

  // Input rows start uniform in [-0.5/d, 0.5/d) on a per-node substream
  // keyed by the node token, so initialization does not depend on
  // vocabulary order. Output rows start at zero.
  EmbeddingMatrix(std::vector<NodeId> vocab, int dim, std::uint64_t seed)
      : vocab_(std::move(vocab)), dim_(dim) {
    if (dim < 1) throw std::invalid_argument("embedding: dim must be >= 1");
    for (std::uint32_t i = 0; i < vocab_.size(); ++i) index_.emplace(vocab_[i], i);
    allocate(vocab_.size());
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
      Rng rng = substream(seed, "init", node_token(vocab_[i]));
      double* row = input(static_cast<std::uint32_t>(i));
      for (int j = 0; j < dim_; ++j)
        row[j] = (rng.unit() - 0.5) / static_cast<double>(dim_);
    }
  }

  int dim() const { return dim_; }
  std::size_t size() const { return vocab_.size(); }
  const std::vector<NodeId>& vocab() const { return vocab_; }

  bool has(const NodeId& n) const { return index_.count(n) > 0; }
  std::uint32_t index_of(const NodeId& n) const {
    auto it = index_.find(n);
    if (it == index_.end())
      throw std::runtime_error("embedding: no vector for " + node_token(n));
    return it->second;
  }

  double* input(std::uint32_t i) {
    return input_buf_.data() + input_off_ + static_cast<std::size_t>(i) * dim_;
  }
  const double* input(std::uint32_t i) const {
    return input_buf_.data() + input_off_ + static_cast<std::size_t>(i) * dim_;
  }
  double* output(std::uint32_t i) {
    return output_buf_.data() + output_off_ + static_cast<std::size_t>(i) * dim_;
  }
  const double* output(std::uint32_t i) const {
    return output_buf_.data() + output_off_ + static_cast<std::size_t>(i) * dim_;
  }

  const double* input_of(const NodeId& n) const { return input(index_of(n)); }
  const double* output_of(const NodeId& n) const { return output(index_of(n)); }

  bool all_finite() const {
    for (double v : input_buf_)
      if (!std::isfinite(v)) return false;
    for (double v : output_buf_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  // Dump format: "<node_count> <d>" then one line per node, token followed
  // by the d input-vector entries at 17 significant digits, then the same
  // number of output-vector lines prefixed "o". Round-trips bitwise.
  void dump(const std::string& path, bool include_output = false) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << vocab_.size() << ' ' << dim_ << '\n';
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
      out << node_token(vocab_[i]);
      const double* row = input(static_cast<std::uint32_t>(i));
      for (int j = 0; j < dim_; ++j) out << ' ' << format_double(row[j]);
      out << '\n';
    }
    if (include_output) {
      for (std::size_t i = 0; i < vocab_.size(); ++i) {
        out << "o " << node_token(vocab_[i]);
        const double* row = output(static_cast<std::uint32_t>(i));
        for (int j = 0; j < dim_; ++j) out << ' ' << format_double(row[j]);
        out << '\n';
      }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
  }

  static EmbeddingMatrix load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::size_t n = 0;
    int d = 0;
    in >> n >> d;
    if (!in || d < 1) throw std::runtime_error(path + ": bad embedding header");
    EmbeddingMatrix m;
    m.dim_ = d;
    m.vocab_.reserve(n);
    m.allocate(n);
    std::string tok;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(in >> tok)) throw std::runtime_error(path + ": truncated embedding");
      m.vocab_.push_back(parse_node_token(tok));
      double* row = m.input(static_cast<std::uint32_t>(i));
      for (int j = 0; j < d; ++j) {
        std::string num;
        if (!(in >> num)) throw std::runtime_error(path + ": truncated embedding");
        row[j] = parse_double_str(num);
      }
    }
    // Optional output block.
    while (in >> tok) {
      if (tok != "o") throw std::runtime_error(path + ": unexpected token " + tok);
      if (!(in >> tok)) throw std::runtime_error(path + ": truncated output row");
      std::uint32_t i = 0;
      {
        NodeId id = parse_node_token(tok);
        auto found = std::find(m.vocab_.begin(), m.vocab_.end(), id);
        if (found == m.vocab_.end())
          throw std::runtime_error(path + ": output row for unknown node " + tok);
        i = static_cast<std::uint32_t>(found - m.vocab_.begin());
      }
      double* row = m.output(i);
      for (int j = 0; j < d; ++j) {
        std::string num;
        if (!(in >> num)) throw std::runtime_error(path + ": truncated output row");
        row[j] = parse_double_str(num);
      }
    }
    for (std::uint32_t i = 0; i < m.vocab_.size(); ++i)
      m.index_.emplace(m.vocab_[i], i);
    return m;
  }

 private:
  // Rows live in plain vectors with the first row nudged to a 64-byte
  // boundary; when d is a multiple of 8 every row starts cache-aligned.
  // The offsets are indexes, so copied or moved matrices stay valid.
  void allocate(std::size_t n) {
    std::size_t len = n * static_cast<std::size_t>(dim_);
    input_buf_.assign(len + 7, 0.0);
    output_buf_.assign(len + 7, 0.0);
    input_off_ = align_offset(input_buf_.data());
    output_off_ = align_offset(output_buf_.data());
  }
  static std::size_t align_offset(const double* p) {
    auto addr = reinterpret_cast<std::uintptr_t>(p);
    return (64 - addr % 64) % 64 / sizeof(double);
  }

  std::vector<NodeId> vocab_;
  std::map<NodeId, std::uint32_t> index_;
  int dim_ = 0;
  std::vector<double> input_buf_;
  std::vector<double> output_buf_;
  std::size_t input_off_ = 0;
  std::size_t output_off_ = 0;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

namespace detail {

// Fixed-order sixteen-lane dot product: enough independent accumulator
// chains to hide FP-add latency, summation order fixed for determinism.
inline double dot(const double* __restrict__ a, const double* __restrict__ b,
                  int d) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, s5 = 0, s6 = 0, s7 = 0;
  double s8 = 0, s9 = 0, sa = 0, sb = 0, sc = 0, sd = 0, se = 0, sf = 0;
  int j = 0;
  for (; j + 16 <= d; j += 16) {
    s0 += a[j] * b[j];
    s1 += a[j + 1] * b[j + 1];
    s2 += a[j + 2] * b[j + 2];
    s3 += a[j + 3] * b[j + 3];
    s4 += a[j + 4] * b[j + 4];
    s5 += a[j + 5] * b[j + 5];
    s6 += a[j + 6] * b[j + 6];
    s7 += a[j + 7] * b[j + 7];
    s8 += a[j + 8] * b[j + 8];
    s9 += a[j + 9] * b[j + 9];
    sa += a[j + 10] * b[j + 10];
    sb += a[j + 11] * b[j + 11];
    sc += a[j + 12] * b[j + 12];
    sd += a[j + 13] * b[j + 13];
    se += a[j + 14] * b[j + 14];
    sf += a[j + 15] * b[j + 15];
  }
  for (; j < d; ++j) s0 += a[j] * b[j];
  double t0 = (s0 + s1) + (s2 + s3);
  double t1 = (s4 + s5) + (s6 + s7);
  double t2 = (s8 + s9) + (sa + sb);
  double t3 = (sc + sd) + (se + sf);
  return (t0 + t1) + (t2 + t3);
}

}  // namespace detail

// log p(label | context, center) of the per-pair logistic objective:
// label 1 -> log sigma(dot), label 0 -> log sigma(-dot). The log argument is
// clamped at 1e-10 so saturated pairs stay finite.
inline double loss_terms(const double* center, const double* context, int d,
                         int label) {
  double dot = detail::dot(center, context, d);
  double p = label == 1 ? sigmoid(dot) : sigmoid(-dot);
  return std::log(std::max(p, 1e-10));
}

inline double loss_terms(const std::vector<double>& center,
                         const std::vector<double>& context, int label) {
  if (center.size() != context.size())
    throw std::invalid_argument("loss_terms: length mismatch");
  return loss_terms(center.data(), context.data(),
                    static_cast<int>(center.size()), label);
}

namespace detail {

// One SGD step on a (center, context, label) triple:
//   g = label - sigma(f(center) . f'(context))
//   f(center)  += lr * g * f'(context)
//   f'(context) += lr * g * f(center before the step)
inline void sgd_update(double* __restrict__ in_c, double* __restrict__ out_x,
                       int d, int label, double lr) {
  double g = (static_cast<double>(label) - sigmoid(dot(in_c, out_x, d))) * lr;
  for (int j = 0; j < d; ++j) {
    double pre = in_c[j];
    in_c[j] += g * out_x[j];
    out_x[j] += g * pre;
  }
}

// Hogwild flavor: racy relaxed loads/stores on the shared rows. Lost
// updates are tolerated by contract.
inline void sgd_update_relaxed(double* in_c, double* out_x, int d, int label,
                               double lr) {
  double g = (static_cast<double>(label) - sigmoid(dot(in_c, out_x, d))) * lr;
  for (int j = 0; j < d; ++j) {
    std::atomic_ref<double> ic(in_c[j]), ox(out_x[j]);
    double pre = ic.load(std::memory_order_relaxed);
    double oxv = ox.load(std::memory_order_relaxed);
    ic.store(pre + g * oxv, std::memory_order_relaxed);
    ox.store(oxv + g * pre, std::memory_order_relaxed);
  }
}

}  // namespace detail

// Test-facing single step by node identity, matching the documented update.
inline void gradient_step(EmbeddingMatrix& m, const NodeId& center,
                          const NodeId& context, int label, double lr) {
  detail::sgd_update(m.input(m.index_of(center)), m.output(m.index_of(context)),
                     m.dim(), label, lr);
}

// Draws negatives proportional to occurrence_count^power over corpus nodes
// with nonzero count.
class NegativeSampler {
 public:
  NegativeSampler(const std::vector<std::int64_t>& counts, double power) {
    std::vector<double> weights;
    for (std::uint32_t i = 0; i < counts.size(); ++i) {
      if (counts[i] <= 0) continue;
      slots_.push_back(i);
      weights.push_back(std::pow(static_cast<double>(counts[i]), power));
    }
    if (slots_.size() < 2)
      throw std::invalid_argument("negative sampler: vocabulary size must be >= 2");
    table_ = AliasTable::build(weights);
  }

  std::size_t support_size() const { return slots_.size(); }

  std::uint32_t sample(Rng& rng) const { return slots_[table_.sample(rng)]; }

  // A draw colliding with `avoid` is redrawn, at most 10 times; after that
  // the collision is accepted so tiny vocabularies cannot loop forever.
  std::uint32_t sample_avoiding(std::uint32_t avoid, Rng& rng) const {
    std::uint32_t v = sample(rng);
    for (int attempt = 0; attempt < 10 && v == avoid; ++attempt) v = sample(rng);
    return v;
  }

 private:
  std::vector<std::uint32_t> slots_;
  AliasTable table_;
};

inline std::vector<NodeId> sample_negatives(const NegativeSampler& sampler,
                                            const WalkCorpus& corpus,
                                            const NodeId& positive_context,
                                            int k, Rng& rng) {
  std::uint32_t avoid = 0;
  {
    const auto& vocab = corpus.vocab();
    auto it = std::find(vocab.begin(), vocab.end(), positive_context);
    if (it == vocab.end())
      throw std::runtime_error("sample_negatives: node not in corpus");
    avoid = static_cast<std::uint32_t>(it - vocab.begin());
  }
  std::vector<NodeId> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
    out.push_back(corpus.node(sampler.sample_avoiding(avoid, rng)));
  return out;
}

namespace detail {

// Trains the trace range [lo, hi). Negative draws run on a per-trace
// substream keyed by (seed, epoch, trace index), so the draw sequence is a
// pure function of the trace no matter how traces are scheduled.
template <bool Relaxed>
void train_traces(const WalkCorpus& corpus, const TrainConfig& cfg,
                  const NegativeSampler& sampler, EmbeddingMatrix& m, int epoch,
                  std::size_t lo, std::size_t hi) {
  const int d = cfg.dim;
  const auto len = static_cast<std::ptrdiff_t>(corpus.trace_length());
  const auto w = static_cast<std::ptrdiff_t>(cfg.window);
  std::vector<std::uint32_t> negs(static_cast<std::size_t>(cfg.negatives));
  for (std::size_t t = lo; t < hi; ++t) {
    Rng rng = substream(cfg.seed, "negatives", static_cast<std::uint64_t>(epoch),
                        static_cast<std::uint64_t>(t));
    const std::uint32_t* tr = corpus.trace(t);
    for (std::ptrdiff_t i = 0; i < len; ++i) {
      const std::ptrdiff_t jlo = i - w < 0 ? 0 : i - w;
      const std::ptrdiff_t jhi = i + w >= len ? len - 1 : i + w;
      double* in_c = m.input(tr[i]);
      for (std::ptrdiff_t j = jlo; j <= jhi; ++j) {
        if (j == i) continue;
        const std::uint32_t ctx = tr[j];
        // Negatives are drawn up front (same stream, same order) so their
        // rows can be prefetched past the positive update.
        for (int neg = 0; neg < cfg.negatives; ++neg) {
          negs[neg] = sampler.sample_avoiding(ctx, rng);
          const char* row = reinterpret_cast<const char*>(m.output(negs[neg]));
          for (int off = 0; off < d; off += 8)
            __builtin_prefetch(row + off * sizeof(double));
        }
        if constexpr (Relaxed)
          sgd_update_relaxed(in_c, m.output(ctx), d, 1, cfg.learning_rate);
        else
          sgd_update(in_c, m.output(ctx), d, 1, cfg.learning_rate);
        for (int neg = 0; neg < cfg.negatives; ++neg) {
          if constexpr (Relaxed)
            sgd_update_relaxed(in_c, m.output(negs[neg]), d, 0, cfg.learning_rate);
          else
            sgd_update(in_c, m.output(negs[neg]), d, 0, cfg.learning_rate);
        }
      }
    }
  }
}

}  // namespace detail

inline EmbeddingMatrix train(const WalkCorpus& corpus, const TrainConfig& cfg) {
  cfg.validate();
  if (corpus.trace_count() == 0)
    throw std::invalid_argument("train: empty corpus");

  EmbeddingMatrix m(corpus.vocab(), cfg.dim, cfg.seed);
  NegativeSampler sampler(corpus.occurrence_counts(), cfg.unigram_power);

  const std::size_t n_traces = corpus.trace_count();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.mode == TrainMode::deterministic_sequential || cfg.threads <= 1) {
      detail::train_traces<false>(corpus, cfg, sampler, m, epoch, 0, n_traces);
    } else {
      std::vector<std::thread> pool;
      const auto n = static_cast<std::size_t>(cfg.threads);
      for (std::size_t wkr = 0; wkr < n; ++wkr) {
        std::size_t lo = n_traces * wkr / n;
        std::size_t hi = n_traces * (wkr + 1) / n;
        pool.emplace_back([&, lo, hi] {
          detail::train_traces<true>(corpus, cfg, sampler, m, epoch, lo, hi);
        });
      }
      for (auto& th : pool) th.join();
    }
    if (!m.all_finite())
      throw std::runtime_error("train: non-finite parameter after epoch " +
                               std::to_string(epoch));
  }
  return m;
}

}  // namespace mobilink
