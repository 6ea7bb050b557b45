#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mobilink/baselines.hpp"
#include "mobilink/dataset.hpp"
#include "mobilink/defense.hpp"
#include "mobilink/embedding.hpp"
#include "mobilink/evaluation.hpp"
#include "mobilink/graph.hpp"
#include "mobilink/similarity.hpp"
#include "mobilink/walks.hpp"

namespace mobilink {

// The full attack configuration; defaults follow the reference setup
// (20 walks of 100 nodes per user, 128 dimensions, 10-node context window
// each side, learning rate 0.025, cosine scoring).
struct AttackParams {
  int t_w = 20;
  int l_w = 100;
  int dim = 128;
  int window = 10;
  int negatives = 5;
  double learning_rate = 0.025;
  int epochs = 5;
  double unigram_power = 0.75;
  Measure measure = Measure::cosine;
  TrainMode mode = TrainMode::deterministic_sequential;
  int threads = 1;
  std::uint64_t seed = 1;

  TrainConfig train_config() const {
    TrainConfig cfg;
    cfg.dim = dim;
    cfg.window = window;
    cfg.negatives = negatives;
    cfg.learning_rate = learning_rate;
    cfg.epochs = epochs;
    cfg.seed = seed;
    cfg.mode = mode;
    cfg.unigram_power = unigram_power;
    cfg.threads = threads;
    return cfg;
  }
};

struct AttackResult {
  EmbeddingMatrix embedding;
  std::vector<double> scores;  // aligned with pairs
  std::vector<int> labels;
  double auc = 0;
};

// Scores one pair on the trained embedding. A user without a vector (all
// check-ins obfuscated away) is treated as the zero vector, consistent with
// the zero-norm conventions of the measures.
inline double score_pair_or_zero(const EmbeddingMatrix& emb,
                                 const std::string& a, const std::string& b,
                                 Measure m) {
  NodeId na{NodeKind::user, a}, nb{NodeKind::user, b};
  static thread_local std::vector<double> zero;
  if (static_cast<int>(zero.size()) < emb.dim()) zero.assign(emb.dim(), 0.0);
  const double* va = emb.has(na) ? emb.input_of(na) : zero.data();
  const double* vb = emb.has(nb) ? emb.input_of(nb) : zero.data();
  return oriented_score(va, vb, emb.dim(), m);
}

// Graph -> walks -> embedding -> pair scores -> AUC, one deterministic unit.
inline AttackResult run_attack(const CheckInDataset& ds,
                               const LabeledPairSet& pairs,
                               const AttackParams& params) {
  BipartiteGraph g = BipartiteGraph::build(ds);
  WalkCorpus corpus = generate_walks(g, params.t_w, params.l_w,
                                     derive_seed(params.seed, "walks"),
                                     params.threads);
  TrainConfig cfg = params.train_config();
  cfg.seed = derive_seed(params.seed, "train");
  AttackResult result;
  result.embedding = train(corpus, cfg);
  result.scores.reserve(pairs.pairs.size());
  result.labels.reserve(pairs.pairs.size());
  for (const LabeledPair& p : pairs.pairs) {
    result.scores.push_back(
        score_pair_or_zero(result.embedding, p.a, p.b, params.measure));
    result.labels.push_back(p.label);
  }
  result.auc = auc(result.scores, result.labels);
  return result;
}

// Scores the same pairs with one heuristic baseline; the random-guess
// fallback draws from a per-pair substream keyed by the sorted pair, so the
// result is independent of evaluation order.
inline AttackResult run_baseline(const CheckInDataset& ds,
                                 const LabeledPairSet& pairs,
                                 BaselineModel model, std::uint64_t seed) {
  AttackResult result;
  for (const LabeledPair& p : pairs.pairs) {
    auto key = SocialGraph::canonical(p.a, p.b);
    Rng rng = substream(seed, "baseline", key.first + "|" + key.second);
    result.scores.push_back(baseline_score(ds, p.a, p.b, model, rng));
    result.labels.push_back(p.label);
  }
  result.auc = auc(result.scores, result.labels);
  return result;
}

// Mean AUC of `reps` uniform label shuffles; sanity control for criterion
// experiments (should hover near 0.5).
inline double label_shuffle_auc(const std::vector<double>& scores,
                                const std::vector<int>& labels,
                                std::uint64_t seed, int reps) {
  if (reps < 1) throw std::invalid_argument("label_shuffle_auc: reps >= 1");
  double sum = 0;
  for (int r = 0; r < reps; ++r) {
    std::vector<int> shuffled = labels;
    Rng rng = substream(seed, "shuffle", static_cast<std::uint64_t>(r));
    for (std::size_t k = shuffled.size(); k > 1; --k) {
      auto j = static_cast<std::size_t>(rng.below(k));
      std::swap(shuffled[k - 1], shuffled[j]);
    }
    sum += auc(scores, shuffled);
  }
  return sum / reps;
}

struct DefenseOutcome {
  double auc = 0;
  double utility = 0;        // aggregate psi
  double recovery_rate = 0;  // generalization only, else 0
};

// One defended run: obfuscate, recover if generalized, re-run the attack on
// the fixed evaluation pairs, and measure utility against the original.
// Utility always compares distributions over original location identifiers.
inline DefenseOutcome run_defense(const CheckInDataset& ds,
                                  const LabeledPairSet& pairs,
                                  const ObfuscationSpec& spec,
                                  const PopularityTable& pop,
                                  const AttackParams& params) {
  spec.validate();
  ObfuscatedDataset obf;
  switch (spec.mechanism) {
    case Mechanism::hiding:
      obf = hide(ds, spec.rho, spec.seed);
      break;
    case Mechanism::replacement:
      obf = replace(ds, spec.rho, spec.walk_steps, spec.seed);
      break;
    case Mechanism::generalization:
      obf = generalize(ds, spec.geo_level, spec.sem_level);
      break;
  }

  DefenseOutcome out;
  const CheckInDataset* attacked = &obf.data;
  CheckInDataset recovered;
  if (spec.mechanism == Mechanism::generalization) {
    RecoveryResult rec = recover(obf, pop, derive_seed(spec.seed, "recovery"));
    out.recovery_rate = rec.recovery_rate;
    recovered = std::move(rec.data);
    attacked = &recovered;
  }

  AttackResult attack = run_attack(*attacked, pairs, params);
  out.auc = attack.auc;
  out.utility = utility(ds, *attacked).aggregate;
  return out;
}

}  // namespace mobilink
