#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mobilink/csv.hpp"
#include "mobilink/dataset.hpp"
#include "mobilink/rng.hpp"

namespace mobilink {

struct LabeledPair {
  std::string a;
  std::string b;
  int label = 0;  // 1 friend, 0 stranger
  friend bool operator==(const LabeledPair&, const LabeledPair&) = default;
};

struct LabeledPairSet {
  std::vector<LabeledPair> pairs;
  std::uint64_t seed = 0;
};

// Balanced evaluation set: every friend pair among `users`, plus an
// equal-sized uniform sample (without replacement) of stranger pairs. Small
// candidate spaces are enumerated and partially shuffled; large ones use
// capped rejection sampling on index pairs.
inline LabeledPairSet sample_pairs(const SocialGraph& social,
                                   const std::set<std::string>& users,
                                   std::uint64_t seed) {
  LabeledPairSet out;
  out.seed = seed;
  std::vector<LabeledPair> positives;
  for (const auto& [a, b] : social.edges())
    if (users.count(a) && users.count(b))
      positives.push_back(LabeledPair{a, b, 1});
  if (positives.empty())
    throw std::runtime_error("sample_pairs: no friend pairs among the users");

  const std::vector<std::string> roster(users.begin(), users.end());
  const std::size_t n = roster.size();
  const std::size_t total_pairs = n * (n - 1) / 2;
  const std::size_t need = positives.size();
  if (total_pairs < need + positives.size())
    throw std::runtime_error("sample_pairs: not enough stranger pairs");

  Rng rng = substream(seed, "strangers");
  std::vector<std::pair<std::string, std::string>> picked;

  if (total_pairs < 1000000) {
    std::vector<std::pair<std::string, std::string>> candidates;
    candidates.reserve(total_pairs - positives.size());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (!social.has(roster[i], roster[j]))
          candidates.emplace_back(roster[i], roster[j]);
    if (candidates.size() < need)
      throw std::runtime_error("sample_pairs: not enough stranger pairs");
    for (std::size_t k = 0; k < need; ++k) {
      std::size_t j = k + static_cast<std::size_t>(
                              rng.below(static_cast<std::uint64_t>(candidates.size() - k)));
      std::swap(candidates[k], candidates[j]);
    }
    picked.assign(candidates.begin(), candidates.begin() + need);
  } else {
    std::set<std::pair<std::string, std::string>> chosen;
    const std::uint64_t cap = static_cast<std::uint64_t>(need) * 1000;
    std::uint64_t attempts = 0;
    while (chosen.size() < need) {
      if (++attempts > cap)
        throw std::runtime_error("sample_pairs: rejection sampling cap reached");
      auto i = static_cast<std::size_t>(rng.below(n));
      auto j = static_cast<std::size_t>(rng.below(n));
      if (i == j) continue;
      auto key = SocialGraph::canonical(roster[i], roster[j]);
      if (social.has(key.first, key.second)) continue;
      chosen.insert(key);
    }
    picked.assign(chosen.begin(), chosen.end());
  }

  std::sort(picked.begin(), picked.end());
  out.pairs = std::move(positives);
  for (const auto& [a, b] : picked) out.pairs.push_back(LabeledPair{a, b, 0});
  return out;
}

// Mann-Whitney AUC with the average-rank tie convention: each tie between a
// positive and a negative counts one half.
inline double auc(const std::vector<double>& scores,
                  const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("auc: length mismatch");
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw std::invalid_argument("auc: labels must be 0/1");
    n_pos += static_cast<std::size_t>(l);
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("auc: need both classes");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return scores[i] < scores[j]; });

  // Average ranks over tie groups, 1-based.
  double rank_sum_pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] == 1) rank_sum_pos += avg_rank;
    i = j;
  }
  double u_stat = rank_sum_pos - static_cast<double>(n_pos) *
                                     (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u_stat / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

struct RocCurve {
  // points[i] = (fpr, tpr) after admitting the i-th distinct score group;
  // thresholds[i] is that group's score (+inf for the initial (0,0) point).
  std::vector<std::pair<double, double>> points;
  std::vector<double> thresholds;
  double auc = 0;

  double trapezoid_area() const {
    double area = 0;
    for (std::size_t i = 1; i < points.size(); ++i) {
      double dx = points[i].first - points[i - 1].first;
      area += dx * (points[i].second + points[i - 1].second) / 2.0;
    }
    return area;
  }
};

// Threshold sweep over distinct scores, descending: point i admits every
// score >= thresholds[i] as predicted-friend.
inline RocCurve roc(const std::vector<double>& scores,
                    const std::vector<int>& labels) {
  double area = auc(scores, labels);  // validates inputs

  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (int l : labels) n_pos += static_cast<std::size_t>(l);
  const std::size_t n_neg = n - n_pos;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return scores[i] > scores[j];
  });

  RocCurve curve;
  curve.auc = area;
  curve.points.emplace_back(0.0, 0.0);
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  std::size_t tp = 0, fp = 0, i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1)
        ++tp;
      else
        ++fp;
    }
    curve.points.emplace_back(static_cast<double>(fp) / static_cast<double>(n_neg),
                              static_cast<double>(tp) / static_cast<double>(n_pos));
    curve.thresholds.push_back(scores[order[i]]);
    i = j;
  }
  return curve;
}

// Buckets pairs by common-location count k = 0..max_k; pairs above max_k
// are dropped; per-bucket label balance is inherited, not re-enforced.
inline std::map<int, LabeledPairSet> stratify_by_common_locations(
    const LabeledPairSet& pairs, const CheckInDataset& ds, int max_k) {
  if (max_k < 0) throw std::invalid_argument("stratify: max_k must be >= 0");
  std::map<int, LabeledPairSet> buckets;
  for (int k = 0; k <= max_k; ++k) buckets[k].seed = pairs.seed;
  for (const LabeledPair& p : pairs.pairs) {
    const auto& oa = ds.omega(p.a);
    const auto& ob = ds.omega(p.b);
    int k = 0;
    for (const auto& [l, c] : oa)
      if (ob.count(l)) ++k;
    if (k <= max_k) buckets[k].pairs.push_back(p);
  }
  return buckets;
}

// ---------------------------------------------------------------------------
// Result files

inline const std::string kScoresHeader = "user_a,user_b,label,score";
inline const std::string kScoresModelHeader = "user_a,user_b,label,score,model";
inline const std::string kReportHeader = "experiment,config_json,seed,n_pairs,auc";
inline const std::string kRocHeader = "threshold,fpr,tpr";

inline void write_scores(const LabeledPairSet& pairs,
                         const std::vector<double>& scores,
                         const std::string& path,
                         const std::string& model = "") {
  if (pairs.pairs.size() != scores.size())
    throw std::invalid_argument("write_scores: length mismatch");
  CsvWriter w(path, model.empty() ? kScoresHeader : kScoresModelHeader);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const LabeledPair& p = pairs.pairs[i];
    std::vector<std::string> row = {p.a, p.b, std::to_string(p.label),
                                    format_double(scores[i])};
    if (!model.empty()) row.push_back(model);
    w.row(row);
  }
}

struct ScoreFile {
  LabeledPairSet pairs;
  std::vector<double> scores;
  std::string model;  // empty for embedding scores
};

// Accepts both score layouts (with or without the model column).
inline ScoreFile read_scores(const std::string& path) {
  bool has_model = false;
  {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw std::runtime_error("cannot open: " + path);
    std::string header;
    std::getline(probe, header);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    has_model = header == kScoresModelHeader;
  }
  CsvReader reader(path, has_model ? kScoresModelHeader : kScoresHeader);
  ScoreFile out;
  std::vector<std::string> f;
  while (reader.next(f)) {
    LabeledPair p;
    p.a = f[0];
    p.b = f[1];
    std::int64_t label = parse_int(reader, "label", f[2]);
    if (label != 0 && label != 1) reader.fail("label", "must be 0 or 1");
    p.label = static_cast<int>(label);
    out.pairs.pairs.push_back(std::move(p));
    out.scores.push_back(parse_double(reader, "score", f[3]));
    if (has_model) out.model = f[4];
  }
  return out;
}

struct ExperimentRow {
  std::string experiment;
  std::string config_json;
  std::uint64_t seed = 0;
  std::size_t n_pairs = 0;
  double auc = 0;
};

inline void write_report(const std::vector<ExperimentRow>& rows,
                         const std::string& path) {
  CsvWriter w(path, kReportHeader);
  for (const ExperimentRow& r : rows)
    w.row({r.experiment, csv_quote(r.config_json), std::to_string(r.seed),
           std::to_string(r.n_pairs), format_double(r.auc)});
}

inline void write_roc(const RocCurve& curve, const std::string& path) {
  CsvWriter w(path, kRocHeader);
  for (std::size_t i = 0; i < curve.points.size(); ++i)
    w.row({format_double(curve.thresholds[i]),
           format_double(curve.points[i].first),
           format_double(curve.points[i].second)});
}

}  // namespace mobilink
