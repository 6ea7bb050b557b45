#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mobilink/embedding.hpp"

namespace mobilink {

enum class Measure {
  cosine,
  euclidean,
  correlation,
  chebyshev,
  braycurtis,
  canberra,
  manhattan,
};

inline const std::vector<std::pair<std::string, Measure>>& measure_names() {
  static const std::vector<std::pair<std::string, Measure>> names = {
      {"cosine", Measure::cosine},         {"euclidean", Measure::euclidean},
      {"correlation", Measure::correlation}, {"chebyshev", Measure::chebyshev},
      {"braycurtis", Measure::braycurtis}, {"canberra", Measure::canberra},
      {"manhattan", Measure::manhattan}};
  return names;
}

inline Measure parse_measure(const std::string& s) {
  for (const auto& [name, m] : measure_names())
    if (name == s) return m;
  throw std::invalid_argument("unknown measure: '" + s + "'");
}

inline std::string measure_name(Measure m) {
  for (const auto& [name, mm] : measure_names())
    if (mm == m) return name;
  return "?";
}

// Cosine and correlation already read as similarities; the other five are
// distances.
inline bool higher_is_similar(Measure m) {
  return m == Measure::cosine || m == Measure::correlation;
}

// The plain formula value for each measure. Degenerate inputs take fixed
// conventional values instead of NaN: zero-norm cosine and zero-variance
// correlation give 0, a Canberra term with |a_i|+|b_i| = 0 contributes 0,
// and Bray-Curtis with a zero denominator gives 0.
inline double raw_measure(const double* a, const double* b, int d, Measure m) {
  switch (m) {
    case Measure::cosine: {
      double dot = 0, na = 0, nb = 0;
      for (int i = 0; i < d; ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
      }
      if (na == 0 || nb == 0) return 0.0;
      return dot / (std::sqrt(na) * std::sqrt(nb));
    }
    case Measure::euclidean: {
      double s = 0;
      for (int i = 0; i < d; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
      return std::sqrt(s);
    }
    case Measure::correlation: {
      double ma = 0, mb = 0;
      for (int i = 0; i < d; ++i) {
        ma += a[i];
        mb += b[i];
      }
      ma /= d;
      mb /= d;
      double dot = 0, na = 0, nb = 0;
      for (int i = 0; i < d; ++i) {
        double xa = a[i] - ma, xb = b[i] - mb;
        dot += xa * xb;
        na += xa * xa;
        nb += xb * xb;
      }
      if (na == 0 || nb == 0) return 0.0;
      return dot / (std::sqrt(na) * std::sqrt(nb));
    }
    case Measure::chebyshev: {
      double best = 0;
      for (int i = 0; i < d; ++i) best = std::max(best, std::fabs(a[i] - b[i]));
      return best;
    }
    case Measure::braycurtis: {
      double num = 0, den = 0;
      for (int i = 0; i < d; ++i) {
        num += std::fabs(a[i] - b[i]);
        den += std::fabs(a[i] + b[i]);
      }
      if (den == 0) return 0.0;
      return num / den;
    }
    case Measure::canberra: {
      double s = 0;
      for (int i = 0; i < d; ++i) {
        double den = std::fabs(a[i]) + std::fabs(b[i]);
        if (den > 0) s += std::fabs(a[i] - b[i]) / den;
      }
      return s;
    }
    case Measure::manhattan: {
      double s = 0;
      for (int i = 0; i < d; ++i) s += std::fabs(a[i] - b[i]);
      return s;
    }
  }
  throw std::logic_error("unreachable measure");
}

inline double raw_measure(const std::vector<double>& a,
                          const std::vector<double>& b, Measure m) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("raw_measure: need equal nonzero lengths");
  return raw_measure(a.data(), b.data(), static_cast<int>(a.size()), m);
}

// Oriented score: larger always means "more likely friends", so distance
// measures are negated.
inline double oriented_score(const double* a, const double* b, int d, Measure m) {
  double v = raw_measure(a, b, d, m);
  return higher_is_similar(m) ? v : -v;
}

inline double score_pair(const EmbeddingMatrix& emb, const std::string& u,
                         const std::string& v, Measure m) {
  NodeId nu{NodeKind::user, u}, nv{NodeKind::user, v};
  if (!emb.has(nu)) throw std::runtime_error("no vector for user " + u);
  if (!emb.has(nv)) throw std::runtime_error("no vector for user " + v);
  return oriented_score(emb.input_of(nu), emb.input_of(nv), emb.dim(), m);
}

enum class PairClass { friend_pair, stranger_pair };

inline PairClass classify_pair(double score, double threshold) {
  return score > threshold ? PairClass::friend_pair : PairClass::stranger_pair;
}

}  // namespace mobilink
