#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mobilink/dataset.hpp"
#include "mobilink/rng.hpp"

namespace mobilink {

enum class BaselineModel {
  common_p,
  overlap_p,
  w_common_p,
  w_overlap_p,
  aa_ent,
  min_ent,
  aa_p,
  min_p,
  geodist,
  w_geodist,
  pp,
  diversity,
  w_frequency,
  personal,
};

inline const std::vector<std::pair<std::string, BaselineModel>>&
baseline_names() {
  static const std::vector<std::pair<std::string, BaselineModel>> names = {
      {"common_p", BaselineModel::common_p},
      {"overlap_p", BaselineModel::overlap_p},
      {"w_common_p", BaselineModel::w_common_p},
      {"w_overlap_p", BaselineModel::w_overlap_p},
      {"aa_ent", BaselineModel::aa_ent},
      {"min_ent", BaselineModel::min_ent},
      {"aa_p", BaselineModel::aa_p},
      {"min_p", BaselineModel::min_p},
      {"geodist", BaselineModel::geodist},
      {"w_geodist", BaselineModel::w_geodist},
      {"pp", BaselineModel::pp},
      {"diversity", BaselineModel::diversity},
      {"w_frequency", BaselineModel::w_frequency},
      {"personal", BaselineModel::personal}};
  return names;
}

inline BaselineModel parse_baseline(const std::string& s) {
  for (const auto& [name, m] : baseline_names())
    if (name == s) return m;
  throw std::invalid_argument("unknown baseline model: '" + s + "'");
}

inline std::string baseline_name(BaselineModel m) {
  for (const auto& [name, mm] : baseline_names())
    if (mm == m) return name;
  return "?";
}

// Models that are undefined without a shared location; for those the score
// falls back to a uniform random guess.
inline bool requires_common(BaselineModel m) {
  switch (m) {
    case BaselineModel::aa_ent:
    case BaselineModel::min_ent:
    case BaselineModel::aa_p:
    case BaselineModel::min_p:
    case BaselineModel::diversity:
    case BaselineModel::w_frequency:
    case BaselineModel::personal:
      return true;
    default:
      return false;
  }
}

// Great-circle distance in km, mean earth radius 6371.
inline double haversine(double lat1, double lon1, double lat2, double lon2) {
  constexpr double kRadius = 6371.0;
  constexpr double kDeg = 3.14159265358979323846 / 180.0;
  double dlat = (lat2 - lat1) * kDeg;
  double dlon = (lon2 - lon1) * kDeg;
  double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
             std::cos(lat1 * kDeg) * std::cos(lat2 * kDeg) *
                 std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kRadius * std::asin(std::min(1.0, std::sqrt(a)));
}

// Shannon entropy (natural log) of the visitor distribution of l.
inline double location_entropy(const CheckInDataset& ds, const std::string& l) {
  const auto& vis = ds.visitors(l);
  if (vis.empty()) throw std::runtime_error("location has no check-ins: " + l);
  double total = 0;
  for (const auto& [u, c] : vis) total += static_cast<double>(c);
  double h = 0;
  for (const auto& [u, c] : vis) {
    double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  return h;
}

// Distinct visitor count, the popularity notion of the *_p baselines.
inline std::int64_t location_popularity(const CheckInDataset& ds,
                                        const std::string& l) {
  return static_cast<std::int64_t>(ds.visitors(l).size());
}

// Check-in-count-weighted mean of the coordinates u has visited.
inline Coordinates home_location(const CheckInDataset& ds, const std::string& u) {
  const auto& om = ds.omega(u);
  if (om.empty()) throw std::runtime_error("user has no check-ins: " + u);
  double lat = 0, lon = 0, total = 0;
  for (const auto& [l, c] : om) {
    Coordinates xy = ds.coords(l);
    lat += xy.lat * static_cast<double>(c);
    lon += xy.lon * static_cast<double>(c);
    total += static_cast<double>(c);
  }
  return Coordinates{lat / total, lon / total};
}

// Unweighted mean over distinct visited locations.
inline Coordinates home_location_unweighted(const CheckInDataset& ds,
                                            const std::string& u) {
  const auto& om = ds.omega(u);
  if (om.empty()) throw std::runtime_error("user has no check-ins: " + u);
  double lat = 0, lon = 0;
  for (const auto& [l, c] : om) {
    Coordinates xy = ds.coords(l);
    lat += xy.lat;
    lon += xy.lon;
  }
  auto n = static_cast<double>(om.size());
  return Coordinates{lat / n, lon / n};
}

// One heuristic score; higher always means "more likely friends". rng is
// consumed only by the random-guess fallback of common-location models.
inline double baseline_score(const CheckInDataset& ds, const std::string& u,
                             const std::string& v, BaselineModel m, Rng& rng) {
  if (u == v) throw std::invalid_argument("baseline_score: identical users");
  if (!ds.has_user(u)) throw std::runtime_error("unknown user: " + u);
  if (!ds.has_user(v)) throw std::runtime_error("unknown user: " + v);

  const auto& ou = ds.omega(u);
  const auto& ov = ds.omega(v);
  std::vector<std::string> common;
  for (const auto& [l, c] : ou)
    if (ov.count(l)) common.push_back(l);

  if (requires_common(m) && common.empty()) return rng.unit();

  switch (m) {
    case BaselineModel::common_p:
      return static_cast<double>(common.size());
    case BaselineModel::overlap_p: {
      std::size_t uni = ou.size() + ov.size() - common.size();
      return uni == 0 ? 0.0
                      : static_cast<double>(common.size()) /
                            static_cast<double>(uni);
    }
    case BaselineModel::w_common_p: {
      double s = 0;
      for (const auto& l : common)
        s += static_cast<double>(ou.at(l) + ov.at(l));
      return s;
    }
    case BaselineModel::w_overlap_p: {
      double s = 0;
      for (const auto& l : common)
        s += static_cast<double>(ou.at(l) + ov.at(l));
      double denom = static_cast<double>(ds.tau(u) + ds.tau(v));
      return denom == 0 ? 0.0 : s / denom;
    }
    case BaselineModel::aa_ent: {
      double s = 0;
      for (const auto& l : common) s += 1.0 / (1e-6 + location_entropy(ds, l));
      return s;
    }
    case BaselineModel::min_ent: {
      double best = location_entropy(ds, common[0]);
      for (const auto& l : common) best = std::min(best, location_entropy(ds, l));
      return -best;
    }
    case BaselineModel::aa_p: {
      double s = 0;
      for (const auto& l : common)
        s += 1.0 / std::log(1.0 + static_cast<double>(location_popularity(ds, l)));
      return s;
    }
    case BaselineModel::min_p: {
      std::int64_t best = location_popularity(ds, common[0]);
      for (const auto& l : common)
        best = std::min(best, location_popularity(ds, l));
      return -static_cast<double>(best);
    }
    case BaselineModel::geodist: {
      Coordinates a = home_location_unweighted(ds, u);
      Coordinates b = home_location_unweighted(ds, v);
      return -haversine(a.lat, a.lon, b.lat, b.lon);
    }
    case BaselineModel::w_geodist: {
      Coordinates a = home_location(ds, u);
      Coordinates b = home_location(ds, v);
      return -haversine(a.lat, a.lon, b.lat, b.lon);
    }
    case BaselineModel::pp:
      return static_cast<double>(ou.size()) * static_cast<double>(ov.size());
    case BaselineModel::diversity: {
      double total = 0;
      std::vector<double> mins;
      for (const auto& l : common) {
        auto mc = static_cast<double>(std::min(ou.at(l), ov.at(l)));
        mins.push_back(mc);
        total += mc;
      }
      double h = 0;
      for (double mc : mins) {
        double p = mc / total;
        h -= p * std::log(p);
      }
      return h;
    }
    case BaselineModel::w_frequency: {
      double s = 0;
      for (const auto& l : common)
        s += static_cast<double>(std::min(ou.at(l), ov.at(l))) /
             static_cast<double>(location_popularity(ds, l));
      return s;
    }
    case BaselineModel::personal: {
      double s = 0;
      for (const auto& l : common)
        s += 1.0 / (static_cast<double>(ou.at(l)) * static_cast<double>(ov.at(l)));
      return s;
    }
  }
  throw std::logic_error("unreachable baseline");
}

}  // namespace mobilink
