#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mobilink/csv.hpp"
#include "mobilink/dataset.hpp"
#include "mobilink/graph.hpp"
#include "mobilink/rng.hpp"

namespace mobilink {

enum class Mechanism { hiding, replacement, generalization };
enum class GeoLevel { low, high };   // 0.01 / 0.1 degree grid
enum class SemLevel { low, high };   // category_l2 / category_l1

inline double geo_cell_deg(GeoLevel g) { return g == GeoLevel::low ? 0.01 : 0.1; }

struct ObfuscationSpec {
  Mechanism mechanism = Mechanism::hiding;
  double rho = 0;          // hiding / replacement
  int walk_steps = 15;     // replacement; must be odd
  GeoLevel geo_level = GeoLevel::low;
  SemLevel sem_level = SemLevel::low;
  std::uint64_t seed = 1;

  void validate() const {
    if (rho < 0 || rho > 1) throw std::invalid_argument("rho must be in [0,1]");
    if (mechanism == Mechanism::replacement &&
        (walk_steps < 1 || walk_steps % 2 == 0))
      throw std::invalid_argument("walk_steps needs to be odd");
  }
};

// Obfuscated check-ins plus the provenance the metrics need: the
// generalization containment map, the per-check-in true original location,
// and snapshots of original location attributes for rebuilding recovered
// datasets. Metric-only fields are never read by the mechanisms themselves.
struct ObfuscatedDataset {
  CheckInDataset data;
  std::map<std::string, std::set<std::string>> containment;
  std::vector<std::string> true_locations;
  std::map<std::string, Coordinates> original_coords;
  std::map<std::string, std::pair<std::string, std::string>> original_categories;
};

using PopularityTable = std::map<std::string, std::int64_t>;

inline PopularityTable popularity_from(const CheckInDataset& ds) {
  PopularityTable pop;
  for (const std::string& l : ds.locations()) pop[l] = ds.location_count(l);
  return pop;
}

inline PopularityTable read_popularity(const std::string& path) {
  CsvReader reader(path, kPopularityHeader);
  PopularityTable pop;
  std::vector<std::string> f;
  while (reader.next(f)) {
    std::int64_t n = parse_int(reader, "checkin_count", f[1]);
    if (n < 0) reader.fail("checkin_count", "negative: " + f[1]);
    pop[f[0]] = n;
  }
  return pop;
}

inline void write_popularity(const PopularityTable& pop, const std::string& path) {
  CsvWriter w(path, kPopularityHeader);
  for (const auto& [l, c] : pop) w.row({l, std::to_string(c)});
}

namespace detail {

inline std::size_t round_half_up(double x) {
  return static_cast<std::size_t>(std::floor(x + 0.5));
}

// First `take` entries of a seeded partial shuffle of 0..n-1.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t take,
                                               Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t k = 0; k < take; ++k) {
    std::size_t j = k + static_cast<std::size_t>(
                            rng.below(static_cast<std::uint64_t>(n - k)));
    std::swap(idx[k], idx[j]);
  }
  idx.resize(take);
  return idx;
}

}  // namespace detail

// Deletes exactly round(rho*N) check-ins, chosen uniformly without
// replacement. The user roster survives even for users losing everything.
inline ObfuscatedDataset hide(const CheckInDataset& ds, double rho,
                              std::uint64_t seed) {
  if (rho < 0 || rho > 1) throw std::invalid_argument("rho must be in [0,1]");
  const std::size_t n = ds.size();
  const std::size_t remove =
      detail::round_half_up(rho * static_cast<double>(n));
  Rng rng = substream(seed, "hide");
  std::vector<std::size_t> removed = detail::sample_indices(n, remove, rng);
  std::vector<bool> drop(n, false);
  for (std::size_t i : removed) drop[i] = true;

  std::vector<CheckIn> kept;
  kept.reserve(n - remove);
  for (std::size_t i = 0; i < n; ++i)
    if (!drop[i]) kept.push_back(ds.checkins()[i]);

  ObfuscatedDataset out;
  out.data = CheckInDataset(std::move(kept), std::set<std::string>(ds.users()));
  return out;
}

// Rewrites round(rho*N) uniformly chosen check-ins: each selected check-in's
// location becomes the terminal of a fresh walk_steps-step random walk from
// the check-in's user on the graph of the ORIGINAL dataset. Odd step counts
// end on a location by bipartite parity. Walks draw from per-check-in
// substreams keyed by the check-in's index.
inline ObfuscatedDataset replace(const CheckInDataset& ds, double rho,
                                 int walk_steps, std::uint64_t seed) {
  if (rho < 0 || rho > 1) throw std::invalid_argument("rho must be in [0,1]");
  if (walk_steps < 1 || walk_steps % 2 == 0)
    throw std::invalid_argument("walk_steps needs to be odd");

  const std::size_t n = ds.size();
  const std::size_t count =
      detail::round_half_up(rho * static_cast<double>(n));
  Rng pick_rng = substream(seed, "replace-select");
  std::vector<std::size_t> selected = detail::sample_indices(n, count, pick_rng);
  std::sort(selected.begin(), selected.end());

  std::vector<CheckIn> rows = ds.checkins();
  if (!selected.empty()) {
    BipartiteGraph g = BipartiteGraph::build(ds);
    for (std::size_t i : selected) {
      Rng rng = substream(seed, "replace-walk", static_cast<std::uint64_t>(i));
      std::uint32_t node = g.index_of(NodeId{NodeKind::user, rows[i].user});
      for (int s = 0; s < walk_steps; ++s) node = g.sample_neighbor(node, rng);
      const NodeId& terminal = g.node(node);
      rows[i].location = terminal.id;
      Coordinates xy = ds.coords(terminal.id);
      auto cat = ds.category(terminal.id);
      rows[i].lat = xy.lat;
      rows[i].lon = xy.lon;
      rows[i].category_l1 = cat.first;
      rows[i].category_l2 = cat.second;
    }
  }

  ObfuscatedDataset out;
  out.data = CheckInDataset(std::move(rows), std::set<std::string>(ds.users()));
  return out;
}

namespace detail {

// Category labels join generalized identifiers, so they must fit the
// identifier charset; anything else becomes '_'.
inline std::string sanitize_label(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
              (c >= '0' && c <= '9') || c == '_' || c == ':' || c == '.' ||
              c == '-';
    if (!ok) c = '_';
  }
  return out;
}

}  // namespace detail

// Coarsens every location to (geo grid cell, category at the chosen level),
// jointly. Returns the containment map plus per-check-in ground truth for
// the recovery metric.
inline ObfuscatedDataset generalize(const CheckInDataset& ds, GeoLevel geo,
                                    SemLevel sem) {
  const double cell = geo_cell_deg(geo);
  ObfuscatedDataset out;
  out.original_coords = ds.location_coords();
  out.original_categories = ds.location_categories();

  std::vector<CheckIn> rows = ds.checkins();
  out.true_locations.reserve(rows.size());
  for (CheckIn& c : rows) {
    const std::string& label = sem == SemLevel::low ? c.category_l2 : c.category_l1;
    if (label.empty())
      throw std::runtime_error("generalize: check-in at " + c.location +
                               " has no category");
    auto [iy, ix] = grid_cell(c.lat, c.lon, cell);
    std::ostringstream os;
    os << "g:" << iy << ":" << ix << ":" << detail::sanitize_label(label);
    std::string gen_id = os.str();
    out.containment[gen_id].insert(c.location);
    out.true_locations.push_back(c.location);
    c.location = gen_id;
    c.lat = (static_cast<double>(iy) + 0.5) * cell;
    c.lon = (static_cast<double>(ix) + 0.5) * cell;
  }
  out.data = CheckInDataset(std::move(rows), std::set<std::string>(ds.users()));
  return out;
}

struct RecoveryResult {
  CheckInDataset data;
  double recovery_rate = 0;
};

// The external-knowledge adversary: each generalized check-in is mapped back
// to an original location drawn proportionally to popularity among the
// locations its generalized cell contains. Unknown popularity defaults to 1;
// a cell whose known popularities are all zero falls back to uniform. The
// carried ground truth is touched only to measure the hit rate.
inline RecoveryResult recover(const ObfuscatedDataset& gen,
                              const PopularityTable& pop, std::uint64_t seed) {
  if (gen.true_locations.size() != gen.data.size())
    throw std::invalid_argument("recover: dataset lacks generalization provenance");

  struct CellChoice {
    std::vector<std::string> locs;
    std::vector<std::int64_t> cum;  // cumulative popularity, strictly increasing
    std::int64_t total = 0;
  };
  std::map<std::string, CellChoice> cells;
  for (const auto& [gid, members] : gen.containment) {
    if (members.empty())
      throw std::runtime_error("recover: empty containment set for " + gid);
    CellChoice cc;
    for (const std::string& l : members) {
      auto it = pop.find(l);
      std::int64_t w = it == pop.end() ? 1 : it->second;
      if (w < 0) throw std::runtime_error("recover: negative popularity for " + l);
      cc.locs.push_back(l);
      cc.total += w;
      cc.cum.push_back(cc.total);
    }
    if (cc.total == 0) {
      cc.total = static_cast<std::int64_t>(cc.locs.size());
      for (std::size_t i = 0; i < cc.cum.size(); ++i)
        cc.cum[i] = static_cast<std::int64_t>(i + 1);
    }
    cells.emplace(gid, std::move(cc));
  }

  Rng rng = substream(seed, "recover");
  std::vector<CheckIn> rows = gen.data.checkins();
  std::size_t hits = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto it = cells.find(rows[i].location);
    if (it == cells.end())
      throw std::runtime_error("recover: no containment entry for " +
                               rows[i].location);
    const CellChoice& cc = it->second;
    auto r = static_cast<std::int64_t>(
        rng.below(static_cast<std::uint64_t>(cc.total)));
    std::size_t k = static_cast<std::size_t>(
        std::upper_bound(cc.cum.begin(), cc.cum.end(), r) - cc.cum.begin());
    const std::string& chosen = cc.locs[k];
    if (chosen == gen.true_locations[i]) ++hits;
    rows[i].location = chosen;
    auto xy = gen.original_coords.find(chosen);
    if (xy == gen.original_coords.end())
      throw std::runtime_error("recover: no coordinates for " + chosen);
    rows[i].lat = xy->second.lat;
    rows[i].lon = xy->second.lon;
    auto cat = gen.original_categories.find(chosen);
    if (cat == gen.original_categories.end())
      throw std::runtime_error("recover: no categories for " + chosen);
    rows[i].category_l1 = cat->second.first;
    rows[i].category_l2 = cat->second.second;
  }

  RecoveryResult out;
  out.recovery_rate = rows.empty()
                          ? 0.0
                          : static_cast<double>(hits) /
                                static_cast<double>(rows.size());
  out.data = CheckInDataset(std::move(rows),
                            std::set<std::string>(gen.data.users()));
  return out;
}

// ---------------------------------------------------------------------------
// Utility metric

using UserDistribution = std::map<std::string, double>;

inline UserDistribution user_distribution(const CheckInDataset& ds,
                                          const std::string& u) {
  if (!ds.has_user(u)) throw std::runtime_error("unknown user: " + u);
  UserDistribution dist;
  const auto& om = ds.omega(u);
  auto total = static_cast<double>(ds.tau(u));
  for (const auto& [l, c] : om) dist[l] = static_cast<double>(c) / total;
  return dist;
}

namespace detail {

// Jensen-Shannon divergence, log base 2, over the union support. Zero-mass
// terms contribute zero; the result lies in [0,1].
inline double js_divergence(const UserDistribution& p, const UserDistribution& q) {
  auto half_sum = [](const UserDistribution& a, const UserDistribution& b) {
    double s = 0;
    for (const auto& [l, pa] : a) {
      if (pa <= 0) continue;
      auto it = b.find(l);
      double pb = it == b.end() ? 0.0 : it->second;
      double m = (pa + pb) / 2.0;
      s += pa * std::log2(pa / m);
    }
    return s;
  };
  double v = 0.5 * half_sum(p, q) + 0.5 * half_sum(q, p);
  if (v < 0) v = 0;  // rounding guard
  if (v > 1) v = 1;
  return v;
}

}  // namespace detail

struct UserUtility {
  double phi = 0;  // utility loss
  double psi = 1;  // utility = 1 - phi
};

struct UtilityReport {
  std::map<std::string, UserUtility> per_user;
  double aggregate = 1;  // mean psi over users
};

// Per-user utility loss phi = JS divergence between the user's original and
// obfuscated location distributions; a user empty on exactly one side loses
// everything (phi 1), empty on both sides loses nothing (phi 0).
inline UtilityReport utility(const CheckInDataset& original,
                             const CheckInDataset& obfuscated) {
  if (original.users() != obfuscated.users())
    throw std::invalid_argument("utility: user sets differ");
  UtilityReport report;
  double sum_psi = 0;
  for (const std::string& u : original.users()) {
    UserDistribution po = user_distribution(original, u);
    UserDistribution pb = user_distribution(obfuscated, u);
    UserUtility uu;
    if (po.empty() && pb.empty())
      uu.phi = 0;
    else if (po.empty() || pb.empty())
      uu.phi = 1;
    else
      uu.phi = detail::js_divergence(po, pb);
    uu.psi = 1.0 - uu.phi;
    sum_psi += uu.psi;
    report.per_user.emplace(u, uu);
  }
  report.aggregate = original.users().empty()
                         ? 1.0
                         : sum_psi / static_cast<double>(original.users().size());
  return report;
}

inline const std::string kUtilityHeader = "user_id,phi,psi";
inline const std::string kContainmentHeader = "generalized_id,original_location_id";

// Rows per user plus a final aggregate line (mean phi, mean psi).
inline void write_utility(const UtilityReport& report, const std::string& path) {
  CsvWriter w(path, kUtilityHeader);
  double sum_phi = 0;
  for (const auto& [u, uu] : report.per_user) {
    w.row({u, format_double(uu.phi), format_double(uu.psi)});
    sum_phi += uu.phi;
  }
  double mean_phi = report.per_user.empty()
                        ? 0.0
                        : sum_phi / static_cast<double>(report.per_user.size());
  w.row({"aggregate", format_double(mean_phi), format_double(report.aggregate)});
}

inline void write_containment(const ObfuscatedDataset& gen,
                              const std::string& path) {
  CsvWriter w(path, kContainmentHeader);
  for (const auto& [gid, members] : gen.containment)
    for (const std::string& l : members) w.row({gid, l});
}

}  // namespace mobilink
