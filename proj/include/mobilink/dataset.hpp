#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mobilink/csv.hpp"
#include "mobilink/rng.hpp"

namespace mobilink {

struct CheckIn {
  std::string user;
  std::int64_t time = 0;
  double lat = 0;
  double lon = 0;
  std::string location;
  std::string category_l1;
  std::string category_l2;
};

struct Coordinates {
  double lat = 0;
  double lon = 0;
};

// A check-in corpus plus the per-user / per-location indexes everything else
// queries. The check-in list is authoritative; every index is derived from it
// by rebuild_indexes(). The user roster is the one exception: it may contain
// users whose check-ins were all removed by an obfuscation step, so that
// downstream evaluation keeps a stable user set.
class CheckInDataset {
 public:
  CheckInDataset() = default;

  explicit CheckInDataset(std::vector<CheckIn> checkins,
                          std::set<std::string> roster = {})
      : checkins_(std::move(checkins)), users_(std::move(roster)) {
    rebuild_indexes();
  }

  const std::vector<CheckIn>& checkins() const { return checkins_; }
  const std::set<std::string>& users() const { return users_; }
  const std::set<std::string>& locations() const { return locations_; }

  bool has_user(const std::string& u) const { return users_.count(u) > 0; }
  bool has_location(const std::string& l) const { return locations_.count(l) > 0; }

  // |tau(u)|: number of check-ins of u.
  std::int64_t tau(const std::string& u) const {
    auto it = user_count_.find(u);
    return it == user_count_.end() ? 0 : it->second;
  }

  // |tau(u, l)|: number of check-ins of u at l.
  std::int64_t tau(const std::string& u, const std::string& l) const {
    auto it = user_loc_count_.find(u);
    if (it == user_loc_count_.end()) return 0;
    auto jt = it->second.find(l);
    return jt == it->second.end() ? 0 : jt->second;
  }

  // omega(u): the distinct locations u has visited, with per-location counts.
  const std::map<std::string, std::int64_t>& omega(const std::string& u) const {
    static const std::map<std::string, std::int64_t> kEmpty;
    auto it = user_loc_count_.find(u);
    return it == user_loc_count_.end() ? kEmpty : it->second;
  }

  std::int64_t location_count(const std::string& l) const {
    auto it = loc_count_.find(l);
    return it == loc_count_.end() ? 0 : it->second;
  }

  // Visitors of l with their check-in counts.
  const std::map<std::string, std::int64_t>& visitors(const std::string& l) const {
    static const std::map<std::string, std::int64_t> kEmpty;
    auto it = loc_user_count_.find(l);
    return it == loc_user_count_.end() ? kEmpty : it->second;
  }

  Coordinates coords(const std::string& l) const {
    auto it = loc_coords_.find(l);
    if (it == loc_coords_.end())
      throw std::runtime_error("unknown location: " + l);
    return it->second;
  }

  std::pair<std::string, std::string> category(const std::string& l) const {
    auto it = loc_category_.find(l);
    if (it == loc_category_.end())
      throw std::runtime_error("unknown location: " + l);
    return it->second;
  }

  const std::map<std::string, Coordinates>& location_coords() const {
    return loc_coords_;
  }
  const std::map<std::string, std::pair<std::string, std::string>>&
  location_categories() const {
    return loc_category_;
  }

  std::size_t size() const { return checkins_.size(); }
  bool empty() const { return checkins_.empty(); }

  void rebuild_indexes() {
    locations_.clear();
    user_loc_count_.clear();
    loc_user_count_.clear();
    user_count_.clear();
    loc_count_.clear();
    loc_coords_.clear();
    loc_category_.clear();
    for (const CheckIn& c : checkins_) {
      users_.insert(c.user);
      locations_.insert(c.location);
      ++user_loc_count_[c.user][c.location];
      ++loc_user_count_[c.location][c.user];
      ++user_count_[c.user];
      ++loc_count_[c.location];
      // First row for a location fixes its coordinates and categories.
      loc_coords_.emplace(c.location, Coordinates{c.lat, c.lon});
      loc_category_.emplace(c.location,
                            std::make_pair(c.category_l1, c.category_l2));
    }
  }

 private:
  std::vector<CheckIn> checkins_;
  std::set<std::string> users_;      // roster; superset of active users
  std::set<std::string> locations_;  // exactly the locations present in checkins
  std::map<std::string, std::map<std::string, std::int64_t>> user_loc_count_;
  std::map<std::string, std::map<std::string, std::int64_t>> loc_user_count_;
  std::map<std::string, std::int64_t> user_count_;
  std::map<std::string, std::int64_t> loc_count_;
  std::map<std::string, Coordinates> loc_coords_;
  std::map<std::string, std::pair<std::string, std::string>> loc_category_;
};

// Undirected friendship edges; each pair stored once as (min, max).
class SocialGraph {
 public:
  static std::pair<std::string, std::string> canonical(const std::string& a,
                                                       const std::string& b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  }

  void add(const std::string& a, const std::string& b) {
    if (a == b) throw std::invalid_argument("self-loop edge: " + a);
    edges_.insert(canonical(a, b));
  }

  bool has(const std::string& a, const std::string& b) const {
    return edges_.count(canonical(a, b)) > 0;
  }

  const std::set<std::pair<std::string, std::string>>& edges() const {
    return edges_;
  }
  std::size_t size() const { return edges_.size(); }

 private:
  std::set<std::pair<std::string, std::string>> edges_;
};

using UserMetaTable = std::map<std::string, std::int64_t>;  // user -> followers

inline const std::string kCheckinHeader =
    "user_id,timestamp,lat,lon,location_id,category_l1,category_l2";
inline const std::string kSocialHeader = "user_a,user_b";
inline const std::string kUserMetaHeader = "user_id,follower_count";
inline const std::string kPopularityHeader = "location_id,checkin_count";

// ---------------------------------------------------------------------------
// Ingestion

inline CheckInDataset ingest_checkins(const std::string& path) {
  CsvReader reader(path, kCheckinHeader);
  std::vector<CheckIn> rows;
  std::map<std::string, std::string> l2_to_l1;  // category tree consistency
  std::vector<std::string> f;
  while (reader.next(f)) {
    CheckIn c;
    c.user = f[0];
    if (!is_identifier(c.user)) reader.fail("user_id", "not an identifier: '" + f[0] + "'");
    c.time = parse_int(reader, "timestamp", f[1]);
    c.lat = parse_double(reader, "lat", f[2]);
    c.lon = parse_double(reader, "lon", f[3]);
    if (c.lat < -90.0 || c.lat > 90.0)
      reader.fail("lat", "out of range [-90,90]: " + f[2]);
    if (c.lon < -180.0 || c.lon > 180.0)
      reader.fail("lon", "out of range [-180,180]: " + f[3]);
    c.location = f[4];
    if (!is_identifier(c.location))
      reader.fail("location_id", "not an identifier: '" + f[4] + "'");
    c.category_l1 = f[5];
    c.category_l2 = f[6];
    auto [it, inserted] = l2_to_l1.emplace(c.category_l2, c.category_l1);
    if (!inserted && it->second != c.category_l1)
      reader.fail("category_l2", "category '" + c.category_l2 +
                                     "' mapped to both '" + it->second +
                                     "' and '" + c.category_l1 + "'");
    rows.push_back(std::move(c));
  }
  return CheckInDataset(std::move(rows));
}

struct SocialIngestResult {
  SocialGraph graph;
  std::size_t skipped = 0;  // rows dropped because an endpoint is unknown
};

inline SocialIngestResult ingest_social_links(const std::string& path,
                                              const std::set<std::string>& users) {
  CsvReader reader(path, kSocialHeader);
  SocialIngestResult result;
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (f[0] == f[1]) reader.fail("user_b", "self-loop: " + f[0]);
    if (!users.count(f[0]) || !users.count(f[1])) {
      ++result.skipped;
      continue;
    }
    result.graph.add(f[0], f[1]);
  }
  return result;
}

inline UserMetaTable ingest_user_meta(const std::string& path) {
  CsvReader reader(path, kUserMetaHeader);
  UserMetaTable meta;
  std::vector<std::string> f;
  while (reader.next(f)) {
    std::int64_t n = parse_int(reader, "follower_count", f[1]);
    if (n < 0) reader.fail("follower_count", "negative: " + f[1]);
    auto [it, inserted] = meta.emplace(f[0], n);
    if (!inserted) reader.fail("user_id", "duplicate record for " + f[0]);
  }
  return meta;
}

inline void write_checkins(const CheckInDataset& ds, const std::string& path) {
  CsvWriter w(path, kCheckinHeader);
  for (const CheckIn& c : ds.checkins()) {
    w.row({c.user, std::to_string(c.time), format_double(c.lat),
           format_double(c.lon), c.location, c.category_l1, c.category_l2});
  }
}

inline void write_social_links(const SocialGraph& g, const std::string& path) {
  CsvWriter w(path, kSocialHeader);
  for (const auto& [a, b] : g.edges()) w.row({a, b});
}

// ---------------------------------------------------------------------------
// Preprocessing

// Nearest-rank percentile: the value at rank ceil(p/100 * n) in the ascending
// sorted sample (1-based). p = 0 yields no cutoff.
inline std::optional<std::int64_t> nearest_rank_percentile(
    std::vector<std::int64_t> sorted_counts, double p) {
  std::size_t n = sorted_counts.size();
  if (n == 0) return std::nullopt;
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(n)));
  if (rank == 0) return std::nullopt;
  if (rank > n) rank = n;
  return sorted_counts[rank - 1];
}

// Drops users failing the activity filters, in order: minimum distinct
// locations, follower percentile band (only when meta is given), minimum
// check-in count. Removed users leave the roster too; indexes are rebuilt.
inline CheckInDataset preprocess(const CheckInDataset& ds,
                                 const UserMetaTable* meta,
                                 std::int64_t min_checkins,
                                 std::int64_t min_distinct_locations,
                                 double percentile_low = 10.0,
                                 double percentile_high = 90.0) {
  if (min_distinct_locations < 1)
    throw std::invalid_argument("min_distinct_locations must be >= 1");
  if (percentile_low < 0 || percentile_high > 100 ||
      percentile_low >= percentile_high)
    throw std::invalid_argument("need 0 <= percentile_low < percentile_high <= 100");

  std::set<std::string> keep;
  for (const std::string& u : ds.users())
    if (static_cast<std::int64_t>(ds.omega(u).size()) >= min_distinct_locations)
      keep.insert(u);

  if (meta != nullptr) {
    std::vector<std::int64_t> counts;
    for (const std::string& u : keep) {
      auto it = meta->find(u);
      if (it != meta->end()) counts.push_back(it->second);
    }
    std::sort(counts.begin(), counts.end());
    auto low = nearest_rank_percentile(counts, percentile_low);
    auto high = nearest_rank_percentile(counts, percentile_high);
    for (auto it = keep.begin(); it != keep.end();) {
      auto mt = meta->find(*it);
      // Users without a meta record pass the percentile filter unexamined.
      bool drop = false;
      if (mt != meta->end()) {
        if (low && mt->second <= *low) drop = true;    // bots: inclusive cut
        if (high && mt->second > *high) drop = true;   // celebrities: exclusive mirror
      }
      it = drop ? keep.erase(it) : std::next(it);
    }
  }

  for (auto it = keep.begin(); it != keep.end();) {
    it = ds.tau(*it) < min_checkins ? keep.erase(it) : std::next(it);
  }

  std::vector<CheckIn> rows;
  rows.reserve(ds.size());
  for (const CheckIn& c : ds.checkins())
    if (keep.count(c.user)) rows.push_back(c);
  return CheckInDataset(std::move(rows), std::move(keep));
}

// ---------------------------------------------------------------------------
// Geographic grids

inline std::pair<std::int64_t, std::int64_t> grid_cell(double lat, double lon,
                                                       double cell_deg) {
  return {static_cast<std::int64_t>(std::floor(lat / cell_deg)),
          static_cast<std::int64_t>(std::floor(lon / cell_deg))};
}

inline std::string grid_id(double lat, double lon, double cell_deg) {
  auto [iy, ix] = grid_cell(lat, lon, cell_deg);
  std::ostringstream os;
  os << "g:" << iy << ":" << ix;
  return os.str();
}

// Replaces each location by its grid cell. Coordinates become the cell
// center;
// the per-check-in category fields are untouched.
inline CheckInDataset snap_to_grid(const CheckInDataset& ds, double cell_deg) {
  if (!(cell_deg > 0)) throw std::invalid_argument("cell_deg must be > 0");
  std::vector<CheckIn> rows = ds.checkins();
  for (CheckIn& c : rows) {
    auto [iy, ix] = grid_cell(c.lat, c.lon, cell_deg);
    std::ostringstream os;
    os << "g:" << iy << ":" << ix;
    c.location = os.str();
    c.lat = (static_cast<double>(iy) + 0.5) * cell_deg;
    c.lon = (static_cast<double>(ix) + 0.5) * cell_deg;
  }
  return CheckInDataset(std::move(rows), std::set<std::string>(ds.users()));
}

// ---------------------------------------------------------------------------
// Synthetic data

// Fixed two-level taxonomy: 9 high-level categories, 3 low-level each,
// assigned to locations by cycling over the 27 leaf categories.
inline const std::vector<std::pair<std::string, std::string>>& synthetic_taxonomy() {
  static const std::vector<std::pair<std::string, std::string>> taxonomy = [] {
    const std::vector<std::string> l1 = {"arts",    "food",    "nightlife",
                                         "outdoors", "shop",   "travel",
                                         "work",    "education", "residence"};
    const std::vector<std::vector<std::string>> l2 = {
        {"museum", "gallery", "theater"},   {"cafe", "bakery", "diner"},
        {"bar", "club", "lounge"},          {"park", "trail", "beach"},
        {"market", "boutique", "mall"},     {"station", "airport", "hotel"},
        {"office", "coworking", "studio"},  {"school", "library", "campus"},
        {"apartment", "house", "dorm"}};
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t i = 0; i < l1.size(); ++i)
      for (const std::string& leaf : l2[i]) out.emplace_back(l1[i], leaf);
    return out;
  }();
  return taxonomy;
}

struct SyntheticParams {
  int n_users = 500;
  int n_locations = 200;
  int n_communities = 20;
  int checkins_per_user = 40;
  double intra_friend_prob = 0.3;
  double noise_prob = 0.2;
  std::uint64_t seed = 1;
};

struct SyntheticData {
  CheckInDataset dataset;
  SocialGraph social;
};

namespace detail {

inline std::string padded_id(char prefix, int i, int width) {
  std::string digits = std::to_string(i);
  std::string out(1, prefix);
  for (int k = static_cast<int>(digits.size()); k < width; ++k) out += '0';
  return out + digits;
}

}  // namespace detail

// Community-structured check-in world for desk-scale experiments.
//
// Users are split round-robin into communities; each community owns a
// disjoint block of locations. A check-in lands uniformly in the user's own
// block with probability 1 - noise_prob and otherwise uniformly anywhere.
// Friendships exist only inside communities, each intra-community pair
// independently with probability intra_friend_prob.
//
// RNG consumption order, fixed for reproducibility: location coordinates
// (two unit() draws per location, ascending), then per user per check-in one
// unit() for the noise test plus one below() for the location, then one
// unit() per intra-community pair, communities ascending, pairs in sorted
// order. Each stage runs on its own labeled substream of the seed.
inline SyntheticData generate_synthetic(const SyntheticParams& p) {
  if (p.n_communities < 1 || p.n_communities > p.n_users ||
      p.n_communities > p.n_locations)
    throw std::invalid_argument("need 1 <= n_communities <= min(n_users, n_locations)");
  if (p.intra_friend_prob < 0 || p.intra_friend_prob > 1 ||
      p.noise_prob < 0 || p.noise_prob > 1)
    throw std::invalid_argument("probabilities must lie in [0,1]");
  if (p.n_users < 1 || p.n_locations < 1 || p.checkins_per_user < 0)
    throw std::invalid_argument("counts must be positive");

  const auto& taxonomy = synthetic_taxonomy();
  const int user_width = static_cast<int>(std::to_string(p.n_users - 1).size());
  const int loc_width = static_cast<int>(std::to_string(p.n_locations - 1).size());

  // City box of 0.08 x 0.08 degrees inside one 0.1-degree cell, so the two
  // generalization grid levels behave differently.
  const double box_lat = 40.70, box_lon = -74.00, box_span = 0.08;
  std::vector<std::string> loc_ids(p.n_locations);
  std::vector<Coordinates> loc_coords(p.n_locations);
  Rng coord_rng = substream(p.seed, "synth-coords");
  for (int j = 0; j < p.n_locations; ++j) {
    loc_ids[j] = detail::padded_id('p', j, loc_width);
    loc_coords[j].lat = box_lat + coord_rng.unit() * box_span;
    loc_coords[j].lon = box_lon + coord_rng.unit() * box_span;
  }

  // Disjoint community blocks: community c owns locations [c*B, (c+1)*B).
  const int block = p.n_locations / p.n_communities;

  std::vector<CheckIn> rows;
  rows.reserve(static_cast<std::size_t>(p.n_users) * p.checkins_per_user);
  Rng draw_rng = substream(p.seed, "synth-checkins");
  for (int i = 0; i < p.n_users; ++i) {
    std::string uid = detail::padded_id('u', i, user_width);
    int comm = i % p.n_communities;
    for (int c = 0; c < p.checkins_per_user; ++c) {
      int loc;
      bool noise = draw_rng.unit() < p.noise_prob;
      if (noise) {
        loc = static_cast<int>(draw_rng.below(static_cast<std::uint64_t>(p.n_locations)));
      } else {
        loc = comm * block +
              static_cast<int>(draw_rng.below(static_cast<std::uint64_t>(block)));
      }
      const auto& cat = taxonomy[static_cast<std::size_t>(loc) % taxonomy.size()];
      CheckIn ci;
      ci.user = uid;
      ci.time = static_cast<std::int64_t>(i) * p.checkins_per_user + c;
      ci.lat = loc_coords[loc].lat;
      ci.lon = loc_coords[loc].lon;
      ci.location = loc_ids[loc];
      ci.category_l1 = cat.first;
      ci.category_l2 = cat.second;
      rows.push_back(std::move(ci));
    }
  }

  SocialGraph social;
  Rng friend_rng = substream(p.seed, "synth-friends");
  for (int comm = 0; comm < p.n_communities; ++comm) {
    std::vector<int> members;
    for (int i = comm; i < p.n_users; i += p.n_communities) members.push_back(i);
    std::sort(members.begin(), members.end());
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b)
        if (friend_rng.unit() < p.intra_friend_prob)
          social.add(detail::padded_id('u', members[a], user_width),
                     detail::padded_id('u', members[b], user_width));
  }

  std::set<std::string> roster;
  for (int i = 0; i < p.n_users; ++i)
    roster.insert(detail::padded_id('u', i, user_width));
  return SyntheticData{CheckInDataset(std::move(rows), std::move(roster)),
                       std::move(social)};
}

}  // namespace mobilink
