// Command-line front end for the social-link inference pipeline: synthesize
// or ingest check-in data, run the walk/embedding attack, score and evaluate
// user pairs, apply obfuscation defenses, and sweep experiment grids.
//
// Every subcommand accepts --config (flat key=value file; command-line flags
// win), --seed, --output-dir, --threads, and --deterministic where relevant.
// All outputs land under the output directory; a run_metadata.txt records
// the resolved parameters and derived stage seeds, with no timestamps, so
// reruns are byte-comparable.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mobilink/mobilink.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string config;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  int threads = 1;
  bool deterministic = false;
};

void add_common(CLI::App* cmd, CommonOpts& c, bool with_train_opts = true) {
  cmd->add_option("--config", c.config,
                  "flat key=value config file; flags override it");
  cmd->add_option("--output-dir", c.output_dir, "directory for outputs");
  cmd->add_option("--seed", c.seed, "master seed");
  if (with_train_opts) {
    cmd->add_option("--threads", c.threads, "worker threads")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--deterministic", c.deterministic,
                  "force sequential, bitwise-reproducible training");
  }
}

std::string trim_ws(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

// Flat key=value config, applied by hand after parsing: each key names a flag
// of the parsed subcommand and fills it only when the command line left it
// unset, so flags always win.
void apply_config(CLI::App* cmd, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim_ws(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected key=value, got '" + t + "'");
    std::string key = trim_ws(t.substr(0, eq));
    std::string value = trim_ws(t.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (opt == nullptr)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": unknown key '" + key + "'");
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

struct AttackOpts {
  int t_w = 20;
  int l_w = 100;
  int dim = 128;
  int window = 10;
  int negatives = 5;
  double lr = 0.025;
  int epochs = 5;
  double unigram_power = 0.75;
  std::string measure = "cosine";
};

void add_attack(CLI::App* cmd, AttackOpts& a) {
  cmd->add_option("--t_w", a.t_w, "walks per user")->check(CLI::PositiveNumber);
  cmd->add_option("--l_w", a.l_w, "nodes per walk")->check(CLI::Range(2, 1 << 20));
  cmd->add_option("--d", a.dim, "embedding dimensions")->check(CLI::PositiveNumber);
  cmd->add_option("--window", a.window, "context window per side")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--negatives", a.negatives, "negative samples per pair")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--lr", a.lr, "SGD learning rate");
  cmd->add_option("--epochs", a.epochs, "passes over the walk corpus")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--unigram_power", a.unigram_power,
                  "negative-sampling distribution exponent");
  cmd->add_option("--measure", a.measure,
                  "cosine|euclidean|correlation|chebyshev|braycurtis|canberra|manhattan");
}

struct FilterOpts {
  int min_checkins = 20;
  int min_distinct_locations = 2;
  double percentile_low = 10.0;
  double percentile_high = 90.0;
};

void add_filters(CLI::App* cmd, FilterOpts& f) {
  cmd->add_option("--min_checkins", f.min_checkins, "minimum check-ins per user");
  cmd->add_option("--min_distinct_locations", f.min_distinct_locations,
                  "minimum distinct locations per user");
  cmd->add_option("--percentile_low", f.percentile_low,
                  "drop users at or below this follower percentile (needs --meta)");
  cmd->add_option("--percentile_high", f.percentile_high,
                  "drop users above this follower percentile (needs --meta)");
}

mobilink::AttackParams to_params(const AttackOpts& a, const CommonOpts& c) {
  mobilink::AttackParams p;
  p.t_w = a.t_w;
  p.l_w = a.l_w;
  p.dim = a.dim;
  p.window = a.window;
  p.negatives = a.negatives;
  p.learning_rate = a.lr;
  p.epochs = a.epochs;
  p.unigram_power = a.unigram_power;
  p.measure = mobilink::parse_measure(a.measure);
  p.threads = c.threads;
  p.mode = (c.deterministic || c.threads <= 1)
               ? mobilink::TrainMode::deterministic_sequential
               : mobilink::TrainMode::parallel_relaxed;
  p.seed = c.seed;
  return p;
}

json attack_json(const mobilink::AttackParams& p) {
  json j;
  j["t_w"] = p.t_w;
  j["l_w"] = p.l_w;
  j["d"] = p.dim;
  j["window"] = p.window;
  j["negatives"] = p.negatives;
  j["lr"] = p.learning_rate;
  j["epochs"] = p.epochs;
  j["unigram_power"] = p.unigram_power;
  j["measure"] = mobilink::measure_name(p.measure);
  j["mode"] = p.mode == mobilink::TrainMode::deterministic_sequential
                  ? "deterministic-sequential"
                  : "parallel-relaxed";
  return j;
}

fs::path prepare_output(const CommonOpts& c) {
  fs::path dir(c.output_dir);
  fs::create_directories(dir);
  return dir;
}

// Deterministic audit record: resolved parameters plus the derived substream
// seed of every stage this run used.
void write_metadata(const fs::path& dir, const std::string& stage,
                    const std::map<std::string, std::string>& entries) {
  std::ofstream out(dir / "run_metadata.txt", std::ios::binary);
  out << "stage=" << stage << "\n";
  for (const auto& [k, v] : entries) out << k << "=" << v << "\n";
}

std::string u64str(std::uint64_t v) { return std::to_string(v); }

mobilink::SocialGraph load_social(const std::string& path,
                                  const std::set<std::string>& users,
                                  std::size_t* skipped = nullptr) {
  mobilink::SocialIngestResult r = mobilink::ingest_social_links(path, users);
  if (skipped) *skipped = r.skipped;
  return std::move(r.graph);
}

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(mobilink::parse_double_str(item));
  }
  if (out.empty()) throw std::runtime_error("empty list: '" + csv + "'");
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
  std::vector<std::uint64_t> out;
  for (double v : parse_list(csv)) out.push_back(static_cast<std::uint64_t>(v));
  return out;
}

// ---------------------------------------------------------------------------
// Subcommand bodies

int cmd_ingest(const CommonOpts& c, const std::string& checkins,
               const std::string& social, const std::string& meta) {
  fs::path dir = prepare_output(c);
  mobilink::CheckInDataset ds = mobilink::ingest_checkins(checkins);
  mobilink::write_checkins(ds, (dir / "checkins.csv").string());
  std::map<std::string, std::string> md;
  md["checkins"] = std::to_string(ds.size());
  md["users"] = std::to_string(ds.users().size());
  md["locations"] = std::to_string(ds.locations().size());
  if (!social.empty()) {
    std::size_t skipped = 0;
    mobilink::SocialGraph g = load_social(social, ds.users(), &skipped);
    mobilink::write_social_links(g, (dir / "social.csv").string());
    md["social_edges"] = std::to_string(g.size());
    md["social_skipped"] = std::to_string(skipped);
  }
  if (!meta.empty()) {
    mobilink::UserMetaTable table = mobilink::ingest_user_meta(meta);
    md["meta_records"] = std::to_string(table.size());
  }
  write_metadata(dir, "ingest", md);
  std::cout << "ingested " << ds.size() << " check-ins, " << ds.users().size()
            << " users, " << ds.locations().size() << " locations\n";
  return 0;
}

int cmd_preprocess(const CommonOpts& c, const std::string& checkins,
                   const std::string& social, const std::string& meta,
                   const FilterOpts& f, double grid_cell) {
  fs::path dir = prepare_output(c);
  mobilink::CheckInDataset ds = mobilink::ingest_checkins(checkins);
  mobilink::UserMetaTable table;
  if (!meta.empty()) table = mobilink::ingest_user_meta(meta);
  mobilink::CheckInDataset out = mobilink::preprocess(
      ds, meta.empty() ? nullptr : &table, f.min_checkins,
      f.min_distinct_locations, f.percentile_low, f.percentile_high);
  if (grid_cell > 0) out = mobilink::snap_to_grid(out, grid_cell);
  mobilink::write_checkins(out, (dir / "checkins.csv").string());
  std::map<std::string, std::string> md;
  md["input_users"] = std::to_string(ds.users().size());
  md["kept_users"] = std::to_string(out.users().size());
  md["kept_checkins"] = std::to_string(out.size());
  md["min_checkins"] = std::to_string(f.min_checkins);
  md["min_distinct_locations"] = std::to_string(f.min_distinct_locations);
  if (grid_cell > 0) md["grid_cell"] = mobilink::format_double(grid_cell);
  if (!social.empty()) {
    std::size_t skipped = 0;
    mobilink::SocialGraph g = load_social(social, out.users(), &skipped);
    mobilink::write_social_links(g, (dir / "social.csv").string());
    md["social_edges"] = std::to_string(g.size());
  }
  write_metadata(dir, "preprocess", md);
  std::cout << "kept " << out.users().size() << "/" << ds.users().size()
            << " users, " << out.size() << " check-ins\n";
  return 0;
}

int cmd_synth(const CommonOpts& c, const mobilink::SyntheticParams& p) {
  fs::path dir = prepare_output(c);
  mobilink::SyntheticParams sp = p;
  sp.seed = c.seed;
  mobilink::SyntheticData sd = mobilink::generate_synthetic(sp);
  mobilink::write_checkins(sd.dataset, (dir / "checkins.csv").string());
  mobilink::write_social_links(sd.social, (dir / "social.csv").string());
  mobilink::write_popularity(mobilink::popularity_from(sd.dataset),
                             (dir / "popularity.csv").string());
  std::map<std::string, std::string> md;
  md["seed"] = u64str(sp.seed);
  md["users"] = std::to_string(sp.n_users);
  md["locations"] = std::to_string(sp.n_locations);
  md["communities"] = std::to_string(sp.n_communities);
  md["checkins_per_user"] = std::to_string(sp.checkins_per_user);
  md["intra_friend_prob"] = mobilink::format_double(sp.intra_friend_prob);
  md["noise_prob"] = mobilink::format_double(sp.noise_prob);
  md["social_edges"] = std::to_string(sd.social.size());
  write_metadata(dir, "synth", md);
  std::cout << "synthesized " << sd.dataset.size() << " check-ins, "
            << sd.social.size() << " friend edges\n";
  return 0;
}

int cmd_walk(const CommonOpts& c, const std::string& checkins, int t_w, int l_w) {
  fs::path dir = prepare_output(c);
  mobilink::CheckInDataset ds = mobilink::ingest_checkins(checkins);
  mobilink::BipartiteGraph g = mobilink::BipartiteGraph::build(ds);
  std::uint64_t walk_seed = mobilink::derive_seed(c.seed, "walks");
  mobilink::WalkCorpus corpus =
      mobilink::generate_walks(g, t_w, l_w, walk_seed, c.threads);
  corpus.dump((dir / "corpus.txt").string());
  std::map<std::string, std::string> md;
  md["seed"] = u64str(c.seed);
  md["walk_seed"] = u64str(walk_seed);
  md["t_w"] = std::to_string(t_w);
  md["l_w"] = std::to_string(l_w);
  md["traces"] = std::to_string(corpus.trace_count());
  write_metadata(dir, "walk", md);
  std::cout << "generated " << corpus.trace_count() << " traces of " << l_w
            << " nodes\n";
  return 0;
}

int cmd_train(const CommonOpts& c, const std::string& corpus_path,
              const AttackOpts& a) {
  fs::path dir = prepare_output(c);
  mobilink::WalkCorpus corpus = mobilink::WalkCorpus::load(corpus_path);
  mobilink::TrainConfig cfg = to_params(a, c).train_config();
  cfg.seed = mobilink::derive_seed(c.seed, "train");
  mobilink::EmbeddingMatrix emb = mobilink::train(corpus, cfg);
  emb.dump((dir / "embedding.txt").string());
  std::map<std::string, std::string> md;
  md["seed"] = u64str(c.seed);
  md["train_seed"] = u64str(cfg.seed);
  md["d"] = std::to_string(cfg.dim);
  md["window"] = std::to_string(cfg.window);
  md["negatives"] = std::to_string(cfg.negatives);
  md["lr"] = mobilink::format_double(cfg.learning_rate);
  md["epochs"] = std::to_string(cfg.epochs);
  md["mode"] = cfg.mode == mobilink::TrainMode::deterministic_sequential
                   ? "deterministic-sequential"
                   : "parallel-relaxed";
  write_metadata(dir, "train", md);
  std::cout << "trained " << emb.size() << " vectors of dimension " << emb.dim()
            << "\n";
  return 0;
}

int cmd_score(const CommonOpts& c, const std::string& embedding_path,
              const std::string& checkins, const std::string& social,
              const std::string& measure, const std::string& model) {
  fs::path dir = prepare_output(c);
  mobilink::CheckInDataset ds = mobilink::ingest_checkins(checkins);
  mobilink::SocialGraph g = load_social(social, ds.users());
  std::uint64_t pair_seed = mobilink::derive_seed(c.seed, "pairs");
  mobilink::LabeledPairSet pairs = mobilink::sample_pairs(g, ds.users(), pair_seed);

  std::vector<double> scores;
  if (!model.empty()) {
    mobilink::AttackResult r = mobilink::run_baseline(
        ds, pairs, mobilink::parse_baseline(model),
        mobilink::derive_seed(c.seed, "baseline"));
    scores = std::move(r.scores);
  } else {
    if (embedding_path.empty())
      throw std::runtime_error("score: need --embedding or --model");
    mobilink::EmbeddingMatrix emb = mobilink::EmbeddingMatrix::load(embedding_path);
    mobilink::Measure m = mobilink::parse_measure(measure);
    for (const mobilink::LabeledPair& p : pairs.pairs)
      scores.push_back(mobilink::score_pair_or_zero(emb, p.a, p.b, m));
  }
  mobilink::write_scores(pairs, scores, (dir / "scores.csv").string(), model);
  std::map<std::string, std::string> md;
  md["seed"] = u64str(c.seed);
  md["pair_seed"] = u64str(pair_seed);
  md["pairs"] = std::to_string(pairs.pairs.size());
  md["scorer"] = model.empty() ? "embedding:" + measure : "baseline:" + model;
  write_metadata(dir, "score", md);
  std::cout << "scored " << pairs.pairs.size() << " pairs\n";
  return 0;
}

int cmd_evaluate(const CommonOpts& c, const std::string& scores_path,
                 const std::string& experiment) {
  fs::path dir = prepare_output(c);
  mobilink::ScoreFile sf = mobilink::read_scores(scores_path);
  std::vector<int> labels;
  for (const mobilink::LabeledPair& p : sf.pairs.pairs) labels.push_back(p.label);
  mobilink::RocCurve curve = mobilink::roc(sf.scores, labels);

  json cfg;
  cfg["scores"] = fs::path(scores_path).filename().string();
  if (!sf.model.empty()) cfg["model"] = sf.model;
  mobilink::ExperimentRow row{experiment, cfg.dump(), c.seed, sf.scores.size(),
                              curve.auc};
  mobilink::write_report({row}, (dir / "report.csv").string());
  mobilink::write_roc(curve, (dir / "roc.csv").string());
  std::map<std::string, std::string> md;
  md["pairs"] = std::to_string(sf.scores.size());
  md["auc"] = mobilink::format_double(curve.auc);
  write_metadata(dir, "evaluate", md);
  std::cout << "auc=" << mobilink::format_double(curve.auc) << " over "
            << sf.scores.size() << " pairs\n";
  return 0;
}

int cmd_defend(const CommonOpts& c, const std::string& checkins,
               const std::string& mechanism, double rho, int walk_steps,
               const std::string& geo, const std::string& sem,
               const std::string& popularity, bool do_recover) {
  fs::path dir = prepare_output(c);
  mobilink::CheckInDataset ds = mobilink::ingest_checkins(checkins);

  mobilink::ObfuscationSpec spec;
  spec.rho = rho;
  spec.walk_steps = walk_steps;
  spec.seed = mobilink::derive_seed(c.seed, "defense");
  if (mechanism == "hide")
    spec.mechanism = mobilink::Mechanism::hiding;
  else if (mechanism == "replace")
    spec.mechanism = mobilink::Mechanism::replacement;
  else if (mechanism == "generalize")
    spec.mechanism = mobilink::Mechanism::generalization;
  else
    throw std::runtime_error("--mechanism must be hide|replace|generalize, got '" +
                             mechanism + "'");
  auto parse_level = [](const std::string& s, const char* flag) {
    if (s == "low") return mobilink::GeoLevel::low;
    if (s == "high") return mobilink::GeoLevel::high;
    throw std::runtime_error(std::string(flag) + " must be low|high, got '" + s + "'");
  };
  spec.geo_level = parse_level(geo, "--geo");
  spec.sem_level = parse_level(sem, "--sem") == mobilink::GeoLevel::low
                       ? mobilink::SemLevel::low
                       : mobilink::SemLevel::high;
  spec.validate();

  std::map<std::string, std::string> md;
  md["seed"] = u64str(c.seed);
  md["defense_seed"] = u64str(spec.seed);
  md["mechanism"] = mechanism;

  mobilink::ObfuscatedDataset obf;
  switch (spec.mechanism) {
    case mobilink::Mechanism::hiding:
      obf = mobilink::hide(ds, spec.rho, spec.seed);
      md["rho"] = mobilink::format_double(spec.rho);
      break;
    case mobilink::Mechanism::replacement:
      obf = mobilink::replace(ds, spec.rho, spec.walk_steps, spec.seed);
      md["rho"] = mobilink::format_double(spec.rho);
      md["walk_steps"] = std::to_string(spec.walk_steps);
      break;
    case mobilink::Mechanism::generalization:
      obf = mobilink::generalize(ds, spec.geo_level, spec.sem_level);
      md["geo"] = geo;
      md["sem"] = sem;
      break;
  }
  mobilink::write_checkins(obf.data, (dir / "obfuscated.csv").string());
  if (spec.mechanism == mobilink::Mechanism::generalization) {
    mobilink::write_containment(obf, (dir / "containment.csv").string());
    if (do_recover) {
      mobilink::PopularityTable pop = popularity.empty()
                                          ? mobilink::popularity_from(ds)
                                          : mobilink::read_popularity(popularity);
      std::uint64_t rec_seed = mobilink::derive_seed(spec.seed, "recovery");
      mobilink::RecoveryResult rec = mobilink::recover(obf, pop, rec_seed);
      mobilink::write_checkins(rec.data, (dir / "recovered.csv").string());
      md["recovery_seed"] = u64str(rec_seed);
      md["recovery_rate"] = mobilink::format_double(rec.recovery_rate);
      std::cout << "recovery_rate=" << mobilink::format_double(rec.recovery_rate)
                << "\n";
    }
  }
  write_metadata(dir, "defend", md);
  std::cout << "obfuscated dataset: " << obf.data.size() << " check-ins\n";
  return 0;
}

int cmd_utility(const CommonOpts& c, const std::string& original,
                const std::string& obfuscated) {
  fs::path dir = prepare_output(c);
  mobilink::CheckInDataset a = mobilink::ingest_checkins(original);
  mobilink::CheckInDataset b = mobilink::ingest_checkins(obfuscated);
  // Roster alignment: users hidden entirely by a defense disappear from the
  // obfuscated CSV, but utility is defined over the original user set.
  std::vector<mobilink::CheckIn> rows = b.checkins();
  mobilink::CheckInDataset aligned(std::move(rows),
                                   std::set<std::string>(a.users()));
  mobilink::UtilityReport report = mobilink::utility(a, aligned);
  mobilink::write_utility(report, (dir / "utility.csv").string());
  std::map<std::string, std::string> md;
  md["users"] = std::to_string(report.per_user.size());
  md["aggregate_psi"] = mobilink::format_double(report.aggregate);
  write_metadata(dir, "utility", md);
  std::cout << "aggregate utility=" << mobilink::format_double(report.aggregate)
            << " over " << report.per_user.size() << " users\n";
  return 0;
}

struct SweepOpts {
  std::string experiment = "min_checkins";
  std::string values;          // comma list; meaning depends on experiment
  std::string seeds = "1,2,3,4,5";
  std::string walk_steps_list = "15";
};

int cmd_sweep(const CommonOpts& c, const std::string& checkins,
              const std::string& social, const std::string& meta,
              const std::string& popularity, const FilterOpts& f,
              const AttackOpts& a, const SweepOpts& s) {
  fs::path dir = prepare_output(c);
  mobilink::CheckInDataset raw = mobilink::ingest_checkins(checkins);
  mobilink::UserMetaTable table;
  if (!meta.empty()) table = mobilink::ingest_user_meta(meta);

  std::vector<std::uint64_t> seeds = parse_seed_list(s.seeds);
  std::vector<mobilink::ExperimentRow> rows;

  auto preprocessed = [&](int min_checkins) {
    return mobilink::preprocess(raw, meta.empty() ? nullptr : &table,
                                min_checkins, f.min_distinct_locations,
                                f.percentile_low, f.percentile_high);
  };

  auto attack_row = [&](const std::string& name, json cfg,
                        const mobilink::CheckInDataset& ds,
                        std::uint64_t seed) {
    mobilink::SocialGraph g = load_social(social, ds.users());
    mobilink::LabeledPairSet pairs =
        mobilink::sample_pairs(g, ds.users(), mobilink::derive_seed(seed, "pairs"));
    mobilink::AttackParams params = to_params(a, c);
    params.seed = seed;
    mobilink::AttackResult r = mobilink::run_attack(ds, pairs, params);
    cfg.update(attack_json(params));
    rows.push_back(mobilink::ExperimentRow{name, cfg.dump(), seed,
                                           pairs.pairs.size(), r.auc});
  };

  if (s.experiment == "min_checkins") {
    std::string values = s.values.empty() ? "5,10,15,20" : s.values;
    for (double v : parse_list(values)) {
      auto ds = preprocessed(static_cast<int>(v));
      for (std::uint64_t seed : seeds) {
        json cfg;
        cfg["min_checkins"] = static_cast<int>(v);
        attack_row("min_checkins", cfg, ds, seed);
      }
    }
  } else if (s.experiment == "grid") {
    std::string values = s.values.empty() ? "0.0005,0.001,0.01,0.1" : s.values;
    auto base = preprocessed(f.min_checkins);
    for (double cell : parse_list(values)) {
      mobilink::CheckInDataset ds = mobilink::snap_to_grid(base, cell);
      for (std::uint64_t seed : seeds) {
        json cfg;
        cfg["grid_cell"] = cell;
        attack_row("grid", cfg, ds, seed);
      }
    }
  } else if (s.experiment == "hide" || s.experiment == "replace") {
    std::string values = s.values.empty() ? "0.1,0.3,0.5,0.7,0.9" : s.values;
    auto base = preprocessed(f.min_checkins);
    mobilink::SocialGraph g = load_social(social, base.users());
    for (double rho : parse_list(values)) {
      for (std::uint64_t seed : seeds) {
        mobilink::LabeledPairSet pairs = mobilink::sample_pairs(
            g, base.users(), mobilink::derive_seed(seed, "pairs"));
        mobilink::ObfuscationSpec spec;
        spec.rho = rho;
        spec.seed = mobilink::derive_seed(seed, "defense");
        json cfg;
        cfg["rho"] = rho;
        if (s.experiment == "hide") {
          spec.mechanism = mobilink::Mechanism::hiding;
        } else {
          spec.mechanism = mobilink::Mechanism::replacement;
          spec.walk_steps = static_cast<int>(parse_list(s.walk_steps_list)[0]);
          cfg["walk_steps"] = spec.walk_steps;
        }
        mobilink::AttackParams params = to_params(a, c);
        params.seed = seed;
        mobilink::PopularityTable pop;  // unused by hide/replace
        mobilink::DefenseOutcome out =
            mobilink::run_defense(base, pairs, spec, pop, params);
        cfg.update(attack_json(params));
        cfg["utility"] = out.utility;
        rows.push_back(mobilink::ExperimentRow{s.experiment, cfg.dump(), seed,
                                               pairs.pairs.size(), out.auc});
      }
    }
  } else if (s.experiment == "generalize") {
    auto base = preprocessed(f.min_checkins);
    mobilink::SocialGraph g = load_social(social, base.users());
    mobilink::PopularityTable pop = popularity.empty()
                                        ? mobilink::popularity_from(base)
                                        : mobilink::read_popularity(popularity);
    const std::vector<std::pair<mobilink::GeoLevel, mobilink::SemLevel>> combos = {
        {mobilink::GeoLevel::low, mobilink::SemLevel::low},
        {mobilink::GeoLevel::low, mobilink::SemLevel::high},
        {mobilink::GeoLevel::high, mobilink::SemLevel::low},
        {mobilink::GeoLevel::high, mobilink::SemLevel::high}};
    for (const auto& [geo, sem] : combos) {
      for (std::uint64_t seed : seeds) {
        mobilink::LabeledPairSet pairs = mobilink::sample_pairs(
            g, base.users(), mobilink::derive_seed(seed, "pairs"));
        mobilink::ObfuscationSpec spec;
        spec.mechanism = mobilink::Mechanism::generalization;
        spec.geo_level = geo;
        spec.sem_level = sem;
        spec.seed = mobilink::derive_seed(seed, "defense");
        mobilink::AttackParams params = to_params(a, c);
        params.seed = seed;
        mobilink::DefenseOutcome out =
            mobilink::run_defense(base, pairs, spec, pop, params);
        json cfg;
        cfg["geo"] = geo == mobilink::GeoLevel::low ? "low" : "high";
        cfg["sem"] = sem == mobilink::SemLevel::low ? "low" : "high";
        cfg.update(attack_json(params));
        cfg["utility"] = out.utility;
        cfg["recovery_rate"] = out.recovery_rate;
        rows.push_back(mobilink::ExperimentRow{"generalize", cfg.dump(), seed,
                                               pairs.pairs.size(), out.auc});
      }
    }
  } else {
    throw std::runtime_error(
        "--experiment must be min_checkins|grid|hide|replace|generalize, got '" +
        s.experiment + "'");
  }

  mobilink::write_report(rows, (dir / "report.csv").string());
  std::map<std::string, std::string> md;
  md["experiment"] = s.experiment;
  md["rows"] = std::to_string(rows.size());
  write_metadata(dir, "sweep", md);
  std::cout << "wrote " << rows.size() << " report rows\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"social-link inference from mobility check-ins"};
  app.require_subcommand(1);

  // ingest
  CommonOpts ing_c;
  std::string ing_checkins, ing_social, ing_meta;
  CLI::App* ing = app.add_subcommand("ingest", "validate and normalize input CSVs");
  add_common(ing, ing_c, false);
  ing->add_option("--checkins", ing_checkins, "check-in CSV")->required();
  ing->add_option("--social", ing_social, "social-link CSV");
  ing->add_option("--meta", ing_meta, "follower-count CSV");

  // preprocess
  CommonOpts pre_c;
  std::string pre_checkins, pre_social, pre_meta;
  FilterOpts pre_f;
  double pre_grid = 0;
  CLI::App* pre = app.add_subcommand("preprocess", "apply activity filters");
  add_common(pre, pre_c, false);
  pre->add_option("--checkins", pre_checkins, "check-in CSV")->required();
  pre->add_option("--social", pre_social, "social-link CSV to co-filter");
  pre->add_option("--meta", pre_meta, "follower-count CSV");
  add_filters(pre, pre_f);
  pre->add_option("--grid", pre_grid, "snap locations to this cell size (degrees)");

  // synth
  CommonOpts syn_c;
  mobilink::SyntheticParams syn_p;
  CLI::App* syn = app.add_subcommand("synth", "generate a synthetic dataset");
  add_common(syn, syn_c, false);
  syn->add_option("--users", syn_p.n_users, "user count");
  syn->add_option("--locations", syn_p.n_locations, "location count");
  syn->add_option("--communities", syn_p.n_communities, "community count");
  syn->add_option("--checkins-per-user", syn_p.checkins_per_user,
                  "check-ins per user");
  syn->add_option("--intra-friend-prob", syn_p.intra_friend_prob,
                  "friendship probability inside a community");
  syn->add_option("--noise-prob", syn_p.noise_prob,
                  "probability of a uniform out-of-community check-in");

  // walk
  CommonOpts wal_c;
  std::string wal_checkins;
  int wal_tw = 20, wal_lw = 100;
  CLI::App* wal = app.add_subcommand("walk", "generate the random-walk corpus");
  add_common(wal, wal_c);
  wal->add_option("--checkins", wal_checkins, "check-in CSV")->required();
  wal->add_option("--t_w", wal_tw, "walks per user")->check(CLI::PositiveNumber);
  wal->add_option("--l_w", wal_lw, "nodes per walk")->check(CLI::Range(2, 1 << 20));

  // train
  CommonOpts tra_c;
  std::string tra_corpus;
  AttackOpts tra_a;
  CLI::App* tra = app.add_subcommand("train", "train embeddings on a corpus");
  add_common(tra, tra_c);
  tra->add_option("--corpus", tra_corpus, "walk corpus file")->required();
  add_attack(tra, tra_a);

  // score
  CommonOpts sco_c;
  std::string sco_embedding, sco_checkins, sco_social, sco_measure = "cosine",
              sco_model;
  CLI::App* sco = app.add_subcommand("score", "score sampled user pairs");
  add_common(sco, sco_c, false);
  sco->add_option("--embedding", sco_embedding, "embedding dump");
  sco->add_option("--checkins", sco_checkins, "check-in CSV")->required();
  sco->add_option("--social", sco_social, "social-link CSV (ground truth)")
      ->required();
  sco->add_option("--measure", sco_measure, "similarity measure");
  sco->add_option("--model", sco_model, "score with a heuristic baseline instead");

  // evaluate
  CommonOpts eva_c;
  std::string eva_scores, eva_name = "attack";
  CLI::App* eva = app.add_subcommand("evaluate", "AUC and ROC from a scores file");
  add_common(eva, eva_c, false);
  eva->add_option("--scores", eva_scores, "scores CSV")->required();
  eva->add_option("--experiment", eva_name, "experiment label for the report");

  // defend
  CommonOpts def_c;
  std::string def_checkins, def_mechanism = "hide", def_geo = "low",
              def_sem = "low", def_pop;
  double def_rho = 0.5;
  int def_walk_steps = 15;
  bool def_recover = false;
  CLI::App* def = app.add_subcommand("defend", "obfuscate a dataset");
  add_common(def, def_c, false);
  def->add_option("--checkins", def_checkins, "check-in CSV")->required();
  def->add_option("--mechanism", def_mechanism, "hide|replace|generalize");
  def->add_option("--rho", def_rho, "proportion of check-ins to obfuscate");
  def->add_option("--walk_steps", def_walk_steps, "replacement walk length (odd)");
  def->add_option("--geo", def_geo, "generalization grid level: low|high");
  def->add_option("--sem", def_sem, "generalization category level: low|high");
  def->add_option("--popularity", def_pop, "external popularity CSV for recovery");
  def->add_flag("--recover", def_recover,
                "also run the popularity-based recovery adversary");

  // utility
  CommonOpts uti_c;
  std::string uti_original, uti_obfuscated;
  CLI::App* uti = app.add_subcommand("utility", "utility loss between datasets");
  add_common(uti, uti_c, false);
  uti->add_option("--original", uti_original, "original check-in CSV")->required();
  uti->add_option("--obfuscated", uti_obfuscated, "obfuscated check-in CSV")
      ->required();

  // sweep
  CommonOpts swe_c;
  std::string swe_checkins, swe_social, swe_meta, swe_pop;
  FilterOpts swe_f;
  AttackOpts swe_a;
  SweepOpts swe_s;
  CLI::App* swe = app.add_subcommand("sweep", "run an experiment grid");
  add_common(swe, swe_c);
  swe->add_option("--checkins", swe_checkins, "check-in CSV")->required();
  swe->add_option("--social", swe_social, "social-link CSV")->required();
  swe->add_option("--meta", swe_meta, "follower-count CSV");
  swe->add_option("--popularity", swe_pop, "popularity CSV for generalization");
  add_filters(swe, swe_f);
  add_attack(swe, swe_a);
  swe->add_option("--experiment", swe_s.experiment,
                  "min_checkins|grid|hide|replace|generalize");
  swe->add_option("--values", swe_s.values, "comma-separated sweep values");
  swe->add_option("--seeds", swe_s.seeds, "comma-separated seed list");
  swe->add_option("--walk_steps", swe_s.walk_steps_list,
                  "replacement walk length (odd)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ing->parsed()) {
      apply_config(ing, ing_c.config);
      return cmd_ingest(ing_c, ing_checkins, ing_social, ing_meta);
    }
    if (pre->parsed()) {
      apply_config(pre, pre_c.config);
      return cmd_preprocess(pre_c, pre_checkins, pre_social, pre_meta, pre_f,
                            pre_grid);
    }
    if (syn->parsed()) {
      apply_config(syn, syn_c.config);
      return cmd_synth(syn_c, syn_p);
    }
    if (wal->parsed()) {
      apply_config(wal, wal_c.config);
      return cmd_walk(wal_c, wal_checkins, wal_tw, wal_lw);
    }
    if (tra->parsed()) {
      apply_config(tra, tra_c.config);
      return cmd_train(tra_c, tra_corpus, tra_a);
    }
    if (sco->parsed()) {
      apply_config(sco, sco_c.config);
      return cmd_score(sco_c, sco_embedding, sco_checkins, sco_social,
                       sco_measure, sco_model);
    }
    if (eva->parsed()) {
      apply_config(eva, eva_c.config);
      return cmd_evaluate(eva_c, eva_scores, eva_name);
    }
    if (def->parsed()) {
      apply_config(def, def_c.config);
      return cmd_defend(def_c, def_checkins, def_mechanism, def_rho,
                        def_walk_steps, def_geo, def_sem, def_pop, def_recover);
    }
    if (uti->parsed()) {
      apply_config(uti, uti_c.config);
      return cmd_utility(uti_c, uti_original, uti_obfuscated);
    }
    if (swe->parsed()) {
      apply_config(swe, swe_c.config);
      return cmd_sweep(swe_c, swe_checkins, swe_social, swe_meta, swe_pop,
                       swe_f, swe_a, swe_s);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "error: no subcommand\n";
  return 1;
}
