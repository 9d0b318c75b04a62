#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "adasi/harness.hpp"

using namespace adasi;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path tmp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

// CSV with the timing column blanked, for determinism comparisons.
std::string strip_wall_time(const std::string& csv) {
  std::string out;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    auto pos = line.rfind(',');
    out += line.substr(0, pos);
    out += '\n';
  }
  return out;
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.app = AppKind::SfsZ;
  cfg.n = 40;
  cfg.p = 6;
  cfg.K = 3;
  cfg.trials = 3;
  cfg.seed = 99;
  cfg.methods = {Method::Naive, Method::Oc, Method::Exhaustive, Method::Prec,
                 Method::Dec};
  cfg.strategies = {Strategy::Pi1, Strategy::Pi2};
  cfg.eps = 1e-3;
  cfg.alpha = 0.05;
  return cfg;
}

}  // namespace

TEST_CASE("trial seeds are reproducible and distinct") {
  CHECK(trial_seed(7, 0) == trial_seed(7, 0));
  CHECK(trial_seed(7, 0) != trial_seed(7, 1));
  CHECK(trial_seed(7, 3) != trial_seed(8, 3));
}

TEST_CASE("parsers round-trip") {
  CHECK(parse_app("sfs-chi") == AppKind::SfsChi);
  CHECK_THROWS_AS(parse_app("nope"), std::invalid_argument);
  for (auto m : {Method::Naive, Method::Oc, Method::Exhaustive, Method::Prec,
                 Method::Dec}) {
    CHECK(parse_method(method_name(m)) == m);
  }
  for (auto s : {Strategy::Pi1, Strategy::Pi2, Strategy::Pi3}) {
    CHECK(parse_strategy(strategy_name(s)) == s);
  }
  CHECK_THROWS_AS(parse_method(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_strategy("pi4"), std::invalid_argument);
}

TEST_CASE("config validation") {
  ExperimentConfig cfg = small_config();
  CHECK_NOTHROW(cfg.validate());
  cfg.trials = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config();
  cfg.alpha = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config();
  cfg.eps = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config();
  cfg.K = 7;  // > p
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config();
  cfg.strategies.clear();
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config();
  cfg.app = AppKind::DnnZ;
  cfg.d = 7;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("gen_sfs_data: shapes, reproducibility, signal placement") {
  std::mt19937_64 rng1(5), rng2(5), rng3(5);
  SfsProblem null_p = gen_sfs_data(30, 7, 0.0, rng1);
  SfsProblem again = gen_sfs_data(30, 7, 0.0, rng2);
  SfsProblem alt = gen_sfs_data(30, 7, 0.4, rng3);
  CHECK(null_p.X.rows() == 30);
  CHECK(null_p.X.cols() == 7);
  CHECK(null_p.D_obs.size() == 30);
  CHECK(null_p.sigma == 1.0);
  CHECK((null_p.X - again.X).norm() == 0.0);
  CHECK((null_p.D_obs - again.D_obs).norm() == 0.0);
  // Same seed: the alternative differs exactly by X beta.
  CHECK((alt.X - null_p.X).norm() == 0.0);
  Eigen::VectorXd shift = alt.D_obs - null_p.D_obs;
  Eigen::VectorXd expect = 0.4 * (null_p.X.leftCols(5).rowwise().sum());
  CHECK((shift - expect).norm() < 1e-12);
}

TEST_CASE("gen_image: noise-only null, square signal patch") {
  std::mt19937_64 rng1(9), rng2(9);
  GeneratedImage null_img = gen_image(8, 0.0, rng1);
  GeneratedImage alt_img = gen_image(8, 0.7, rng2);
  CHECK(null_img.image.size() == 64);
  CHECK(null_img.true_region.empty());
  CHECK(alt_img.true_region.size() == 16);  // d^2 / 4
  for (int i = 0; i < 64; ++i) {
    bool in_region =
        std::find(alt_img.true_region.begin(), alt_img.true_region.end(), i) !=
        alt_img.true_region.end();
    double diff = alt_img.image(i) - null_img.image(i);
    CHECK(diff == doctest::Approx(in_region ? 0.7 : 0.0).epsilon(1e-15));
  }
  // The patch is a contiguous square.
  int r0 = alt_img.true_region.front() / 8;
  int c0 = alt_img.true_region.front() % 8;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      CHECK(alt_img.true_region[r * 4 + c] == (r0 + r) * 8 + (c0 + c));
    }
  }
}

TEST_CASE("run_experiment record layout and invariants") {
  ExperimentConfig cfg = small_config();
  ExperimentResult result = run_experiment(cfg);
  // 3 strategy-independent methods + 2 strategic x 2 strategies, 3 trials.
  CHECK(result.records.size() == 3u * (3 + 2 * 2));

  std::map<std::pair<int, std::string>, double> exhaustive_p;
  std::map<std::pair<int, std::string>, long> exhaustive_calls;
  for (const TrialRecord& r : result.records) {
    CHECK(r.p_lower <= r.p_upper + 1e-15);
    CHECK(r.oracle_calls >= 1);
    CHECK((r.decision == "reject" || r.decision == "accept" ||
           r.decision == "na"));
    if (r.method == "exhaustive") {
      exhaustive_p[{r.trial_index, ""}] = r.p_lower;
      exhaustive_calls[{r.trial_index, ""}] = r.oracle_calls;
    }
  }
  for (const TrialRecord& r : result.records) {
    if (r.method == "prec") {
      double p_ex = exhaustive_p[{r.trial_index, ""}];
      CHECK(r.p_lower <= p_ex + 1e-9);
      CHECK(r.p_upper >= p_ex - 1e-9);
      CHECK(r.p_upper - r.p_lower < cfg.eps);
    }
    if (r.method == "prec" || r.method == "dec") {
      CHECK(r.oracle_calls <= exhaustive_calls[{r.trial_index, ""}]);
    }
    if (r.method == "dec") {
      double p_ex = exhaustive_p[{r.trial_index, ""}];
      CHECK(r.decision == (p_ex < cfg.alpha ? "reject" : "accept"));
    }
  }
}

TEST_CASE("experiments are deterministic modulo wall time") {
  ExperimentConfig cfg = small_config();
  cfg.trials = 2;
  auto path1 = tmp_file("adasi_det1.csv");
  auto path2 = tmp_file("adasi_det2.csv");
  write_csv(run_experiment(cfg).records, path1.string());
  write_csv(run_experiment(cfg).records, path2.string());
  CHECK(strip_wall_time(slurp(path1)) == strip_wall_time(slurp(path2)));
  std::filesystem::remove(path1);
  std::filesystem::remove(path2);
}

TEST_CASE("csv format: exact header, 17 significant digits, round-trip") {
  auto path = tmp_file("adasi_fmt.csv");
  write_csv({}, path.string());
  CHECK(slurp(path) ==
        "trial,seed,method,strategy,p_lower,p_upper,decision,oracle_calls,"
        "wall_time_ms\n");

  TrialRecord rec;
  rec.trial_index = 4;
  rec.seed = 18446744073709551615ull;
  rec.method = "dec";
  rec.strategy = "pi2";
  rec.p_lower = 0.1234567890123456789;
  rec.p_upper = 1.0 / 3.0;
  rec.decision = "accept";
  rec.oracle_calls = 12;
  rec.wall_time_ms = 1.5;
  write_csv({rec}, path.string());
  std::string content = slurp(path);
  auto second_line = content.substr(content.find('\n') + 1);
  std::istringstream in(second_line);
  std::string cell;
  std::vector<std::string> cells;
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  REQUIRE(cells.size() == 9);
  CHECK(cells[0] == "4");
  CHECK(cells[1] == "18446744073709551615");
  CHECK(std::stod(cells[4]) == rec.p_lower);  // bit-exact round trip
  CHECK(std::stod(cells[5]) == rec.p_upper);
  CHECK(cells[7] == "12");
  std::filesystem::remove(path);
}

TEST_CASE("summary json aggregates per method") {
  ExperimentConfig cfg = small_config();
  cfg.trials = 2;
  ExperimentResult result = run_experiment(cfg);
  auto path = tmp_file("adasi_summary.json");
  write_summary_json(result, cfg, path.string());
  std::string content = slurp(path);
  CHECK(content.find("rejection_rate") != std::string::npos);
  CHECK(content.find("mean_oracle_calls") != std::string::npos);
  CHECK(content.find("dec/pi1") != std::string::npos);
  CHECK(content.find("naive/-") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("dnn experiment runs end to end") {
  ExperimentConfig cfg;
  cfg.app = AppKind::DnnZ;
  cfg.d = 8;
  cfg.trials = 2;
  cfg.seed = 11;
  cfg.methods = {Method::Oc, Method::Dec};
  cfg.strategies = {Strategy::Pi2};
  ExperimentResult result = run_experiment(cfg);
  CHECK(result.records.size() == 4u);
  for (const TrialRecord& r : result.records) {
    CHECK(r.p_lower >= 0.0);
    CHECK(r.p_upper <= 1.0);
  }
}

TEST_CASE("sfs-chi experiment runs end to end") {
  ExperimentConfig cfg = small_config();
  cfg.app = AppKind::SfsChi;
  cfg.trials = 2;
  cfg.methods = {Method::Exhaustive, Method::Dec};
  cfg.strategies = {Strategy::Pi3};
  ExperimentResult result = run_experiment(cfg);
  CHECK(result.records.size() == 4u);
  std::map<int, std::string> ex_decision;
  for (const TrialRecord& r : result.records) {
    if (r.method == "exhaustive") ex_decision[r.trial_index] = r.decision;
  }
  for (const TrialRecord& r : result.records) {
    if (r.method == "dec") CHECK(r.decision == ex_decision[r.trial_index]);
  }
}
