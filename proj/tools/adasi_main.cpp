#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "adasi/dnn.hpp"
#include "adasi/harness.hpp"
#include "adasi/sfs.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDegenerate = 3;

struct Problem {
  double t = 0.0;
  adasi::TestSide side = adasi::TestSide::TwoSided;
  adasi::NullDistribution dist = adasi::NullDistribution::gaussian(1.0);
  std::unique_ptr<adasi::SelectionOracle> oracle;
};

Eigen::MatrixXd read_matrix(const nlohmann::json& j) {
  const auto rows = j.size();
  if (rows == 0) throw std::invalid_argument("matrix X must be nonempty");
  const auto cols = j.at(0).size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (j.at(r).size() != cols) {
      throw std::invalid_argument("ragged matrix X");
    }
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

Eigen::VectorXd read_vector(const nlohmann::json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = j.at(i).get<double>();
  return v;
}

Problem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read input file: " + path);
  nlohmann::json j;
  in >> j;

  const std::string app = j.at("app").get<std::string>();
  Problem prob;
  if (app == "sfs-z" || app == "sfs-chi") {
    adasi::SfsProblem sfs;
    sfs.X = read_matrix(j.at("X"));
    sfs.D_obs = read_vector(j.at("D"));
    sfs.sigma = j.value("sigma", 1.0);
    sfs.K = j.at("K").get<int>();
    if (sfs.D_obs.size() != sfs.X.rows()) {
      throw std::invalid_argument("D length must match rows of X");
    }
    adasi::SfsHistory history = adasi::run_sfs(sfs.X, sfs.D_obs, sfs.K);
    adasi::LineParam line;
    if (app == "sfs-z") {
      int target = j.at("target_feature").get<int>();
      adasi::ZDirection dir = adasi::z_direction(sfs, history, target);
      prob.t = dir.line.z_obs;
      prob.side = adasi::TestSide::TwoSided;
      prob.dist = dir.dist;
      line = dir.line;
    } else {
      std::vector<int> g = j.at("target_features").get<std::vector<int>>();
      adasi::ChiDirection dir = adasi::chi_direction(sfs, history, g);
      prob.t = dir.line.z_obs;
      prob.side = adasi::TestSide::RightTailed;
      prob.dist = dir.dist;
      line = dir.line;
    }
    prob.oracle = std::make_unique<adasi::SfsOracle>(std::move(sfs),
                                                     std::move(history), line);
  } else if (app == "dnn-z") {
    int d = j.at("d").get<int>();
    double tau = j.value("tau", 0.0);
    double sigma = j.value("sigma", 1.0);
    std::uint64_t net_seed = j.value("net_seed", std::uint64_t{1});
    adasi::PlNet net = adasi::PlNet::seeded(d, net_seed);
    Eigen::VectorXd image = read_vector(j.at("image"));
    if (image.size() != net.n()) {
      throw std::invalid_argument("image length must equal d*d");
    }
    adasi::ForwardResult fwd = adasi::forward_with_pattern(net, image);
    adasi::SalientSplit split = adasi::split_regions(fwd.saliency, tau);
    adasi::ZDirection dir =
        adasi::eta_line(adasi::dnn_eta(split), image, sigma);
    prob.t = dir.line.z_obs;
    prob.side = adasi::TestSide::TwoSided;
    prob.dist = dir.dist;
    prob.oracle = std::make_unique<adasi::DnnOracle>(
        std::move(net), tau, dir.line, std::move(split));
  } else {
    throw std::invalid_argument("unknown app: " + app);
  }
  return prob;
}

int run_test_command(const std::string& input, const std::string& method_name,
                     const std::string& strategy_name, double alpha,
                     double eps) {
  adasi::Method method = adasi::parse_method(method_name);
  adasi::Strategy strategy = adasi::parse_strategy(strategy_name);
  Problem prob = load_problem(input);

  nlohmann::json out;
  out["t"] = prob.t;
  long calls = 1;
  double lo = 0.0, hi = 1.0;
  std::string decision;
  switch (method) {
    case adasi::Method::Naive: {
      double p = adasi::naive_p(prob.t, prob.side, prob.dist);
      lo = hi = p;
      decision = p < alpha ? "reject" : "accept";
      break;
    }
    case adasi::Method::Oc: {
      double p = adasi::oc_p(prob.t, prob.side, prob.dist, *prob.oracle);
      lo = hi = p;
      decision = p < alpha ? "reject" : "accept";
      break;
    }
    case adasi::Method::Exhaustive: {
      adasi::ExhaustiveResult ex =
          adasi::exhaustive_run(prob.t, prob.side, prob.dist, *prob.oracle);
      lo = hi = ex.p;
      decision = ex.p < alpha ? "reject" : "accept";
      calls = ex.state.oracle_calls;
      break;
    }
    case adasi::Method::Prec: {
      adasi::RunResult r =
          adasi::run(prob.t, prob.side, prob.dist, *prob.oracle, strategy,
                     adasi::TerminationRule::precision(eps));
      lo = r.bounds.lower;
      hi = r.bounds.upper;
      decision = hi < alpha ? "reject" : (lo >= alpha ? "accept" : "na");
      calls = r.state.oracle_calls;
      break;
    }
    case adasi::Method::Dec: {
      adasi::RunResult r =
          adasi::run(prob.t, prob.side, prob.dist, *prob.oracle, strategy,
                     adasi::TerminationRule::decision(alpha));
      lo = r.bounds.lower;
      hi = r.bounds.upper;
      decision = r.reject ? (*r.reject ? "reject" : "accept") : "na";
      calls = r.state.oracle_calls;
      break;
    }
  }
  out["method"] = adasi::method_name(method);
  out["p_lower"] = lo;
  out["p_upper"] = hi;
  out["decision"] = decision;
  out["oracle_calls"] = calls;
  out["alpha"] = alpha;
  std::cout << out.dump(2) << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptively bounded selective p-values"};
  app.require_subcommand(1);

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run a Monte-Carlo experiment");
  std::string app_name = "sfs-z";
  adasi::ExperimentConfig cfg;
  std::vector<std::string> method_names{"naive", "oc", "exhaustive", "prec",
                                        "dec"};
  std::vector<std::string> strategy_names{"pi1", "pi2", "pi3"};
  std::string summary_path;
  exp->add_option("--app", app_name, "sfs-z | sfs-chi | dnn-z");
  exp->add_option("--delta", cfg.delta, "signal strength (0 = null)");
  exp->add_option("--trials", cfg.trials, "number of trials");
  exp->add_option("--seed", cfg.seed, "experiment seed");
  exp->add_option("--alpha", cfg.alpha, "significance level");
  exp->add_option("--eps", cfg.eps, "precision target for prec");
  exp->add_option("--methods", method_names, "comma-separated methods")
      ->delimiter(',');
  exp->add_option("--strategies", strategy_names, "comma-separated strategies")
      ->delimiter(',');
  exp->add_option("--out", cfg.out_path, "output CSV path")->required();
  exp->add_option("--summary", summary_path, "optional summary JSON path");
  exp->add_option("--n", cfg.n, "sample size (sfs)");
  exp->add_option("--p", cfg.p, "feature count (sfs)");
  exp->add_option("--K", cfg.K, "selection steps (sfs)");
  exp->add_option("--d", cfg.d, "image side (dnn)");
  exp->add_option("--tau", cfg.tau, "saliency threshold (dnn)");

  // test
  auto* tst = app.add_subcommand("test", "Single-shot inference from JSON");
  std::string input, method = "dec", strategy = "pi1";
  double alpha = 0.05, eps = 1e-3;
  tst->add_option("--input", input, "problem JSON path")->required();
  tst->add_option("--method", method, "naive|oc|exhaustive|prec|dec");
  tst->add_option("--strategy", strategy, "pi1|pi2|pi3");
  tst->add_option("--alpha", alpha, "significance level");
  tst->add_option("--eps", eps, "precision target for prec");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (exp->parsed()) {
      cfg.app = adasi::parse_app(app_name);
      cfg.methods.clear();
      for (const auto& m : method_names) {
        cfg.methods.push_back(adasi::parse_method(m));
      }
      cfg.strategies.clear();
      for (const auto& s : strategy_names) {
        cfg.strategies.push_back(adasi::parse_strategy(s));
      }
      cfg.validate();
      adasi::ExperimentResult result = adasi::run_experiment(cfg);
      adasi::write_csv(result.records, cfg.out_path);
      if (!summary_path.empty()) {
        adasi::write_summary_json(result, cfg, summary_path);
      }
      return 0;
    }
    return run_test_command(input, method, strategy, alpha, eps);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    const bool degenerate = std::strncmp(e.what(), "degenerate", 10) == 0 ||
                            std::strncmp(e.what(), "singular", 8) == 0;
    return degenerate ? kExitDegenerate : 1;
  }
}
