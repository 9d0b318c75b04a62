#include "adasi/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>

#include <json.hpp>

#include "adasi/dnn.hpp"

namespace adasi {

namespace {

constexpr std::uint64_t kDnnNetSeed = 0x6b8b4567327b23c6ull;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - start)
      .count();
}

std::string point_decision(double p, double alpha) {
  return p < alpha ? "reject" : "accept";
}

// One hypothesis instance: everything a method needs to run.
struct TrialInstance {
  double t = 0.0;
  TestSide side = TestSide::TwoSided;
  NullDistribution dist = NullDistribution::gaussian(1.0);
  std::unique_ptr<SelectionOracle> oracle;
};

TrialInstance make_sfs_z(const ExperimentConfig& cfg, std::mt19937_64& rng) {
  SfsProblem problem = gen_sfs_data(cfg.n, cfg.p, cfg.delta, rng);
  problem.K = cfg.K;
  SfsHistory history = run_sfs(problem.X, problem.D_obs, cfg.K);
  // Pick the tested coordinate at random from the selected set: the draw is
  // independent of the data, so validity holds under same-set conditioning
  // (picking, say, the first selected feature would re-use the selection
  // strength and inflate the type I error).
  std::uniform_int_distribution<std::size_t> pick(0, history.order.size() - 1);
  ZDirection dir = z_direction(problem, history, history.order[pick(rng)]);
  TrialInstance inst;
  inst.t = dir.line.z_obs;
  inst.side = TestSide::TwoSided;
  inst.dist = dir.dist;
  inst.oracle = std::make_unique<SfsOracle>(std::move(problem),
                                            std::move(history), dir.line);
  return inst;
}

TrialInstance make_sfs_chi(const ExperimentConfig& cfg, std::mt19937_64& rng) {
  SfsProblem problem = gen_sfs_data(cfg.n, cfg.p, cfg.delta, rng);
  problem.K = cfg.K;
  SfsHistory history = run_sfs(problem.X, problem.D_obs, cfg.K);
  std::uniform_int_distribution<std::size_t> pick(0, history.order.size() - 1);
  std::vector<int> g{history.order[pick(rng)]};
  ChiDirection dir = chi_direction(problem, history, g);
  TrialInstance inst;
  inst.t = dir.line.z_obs;
  inst.side = TestSide::RightTailed;
  inst.dist = dir.dist;
  inst.oracle = std::make_unique<SfsOracle>(std::move(problem),
                                            std::move(history), dir.line);
  return inst;
}

TrialInstance make_dnn_z(const ExperimentConfig& cfg, const PlNet& net,
                         std::mt19937_64& rng, int& resamples) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    GeneratedImage gen = gen_image(cfg.d, cfg.delta, rng);
    ForwardResult fwd = forward_with_pattern(net, gen.image);
    SalientSplit split;
    try {
      split = split_regions(fwd.saliency, cfg.tau);
    } catch (const std::runtime_error&) {
      ++resamples;
      continue;
    }
    ZDirection dir = eta_line(dnn_eta(split), gen.image, 1.0);
    TrialInstance inst;
    inst.t = dir.line.z_obs;
    inst.side = TestSide::TwoSided;
    inst.dist = dir.dist;
    inst.oracle =
        std::make_unique<DnnOracle>(net, cfg.tau, dir.line, std::move(split));
    return inst;
  }
  throw std::runtime_error("degenerate statistic: salient split empty on 1000 resamples");
}

TrialRecord run_method(const TrialInstance& inst, Method method,
                       Strategy strategy, const ExperimentConfig& cfg) {
  TrialRecord rec;
  rec.method = method_name(method);
  rec.strategy = (method == Method::Prec || method == Method::Dec)
                     ? strategy_name(strategy)
                     : "-";
  auto start = std::chrono::steady_clock::now();
  switch (method) {
    case Method::Naive: {
      double p = naive_p(inst.t, inst.side, inst.dist);
      rec.p_lower = rec.p_upper = p;
      rec.decision = point_decision(p, cfg.alpha);
      rec.oracle_calls = 1;
      break;
    }
    case Method::Oc: {
      double p = oc_p(inst.t, inst.side, inst.dist, *inst.oracle);
      rec.p_lower = rec.p_upper = p;
      rec.decision = point_decision(p, cfg.alpha);
      rec.oracle_calls = 1;
      break;
    }
    case Method::Exhaustive: {
      ExhaustiveResult ex =
          exhaustive_run(inst.t, inst.side, inst.dist, *inst.oracle);
      rec.p_lower = rec.p_upper = ex.p;
      rec.decision = point_decision(ex.p, cfg.alpha);
      rec.oracle_calls = ex.state.oracle_calls;
      break;
    }
    case Method::Prec: {
      RunResult r = run(inst.t, inst.side, inst.dist, *inst.oracle, strategy,
                        TerminationRule::precision(cfg.eps));
      rec.p_lower = r.bounds.lower;
      rec.p_upper = r.bounds.upper;
      if (r.bounds.upper < cfg.alpha) {
        rec.decision = "reject";
      } else if (r.bounds.lower >= cfg.alpha) {
        rec.decision = "accept";
      } else {
        rec.decision = "na";
      }
      rec.oracle_calls = r.state.oracle_calls;
      break;
    }
    case Method::Dec: {
      RunResult r = run(inst.t, inst.side, inst.dist, *inst.oracle, strategy,
                        TerminationRule::decision(cfg.alpha));
      rec.p_lower = r.bounds.lower;
      rec.p_upper = r.bounds.upper;
      rec.decision =
          r.reject.has_value() ? (*r.reject ? "reject" : "accept") : "na";
      rec.oracle_calls = r.state.oracle_calls;
      break;
    }
  }
  rec.wall_time_ms = ms_since(start);
  return rec;
}

}  // namespace

AppKind parse_app(const std::string& name) {
  if (name == "sfs-z") return AppKind::SfsZ;
  if (name == "sfs-chi") return AppKind::SfsChi;
  if (name == "dnn-z") return AppKind::DnnZ;
  throw std::invalid_argument("unknown app: " + name);
}

Method parse_method(const std::string& name) {
  if (name == "naive") return Method::Naive;
  if (name == "oc") return Method::Oc;
  if (name == "exhaustive") return Method::Exhaustive;
  if (name == "prec") return Method::Prec;
  if (name == "dec") return Method::Dec;
  throw std::invalid_argument("unknown method: " + name);
}

Strategy parse_strategy(const std::string& name) {
  if (name == "pi1") return Strategy::Pi1;
  if (name == "pi2") return Strategy::Pi2;
  if (name == "pi3") return Strategy::Pi3;
  throw std::invalid_argument("unknown strategy: " + name);
}

std::string method_name(Method m) {
  switch (m) {
    case Method::Naive: return "naive";
    case Method::Oc: return "oc";
    case Method::Exhaustive: return "exhaustive";
    case Method::Prec: return "prec";
    case Method::Dec: return "dec";
  }
  return "?";
}

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Pi1: return "pi1";
    case Strategy::Pi2: return "pi2";
    case Strategy::Pi3: return "pi3";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must be in (0, 1)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0, 1)");
  if (methods.empty()) throw std::invalid_argument("at least one method is required");
  bool needs_strategy = false;
  for (Method m : methods) {
    needs_strategy = needs_strategy || m == Method::Prec || m == Method::Dec;
  }
  if (needs_strategy && strategies.empty()) {
    throw std::invalid_argument("prec/dec methods require at least one strategy");
  }
  if (app == AppKind::DnnZ) {
    if (d < 4 || d % 2 != 0) throw std::invalid_argument("d must be even and >= 4");
  } else {
    if (n < 2) throw std::invalid_argument("n must be >= 2");
    if (p < 1) throw std::invalid_argument("p must be >= 1");
    if (K < 1 || K > p) throw std::invalid_argument("K must be in [1, p]");
  }
}

std::uint64_t trial_seed(std::uint64_t seed, int trial_index) {
  // splitmix64 finalizer over seed xor counter.
  std::uint64_t x = seed ^ static_cast<std::uint64_t>(trial_index);
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

SfsProblem gen_sfs_data(int n, int p, double delta, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  SfsProblem problem;
  problem.sigma = 1.0;
  problem.X.resize(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) problem.X(i, j) = gauss(rng);
  }
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  for (int j = 0; j < std::min(5, p); ++j) beta(j) = delta;
  problem.D_obs.resize(n);
  for (int i = 0; i < n; ++i) {
    problem.D_obs(i) = problem.X.row(i).dot(beta) + gauss(rng);
  }
  return problem;
}

GeneratedImage gen_image(int d, double delta, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  GeneratedImage out;
  out.image.resize(d * d);
  for (int i = 0; i < d * d; ++i) out.image(i) = gauss(rng);
  if (delta != 0.0) {
    // Square signal patch of side d/2 (d^2/4 pixels), uniformly placed.
    const int side = d / 2;
    std::uniform_int_distribution<int> corner(0, d - side);
    int r0 = corner(rng), c0 = corner(rng);
    for (int r = r0; r < r0 + side; ++r) {
      for (int c = c0; c < c0 + side; ++c) {
        int idx = r * d + c;
        out.image(idx) += delta;
        out.true_region.push_back(idx);
      }
    }
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  PlNet net;
  if (cfg.app == AppKind::DnnZ) net = PlNet::seeded(cfg.d, kDnnNetSeed);

  for (int trial = 0; trial < cfg.trials; ++trial) {
    const std::uint64_t ts = trial_seed(cfg.seed, trial);
    std::mt19937_64 rng(ts);
    TrialInstance inst;
    switch (cfg.app) {
      case AppKind::SfsZ: inst = make_sfs_z(cfg, rng); break;
      case AppKind::SfsChi: inst = make_sfs_chi(cfg, rng); break;
      case AppKind::DnnZ:
        inst = make_dnn_z(cfg, net, rng, result.degenerate_resamples);
        break;
    }
    for (Method m : cfg.methods) {
      const bool strategic = m == Method::Prec || m == Method::Dec;
      const std::size_t variants = strategic ? cfg.strategies.size() : 1;
      for (std::size_t s = 0; s < variants; ++s) {
        Strategy strat = strategic ? cfg.strategies[s] : Strategy::Pi1;
        TrialRecord rec = run_method(inst, m, strat, cfg);
        rec.trial_index = trial;
        rec.seed = ts;
        result.records.push_back(std::move(rec));
      }
    }
  }
  return result;
}

void write_csv(const std::vector<TrialRecord>& records,
               const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "trial,seed,method,strategy,p_lower,p_upper,decision,oracle_calls,"
         "wall_time_ms\n";
  for (const TrialRecord& r : records) {
    out << r.trial_index << ',' << r.seed << ',' << r.method << ','
        << r.strategy << ',' << fmt17(r.p_lower) << ',' << fmt17(r.p_upper)
        << ',' << r.decision << ',' << r.oracle_calls << ','
        << fmt17(r.wall_time_ms) << '\n';
  }
  if (!out.flush()) throw std::runtime_error("write failed: " + path);
}

void write_summary_json(const ExperimentResult& result,
                        const ExperimentConfig& cfg, const std::string& path) {
  struct Agg {
    long trials = 0, rejects = 0, na = 0;
    double calls = 0.0, ms = 0.0;
  };
  std::vector<std::pair<std::string, Agg>> groups;
  auto agg_for = [&](const std::string& key) -> Agg& {
    for (auto& [k, a] : groups) {
      if (k == key) return a;
    }
    groups.emplace_back(key, Agg{});
    return groups.back().second;
  };
  for (const TrialRecord& r : result.records) {
    Agg& a = agg_for(r.method + "/" + r.strategy);
    ++a.trials;
    if (r.decision == "reject") ++a.rejects;
    if (r.decision == "na") ++a.na;
    a.calls += static_cast<double>(r.oracle_calls);
    a.ms += r.wall_time_ms;
  }

  nlohmann::json j;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["delta"] = cfg.delta;
  j["alpha"] = cfg.alpha;
  j["eps"] = cfg.eps;
  j["degenerate_resamples"] = result.degenerate_resamples;
  nlohmann::json per;
  for (const auto& [key, a] : groups) {
    nlohmann::json g;
    g["trials"] = a.trials;
    g["rejection_rate"] =
        a.trials ? static_cast<double>(a.rejects) / a.trials : 0.0;
    g["inconclusive"] = a.na;
    g["mean_oracle_calls"] = a.trials ? a.calls / a.trials : 0.0;
    g["mean_wall_time_ms"] = a.trials ? a.ms / a.trials : 0.0;
    per[key] = std::move(g);
  }
  j["methods"] = std::move(per);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out.flush()) throw std::runtime_error("write failed: " + path);
}

}  // namespace adasi
