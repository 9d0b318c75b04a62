#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "adasi/inference.hpp"
#include "adasi/sfs.hpp"

namespace adasi {

enum class AppKind { SfsZ, SfsChi, DnnZ };
enum class Method { Naive, Oc, Exhaustive, Prec, Dec };

AppKind parse_app(const std::string& name);       // throws on unknown
Method parse_method(const std::string& name);     // naive,oc,exhaustive,prec,dec
Strategy parse_strategy(const std::string& name); // pi1,pi2,pi3
std::string method_name(Method m);
std::string strategy_name(Strategy s);

struct ExperimentConfig {
  AppKind app = AppKind::SfsZ;
  int n = 100, p = 10, K = 5;  // sfs scale
  int d = 8;                   // dnn image side
  double tau = 0.0;            // dnn saliency threshold
  double delta = 0.0;          // signal strength; 0 = null
  int trials = 1;
  std::uint64_t seed = 0;
  std::vector<Method> methods;
  std::vector<Strategy> strategies;
  double eps = 1e-3;
  double alpha = 0.05;
  std::string out_path;

  void validate() const;  // throws std::invalid_argument
};

struct TrialRecord {
  int trial_index = 0;
  std::uint64_t seed = 0;
  std::string method;
  std::string strategy;  // "-" for strategy-independent methods
  double p_lower = 0.0;
  double p_upper = 1.0;
  std::string decision;  // reject / accept / na
  long oracle_calls = 1;
  double wall_time_ms = 0.0;
};

struct ExperimentResult {
  std::vector<TrialRecord> records;
  int degenerate_resamples = 0;
};

/// Mix of the experiment seed and trial index used to seed per-trial RNGs.
std::uint64_t trial_seed(std::uint64_t seed, int trial_index);

SfsProblem gen_sfs_data(int n, int p, double delta, std::mt19937_64& rng);

struct GeneratedImage {
  Eigen::VectorXd image;
  std::vector<int> true_region;  // empty under the null
};
GeneratedImage gen_image(int d, double delta, std::mt19937_64& rng);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

void write_csv(const std::vector<TrialRecord>& records,
               const std::string& path);
void write_summary_json(const ExperimentResult& result,
                        const ExperimentConfig& cfg, const std::string& path);

}  // namespace adasi
