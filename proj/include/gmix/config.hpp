#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gmix/priors.hpp"
#include "gmix/synthdata.hpp"

namespace gmix {

// Run configuration read from a flat `key = value` file. Blank lines and
// lines starting with '#' are ignored; sections are key prefixes:
//
//   seed = 1
//   data = path/to/data.csv          (omit to simulate from scenario.*)
//   scenario.kind = mixture3 | two_mean
//   scenario.d, scenario.n, scenario.tau, scenario.weights = 0.35,0.2,0.45
//   scenario.eta, scenario.mu1, scenario.mu2, scenario.sigma2  (two_mean)
//   prior.components, prior.e0, prior.mean_center = sampled | fixed,
//   prior.m0 = v1,...,vd, prior.shrinkage = fixed | gamma, prior.lambda,
//   prior.nu1, prior.nu2, prior.cov = hierarchical | trace | determinant,
//   prior.c0, prior.r2
//   sampler.sweeps, sampler.burn_in, sampler.replicates, sampler.permute,
//   sampler.init = kmeans | prior, sampler.kmeans_restarts,
//   sampler.workers (parallel chains), sampler.allocation_workers,
//   sampler.block_size
//   output.dir, output.allocations, output.cov_diag, output.full_cov
//   replicate.datasets, replicate.sweeps, replicate.burn_in,
//   replicate.replicates, replicate.n, replicate.d, replicate.cells = a,b,c
struct RunConfig {
  std::uint64_t seed = 1;
  std::optional<std::string> data_path;

  std::string scenario_kind = "mixture3";
  ScenarioSpec scenario;
  double two_mean_eta = 0.7;
  double two_mean_mu1 = 0.0;
  double two_mean_mu2 = 2.5;
  double two_mean_sigma2 = 1.0;

  PriorConfig prior;

  int sweeps = 10000;
  int burn_in = 1000;
  int replicates = 1;
  bool permute = false;
  std::string init = "kmeans";
  int kmeans_restarts = 10;
  int workers = 1;
  int allocation_workers = 1;
  int block_size = 256;

  std::string output_dir = "gmix-out";
  bool write_allocations = true;
  bool write_cov_diag = true;
  bool write_full_cov = false;

  // Overrides for `replicate counts|clustering`; unset keeps the built-in
  // desk-scale protocol.
  std::optional<int> rep_datasets;
  std::optional<int> rep_sweeps;
  std::optional<int> rep_burn_in;
  std::optional<int> rep_replicates;
  std::optional<int> rep_n;
  std::optional<int> rep_d;
  std::optional<std::vector<std::string>> rep_cells;

  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);

  // Throws ValidationError on the first inconsistent setting. Data-dependent
  // prior checks run once the data dimension is known.
  void validate() const;

  // Every setting, defaults included, one `key = value` per line in a fixed
  // order. Parsing the output gives back an equal configuration.
  std::string canonical() const;

  // Content hash of canonical() without the settings that cannot change
  // results (output.dir and the worker counts).
  std::string provenance_hash() const;
};

}  // namespace gmix
