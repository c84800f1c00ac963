#include "gmix/commands.hpp"

#include <algorithm>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>

#include "gmix/error.hpp"
#include "gmix/gibbs.hpp"
#include "gmix/postproc.hpp"
#include "gmix/replicate.hpp"
#include "gmix/trace_io.hpp"

namespace fs = std::filesystem;

namespace gmix {
namespace {

constexpr std::uint64_t kChainStreamBase = 1000;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ValidationError("cannot create output directory " + dir + ": " + ec.message());
  return p;
}

LoadedData load_or_simulate(const RunConfig& config) {
  if (config.data_path) return read_dataset_csv(*config.data_path);
  if (config.scenario_kind == "two_mean") {
    SimulatedData sim = simulate_two_mean(config.scenario.n, config.two_mean_eta, config.two_mean_mu1,
                                          config.two_mean_mu2, config.two_mean_sigma2, config.seed, 0);
    return {std::move(sim.data), std::move(sim.labels)};
  }
  ScenarioSpec spec = config.scenario;
  spec.seed = config.seed;
  spec.stream = 0;
  SimulatedData sim = simulate_scenario(spec);
  return {std::move(sim.data), std::move(sim.labels)};
}

// Provenance of data.csv: the generating scenario and seed, or the source file.
void write_data_sidecar(const fs::path& dir, const RunConfig& config, const LoadedData& data) {
  nlohmann::json j{{"n", data.data.n()}, {"d", data.data.d()}, {"labels", !data.labels.empty()}};
  if (config.data_path) {
    j["source"] = *config.data_path;
  } else if (config.scenario_kind == "two_mean") {
    j["scenario"] = {{"kind", "two_mean"},
                     {"eta", config.two_mean_eta},
                     {"mu1", config.two_mean_mu1},
                     {"mu2", config.two_mean_mu2},
                     {"sigma2", config.two_mean_sigma2}};
    j["seed"] = config.seed;
    j["stream"] = 0;
  } else {
    j["scenario"] = {{"kind", "mixture3"},
                     {"tau", config.scenario.tau},
                     {"weights", config.scenario.weights}};
    j["seed"] = config.seed;
    j["stream"] = 0;
  }
  j["data_hash"] = content_hash(read_file(dir / "data.csv"));
  write_file(dir / "data.json", j.dump(2) + "\n");
}

std::string chain_file(int r) { return "chain_" + std::to_string(r + 1) + ".csv"; }

}  // namespace

nlohmann::json cmd_simulate(const RunConfig& config, std::ostream& status) {
  config.validate();
  if (config.data_path) throw ValidationError("simulate needs a scenario, not a data file");
  const fs::path dir = prepare_dir(config.output_dir);
  const LoadedData data = load_or_simulate(config);
  write_dataset_csv((dir / "data.csv").string(), data.data, &data.labels);
  write_data_sidecar(dir, config, data);
  const std::string canonical = config.canonical();
  write_file(dir / "config.txt", canonical);
  status << "wrote " << (dir / "data.csv").string() << " (" << data.data.n() << " x " << data.data.d() << ")\n";
  return {{"command", "simulate"},
          {"config_hash", config.provenance_hash()},
          {"data", (dir / "data.csv").string()},
          {"data_hash", content_hash(read_file(dir / "data.csv"))},
          {"n", data.data.n()},
          {"d", data.data.d()}};
}

nlohmann::json cmd_fit(const RunConfig& config, std::ostream& status) {
  config.validate();
  const LoadedData data = load_or_simulate(config);
  config.prior.validate(data.data.d());
  const ResolvedPrior prior = resolve_prior(config.prior, data.data);
  for (const auto& w : prior.cov.warnings) status << "warning: " << w << '\n';

  const fs::path dir = prepare_dir(config.output_dir);
  const std::string canonical = config.canonical();
  const std::string hash = config.provenance_hash();
  write_file(dir / "config.txt", canonical);
  write_dataset_csv((dir / "data.csv").string(), data.data, data.labels.empty() ? nullptr : &data.labels);
  write_data_sidecar(dir, config, data);

  ChainOptions options;
  options.sweeps = config.sweeps;
  options.burn_in = config.burn_in;
  options.permute = config.permute;
  options.allocation.workers = config.allocation_workers;
  options.allocation.block_size = config.block_size;
  options.record_allocations = config.write_allocations;
  options.record_cov_diag = config.write_cov_diag;
  options.record_full_cov = config.write_full_cov;
  options.keep_records = false;

  InitSpec init = InitSpec::parse(config.init);
  init.kmeans_restarts = config.kmeans_restarts;

  std::mutex status_mutex;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(config.replicates));
  const int total = config.burn_in + config.sweeps;
  const int every = std::max(1, total / 10);

#pragma omp parallel for num_threads(config.workers) schedule(dynamic) if (config.workers > 1)
  for (int r = 0; r < config.replicates; ++r) {
    try {
      RngStream rng(config.seed, kChainStreamBase + static_cast<std::uint64_t>(r));
      const std::string path = (dir / chain_file(r)).string();
      TraceWriter writer(path, hash, prior.components, data.data.d(), data.data.n(), config.write_allocations,
                         config.write_cov_diag, config.write_full_cov);
      const ProgressFn progress = [&](int sweep, int all) {
        if (sweep % every != 0 && sweep != all) return;
        std::lock_guard<std::mutex> lock(status_mutex);
        status << "chain " << r + 1 << ": sweep " << sweep << "/" << all << '\n';
      };
      try {
        run_chain(rng, data.data, prior, init, options, &writer, progress);
      } catch (const ChainError& e) {
        writer.flush();
        write_file(dir / ("failure_chain_" + std::to_string(r + 1) + ".json"), e.snapshot());
        throw;
      }
      writer.flush();
    } catch (...) {
      errors[static_cast<std::size_t>(r)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  nlohmann::json traces = nlohmann::json::array();
  for (int r = 0; r < config.replicates; ++r) {
    const fs::path p = dir / chain_file(r);
    nlohmann::json entry = {{"file", chain_file(r)},
                            {"stream", kChainStreamBase + static_cast<std::uint64_t>(r)},
                            {"hash", content_hash(read_file(p))}};
    if (config.write_allocations) entry["allocations_hash"] = content_hash(read_file(p.string() + ".z"));
    if (config.write_full_cov) entry["cov_hash"] = content_hash(read_file(p.string() + ".cov"));
    traces.push_back(entry);
  }
  nlohmann::json manifest = {{"command", "fit"},
                             {"config_hash", hash},
                             {"seed", config.seed},
                             {"data_hash", content_hash(read_file(dir / "data.csv"))},
                             {"components", prior.components},
                             {"n", data.data.n()},
                             {"d", data.data.d()},
                             {"traces", traces}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

nlohmann::json cmd_summarize(const std::string& dir_text, std::ostream& status) {
  const fs::path dir(dir_text);
  const nlohmann::json manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  const LoadedData data = read_dataset_csv((dir / "data.csv").string());
  const std::string config_hash = manifest.at("config_hash").get<std::string>();

  nlohmann::json chains = nlohmann::json::array();
  std::vector<ClusterCountStats> stats;
  std::ostringstream components_csv;
  std::vector<std::vector<int>> per_sweep;
  int d = 0;
  bool header_written = false;
  for (const auto& entry : manifest.at("traces")) {
    const std::string file = entry.at("file").get<std::string>();
    status << "summarizing " << file << '\n';
    const ChainTrace trace = read_trace((dir / file).string());
    if (trace.config_hash != config_hash) throw ValidationError(file + ": config hash does not match manifest");
    if (trace.records.empty()) throw EmptyResult(file + ": no recorded sweeps");
    d = trace.dim;
    const ClusterCountStats s = count_nonempty(trace);
    stats.push_back(s);
    per_sweep.push_back(s.per_sweep);

    nlohmann::json chain = {{"file", file},
                            {"mode", s.mode},
                            {"mode_frequency", s.mode_frequency},
                            {"mean_nonempty", s.mean},
                            {"min_nonempty", s.min},
                            {"max_nonempty", s.max}};
    try {
      const RelabeledSummary relabel = relabel_pointprocess(trace, s.mode);
      chain["valid_fraction"] = relabel.valid_fraction;
      chain["retained_sweeps"] = relabel.retained.size();
      nlohmann::json comps = nlohmann::json::array();
      if (!header_written) {
        components_csv << "file,component,weight_mean,weight_sd";
        for (int l = 1; l <= d; ++l) components_csv << ",mu_mean_" << l;
        for (int l = 1; l <= d; ++l) components_csv << ",mu_sd_" << l;
        components_csv << '\n';
        header_written = true;
      }
      for (int k = 0; k < relabel.target; ++k) {
        const ComponentSummary& c = relabel.components[static_cast<std::size_t>(k)];
        comps.push_back({{"weight_mean", c.weight_mean},
                         {"weight_sd", c.weight_sd},
                         {"mean", std::vector<double>(c.mean_mean.data(), c.mean_mean.data() + c.mean_mean.size())},
                         {"mean_sd", std::vector<double>(c.mean_sd.data(), c.mean_sd.data() + c.mean_sd.size())}});
        components_csv << file << ',' << k + 1 << ',' << c.weight_mean << ',' << c.weight_sd;
        for (int l = 0; l < d; ++l) components_csv << ',' << c.mean_mean(l);
        for (int l = 0; l < d; ++l) components_csv << ',' << c.mean_sd(l);
        components_csv << '\n';
      }
      chain["components"] = comps;
      if (!trace.records.front().allocations.empty()) {
        const std::vector<int> partition = map_partition(trace, &relabel);
        if (!data.labels.empty()) chain["adjusted_rand"] = adjusted_rand(partition, data.labels);
      }
    } catch (const EmptyResult& e) {
      chain["relabel_error"] = e.what();
    }
    chains.push_back(chain);
  }
  if (chains.empty()) throw EmptyResult("manifest lists no traces");

  const ReplicateCounts rc = summarize_replicates(stats);
  std::ostringstream counts_csv;
  counts_csv << "sweep";
  for (std::size_t c = 0; c < per_sweep.size(); ++c) counts_csv << ",chain_" << c + 1;
  counts_csv << '\n';
  std::size_t rows = 0;
  for (const auto& v : per_sweep) rows = std::max(rows, v.size());
  for (std::size_t t = 0; t < rows; ++t) {
    counts_csv << t;
    for (const auto& v : per_sweep) {
      counts_csv << ',';
      if (t < v.size()) counts_csv << v[t];
    }
    counts_csv << '\n';
  }
  write_file(dir / "counts.csv", counts_csv.str());
  if (header_written) write_file(dir / "components.csv", components_csv.str());

  nlohmann::json summary = {{"command", "summarize"},
                            {"config_hash", config_hash},
                            {"chains", chains},
                            {"modes", rc.modes},
                            {"min_mode", rc.min_mode},
                            {"max_mode", rc.max_mode},
                            {"mean_of_means", rc.mean_of_means}};
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  return summary;
}

nlohmann::json cmd_replicate(const std::string& table, const RunConfig& config, bool write_files,
                             std::ostream& status) {
  const StatusFn report = [&](const std::string& line) { status << line << '\n'; };
  TableCheck check;
  if (table == "phidet") {
    check = replicate_phidet();
  } else if (table == "overlap") {
    check = replicate_overlap();
  } else if (table == "counts") {
    CountsOptions o;
    o.seed = config.seed;
    o.workers = config.allocation_workers;
    if (config.rep_sweeps) o.sweeps = *config.rep_sweeps;
    if (config.rep_burn_in) o.burn_in = *config.rep_burn_in;
    if (config.rep_replicates) o.replicates = *config.rep_replicates;
    if (config.rep_n) o.n = *config.rep_n;
    if (config.rep_d) o.d = *config.rep_d;
    check = replicate_counts(o, report);
  } else if (table == "clustering") {
    ClusteringOptions o;
    o.seed = config.seed;
    o.workers = config.allocation_workers;
    if (config.rep_datasets) o.datasets = *config.rep_datasets;
    if (config.rep_sweeps) o.sweeps = *config.rep_sweeps;
    if (config.rep_burn_in) o.burn_in = *config.rep_burn_in;
    if (config.rep_cells) {
      const auto all = default_clustering_cells();
      o.cells.clear();
      for (const auto& name : *config.rep_cells) {
        const auto it = std::find_if(all.begin(), all.end(), [&](const ClusteringCell& c) { return c.name == name; });
        if (it == all.end()) throw ValidationError("replicate.cells: unknown cell '" + name + "'");
        o.cells.push_back(*it);
      }
    }
    if (o.datasets < 1) throw ValidationError("replicate.datasets must be positive");
    check = replicate_clustering(o, report);
  } else {
    throw ValidationError("unknown table '" + table + "' (expected phidet, overlap, counts or clustering)");
  }
  status << check.rendered;
  nlohmann::json out = {{"command", "replicate"},
                        {"table", check.table},
                        {"passed", check.passed},
                        {"checked", check.checked},
                        {"ok", check.ok()},
                        {"details", check.details}};
  if (write_files) {
    const fs::path dir = prepare_dir(config.output_dir);
    write_file(dir / ("replicate_" + table + ".txt"), check.rendered);
    write_file(dir / ("replicate_" + table + ".json"), out.dump(2) + "\n");
  }
  return out;
}

}  // namespace gmix
