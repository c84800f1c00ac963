#include "gmix/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "gmix/error.hpp"
#include "gmix/trace_io.hpp"

namespace gmix {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

class Reader {
 public:
  Reader(std::string key, std::string value, int line)
      : key_(std::move(key)), value_(std::move(value)), line_(line) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError("line " + std::to_string(line_) + ": " + key_ + ": " + what);
  }

  double real() const {
    double v = 0.0;
    const auto res = std::from_chars(value_.data(), value_.data() + value_.size(), v);
    if (res.ec != std::errc() || res.ptr != value_.data() + value_.size()) fail("expected a number, got '" + value_ + "'");
    return v;
  }

  long long integer() const {
    long long v = 0;
    const auto res = std::from_chars(value_.data(), value_.data() + value_.size(), v);
    if (res.ec != std::errc() || res.ptr != value_.data() + value_.size()) fail("expected an integer, got '" + value_ + "'");
    return v;
  }

  int count() const {
    const long long v = integer();
    if (v < 0 || v > 1'000'000'000) fail("out of range");
    return static_cast<int>(v);
  }

  std::uint64_t unsigned64() const {
    std::uint64_t v = 0;
    const auto res = std::from_chars(value_.data(), value_.data() + value_.size(), v);
    if (res.ec != std::errc() || res.ptr != value_.data() + value_.size()) fail("expected an unsigned integer, got '" + value_ + "'");
    return v;
  }

  bool boolean() const {
    if (value_ == "true" || value_ == "yes" || value_ == "1") return true;
    if (value_ == "false" || value_ == "no" || value_ == "0") return false;
    fail("expected true or false, got '" + value_ + "'");
  }

  std::vector<double> reals() const {
    std::vector<double> out;
    for (const auto& item : split_list(value_)) out.push_back(Reader(key_, item, line_).real());
    return out;
  }

  const std::string& text() const { return value_; }

  std::string choice(std::initializer_list<const char*> options) const {
    for (const char* o : options) {
      if (value_ == o) return value_;
    }
    std::string list;
    for (const char* o : options) list += std::string(list.empty() ? "" : ", ") + o;
    fail("expected one of " + list + ", got '" + value_ + "'");
  }

 private:
  std::string key_;
  std::string value_;
  int line_;
};

void apply(RunConfig& c, const std::string& key, const Reader& r) {
  if (key == "seed") c.seed = r.unsigned64();
  else if (key == "data") c.data_path = r.text();
  else if (key == "scenario.kind") c.scenario_kind = r.choice({"mixture3", "two_mean"});
  else if (key == "scenario.d") c.scenario.d = r.count();
  else if (key == "scenario.n") c.scenario.n = r.count();
  else if (key == "scenario.tau") c.scenario.tau = r.real();
  else if (key == "scenario.weights") {
    const auto w = r.reals();
    if (w.size() != 3) r.fail("expected three weights");
    c.scenario.weights = {w[0], w[1], w[2]};
  }
  else if (key == "scenario.eta") c.two_mean_eta = r.real();
  else if (key == "scenario.mu1") c.two_mean_mu1 = r.real();
  else if (key == "scenario.mu2") c.two_mean_mu2 = r.real();
  else if (key == "scenario.sigma2") c.two_mean_sigma2 = r.real();
  else if (key == "prior.components") c.prior.max_components = r.count();
  else if (key == "prior.e0") c.prior.e0 = r.real();
  else if (key == "prior.mean_center") {
    c.prior.mean_center = r.choice({"sampled", "fixed"}) == "fixed" ? MeanCenterMode::fixed : MeanCenterMode::sampled;
  }
  else if (key == "prior.m0") {
    const auto v = r.reals();
    c.prior.m0 = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  else if (key == "prior.shrinkage") {
    c.prior.shrinkage = r.choice({"fixed", "gamma"}) == "gamma" ? ShrinkageMode::gamma : ShrinkageMode::fixed;
  }
  else if (key == "prior.lambda") c.prior.lambda = r.real();
  else if (key == "prior.nu1") c.prior.nu1 = r.real();
  else if (key == "prior.nu2") c.prior.nu2 = r.real();
  else if (key == "prior.cov") c.prior.cov_mode = parse_cov_prior_mode(r.choice({"hierarchical", "trace", "determinant"}));
  else if (key == "prior.c0") c.prior.c0 = r.real();
  else if (key == "prior.r2") c.prior.r2 = r.real();
  else if (key == "sampler.sweeps") c.sweeps = r.count();
  else if (key == "sampler.burn_in") c.burn_in = r.count();
  else if (key == "sampler.replicates") c.replicates = r.count();
  else if (key == "sampler.permute") c.permute = r.boolean();
  else if (key == "sampler.init") c.init = r.choice({"kmeans", "prior"});
  else if (key == "sampler.kmeans_restarts") c.kmeans_restarts = r.count();
  else if (key == "sampler.workers") c.workers = r.count();
  else if (key == "sampler.allocation_workers") c.allocation_workers = r.count();
  else if (key == "sampler.block_size") c.block_size = r.count();
  else if (key == "output.dir") c.output_dir = r.text();
  else if (key == "output.allocations") c.write_allocations = r.boolean();
  else if (key == "output.cov_diag") c.write_cov_diag = r.boolean();
  else if (key == "output.full_cov") c.write_full_cov = r.boolean();
  else if (key == "replicate.datasets") c.rep_datasets = r.count();
  else if (key == "replicate.sweeps") c.rep_sweeps = r.count();
  else if (key == "replicate.burn_in") c.rep_burn_in = r.count();
  else if (key == "replicate.replicates") c.rep_replicates = r.count();
  else if (key == "replicate.n") c.rep_n = r.count();
  else if (key == "replicate.d") c.rep_d = r.count();
  else if (key == "replicate.cells") c.rep_cells = split_list(r.text());
  else r.fail("unknown key");
}

std::string real_text(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string join_reals(const double* v, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += (i ? "," : "") + real_text(v[i]);
  return out;
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string raw;
  std::set<std::string> seen;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("line " + std::to_string(line) + ": expected 'key = value'");
    }
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (!seen.insert(key).second) {
      throw ValidationError("line " + std::to_string(line) + ": " + key + ": duplicate key");
    }
    apply(c, key, Reader(key, value, line));
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void RunConfig::validate() const {
  if (!data_path) {
    if (scenario_kind == "mixture3") {
      scenario.validate();
    } else {
      if (scenario.n < 1) throw ValidationError("scenario.n must be positive");
      if (!(two_mean_eta > 0.0 && two_mean_eta < 1.0)) throw ValidationError("scenario.eta must lie in (0, 1)");
      if (!(two_mean_sigma2 > 0.0)) throw ValidationError("scenario.sigma2 must be positive");
    }
  }
  if (sweeps < 1) throw ValidationError("sampler.sweeps must be positive");
  if (replicates < 1) throw ValidationError("sampler.replicates must be positive");
  if (workers < 1 || allocation_workers < 1) throw ValidationError("worker counts must be positive");
  if (block_size < 1) throw ValidationError("sampler.block_size must be positive");
  if (kmeans_restarts < 1) throw ValidationError("sampler.kmeans_restarts must be positive");
  if (write_allocations && prior.max_components > 65535) {
    throw ValidationError("allocation output supports at most 65535 components");
  }
  if (output_dir.empty()) throw ValidationError("output.dir must not be empty");
  if (!data_path) {
    const int d = scenario_kind == "mixture3" ? scenario.d : 1;
    prior.validate(d);
  }
}

std::string RunConfig::canonical() const {
  std::ostringstream out;
  out << "seed = " << seed << '\n';
  if (data_path) out << "data = " << *data_path << '\n';
  out << "scenario.kind = " << scenario_kind << '\n'
      << "scenario.d = " << scenario.d << '\n'
      << "scenario.n = " << scenario.n << '\n'
      << "scenario.tau = " << real_text(scenario.tau) << '\n'
      << "scenario.weights = " << join_reals(scenario.weights.data(), 3) << '\n'
      << "scenario.eta = " << real_text(two_mean_eta) << '\n'
      << "scenario.mu1 = " << real_text(two_mean_mu1) << '\n'
      << "scenario.mu2 = " << real_text(two_mean_mu2) << '\n'
      << "scenario.sigma2 = " << real_text(two_mean_sigma2) << '\n'
      << "prior.components = " << prior.max_components << '\n'
      << "prior.e0 = " << real_text(prior.e0) << '\n'
      << "prior.mean_center = " << (prior.mean_center == MeanCenterMode::fixed ? "fixed" : "sampled") << '\n';
  if (prior.m0) out << "prior.m0 = " << join_reals(prior.m0->data(), static_cast<std::size_t>(prior.m0->size())) << '\n';
  out << "prior.shrinkage = " << (prior.shrinkage == ShrinkageMode::gamma ? "gamma" : "fixed") << '\n'
      << "prior.lambda = " << real_text(prior.lambda) << '\n'
      << "prior.nu1 = " << real_text(prior.nu1) << '\n'
      << "prior.nu2 = " << real_text(prior.nu2) << '\n'
      << "prior.cov = " << to_string(prior.cov_mode) << '\n';
  if (prior.c0) out << "prior.c0 = " << real_text(*prior.c0) << '\n';
  out << "prior.r2 = " << real_text(prior.r2) << '\n'
      << "sampler.sweeps = " << sweeps << '\n'
      << "sampler.burn_in = " << burn_in << '\n'
      << "sampler.replicates = " << replicates << '\n'
      << "sampler.permute = " << (permute ? "true" : "false") << '\n'
      << "sampler.init = " << init << '\n'
      << "sampler.kmeans_restarts = " << kmeans_restarts << '\n'
      << "sampler.workers = " << workers << '\n'
      << "sampler.allocation_workers = " << allocation_workers << '\n'
      << "sampler.block_size = " << block_size << '\n'
      << "output.dir = " << output_dir << '\n'
      << "output.allocations = " << (write_allocations ? "true" : "false") << '\n'
      << "output.cov_diag = " << (write_cov_diag ? "true" : "false") << '\n'
      << "output.full_cov = " << (write_full_cov ? "true" : "false") << '\n';
  if (rep_datasets) out << "replicate.datasets = " << *rep_datasets << '\n';
  if (rep_sweeps) out << "replicate.sweeps = " << *rep_sweeps << '\n';
  if (rep_burn_in) out << "replicate.burn_in = " << *rep_burn_in << '\n';
  if (rep_replicates) out << "replicate.replicates = " << *rep_replicates << '\n';
  if (rep_n) out << "replicate.n = " << *rep_n << '\n';
  if (rep_d) out << "replicate.d = " << *rep_d << '\n';
  if (rep_cells) {
    out << "replicate.cells = ";
    for (std::size_t i = 0; i < rep_cells->size(); ++i) out << (i ? "," : "") << (*rep_cells)[i];
    out << '\n';
  }
  return out.str();
}

std::string RunConfig::provenance_hash() const {
  std::istringstream in(canonical());
  std::string line, kept;
  while (std::getline(in, line)) {
    if (line.starts_with("output.dir =") || line.starts_with("sampler.workers =") ||
        line.starts_with("sampler.allocation_workers =")) {
      continue;
    }
    kept += line + '\n';
  }
  return content_hash(kept);
}

}  // namespace gmix
