#include "gmix/trace_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <sstream>
#include <vector>

#include "gmix/error.hpp"

namespace gmix {
namespace {

constexpr std::uint32_t kVersion = 1;

void put_double(std::ostream& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, res.ptr - buf);
}

template <typename T>
void put_raw(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get_raw(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

double parse_double(const std::string& cell, const std::string& path) {
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
    throw ValidationError(path + ": bad number '" + cell + "'");
  }
  return v;
}

}  // namespace

std::string content_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

TraceWriter::TraceWriter(const std::string& path, const std::string& config_hash, int components,
                         int dim, int observations, bool write_allocations, bool write_cov_diag,
                         bool write_full_cov)
    : csv_(path, std::ios::binary),
      components_(components),
      dim_(dim),
      observations_(observations),
      write_cov_diag_(write_cov_diag) {
  if (!csv_) throw ValidationError("cannot write trace " + path);
  csv_ << "# gmix-trace " << kVersion << '\n'
       << "# config_hash " << config_hash << '\n'
       << "# components " << components << " dim " << dim << " observations " << observations << '\n';
  csv_ << "sweep,nonempty";
  for (int g = 1; g <= components; ++g) csv_ << ",w" << g;
  for (int g = 1; g <= components; ++g) csv_ << ",n" << g;
  for (int g = 1; g <= components; ++g) csv_ << ",logdet" << g;
  for (int g = 1; g <= components; ++g) {
    for (int l = 1; l <= dim; ++l) csv_ << ",mu" << g << '_' << l;
  }
  if (write_cov_diag) {
    for (int g = 1; g <= components; ++g) {
      for (int l = 1; l <= dim; ++l) csv_ << ",var" << g << '_' << l;
    }
  }
  csv_ << '\n';
  if (write_allocations) {
    if (components > 65535) throw ValidationError("allocation sidecar supports at most 65535 components");
    z_.open(path + ".z", std::ios::binary);
    if (!z_) throw ValidationError("cannot write " + path + ".z");
    z_.write("GMXZ", 4);
    put_raw<std::uint32_t>(z_, kVersion);
    put_raw<std::uint32_t>(z_, static_cast<std::uint32_t>(observations));
    put_raw<std::uint32_t>(z_, static_cast<std::uint32_t>(components));
  }
  if (write_full_cov) {
    cov_.open(path + ".cov", std::ios::binary);
    if (!cov_) throw ValidationError("cannot write " + path + ".cov");
    cov_.write("GMXC", 4);
    put_raw<std::uint32_t>(cov_, kVersion);
    put_raw<std::uint32_t>(cov_, static_cast<std::uint32_t>(components));
    put_raw<std::uint32_t>(cov_, static_cast<std::uint32_t>(dim));
  }
}

void TraceWriter::write(const SweepRecord& rec) {
  csv_ << rec.sweep << ',' << rec.nonempty;
  for (int g = 0; g < components_; ++g) {
    csv_ << ',';
    put_double(csv_, rec.weights(g));
  }
  for (int g = 0; g < components_; ++g) csv_ << ',' << rec.counts[static_cast<std::size_t>(g)];
  for (int g = 0; g < components_; ++g) {
    csv_ << ',';
    put_double(csv_, rec.log_det_cov(g));
  }
  for (int g = 0; g < components_; ++g) {
    for (int l = 0; l < dim_; ++l) {
      csv_ << ',';
      put_double(csv_, rec.means(l, g));
    }
  }
  if (write_cov_diag_) {
    if (rec.cov_diag.cols() != components_) throw ValidationError("record lacks covariance diagonals");
    for (int g = 0; g < components_; ++g) {
      for (int l = 0; l < dim_; ++l) {
        csv_ << ',';
        put_double(csv_, rec.cov_diag(l, g));
      }
    }
  }
  csv_ << '\n';
  if (z_.is_open()) {
    if (rec.allocations.size() != static_cast<std::size_t>(observations_)) {
      throw ValidationError("record lacks allocations");
    }
    for (int label : rec.allocations) put_raw<std::uint16_t>(z_, static_cast<std::uint16_t>(label));
  }
  if (cov_.is_open()) {
    if (rec.full_cov.size() != static_cast<std::size_t>(components_)) {
      throw ValidationError("record lacks full covariances");
    }
    for (const Matrix& c : rec.full_cov) {
      for (int r = 0; r < dim_; ++r) {
        for (int k = 0; k < dim_; ++k) put_raw<double>(cov_, c(r, k));
      }
    }
  }
}

void TraceWriter::flush() {
  csv_.flush();
  if (z_.is_open()) z_.flush();
  if (cov_.is_open()) cov_.flush();
}

ChainTrace read_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read trace " + path);
  ChainTrace trace;
  std::string line;
  std::string magic, word;
  int version = 0;
  {
    std::getline(in, line);
    std::istringstream ss(line);
    ss >> magic >> word >> version;
    if (magic != "#" || word != "gmix-trace" || version != static_cast<int>(kVersion)) {
      throw ValidationError(path + ": not a gmix trace file");
    }
  }
  {
    std::getline(in, line);
    std::istringstream ss(line);
    ss >> magic >> word >> trace.config_hash;
    if (word != "config_hash") throw ValidationError(path + ": missing config_hash line");
  }
  {
    std::getline(in, line);
    std::istringstream ss(line);
    std::string k1, k2, k3;
    ss >> magic >> k1 >> trace.components >> k2 >> trace.dim >> k3 >> trace.observations;
    if (k1 != "components" || k2 != "dim" || k3 != "observations" || trace.components < 1 || trace.dim < 1) {
      throw ValidationError(path + ": malformed shape line");
    }
  }
  std::getline(in, line);  // column header
  const int G = trace.components;
  const int d = trace.dim;
  const std::size_t base = 2 + 3 * static_cast<std::size_t>(G) + static_cast<std::size_t>(G) * d;
  const bool has_var = std::count(line.begin(), line.end(), ',') + 1 ==
                       static_cast<long>(base + static_cast<std::size_t>(G) * d);
  std::vector<std::string> cells;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    cells.clear();
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    const std::size_t expected = base + (has_var ? static_cast<std::size_t>(G) * d : 0);
    if (cells.size() != expected) {
      throw ValidationError(path + ": row has " + std::to_string(cells.size()) + " fields, expected " +
                            std::to_string(expected));
    }
    SweepRecord rec;
    std::size_t c = 0;
    rec.sweep = static_cast<int>(parse_double(cells[c++], path));
    rec.nonempty = static_cast<int>(parse_double(cells[c++], path));
    rec.weights.resize(G);
    rec.counts.resize(static_cast<std::size_t>(G));
    rec.log_det_cov.resize(G);
    rec.means.resize(d, G);
    for (int g = 0; g < G; ++g) rec.weights(g) = parse_double(cells[c++], path);
    for (int g = 0; g < G; ++g) rec.counts[static_cast<std::size_t>(g)] = static_cast<int>(parse_double(cells[c++], path));
    for (int g = 0; g < G; ++g) rec.log_det_cov(g) = parse_double(cells[c++], path);
    for (int g = 0; g < G; ++g) {
      for (int l = 0; l < d; ++l) rec.means(l, g) = parse_double(cells[c++], path);
    }
    if (has_var) {
      rec.cov_diag.resize(d, G);
      for (int g = 0; g < G; ++g) {
        for (int l = 0; l < d; ++l) rec.cov_diag(l, g) = parse_double(cells[c++], path);
      }
    }
    trace.records.push_back(std::move(rec));
  }

  std::ifstream z(path + ".z", std::ios::binary);
  if (z) {
    char m[4];
    z.read(m, 4);
    const auto ver = get_raw<std::uint32_t>(z);
    const auto n = get_raw<std::uint32_t>(z);
    const auto g = get_raw<std::uint32_t>(z);
    if (std::memcmp(m, "GMXZ", 4) != 0 || ver != kVersion || static_cast<int>(n) != trace.observations ||
        static_cast<int>(g) != G) {
      throw ValidationError(path + ".z: header does not match the trace");
    }
    for (auto& rec : trace.records) {
      rec.allocations.resize(n);
      for (auto& label : rec.allocations) label = get_raw<std::uint16_t>(z);
      if (!z) throw ValidationError(path + ".z: truncated");
    }
  }
  std::ifstream cov(path + ".cov", std::ios::binary);
  if (cov) {
    char m[4];
    cov.read(m, 4);
    const auto ver = get_raw<std::uint32_t>(cov);
    const auto g = get_raw<std::uint32_t>(cov);
    const auto dd = get_raw<std::uint32_t>(cov);
    if (std::memcmp(m, "GMXC", 4) != 0 || ver != kVersion || static_cast<int>(g) != G ||
        static_cast<int>(dd) != d) {
      throw ValidationError(path + ".cov: header does not match the trace");
    }
    for (auto& rec : trace.records) {
      rec.full_cov.assign(static_cast<std::size_t>(G), Matrix(d, d));
      for (auto& mat : rec.full_cov) {
        for (int r = 0; r < d; ++r) {
          for (int k = 0; k < d; ++k) mat(r, k) = get_raw<double>(cov);
        }
      }
      if (!cov) throw ValidationError(path + ".cov: truncated");
    }
  }
  return trace;
}

}  // namespace gmix
