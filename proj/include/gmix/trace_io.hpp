#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>

#include "gmix/gibbs.hpp"

namespace gmix {

// Trace file layout (text, one file per chain):
//
//   # gmix-trace 1
//   # config_hash <16 hex digits>
//   # components <G> dim <d> observations <n>
//   sweep,nonempty,w1..wG,n1..nG,logdet1..logdetG,mu<g>_<l>...,var<g>_<l>...
//   <one row per recorded sweep>
//
// mu<g>_<l> columns run over g = 1..G outer, l = 1..d inner; var<g>_<l>
// (diagonal of Σ_g) follow in the same order when recorded. Doubles use the
// shortest round-trip representation, so equal traces give equal bytes.
//
// Optional little-endian binary sidecars next to the CSV:
//   <path>.z    "GMXZ", u32 version, u32 n, u32 G, then per sweep n × u16
//               allocations (0-based).
//   <path>.cov  "GMXC", u32 version, u32 G, u32 d, then per sweep G × d × d
//               f64 covariances, row-major.

// FNV-1a 64-bit content hash, as 16 lowercase hex digits.
std::string content_hash(std::string_view text);

class TraceWriter : public TraceSink {
 public:
  TraceWriter(const std::string& path, const std::string& config_hash, int components, int dim,
              int observations, bool write_allocations, bool write_cov_diag, bool write_full_cov);
  void write(const SweepRecord& record) override;
  void flush();

 private:
  std::ofstream csv_;
  std::ofstream z_;
  std::ofstream cov_;
  int components_;
  int dim_;
  int observations_;
  bool write_cov_diag_;
};

ChainTrace read_trace(const std::string& path);

}  // namespace gmix
