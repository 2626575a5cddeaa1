#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dbsde/model.hpp"
#include "dbsde/scheme.hpp"

namespace dbsde {

// Fully specified 64-bit generator so sampled figures replay bit-exactly on
// any platform; the algorithm identity is recorded in the CSV metadata.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Stream seed for sample `index` drawn from a master seed.
std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t index);

// One record per grid time. e and eta are the increments leading into the
// state (zero at j = 0); a and k are the penalty increments applied at j
// (zero at j = n); A, K are their running sums and alpha = A - K.
struct TrajectoryStep {
  int j = 0;
  double t = 0, e = 0, eta = 0;
  double w = 0, ntilde = 0;
  double y = 0, xi = 0, zeta = 0;
  double a = 0, k = 0, A = 0, K = 0, alpha = 0;
};

struct TrajectorySample {
  std::uint64_t seed = 0;
  std::vector<TrajectoryStep> steps;  // n+1 records
  double max_violation = 0.0;         // max over steps of ((xi-y)^+, (y-zeta)^+)
};

// Draws the increments i.i.d. from the walk laws with the given stream seed
// and reads the solution fields along the realized lattice path. Requires a
// solve with full layer storage.
TrajectorySample sample_path(const ProblemSpec& prob, const SchemeSolution& solution,
                             std::uint64_t seed);

// Header row is exactly t,e,eta,w,ntilde,y,xi,zeta,a,k,A,K,alpha; metadata
// lines go out '#'-prefixed before it.
void write_trajectory_csv(const std::filesystem::path& path, const TrajectorySample& sample,
                          std::span<const std::string> metadata);

}  // namespace dbsde
