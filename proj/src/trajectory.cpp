#include "dbsde/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "dbsde/csv.hpp"
#include "dbsde/errors.hpp"

namespace dbsde {

std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t index) {
  SplitMix64 gen(master_seed);
  std::uint64_t seed = 0;
  for (std::uint64_t i = 0; i <= index; ++i) seed = gen.next();
  return seed;
}

TrajectorySample sample_path(const ProblemSpec& prob, const SchemeSolution& solution,
                             std::uint64_t seed) {
  if (!solution.has_layers)
    throw config_error("sample_path: solution was solved without full layer storage");
  const GridSpec& g = prob.grid;
  if (solution.grid.n != g.n)
    throw config_error("sample_path: solution grid does not match the problem grid");

  SplitMix64 gen(seed);
  TrajectorySample sample;
  sample.seed = seed;
  sample.steps.resize(g.n + 1);

  Node node{0, 0, 0};
  double A = 0.0, K = 0.0;
  for (int j = 0; j <= g.n; ++j) {
    TrajectoryStep& rec = sample.steps[j];
    rec.j = j;
    if (j > 0) {
      const double u_e = gen.uniform();
      const double u_jump = gen.uniform();
      const int e = u_e < 0.5 ? +1 : -1;
      const bool jump = u_jump < 1.0 - g.kappa;
      rec.e = e;
      rec.eta = jump ? g.kappa : g.kappa - 1.0;
      node.j = j;
      node.up += e > 0 ? 1 : 0;
      node.jumps += jump ? 1 : 0;
    }
    rec.t = t_value(g, j);
    rec.w = w_value(g, node);
    rec.ntilde = ntilde_value(g, node);
    rec.xi = prob.barriers.lower(rec.t, rec.w, rec.ntilde);
    rec.zeta = prob.barriers.upper(rec.t, rec.w, rec.ntilde);

    const LayerFields& layer = solution.layer(j);
    const std::size_t idx = node_index(j, node.up, node.jumps);
    rec.y = layer.y[idx];
    if (j < g.n) {
      rec.a = layer.a[idx];
      rec.k = layer.k[idx];
    }
    A += rec.a;
    K += rec.k;
    rec.A = A;
    rec.K = K;
    rec.alpha = A - K;

    sample.max_violation = std::max({sample.max_violation, std::max(rec.xi - rec.y, 0.0),
                                     std::max(rec.y - rec.zeta, 0.0)});
  }
  return sample;
}

void write_trajectory_csv(const std::filesystem::path& path, const TrajectorySample& sample,
                          std::span<const std::string> metadata) {
  CsvFile csv(path);
  for (const std::string& line : metadata) csv.comment(line);
  csv.comment("rng=splitmix64 stream_seed=" + std::to_string(sample.seed));
  csv.raw_row("t,e,eta,w,ntilde,y,xi,zeta,a,k,A,K,alpha");
  for (const TrajectoryStep& s : sample.steps) {
    csv.row({format_double(s.t), format_double(s.e), format_double(s.eta), format_double(s.w),
             format_double(s.ntilde), format_double(s.y), format_double(s.xi),
             format_double(s.zeta), format_double(s.a), format_double(s.k), format_double(s.A),
             format_double(s.K), format_double(s.alpha)});
  }
  csv.commit();
}

}  // namespace dbsde
