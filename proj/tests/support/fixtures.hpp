#pragma once

#include "flowrec/network.hpp"
#include "flowrec/simbench.hpp"
#include "flowrec/sparse.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace flowrec::fixtures {

/// s -> a -> t with the single path [0, 1].
inline Network chain() {
  return Network::build({"s", "a", "t"}, {{"s", "a"}, {"a", "t"}}, {{0, 1}});
}

/// Nodes s, a, b, t; edges s->a, s->b, a->t, b->t; paths s->a->t and s->b->t.
inline Network two_paths() {
  return Network::build({"s", "a", "b", "t"}, {{"s", "a"}, {"s", "b"}, {"a", "t"}, {"b", "t"}},
                        {{0, 2}, {1, 3}});
}

/// Store network: totals T, RA, RB (no flow), warehouses and distribution
/// centres W1, D1, D2, W2 shipping to stores S1, S2, S3 over single-edge paths.
inline Network stores() {
  using R = NodeRole;
  return Network::build(
      {"T", "RA", "RB", "W1", "D1", "D2", "W2", "S1", "S2", "S3"},
      {{"W1", "S1"}, {"W1", "S2"}, {"D1", "S1"}, {"D1", "S2"}, {"D2", "S2"}, {"D2", "S3"},
       {"W2", "S3"}},
      {{0}, {1}, {2}, {3}, {4}, {5}, {6}},
      {R::Unspecified, R::Unspecified, R::Unspecified, R::Source, R::Source, R::Source,
       R::Source, R::Sink, R::Sink, R::Sink});
}

/// Flows on the store network in edge order: W1->S1 150, W1->S2 150, D1->S1 130,
/// D1->S2 150, D2->S2 100, D2->S3 80, W2->S3 170.
inline Vector store_flows() {
  Vector b(7);
  b << 150, 150, 130, 150, 100, 80, 170;
  return b;
}

/// Random generated instance of the benchmark family.
inline BenchmarkInstance random_instance(std::uint64_t seed, std::size_t nodes = 12,
                                         std::optional<double> density = std::nullopt,
                                         double sigma = 0.05) {
  GeneratorConfig cfg;
  cfg.nodes = nodes;
  cfg.density = density;
  cfg.sigma = sigma;
  return generate_instance(cfg, seed);
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

inline Vector from_std(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace flowrec::fixtures
