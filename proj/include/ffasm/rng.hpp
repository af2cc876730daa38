#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>

namespace ffasm {

// splitmix64 finalizer; used to spread user seeds and derive stream seeds.
std::uint64_t mix64(std::uint64_t x);

// Seed for a numbered stream (replication, fold, ...) of a base seed.
// Streams of the same base never collide for distinct stream ids.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

// Deterministic random source. Normal deviates come from a polar
// Box-Muller transform on top of mt19937_64 so that sequences are
// reproducible across platforms, unlike std::normal_distribution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(mix64(seed)) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double normal();

  // Uniform integer on [0, bound). bound must be positive.
  std::uint64_t integer(std::uint64_t bound);

  Eigen::VectorXd normal_vector(Eigen::Index n);

  // Filled in column-major order.
  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols);

  // Fisher-Yates shuffle of 0..n-1.
  std::vector<int> permutation(int n);

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ffasm
