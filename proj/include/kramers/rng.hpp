#pragma once

#include <cstdint>
#include <random>

namespace kramers {

/// Deterministic random stream addressed by (master seed, stream id).
///
/// Streams with different ids are seeded through std::seed_seq from the full
/// 128-bit key, so realizations can be generated in any order or on any
/// worker and still reproduce bit for bit.
class RandomStream {
 public:
  using Engine = std::mt19937_64;

  RandomStream(std::uint64_t master_seed, std::uint64_t stream_id)
      : seed_(master_seed), id_(stream_id), engine_(make_engine(master_seed, stream_id)) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t id() const { return id_; }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t index(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_); }

  /// Child stream for a sub-task (e.g. the coupling matrix of a realization).
  RandomStream split(std::uint64_t salt) const {
    return RandomStream(seed_ ^ (0x9e3779b97f4a7c15ULL * (salt + 1)), id_);
  }

  Engine& engine() { return engine_; }

 private:
  static Engine make_engine(std::uint64_t seed, std::uint64_t id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32)};
    return Engine(seq);
  }

  std::uint64_t seed_;
  std::uint64_t id_;
  Engine engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace kramers
