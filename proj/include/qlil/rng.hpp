#pragma once

#include <cstdint>
#include <random>

namespace qlil {

/// A reproducible random stream identified by (master seed, stream id).
///
/// Streams are derived by a counter-based split: the four 32-bit halves of
/// the master seed and the stream id are fed through std::seed_seq into a
/// 64-bit Mersenne Twister. Replication i of an experiment always uses stream
/// id i, so results do not depend on which worker ran it.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform_open();

  std::mt19937_64& engine() { return engine_; }

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

}  // namespace qlil
