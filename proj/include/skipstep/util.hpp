#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace skipstep {

// ---------------------------------------------------------------- hashing

/// Lower-case hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

/// 64-bit FNV-1a; used only to turn labels into seed material.
std::uint64_t fnv1a64(std::string_view bytes);

/// Combines a seed with a label or a counter into an independent stream seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);
std::uint64_t mix_seed(std::uint64_t seed, std::string_view label);

// ---------------------------------------------------------------- rng

/// Seeded generator with platform-independent bounded draws. The standard
/// distributions are implementation-defined, which would make datasets differ
/// between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  /// Uniform in [lo, hi], inclusive.
  std::int64_t between(std::int64_t lo, std::int64_t hi);

  /// Uniform in [0, 1) with 53 bits of precision.
  double unit();

  bool chance(double p) { return unit() < p; }

  /// Index drawn proportionally to non-negative `weights`.
  std::size_t weighted(const std::vector<double>& weights);

 private:
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------- parallel

/// Worker count for `jobs`; 0 means one per logical core.
int resolve_jobs(int jobs);

/// Calls fn(i) for i in [0, n) on up to `jobs` threads. Each index is handled
/// exactly once; callers write into per-index slots so results stay ordered.
void parallel_for(std::size_t n, int jobs,
                  const std::function<void(std::size_t)>& fn);

// ---------------------------------------------------------------- text

std::vector<std::string> split_lines(std::string_view text);
std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

}  // namespace skipstep
