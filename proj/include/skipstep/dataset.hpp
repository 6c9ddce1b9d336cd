#pragma once

// Split generation for each task family and the manual skip records used by
// warm starts.

#include <array>
#include <cstdint>
#include <optional>

#include "skipstep/types.hpp"

namespace skipstep {

/// Record counts indexed by SplitLabel.
using SplitSizes = std::array<int, 4>;

/// Table-1 sizes for a task.
SplitSizes default_split_sizes(TaskKind task);

/// A full-step record for `q`, budgeted to its own step count.
DatasetRecord full_record(const Question& q);

/// All four splits of one task. The in-domain stream fills train first and
/// in_domain_test after it; every question id is unique across the splits.
/// Deterministic for a given seed.
std::array<Dataset, 4> generate_splits(TaskKind task, const SplitSizes& sizes,
                                       std::uint64_t seed);

/// One split only; same contents as the corresponding entry of
/// generate_splits for the same sizes and seed.
Dataset generate_split(TaskKind task, SplitLabel split, const SplitSizes& sizes,
                       std::uint64_t seed);

/// The warm-start companion of a full-step record with exactly one merged
/// pair: a random adjacent column pair for addition, a cancelling turn pair
/// for direction. nullopt when the record has no eligible pair. Throws
/// ConfigError for algebra.
std::optional<DatasetRecord> make_warmstart_skip(const DatasetRecord& record,
                                                 std::uint64_t seed);

/// `records` followed by one warm-start companion per eligible record.
Dataset add_warmstart_skips(const Dataset& records, std::uint64_t seed);

}  // namespace skipstep
