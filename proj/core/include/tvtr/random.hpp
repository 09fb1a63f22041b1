// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace tvtr {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of independent stream `stream` under `base`:
/// splitmix64(base ^ splitmix64(stream + 1)). Replication r of a study
/// seeded with s uses derive_seed(s, r); restarts and sub-generators use
/// further derivations of that seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

}  // namespace tvtr
