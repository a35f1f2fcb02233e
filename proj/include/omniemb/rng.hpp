// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>

namespace omniemb {

/// FNV-1a 64-bit hash over raw bytes. Used by the tokenizer and for file
/// digests in run manifests.
std::uint64_t fnv1a64(std::string_view bytes);

/// Derives a module-local seed from the single top-level seed and a fixed
/// label, so that "--seed" is the only reproducibility knob.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);

/// Minimal PCG generator (64-bit state, 32-bit output). All randomness in
/// the engine flows through this type so results are identical across
/// platforms and standard-library versions.
class Pcg32 {
public:
    explicit Pcg32(std::uint64_t seed, std::uint64_t stream = 0x14057b7ef767814fULL);

    std::uint32_t next_u32();

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double();

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi);

    /// Standard normal via Box-Muller (one value per call, cached pair).
    double next_gaussian();

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t next_below(std::uint64_t n);

private:
    std::uint64_t state_;
    std::uint64_t inc_;
    double cached_gaussian_ = 0.0;
    bool has_cached_gaussian_ = false;
};

}  // namespace omniemb
