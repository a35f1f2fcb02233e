// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#include "omniemb/rng.hpp"

#include <cmath>

namespace omniemb {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

// splitmix64 finalizer; mixes label hash and master seed into one 64-bit seed.
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
    return mix64(master ^ mix64(fnv1a64(label)));
}

Pcg32::Pcg32(std::uint64_t seed, std::uint64_t stream) {
    inc_ = (stream << 1u) | 1u;
    state_ = 0;
    next_u32();
    state_ += seed;
    next_u32();
}

std::uint32_t Pcg32::next_u32() {
    std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    auto rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
}

double Pcg32::next_double() {
    // 26 high bits + 27 low bits -> 53-bit mantissa.
    std::uint64_t hi = next_u32() >> 6;
    std::uint64_t lo = next_u32() >> 5;
    return static_cast<double>((hi << 27) | lo) * 0x1.0p-53;
}

double Pcg32::uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
}

double Pcg32::next_gaussian() {
    if (has_cached_gaussian_) {
        has_cached_gaussian_ = false;
        return cached_gaussian_;
    }
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) {
        u1 = next_double();
    }
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * 3.14159265358979323846 * u2;
    cached_gaussian_ = radius * std::sin(angle);
    has_cached_gaussian_ = true;
    return radius * std::cos(angle);
}

std::uint64_t Pcg32::next_below(std::uint64_t n) {
    // modulo is fine here: n is tiny compared to 2^64 in every call site
    std::uint64_t v = (static_cast<std::uint64_t>(next_u32()) << 32) | next_u32();
    return v % n;
}

}  // namespace omniemb
