// SPDX-License-Identifier: Apache-2.0
//
// momploc - joint mmWave channel estimation and localization
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef MOMPLOC_RNG_HPP
#define MOMPLOC_RNG_HPP

#include <cstdint>
#include <random>

#include "momploc/types.hpp"

namespace momploc {

// splitmix64 finalizer, used to derive independent substream seeds so that
// results do not depend on thread scheduling.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic RNG stream with the draw helpers the simulators need.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), eng_(seed) {}

    // Independent child stream; the derivation depends only on (seed, tag).
    Rng substream(std::uint64_t tag) const { return Rng(mix_seed(seed_, tag)); }

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(eng_);
    }

    double gaussian() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }

    // Circularly symmetric complex Gaussian with E|x|^2 = variance.
    cplx complex_gaussian(double variance) {
        const double s = std::sqrt(variance * 0.5);
        return {s * gaussian(), s * gaussian()};
    }

    std::mt19937_64& engine() { return eng_; }

  private:
    std::uint64_t seed_;
    std::mt19937_64 eng_;
};

} // namespace momploc

#endif
