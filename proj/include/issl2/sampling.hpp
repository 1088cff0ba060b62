#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "issl2/comparison_fn.hpp"

namespace issl2 {

/// Radical inverse of `index` in `base` (Halton coordinate), in [0, 1).
double radical_inverse(std::uint64_t index, unsigned base);

/// `count` deterministic unit vectors in R^p: the 2p signed axis directions
/// followed by normalized Halton points of the cube [-1, 1]^p.
std::vector<std::vector<double>> sphere_directions(std::size_t p, std::size_t count);

/// SplitMix64 step; used to derive independent per-run seeds from one seed.
std::uint64_t splitmix64(std::uint64_t x);

struct RandomGainOptions {
  int max_depth = 5;
  bool allow_inverse = true;
  double min_exponent = 0.25;
  double max_exponent = 4.0;
  double min_scale = 0.1;
  double max_scale = 10.0;
};

/// Random tree over the K-infinity-preserving grammar (no residual/excess).
/// At most one inverse node appears on any root-to-leaf path.
GainFn random_kinf_gain(std::mt19937_64& rng, const RandomGainOptions& opts = {});

/// Random linear, power, or scaled-exponential atom; cheap to evaluate.
GainFn random_simple_gain(std::mt19937_64& rng);

}  // namespace issl2
