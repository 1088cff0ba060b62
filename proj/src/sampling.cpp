#include "issl2/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

#include "issl2/errors.hpp"

namespace issl2 {

namespace {

constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

GainFn random_atom(std::mt19937_64& rng, const RandomGainOptions& opts) {
  std::uniform_int_distribution<int> pick(0, 4);
  switch (pick(rng)) {
    case 0: return GainFn::identity();
    case 1: return GainFn::power(log_uniform(rng, opts.min_exponent, opts.max_exponent));
    case 2: return GainFn::linear(log_uniform(rng, opts.min_scale, opts.max_scale));
    case 3: return GainFn::exp_minus_one();
    default: return GainFn::log_one_plus();
  }
}

GainFn random_tree(std::mt19937_64& rng, const RandomGainOptions& opts, int depth,
                   bool inverse_allowed) {
  std::uniform_int_distribution<int> pick(0, 8);
  if (depth <= 1) return random_atom(rng, opts);
  const int choice = pick(rng);
  const auto child = [&](bool inv) { return random_tree(rng, opts, depth - 1, inv); };
  switch (choice) {
    case 0:
    case 1: return random_atom(rng, opts);
    case 2: return GainFn::compose(child(inverse_allowed), child(inverse_allowed));
    case 3: return GainFn::max(child(inverse_allowed), child(inverse_allowed));
    case 4: return GainFn::min(child(inverse_allowed), child(inverse_allowed));
    case 5: return GainFn::sum(child(inverse_allowed), child(inverse_allowed));
    case 6: return GainFn::post_scale(log_uniform(rng, opts.min_scale, opts.max_scale), child(inverse_allowed));
    case 7: return GainFn::pre_scale(log_uniform(rng, opts.min_scale, opts.max_scale), child(inverse_allowed));
    default:
      if (inverse_allowed && opts.allow_inverse) return GainFn::inverse(child(false));
      return GainFn::compose(child(inverse_allowed), child(inverse_allowed));
  }
}

}  // namespace

double radical_inverse(std::uint64_t index, unsigned base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

std::vector<std::vector<double>> sphere_directions(std::size_t p, std::size_t count) {
  if (p == 0) throw DomainError("sphere directions need p >= 1");
  if (p > std::size(kPrimes)) throw DomainError("sphere directions support p <= 16");
  std::vector<std::vector<double>> out;
  out.reserve(count);
  for (std::size_t i = 0; i < p && out.size() < count; ++i) {
    for (double sign : {1.0, -1.0}) {
      if (out.size() >= count) break;
      std::vector<double> v(p, 0.0);
      v[i] = sign;
      out.push_back(std::move(v));
    }
  }
  for (std::uint64_t k = 1; out.size() < count; ++k) {
    std::vector<double> v(p);
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      v[i] = 2.0 * radical_inverse(k, kPrimes[i]) - 1.0;
      norm_sq += v[i] * v[i];
    }
    if (norm_sq < 1e-12) continue;
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double& x : v) x *= inv;
    out.push_back(std::move(v));
  }
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

GainFn random_kinf_gain(std::mt19937_64& rng, const RandomGainOptions& opts) {
  std::uniform_int_distribution<int> depth(1, std::max(1, opts.max_depth));
  return random_tree(rng, opts, depth(rng), true);
}

GainFn random_simple_gain(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, 2);
  switch (pick(rng)) {
    case 0: return GainFn::linear(log_uniform(rng, 0.1, 10.0));
    case 1: return GainFn::post_scale(log_uniform(rng, 0.1, 10.0),
                                      GainFn::power(log_uniform(rng, 0.5, 3.0)));
    default: return GainFn::post_scale(log_uniform(rng, 0.1, 10.0), GainFn::exp_minus_one());
  }
}

}  // namespace issl2
