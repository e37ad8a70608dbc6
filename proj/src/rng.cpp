#include "elaxp/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace elaxp {
namespace {

std::vector<std::uint32_t> words(std::uint64_t root, std::initializer_list<std::uint64_t> keys) {
  std::vector<std::uint32_t> out;
  out.reserve(2 * (keys.size() + 1));
  auto push = [&](std::uint64_t v) {
    out.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    out.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(root);
  for (auto k : keys) push(k);
  return out;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> keys) {
  const auto w = words(root, keys);
  std::seed_seq seq(w.begin(), w.end());
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

Rng::Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) {
  const auto w = words(seed, stream);
  std::seed_seq seq(w.begin(), w.end());
  engine_.seed(seq);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(angle);
  has_spare_ = true;
  return r * std::cos(angle);
}

std::size_t Rng::below(std::size_t n) {
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t v = engine_();
  while (v >= limit) v = engine_();
  return static_cast<std::size_t>(v % bound);
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  shuffle(p);
  return p;
}

}  // namespace elaxp
