#include "wvamp/random.hpp"

#include <cmath>

#include "wvamp/errors.hpp"

namespace wvamp {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t stream_key(std::initializer_list<std::uint64_t> counters) {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (std::uint64_t c : counters) {
    std::uint64_t s = h ^ c;
    h = splitmix64(s);
  }
  return h;
}

double Rng::uniform_open() {
  for (;;) {
    const double u = uniform();
    if (u > 0.0) return u;
  }
}

double Rng::exponential() { return -std::log(uniform_open()); }

std::uint64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw InvalidArgument("Poisson mean must be finite and non-negative");
  std::uint64_t k = 0;
  double t = exponential();
  while (t <= mean) {
    ++k;
    t += exponential();
  }
  return k;
}

}  // namespace wvamp
