#pragma once

#include <cstdint>
#include <random>

#include "iterfunc/numeric.hpp"

namespace iterfunc {

//! SplitMix64 step; used to decorrelate stream seeds derived from one
//! master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

//! Deterministic substream of a master seed.  Streams are addressed by
//! (purpose, index) so replicate r of one task always sees the same draws
//! no matter how work is scheduled.
class RngStream {
 public:
  RngStream(std::uint64_t master, std::uint64_t purpose, std::uint64_t index) {
    std::uint64_t s = master;
    splitmix64(s);
    s ^= 0x632be59bd9b4e019ULL * (purpose + 1);
    splitmix64(s);
    s ^= 0x9e6c63d0876a9a47ULL * (index + 1);
    eng_.seed(splitmix64(s));
  }

  std::uint64_t raw() { return eng_(); }

  //! Uniform on the open interval (0,1); 53-bit resolution, never 0 or 1.
  double uniform() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
  }

  //! Exponential with unit mean, strictly positive.
  double exponential() { return -std::log1p(-uniform()); }

  double normal(double mean, double sd) {
    return mean + sd * inverse_normal_cdf(uniform());
  }

 private:
  std::mt19937_64 eng_;
};

//! Stream purposes; fixed numbering keeps output stable across versions.
enum StreamPurpose : std::uint64_t {
  stream_sim_eps = 1,
  stream_sim_cov = 2,
  stream_sim_price_noise = 3,
  stream_boot_sample1 = 4,
  stream_boot_sample2 = 5,
  stream_mc_rep = 6,
};

}  // namespace iterfunc
