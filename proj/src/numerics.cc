//
// Copyright 2026 The GEDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "gedp/numerics.h"

#include <cmath>
#include <numbers>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace gedp {
namespace {

uint64_t SplitMix64(uint64_t& x) {
  uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr uint64_t Rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

// Upper-tail probability Q(z) = 1 - Phi(z).
double UpperTail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double NormalDensity(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

// AS 241 (PPND16). `p` is the lower-tail probability and `q` = 1 - p, both
// supplied by the caller so that neither is formed by cancellation.
double Ppnd16(double p, double q) {
  const double centered = p < 0.5 ? p - 0.5 : 0.5 - q;
  if (std::abs(centered) <= 0.425) {
    const double r = 0.180625 - centered * centered;
    return centered *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  const double tail = centered < 0.0 ? p : q;
  double r = std::sqrt(-std::log(tail));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) *
                      r + 2.41780725177450611770e-1) * r +
                  1.27045825245236838258e0) * r + 3.64784832476320460504e0) *
                    r + 5.76949722146069140550e0) * r +
                4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) *
                      r + 1.51986665636164571966e-2) * r +
                  1.48103976427480074590e-1) * r + 6.89767334985100004550e-1) *
                    r + 1.67638483018380384940e0) * r +
                2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) *
                      r + 1.24266094738807843860e-3) * r +
                  2.65321895265761230930e-2) * r + 2.96560571828504891230e-1) *
                    r + 1.78482653991729133580e0) * r +
                5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) *
                      r + 1.84631831751005468180e-5) * r +
                  7.86869131145613259100e-4) * r + 1.48753612908506148525e-2) *
                    r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
  }
  return centered < 0.0 ? -value : value;
}

double QuantileWithNewton(double p, double q) {
  double z = Ppnd16(p, q);
  const double density = NormalDensity(z);
  if (density <= 0.0) return z;
  // Newton step on whichever tail is smaller, so the residual is not
  // swamped by rounding of a probability near one.
  if (z > 0.0) {
    z += (UpperTail(z) - q) / density;
  } else {
    z -= (NormalCdf(z) - p) / density;
  }
  return z;
}

}  // namespace

RngStream::RngStream(uint64_t seed, uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  uint64_t mix = seed;
  const uint64_t a = SplitMix64(mix);
  mix = a ^ (stream_id * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL);
  for (uint64_t& word : state_) word = SplitMix64(mix);
}

RngStream::result_type RngStream::operator()() {
  const uint64_t result = Rotl(state_[1] * 5, 7) * 9;
  const uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = Rotl(state_[3], 45);
  return result;
}

double RngStream::Uniform01() {
  // 53 random bits, offset by half an ulp so that 0 is never returned.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double NormalCdf(double z) {
  if (std::isnan(z)) return z;
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

absl::StatusOr<double> NormalQuantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    return absl::OutOfRangeError(
        absl::StrCat("normal quantile requires p in (0, 1), got ", p));
  }
  return QuantileWithNewton(p, 1.0 - p);
}

absl::StatusOr<double> NormalUpperQuantile(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    return absl::OutOfRangeError(
        absl::StrCat("upper normal quantile requires q in (0, 1), got ", q));
  }
  return QuantileWithNewton(1.0 - q, q);
}

namespace internal {

double StandardNormal(RngStream& rng) {
  // Marsaglia polar method; the second variate is discarded so that the
  // stream position depends only on the number of calls.
  while (true) {
    const double u = 2.0 * rng.Uniform01() - 1.0;
    const double v = 2.0 * rng.Uniform01() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

double StandardGamma(RngStream& rng, double shape) {
  if (shape < 1.0) {
    const double boosted = StandardGamma(rng, shape + 1.0);
    return boosted * std::pow(rng.Uniform01(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x;
    double v;
    do {
      x = StandardNormal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.Uniform01();
    if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace internal

absl::StatusOr<double> SampleNormal(RngStream& rng, double mean, double sd) {
  if (!(sd >= 0.0) || !std::isfinite(sd)) {
    return absl::InvalidArgumentError(
        absl::StrCat("normal sd must be finite and >= 0, got ", sd));
  }
  if (sd == 0.0) return mean;
  return mean + sd * internal::StandardNormal(rng);
}

absl::StatusOr<double> SampleGamma(RngStream& rng, double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(shape) ||
      !std::isfinite(scale)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "gamma requires shape > 0 and scale > 0, got ", shape, ", ", scale));
  }
  return scale * internal::StandardGamma(rng, shape);
}

absl::StatusOr<std::vector<double>> SampleDirichlet(
    RngStream& rng, std::span<const double> concentration) {
  if (concentration.empty()) {
    return absl::InvalidArgumentError("dirichlet concentration is empty");
  }
  for (double b : concentration) {
    if (!(b > 0.0) || !std::isfinite(b)) {
      return absl::InvalidArgumentError(
          absl::StrCat("dirichlet concentration entries must be > 0, got ", b));
    }
  }
  std::vector<double> draws(concentration.size());
  if (draws.size() == 1) {
    draws[0] = 1.0;
    return draws;
  }
  double total = 0.0;
  for (size_t i = 0; i < draws.size(); ++i) {
    draws[i] = internal::StandardGamma(rng, concentration[i]);
    total += draws[i];
  }
  if (!(total > 0.0)) {
    // Every draw underflowed (possible only for tiny concentrations); fall
    // back to the limiting one-hot behaviour on the largest concentration.
    size_t best = 0;
    for (size_t i = 1; i < draws.size(); ++i) {
      if (concentration[i] > concentration[best]) best = i;
    }
    std::fill(draws.begin(), draws.end(), 0.0);
    draws[best] = 1.0;
    return draws;
  }
  for (double& d : draws) d /= total;
  // Second pass absorbs the rounding of the first normalization.
  double resum = 0.0;
  for (double d : draws) resum += d;
  for (double& d : draws) d /= resum;
  return draws;
}

absl::StatusOr<double> SampleInverseGamma(RngStream& rng, double shape,
                                          double scale) {
  if (!(shape > 2.0) || !(scale > 0.0) || !std::isfinite(shape) ||
      !std::isfinite(scale)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "inverse gamma requires shape > 2 and scale > 0, got ", shape, ", ",
        scale));
  }
  return scale / internal::StandardGamma(rng, shape);
}

}  // namespace gedp
