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

#ifndef GEDP_NUMERICS_H_
#define GEDP_NUMERICS_H_

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "absl/status/statusor.h"

namespace gedp {

// Reproducible random stream keyed by (seed, stream_id).
//
// The generator is xoshiro256** whose 256-bit state is derived from the key
// with SplitMix64, so two streams with the same key produce the same sequence
// regardless of which thread owns them. Distinct stream ids give statistically
// independent sequences; tasks that run in parallel should each own a stream
// whose id is derived from a canonical task index (trial, group, cell).
class RngStream {
 public:
  using result_type = uint64_t;

  RngStream(uint64_t seed, uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  // Uniform draw on the open interval (0, 1).
  double Uniform01();

  uint64_t seed() const { return seed_; }
  uint64_t stream_id() const { return stream_id_; }

 private:
  uint64_t seed_;
  uint64_t stream_id_;
  uint64_t state_[4];
};

// Standard normal cumulative distribution function. Saturates to 0 / 1 in the
// far tails.
double NormalCdf(double z);

// Inverse of NormalCdf for p in (0, 1). Wichura's AS 241 rational
// approximation followed by one Newton step against NormalCdf.
absl::StatusOr<double> NormalQuantile(double p);

// Returns NormalQuantile(1 - q) without forming 1 - q, so upper-tail
// quantiles stay accurate when q is tiny. Requires q in (0, 1).
absl::StatusOr<double> NormalUpperQuantile(double q);

absl::StatusOr<double> SampleNormal(RngStream& rng, double mean, double sd);

// Gamma with shape k and scale theta (mean k * theta). Marsaglia-Tsang for
// k >= 1; for k < 1 draws Gamma(k + 1) and multiplies by U^(1/k).
absl::StatusOr<double> SampleGamma(RngStream& rng, double shape, double scale);

// Dirichlet draw obtained by normalizing independent Gamma(b_i, 1) draws.
// The result is renormalized so that it sums to one.
absl::StatusOr<std::vector<double>> SampleDirichlet(
    RngStream& rng, std::span<const double> concentration);

// Inverse gamma IG(shape, scale): the reciprocal of a gamma draw with the same
// shape and rate equal to `scale`. Mean scale / (shape - 1). Only shape > 2 is
// accepted because the bias analyses need a finite variance.
absl::StatusOr<double> SampleInverseGamma(RngStream& rng, double shape,
                                          double scale);

namespace internal {

// Unchecked samplers for hot loops whose parameters were validated upstream.
double StandardNormal(RngStream& rng);
double StandardGamma(RngStream& rng, double shape);

}  // namespace internal

}  // namespace gedp

#endif  // GEDP_NUMERICS_H_
