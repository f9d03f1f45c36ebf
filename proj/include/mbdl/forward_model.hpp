// Copyright 2026 The mbdl Authors
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

#ifndef MBDL_FORWARD_MODEL_HPP
#define MBDL_FORWARD_MODEL_HPP

#include <vector>

#include "mbdl/binary_image.hpp"

namespace mbdl {

/// Probability floor for the per-pixel likelihood factor 1 - |y - mu|.
/// Zero factors would make the cost infinite and freeze pixels irrecoverably.
inline constexpr double kLikelihoodEps = 1e-6;

/// Isotropic Gaussian stencil with unit sum. Applied with wrap-around
/// boundaries, so the implied filter matrix is circulant and leaves total
/// energy unchanged.
struct LowPassFilter {
    int size = 1;             ///< odd
    double variance = 0.0;    ///< sigma^2 of the sampled Gaussian
    std::vector<double> weights;  ///< size*size, row-major, sums to exactly 1.0

    int radius() const { return size / 2; }
    double weight(int dr, int dc) const {
        return weights[static_cast<usize>(dr + radius()) * size + (dc + radius())];
    }
};

LowPassFilter build_filter(double variance, int size);

/// Per-pixel reals in [0,1]; holds the intermediate image mu.
struct GrayImage {
    int width = 0, height = 0;
    std::vector<double> values;

    double at(int r, int c) const {
        return values[static_cast<usize>(r) * width + c];
    }
    double& at(int r, int c) {
        return values[static_cast<usize>(r) * width + c];
    }
};

/// mu = A x with circulant (wrap-around) boundaries.
GrayImage apply_filter(const BinaryImage& x, const LowPassFilter& f);

/// -sum_k ln max(1 - |y_k - mu_k|, eps), in nats.
double neg_log_likelihood(const BinaryImage& y, const BinaryImage& x,
                          const LowPassFilter& f);

/// Likelihood change (nats) caused by flipping x at (row, col), touching only
/// the kernel-support neighborhood. mu must equal apply_filter(x, f).
double delta_likelihood_cached(const BinaryImage& y, const BinaryImage& x,
                               const GrayImage& mu, const LowPassFilter& f,
                               int row, int col);

/// Same, recomputing mu locally; the convenience form for callers without a
/// cached mu.
double delta_likelihood(const BinaryImage& y, const BinaryImage& x,
                        const LowPassFilter& f, int row, int col);

/// Adds/removes the kernel footprint of a committed flip to a cached mu.
void update_mu_for_flip(GrayImage& mu, const LowPassFilter& f, int row, int col,
                        u8 new_value);

/// Draws y_k ~ Bernoulli(mu_k) independently; deterministic for a fixed seed.
BinaryImage synthesize_noisy(const BinaryImage& x, const LowPassFilter& f, u64 seed);

/// Expected flip count sum_k min(mu_k, 1-mu_k) and its standard deviation,
/// for validating the noise channel.
struct FlipExpectation {
    double mean = 0.0;
    double stddev = 0.0;
};
FlipExpectation expected_flips(const BinaryImage& x, const LowPassFilter& f);

} // namespace mbdl

#endif // MBDL_FORWARD_MODEL_HPP
