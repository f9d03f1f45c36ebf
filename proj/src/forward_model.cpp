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

#include "mbdl/forward_model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace mbdl {

namespace {

inline double factor_nll(double y, double mu) {
    const double p = 1.0 - std::abs(y - mu);
    return -std::log(p > kLikelihoodEps ? p : kLikelihoodEps);
}

inline int wrap(int v, int n) {
    v %= n;
    return v < 0 ? v + n : v;
}

inline double unit_double(u64 bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

} // namespace

LowPassFilter build_filter(double variance, int size) {
    if (size < 1 || size % 2 == 0)
        throw std::invalid_argument("build_filter: size must be odd and >= 1");
    if (!(variance > 0.0))
        throw std::invalid_argument("build_filter: variance must be positive");

    LowPassFilter f;
    f.size = size;
    f.variance = variance;
    f.weights.resize(static_cast<usize>(size) * size);
    const int rad = size / 2;
    double sum = 0.0;
    for (int dr = -rad; dr <= rad; ++dr) {
        for (int dc = -rad; dc <= rad; ++dc) {
            const double wgt = std::exp(-(dr * dr + dc * dc) / (2.0 * variance));
            f.weights[static_cast<usize>(dr + rad) * size + (dc + rad)] = wgt;
            sum += wgt;
        }
    }
    for (double& wgt : f.weights) wgt /= sum;

    // Nudge the center weight until the raster-order sum is exactly 1.0, so
    // that convolving an all-foreground image yields exactly 1.0.
    const usize center = static_cast<usize>(rad) * size + rad;
    for (int pass = 0; pass < 8; ++pass) {
        double s = 0.0;
        for (double wgt : f.weights) s += wgt;
        if (s == 1.0) break;
        f.weights[center] += 1.0 - s;
    }
    return f;
}

GrayImage apply_filter(const BinaryImage& x, const LowPassFilter& f) {
    const int w = x.width(), h = x.height();
    const int rad = f.radius();
    GrayImage out{w, h, std::vector<double>(static_cast<usize>(w) * h)};
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int dr = -rad; dr <= rad; ++dr) {
                const int rr = wrap(r + dr, h);
                for (int dc = -rad; dc <= rad; ++dc) {
                    if (x.at(rr, wrap(c + dc, w)))
                        acc += f.weight(dr, dc);
                }
            }
            out.at(r, c) = acc < 0.0 ? 0.0 : (acc > 1.0 ? 1.0 : acc);
        }
    }
    return out;
}

double neg_log_likelihood(const BinaryImage& y, const BinaryImage& x,
                          const LowPassFilter& f) {
    if (y.width() != x.width() || y.height() != x.height())
        throw std::invalid_argument("neg_log_likelihood: dimension mismatch");
    const GrayImage mu = apply_filter(x, f);
    double total = 0.0;
    for (int r = 0; r < y.height(); ++r)
        for (int c = 0; c < y.width(); ++c)
            total += factor_nll(y.at(r, c), mu.at(r, c));
    return total;
}

namespace {

// Distinct wrapped footprint cells of a flip at (row, col) with their summed
// weights. Wrapping can alias several kernel taps onto one cell when the
// image is smaller than the kernel; the matrix entry A[k,u] is the alias sum.
struct FootprintCell {
    int r, c;
    double weight;
};

std::vector<FootprintCell> flip_footprint(const LowPassFilter& f, int row, int col,
                                          int w, int h) {
    const int rad = f.radius();
    std::vector<FootprintCell> cells;
    cells.reserve(static_cast<usize>(f.size) * f.size);
    for (int dr = -rad; dr <= rad; ++dr) {
        const int rr = wrap(row + dr, h);
        for (int dc = -rad; dc <= rad; ++dc) {
            const int cc = wrap(col + dc, w);
            const double wgt = f.weight(dr, dc);
            bool merged = false;
            for (FootprintCell& cell : cells) {
                if (cell.r == rr && cell.c == cc) {
                    cell.weight += wgt;
                    merged = true;
                    break;
                }
            }
            if (!merged) cells.push_back({rr, cc, wgt});
        }
    }
    return cells;
}

} // namespace

double delta_likelihood_cached(const BinaryImage& y, const BinaryImage& x,
                               const GrayImage& mu, const LowPassFilter& f,
                               int row, int col) {
    if (!x.in_bounds(row, col))
        throw std::invalid_argument("delta_likelihood: pixel out of bounds");
    // Only the rows of A whose u-th element is nonzero change.
    const double sign = x.at(row, col) ? -1.0 : 1.0;
    double delta = 0.0;
    for (const FootprintCell& cell : flip_footprint(f, row, col, x.width(), x.height())) {
        const double before = mu.at(cell.r, cell.c);
        const double after = before + sign * cell.weight;
        const double yv = y.at(cell.r, cell.c);
        delta += factor_nll(yv, after) - factor_nll(yv, before);
    }
    return delta;
}

double delta_likelihood(const BinaryImage& y, const BinaryImage& x,
                        const LowPassFilter& f, int row, int col) {
    if (!x.in_bounds(row, col))
        throw std::invalid_argument("delta_likelihood: pixel out of bounds");
    const int w = x.width(), h = x.height();
    const int rad = f.radius();
    const double sign = x.at(row, col) ? -1.0 : 1.0;
    double delta = 0.0;
    for (const FootprintCell& cell : flip_footprint(f, row, col, w, h)) {
        double mu = 0.0;
        for (int kr = -rad; kr <= rad; ++kr)
            for (int kc = -rad; kc <= rad; ++kc)
                if (x.at(wrap(cell.r + kr, h), wrap(cell.c + kc, w)))
                    mu += f.weight(kr, kc);
        mu = mu > 1.0 ? 1.0 : mu;
        const double after = mu + sign * cell.weight;
        const double yv = y.at(cell.r, cell.c);
        delta += factor_nll(yv, after) - factor_nll(yv, mu);
    }
    return delta;
}

void update_mu_for_flip(GrayImage& mu, const LowPassFilter& f, int row, int col,
                        u8 new_value) {
    const double sign = new_value ? 1.0 : -1.0;
    for (const FootprintCell& cell : flip_footprint(f, row, col, mu.width, mu.height))
        mu.at(cell.r, cell.c) += sign * cell.weight;
}

BinaryImage synthesize_noisy(const BinaryImage& x, const LowPassFilter& f, u64 seed) {
    const GrayImage mu = apply_filter(x, f);
    BinaryImage y(x.width(), x.height());
    std::mt19937_64 rng(seed);
    for (int r = 0; r < x.height(); ++r)
        for (int c = 0; c < x.width(); ++c)
            y.set(r, c, unit_double(rng()) < mu.at(r, c) ? 1 : 0);
    return y;
}

FlipExpectation expected_flips(const BinaryImage& x, const LowPassFilter& f) {
    const GrayImage mu = apply_filter(x, f);
    FlipExpectation e;
    double var = 0.0;
    for (double m : mu.values) {
        const double q = m < 1.0 - m ? m : 1.0 - m;
        e.mean += q;
        var += q * (1.0 - q);
    }
    e.stddev = std::sqrt(var);
    return e;
}

} // namespace mbdl
