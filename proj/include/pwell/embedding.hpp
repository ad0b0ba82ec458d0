#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pwell/grid.hpp"
#include "pwell/random_fields.hpp"

namespace pwell {

// Estimate of the embedding constant C* = sup ||u||_gamma / ||grad u|| by
// projected gradient ascent from several starts (first eigenmodes plus random
// smooth fields). The result is a certified lower bound of the discrete sup.
//
// The continuum restriction 2 < gamma < 2n/(n-2) is vacuous in 1D/2D; any
// gamma >= 2 is accepted here (gamma = 2 recovers the Rayleigh quotient).
inline double embedding_constant(const Grid& g, double gamma, int starts = 8,
                                 double stat_tol = 1e-8, int max_iter = 20000,
                                 std::uint64_t seed = 0) {
    if (gamma < 2.0) throw std::invalid_argument("embedding_constant: gamma must be >= 2");
    if (starts < 1) throw std::invalid_argument("embedding_constant: need at least one start");

    const int n = g.node_count();
    const double w = g.node_weight();

    auto ratio = [&](const Field& u) {
        const double num = std::pow(lgamma_norm_pow(g, u, gamma), 1.0 / gamma);
        const double den = std::sqrt(grad_norm_sq(g, u));
        return num / den;
    };

    auto ascend = [&](Field u) {
        // Maximize log||u||_gamma - (1/2) log||grad u||^2, rescaling to
        // ||grad u|| = 1 after every step.
        double gsq = grad_norm_sq(g, u);
        if (gsq <= 0.0) return 0.0;
        const double scale0 = 1.0 / std::sqrt(gsq);
        for (int i = 0; i < n; ++i) u[i] *= scale0;

        double best = ratio(u);
        double step = 0.1;
        for (int it = 0; it < max_iter; ++it) {
            const double ngam = lgamma_norm_pow(g, u, gamma);
            const Field lap = apply_laplacian(g, u);
            const double G = grad_norm_sq(g, u); // ~1 by rescaling
            // gradient of the log-objective
            std::vector<double> grad(n);
            double gnorm = 0.0;
            for (int i = 0; i < n; ++i) {
                const double a = std::abs(u[i]);
                const double sg = u[i] > 0 ? 1.0 : (u[i] < 0 ? -1.0 : 0.0);
                grad[i] = w * std::pow(a, gamma - 1.0) * sg / ngam - w * (-lap[i]) / G;
                gnorm += grad[i] * grad[i];
            }
            gnorm = std::sqrt(gnorm);
            if (gnorm < stat_tol * w) break;

            bool improved = false;
            while (step > 1e-14) {
                Field trial = u;
                for (int i = 0; i < n; ++i) trial[i] += step * grad[i] / (w);
                const double tg = grad_norm_sq(g, trial);
                if (tg > 0.0) {
                    const double s = 1.0 / std::sqrt(tg);
                    for (int i = 0; i < n; ++i) trial[i] *= s;
                    const double r = ratio(trial);
                    if (r > best) {
                        u = std::move(trial);
                        best = r;
                        improved = true;
                        step *= 1.5;
                        break;
                    }
                }
                step *= 0.5;
            }
            if (!improved) break;
            if (!std::isfinite(best))
                throw std::runtime_error("embedding_constant: ascent diverged");
        }
        return best;
    };

    double best = 0.0;
    int used = 0;
    for (int k = 1; used < starts && k <= std::max(1, starts / 2); ++k, ++used)
        best = std::max(best, ascend(eigenmode(g, k, k)));
    auto rng = make_stream(seed, SeedPurpose::EmbeddingStarts);
    while (used < starts) {
        best = std::max(best, ascend(random_smooth_field(g, rng)));
        ++used;
    }
    if (best <= 0.0) throw std::runtime_error("embedding_constant: all starts degenerate");
    return best;
}

} // namespace pwell
