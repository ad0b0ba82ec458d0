#pragma once

#include <cmath>
#include <random>

#include "pwell/grid.hpp"
#include "pwell/rng.hpp"

namespace pwell {

// Spectrally filtered noise: random combination of Dirichlet eigenmodes with
// 1/k^2 decay, so samples are smooth and vanish on the boundary.
inline Field random_smooth_field(const Grid& g, std::mt19937_64& rng, int max_mode = 12) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Field u(g);
    if (g.dim == 1) {
        for (int k = 1; k <= max_mode; ++k) {
            const double c = gauss(rng) / (k * k);
            const Field m = eigenmode(g, k);
            for (int i = 0; i < g.nx; ++i) u[i] += c * m[i];
        }
    } else {
        for (int kx = 1; kx <= max_mode; ++kx) {
            for (int ky = 1; ky <= max_mode; ++ky) {
                const double c = gauss(rng) / double(kx * kx + ky * ky);
                const Field m = eigenmode(g, kx, ky);
                for (int i = 0; i < g.node_count(); ++i) u[i] += c * m[i];
            }
        }
    }
    return u;
}

} // namespace pwell
