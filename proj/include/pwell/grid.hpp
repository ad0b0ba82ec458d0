#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pwell {

// Uniform interior-node discretization of an interval (0,L) or rectangle
// (0,Lx)x(0,Ly) with homogeneous Dirichlet data. Fields store interior nodes
// only; the boundary is identically zero by construction.
struct Grid {
    int dim = 1;
    double Lx = 0.0, Ly = 0.0;
    int nx = 0, ny = 0;
    double hx = 0.0, hy = 0.0;

    static Grid interval(double L, int n) {
        if (L <= 0.0) throw std::invalid_argument("Grid: extent must be positive");
        if (n < 3) throw std::invalid_argument("Grid: need at least 3 interior nodes per axis");
        Grid g;
        g.dim = 1;
        g.Lx = L;
        g.nx = n;
        g.hx = L / (n + 1);
        return g;
    }

    static Grid rectangle(double Lx, double Ly, int nx, int ny) {
        if (Lx <= 0.0 || Ly <= 0.0) throw std::invalid_argument("Grid: extents must be positive");
        if (nx < 3 || ny < 3) throw std::invalid_argument("Grid: need at least 3 interior nodes per axis");
        Grid g;
        g.dim = 2;
        g.Lx = Lx;
        g.Ly = Ly;
        g.nx = nx;
        g.ny = ny;
        g.hx = Lx / (nx + 1);
        g.hy = Ly / (ny + 1);
        return g;
    }

    int node_count() const { return dim == 1 ? nx : nx * ny; }
    double node_weight() const { return dim == 1 ? hx : hx * hy; }
    double measure() const { return dim == 1 ? Lx : Lx * Ly; }

    double x(int i) const { return (i + 1) * hx; }
    double y(int j) const { return (j + 1) * hy; }
    int idx(int i, int j) const { return i + nx * j; }
};

struct Field {
    std::vector<double> v;

    Field() = default;
    explicit Field(const Grid& g) : v(static_cast<std::size_t>(g.node_count()), 0.0) {}
    explicit Field(std::vector<double> values) : v(std::move(values)) {}

    std::size_t size() const { return v.size(); }
    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }

    bool all_finite() const {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }

    double max_abs() const {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }

    static Field sample(const Grid& g, const std::function<double(double)>& f) {
        Field u(g);
        for (int i = 0; i < g.nx; ++i) u.v[i] = f(g.x(i));
        return u;
    }

    static Field sample2d(const Grid& g, const std::function<double(double, double)>& f) {
        Field u(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) u.v[g.idx(i, j)] = f(g.x(i), g.y(j));
        return u;
    }
};

inline void check_match(const Grid& g, const Field& u, const char* what) {
    if (u.size() != static_cast<std::size_t>(g.node_count()))
        throw std::invalid_argument(std::string(what) + ": field size does not match grid");
}

// Second-order 3-point/5-point Dirichlet stencil. Boundary values are zero.
inline Field apply_laplacian(const Grid& g, const Field& u) {
    check_match(g, u, "apply_laplacian");
    Field out(g);
    if (g.dim == 1) {
        const double ih2 = 1.0 / (g.hx * g.hx);
        const int n = g.nx;
        for (int i = 0; i < n; ++i) {
            const double left = i > 0 ? u[i - 1] : 0.0;
            const double right = i + 1 < n ? u[i + 1] : 0.0;
            out[i] = (left - 2.0 * u[i] + right) * ih2;
        }
    } else {
        const double ihx2 = 1.0 / (g.hx * g.hx);
        const double ihy2 = 1.0 / (g.hy * g.hy);
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                const double c = u[g.idx(i, j)];
                const double l = i > 0 ? u[g.idx(i - 1, j)] : 0.0;
                const double r = i + 1 < g.nx ? u[g.idx(i + 1, j)] : 0.0;
                const double b = j > 0 ? u[g.idx(i, j - 1)] : 0.0;
                const double t = j + 1 < g.ny ? u[g.idx(i, j + 1)] : 0.0;
                out[g.idx(i, j)] = (l - 2.0 * c + r) * ihx2 + (b - 2.0 * c + t) * ihy2;
            }
        }
    }
    return out;
}

// Quadrature-weighted inner product. Weights are h (1D) or hx*hy (2D) per
// interior node; trapezoid-consistent since fields vanish on the boundary.
inline double inner(const Grid& g, const Field& u, const Field& v) {
    check_match(g, u, "inner");
    check_match(g, v, "inner");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s * g.node_weight();
}

inline double integrate(const Grid& g, const Field& u) {
    check_match(g, u, "integrate");
    double s = 0.0;
    for (double x : u.v) s += x;
    return s * g.node_weight();
}

inline double l2_norm_sq(const Grid& g, const Field& u) { return inner(g, u, u); }

// ||grad u||^2 := <-Lap u, u>, so discrete integration by parts is exact and
// I(u), J(u) stay mutually consistent.
inline double grad_norm_sq(const Grid& g, const Field& u) {
    Field lap = apply_laplacian(g, u);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s -= lap[i] * u[i];
    return s * g.node_weight();
}

inline double lgamma_norm_pow(const Grid& g, const Field& u, double gamma) {
    if (gamma < 1.0) throw std::invalid_argument("lgamma_norm_pow: gamma must be >= 1");
    check_match(g, u, "lgamma_norm_pow");
    double s = 0.0;
    for (double x : u.v) s += std::pow(std::abs(x), gamma);
    return s * g.node_weight();
}

// Closed-form smallest eigenvalue of the discrete -Laplacian on this grid.
inline double lambda1_discrete_exact(const Grid& g) {
    const double pi = 3.14159265358979323846;
    double l = 2.0 / (g.hx * g.hx) * (1.0 - std::cos(pi * g.hx / g.Lx));
    if (g.dim == 2) l += 2.0 / (g.hy * g.hy) * (1.0 - std::cos(pi * g.hy / g.Ly));
    return l;
}

// Exact discrete eigenmode sin(k*pi*x/L) (and tensor products in 2D).
inline Field eigenmode(const Grid& g, int kx, int ky = 1) {
    const double pi = 3.14159265358979323846;
    if (g.dim == 1)
        return Field::sample(g, [&](double x) { return std::sin(kx * pi * x / g.Lx); });
    return Field::sample2d(g, [&](double x, double y) {
        return std::sin(kx * pi * x / g.Lx) * std::sin(ky * pi * y / g.Ly);
    });
}

namespace detail {

// Thomas algorithm for the 1D stencil (-Lap) x = b.
inline std::vector<double> solve_neg_laplacian_1d(const Grid& g, const std::vector<double>& b) {
    const int n = g.nx;
    const double ih2 = 1.0 / (g.hx * g.hx);
    const double diag = 2.0 * ih2, off = -ih2;
    std::vector<double> c(n), d(n), x(n);
    c[0] = off / diag;
    d[0] = b[0] / diag;
    for (int i = 1; i < n; ++i) {
        const double m = diag - off * c[i - 1];
        c[i] = off / m;
        d[i] = (b[i] - off * d[i - 1]) / m;
    }
    x[n - 1] = d[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

// Conjugate gradient for (-Lap) x = b; the stencil is SPD.
inline std::vector<double> solve_neg_laplacian_cg(const Grid& g, const std::vector<double>& b,
                                                  double tol = 1e-13) {
    const int n = g.node_count();
    Field x(g), r(g), p(g);
    for (int i = 0; i < n; ++i) r[i] = b[i];
    p = r;
    double rs = 0.0;
    for (int i = 0; i < n; ++i) rs += r[i] * r[i];
    const double rs0 = rs;
    for (int it = 0; it < 20 * n && rs > tol * tol * rs0; ++it) {
        Field ap = apply_laplacian(g, p);
        double pap = 0.0;
        for (int i = 0; i < n; ++i) pap += -ap[i] * p[i];
        const double alpha = rs / pap;
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * (-ap[i]);
        }
        double rs_new = 0.0;
        for (int i = 0; i < n; ++i) rs_new += r[i] * r[i];
        for (int i = 0; i < n; ++i) p[i] = r[i] + (rs_new / rs) * p[i];
        rs = rs_new;
    }
    return x.v;
}

} // namespace detail

// Smallest eigenvalue of the discrete -Laplacian by inverse power iteration.
// Deterministic all-ones start.
inline double lambda1(const Grid& g, double rel_tol = 1e-10, int max_iter = 1000) {
    const int n = g.node_count();
    std::vector<double> x(n, 1.0);
    double lam_prev = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        std::vector<double> y = g.dim == 1 ? detail::solve_neg_laplacian_1d(g, x)
                                           : detail::solve_neg_laplacian_cg(g, x);
        double ynorm = 0.0;
        for (double v : y) ynorm += v * v;
        ynorm = std::sqrt(ynorm);
        for (double& v : y) v /= ynorm;
        Field yf(y);
        const double lam = grad_norm_sq(g, yf) / l2_norm_sq(g, yf);
        x = std::move(y);
        if (it > 0 && std::abs(lam - lam_prev) <= rel_tol * std::abs(lam)) return lam;
        lam_prev = lam;
    }
    throw std::runtime_error("lambda1: inverse power iteration did not converge after " +
                             std::to_string(max_iter) + " iterations");
}

} // namespace pwell
