#include "spde/hminus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spde/error.hpp"

namespace spde {

namespace {

void require_grid(const SpectralBasis& basis, const Field& x) {
    if (!(basis.grid() == x.grid())) throw ConfigError("basis and field live on different grids");
}

double weighted_sum(std::span<const double> a, std::span<const double> b, std::span<const double> lambda) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k] / lambda[k];
    return s;
}

}  // namespace

void inverse_laplacian(const SpectralBasis& basis, std::span<const double> x, std::span<double> out) {
    std::vector<double> c(x.size());
    basis.forward(x, c);
    const auto lambda = basis.full_eigenvalues();
    for (std::size_t k = 0; k < c.size(); ++k) c[k] /= lambda[k];
    basis.inverse(c, out);
}

Field inverse_laplacian(const SpectralBasis& basis, const Field& x) {
    require_grid(basis, x);
    std::vector<double> c = full_spectral(basis, x);
    const auto lambda = basis.full_eigenvalues();
    for (std::size_t k = 0; k < c.size(); ++k) c[k] /= lambda[k];
    Field out(x.grid());
    basis.inverse(c, out.mutable_values());
    return out;
}

double hminus_norm_sq(const SpectralBasis& basis, std::span<const double> x) {
    std::vector<double> c(x.size());
    basis.forward(x, c);
    return weighted_sum(c, c, basis.full_eigenvalues());
}

double hminus_inner(const SpectralBasis& basis, std::span<const double> x, std::span<const double> z) {
    std::vector<double> cx(x.size()), cz(z.size());
    basis.forward(x, cx);
    basis.forward(z, cz);
    return weighted_sum(cx, cz, basis.full_eigenvalues());
}

double hminus_inner(const SpectralBasis& basis, const Field& x, const Field& z) {
    require_grid(basis, x);
    require_grid(basis, z);
    const auto cx = full_spectral(basis, x);
    const auto cz = full_spectral(basis, z);
    return weighted_sum(cx, cz, basis.full_eigenvalues());
}

double hminus_norm_sq(const SpectralBasis& basis, const Field& x) {
    require_grid(basis, x);
    const auto c = full_spectral(basis, x);
    return weighted_sum(c, c, basis.full_eigenvalues());
}

double hminus_norm(const SpectralBasis& basis, const Field& x) { return std::sqrt(hminus_norm_sq(basis, x)); }

double lp_pow(std::span<const double> x, double cell_volume, double p) {
    if (!(p >= 1.0) || std::isinf(p)) throw DomainError("lp_pow needs finite p >= 1");
    double s = 0.0;
    if (p == 2.0) {
        for (double v : x) s += v * v;
    } else if (p == 4.0) {
        for (double v : x) s += (v * v) * (v * v);
    } else {
        for (double v : x) s += std::pow(std::abs(v), p);
    }
    return cell_volume * s;
}

double lp_norm(const Field& x, double p) {
    if (!(p >= 1.0)) throw DomainError("L^p norm needs p >= 1, got p = " + std::to_string(p));
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : x.values()) m = std::max(m, std::abs(v));
        return m;
    }
    return std::pow(lp_pow(x.values(), x.grid().cell_volume(), p), 1.0 / p);
}

HNorms norms(const SpectralBasis& basis, const Field& x, std::span<const double> exponents) {
    HNorms out;
    out.hminus = hminus_norm(basis, x);
    out.l2 = lp_norm(x, 2.0);
    for (double p : exponents) out.lp[p] = lp_norm(x, p);
    return out;
}

MultiplierBound multiplier_hminus_bound(const SpectralBasis& basis, std::size_t k, const MultiplierOptions& opts) {
    if (k >= basis.size()) throw ConfigError("multiplier mode index out of range");
    const Grid& grid = basis.grid();
    const std::size_t size = grid.size();
    const double vol = grid.cell_volume();
    const std::vector<double> ek = basis.mode(k);

    // Generalised Rayleigh quotient q(v) = |e_k v|_{-1}^2 / |v|_{-1}^2. The
    // iteration v <- -Delta_h (e_k S (e_k v)) is the power method for the
    // S-self-adjoint operator whose top eigenvalue is sup q.
    std::vector<double> v(size), w(size), s(size);
    for (std::size_t i = 0; i < size; ++i) {
        // Deterministic start with content in every mode.
        v[i] = 1.0 + 0.5 * std::sin(0.7 * static_cast<double>(i) + 0.3) + 0.25 * std::cos(2.9 * static_cast<double>(i));
    }

    MultiplierBound out;
    out.mode = k;
    out.lambda = basis.eigenvalue(k);
    double prev = 0.0;
    for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
        const double denom = hminus_norm_sq(basis, v);
        if (denom == 0.0) break;
        for (std::size_t i = 0; i < size; ++i) w[i] = ek[i] * v[i];
        inverse_laplacian(basis, w, s);  // S (e_k v)
        double numer = 0.0;
        for (std::size_t i = 0; i < size; ++i) numer += w[i] * s[i];
        numer *= vol;
        const double q = numer / denom;
        out.iterations = it;
        out.norm = std::sqrt(std::max(q, 0.0));
        if (it > 1 && std::abs(q - prev) <= opts.tolerance * std::abs(q)) {
            out.converged = true;
            break;
        }
        prev = q;
        for (std::size_t i = 0; i < size; ++i) s[i] *= ek[i];
        laplacian_apply(grid, s, w);
        const double scale = 1.0 / std::sqrt(hminus_norm_sq(basis, w));
        for (std::size_t i = 0; i < size; ++i) v[i] = -w[i] * scale;
    }
    return out;
}

C1Measurement measure_c1(const SpectralBasis& basis, std::size_t kmax, const MultiplierOptions& opts) {
    C1Measurement out;
    kmax = std::min(kmax, basis.size());
    for (std::size_t k = 0; k < kmax; ++k) {
        auto b = multiplier_hminus_bound(basis, k, opts);
        const double ratio = b.norm / b.lambda;
        out.c1 = std::max(out.c1, ratio * ratio);
        out.per_mode.push_back(b);
    }
    return out;
}

}  // namespace spde
