#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "spde/geometry.hpp"

namespace spde {

/// Norms of one field; `lp` is keyed by exponent.
struct HNorms {
    double hminus = 0.0;
    double l2 = 0.0;
    std::map<double, double> lp;
};

/// y with -Delta_h y = x, solved mode by mode.
Field inverse_laplacian(const SpectralBasis& basis, const Field& x);

/// <x, z>_{-1} = sum_k x_k z_k / lambda_k over the full discrete spectrum.
double hminus_inner(const SpectralBasis& basis, const Field& x, const Field& z);
double hminus_norm_sq(const SpectralBasis& basis, const Field& x);
double hminus_norm(const SpectralBasis& basis, const Field& x);

// Span variants for inner loops that do not want Field temporaries.
double hminus_norm_sq(const SpectralBasis& basis, std::span<const double> x);
double hminus_inner(const SpectralBasis& basis, std::span<const double> x, std::span<const double> z);
void inverse_laplacian(const SpectralBasis& basis, std::span<const double> x, std::span<double> out);

/// (h^dim sum_i |x_i|^p)^(1/p); p = infinity gives max |x_i|.
/// Quadrature is over interior points only, so a constant 1 has norm (1-h)^(dim/p).
double lp_norm(const Field& x, double p);
/// h^dim sum_i |x_i|^p, without the root. p must be finite.
double lp_pow(std::span<const double> x, double cell_volume, double p);

HNorms norms(const SpectralBasis& basis, const Field& x, std::span<const double> exponents);

struct MultiplierBound {
    std::size_t mode = 0;   ///< retained mode index
    double norm = 0.0;      ///< sup |x e_k|_{-1} / |x|_{-1}
    double lambda = 0.0;    ///< discrete eigenvalue of the mode
    std::size_t iterations = 0;
    bool converged = false;
};

struct MultiplierOptions {
    std::size_t max_iterations = 20000;
    double tolerance = 1e-13;  ///< relative change of the Rayleigh quotient
};

/// Operator norm of x -> x*e_k on discrete H^{-1}, by power iteration on the
/// pencil (M_k^T S M_k, S) with S = (-Delta_h)^{-1}.
MultiplierBound multiplier_hminus_bound(const SpectralBasis& basis, std::size_t k,
                                        const MultiplierOptions& opts = {});

struct C1Measurement {
    double c1 = 0.0;  ///< max_k (|M_k| / lambda_k)^2
    std::vector<MultiplierBound> per_mode;
};

/// Measures the constant c1 in |x e_k|_{-1}^2 <= c1 lambda_k^2 |x|_{-1}^2 for k < kmax.
C1Measurement measure_c1(const SpectralBasis& basis, std::size_t kmax, const MultiplierOptions& opts = {});

}  // namespace spde
