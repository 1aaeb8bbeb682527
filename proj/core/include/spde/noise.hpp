#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "spde/geometry.hpp"

namespace spde {

/// Multiplicative spectral noise sigma(X) dW = sum_k mu_k X e_k dB_k.
///
/// Mode k of the noise is retained basis mode k; K_noise must not exceed the
/// basis size. The sampled modes are copied in so applying sigma needs no basis.
class NoiseModel {
public:
    NoiseModel(const SpectralBasis& basis, std::vector<double> mu, std::uint64_t seed);

    std::size_t size() const noexcept { return mu_.size(); }
    std::span<const double> mu() const noexcept { return mu_; }
    std::uint64_t seed() const noexcept { return seed_; }
    const Grid& grid() const noexcept { return grid_; }
    std::span<const double> mode(std::size_t k) const;
    std::span<const double> eigenvalues() const noexcept { return lambda_; }

    /// C = sum_k mu_k^2 lambda_k^2 over the retained noise modes.
    double summability_constant() const noexcept { return c_; }

    /// Decay parameters when built by default_mu; NaN otherwise.
    double mubar() const noexcept { return mubar_; }
    double decay() const noexcept { return decay_; }
    /// Share of the power-law series beyond K_noise, summed up to the grid
    /// resolution: tail / (C + tail). NaN for hand-specified mu.
    double tail_fraction() const noexcept { return tail_fraction_; }
    /// False when the decay is too slow for the series to converge in the
    /// continuum limit (s <= 5/4 in 1-D, s <= 3/2 in 2-D).
    bool summable() const noexcept { return summable_; }
    const std::string& warning() const noexcept { return warning_; }

private:
    friend NoiseModel default_mu(const SpectralBasis&, double, double, std::size_t, std::uint64_t);

    Grid grid_;
    std::vector<double> mu_;
    std::vector<double> lambda_;
    std::vector<double> modes_;  // size() x grid.size()
    std::uint64_t seed_;
    double c_ = 0.0;
    double mubar_;
    double decay_;
    double tail_fraction_;
    bool summable_ = true;
    std::string warning_;
};

/// mu_k = mubar * lambda_k^{-s} for the first k_noise retained modes.
NoiseModel default_mu(const SpectralBasis& basis, double mubar, double s, std::size_t k_noise, std::uint64_t seed);

/// Standard-normal draws for (seed, path, step), one per noise mode, from
/// counter-based substreams: the value depends only on those keys.
void standard_normals(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::span<double> out);

/// Brownian increments for one step: sqrt(dt) * standard_normals(...).
void brownian_increments(const NoiseModel& nm, std::uint64_t path, std::uint64_t step, double dt,
                         std::span<double> out);

/// Materialised increments of one path, step-major (n_steps x k_noise).
struct NoisePath {
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;
    double dt = 0.0;
    std::uint64_t n_steps = 0;
    std::uint64_t k_noise = 0;
    std::vector<double> increments;

    std::span<const double> step(std::size_t n) const {
        return std::span<const double>(increments).subspan(n * k_noise, k_noise);
    }
    bool operator==(const NoisePath&) const = default;
};

NoisePath generate_path(const NoiseModel& nm, std::uint64_t path_index, double dt, std::uint64_t n_steps);

/// Binary layout, all little-endian:
///   char[8] "SPDENOIS", u32 version (=1), u32 reserved (=0),
///   u64 seed, u64 path_index, f64 dt, u64 n_steps, u64 k_noise,
///   f64 increments[n_steps * k_noise] (step-major).
void write_noise_path(const std::filesystem::path& file, const NoisePath& path);
NoisePath read_noise_path(const std::filesystem::path& file);

/// sum_k mu_k dW_k X e_k, pointwise.
Field apply_sigma(const Field& x, std::span<const double> dw, const NoiseModel& nm);
void apply_sigma(std::span<const double> x, std::span<const double> dw, const NoiseModel& nm, std::span<double> out);

/// Hilbert-Schmidt norm of sigma(X) into H^{-1}: sum_k mu_k^2 |X e_k|_{-1}^2.
double hs_norm_sq(const Field& x, const NoiseModel& nm, const SpectralBasis& basis);

}  // namespace spde
