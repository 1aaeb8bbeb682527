#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace spde {

/// Uniform grid on (0,1) or (0,1)^2 with zero Dirichlet data.
///
/// Only interior points are stored: xi_i = (i+1)*h, i = 0..n-1, h = 1/(n+1).
/// n + 1 must be a power of two so the sine transforms run at full speed and
/// h is exactly representable.
class Grid {
public:
    Grid(int dim, std::size_t n);

    int dim() const noexcept { return dim_; }
    std::size_t n() const noexcept { return n_; }
    std::size_t size() const noexcept { return dim_ == 1 ? n_ : n_ * n_; }
    double h() const noexcept { return h_; }
    /// Weight of one grid cell in the quadrature h^dim * sum_i.
    double cell_volume() const noexcept { return dim_ == 1 ? h_ : h_ * h_; }
    double coord(std::size_t i) const noexcept { return static_cast<double>(i + 1) * h_; }

    bool operator==(const Grid&) const = default;

private:
    int dim_;
    std::size_t n_;
    double h_;
};

class SpectralBasis;

/// Scalar grid function on the interior points, row-major in 2-D.
///
/// May carry the complete set of orthonormal sine coefficients. Any mutation
/// through the non-const interface drops that cache.
class Field {
public:
    explicit Field(const Grid& grid);
    Field(const Grid& grid, std::vector<double> values);

    static Field sample(const Grid& grid, const std::function<double(double)>& f);
    static Field sample(const Grid& grid, const std::function<double(double, double)>& f);

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> mutable_values() noexcept {
        spectral_.reset();
        return values_;
    }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    const std::optional<std::vector<double>>& spectral_cache() const noexcept { return spectral_; }
    void cache_spectral(const SpectralBasis& basis);

    Field& operator+=(const Field& other);
    Field& operator-=(const Field& other);
    Field& operator*=(double a);
    /// this += a * x
    Field& axpy(double a, const Field& x);

    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(double a, Field x) { return x *= a; }
    friend Field operator-(Field x) { return x *= -1.0; }

private:
    void require_same_grid(const Field& other) const;

    Grid grid_;
    std::vector<double> values_;
    std::optional<std::vector<double>> spectral_;
};

/// Exact eigenbasis of the discrete Dirichlet Laplacian plus fast sine transforms.
///
/// Two coefficient layouts exist. The *full* layout holds all n^dim discrete
/// modes in transform order and is what the H^{-1} calculus uses. The
/// *retained* set holds the K (1-D) or K^2 (2-D, tensorised) lowest modes,
/// sorted by eigenvalue; it is the basis handed to users and to the noise.
///
/// Immutable after construction and safe to share between threads.
class SpectralBasis {
public:
    SpectralBasis(const Grid& grid, std::size_t modes_per_axis);

    const Grid& grid() const noexcept { return grid_; }
    std::size_t modes_per_axis() const noexcept { return k_axis_; }
    /// Number of retained modes.
    std::size_t size() const noexcept { return retained_.size(); }

    /// Discrete eigenvalue of retained mode k (0-based, ascending).
    double eigenvalue(std::size_t k) const { return retained_lambda_.at(k); }
    std::span<const double> eigenvalues() const noexcept { return retained_lambda_; }
    /// Continuum value sum of (j pi)^2 over the wave numbers of retained mode k.
    double continuum_eigenvalue(std::size_t k) const;
    /// 1-based wave numbers of retained mode k; second entry is 0 in 1-D.
    std::array<std::size_t, 2> wave_numbers(std::size_t k) const;
    /// Position of retained mode k in the full coefficient layout.
    std::size_t full_index(std::size_t k) const { return retained_.at(k); }
    /// e_k sampled on the grid.
    std::vector<double> mode(std::size_t k) const;

    std::span<const double> full_eigenvalues() const noexcept { return full_lambda_; }
    /// Orthonormal coefficients c_k = h^dim * sum_i x_i e_k(xi_i) in full layout.
    void forward(std::span<const double> values, std::span<double> coeffs) const;
    /// x_i = sum_k c_k e_k(xi_i) from full-layout coefficients.
    void inverse(std::span<const double> coeffs, std::span<double> values) const;

    /// (4/h^2) sin^2(k pi h / 2), i.e. (2/h^2)(1 - cos(k pi h)), for 1-based k.
    static double discrete_eigenvalue_1d(std::size_t k, double h);

private:
    struct Plan;

    Grid grid_;
    std::size_t k_axis_;
    std::vector<double> full_lambda_;
    std::vector<std::size_t> retained_;
    std::vector<double> retained_lambda_;
    std::vector<double> axis_modes_;  // k_axis_ x n samples of the 1-D modes
    std::shared_ptr<const Plan> plan_;
};

/// Second-order central difference with zero ghost values.
Field laplacian_apply(const Field& x);
void laplacian_apply(const Grid& grid, std::span<const double> x, std::span<double> out);

/// Retained-mode coefficients (length basis.size()).
std::vector<double> to_spectral(const SpectralBasis& basis, const Field& x);
/// Field from retained-mode coefficients; missing modes are zero.
Field from_spectral(const SpectralBasis& basis, std::span<const double> coeffs);

/// Full-layout coefficients, reusing the field's cache when present.
std::vector<double> full_spectral(const SpectralBasis& basis, const Field& x);

}  // namespace spde
