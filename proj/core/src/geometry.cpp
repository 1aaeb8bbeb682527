#include "spde/geometry.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>
#include <string>

#include "spde/error.hpp"

namespace spde {

namespace {

// FFTW's planner is not thread-safe; execution on new arrays is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::vector<double>& scratch(std::size_t n) {
    thread_local std::vector<double> buf;
    if (buf.size() < n) buf.resize(n);
    return buf;
}

}  // namespace

Grid::Grid(int dim, std::size_t n) : dim_(dim), n_(n), h_(0.0) {
    if (dim != 1 && dim != 2) {
        throw ConfigError("grid dimension must be 1 or 2, got " + std::to_string(dim));
    }
    if (n < 8) {
        throw ConfigError("grid needs at least 8 interior points per axis, got " + std::to_string(n));
    }
    if (!std::has_single_bit(n + 1)) {
        throw ConfigError("grid size n must be 2^j - 1, got " + std::to_string(n));
    }
    h_ = 1.0 / static_cast<double>(n + 1);
}

// ---------------------------------------------------------------------------
// Field

Field::Field(const Grid& grid) : grid_(grid), values_(grid.size(), 0.0) {}

Field::Field(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw ConfigError("field has " + std::to_string(values_.size()) + " values, grid expects " +
                          std::to_string(grid_.size()));
    }
}

Field Field::sample(const Grid& grid, const std::function<double(double)>& f) {
    if (grid.dim() != 1) throw ConfigError("1-D sampler used on a 2-D grid");
    Field out(grid);
    for (std::size_t i = 0; i < grid.n(); ++i) out.values_[i] = f(grid.coord(i));
    return out;
}

Field Field::sample(const Grid& grid, const std::function<double(double, double)>& f) {
    if (grid.dim() != 2) throw ConfigError("2-D sampler used on a 1-D grid");
    Field out(grid);
    const std::size_t n = grid.n();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) out.values_[i * n + j] = f(grid.coord(i), grid.coord(j));
    }
    return out;
}

void Field::cache_spectral(const SpectralBasis& basis) {
    if (!(basis.grid() == grid_)) throw ConfigError("basis and field live on different grids");
    std::vector<double> c(values_.size());
    basis.forward(values_, c);
    spectral_ = std::move(c);
}

void Field::require_same_grid(const Field& other) const {
    if (!(other.grid_ == grid_)) throw ConfigError("fields live on different grids");
}

Field& Field::operator+=(const Field& other) {
    require_same_grid(other);
    spectral_.reset();
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

Field& Field::operator-=(const Field& other) {
    require_same_grid(other);
    spectral_.reset();
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

Field& Field::operator*=(double a) {
    spectral_.reset();
    for (double& v : values_) v *= a;
    return *this;
}

Field& Field::axpy(double a, const Field& x) {
    require_same_grid(x);
    spectral_.reset();
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += a * x.values_[i];
    return *this;
}

// ---------------------------------------------------------------------------
// SpectralBasis

struct SpectralBasis::Plan {
    fftw_plan plan = nullptr;

    Plan(const Grid& grid) {
        const int n = static_cast<int>(grid.n());
        std::vector<double> in(grid.size()), out(grid.size());
        std::lock_guard lock(planner_mutex());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        if (grid.dim() == 1) {
            plan = fftw_plan_r2r_1d(n, in.data(), out.data(), FFTW_RODFT00, flags);
        } else {
            plan = fftw_plan_r2r_2d(n, n, in.data(), out.data(), FFTW_RODFT00, FFTW_RODFT00, flags);
        }
        if (plan == nullptr) throw ConfigError("could not create sine transform plan");
    }
    ~Plan() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;

    // RODFT00 is its own inverse up to a factor 2(n+1) per axis.
    void run(std::span<const double> in, std::span<double> out) const {
        auto& buf = scratch(in.size());
        std::copy(in.begin(), in.end(), buf.begin());
        fftw_execute_r2r(plan, buf.data(), out.data());
    }
};

double SpectralBasis::discrete_eigenvalue_1d(std::size_t k, double h) {
    const double s = std::sin(static_cast<double>(k) * std::numbers::pi * h / 2.0);
    return 4.0 / (h * h) * s * s;
}

SpectralBasis::SpectralBasis(const Grid& grid, std::size_t modes_per_axis)
    : grid_(grid), k_axis_(modes_per_axis) {
    const std::size_t n = grid.n();
    if (modes_per_axis == 0 || modes_per_axis > n) {
        throw ConfigError("basis needs 1 <= K <= n modes per axis, got K = " +
                          std::to_string(modes_per_axis) + " with n = " + std::to_string(n));
    }
    const double h = grid.h();
    std::vector<double> axis_lambda(n);
    for (std::size_t k = 0; k < n; ++k) axis_lambda[k] = discrete_eigenvalue_1d(k + 1, h);

    if (grid.dim() == 1) {
        full_lambda_ = axis_lambda;
        retained_.resize(k_axis_);
        std::iota(retained_.begin(), retained_.end(), std::size_t{0});
    } else {
        full_lambda_.resize(n * n);
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) full_lambda_[a * n + b] = axis_lambda[a] + axis_lambda[b];
        }
        for (std::size_t a = 0; a < k_axis_; ++a) {
            for (std::size_t b = 0; b < k_axis_; ++b) retained_.push_back(a * n + b);
        }
        std::stable_sort(retained_.begin(), retained_.end(), [&](std::size_t i, std::size_t j) {
            return full_lambda_[i] < full_lambda_[j];
        });
    }
    retained_lambda_.reserve(retained_.size());
    for (std::size_t idx : retained_) retained_lambda_.push_back(full_lambda_[idx]);

    axis_modes_.resize(k_axis_ * n);
    const double amp = std::numbers::sqrt2;
    for (std::size_t k = 0; k < k_axis_; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            // sin(k pi (i+1) / (n+1)) with the argument reduced exactly in integers.
            const std::size_t q = ((k + 1) * (i + 1)) % (2 * (n + 1));
            axis_modes_[k * n + i] = amp * std::sin(std::numbers::pi * static_cast<double>(q) * h);
        }
    }
    plan_ = std::make_shared<const Plan>(grid);
}

std::array<std::size_t, 2> SpectralBasis::wave_numbers(std::size_t k) const {
    const std::size_t idx = retained_.at(k);
    if (grid_.dim() == 1) return {idx + 1, 0};
    return {idx / grid_.n() + 1, idx % grid_.n() + 1};
}

double SpectralBasis::continuum_eigenvalue(std::size_t k) const {
    const auto [a, b] = wave_numbers(k);
    const double pa = static_cast<double>(a) * std::numbers::pi;
    const double pb = static_cast<double>(b) * std::numbers::pi;
    return pa * pa + pb * pb;
}

std::vector<double> SpectralBasis::mode(std::size_t k) const {
    const std::size_t n = grid_.n();
    const auto [a, b] = wave_numbers(k);
    std::vector<double> out(grid_.size());
    const double* ea = axis_modes_.data() + (a - 1) * n;
    if (grid_.dim() == 1) {
        std::copy(ea, ea + n, out.begin());
        return out;
    }
    const double* eb = axis_modes_.data() + (b - 1) * n;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] = ea[i] * eb[j];
    }
    return out;
}

void SpectralBasis::forward(std::span<const double> values, std::span<double> coeffs) const {
    if (values.size() != grid_.size() || coeffs.size() != grid_.size()) {
        throw ConfigError("sine transform size mismatch");
    }
    plan_->run(values, coeffs);
    const double scale = grid_.dim() == 1 ? grid_.h() / std::numbers::sqrt2 : grid_.h() * grid_.h() / 2.0;
    for (double& c : coeffs) c *= scale;
}

void SpectralBasis::inverse(std::span<const double> coeffs, std::span<double> values) const {
    if (values.size() != grid_.size() || coeffs.size() != grid_.size()) {
        throw ConfigError("sine transform size mismatch");
    }
    plan_->run(coeffs, values);
    const double scale = grid_.dim() == 1 ? 1.0 / std::numbers::sqrt2 : 0.5;
    for (double& v : values) v *= scale;
}

// ---------------------------------------------------------------------------

void laplacian_apply(const Grid& grid, std::span<const double> x, std::span<double> out) {
    const std::size_t n = grid.n();
    const double inv_h2 = 1.0 / (grid.h() * grid.h());
    if (grid.dim() == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            const double left = i > 0 ? x[i - 1] : 0.0;
            const double right = i + 1 < n ? x[i + 1] : 0.0;
            out[i] = (left - 2.0 * x[i] + right) * inv_h2;
        }
        return;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t c = i * n + j;
            const double up = i > 0 ? x[c - n] : 0.0;
            const double down = i + 1 < n ? x[c + n] : 0.0;
            const double left = j > 0 ? x[c - 1] : 0.0;
            const double right = j + 1 < n ? x[c + 1] : 0.0;
            out[c] = (up + down + left + right - 4.0 * x[c]) * inv_h2;
        }
    }
}

Field laplacian_apply(const Field& x) {
    Field out(x.grid());
    laplacian_apply(x.grid(), x.values(), out.mutable_values());
    return out;
}

std::vector<double> full_spectral(const SpectralBasis& basis, const Field& x) {
    if (!(basis.grid() == x.grid())) throw ConfigError("basis and field live on different grids");
    if (const auto& cache = x.spectral_cache()) return *cache;
    std::vector<double> c(x.size());
    basis.forward(x.values(), c);
    return c;
}

std::vector<double> to_spectral(const SpectralBasis& basis, const Field& x) {
    const std::vector<double> full = full_spectral(basis, x);
    std::vector<double> out(basis.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = full[basis.full_index(k)];
    return out;
}

Field from_spectral(const SpectralBasis& basis, std::span<const double> coeffs) {
    if (coeffs.size() > basis.size()) {
        throw ConfigError("more coefficients than retained modes");
    }
    std::vector<double> full(basis.grid().size(), 0.0);
    for (std::size_t k = 0; k < coeffs.size(); ++k) full[basis.full_index(k)] = coeffs[k];
    Field out(basis.grid());
    basis.inverse(full, out.mutable_values());
    return out;
}

}  // namespace spde
