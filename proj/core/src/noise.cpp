#include "spde/noise.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "binio.hpp"
#include "spde/error.hpp"
#include "spde/hminus.hpp"
#include "spde/philox.hpp"

namespace spde {

namespace {

constexpr char kMagic[8] = {'S', 'P', 'D', 'E', 'N', 'O', 'I', 'S'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

NoiseModel::NoiseModel(const SpectralBasis& basis, std::vector<double> mu, std::uint64_t seed)
    : grid_(basis.grid()),
      mu_(std::move(mu)),
      seed_(seed),
      mubar_(std::numeric_limits<double>::quiet_NaN()),
      decay_(std::numeric_limits<double>::quiet_NaN()),
      tail_fraction_(std::numeric_limits<double>::quiet_NaN()) {
    if (mu_.empty()) throw ConfigError("noise needs at least one mode");
    if (mu_.size() > basis.size())
        throw ConfigError("K_noise = " + std::to_string(mu_.size()) + " exceeds the " +
                          std::to_string(basis.size()) + " retained basis modes");
    for (double m : mu_)
        if (!std::isfinite(m) || m < 0.0) throw ConfigError("noise amplitudes must be finite and nonnegative");
    const std::size_t n = grid_.size();
    modes_.resize(mu_.size() * n);
    lambda_.resize(mu_.size());
    for (std::size_t k = 0; k < mu_.size(); ++k) {
        const auto e = basis.mode(k);
        std::copy(e.begin(), e.end(), modes_.begin() + static_cast<std::ptrdiff_t>(k * n));
        lambda_[k] = basis.eigenvalue(k);
        c_ += mu_[k] * mu_[k] * lambda_[k] * lambda_[k];
    }
}

std::span<const double> NoiseModel::mode(std::size_t k) const {
    if (k >= mu_.size()) throw ConfigError("noise mode index out of range");
    return std::span<const double>(modes_).subspan(k * grid_.size(), grid_.size());
}

NoiseModel default_mu(const SpectralBasis& basis, double mubar, double s, std::size_t k_noise, std::uint64_t seed) {
    if (!(mubar >= 0.0) || !std::isfinite(mubar)) throw ConfigError("mubar must be finite and >= 0");
    if (!std::isfinite(s)) throw ConfigError("noise decay s must be finite");
    std::vector<double> mu(k_noise);
    for (std::size_t k = 0; k < k_noise && k < basis.size(); ++k) mu[k] = mubar * std::pow(basis.eigenvalue(k), -s);
    NoiseModel nm(basis, std::move(mu), seed);
    nm.mubar_ = mubar;
    nm.decay_ = s;

    // Tail of sum lambda^{2-2s} beyond the retained noise modes, up to the grid.
    std::vector<double> lam(basis.full_eigenvalues().begin(), basis.full_eigenvalues().end());
    std::sort(lam.begin(), lam.end());
    double head = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < lam.size(); ++i) {
        const double t = std::pow(lam[i], 2.0 - 2.0 * s);
        (i < k_noise ? head : tail) += t;
    }
    nm.tail_fraction_ = (head + tail) > 0.0 ? tail / (head + tail) : 0.0;

    const double critical = basis.grid().dim() == 1 ? 1.25 : 1.5;
    if (s <= critical) {
        nm.summable_ = false;
        std::ostringstream os;
        os << "noise decay s = " << s << " <= " << critical
           << ": sum mu_k^2 lambda_k^2 diverges as K_noise grows; C depends on the truncation";
        nm.warning_ = os.str();
    }
    return nm;
}

void standard_normals(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::span<double> out) {
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    for (std::size_t pair = 0; 2 * pair < out.size(); ++pair) {
        const Philox4x32::Counter ctr{static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(pair),
                                      static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
        const auto z = gaussian_pair(Philox4x32::generate(ctr, key));
        out[2 * pair] = z[0];
        if (2 * pair + 1 < out.size()) out[2 * pair + 1] = z[1];
    }
}

void brownian_increments(const NoiseModel& nm, std::uint64_t path, std::uint64_t step, double dt,
                         std::span<double> out) {
    if (out.size() != nm.size()) throw ConfigError("increment buffer does not match K_noise");
    if (!(dt > 0.0)) throw DomainError("dt must be positive");
    if (step > 0xFFFFFFFFull) throw ConfigError("step index exceeds the 32-bit counter range");
    standard_normals(nm.seed(), path, step, out);
    const double sq = std::sqrt(dt);
    for (double& z : out) z *= sq;
}

NoisePath generate_path(const NoiseModel& nm, std::uint64_t path_index, double dt, std::uint64_t n_steps) {
    NoisePath p;
    p.seed = nm.seed();
    p.path_index = path_index;
    p.dt = dt;
    p.n_steps = n_steps;
    p.k_noise = nm.size();
    p.increments.resize(n_steps * nm.size());
    for (std::uint64_t n = 0; n < n_steps; ++n)
        brownian_increments(nm, path_index, n, dt,
                            std::span<double>(p.increments).subspan(n * nm.size(), nm.size()));
    return p;
}

void write_noise_path(const std::filesystem::path& file, const NoisePath& path) {
    if (path.increments.size() != path.n_steps * path.k_noise)
        throw ConfigError("noise path has " + std::to_string(path.increments.size()) + " increments, expected " +
                          std::to_string(path.n_steps * path.k_noise));
    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot open " + file.string() + " for writing");
    os.write(kMagic, sizeof kMagic);
    detail::put<std::uint32_t>(os, kVersion);
    detail::put<std::uint32_t>(os, 0);
    detail::put<std::uint64_t>(os, path.seed);
    detail::put<std::uint64_t>(os, path.path_index);
    detail::put<double>(os, path.dt);
    detail::put<std::uint64_t>(os, path.n_steps);
    detail::put<std::uint64_t>(os, path.k_noise);
    detail::put_doubles(os, path.increments);
    if (!os) throw ConfigError("write failed: " + file.string());
}

NoisePath read_noise_path(const std::filesystem::path& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw ConfigError("cannot open " + file.string());
    char magic[8];
    if (!is.read(magic, sizeof magic) || !std::equal(magic, magic + 8, kMagic))
        throw ConfigError(file.string() + ": not a noise path file");
    const auto version = detail::get<std::uint32_t>(is, "version");
    if (version != kVersion) throw ConfigError(file.string() + ": unsupported version " + std::to_string(version));
    detail::get<std::uint32_t>(is, "header");
    NoisePath p;
    p.seed = detail::get<std::uint64_t>(is, "seed");
    p.path_index = detail::get<std::uint64_t>(is, "path index");
    p.dt = detail::get<double>(is, "dt");
    p.n_steps = detail::get<std::uint64_t>(is, "n_steps");
    p.k_noise = detail::get<std::uint64_t>(is, "K_noise");
    if (p.k_noise > (1u << 20) || p.n_steps > (1ull << 32)) throw ConfigError(file.string() + ": implausible header");
    p.increments.resize(p.n_steps * p.k_noise);
    detail::get_doubles(is, p.increments, "increments");
    if (is.peek() != std::char_traits<char>::eof()) throw ConfigError(file.string() + ": trailing bytes");
    return p;
}

void apply_sigma(std::span<const double> x, std::span<const double> dw, const NoiseModel& nm, std::span<double> out) {
    if (dw.size() != nm.size())
        throw ConfigError("got " + std::to_string(dw.size()) + " noise increments for " + std::to_string(nm.size()) +
                          " modes");
    if (x.size() != nm.grid().size() || out.size() != x.size()) throw ConfigError("field size does not match noise grid");
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t k = 0; k < nm.size(); ++k) {
        const double a = nm.mu()[k] * dw[k];
        if (a == 0.0) continue;
        const auto e = nm.mode(k);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += a * e[i];
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= x[i];
}

Field apply_sigma(const Field& x, std::span<const double> dw, const NoiseModel& nm) {
    if (!(x.grid() == nm.grid())) throw ConfigError("field and noise live on different grids");
    Field out(x.grid());
    apply_sigma(x.values(), dw, nm, out.mutable_values());
    return out;
}

double hs_norm_sq(const Field& x, const NoiseModel& nm, const SpectralBasis& basis) {
    if (!(x.grid() == nm.grid()) || !(basis.grid() == nm.grid())) throw ConfigError("grid mismatch in hs_norm_sq");
    std::vector<double> tmp(x.size());
    double s = 0.0;
    for (std::size_t k = 0; k < nm.size(); ++k) {
        const auto e = nm.mode(k);
        for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] = x[i] * e[i];
        s += nm.mu()[k] * nm.mu()[k] * hminus_norm_sq(basis, tmp);
    }
    return s;
}

}  // namespace spde
