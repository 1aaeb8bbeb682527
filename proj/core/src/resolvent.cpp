#include "spde/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "linalg.hpp"
#include "spde/error.hpp"
#include "spde/hminus.hpp"

namespace spde {

namespace {

struct Attempt {
    bool ok = false;
    std::vector<double> y;
    std::size_t iterations = 0;
    double residual = 0.0;
};

class NewtonSolver {
public:
    NewtonSolver(const SpectralBasis& basis, const Nonlinearity& nl, std::span<const double> x, double eps,
                 ResolventForm form)
        : basis_(basis), grid_(basis.grid()), nl_(nl), x_(x), eps_(eps), form_(form), n_(x.size()),
          beta_(n_), lap_(n_), f_(n_), d_(n_), lower_(n_), diag_(n_), upper_(n_), delta_(n_), trial_(n_),
          trial_y_(n_), merit_buf_(n_) {}

    // Residual F = y - x - eps Delta_h beta(y) and its H^{-1} norm.
    double residual(std::span<const double> y, std::span<double> f) {
        for (std::size_t i = 0; i < n_; ++i) beta_[i] = nl_.beta(y[i]);
        return residual_from_beta(y, f);
    }

    // Same, with beta(y) = w given (flux form).
    double residual_flux(std::span<const double> y, std::span<const double> w, std::span<double> f) {
        std::copy(w.begin(), w.end(), beta_.begin());
        return residual_from_beta(y, f);
    }

    Attempt run(std::vector<double> y, double tol, const ResolventConfig& cfg) {
        return form_ == ResolventForm::flux ? run_flux(std::move(y), tol, cfg) : run_primal(std::move(y), tol, cfg);
    }

private:
    // A trial point outside a tabulated beta is a rejected step, not an error.
    template <class F>
    static double guarded(F&& eval) {
        try {
            return eval();
        } catch (const ExtrapolationError&) {
            return std::numeric_limits<double>::infinity();
        }
    }

    double residual_from_beta(std::span<const double> y, std::span<double> f) {
        laplacian_apply(grid_, beta_, lap_);
        for (std::size_t i = 0; i < n_; ++i) {
            f[i] = y[i] - x_[i] - eps_ * lap_[i];
            if (!std::isfinite(f[i])) throw NumericalError("non-finite resolvent residual");
        }
        return std::sqrt(hminus_norm_sq(basis_, f));
    }

    // Convex merit whose H^{-1} gradient is the residual F:
    //   Phi(y) = (1/2)|y - x|_{-1}^2 + eps h^dim sum_i j(y_i).
    double merit(std::span<const double> y) {
        double js = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            merit_buf_[i] = y[i] - x_[i];
            js += nl_.j(y[i]);
        }
        return 0.5 * hminus_norm_sq(basis_, merit_buf_) + eps_ * grid_.cell_volume() * js;
    }

    // Modified Newton on Phi: the Hessian I - eps Delta_h diag(beta') gets a
    // slope floor where beta' vanishes, otherwise a zero region of y only grows
    // by one cell per iteration. The floor shrinks with the residual, so the
    // final iterations are plain Newton.
    Attempt run_primal(std::vector<double> y, double tol, const ResolventConfig& cfg) {
        Attempt out;
        double r = residual(y, f_);
        double phi = guarded([&] { return merit(y); });
        const double scale = std::max(std::sqrt(hminus_norm_sq(basis_, x_)), tol);
        std::size_t polish = 0;
        for (std::size_t it = 0;; ++it) {
            out.iterations = it;
            out.residual = r;
            if (r <= tol) {
                if (polish >= cfg.polish_steps || r == 0.0) {
                    out.ok = true;
                    out.y = std::move(y);
                    return out;
                }
                ++polish;
            }
            if (it >= cfg.max_iters) return out;
            double dmax = 0.0;
            for (std::size_t i = 0; i < n_; ++i) {
                d_[i] = nl_.beta_prime(y[i]);
                dmax = std::max(dmax, d_[i]);
            }
            const double floor = dmax * std::min(1e-2, r / scale);
            for (std::size_t i = 0; i < n_; ++i) d_[i] = std::max(d_[i], floor);
            if (!primal_direction()) return out;
            // <F, delta>_{-1}: negative for the SPD modified Hessian.
            const double slope = hminus_inner(basis_, f_, delta_);
            double t = 1.0;
            bool accepted = false;
            while (t >= cfg.min_step) {
                for (std::size_t i = 0; i < n_; ++i) trial_[i] = y[i] + t * delta_[i];
                const double rt = guarded([&] { return residual(trial_, trial_y_); });
                const double pt = std::isfinite(rt) ? guarded([&] { return merit(trial_); })
                                                    : std::numeric_limits<double>::infinity();
                const bool merit_ok = slope < 0.0 && pt <= phi + 1e-4 * t * slope &&
                                      -t * slope > 1e-13 * std::abs(phi);
                const bool residual_ok = rt <= (1.0 - 1e-4 * t) * r || (r <= tol && rt <= r);
                if (merit_ok || residual_ok) {
                    y.swap(trial_);
                    std::swap(f_, trial_y_);
                    r = rt;
                    phi = pt;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if (!accepted) {
                if (r <= tol) {
                    out.ok = true;
                    out.y = std::move(y);
                }
                return out;
            }
        }
    }

    // J delta = -F with J = I - eps Delta_h diag(d).
    bool primal_direction() {
        if (grid_.dim() == 1) {
            const double c = eps_ / (grid_.h() * grid_.h());
            for (std::size_t i = 0; i < n_; ++i) {
                diag_[i] = 1.0 + 2.0 * c * d_[i];
                lower_[i] = i > 0 ? -c * d_[i - 1] : 0.0;
                upper_[i] = i + 1 < n_ ? -c * d_[i + 1] : 0.0;
                delta_[i] = -f_[i];
            }
            if (detail::solve_tridiagonal(lower_, diag_, upper_, delta_)) return true;
            // Levenberg shift for a stalled factorisation.
            const double shift = 1e-12 * (1.0 + 2.0 * c * *std::max_element(d_.begin(), d_.end()));
            for (std::size_t i = 0; i < n_; ++i) {
                diag_[i] = 1.0 + 2.0 * c * d_[i] + shift;
                delta_[i] = -f_[i];
            }
            return detail::solve_tridiagonal(lower_, diag_, upper_, delta_);
        }
        // 2-D: (S + eps D) delta = -S F with S = (-Delta_h)^{-1}, SPD.
        std::vector<double> rhs(n_);
        inverse_laplacian(basis_, f_, rhs);
        for (double& v : rhs) v = -v;
        double dbar = 0.0;
        for (double v : d_) dbar += v;
        dbar /= static_cast<double>(n_);
        const auto lambda = basis_.full_eigenvalues();
        std::vector<double> coeff(n_);
        auto apply = [&](std::span<const double> v, std::span<double> out) {
            inverse_laplacian(basis_, v, out);
            for (std::size_t i = 0; i < n_; ++i) out[i] += eps_ * d_[i] * v[i];
        };
        auto precond = [&](std::span<const double> v, std::span<double> out) {
            basis_.forward(v, coeff);
            for (std::size_t k = 0; k < n_; ++k) coeff[k] /= (1.0 / lambda[k] + eps_ * dbar);
            basis_.inverse(coeff, out);
        };
        std::fill(delta_.begin(), delta_.end(), 0.0);
        const auto res = detail::pcg(apply, precond, rhs, delta_, 1e-13, 4 * n_);
        return res.relative_residual < 1e-6;
    }

    Attempt run_flux(std::vector<double> y, double tol, const ResolventConfig& cfg) {
        Attempt out;
        std::vector<double> w(n_), wt(n_);
        for (std::size_t i = 0; i < n_; ++i) w[i] = nl_.beta(y[i]);
        for (std::size_t i = 0; i < n_; ++i) y[i] = nl_.inverse(w[i]);
        double r = residual_flux(y, w, f_);
        std::size_t polish = 0;
        for (std::size_t it = 0;; ++it) {
            out.iterations = it;
            out.residual = r;
            if (r <= tol) {
                if (polish >= cfg.polish_steps || r == 0.0) {
                    out.ok = true;
                    out.y = std::move(y);
                    return out;
                }
                ++polish;
            }
            if (it >= cfg.max_iters) return out;
            for (std::size_t i = 0; i < n_; ++i) d_[i] = 1.0 / nl_.beta_prime(y[i]);
            if (!flux_direction()) return out;
            double t = 1.0;
            bool accepted = false;
            while (t >= cfg.min_step) {
                const double rt = guarded([&] {
                    for (std::size_t i = 0; i < n_; ++i) {
                        wt[i] = w[i] + t * delta_[i];
                        trial_[i] = nl_.inverse(wt[i]);
                    }
                    return residual_flux(trial_, wt, trial_y_);
                });
                if (rt <= (1.0 - 1e-4 * t) * r || (r <= tol && rt <= r)) {
                    w.swap(wt);
                    y.swap(trial_);
                    std::swap(f_, trial_y_);
                    r = rt;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if (!accepted) {
                if (r <= tol) {
                    out.ok = true;
                    out.y = std::move(y);
                }
                return out;
            }
        }
    }

    // (diag(1/beta') - eps Delta_h) delta_w = -F.
    bool flux_direction() {
        if (grid_.dim() == 1) {
            const double c = eps_ / (grid_.h() * grid_.h());
            for (std::size_t i = 0; i < n_; ++i) {
                diag_[i] = d_[i] + 2.0 * c;
                lower_[i] = i > 0 ? -c : 0.0;
                upper_[i] = i + 1 < n_ ? -c : 0.0;
                delta_[i] = -f_[i];
            }
            return detail::solve_tridiagonal(lower_, diag_, upper_, delta_);
        }
        std::vector<double> rhs(n_);
        for (std::size_t i = 0; i < n_; ++i) rhs[i] = -f_[i];
        const double c = eps_ / (grid_.h() * grid_.h());
        auto apply = [&](std::span<const double> v, std::span<double> out) {
            laplacian_apply(grid_, v, out);
            for (std::size_t i = 0; i < n_; ++i) out[i] = d_[i] * v[i] - eps_ * out[i];
        };
        auto precond = [&](std::span<const double> v, std::span<double> out) {
            for (std::size_t i = 0; i < n_; ++i) out[i] = v[i] / (d_[i] + 4.0 * c);
        };
        std::fill(delta_.begin(), delta_.end(), 0.0);
        const auto res = detail::pcg(apply, precond, rhs, delta_, 1e-13, 4 * n_);
        return res.relative_residual < 1e-6;
    }

    const SpectralBasis& basis_;
    const Grid& grid_;
    const Nonlinearity& nl_;
    std::span<const double> x_;
    double eps_;
    ResolventForm form_;
    std::size_t n_;
    std::vector<double> beta_, lap_, f_, d_, lower_, diag_, upper_, delta_, trial_, trial_y_, merit_buf_;
};

Attempt solve_with_continuation(const SpectralBasis& basis, const Nonlinearity& nl, std::span<const double> x,
                                double eps, ResolventForm form, std::vector<double> guess, double tol,
                                const ResolventConfig& cfg, std::size_t levels, bool& used) {
    NewtonSolver solver(basis, nl, x, eps, form);
    Attempt a = solver.run(guess, tol, cfg);
    if (a.ok || levels == 0) return a;
    used = true;
    Attempt coarse = solve_with_continuation(basis, nl, x, 2.0 * eps, form, std::move(guess), tol, cfg, levels - 1, used);
    if (!coarse.ok) return a.residual <= coarse.residual ? a : coarse;
    NewtonSolver again(basis, nl, x, eps, form);
    Attempt b = again.run(std::move(coarse.y), tol, cfg);
    b.iterations += a.iterations + coarse.iterations;
    return b;
}

ResolventSolution solve_impl(const Field& x, const ResolventConfig& cfg, const Nonlinearity& nl,
                             const SpectralBasis& basis, std::span<const double> guess) {
    if (!(cfg.epsilon > 0.0)) throw DomainError("resolvent needs epsilon > 0");
    if (!(basis.grid() == x.grid())) throw ConfigError("basis and field live on different grids");
    for (double v : x.values()) {
        if (!std::isfinite(v)) throw NumericalError("resolvent right-hand side is not finite");
    }
    ResolventForm form = cfg.form;
    if (form == ResolventForm::automatic) {
        form = nl.strictly_monotone() ? ResolventForm::flux : ResolventForm::primal;
    } else if (form == ResolventForm::flux && !nl.strictly_monotone()) {
        throw ConfigError("flux-form resolvent needs a strictly monotone nonlinearity");
    }
    const double tol = cfg.newton_tol.value_or(default_newton_tol(hminus_norm(basis, x)));
    if (!(tol > 0.0)) throw DomainError("newton tolerance must be > 0");

    bool used = false;
    std::vector<double> start(guess.begin(), guess.end());
    Attempt a = solve_with_continuation(basis, nl, x.values(), cfg.epsilon, form, std::move(start), tol, cfg,
                                        cfg.continuation_levels, used);
    if (!a.ok) {
        throw SolverError("resolvent Newton iteration did not converge at eps = " + std::to_string(cfg.epsilon),
                          a.residual, a.iterations);
    }
    Field y(x.grid(), std::move(a.y));
    Field a_eps(x.grid());
    auto av = a_eps.mutable_values();
    const auto xv = x.values();
    const auto yv = y.values();
    for (std::size_t i = 0; i < av.size(); ++i) av[i] = (xv[i] - yv[i]) / cfg.epsilon;
    return ResolventSolution{std::move(y), std::move(a_eps), a.iterations, a.residual, form, used};
}

}  // namespace

double default_newton_tol(double x_hminus_norm) { return 1e-10 * x_hminus_norm + 1e-14; }

ResolventSolution resolvent_solve(const Field& x, const ResolventConfig& cfg, const Nonlinearity& nl,
                                  const SpectralBasis& basis) {
    return solve_impl(x, cfg, nl, basis, x.values());
}

ResolventSolution resolvent_solve(const Field& x, const ResolventConfig& cfg, const Nonlinearity& nl,
                                  const SpectralBasis& basis, const Field& guess) {
    if (!(guess.grid() == x.grid())) throw ConfigError("initial guess lives on a different grid");
    return solve_impl(x, cfg, nl, basis, guess.values());
}

Field yosida_apply(const Field& x, const ResolventConfig& cfg, const Nonlinearity& nl, const SpectralBasis& basis) {
    return resolvent_solve(x, cfg, nl, basis).a_eps;
}

double resolvent_monotone_gap(const Field& x, const Field& xbar, const ResolventConfig& cfg, const Nonlinearity& nl,
                              const SpectralBasis& basis) {
    const Field ax = yosida_apply(x, cfg, nl, basis);
    const Field abar = yosida_apply(xbar, cfg, nl, basis);
    return hminus_inner(basis, ax - abar, x - xbar);
}

}  // namespace spde
