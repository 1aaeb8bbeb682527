#include "spde/stepper.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include "spde/error.hpp"
#include "spde/hminus.hpp"
#include "spde/verify.hpp"

namespace spde {

std::string to_string(Scheme s) {
    return s == Scheme::semi_implicit_yosida ? "semi-implicit-yosida" : "mild-exponential";
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "semi-implicit-yosida") return Scheme::semi_implicit_yosida;
    if (s == "mild-exponential") return Scheme::mild_exponential;
    throw ConfigError("unknown scheme '" + s + "' (expected semi-implicit-yosida or mild-exponential)");
}

std::string to_string(InnerSolve s) { return s == InnerSolve::fixed_point ? "fixed-point" : "resolvent-identity"; }

InnerSolve inner_solve_from_string(const std::string& s) {
    if (s == "fixed-point") return InnerSolve::fixed_point;
    if (s == "resolvent-identity") return InnerSolve::resolvent_identity;
    throw ConfigError("unknown inner solver '" + s + "' (expected fixed-point or resolvent-identity)");
}

std::size_t SimConfig::n_steps() const {
    validate();
    const double q = T / dt;
    const double r = std::round(q);
    if (std::abs(q - r) > 1e-9 * r) {
        std::ostringstream os;
        os << "T = " << T << " is not an integer multiple of dt = " << dt;
        throw ConfigError(os.str());
    }
    return static_cast<std::size_t>(r);
}

double SimConfig::contraction_factor() const {
    const double r = dt / eps();
    return r / (1.0 + r);
}

void SimConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
    if (!(T >= dt) || !std::isfinite(T)) throw ConfigError("T must be finite and >= dt");
    if (!(eps() > 0.0) || !std::isfinite(eps())) throw ConfigError("epsilon must be positive");
    if (!(p >= 1.0) || !std::isfinite(p)) throw ConfigError("functional exponent p must be finite and >= 1");
    if (mollify_lambda && !(*mollify_lambda >= 0.0)) throw ConfigError("mollifier lambda must be >= 0");
    if (!(inner_tol > 0.0)) throw ConfigError("inner tolerance must be positive");
}

std::vector<double> Trajectory::times() const {
    std::vector<double> t(steps.size());
    for (std::size_t i = 0; i < steps.size(); ++i) t[i] = steps[i].time;
    return t;
}

double Trajectory::min_value() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& s : steps) m = std::min(m, s.min_value);
    return m;
}

namespace {

ResolventConfig resolvent_at(const SimConfig& cfg, double eps) {
    ResolventConfig r = cfg.resolvent;
    r.epsilon = eps;
    return r;
}

void require_finite(const Field& x, const char* what) {
    for (double v : x.values())
        if (!std::isfinite(v)) throw NumericalError(std::string("non-finite value in ") + what);
}

StepResult solve_fixed_point(const Field& b, const SimConfig& cfg, const Nonlinearity& nl,
                             const SpectralBasis& basis, const Field* y_guess) {
    const double eps = cfg.eps();
    const double r = cfg.dt / eps;
    const ResolventConfig rc = resolvent_at(cfg, eps);
    const double tol = cfg.inner_tol * (1.0 + hminus_norm(basis, b));
    Field x = b;
    Field y = y_guess ? *y_guess : b;
    double update = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= cfg.max_inner_iters; ++k) {
        y = resolvent_solve(x, rc, nl, basis, y).y;
        Field next = b;
        next.axpy(r, y);
        next *= 1.0 / (1.0 + r);
        update = hminus_norm(basis, next - x);
        x = std::move(next);
        if (update < tol) return StepResult{std::move(x), std::move(y), k, r / (1.0 + r)};
    }
    std::ostringstream os;
    os << "inner fixed point stalled: H^-1 update " << update << " > " << tol << " after " << cfg.max_inner_iters
       << " iterations (rho = " << r / (1.0 + r) << ")";
    throw SolverError(os.str(), update, cfg.max_inner_iters);
}

StepResult solve_identity(const Field& b, const SimConfig& cfg, const Nonlinearity& nl, const SpectralBasis& basis,
                          const Field* y_guess) {
    const double eps = cfg.eps();
    const double dt = cfg.dt;
    const ResolventConfig rc = resolvent_at(cfg, eps + dt);
    Field y = y_guess ? resolvent_solve(b, rc, nl, basis, *y_guess).y : resolvent_solve(b, rc, nl, basis).y;
    Field x = b;
    x *= eps;
    x.axpy(dt, y);
    x *= 1.0 / (eps + dt);
    return StepResult{std::move(x), std::move(y), 1, cfg.contraction_factor()};
}

// Advances (X, J_eps X) by one step given the stochastic forcing sigma(.) dW.
class Integrator {
public:
    Integrator(const SimConfig& cfg, const Nonlinearity& nl, const SpectralBasis& basis)
        : cfg_(cfg), nl_(nl), basis_(basis), decay_(std::exp(-cfg.dt / cfg.eps())) {}

    StepResult advance(const Field& x, const Field& y, const Field& forcing) const {
        if (cfg_.scheme == Scheme::semi_implicit_yosida) {
            Field b = x + forcing;
            return solve_implicit(b, cfg_, nl_, basis_, &y);
        }
        // Exponential integrator for dX + X/eps dt = J_eps(X)/eps dt + sigma dW.
        Field next = x;
        next *= decay_;
        next.axpy(1.0 - decay_, y);
        next.axpy(decay_, forcing);
        require_finite(next, "mild-exponential update");
        Field ynext = resolvent_solve(next, resolvent_at(cfg_, cfg_.eps()), nl_, basis_, y).y;
        return StepResult{std::move(next), std::move(ynext), 1, 0.0};
    }

    Field initial_y(const Field& x0) const { return resolvent_solve(x0, resolvent_at(cfg_, cfg_.eps()), nl_, basis_).y; }

private:
    const SimConfig& cfg_;
    const Nonlinearity& nl_;
    const SpectralBasis& basis_;
    double decay_;
};

StepFunctionals measure(const Field& x, const Field& y, double t, const SimConfig& cfg, const Nonlinearity& nl,
                        const SpectralBasis& basis) {
    StepFunctionals f;
    f.time = t;
    const double cell = x.grid().cell_volume();
    f.hminus_sq = hminus_norm_sq(basis, x);
    f.lp_pow = lp_pow(x.values(), cell, cfg.p);
    f.phi = phi(x.values(), cell, cfg.p);
    if (cfg.mollify_lambda) f.phi_mollified = phi(mollify(basis, x, *cfg.mollify_lambda), cfg.p);
    double js = 0.0;
    for (double v : y.values()) js += nl.j(v);
    f.j_step = cell * js;
    Field a = x - y;
    a *= 1.0 / cfg.eps();
    f.drift = hminus_inner(basis, a, x);
    f.min_value = *std::min_element(x.values().begin(), x.values().end());
    if (!std::isfinite(f.hminus_sq) || !std::isfinite(f.lp_pow) || !std::isfinite(f.j_step) ||
        !std::isfinite(f.drift)) {
        throw NumericalError("non-finite functional at t = " + std::to_string(t));
    }
    return f;
}

using IncrementSource = std::function<void(std::size_t, std::span<double>)>;

Trajectory integrate(const Field& x0, const SimConfig& cfg, const Nonlinearity& nl, const NoiseModel& nm,
                     const SpectralBasis& basis, std::uint64_t path_index, const IncrementSource& source,
                     const StepObserver& observer) {
    cfg.validate();
    if (!(x0.grid() == basis.grid()) || !(nm.grid() == basis.grid()))
        throw ConfigError("initial state, noise and basis must share one grid");
    require_finite(x0, "initial state");
    const std::size_t n_steps = cfg.n_steps();
    Integrator integ(cfg, nl, basis);

    Trajectory tr;
    tr.path_index = path_index;
    tr.dt = cfg.dt;
    tr.steps.reserve(n_steps + 1);

    Field x = x0;
    Field y = integ.initial_y(x0);
    tr.steps.push_back(measure(x, y, 0.0, cfg, nl, basis));
    if (cfg.record_every > 0) {
        tr.snapshot_steps.push_back(0);
        tr.snapshots.push_back(x);
    }
    if (observer) observer(0, 0.0, x, y);

    std::vector<double> dw(nm.size());
    Field forcing(x0.grid());
    for (std::size_t n = 0; n < n_steps; ++n) {
        const double t = static_cast<double>(n + 1) * cfg.dt;
        try {
            source(n, dw);
            apply_sigma(x.values(), dw, nm, forcing.mutable_values());
            StepResult st = integ.advance(x, y, forcing);
            x = std::move(st.x);
            y = std::move(st.y);
            StepFunctionals f = measure(x, y, t, cfg, nl, basis);
            const StepFunctionals& prev = tr.steps.back();
            f.j_integral = prev.j_integral + cfg.dt * f.j_step;
            f.drift_integral = prev.drift_integral + cfg.dt * f.drift;
            f.inner_iterations = st.inner_iterations;
            tr.steps.push_back(f);
        } catch (const StepError&) {
            throw;
        } catch (const Error& e) {
            throw StepError(std::string(e.what()) + " (path " + std::to_string(path_index) + ")", n + 1);
        }
        if (cfg.record_every > 0 && (n + 1) % cfg.record_every == 0) {
            tr.snapshot_steps.push_back(n + 1);
            tr.snapshots.push_back(x);
        }
        if (observer) observer(n + 1, t, x, y);
    }
    tr.final_state = std::move(x);
    return tr;
}

}  // namespace

StepResult solve_implicit(const Field& b, const SimConfig& cfg, const Nonlinearity& nl, const SpectralBasis& basis,
                          const Field* y_guess) {
    require_finite(b, "step right-hand side");
    return cfg.inner == InnerSolve::fixed_point ? solve_fixed_point(b, cfg, nl, basis, y_guess)
                                                : solve_identity(b, cfg, nl, basis, y_guess);
}

StepResult step_semi_implicit(const Field& xn, std::span<const double> dw, const SimConfig& cfg,
                              const Nonlinearity& nl, const NoiseModel& nm, const SpectralBasis& basis) {
    cfg.validate();
    Field b = xn + apply_sigma(xn, dw, nm);
    return solve_implicit(b, cfg, nl, basis);
}

Trajectory simulate_path(const Field& x0, const SimConfig& cfg, const Nonlinearity& nl, const NoiseModel& nm,
                         const SpectralBasis& basis, std::uint64_t path_index, const StepObserver& observer) {
    auto source = [&](std::size_t n, std::span<double> dw) { brownian_increments(nm, path_index, n, cfg.dt, dw); };
    return integrate(x0, cfg, nl, nm, basis, path_index, source, observer);
}

Trajectory simulate_path(const Field& x0, const SimConfig& cfg, const Nonlinearity& nl, const NoiseModel& nm,
                         const SpectralBasis& basis, const NoisePath& path, const StepObserver& observer) {
    if (path.seed != nm.seed() || path.k_noise != nm.size())
        throw ConfigError("noise path keys (seed, K_noise) do not match the noise model");
    if (path.dt != cfg.dt || path.n_steps != cfg.n_steps())
        throw ConfigError("noise path (dt, n_steps) does not match the simulation config");
    auto source = [&](std::size_t n, std::span<double> dw) {
        const auto s = path.step(n);
        std::copy(s.begin(), s.end(), dw.begin());
    };
    return integrate(x0, cfg, nl, nm, basis, path.path_index, source, observer);
}

Trajectory simulate_regularized(const Field& x0, double lambda, const SimConfig& cfg, const Nonlinearity& nl,
                                const NoiseModel& nm, const SpectralBasis& basis, std::uint64_t path_index,
                                const StepObserver& observer) {
    if (lambda == 0.0) return simulate_path(x0, cfg, nl, nm, basis, path_index, observer);
    if (!(lambda > 0.0)) throw DomainError("regularization lambda must be >= 0");
    const Nonlinearity reg = regularize(nl, lambda);
    return simulate_path(x0, cfg, reg, nm, basis, path_index, observer);
}

void parallel_for(std::size_t n, std::size_t parallelism, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t workers = std::max<std::size_t>(1, std::min(parallelism, n));
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::vector<Trajectory> run_ensemble(const Field& x0, const SimConfig& cfg, const Nonlinearity& nl,
                                     const NoiseModel& nm, const SpectralBasis& basis, std::size_t n_paths,
                                     std::size_t parallelism, std::uint64_t first_path) {
    std::vector<Trajectory> out(n_paths);
    parallel_for(n_paths, parallelism,
                 [&](std::size_t i) { out[i] = simulate_path(x0, cfg, nl, nm, basis, first_path + i); });
    return out;
}

PicardReport picard_construct(const Field& x0, const std::vector<NoisePath>& paths, std::size_t n_outer,
                              const SimConfig& cfg, const Nonlinearity& nl, const NoiseModel& nm,
                              const SpectralBasis& basis, std::size_t parallelism) {
    if (n_outer < 2) throw ConfigError("picard construction needs n_outer >= 2");
    if (paths.empty()) throw ConfigError("picard construction needs at least one noise path");
    cfg.validate();
    const std::size_t n_steps = cfg.n_steps();
    for (const auto& p : paths) {
        if (p.seed != nm.seed() || p.k_noise != nm.size() || p.dt != cfg.dt || p.n_steps != n_steps)
            throw ConfigError("noise path keys do not match the picard configuration");
    }
    const std::size_t n_paths = paths.size();
    Integrator integ(cfg, nl, basis);

    // prev[p][n] = X^{(i)}(t_n) on path p.
    std::vector<std::vector<Field>> prev(n_paths, std::vector<Field>(n_steps + 1, x0));
    std::vector<std::vector<Field>> cur = prev;
    const Field y0 = integ.initial_y(x0);

    PicardReport rep;
    rep.n_paths = n_paths;
    rep.n_outer = n_outer;
    std::vector<std::vector<double>> dist(n_paths, std::vector<double>(n_steps + 1, 0.0));
    for (std::size_t it = 0; it < n_outer; ++it) {
        parallel_for(n_paths, parallelism, [&](std::size_t p) {
            Field y = y0;
            Field forcing(x0.grid());
            cur[p][0] = x0;
            for (std::size_t n = 0; n < n_steps; ++n) {
                try {
                    apply_sigma(prev[p][n].values(), paths[p].step(n), nm, forcing.mutable_values());
                    StepResult st = integ.advance(cur[p][n], y, forcing);
                    cur[p][n + 1] = std::move(st.x);
                    y = std::move(st.y);
                } catch (const Error& e) {
                    throw StepError(std::string(e.what()) + " (picard iteration " + std::to_string(it) + ")", n + 1);
                }
            }
            for (std::size_t n = 0; n <= n_steps; ++n) dist[p][n] = hminus_norm_sq(basis, cur[p][n] - prev[p][n]);
        });
        double sup = 0.0;
        for (std::size_t n = 0; n <= n_steps; ++n) {
            double mean = 0.0;
            for (std::size_t p = 0; p < n_paths; ++p) mean += dist[p][n];
            sup = std::max(sup, mean / static_cast<double>(n_paths));
        }
        rep.d.push_back(sup);
        std::swap(prev, cur);
    }
    double log_sum = 0.0;
    std::size_t n_log = 0;
    for (std::size_t i = 0; i + 1 < rep.d.size(); ++i) {
        const double r = rep.d[i] > 0.0 ? rep.d[i + 1] / rep.d[i] : 0.0;
        rep.ratios.push_back(r);
        if (r > 0.0) {
            log_sum += std::log(r);
            ++n_log;
        }
    }
    rep.geometric_ratio = n_log > 0 ? std::exp(log_sum / static_cast<double>(n_log)) : 0.0;
    return rep;
}

}  // namespace spde
