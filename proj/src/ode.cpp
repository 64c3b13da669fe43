#include "cgn/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cgn/errors.hpp"

namespace cgn::ode {

namespace {

// Modified Rosenbrock pair of order 2(3), L-stable, in the style of the
// classic stiff ODE suites. One Jacobian and one LU factorization per
// attempted step, three rhs evaluations, first-same-as-last reuse on accept.
constexpr double kGamma = 0.2928932188134524756; // 1/(2+sqrt(2))
constexpr double kE32 = 7.4142135623730950488;   // 6+sqrt(2)

struct Lu {
    Matrix a;
    std::vector<int> piv;
    bool singular = false;
};

Lu lu_factor(Matrix w) {
    const std::size_t n = w.rows();
    Lu lu{std::move(w), std::vector<int>(n), false};
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(lu.a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(lu.a(i, k));
            if (v > best) {
                best = v;
                p = i;
            }
        }
        if (best == 0.0 || !std::isfinite(best)) {
            lu.singular = true;
            return lu;
        }
        lu.piv[k] = static_cast<int>(p);
        if (p != k)
            for (std::size_t j = 0; j < n; ++j) std::swap(lu.a(k, j), lu.a(p, j));
        const double inv = 1.0 / lu.a(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = lu.a(i, k) * inv;
            lu.a(i, k) = f;
            if (f == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) lu.a(i, j) -= f * lu.a(k, j);
        }
    }
    return lu;
}

void lu_solve(const Lu& lu, std::span<double> b) {
    const std::size_t n = lu.a.rows();
    for (std::size_t k = 0; k < n; ++k) {
        std::swap(b[k], b[static_cast<std::size_t>(lu.piv[k])]);
        for (std::size_t i = k + 1; i < n; ++i) b[i] -= lu.a(i, k) * b[k];
    }
    for (std::size_t k = n; k-- > 0;) {
        for (std::size_t j = k + 1; j < n; ++j) b[k] -= lu.a(k, j) * b[j];
        b[k] /= lu.a(k, k);
    }
}

bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

class Stepper {
public:
    Stepper(const OdeSystem& system, const IntegratorConfig& config, OdeDiagnostics& diag)
        : sys_(system), cfg_(config), diag_(diag), n_(static_cast<std::size_t>(system.dim)),
          jac_(n_, n_), du_(n_), up_(n_), k1_(n_), k2_(n_), k3_(n_), f1_(n_), f2_(n_),
          ynew_(n_), err_(n_) {}

    bool rhs(double t, std::span<const double> u, std::span<double> du) {
        sys_.rhs(t, u, du);
        ++diag_.rhs_evals;
        return all_finite(du);
    }

    void jacobian(double t, std::span<const double> u, std::span<const double> f0) {
        ++diag_.jacobian_evals;
        if (sys_.jac) {
            sys_.jac(t, u, jac_);
            return;
        }
        // Forward differences, one column per state.
        const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
        std::copy(u.begin(), u.end(), up_.begin());
        for (std::size_t j = 0; j < n_; ++j) {
            const double eps = sqrt_eps * std::max(std::abs(u[j]), 1.0);
            const double saved = up_[j];
            up_[j] = saved + eps;
            sys_.rhs(t, up_, du_);
            ++diag_.rhs_evals;
            up_[j] = saved;
            const double inv = 1.0 / eps;
            for (std::size_t i = 0; i < n_; ++i) jac_(i, j) = (du_[i] - f0[i]) * inv;
        }
    }

    // Advances (t, y) to exactly t_end. f0 must hold rhs(t, y) on entry and
    // holds rhs(t_end, y) on success. Returns false when the step budget or
    // the step-size floor is hit, or the trajectory turns non-finite.
    bool advance(double& t, std::span<double> y, std::span<double> f0, double t_end, double& h,
                 double h_floor) {
        while (t < t_end) {
            const double remaining = t_end - t;
            bool clamped = false;
            if (h >= 0.9 * remaining) {
                h = remaining;
                clamped = true;
            }

            if (++attempts_ > cfg_.max_steps) return false;

            jacobian(t, y, f0);
            Matrix w = Matrix::identity(n_);
            for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t j = 0; j < n_; ++j) w(i, j) -= h * kGamma * jac_(i, j);
            const Lu lu = lu_factor(std::move(w));
            if (lu.singular) {
                ++diag_.rejected_steps;
                h *= 0.5;
                if (h < h_floor) return false;
                continue;
            }

            for (std::size_t i = 0; i < n_; ++i) k1_[i] = f0[i];
            lu_solve(lu, k1_);

            for (std::size_t i = 0; i < n_; ++i) up_[i] = y[i] + 0.5 * h * k1_[i];
            if (!rhs(t + 0.5 * h, up_, f1_)) {
                if (!reject_shrink(h, h_floor)) return false;
                continue;
            }

            for (std::size_t i = 0; i < n_; ++i) k2_[i] = f1_[i] - k1_[i];
            lu_solve(lu, k2_);
            for (std::size_t i = 0; i < n_; ++i) k2_[i] += k1_[i];

            for (std::size_t i = 0; i < n_; ++i) ynew_[i] = y[i] + h * k2_[i];
            if (!all_finite(ynew_) || !rhs(t + h, ynew_, f2_)) {
                if (!reject_shrink(h, h_floor)) return false;
                continue;
            }

            for (std::size_t i = 0; i < n_; ++i)
                k3_[i] = f2_[i] - kE32 * (k2_[i] - f1_[i]) - 2.0 * (k1_[i] - f0[i]);
            lu_solve(lu, k3_);

            double err_sq = 0.0;
            for (std::size_t i = 0; i < n_; ++i) {
                const double e = (h / 6.0) * (k1_[i] - 2.0 * k2_[i] + k3_[i]);
                const double sc =
                    cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y[i]), std::abs(ynew_[i]));
                const double r = e / sc;
                err_sq += r * r;
            }
            const double err = std::sqrt(err_sq / static_cast<double>(n_));
            if (!std::isfinite(err)) {
                if (!reject_shrink(h, h_floor)) return false;
                continue;
            }

            if (err <= 1.0) {
                ++diag_.accepted_steps;
                diag_.min_step = std::min(diag_.min_step, h);
                t = clamped ? t_end : t + h;
                std::copy(ynew_.begin(), ynew_.end(), y.begin());
                std::copy(f2_.begin(), f2_.end(), f0.begin());
                const double grow =
                    err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -1.0 / 3.0), 0.2, 5.0);
                h *= grow;
            } else {
                ++diag_.rejected_steps;
                h *= std::clamp(0.9 * std::pow(err, -1.0 / 3.0), 0.1, 0.5);
                if (h < h_floor) return false;
            }
        }
        return true;
    }

    double initial_step(double t0, std::span<const double> y, std::span<const double> f0,
                        double span) const {
        if (cfg_.initial_step > 0.0) return cfg_.initial_step;
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double sc = cfg_.abs_tol + cfg_.rel_tol * std::abs(y[i]);
            d0 += (y[i] / sc) * (y[i] / sc);
            d1 += (f0[i] / sc) * (f0[i] / sc);
        }
        (void)t0;
        double h = (d0 > 0.0 && d1 > 0.0) ? 0.01 * std::sqrt(d0 / d1) : 1.0e-6 * span;
        return std::clamp(h, 1.0e-12 * span, span);
    }

private:
    bool reject_shrink(double& h, double h_floor) {
        ++diag_.rejected_steps;
        h *= 0.5;
        return h >= h_floor;
    }

    const OdeSystem& sys_;
    const IntegratorConfig& cfg_;
    OdeDiagnostics& diag_;
    std::size_t n_;
    long long attempts_ = 0;
    Matrix jac_;
    std::vector<double> du_, up_, k1_, k2_, k3_, f1_, f2_, ynew_, err_;
};

} // namespace

std::optional<Matrix> integrate(const OdeSystem& system, std::span<const double> u0,
                                std::span<const DoseEvent> events,
                                std::span<const double> sample_times,
                                const IntegratorConfig& config, OdeDiagnostics* diagnostics) {
    if (system.dim <= 0 || !system.rhs) throw ContractViolation("integrate: invalid system");
    if (u0.size() != static_cast<std::size_t>(system.dim))
        throw ContractViolation("integrate: state size mismatch");
    if (!(config.rel_tol > 0.0 && config.abs_tol > 0.0))
        throw ContractViolation("integrate: tolerances must be positive");
    for (std::size_t i = 0; i + 1 < sample_times.size(); ++i)
        if (!(sample_times[i] < sample_times[i + 1]))
            throw ContractViolation("integrate: sample times not strictly increasing");
    for (std::size_t i = 0; i + 1 < events.size(); ++i)
        if (events[i].time > events[i + 1].time)
            throw ContractViolation("integrate: events not sorted by time");
    for (const DoseEvent& e : events)
        if (e.time < 0.0 || e.state_index < 0 || e.state_index >= system.dim)
            throw ContractViolation("integrate: bad event");
    if (!sample_times.empty() && sample_times.front() < 0.0)
        throw ContractViolation("integrate: negative sample time");

    OdeDiagnostics local;
    OdeDiagnostics& diag = diagnostics ? *diagnostics : local;
    diag = OdeDiagnostics{};

    const std::size_t n = static_cast<std::size_t>(system.dim);
    Matrix samples(sample_times.size(), n);
    std::vector<double> y(u0.begin(), u0.end());

    // Merged stop schedule: every event time and sample time, in order.
    std::vector<double> stops;
    const double t_last = sample_times.empty() ? 0.0 : sample_times.back();
    for (const DoseEvent& e : events)
        if (e.time <= t_last) stops.push_back(e.time);
    for (double t : sample_times) stops.push_back(t);
    std::sort(stops.begin(), stops.end());
    stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

    const double span = stops.empty() ? 1.0 : std::max(stops.back(), 1.0e-12);
    const double h_floor = span * 1.0e-14;

    std::size_t next_event = 0;
    std::size_t next_sample = 0;
    auto apply_stop = [&](double t) {
        while (next_event < events.size() && events[next_event].time == t) {
            const DoseEvent& e = events[next_event];
            const std::size_t idx = static_cast<std::size_t>(e.state_index);
            y[idx] = e.mode == DoseEvent::Mode::set ? e.amount : y[idx] + e.amount;
            ++next_event;
        }
        if (next_sample < sample_times.size() && sample_times[next_sample] == t) {
            for (std::size_t i = 0; i < n; ++i) samples(next_sample, i) = y[i];
            ++next_sample;
        }
    };

    double t = 0.0;
    apply_stop(0.0);

    Stepper stepper(system, config, diag);
    std::vector<double> f0(n);
    double h = 0.0;
    for (double stop : stops) {
        if (stop <= t) continue; // stop at t=0 already handled
        if (!all_finite(y)) return std::nullopt;
        if (!stepper.rhs(t, y, f0)) return std::nullopt;
        if (h <= 0.0) h = stepper.initial_step(t, y, f0, span);
        h = std::min(h, stop - t);
        if (!stepper.advance(t, y, f0, stop, h, h_floor)) return std::nullopt;
        apply_stop(stop);
    }

    diag.ok = true;
    return samples;
}

OdeDiagnostics integrate_stiffness_check(const OdeSystem& system, std::span<const double> u0,
                                         std::span<const DoseEvent> events,
                                         std::span<const double> sample_times,
                                         const IntegratorConfig& config) {
    OdeDiagnostics diag;
    integrate(system, u0, events, sample_times, config, &diag);
    return diag;
}

} // namespace cgn::ode
