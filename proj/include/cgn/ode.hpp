#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "cgn/matrix.hpp"

namespace cgn::ode {

struct OdeSystem {
    int dim = 0;
    // du/dt = rhs(t, u); must be deterministic in (t, u).
    std::function<void(double t, std::span<const double> u, std::span<double> du)> rhs;
    // Optional analytic d(rhs)/du; finite-differenced when absent.
    std::function<void(double t, std::span<const double> u, Matrix& jac)> jac;
};

struct DoseEvent {
    enum class Mode { set, add };
    double time = 0.0;
    int state_index = 0;
    double amount = 0.0;
    Mode mode = Mode::set;
};

struct IntegratorConfig {
    double rel_tol = 1.0e-3;
    double abs_tol = 1.0e-6;
    // Deterministic stand-in for a wall-clock timeout: exceeding this many
    // attempted steps makes the evaluation NOT-EVALUABLE.
    long long max_steps = 200000;
    double initial_step = 0.0; // 0 -> choose automatically
};

struct OdeDiagnostics {
    long long accepted_steps = 0;
    long long rejected_steps = 0;
    long long rhs_evals = 0;
    long long jacobian_evals = 0;
    double min_step = std::numeric_limits<double>::infinity();
    bool ok = false;
};

// Integrates from t = 0 through all sample times, restarting at each dose
// event. Returns the state at each sample time (one row per sample), or
// nullopt when the step budget is exhausted, the step size underflows, or
// the trajectory turns non-finite — never throws for numerical trouble.
// Events must be sorted by time; sample times strictly increasing. A sample
// at an event time sees the post-event state.
std::optional<Matrix> integrate(const OdeSystem& system, std::span<const double> u0,
                                std::span<const DoseEvent> events,
                                std::span<const double> sample_times,
                                const IntegratorConfig& config,
                                OdeDiagnostics* diagnostics = nullptr);

// Same integration, but the caller wants the step telemetry regardless of
// whether the run succeeded.
OdeDiagnostics integrate_stiffness_check(const OdeSystem& system, std::span<const double> u0,
                                         std::span<const DoseEvent> events,
                                         std::span<const double> sample_times,
                                         const IntegratorConfig& config);

} // namespace cgn::ode
