#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cgn/matrix.hpp"
#include "cgn/problem.hpp"

namespace cgn {

struct CgnConfig {
    int cluster_size = 250;     // N
    double lambda_init = 0.01;
    double lambda_max = 1.0e10; // members with lambda above this are frozen
    double gamma = 1.0;
    int max_iterations = 100;   // k_max
    std::uint64_t seed = 0;
    int max_resample = 100;     // per-column retry budget during initialization
    int workers = 1;

    // Throws ContractViolation on invalid settings; warns to stderr when the
    // cluster is too small for a full-rank linear approximation (N < n+1).
    void validate(int dim_x) const;
};

// Iteration-k snapshot of the cluster. Columns of x/y correspond to members.
struct ClusterState {
    int iteration = 0;
    Matrix x;                    // n x N
    Matrix y;                    // m x N
    std::vector<double> ssr;     // length N
    std::vector<double> lambda;  // length N, always > 0
    std::vector<std::uint8_t> frozen; // lambda_i > lambda_max
};

// Weighted global linear approximation around one member:
// f(x) ~= slope (x - anchor_x) + anchor_y.
struct LinearModel {
    Matrix slope; // m x n
    int anchor_index = 0;
    std::vector<double> anchor_x;
    std::vector<double> anchor_y;
};

struct IterationRecord {
    int iteration = 0;
    std::vector<double> ssr;
    std::vector<double> lambda;
    std::vector<std::uint8_t> accepted;
    long long cum_evals = 0;
};

struct RunTrace {
    long long init_attempts = 0; // function evaluations spent in initialization
    long long total_evals = 0;
    std::vector<IterationRecord> records; // records[0] is the initial cluster
};

// Samples each column uniformly in the box, re-sampling any column whose
// model evaluation fails, up to max_resample attempts. attempts_out (when
// non-null) receives the number of evaluations consumed, failed ones
// included. Column i draws from its own seed-derived stream, so results do
// not depend on the worker count.
ClusterState create_initial_cluster(const Problem& problem, const CgnConfig& config,
                                    long long* attempts_out = nullptr);

// Distance weights of the weighted linear approximation: zero for the anchor
// itself; otherwise the inverse squared box-normalized distance raised to
// gamma. Coincident points are clamped to weight_cap() instead of dividing
// by zero.
std::vector<double> compute_weights(const Matrix& x, int anchor, std::span<const double> range_lo,
                                    std::span<const double> range_hi, double gamma);
double weight_cap();

// Fits the slope by weighted minimum-norm least squares over the member
// differences. Consumes no model evaluations.
LinearModel construct_linear_approximation(const ClusterState& state, int anchor,
                                           const Problem& problem, const CgnConfig& config);

// One damped Gauss-Newton update from the linear model:
// anchor_x + (A^T A + lambda I)^-1 A^T (target - anchor_y).
std::vector<double> propose_step(const ClusterState& state, int member, const LinearModel& model,
                                 std::span<const double> target);

// Evaluates the proposals and applies the accept/reject rule: a proposal is
// accepted only when its SSR strictly decreases (ties and NOT-EVALUABLE are
// rejections); accepted members divide lambda by 10, rejected and frozen
// members multiply it by 10. Frozen members are copied unchanged and consume
// no evaluations. Reduction happens in member order regardless of workers.
ClusterState update_cluster(const ClusterState& state,
                            const std::vector<std::optional<std::vector<double>>>& proposals,
                            const Problem& problem, const CgnConfig& config,
                            std::vector<std::uint8_t>* accepted_out = nullptr,
                            long long* evals_out = nullptr);

// Full driver: initial cluster, then max_iterations rounds of
// approximate-linearize / damped-step / update, stopping early when every
// member is frozen.
std::pair<ClusterState, RunTrace> run(const Problem& problem, const CgnConfig& config);

// Same driver but starting from a caller-supplied initial cluster (shared
// starts between solvers); init_attempts records what its creation cost.
std::pair<ClusterState, RunTrace> run_from(const Problem& problem, const CgnConfig& config,
                                           ClusterState initial, long long init_attempts);

} // namespace cgn
