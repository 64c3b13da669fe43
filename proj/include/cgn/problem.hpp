#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cgn {

// A nonlinear least-squares instance: minimize ||evaluate(x) - target||^2
// over the box-described initial range. evaluate returns nullopt when the
// model cannot be evaluated at x (the NOT-EVALUABLE outcome); it must be
// deterministic and safe to call from several threads at once.
struct Problem {
    std::string id;
    int dim_x = 0;
    int dim_y = 0;
    std::vector<double> target;
    std::vector<double> range_lo;
    std::vector<double> range_hi;
    std::function<std::optional<std::vector<double>>(std::span<const double>)> evaluate;
};

// Sum of squared residuals ||y - target||^2.
double sum_squared_residuals(std::span<const double> y, std::span<const double> target);

} // namespace cgn
