#pragma once

#include <span>
#include <vector>

#include "attack/records.hpp"

namespace caa::eval {

struct TestResult {
    double statistic = 0.0;
    double df = 0.0; // Welch-Satterthwaite (t-test only)
    double p_value = 1.0;
};

// Regularized incomplete beta I_x(a,b) via continued fraction.
double incomplete_beta(double a, double b, double x);

// Two-sided p for a Student-t statistic with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

TestResult welch_t_test(std::span<const double> a, std::span<const double> b);
TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

enum class Metric { Acc, DistToTarget };

// Two-sided per-sample test of a metric difference between two record sets.
TestResult significance(const std::vector<attack::OutcomeRecord>& records_a,
                        const std::vector<attack::OutcomeRecord>& records_b, Metric metric,
                        bool rank_based = false);

} // namespace caa::eval
