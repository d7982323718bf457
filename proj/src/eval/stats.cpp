#include "eval/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/error.hpp"

namespace caa::eval {

namespace {

// Continued-fraction kernel (modified Lentz).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-14;
    constexpr double kFpMin = 1e-300;

    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

} // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
    if (df <= 0.0) return 1.0;
    if (!std::isfinite(t)) return 0.0;
    const double x = df / (df + t * t);
    return std::clamp(incomplete_beta(df / 2.0, 0.5, x), 0.0, 1.0);
}

TestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    const std::size_t na = a.size(), nb = b.size();
    if (na < 2 || nb < 2)
        raise(ErrorKind::Protocol, "significance test needs at least 2 records per side");

    auto mean_var = [](std::span<const double> v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= double(v.size());
        double s2 = 0.0;
        for (double x : v) s2 += (x - m) * (x - m);
        s2 /= double(v.size() - 1);
        return std::pair<double, double>(m, s2);
    };
    const auto [ma, va] = mean_var(a);
    const auto [mb, vb] = mean_var(b);

    TestResult res;
    const double sa = va / double(na), sb = vb / double(nb);
    if (sa + sb == 0.0) {
        res.statistic = 0.0;
        res.df = double(na + nb - 2);
        res.p_value = (ma == mb) ? 1.0 : 0.0;
        return res;
    }
    res.statistic = (ma - mb) / std::sqrt(sa + sb);
    res.df = (sa + sb) * (sa + sb) /
             (sa * sa / double(na - 1) + sb * sb / double(nb - 1));
    res.p_value = student_t_two_sided_p(res.statistic, res.df);
    return res;
}

TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
    const std::size_t na = a.size(), nb = b.size();
    if (na < 2 || nb < 2)
        raise(ErrorKind::Protocol, "significance test needs at least 2 records per side");

    struct Entry {
        double value;
        int side;
    };
    std::vector<Entry> all;
    all.reserve(na + nb);
    for (double x : a) all.push_back({x, 0});
    for (double x : b) all.push_back({x, 1});
    std::sort(all.begin(), all.end(),
              [](const Entry& l, const Entry& r) { return l.value < r.value; });

    // midranks with tie correction
    double rank_sum_a = 0.0;
    double tie_term = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j + 1 < all.size() && all[j + 1].value == all[i].value) ++j;
        const double midrank = 0.5 * double(i + j) + 1.0;
        const double ties = double(j - i + 1);
        if (ties > 1) tie_term += ties * (ties * ties - 1.0);
        for (std::size_t k = i; k <= j; ++k)
            if (all[k].side == 0) rank_sum_a += midrank;
        i = j + 1;
    }

    const double n = double(na + nb);
    const double u_a = rank_sum_a - double(na) * (double(na) + 1.0) / 2.0;
    const double mean_u = double(na) * double(nb) / 2.0;
    const double var_u = double(na) * double(nb) / 12.0 *
                         ((n + 1.0) - tie_term / (n * (n - 1.0)));

    TestResult res;
    if (var_u <= 0.0) {
        res.statistic = 0.0;
        res.p_value = 1.0;
        return res;
    }
    const double z = (u_a - mean_u) / std::sqrt(var_u);
    res.statistic = z;
    res.p_value = std::clamp(std::erfc(std::fabs(z) / std::sqrt(2.0)), 0.0, 1.0);
    return res;
}

TestResult significance(const std::vector<attack::OutcomeRecord>& records_a,
                        const std::vector<attack::OutcomeRecord>& records_b, Metric metric,
                        bool rank_based) {
    auto extract = [&](const std::vector<attack::OutcomeRecord>& recs) {
        std::vector<double> v;
        v.reserve(recs.size());
        for (const auto& r : recs)
            v.push_back(metric == Metric::Acc ? (r.correct ? 1.0 : 0.0) : r.d_target);
        return v;
    };
    const std::vector<double> a = extract(records_a);
    const std::vector<double> b = extract(records_b);
    return rank_based ? mann_whitney_u(a, b) : welch_t_test(a, b);
}

} // namespace caa::eval
