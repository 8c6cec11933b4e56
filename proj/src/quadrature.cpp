#include "spisim/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace spisim::quad {
namespace {

struct Node {
    double x, w;
};

// Gauss-Legendre nodes/weights on [-1, 1].
constexpr std::array<Node, 7> kG7{{
    {-9.49107912342758486e-01, 1.29484966168870647e-01},
    {-7.41531185599394460e-01, 2.79705391489276589e-01},
    {-4.05845151377397184e-01, 3.81830050505118312e-01},
    {+0.00000000000000000e+00, 4.17959183673468959e-01},
    {+4.05845151377397184e-01, 3.81830050505118312e-01},
    {+7.41531185599394460e-01, 2.79705391489276589e-01},
    {+9.49107912342758486e-01, 1.29484966168870647e-01},
}};

constexpr std::array<Node, 15> kG15{{
    {-9.87992518020485377e-01, 3.07532419961186465e-02},
    {-9.37273392400705951e-01, 7.03660474881080689e-02},
    {-8.48206583410427206e-01, 1.07159220467171773e-01},
    {-7.24417731360170070e-01, 1.39570677926153908e-01},
    {-5.70972172608538830e-01, 1.66269205816993781e-01},
    {-3.94151347077563385e-01, 1.86161000015561878e-01},
    {-2.01194093997434514e-01, 1.98431485327111246e-01},
    {+0.00000000000000000e+00, 2.02578241925560898e-01},
    {+2.01194093997434514e-01, 1.98431485327111246e-01},
    {+3.94151347077563385e-01, 1.86161000015561878e-01},
    {+5.70972172608538830e-01, 1.66269205816993781e-01},
    {+7.24417731360170070e-01, 1.39570677926153908e-01},
    {+8.48206583410427206e-01, 1.07159220467171773e-01},
    {+9.37273392400705951e-01, 7.03660474881080689e-02},
    {+9.87992518020485377e-01, 3.07532419961186465e-02},
}};

struct PanelEstimate {
    double coarse, fine;
};

PanelEstimate panel(const std::function<double(double)>& f, double a, double b,
                    long& evals) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s7 = 0.0, s15 = 0.0;
    for (const auto& n : kG7) s7 += n.w * f(mid + half * n.x);
    for (const auto& n : kG15) s15 += n.w * f(mid + half * n.x);
    evals += 22;
    return {s7 * half, s15 * half};
}

void adapt(const std::function<double(double)>& f, double a, double b,
           double tol, int depth, QuadResult& acc) {
    auto [coarse, fine] = panel(f, a, b, acc.evaluations);
    const double err = std::abs(fine - coarse);
    if (err <= tol || depth <= 0 || (b - a) < 1e-14 * (1.0 + std::abs(a))) {
        acc.value += fine;
        acc.error += err;
        return;
    }
    const double mid = 0.5 * (a + b);
    adapt(f, a, mid, 0.5 * tol, depth - 1, acc);
    adapt(f, mid, b, 0.5 * tol, depth - 1, acc);
}

constexpr std::array<int, 6> kHaltonBases{2, 3, 5, 7, 11, 13};

double radical_inverse(std::uint64_t i, int base) {
    double inv = 1.0 / base, r = 0.0, f = inv;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

double factorial(int n) {
    double r = 1.0;
    for (int k = 2; k <= n; ++k) r *= k;
    return r;
}

} // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol, int max_depth) {
    QuadResult acc;
    if (a == b) return acc;
    adapt(f, a, b, abs_tol, max_depth, acc);
    return acc;
}

cplx integrate_complex(const std::function<cplx(double)>& f, double a, double b,
                       double abs_tol, double* err) {
    auto re = integrate([&](double x) { return f(x).real(); }, a, b, abs_tol);
    auto im = integrate([&](double x) { return f(x).imag(); }, a, b, abs_tol);
    if (err) *err = re.error + im.error;
    return {re.value, im.value};
}

QuadResult simplex_integrate(const std::function<double(std::span<const double>)>& f,
                             int n, double tau, double abs_tol, std::uint64_t seed,
                             std::size_t qmc_points) {
    if (n < 1 || n > 6) throw std::invalid_argument("simplex_integrate: n must be in [1,6]");
    if (tau < 0) throw std::invalid_argument("simplex_integrate: tau must be >= 0");
    QuadResult out;
    if (tau == 0.0) return out;

    if (n == 1) {
        auto r = integrate([&](double t1) { double v[1]{t1}; return f(std::span<const double>(v, 1)); },
                           0.0, tau, abs_tol);
        return r;
    }
    if (n == 2) {
        long evals = 0;
        auto r = integrate(
            [&](double t2) {
                auto inner = integrate(
                    [&](double t1) {
                        double v[2]{t1, t2};
                        return f(std::span<const double>(v, 2));
                    },
                    0.0, t2, abs_tol / (4.0 * tau));
                evals += inner.evaluations;
                return inner.value;
            },
            0.0, tau, abs_tol);
        r.evaluations += evals;
        return r;
    }
    if (n == 3) {
        long evals = 0;
        auto r = integrate(
            [&](double t3) {
                auto mid = integrate(
                    [&](double t2) {
                        auto inner = integrate(
                            [&](double t1) {
                                double v[3]{t1, t2, t3};
                                return f(std::span<const double>(v, 3));
                            },
                            0.0, t2, abs_tol / (16.0 * tau * tau));
                        evals += inner.evaluations;
                        return inner.value;
                    },
                    0.0, t3, abs_tol / (4.0 * tau));
                evals += mid.evaluations;
                return mid.value;
            },
            0.0, tau, abs_tol);
        r.evaluations += evals;
        return r;
    }

    // Quasi-Monte Carlo: uniform points on the cube, sorted coordinates give
    // uniform samples of the ordered simplex of volume tau^n / n!.
    const double volume = std::pow(tau, n) / factorial(n);
    const int n_blocks = 10;
    const std::size_t per_block = qmc_points / n_blocks;
    std::array<double, 6> u{};
    std::vector<double> t(n);
    std::vector<double> block_means(n_blocks, 0.0);
    double total = 0.0;
    for (int b = 0; b < n_blocks; ++b) {
        double s = 0.0;
        for (std::size_t j = 0; j < per_block; ++j) {
            const std::uint64_t idx = seed + 1 + static_cast<std::uint64_t>(b) * per_block + j;
            halton_point(idx, n, u.data());
            for (int k = 0; k < n; ++k) t[k] = u[k] * tau;
            std::sort(t.begin(), t.begin() + n);
            s += f(std::span<const double>(t.data(), static_cast<std::size_t>(n)));
        }
        block_means[b] = s / static_cast<double>(per_block);
        total += s;
    }
    const std::size_t m = per_block * n_blocks;
    const double mean = total / static_cast<double>(m);
    double var = 0.0;
    for (double bm : block_means) var += (bm - mean) * (bm - mean);
    var /= (n_blocks - 1.0);
    out.value = volume * mean;
    out.error = volume * std::sqrt(var / n_blocks);
    out.evaluations = static_cast<long>(m);
    return out;
}

cplx simplex_integrate_complex(const std::function<cplx(std::span<const double>)>& f,
                               int n, double tau, double abs_tol, std::uint64_t seed,
                               double* err) {
    auto re = simplex_integrate([&](std::span<const double> t) { return f(t).real(); },
                                n, tau, abs_tol, seed);
    auto im = simplex_integrate([&](std::span<const double> t) { return f(t).imag(); },
                                n, tau, abs_tol, seed);
    if (err) *err = re.error + im.error;
    return {re.value, im.value};
}

namespace {

// cumulative rule shared by the real and complex variants
template <typename T>
std::vector<T> cumulative_impl(std::span<const T> f, double h) {
    const std::size_t n = f.size();
    std::vector<T> c(n, T{});
    if (n < 2) return c;
    if (n == 2) {
        c[1] = 0.5 * h * (f[0] + f[1]);
        return c;
    }
    // third-order step to the next point, Simpson across pairs
    for (std::size_t i = 0; i + 1 < n; ++i) {
        T inc;
        if (i + 2 < n)
            inc = (h / 12.0) * (5.0 * f[i] + 8.0 * f[i + 1] - f[i + 2]);
        else
            inc = (h / 12.0) * (-f[i - 1] + 8.0 * f[i] + 5.0 * f[i + 1]);
        c[i + 1] = c[i] + inc;
    }
    return c;
}

} // namespace

std::vector<double> cumulative_uniform(std::span<const double> f, double h) {
    return cumulative_impl(f, h);
}

std::vector<cplx> cumulative_uniform(std::span<const cplx> f, double h) {
    return cumulative_impl(f, h);
}

void halton_point(std::uint64_t index, int dim, double* out) {
    for (int d = 0; d < dim; ++d) out[d] = radical_inverse(index, kHaltonBases[static_cast<std::size_t>(d)]);
}

std::string to_string_impl(BhatMethod m) {
    switch (m) {
        case BhatMethod::AnalyticSquare: return "analytic-square";
        case BhatMethod::AnalyticExponential: return "analytic-exponential";
        case BhatMethod::OverlapQuadrature: return "overlap-quadrature";
        case BhatMethod::NumericMasterEquation: return "numeric-master-equation";
    }
    return "unknown";
}

} // namespace spisim::quad

namespace spisim {
std::string to_string(BhatMethod m) { return quad::to_string_impl(m); }
} // namespace spisim
