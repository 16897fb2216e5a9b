#include "nlcap/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "nlcap/errors.hpp"

namespace nlcap {

namespace {

// Newton iteration on P_n with the Tricomi initial guess.
QuadratureRule legendre_reference(int n) {
    QuadratureRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p2) / j;
            }
            dp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // recompute derivative at the converged node
        double p0 = 1.0, p1 = 0.0;
        for (int j = 1; j <= n; ++j) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p2) / j;
        }
        dp = n * (x * p0 - p1) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    return r;
}

const QuadratureRule& legendre_cached(int n) {
    static std::mutex mu;
    static std::map<int, QuadratureRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, legendre_reference(n)).first;
    return it->second;
}

}  // namespace

QuadratureRule gauss_legendre(int n, double a, double b) {
    if (n < 1) throw ParameterError("gauss_legendre: n must be >= 1");
    QuadratureRule r = legendre_cached(n);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    for (int i = 0; i < n; ++i) {
        r.nodes[i] = mid + half * r.nodes[i];
        r.weights[i] *= half;
    }
    return r;
}

QuadratureRule gauss_laguerre(int n) {
    if (n < 1) throw ParameterError("gauss_laguerre: n must be >= 1");
    QuadratureRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    // long double recurrences: the double version loses ~1e-13 in the weight sum at n = 128
    using real = long double;
    const auto laguerre = [n](real x, real& ln, real& lnm1) {
        real p1 = 1.0L, p2 = 0.0L;
        for (int j = 1; j <= n; ++j) {
            const real p3 = p2;
            p2 = p1;
            p1 = ((2.0L * j - 1.0L - x) * p2 - (j - 1.0L) * p3) / j;
        }
        ln = p1;
        lnm1 = p2;
    };
    real x = 0.0L;
    std::vector<real> roots(n);
    for (int i = 0; i < n; ++i) {
        // asymptotic starting points, refined from previous roots
        if (i == 0) {
            x = 3.0L / (1.0L + 2.4L * n);
        } else if (i == 1) {
            x += 15.0L / (1.0L + 2.5L * n);
        } else {
            const real ai = i - 1;
            x += ((1.0L + 2.55L * ai) / (1.9L * ai)) * (x - roots[i - 2]);
        }
        real ln = 0.0L, lnm1 = 0.0L;
        for (int it = 0; it < 200; ++it) {
            laguerre(x, ln, lnm1);
            const real dl = n * (ln - lnm1) / x;
            const real z1 = x;
            x = z1 - ln / dl;
            if (std::abs(x - z1) <= 1e-18L * std::abs(x)) break;
        }
        roots[i] = x;
        laguerre(x, ln, lnm1);
        // w = x / ((n+1)^2 L_{n+1}(x)^2), and L_{n+1} = -n L_{n-1} / (n+1) at a root of L_n
        const real ln1 = -static_cast<real>(n) * lnm1 / (n + 1.0L);
        r.nodes[i] = static_cast<double>(x);
        r.weights[i] = static_cast<double>(x / ((n + 1.0L) * (n + 1.0L) * ln1 * ln1));
    }
    return r;
}

}  // namespace nlcap
