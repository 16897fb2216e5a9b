#pragma once

#include <cstddef>
#include <vector>

namespace nlcap {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }

    template <class F>
    double integrate(F&& f) const {
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
        return s;
    }
};

/// n-point Gauss-Legendre rule mapped onto [a, b]. Nodes ascending.
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// n-point Gauss-Laguerre rule for \int_0^inf e^{-x} f(x) dx.
QuadratureRule gauss_laguerre(int n);

}  // namespace nlcap
