#include "eitlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace eitlab {

namespace {

// G7/K15 nodes and weights on [-1, 1]; Kronrod nodes are the union of the
// Gauss-7 nodes and 8 extra points.
constexpr double kron_nodes[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898,  0.0,                0.207784955007898,
     0.405845151377397,  0.586087235467691,  0.741531185599394,
     0.864864423359769,  0.949107912342759,  0.991455371120813};

constexpr double kron_weights[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};

constexpr double gauss_weights[7] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870};

struct Panel {
    double a, b;
    cplx value;
    double err;
};

Panel evaluate_panel(const std::function<cplx(double)>& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    cplx gauss{0.0, 0.0};
    cplx kron{0.0, 0.0};
    for (int i = 0; i < 15; ++i) {
        const cplx y = f(mid + half * kron_nodes[i]);
        kron += kron_weights[i] * y;
        if (i % 2 == 1) gauss += gauss_weights[i / 2] * y;
    }
    gauss *= half;
    kron *= half;
    return Panel{a, b, kron, std::abs(kron - gauss)};
}

} // namespace

cplx integrate_gk(const std::function<cplx(double)>& f, double a, double b,
                  double rel_tol, double abs_tol, int max_intervals) {
    std::vector<Panel> panels;
    panels.push_back(evaluate_panel(f, a, b));
    while (static_cast<int>(panels.size()) < max_intervals) {
        cplx total{0.0, 0.0};
        double err = 0.0;
        for (const Panel& p : panels) {
            total += p.value;
            err += p.err;
        }
        if (err <= std::max(abs_tol, rel_tol * std::abs(total))) return total;
        auto worst = std::max_element(panels.begin(), panels.end(),
                                      [](const Panel& x, const Panel& y) {
                                          return x.err < y.err;
                                      });
        const Panel split = *worst;
        const double mid = 0.5 * (split.a + split.b);
        *worst = evaluate_panel(f, split.a, mid);
        panels.push_back(evaluate_panel(f, mid, split.b));
    }
    double err = 0.0;
    for (const Panel& p : panels) err += p.err;
    std::ostringstream os;
    os << "quadrature failed to converge on [" << a << ", " << b << "]: "
       << panels.size() << " intervals, error estimate " << err;
    throw numerical_error(os.str());
}

} // namespace eitlab
