#include "fraclap/quadrature.hpp"

namespace fraclap {

const QuadratureRule& triangle_degree4()
{
    static const QuadratureRule rule = [] {
        constexpr double a = 0.44594849091596488631832925388305;
        constexpr double wa = 0.22338158967801146569500700843312;
        constexpr double b = 0.091576213509770743459571463402202;
        constexpr double wb = 0.10995174365532186763832632490021;
        QuadratureRule r;
        r.degree = 4;
        r.points = {
            {a, a, 1.0 - 2.0 * a}, {a, 1.0 - 2.0 * a, a}, {1.0 - 2.0 * a, a, a},
            {b, b, 1.0 - 2.0 * b}, {b, 1.0 - 2.0 * b, b}, {1.0 - 2.0 * b, b, b},
        };
        r.weights = {0.5 * wa, 0.5 * wa, 0.5 * wa, 0.5 * wb, 0.5 * wb, 0.5 * wb};
        return r;
    }();
    return rule;
}

} // namespace fraclap
