#include "quadrature.hpp"

#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "errors.hpp"

namespace maxq {

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 QuadratureOptions options) {
    using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;
    // Relative target well below the absolute one; the absolute check below decides.
    constexpr double kRelTol = 1e-12;
    double error = 0.0;
    double l1 = 0.0;
    std::size_t evaluations = 0;
    struct BudgetExhausted {};
    const auto counted = [&](double x) {
        if (++evaluations > options.max_evaluations) throw BudgetExhausted{};
        return f(x);
    };
    double value = 0.0;
    try {
        value = Rule::integrate(counted, lo, hi, options.max_levels, kRelTol, &error, &l1);
    } catch (const BudgetExhausted&) {
        std::ostringstream msg;
        msg << "quadrature on [" << lo << ", " << hi << "] exhausted " << options.max_evaluations
            << " integrand evaluations before reaching abs_tol=" << options.abs_tol;
        throw NumericFailure(msg.str());
    }
    if (!std::isfinite(value) || !(error <= options.abs_tol)) {
        std::ostringstream msg;
        msg << "quadrature did not converge on [" << lo << ", " << hi << "]: estimate=" << value
            << " error=" << error << " L1=" << l1 << " abs_tol=" << options.abs_tol
            << " max_levels=" << options.max_levels;
        throw NumericFailure(msg.str());
    }
    return value;
}

}  // namespace maxq
