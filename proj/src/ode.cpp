#include "pdslab/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pdslab/errors.hpp"

namespace pdslab {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

double error_norm(const CMatrix& err, const CMatrix& y0, const CMatrix& y1, double atol,
                  double rtol) {
    double acc = 0.0;
    const auto* pe = err.data();
    const auto* p0 = y0.data();
    const auto* p1 = y1.data();
    const Eigen::Index n = err.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double scale = atol + rtol * std::max(std::abs(p0[i]), std::abs(p1[i]));
        const double q = std::abs(pe[i]) / scale;
        acc += q * q;
    }
    return std::sqrt(acc / (double)n);
}

}  // namespace

void ode_integrate(const MatrixRhs& f, double t0, const CMatrix& y0,
                   const std::vector<double>& t_samples,
                   const std::function<void(double, const CMatrix&)>& on_sample,
                   const OdeOptions& opt, OdeStats* stats) {
    for (size_t i = 1; i < t_samples.size(); ++i)
        if (t_samples[i] < t_samples[i - 1])
            throw Error("ode_integrate: samples must be nondecreasing");
    if (!t_samples.empty() && t_samples.front() < t0)
        throw Error("ode_integrate: sample before start time");

    double t = t0;
    CMatrix y = y0;
    CMatrix k1 = f(t, y);
    double h = std::min(opt.h_init, opt.h_max);
    double err_prev = 1.0;
    size_t next = 0;
    long steps = 0, rejected = 0;

    while (next < t_samples.size() && t_samples[next] <= t0) {
        on_sample(t_samples[next], y);
        ++next;
    }
    if (next >= t_samples.size()) {
        if (stats) *stats = {steps, rejected};
        return;
    }
    const double t_end = t_samples.back();

    CMatrix k2, k3, k4, k5, k6, k7, y1, err;
    while (t < t_end) {
        if (++steps > opt.max_steps) throw ToleranceUnreachable("ode_integrate: step budget spent");
        bool hit_sample = false;
        double hs = h;
        if (t + hs >= t_samples[next]) {
            hs = t_samples[next] - t;
            hit_sample = true;
        }
        if (hs < 1e-14 * std::max(1.0, std::abs(t))) {
            if (hit_sample) {
                // Sample coincides with the current time within roundoff.
                on_sample(t_samples[next], y);
                ++next;
                if (next >= t_samples.size()) break;
                continue;
            }
            std::ostringstream os;
            os << "ode_integrate: step size underflow at t = " << t;
            throw StepUnderflow(os.str());
        }

        k2 = f(t + c2 * hs, y + hs * (a21 * k1));
        k3 = f(t + c3 * hs, y + hs * (a31 * k1 + a32 * k2));
        k4 = f(t + c4 * hs, y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
        k5 = f(t + c5 * hs, y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        k6 = f(t + hs, y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        y1 = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        k7 = f(t + hs, y1);
        err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double en = error_norm(err, y, y1, opt.atol, opt.rtol);
        if (en <= 1.0) {
            t += hs;
            y.swap(y1);
            k1.swap(k7);  // first-same-as-last
            if (hit_sample) {
                on_sample(t_samples[next], y);
                ++next;
                if (next >= t_samples.size()) break;
            }
            const double grow =
                0.9 * std::pow(std::max(en, 1e-10), -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
            h = hs * std::clamp(grow, 0.2, 5.0);
            h = std::min(h, opt.h_max);
            err_prev = std::max(en, 1e-10);
        } else {
            ++rejected;
            h = hs * std::clamp(0.9 * std::pow(en, -1.0 / 5.0), 0.1, 0.9);
            if (h < 1e-14 * std::max(1.0, std::abs(t))) {
                std::ostringstream os;
                os << "ode_integrate: cannot reach tolerance at t = " << t;
                throw StepUnderflow(os.str());
            }
        }
    }
    if (stats) *stats = {steps, rejected};
}

CMatrix ode_integrate_to(const MatrixRhs& f, double t0, const CMatrix& y0, double t1,
                         const OdeOptions& opt, OdeStats* stats) {
    CMatrix out = y0;
    if (t1 <= t0) return out;
    ode_integrate(f, t0, y0, {t1}, [&out](double, const CMatrix& y) { out = y; }, opt, stats);
    return out;
}

}  // namespace pdslab
