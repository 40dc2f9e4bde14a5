#include "pdslab/fit.hpp"

#include <algorithm>
#include <cmath>

#include "pdslab/errors.hpp"

namespace pdslab {

LineFitResult linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    LineFitResult f;
    const size_t n = std::min(x.size(), y.size());
    if (n < 2) return f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0) return f;
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    f.count = (int)n;
    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / n;
    for (size_t i = 0; i < n; ++i) {
        const double e = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += e * e;
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
    }
    f.r2 = (ss_tot > 0) ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

DecayFit fit_power_law(const std::vector<double>& t, const std::vector<double>& v,
                       bool log_correction) {
    if (t.size() != v.size() || t.size() < 3) throw Error("fit_power_law: need >= 3 samples");
    std::vector<double> lx, ly;
    for (size_t i = 0; i < t.size(); ++i) {
        double w = v[i];
        if (log_correction) w /= std::log(std::exp(1.0) + t[i]);
        if (w > 0 && std::isfinite(w)) {
            lx.push_back(std::log1p(t[i]));
            ly.push_back(std::log(w));
        }
    }
    DecayFit out;
    out.log_correction_used = log_correction;
    out.t_min = t.front();
    out.t_max = t.back();
    if (lx.size() < 3) {
        out.exponent = 0.0;
        out.r_squared = 0.0;
        return out;
    }
    const LineFitResult f = linear_fit(lx, ly);
    out.exponent = f.slope;
    out.constant = std::exp(f.intercept);
    out.r_squared = f.r2;

    // Stability probe: refit on the upper half of the log-t window.
    const double mid = 0.5 * (lx.front() + lx.back());
    std::vector<double> hx, hy;
    for (size_t i = 0; i < lx.size(); ++i)
        if (lx[i] >= mid) {
            hx.push_back(lx[i]);
            hy.push_back(ly[i]);
        }
    out.exponent_half_window = (hx.size() >= 3) ? linear_fit(hx, hy).slope : f.slope;
    return out;
}

double fit_exp_rate(const std::vector<double>& t, const std::vector<double>& v,
                    double tail_fraction) {
    if (t.size() != v.size() || t.size() < 3) throw Error("fit_exp_rate: need >= 3 samples");
    const double t_lo = t.back() - tail_fraction * (t.back() - t.front());
    std::vector<double> xs, ys;
    for (size_t i = 0; i < t.size(); ++i)
        if (t[i] >= t_lo && v[i] > 0 && std::isfinite(v[i])) {
            xs.push_back(t[i]);
            ys.push_back(std::log(v[i]));
        }
    if (xs.size() < 2) return 0.0;
    return -linear_fit(xs, ys).slope;
}

}  // namespace pdslab
