#ifndef PDSLAB_FIT_HPP
#define PDSLAB_FIT_HPP

#include <vector>

namespace pdslab {

struct LineFitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    int count = 0;
};

LineFitResult linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Power-law fit of a decaying series:  v(t) ~ C (1+t)^exponent, optionally
// with a log(e+t) correction factor divided out before fitting.
struct DecayFit {
    double exponent = 0.0;
    double constant = 0.0;
    double r_squared = 0.0;
    double t_min = 0.0;
    double t_max = 0.0;
    bool log_correction_used = false;
    // exponent refitted on the upper half of the window; |delta| small for a
    // genuine power law
    double exponent_half_window = 0.0;
};

DecayFit fit_power_law(const std::vector<double>& t, const std::vector<double>& v,
                       bool log_correction);

// Exponential-rate fit:  v(t) ~ C e^{-rate t}; returns rate (positive = decay),
// fitted over the trailing fraction of the samples.
double fit_exp_rate(const std::vector<double>& t, const std::vector<double>& v,
                    double tail_fraction = 0.5);

}  // namespace pdslab

#endif
