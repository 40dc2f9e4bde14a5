#ifndef PDSLAB_ODE_HPP
#define PDSLAB_ODE_HPP

#include <functional>
#include <vector>

#include "pdslab/matkernel.hpp"

namespace pdslab {

using MatrixRhs = std::function<CMatrix(double, const CMatrix&)>;

struct OdeOptions {
    double rtol = 1e-9;
    double atol = 1e-9;
    double h_init = 1e-2;
    double h_max = std::numeric_limits<double>::infinity();
    long max_steps = 50'000'000;
};

struct OdeStats {
    long accepted = 0;
    long rejected = 0;
};

// Dormand-Prince 5(4) with PI step-size control on a complex matrix state.
// Steps land exactly on requested sample times; on_sample fires at each.
void ode_integrate(const MatrixRhs& f, double t0, const CMatrix& y0,
                   const std::vector<double>& t_samples,
                   const std::function<void(double, const CMatrix&)>& on_sample,
                   const OdeOptions& opt = {}, OdeStats* stats = nullptr);

// Single-endpoint convenience.
CMatrix ode_integrate_to(const MatrixRhs& f, double t0, const CMatrix& y0, double t1,
                         const OdeOptions& opt = {}, OdeStats* stats = nullptr);

}  // namespace pdslab

#endif
