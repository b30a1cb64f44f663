#pragma once

#include <array>
#include <complex>

#include "rydft/channels.hpp"

namespace rydft {

// Density matrix of the driven three-level system, basis order {|r>,|1>,|0>}.
struct DensityMatrix3 {
    std::array<std::array<cplx, 3>, 3> m{};

    cplx& operator()(int i, int j) { return m[i][j]; }
    const cplx& operator()(int i, int j) const { return m[i][j]; }

    static DensityMatrix3 pure_1();                  // rho = |1><1|
    static DensityMatrix3 qubit(cplx c0, cplx c1);   // (c1|1>+c0|0>) pure state
    double trace() const;
    double hermiticity_defect() const;
    bool positive_semidefinite(double tol = 1e-9) const;
    double max_abs_diff(const DensityMatrix3& other) const;
};

// Integrates d(rho)/dt = -i[H_d, rho] - (gamma/2){c^dag c, rho} + gamma c rho c^dag
// with H_d = i*Omega(|r><1| - |1><r|) and c = |1><r|, for a pulse of the given
// angle (duration angle/(2 Omega)), fixed-step RK4 with step <= t_pi/2000.
DensityMatrix3 master_equation_oracle(double gamma, double omega, const DensityMatrix3& rho0,
                                      double pulse_angle);

// Applies the ideal 2pi-pulse unitary followed by the channel's Kraus set,
// restricted to the {r,1,0} block (hyperfine leak branches remove weight).
DensityMatrix3 apply_rd_channel_2pi(const ErrorChannel& ch, const DensityMatrix3& rho0);

}  // namespace rydft
