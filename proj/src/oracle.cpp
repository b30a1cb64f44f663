#include "rydft/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace rydft {

DensityMatrix3 DensityMatrix3::pure_1() {
    DensityMatrix3 r;
    r(1, 1) = 1.0;
    return r;
}

DensityMatrix3 DensityMatrix3::qubit(cplx c0, cplx c1) {
    DensityMatrix3 r;
    r(1, 1) = c1 * std::conj(c1);
    r(1, 2) = c1 * std::conj(c0);
    r(2, 1) = c0 * std::conj(c1);
    r(2, 2) = c0 * std::conj(c0);
    return r;
}

double DensityMatrix3::trace() const { return (m[0][0] + m[1][1] + m[2][2]).real(); }

double DensityMatrix3::hermiticity_defect() const {
    double d = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) d = std::max(d, std::abs(m[i][j] - std::conj(m[j][i])));
    return d;
}

bool DensityMatrix3::positive_semidefinite(double tol) const {
    // principal minors of the Hermitian part
    double d1 = m[0][0].real();
    double d2 = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).real();
    cplx det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    return d1 >= -tol && d2 >= -tol && det.real() >= -tol;
}

double DensityMatrix3::max_abs_diff(const DensityMatrix3& other) const {
    double d = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) d = std::max(d, std::abs(m[i][j] - other.m[i][j]));
    return d;
}

namespace {

using M3 = DensityMatrix3;

M3 lindblad_rhs(const M3& rho, double gamma, double omega) {
    // H = i*omega(|r><1| - |1><r|), c = |1><r|, basis {r,1,0}
    M3 out;
    // commutator: H rho - rho H
    // H has entries H(0,1) = i*omega, H(1,0) = -i*omega
    cplx iom(0.0, omega);
    // (H rho)(i,j) = sum_k H(i,k) rho(k,j)
    M3 hr, rh;
    for (int j = 0; j < 3; ++j) {
        hr(0, j) = iom * rho(1, j);
        hr(1, j) = -iom * rho(0, j);
        hr(2, j) = 0.0;
    }
    for (int i = 0; i < 3; ++i) {
        rh(i, 0) = rho(i, 1) * (-iom);
        rh(i, 1) = rho(i, 0) * iom;
        rh(i, 2) = 0.0;
    }
    // c^dag c = |r><r| ; c rho c^dag = |1><1| * rho_rr
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            cplx comm = hr(i, j) - rh(i, j);
            cplx damp = 0.0;
            if (i == 0) damp += 0.5 * rho(0, j);
            if (j == 0) damp += 0.5 * rho(i, 0);
            cplx feed = (i == 1 && j == 1) ? rho(0, 0) : cplx(0.0);
            out(i, j) = cplx(0, -1) * comm - gamma * damp + gamma * feed;
        }
    return out;
}

M3 axpy(const M3& a, double s, const M3& b) {
    M3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = a(i, j) + s * b(i, j);
    return r;
}

}  // namespace

DensityMatrix3 master_equation_oracle(double gamma, double omega, const DensityMatrix3& rho0,
                                      double pulse_angle) {
    if (omega <= 0.0) throw std::invalid_argument("oracle: omega must be positive");
    if (rho0.hermiticity_defect() > 1e-9) throw std::invalid_argument("oracle: rho0 not Hermitian");
    const double t_pi = M_PI / (2.0 * omega);
    const double duration = pulse_angle / (2.0 * omega);
    const int steps_per_tpi = 2000;
    const int nsteps = std::max(1, static_cast<int>(std::ceil(duration / t_pi * steps_per_tpi)));
    const double h = duration / nsteps;

    M3 rho = rho0;
    for (int s = 0; s < nsteps; ++s) {
        M3 k1 = lindblad_rhs(rho, gamma, omega);
        M3 k2 = lindblad_rhs(axpy(rho, h / 2, k1), gamma, omega);
        M3 k3 = lindblad_rhs(axpy(rho, h / 2, k2), gamma, omega);
        M3 k4 = lindblad_rhs(axpy(rho, h, k3), gamma, omega);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                rho(i, j) += h / 6.0 * (k1(i, j) + 2.0 * k2(i, j) + 2.0 * k3(i, j) + k4(i, j));
        if (!std::isfinite(rho(0, 0).real()))
            throw std::runtime_error("oracle: integrator diverged at step " + std::to_string(s) +
                                     " of " + std::to_string(nsteps));
    }
    return rho;
}

DensityMatrix3 apply_rd_channel_2pi(const ErrorChannel& ch, const DensityMatrix3& rho0) {
    // ideal 2pi-pulse unitary in this drive convention: |r>->-|r>, |1>->-|1>
    M3 rho;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double si = (i == 2) ? 1.0 : -1.0;
            double sj = (j == 2) ? 1.0 : -1.0;
            rho(i, j) = si * sj * rho0(i, j);
        }
    M3 out;
    const Species sp = rb87();
    for (const auto& e : ch.events) {
        double w = std::norm(e.amplitude);
        switch (e.kind) {
            case KrausEvent::Kind::NoJump: {
                // M = diag(r_coeff, alpha, beta) in {r,1,0}
                double d[3] = {e.r_coeff, e.alpha, e.beta};
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) out(i, j) += w * d[i] * d[j] * rho(i, j);
                break;
            }
            case KrausEvent::Kind::JumpToRydberg:
                out(0, 0) += w * rho(1, 1);  // |r><1|
                break;
            case KrausEvent::Kind::JumpToHyperfine:
                if (e.hf_target == sp.qubit1)
                    out(1, 1) += w * rho(1, 1);  // |1><1|
                // other hyperfine targets leave the 3-level block
                break;
            case KrausEvent::Kind::DephaseZ: {
                double d[3] = {1.0, -1.0, 1.0};
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) out(i, j) += w * d[i] * d[j] * rho(i, j);
                break;
            }
            case KrausEvent::Kind::AtomLoss:
                break;
        }
    }
    return out;
}

}  // namespace rydft
