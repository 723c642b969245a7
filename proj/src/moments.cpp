#include "evo/moments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace evo {

namespace {

// (2k)! / (2^k k!) without factorial overflow: product of odd numbers up to 2k-1.
double double_factorial_odd(int k) {
    double p = 1.0;
    for (int j = 1; j <= k; ++j) p *= 2.0 * j - 1.0;
    return p;
}

} // namespace

moment_set numeric_moments(const grid_field& u, double eps, int k_max) {
    if (!(eps > 0.0)) throw validation_error("numeric_moments: eps must be positive");
    if (k_max < 2 || k_max > 12) {
        throw validation_error("numeric_moments: k_max must lie in [2, 12]");
    }
    const int n = u.grid.n;
    const double h = u.grid.h;
    int jmax = 0;
    double umax = u.v[0];
    for (int i = 1; i < n; ++i) {
        if (u.v[i] > umax) {
            umax = u.v[i];
            jmax = i;
        }
    }
    if (jmax == 0 || jmax == n - 1) {
        throw boundary_contact_error("numeric_moments: density mass touches the grid boundary");
    }
    std::vector<double> q(n);
    for (int i = 0; i < n; ++i) q[i] = std::exp((u.v[i] - umax) / eps);
    const double Z = trapezoid_raw(q.data(), n, h);
    std::vector<double> xq(n);
    for (int i = 0; i < n; ++i) xq[i] = u.grid.x(i) * q[i];
    moment_set out;
    out.M1 = trapezoid_raw(xq.data(), n, h) / Z;
    out.Mc.resize(k_max - 1);
    std::vector<double> pw(n, 1.0);
    for (int i = 0; i < n; ++i) pw[i] = u.grid.x(i) - out.M1;
    std::vector<double> acc(n);
    for (int i = 0; i < n; ++i) acc[i] = pw[i];
    for (int k = 2; k <= k_max; ++k) {
        for (int i = 0; i < n; ++i) acc[i] *= pw[i];
        for (int i = 0; i < n; ++i) xq[i] = acc[i] * q[i];
        out.Mc[k - 2] = trapezoid_raw(xq.data(), n, h) / Z;
    }
    return out;
}

double gaussian_gamma(int k, double M2) {
    if (k < 0) throw validation_error("gaussian_gamma: k must be nonnegative");
    if (!(M2 > 0.0)) throw validation_error("gaussian_gamma: M2 must be positive");
    return std::sqrt(2.0 * M_PI) * double_factorial_odd(k) * std::pow(M2, k + 0.5);
}

moment_prediction asymptotic_moments(const limit_state& limit, const correction_state& corr,
                                     int k_max) {
    if (k_max < 2 || k_max > 12) {
        throw validation_error("asymptotic_moments: k_max must lie in [2, 12]");
    }
    if (!(limit.d2u_at_xbar < 0.0)) {
        throw degeneracy_error(
            "asymptotic_moments: potential is not concave at the concentration point");
    }
    const double P = 1.0 / -limit.d2u_at_xbar;
    const double d3 = limit.d3u_at_xbar;
    moment_prediction out;
    out.M1 = 0.5 * P * P * d3 + P * corr.dw_at_xbar;
    out.Mk.resize(k_max - 1);
    for (int k = 2; k <= k_max; ++k) {
        if (k % 2 == 0) {
            const int m = k / 2;
            out.Mk[k - 2] = double_factorial_odd(m) * std::pow(P, m);
        } else {
            const int m = (k - 1) / 2;
            out.Mk[k - 2] =
                (m / 3.0) * double_factorial_odd(m + 1) * d3 * std::pow(P, m + 2);
        }
    }
    return out;
}

moment_error_series moment_errors(const eps_trajectory& eps_traj,
                                  const correction_trajectory& corr, const weight_fn& psi,
                                  double eps, int k_max) {
    if (!psi.is_constant()) {
        throw validation_error("moment_errors: moment expansions require a constant weight");
    }
    const size_t ns = eps_traj.u_snapshots.size();
    if (ns != corr.w_snapshots.size() || ns != corr.snapshot_times.size()) {
        throw validation_error("moment_errors: snapshot counts differ between trajectories");
    }
    moment_error_series out;
    out.labels.reserve(k_max);
    for (int k = 1; k <= k_max; ++k) out.labels.push_back("moment" + std::to_string(k));
    out.err.assign(k_max, {});
    out.sup.assign(k_max, 0.0);
    out.mc_eps.assign(k_max - 1, {});
    out.mc_pred.assign(k_max - 1, {});
    for (size_t s = 0; s < ns; ++s) {
        const double tE = eps_traj.snapshot_times[s];
        const double tL = corr.snapshot_times[s];
        if (std::abs(tE - tL) > 1e-9 * (1.0 + std::abs(tL))) {
            throw validation_error("moment_errors: snapshot times are not aligned");
        }
        const limit_state& ls = corr.limit.snapshots[s];
        correction_state cs;
        const int di = corr.snapshot_index[s];
        cs.t = tL;
        cs.y = corr.y[di];
        cs.K = corr.K[di];
        cs.J = corr.J[di];
        cs.dw_at_xbar = corr.dw_at_xbar[di];
        cs.d2w_at_xbar = corr.d2w_at_xbar[di];
        const moment_set nm = numeric_moments(eps_traj.u_snapshots[s], eps, k_max);
        const moment_prediction mp = asymptotic_moments(ls, cs, k_max);

        out.times.push_back(tL);
        out.m1_eps.push_back(nm.M1);
        const double m1_pred = ls.xbar + eps * mp.M1;
        out.m1_pred.push_back(m1_pred);
        double e = std::abs(nm.M1 - m1_pred);
        out.err[0].push_back(e);
        out.sup[0] = std::max(out.sup[0], e);
        for (int k = 2; k <= k_max; ++k) {
            const double scale = std::pow(eps, k % 2 == 0 ? k / 2 : (k + 1) / 2);
            const double pred = scale * mp.Mk[k - 2];
            out.mc_eps[k - 2].push_back(nm.Mc[k - 2]);
            out.mc_pred[k - 2].push_back(pred);
            e = std::abs(nm.Mc[k - 2] - pred);
            out.err[k - 1].push_back(e);
            out.sup[k - 1] = std::max(out.sup[k - 1], e);
        }
    }
    return out;
}

} // namespace evo
