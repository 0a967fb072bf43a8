#include "finres/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "finres/errors.hpp"

namespace finres {

namespace {

constexpr std::complex<double> kImag{0.0, 1.0};

double ness_denominator(const LatticeConfig& lat) {
    const double J2 = lat.tunneling * lat.tunneling;
    return (4.0 * J2 + lat.gamma_l * lat.gamma_r) * (lat.gamma_l + lat.gamma_r);
}

}  // namespace

NessState ness(double delta_n, double n_bar, const LatticeConfig& lat) {
    lat.validate();
    if (lat.sites < 2)
        throw ConfigError("ness: the steady-state ladder needs at least two sites");
    if (!(lat.gamma_l + lat.gamma_r > 0.0))
        throw ConfigError("ness: at least one reservoir coupling must be positive");

    const int m = lat.sites;
    const double J2 = lat.tunneling * lat.tunneling;
    const double den = ness_denominator(lat);
    const double gl = lat.gamma_l, gr = lat.gamma_r;

    NessState st;
    st.current = 4.0 * gl * gr * J2 / den * delta_n;
    const double asym = 4.0 * (gl - gr) * J2;
    st.n_first = n_bar + (asym + gl * gr * gr + gl * gl * gr) / (2.0 * den) * delta_n;
    st.n_bulk = n_bar + (asym + gl * gr * gr - gl * gl * gr) / (2.0 * den) * delta_n;
    st.n_last = n_bar + (asym - gl * gr * gr - gl * gl * gr) / (2.0 * den) * delta_n;

    st.sigma = Eigen::MatrixXcd::Zero(m, m);
    st.sigma(0, 0) = st.n_first;
    st.sigma(m - 1, m - 1) = st.n_last;
    for (int l = 1; l + 1 < m; ++l)
        st.sigma(l, l) = st.n_bulk;
    const std::complex<double> coh = kImag * st.current / (2.0 * lat.tunneling);
    for (int l = 0; l + 1 < m; ++l) {
        st.sigma(l, l + 1) = coh;
        st.sigma(l + 1, l) = std::conj(coh);
    }

    // fixed-point certificate against the stationary right-hand side
    SystemState probe;
    probe.sigma = st.sigma;
    const auto rhs = spdm_rhs(probe, lat, std::nullopt,
                              EvolutionMode::stationary(n_bar + 0.5 * delta_n,
                                                        n_bar - 0.5 * delta_n));
    const double scale = std::max(1.0, std::abs(n_bar) + std::abs(delta_n));
    if (rhs.cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw NumericalError("ness: constructed state failed the fixed-point certificate");
    return st;
}

EffSpectrum heff_spectrum(const LatticeConfig& lat) {
    lat.validate();
    const int m = lat.sites;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(m, m);
    for (int i = 0; i < m; ++i)
        h(i, i) = lat.eps_s;
    for (int i = 0; i + 1 < m; ++i) {
        h(i, i + 1) = -lat.tunneling;
        h(i + 1, i) = -lat.tunneling;
    }
    h(0, 0) -= kImag * 0.5 * lat.gamma_l;
    h(m - 1, m - 1) -= kImag * 0.5 * lat.gamma_r;

    EffSpectrum spec;
    if (m == 1) {
        spec.eigenvalues = {h(0, 0)};
    } else {
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(h, false);
        if (solver.info() != Eigen::Success)
            throw NumericalError("heff_spectrum: eigensolver did not converge");
        spec.eigenvalues.assign(solver.eigenvalues().data(),
                                solver.eigenvalues().data() + m);
    }
    spec.decay_rates.reserve(spec.eigenvalues.size());
    for (const auto& e : spec.eigenvalues)
        spec.decay_rates.push_back(-2.0 * e.imag());
    std::sort(spec.decay_rates.begin(), spec.decay_rates.end());
    if (lat.gamma_l + lat.gamma_r > 0.0) {
        spec.gamma_min = spec.decay_rates.front();
        spec.tau_rel = 1.0 / spec.gamma_min;
    } else {
        spec.gamma_min = 0.0;
        spec.tau_rel = std::nullopt;  // Hermitian limit: nothing decays
    }
    return spec;
}

ScalingFit tau_rel_scaling(std::span<const int> sites_list, std::span<const double> gamma_list,
                           double eps_s, double tunneling) {
    if (sites_list.empty() || gamma_list.empty())
        throw ConfigError("tau_rel_scaling: empty parameter grid");
    ScalingFit fit;
    for (double g : gamma_list)
        for (int m : sites_list) {
            LatticeConfig lat{m, tunneling, eps_s, g, g};
            const auto spec = heff_spectrum(lat);
            fit.table.push_back({m, g, spec.gamma_min, spec.tau_rel, m > 1 && spec.tau_rel.has_value()});
        }

    // pooled fit of log(tau * gamma) against log M plus per-gamma slopes
    std::vector<double> lx, ly;
    for (const auto& p : fit.table)
        if (p.in_fit) {
            lx.push_back(std::log(static_cast<double>(p.sites)));
            ly.push_back(std::log(*p.tau_rel * p.gamma_bar));
        }
    if (lx.size() < 3)
        throw NumericalError("tau_rel_scaling: fewer than 3 usable points, fit is degenerate");
    const auto pooled = fit_line(lx, ly);
    fit.exponent = pooled.slope;
    fit.prefactor = std::exp(pooled.intercept);

    for (double g : gamma_list) {
        std::vector<double> gx, gy;
        for (const auto& p : fit.table)
            if (p.in_fit && p.gamma_bar == g) {
                gx.push_back(std::log(static_cast<double>(p.sites)));
                gy.push_back(std::log(*p.tau_rel));
            }
        if (gx.size() >= 3)
            fit.per_gamma_exponent.emplace_back(g, fit_line(gx, gy).slope);
    }
    return fit;
}

RateEstimate alpha_exact(const LatticeConfig& lat, const ReservoirModel& model, double mu_inf) {
    lat.validate();
    const double J2 = lat.tunneling * lat.tunneling;
    const double pref = 8.0 * lat.gamma_l * lat.gamma_r * J2 / ness_denominator(lat);
    const double ratio = model.occupation_dmu(lat.eps_s, mu_inf) / model.dn_dmu(mu_inf);
    RateEstimate est;
    est.alpha = ratio * pref;
    est.method = RateMethod::Exact54;
    if (est.alpha > 0.0)
        est.tau_eq = 1.0 / est.alpha;
    return est;
}

RateEstimate alpha_approx(const LatticeConfig& lat, double delta_n0, double delta_N0) {
    lat.validate();
    if (delta_N0 == 0.0)
        throw ConfigError("alpha_approx: delta_N(0) must be nonzero");
    const double J2 = lat.tunneling * lat.tunneling;
    RateEstimate est;
    est.alpha = 8.0 * lat.gamma_l * lat.gamma_r * J2 / ness_denominator(lat) * delta_n0 / delta_N0;
    est.method = RateMethod::Approx61;
    if (est.alpha > 0.0)
        est.tau_eq = 1.0 / est.alpha;
    return est;
}

ShortTimeSeries short_time_series(const LatticeConfig& lat, double n_left0, double n_right0,
                                  int order) {
    lat.validate();
    if (order < 1)
        throw ConfigError("short_time_series: order must be at least 1");
    if (order > 3)
        throw ConfigError("short_time_series: only orders 1..3 are available");

    const int m = lat.sites;
    const double J = lat.tunneling;
    ShortTimeSeries out;
    out.order = order;
    out.exponent_map.resize(m, m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c)
            out.exponent_map(r, c) = m - std::abs(r + c + 1 - m);

    using C = std::complex<double>;
    const auto push = [&](int r, int c, C c1, C c2, C c3) {
        ShortTimeElement el;
        el.row = r;
        el.col = c;
        el.coeff = {C{0.0}, order >= 1 ? c1 : C{0.0}, order >= 2 ? c2 : C{0.0},
                    order >= 3 ? c3 : C{0.0}};
        out.elements.push_back(el);
    };

    // left block, elements with (1-based) j + k < M + 1
    const double gl = lat.gamma_l, al = gl * n_left0;
    if (2 < m + 1)
        push(0, 0, al, -al * gl / 2.0, al * (gl * gl - 2.0 * J * J) / 6.0);
    if (3 < m + 1)
        push(0, 1, 0.0, kImag * J * al / 2.0, -kImag * J * al * gl / 4.0);
    if (4 < m + 1) {
        push(0, 2, 0.0, 0.0, -al * J * J / 6.0);
        push(1, 1, 0.0, 0.0, al * J * J / 3.0);
    }
    // mirrored right block, j + k > M + 1; upper-triangle entries are the
    // conjugates of the reflected lower-triangle ones
    const double gr = lat.gamma_r, ar = gr * n_right0;
    if (2 * m > m + 1)
        push(m - 1, m - 1, ar, -ar * gr / 2.0, ar * (gr * gr - 2.0 * J * J) / 6.0);
    if (2 * m - 1 > m + 1)
        push(m - 2, m - 1, 0.0, -kImag * J * ar / 2.0, kImag * J * ar * gr / 4.0);
    if (2 * m - 2 > m + 1) {
        push(m - 3, m - 1, 0.0, 0.0, -ar * J * J / 6.0);
        push(m - 2, m - 2, 0.0, 0.0, ar * J * J / 3.0);
    }
    return out;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n)
        throw ConfigError("fit_line: need at least two matched points");
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / static_cast<double>(n);
    const double my = sy / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0))
        throw NumericalError("fit_line: degenerate abscissa");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss += r * r;
    }
    fit.residual_rms = std::sqrt(ss / static_cast<double>(n));
    if (n > 2)
        fit.slope_half_width95 = 1.96 * std::sqrt(ss / static_cast<double>(n - 2) / sxx);
    return fit;
}

ExponentialFit fit_exponential(std::span<const double> t, std::span<const double> y, double y_inf,
                               double t_begin, double t_end) {
    if (t.size() != y.size())
        throw ConfigError("fit_exponential: mismatched series lengths");
    std::vector<double> ts, ln;
    double sign = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_begin || t[i] > t_end)
            continue;
        const double d = y[i] - y_inf;
        if (d == 0.0)
            continue;
        const double s = d > 0.0 ? 1.0 : -1.0;
        if (sign == 0.0)
            sign = s;
        else if (s != sign)
            throw NumericalError("fit_exponential: y - y_inf changes sign inside the window");
        ts.push_back(t[i]);
        ln.push_back(std::log(std::abs(d)));
    }
    if (ts.size() < 10)
        throw NumericalError("fit_exponential: fewer than 10 points in the window");
    const auto line = fit_line(ts, ln);
    ExponentialFit fit;
    fit.rate = -line.slope;
    fit.amplitude = std::exp(line.intercept);
    fit.rate_half_width95 = line.slope_half_width95;
    fit.residual_rms = line.residual_rms;
    fit.points = static_cast<int>(ts.size());
    return fit;
}

std::optional<double> metastability_onset(const Trajectory& traj) {
    const int m = traj.lattice.sites;
    if (m < 3 || traj.points.empty())
        return std::nullopt;
    std::vector<double> lr(traj.points.size(), 0.0);
    for (std::size_t i = 0; i < traj.points.size(); ++i) {
        const auto& s = traj.points[i].state.sigma;
        for (int j = 0; j < m; ++j)
            for (int k = j + 2; k < m; ++k)
                lr[i] = std::max(lr[i], std::abs(s(j, k)));
    }
    const auto imax = static_cast<std::size_t>(
        std::max_element(lr.begin(), lr.end()) - lr.begin());
    const double threshold = 1e-3 * lr[imax];
    for (std::size_t i = imax; i < lr.size(); ++i)
        if (lr[i] < threshold)
            return traj.points[i].state.t;
    return std::nullopt;
}

FitWindow alpha_fit_window(std::span<const double> t, std::span<const double> y, double y_inf,
                           double t_star, double tau_rel) {
    if (t.empty() || t.size() != y.size())
        throw ConfigError("alpha_fit_window: empty or mismatched series");
    FitWindow w;
    w.t_begin = t_star + 5.0 * tau_rel;
    w.t_end = t.back();
    const double floor =
        1e3 * std::numeric_limits<double>::epsilon() * std::abs(y.front() - y_inf);
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] <= w.t_begin)
            continue;
        if (std::abs(y[i] - y_inf) < floor) {
            w.t_end = t[i];
            break;
        }
    }
    return w;
}

ExponentialFit fit_relaxation_rate(std::span<const double> t, std::span<const double> y,
                                   double y_inf, double gamma_estimate) {
    if (!(gamma_estimate > 0.0))
        throw ConfigError("fit_relaxation_rate: rate estimate must be positive");
    const auto window_fit = [&](double gamma) {
        const double begin = 3.0 / gamma;
        const double end = std::min(t.back(), begin + 12.0 / gamma);
        return fit_exponential(t, y, y_inf, begin, end);
    };
    const auto first = window_fit(gamma_estimate);
    return first.rate > 0.0 ? window_fit(first.rate) : first;
}

}  // namespace finres
