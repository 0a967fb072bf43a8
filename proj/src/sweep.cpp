#include "finres/sweep.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "finres/analysis.hpp"
#include "finres/errors.hpp"

namespace finres {

namespace {

SweepRow compute_row(int sites, double gamma_bar, const RunConfig& cfg) {
    LatticeConfig lat = cfg.lattice;
    lat.sites = sites;
    lat.gamma_l = lat.gamma_r = gamma_bar;

    SweepRow row;
    row.sites = sites;
    row.gamma_bar = gamma_bar;
    const auto spec = heff_spectrum(lat);
    row.gamma_min = spec.gamma_min;
    row.tau_rel = spec.tau_rel;

    if (cfg.dos) {
        const auto model = *cfg.model();
        const double N0 = *cfg.N0;
        const auto eq = equilibrium_solve(N0, sites, lat.eps_s, model,
                                          std::min(cfg.mu_l0, cfg.mu_r0),
                                          std::max(cfg.mu_l0, cfg.mu_r0));
        row.alpha = alpha_exact(lat, model, eq.mu_inf).alpha;
    }

    if (cfg.sweep->task == "relax" && sites > 1 && spec.tau_rel) {
        // stationary run from the empty lattice, long enough for a clean fit
        const double t_end = 16.0 / spec.gamma_min;
        const auto grid = linear_time_grid(0.0, t_end, 801);
        IntegrationOptions opts;
        opts.ode = cfg.ode;
        const auto traj = integrate(SystemState::empty_lattice(sites), lat, cfg.statistics,
                                    EvolutionMode::stationary(cfg.n_l0, cfg.n_r0), grid, opts);
        const auto target = ness(cfg.n_l0 - cfg.n_r0, 0.5 * (cfg.n_l0 + cfg.n_r0), lat);
        std::vector<double> ts, n1;
        ts.reserve(traj.points.size());
        n1.reserve(traj.points.size());
        for (const auto& pt : traj.points) {
            ts.push_back(pt.state.t);
            n1.push_back(pt.observables.site_population[0]);
        }
        row.rate_fit = fit_relaxation_rate(ts, n1, target.n_first, spec.gamma_min).rate;
    }
    return row;
}

}  // namespace

SweepResult run_sweep(const RunConfig& cfg, int workers) {
    if (!cfg.sweep)
        throw ConfigError("config: sweep: missing section");
    const auto& spec = *cfg.sweep;

    std::vector<std::pair<int, double>> grid;
    for (int m : spec.sites)
        for (double g : spec.gamma_bar)
            grid.emplace_back(m, g);

    SweepResult result;
    result.rows.resize(grid.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    const auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= grid.size())
                return;
            try {
                result.rows[i] = compute_row(grid[i].first, grid[i].second, cfg);
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                return;
            }
        }
    };

    const int n_threads = std::max(1, std::min<int>(workers, static_cast<int>(grid.size())));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int i = 0; i < n_threads; ++i)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    // pooled power-law fit, M = 1 rows excluded
    std::vector<double> lx, ly;
    for (const auto& row : result.rows)
        if (row.sites > 1 && row.tau_rel) {
            lx.push_back(std::log(static_cast<double>(row.sites)));
            ly.push_back(std::log(*row.tau_rel * row.gamma_bar));
        }
    if (lx.size() >= 3) {
        const auto fit = fit_line(lx, ly);
        result.exponent = fit.slope;
        result.prefactor = std::exp(fit.intercept);
    }
    return result;
}

}  // namespace finres
