#pragma once

// Test-only oracle: iterates the frozen-rate SPDM equations symbolically in
// polynomial form around the empty lattice. Pass r fixes every coefficient
// through t^r, independently of the closed-form coefficient tables under test.

#include <array>
#include <complex>
#include <vector>

#include "finres/lattice.hpp"

namespace finres::testing {

using Poly = std::array<std::complex<double>, 8>;  // c0..c7

struct ShortTimeOracle {
    int sites;
    std::vector<Poly> poly;  // row-major (j, k)

    const Poly& at(int j, int k) const { return poly[static_cast<std::size_t>(j * sites + k)]; }
};

inline ShortTimeOracle iterate_short_time(const finres::LatticeConfig& lat, double n_left0,
                                          double n_right0, int passes = 7) {
    const int m = lat.sites;
    const std::complex<double> iJ{0.0, lat.tunneling};
    std::vector<Poly> cur(static_cast<std::size_t>(m) * m, Poly{});
    const auto idx = [m](int j, int k) { return static_cast<std::size_t>(j * m + k); };

    for (int pass = 0; pass < passes; ++pass) {
        std::vector<Poly> rhs(static_cast<std::size_t>(m) * m, Poly{});
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                Poly& r = rhs[idx(j, k)];
                const auto add = [&](const Poly& p, std::complex<double> w) {
                    for (std::size_t q = 0; q < p.size(); ++q)
                        r[q] += w * p[q];
                };
                if (k + 1 < m) add(cur[idx(j, k + 1)], iJ);
                if (k > 0) add(cur[idx(j, k - 1)], iJ);
                if (j + 1 < m) add(cur[idx(j + 1, k)], -iJ);
                if (j > 0) add(cur[idx(j - 1, k)], -iJ);
                const double damp = (j == 0 ? 0.5 * lat.gamma_l : 0.0) +
                                    (k == 0 ? 0.5 * lat.gamma_l : 0.0) +
                                    (j == m - 1 ? 0.5 * lat.gamma_r : 0.0) +
                                    (k == m - 1 ? 0.5 * lat.gamma_r : 0.0);
                add(cur[idx(j, k)], -damp);
                if (j == 0 && k == 0) r[0] += lat.gamma_l * n_left0;
                if (j == m - 1 && k == m - 1) r[0] += lat.gamma_r * n_right0;
            }
        // integrate from zero initial condition
        for (std::size_t e = 0; e < cur.size(); ++e) {
            Poly next{};
            for (std::size_t q = 0; q + 1 < next.size(); ++q)
                next[q + 1] = rhs[e][q] / static_cast<double>(q + 1);
            cur[e] = next;
        }
    }
    return {m, std::move(cur)};
}

}  // namespace finres::testing
