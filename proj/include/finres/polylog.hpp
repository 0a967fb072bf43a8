#pragma once

namespace finres {

/// Real polylogarithm Li_s(z) for s in {2, 3} and z < 1, to absolute
/// accuracy better than 1e-12 over the whole argument range reached by
/// thermal reservoirs (bosonic z in (0,1), fermionic z negative with
/// arbitrary magnitude).
///
/// Branch selection:
///   |z| <= 0.6          direct power series sum z^k / k^s
///   0.6 < z < 1         expansion in powers of ln z
///   -1 <= z < -0.6      duplication: Li_s(-x) = 2^{1-s} Li_s(x^2) - Li_s(x)
///   z < -1              inversion to Li_s(-1/x) plus logarithmic terms
///
/// Throws std::domain_error for z >= 1.
double polylog(int s, double z);

/// Dilogarithm Li_2(z), z < 1.
double dilog(double z);

/// Trilogarithm Li_3(z), z < 1.
double trilog(double z);

/// Li_s(-e^w) for real w, evaluated in log space when w is large so that
/// deeply degenerate fermionic arguments never overflow.
double polylog_neg_exp(int s, double w);

}  // namespace finres
