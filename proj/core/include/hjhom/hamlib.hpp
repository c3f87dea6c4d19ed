#pragma once

#include <memory>

#include "hjhom/environment.hpp"

namespace hjhom {

// R_hat = ((1 + alpha1 alpha0) / alpha0^2)^(1/gamma); every minimiser of H(x,.) lies in [-R_hat, R_hat].
double hat_radius(double alpha0, double alpha1, double gamma);

// Radius of {p : alpha0|p|^gamma - 1/alpha0 <= level}, which contains {H(x,.) <= level}.
double sublevel_radius(double alpha0, double gamma, double level);

struct MinPoint {
  double lambda_hat;  // min_p H(x,p)
  double p_hat;       // midpoint of the argmin interval
};

MinPoint min_profile(const HamiltonianField& H, double x, double tol = 1e-10);

struct SublevelEndpoints {
  double p_minus;
  double p_plus;
};

// Endpoints of {p : H(x,p) <= level}; EmptySublevelError when level < min_p H.
SublevelEndpoints sublevel_endpoints(const HamiltonianField& H, double x, double level,
                                     double tol = 1e-12);
SublevelEndpoints sublevel_endpoints(const HamiltonianField& H, double x, double level,
                                     const MinPoint& m, double tol = 1e-12);

struct StrictifyOptions {
  double mollifier_constant = 10.0;  // C in r_n = 1/(2nC)
  double table_spacing = 0.0;        // 0: r_n / 8
  double chunk_length = 1.0;
};

// eta_n = 1 / (n (1 + R_hat + n^(1/gamma))^4)
double strictify_eta(int n, double alpha0, double alpha1, double gamma);

// H_n = max(2/n, H - V) + eta_n(|p - p_n(x)|^4 + |p - p_n(x)|) + V, V = min_p H.
// Strictly quasiconvex with modulus eta_n; exponent max(gamma, 4).
HamiltonianField strictify(const HamiltonianField& H, int n, const StrictifyOptions& opts = {});

// The selection p_n(x) of a strictified field (throws if `Hn` is not one).
double strictify_selection(const HamiltonianField& Hn, double x);

// Sup-distance bound 2/n + eta_n (D^4 + D) on |p| <= R, D = R + R_hat.
double strictify_distance_bound(const HamiltonianField& H, int n, double R);

// K = C((kappa sqrt(1 + alpha1 + |lambda|) / alpha0)^(2/(gamma-1)) + ((1 + lambda alpha0)/alpha0^2)^(1/gamma))
double lipschitz_bound(double alpha0, double alpha1, double gamma, double kappa, double lambda,
                       double c_gamma = 10.0);

struct HolderBound {
  double K;
  double exponent;  // (gamma - 2) / (gamma - 1)
};

// UnsupportedError for gamma <= 2.
HolderBound holder_bound(double alpha0, double gamma, double lambda, double c_gamma = 10.0);

}  // namespace hjhom
