#pragma once

#include "jbessel/cone.hpp"

#include <optional>

namespace jb {

struct KBesselParams {
  int k = 1;
  double d = 1;
  double lambda = 0;
  QuadratureSpec quad;

  double n() const { return k + 0.5 * k * (k - 1) * d; }
  double n_over_k() const { return n() / k; }
};

enum class KForm { integral1, integral2 };

struct KValue {
  double value = 0;
  double error = 0;
  std::string method;
};

// Integration layout reused across nearby points so finite differences see a smooth function.
struct KLayout {
  double u_lo = 0, u_hi = 0;
  int nu = 0;
};

// Radial part K(t) = K(t1 e1 + ... + tk ek). Form 2 evaluates the square-argument integral at y = sqrt(t).
KValue kbessel_radial(const KBesselParams& p, const std::vector<double>& t, KForm form = KForm::integral1,
                      const KLayout* layout = nullptr);
KLayout kbessel_layout(const KBesselParams& p, const std::vector<double>& t, KForm form = KForm::integral1);

// Value at a cone element: reduces to the radial part through the spectral values.
KValue kbessel_point(const KBesselParams& p, const ConeContext& c, const Vec& x, KForm form = KForm::integral1);

// Monte Carlo on the matrix model (d in {1,2}); x given by its eigenvalues.
KValue kbessel_mc(const KBesselParams& p, const std::vector<double>& t, KForm form = KForm::integral1);

struct OdeResidual {
  std::vector<double> residual;  // |B^i K - K| / |K|
  double value = 0;
  std::vector<double> grad, second;
};
// operator_lambda applies the operator of a different parameter (negative control).
OdeResidual ode_residual(const KBesselParams& p, const std::vector<double>& t,
                         std::optional<double> operator_lambda = std::nullopt);

// Integrability of K_lambda(x) Delta(x)^mu over the cone.
enum class NormMode { L1, L2 };
bool integrable(int k, double d, double lambda, double mu, NormMode mode);
double l1_closed_form(int k, double d, double lambda, double mu);

struct IntegrabilityResult {
  bool finite = false;
  std::optional<double> value;
  std::optional<double> numeric;
  double numeric_error = 0;
  std::optional<double> closed_form;
};
IntegrabilityResult integrability_check(const KBesselParams& p, double mu, NormMode mode, bool numeric = true);

// Growth of the truncated rank-1 integral over (eps, inf) as eps decreases; large growth means divergence at 0.
struct DivergenceProbe {
  std::vector<double> eps, partial;
  bool diverges = false;
};
DivergenceProbe divergence_probe_rank1(double lambda, double mu, NormMode mode);

struct ClercResult {
  std::vector<double> t, ratio;
  double dispersion = 0;  // (max - min) / mean
  double extrapolation_gap = 0;
  bool in_precondition = true;
  std::string note;
};
// Ratio K^(k+m)_mu(t, 0, ..., 0) / K^(k)_mu(t) over sample points; only k=1, m in {0,1} is supported.
ClercResult clerc_restriction_check(double d, double mu, const std::vector<double>& samples, int m = 1,
                                    const QuadratureSpec& q = {});

}  // namespace jb
