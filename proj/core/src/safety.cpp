#include "safefw/safety.hpp"

#include <cmath>
#include <sstream>

#include "safefw/error.hpp"

namespace safefw {

double SafetyConfig::phi_inverse_at(long n) const {
  if (phi_inverse_override) return *phi_inverse_override;
  return phi_inverse(mode, n, d, delta_bar() / static_cast<double>(m));
}

double SafetyConfig::phi_delta(long n) const {
  if (phi_delta_override) return *phi_delta_override;
  if (sigma == 0.0) return 0.0;
  return sigma * phi_inverse_at(n);
}

Vector margins(const EstimatorState& state, const Vector& x) {
  if (x.size() != state.dim()) throw DimensionError("margins: point has wrong dimension");
  return state.b_hat() - state.A_hat() * x;
}

namespace {

SafetyVerdict verdict_from(Vector eps, double lhs) {
  SafetyVerdict v;
  v.margins = std::move(eps);
  v.min_margin = v.margins.minCoeff(&v.binding_constraint);
  v.lhs = lhs;
  v.safe = v.lhs <= v.min_margin;
  return v;
}

}  // namespace

SafetyVerdict fact2_check(const EstimatorState& state, const SafetyConfig& cfg, const Vector& x) {
  Vector eps = margins(state, x);
  const BlockQuantities blocks = block_quantities(state);
  const Vector dx = x - blocks.mean;
  const double spread = 1.0 / static_cast<double>(state.count()) + dx.dot(blocks.R * dx);
  const double lhs = cfg.phi_delta(state.count()) * std::sqrt(std::max(0.0, spread));
  return verdict_from(std::move(eps), lhs);
}

SafetyVerdict soc_check(const EstimatorState& state, const SafetyConfig& cfg, const Vector& x) {
  Vector eps = margins(state, x);
  Eigen::LLT<Matrix> llt(state.inverse_gram());
  if (llt.info() != Eigen::Success) {
    throw NumericalError("soc_check: P is not positive definite");
  }
  Vector v(x.size() + 1);
  v.head(x.size()) = x;
  v(x.size()) = -1.0;
  // ||L^T v||^2 = v^T P v with P = L L^T.
  const double cone = (llt.matrixU() * v).norm();
  return verdict_from(std::move(eps), cfg.phi_delta(state.count()) * cone);
}

double c_delta(const GeometryConstants& geo, double phi_delta, double omega0, int d) {
  return 2.0 * phi_delta * d * (geo.Gamma0 + 1.0) / geo.rho_min *
         std::sqrt((geo.Gamma0 * geo.Gamma0 + 1.0) / (omega0 * omega0) + 1.0);
}

double cn_lower_bound(const GeometryConstants& geo, double phi_delta, double omega0, int d,
                      int T) {
  if (T < 3) {
    std::ostringstream os;
    os << "cn_lower_bound: T must be >= 3 so that ln ln T > 0 (got T=" << T << ")";
    throw PreconditionError(os.str());
  }
  const double c = c_delta(geo, phi_delta, omega0, d);
  const double lnln = std::log(std::log(static_cast<double>(T)));
  const double boundary_term = 4.0 * lnln * lnln * geo.L_A * geo.L_A / (geo.eps0 * geo.eps0);
  const double floor_term = 1.0 / ((geo.Gamma0 + 1.0) * (geo.Gamma0 + 1.0));
  return c * c * std::max(boundary_term, floor_term);
}

long nt_schedule(double Cn, int t) {
  if (t < 0) throw PreconditionError("nt_schedule: t must be non-negative");
  const double s = static_cast<double>(t) + 2.0;
  const double ln = std::log(s);
  return static_cast<long>(std::ceil(4.0 * Cn * s * ln * ln));
}

}  // namespace safefw
