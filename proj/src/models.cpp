#include "pipenet/models.hpp"

#include <algorithm>
#include <cmath>

namespace pipenet {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveDensity: return "NonPositiveDensity";
    case ErrorCode::LeftSubsonicRegion: return "LeftSubsonicRegion";
    case ErrorCode::NoSolution: return "NoSolution";
    case ErrorCode::NonTransversal: return "NonTransversal";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::GateEqualHeights: return "GateEqualHeights";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::DomainExceeded: return "DomainExceeded";
    case ErrorCode::NoFeasibleStart: return "NoFeasibleStart";
    case ErrorCode::InvalidControl: return "InvalidControl";
    case ErrorCode::BadScenario: return "BadScenario";
  }
  return "Unknown";
}

PressureLaw PressureLaw::gamma_law(double p_star, double rho_star,
                                   double gamma) {
  if (p_star <= 0.0 || rho_star <= 0.0 || gamma < 1.0)
    fail(ErrorCode::BadScenario, "gamma law needs p_star>0, rho_star>0, gamma>=1");
  PressureLaw law;
  law.kind = LawKind::GammaLaw;
  law.p_star = p_star;
  law.rho_star = rho_star;
  law.gamma = gamma;
  return law;
}

PressureLaw PressureLaw::shallow_water(double g) {
  if (g <= 0.0) fail(ErrorCode::BadScenario, "shallow water needs g>0");
  PressureLaw law;
  law.kind = LawKind::ShallowWater;
  law.g = g;
  return law;
}

namespace {

// x^e with exact fast paths for the exponents that occur in the shipped
// laws; keeps the gamma=2 gas path arithmetically identical to the shallow
// water path.
double pow_exp(double x, double e) {
  if (e == 0.0) return 1.0;
  if (e == 1.0) return x;
  if (e == 2.0) return x * x;
  return std::pow(x, e);
}

void require_rho(double rho, double rho_min, const char* where) {
  if (!(rho >= rho_min) || !std::isfinite(rho))
    fail(ErrorCode::NonPositiveDensity, where);
}

}  // namespace

double pressure(const PressureLaw& law, double rho) {
  require_rho(rho, 0.0, "pressure");
  if (law.kind == LawKind::ShallowWater) return ((0.5 * law.g) * rho) * rho;
  return (law.p_star * pow_exp(rho / law.rho_star, law.gamma - 1.0)) *
         (rho / law.rho_star);
}

double pressure_derivative(const PressureLaw& law, double rho) {
  require_rho(rho, 0.0, "pressure_derivative");
  if (law.kind == LawKind::ShallowWater) return law.g * rho;
  return (law.p_star * law.gamma / law.rho_star) *
         pow_exp(rho / law.rho_star, law.gamma - 1.0);
}

double pressure_second_derivative(const PressureLaw& law, double rho) {
  require_rho(rho, 0.0, "pressure_second_derivative");
  if (law.kind == LawKind::ShallowWater) return law.g;
  return (law.p_star * law.gamma * (law.gamma - 1.0) /
          (law.rho_star * law.rho_star)) *
         pow_exp(rho / law.rho_star, law.gamma - 2.0);
}

double sound_speed(const PressureLaw& law, double rho) {
  return std::sqrt(pressure_derivative(law, rho));
}

double riemann_invariant_integral(const PressureLaw& law, double rho) {
  require_rho(rho, 0.0, "riemann_invariant_integral");
  if (law.kind == LawKind::ShallowWater)
    return 2.0 * sound_speed(law, rho);
  if (law.gamma == 1.0) {
    // isothermal: c is constant, h = c log(rho)
    return sound_speed(law, law.rho_star) * std::log(rho);
  }
  return (2.0 / (law.gamma - 1.0)) * sound_speed(law, rho);
}

double InclineProfile::operator()(double x) const {
  std::size_t k = 0;
  while (k < breakpoints.size() && x >= breakpoints[k]) ++k;
  return values[k];
}

double InclineProfile::jump_total() const {
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < values.size(); ++k)
    total += std::abs(values[k + 1] - values[k]);
  return total;
}

void require_positive_density(const PipeModel& model, const FluidState& u,
                              const char* where) {
  if (!(u.density >= model.rho_min) || !std::isfinite(u.density) ||
      !std::isfinite(u.momentum))
    fail(ErrorCode::NonPositiveDensity, where);
}

std::array<double, 2> flux(const PipeModel& model, const FluidState& u) {
  require_positive_density(model, u, "flux");
  return {u.momentum,
          u.momentum * u.momentum / u.density + pressure(model.law, u.density)};
}

std::array<double, 2> eigenvalues(const PipeModel& model, const FluidState& u) {
  require_positive_density(model, u, "eigenvalues");
  const double v = u.momentum / u.density;
  const double c = sound_speed(model.law, u.density);
  return {v - c, v + c};
}

std::array<std::array<double, 2>, 2> eigenvectors(const PipeModel& model,
                                                  const FluidState& u) {
  const auto lambda = eigenvalues(model, u);
  return {{{-1.0, -lambda[0]}, {1.0, lambda[1]}}};
}

bool is_subsonic(const PipeModel& model, const FluidState& u) {
  const auto lambda = eigenvalues(model, u);
  return lambda[0] < 0.0 && lambda[1] > 0.0;
}

std::array<double, 2> source(const PipeModel& model, double x,
                             const FluidState& u) {
  require_positive_density(model, u, "source");
  double s2 = 0.0;
  if (x >= 0.0 && x <= model.active_length && model.friction > 0.0)
    s2 -= model.friction * u.momentum * std::abs(u.momentum) / u.density;
  const double alpha = model.incline(x);
  if (alpha != 0.0) s2 -= model.gravity * u.density * std::sin(alpha);
  return {0.0, s2};
}

double EntropyPair::potential(double rho) const {
  if (law.kind == LawKind::ShallowWater) {
    // gamma = 2 closed form: P = p + C rho
    double value = pressure(law, rho);
    if (rho_ref > 0.0) value -= (pressure(law, rho_ref) / rho_ref) * rho;
    return value;
  }
  if (law.gamma == 1.0) {
    // isothermal: P = (p_star/rho_star) rho log(rho/rho_ref)
    return (law.p_star / law.rho_star) * rho * std::log(rho / rho_ref);
  }
  double value = pressure(law, rho) / (law.gamma - 1.0);
  if (rho_ref > 0.0)
    value -= (pressure(law, rho_ref) / ((law.gamma - 1.0) * rho_ref)) * rho;
  return value;
}

double EntropyPair::eta(const FluidState& u) const {
  return u.momentum * u.momentum / (2.0 * u.density) + potential(u.density);
}

double EntropyPair::qflux(const FluidState& u) const {
  return (eta(u) + pressure(law, u.density)) * (u.momentum / u.density);
}

std::array<double, 2> EntropyPair::eta_gradient(const FluidState& u) const {
  const double v = u.momentum / u.density;
  // P'(rho) = (P(rho) + p(rho)) / rho  (from rho P' - P = p)
  const double dP = (potential(u.density) + pressure(law, u.density)) / u.density;
  return {-0.5 * v * v + dP, v};
}

EntropyPair entropy_pair(const PipeModel& model) {
  const bool iso = model.law.kind == LawKind::GammaLaw && model.law.gamma == 1.0;
  return entropy_pair(model, iso ? model.law.rho_star : 0.0);
}

EntropyPair entropy_pair(const PipeModel& model, double rho_ref) {
  if (model.law.kind == LawKind::GammaLaw && model.law.gamma == 1.0 &&
      rho_ref <= 0.0)
    fail(ErrorCode::BadScenario, "isothermal entropy needs rho_ref > 0");
  return EntropyPair{model.law, rho_ref};
}

SourceValidation validate_source(const PipeModel& model,
                                 const FluidState& reference) {
  SourceValidation report;

  // Clause 1: g(x, u_bar) = 0 outside a compact set. The friction term is
  // cut off at L by construction; the incline term has compact support iff
  // the trailing value of alpha vanishes.
  report.compact_support = model.incline.compactly_supported();
  if (!report.compact_support)
    report.detail += "incline does not vanish for large x; ";

  // Sample box around the reference, shrunk to stay subsonic.
  const double rho0 = reference.density;
  const double q0 = reference.momentum;
  const double drho = 0.25 * rho0;
  const double dq = 0.25 * (std::abs(q0) + rho0 * sound_speed(model.law, rho0));
  std::vector<FluidState> box;
  const int nb = 7;
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j) {
      FluidState u{rho0 - drho + 2.0 * drho * i / (nb - 1),
                   q0 - dq + 2.0 * dq * j / (nb - 1)};
      if (u.density >= model.rho_min && is_subsonic(model, u))
        box.push_back(u);
    }
  if (box.empty()) box.push_back(reference);

  // Clause 2: the x-jumps of g are dominated by a finite measure. With
  // piecewise-constant alpha the jump points are the alpha breakpoints plus
  // the friction cutoff at L; mu is the sup over the box of the jump sizes.
  double mu = 0.0;
  for (std::size_t k = 0; k + 1 < model.incline.values.size(); ++k) {
    const double ds =
        std::abs(std::sin(model.incline.values[k + 1]) -
                 std::sin(model.incline.values[k]));
    double sup = 0.0;
    for (const auto& u : box) sup = std::max(sup, model.gravity * u.density * ds);
    mu += sup;
  }
  if (model.friction > 0.0) {
    double sup = 0.0;
    for (const auto& u : box)
      sup = std::max(sup, model.friction * u.momentum * u.momentum / u.density);
    mu += sup;
  }
  report.mu_total = mu;
  report.finite_jump_measure = std::isfinite(mu);

  // Clause 3: Lipschitz in u, estimated by finite differences across the box
  // at x-samples on both sides of every jump point.
  std::vector<double> xs{0.5 * model.active_length, model.active_length * 1.5};
  for (double b : model.incline.breakpoints) {
    xs.push_back(std::max(0.0, b - 1e-6));
    xs.push_back(b + 1e-6);
  }
  double lip = 0.0;
  for (double x : xs)
    for (std::size_t a = 0; a < box.size(); ++a)
      for (std::size_t b = a + 1; b < box.size(); ++b) {
        const auto ga = source(model, x, box[a]);
        const auto gb = source(model, x, box[b]);
        const double num = std::abs(ga[0] - gb[0]) + std::abs(ga[1] - gb[1]);
        const double den = norm1(box[a] - box[b]);
        if (den > 1e-12) lip = std::max(lip, num / den);
      }
  report.lipschitz_hat = lip;
  report.lipschitz_in_u = std::isfinite(lip);

  if (!report.passed() && report.detail.empty())
    report.detail = "source validation failed";
  return report;
}

}  // namespace pipenet
