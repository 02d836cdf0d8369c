#include "tvkb/hardness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tvkb/error.hpp"

namespace tvkb {

double bump_eval(const BumpSpec& bump, const Point& x) {
  if (x.size() != bump.center.size()) throw ValidationError("bump_eval: dimension mismatch");
  const double r = 2.0 * (x - bump.center).norm() / bump.width;
  if (r >= 1.0) return 0.0;
  const double r2 = r * r;
  return bump.height * std::exp(1.0 - 1.0 / (1.0 - r2));
}

double width_for_height(double eps, double norm_budget, const KernelSpec& kernel, double c0) {
  if (!(eps > 0.0) || !(norm_budget > 0.0)) {
    throw ValidationError("width_for_height: eps and B must be positive");
  }
  if (!(c0 > 0.0)) throw ValidationError("width_for_height: c0 must be positive");
  if (eps > norm_budget) throw ValidationError("width_for_height: eps exceeds norm budget");

  if (kernel.family == KernelFamily::squared_exponential) {
    const double log_ratio = std::log(norm_budget / eps);
    if (!(log_ratio > 0.0)) {
      throw ValidationError("width_for_height: SE width undefined at eps == B");
    }
    return std::min(1.0, c0 / std::sqrt(log_ratio));
  }
  return c0 * std::pow(eps / norm_budget, 1.0 / kernel.nu);
}

double epsilon_for_horizon(double tau, double norm_budget, double nu, std::size_t d, double c0,
                           std::optional<double> ratio_cap) {
  if (!(tau >= 1.0)) throw ValidationError("epsilon_for_horizon: tau must be >= 1");
  if (!(norm_budget > 0.0)) throw ValidationError("epsilon_for_horizon: B must be positive");
  if (!(nu > 0.0) || d == 0) throw ValidationError("epsilon_for_horizon: bad nu or d");

  double eps = 0.0;
  if (std::isinf(nu)) {
    eps = c0 / std::sqrt(tau);
  } else {
    const double dd = static_cast<double>(d);
    const double denom = 2.0 * nu + dd;
    eps = c0 * std::pow(norm_budget, dd / denom) * std::pow(tau, -nu / denom);
  }
  if (ratio_cap) eps = std::min(eps, *ratio_cap * norm_budget);
  return eps;
}

std::size_t budget_horizon(std::size_t members, double eps, double c0) {
  if (members == 0) throw ValidationError("budget_horizon: M must be >= 1");
  if (!(eps > 0.0)) throw ValidationError("budget_horizon: eps must be positive");
  const double tau = c0 * static_cast<double>(members) / (eps * eps);
  // 0.1 * 0.1 is not exactly 0.01; absorb that before flooring.
  return static_cast<std::size_t>(std::floor(tau * (1.0 + 1e-9)));
}

HardClass::HardClass(KernelSpec kernel, std::size_t d, double norm_budget, double eps,
                     Calibration calibration)
    : kernel_(kernel), d_(d), norm_budget_(norm_budget), eps_(eps), calibration_(calibration) {
  if (d == 0) throw ValidationError("hard_class: d must be >= 1");
  if (!(eps > 0.0) || !(norm_budget > 0.0)) {
    throw ValidationError("hard_class: eps and B must be positive");
  }
  if (eps / norm_budget > calibration.eps_ratio_max * (1.0 + 1e-12)) {
    throw ValidationError("hard_class: eps/B = " + std::to_string(eps / norm_budget) +
                          " exceeds eps_ratio_max = " +
                          std::to_string(calibration.eps_ratio_max));
  }
  width_ = width_for_height(eps, norm_budget, kernel, calibration.c0_width);
  if (width_ > 1.0) throw ValidationError("hard_class: height too large for norm budget");
  const double members = std::pow(static_cast<double>(cells_per_axis(width_)), static_cast<double>(d));
  if (members > static_cast<double>(kMaxMembers)) {
    throw ValidationError("hard_class: " + std::to_string(members) +
                          " members exceeds the supported maximum");
  }
  centers_ = grid_centers(GridSpec{d, width_});
}

BumpSpec HardClass::member(std::size_t i) const {
  if (i >= centers_.size()) throw ValidationError("hard_class: member index out of range");
  return BumpSpec{centers_[i], width_, peak()};
}

double HardClass::eval(std::size_t i, const Point& x) const {
  if (i >= centers_.size()) throw ValidationError("hard_class: member index out of range");
  return bump_eval(BumpSpec{centers_[i], width_, peak()}, x);
}

HardClass HardClass::scaled(double factor) const {
  if (!(factor > 0.0) || factor > 1.0) {
    throw ValidationError("hard_class: scale factor must lie in (0, 1]");
  }
  HardClass out = *this;
  out.eps_ = eps_ * factor;
  return out;
}

nlohmann::json HardClass::to_json() const {
  nlohmann::json centers = nlohmann::json::array();
  for (const auto& c : centers_) centers.push_back(std::vector<double>(c.begin(), c.end()));
  nlohmann::json kernel = {{"family", to_string(kernel_.family)},
                           {"lengthscale", kernel_.lengthscale}};
  if (kernel_.family == KernelFamily::matern) kernel["nu"] = kernel_.nu;
  return {{"kernel", kernel},
          {"d", d_},
          {"B", norm_budget_},
          {"eps", eps_},
          {"w", width_},
          {"M", centers_.size()},
          {"c0_width", calibration_.c0_width},
          {"eps_ratio_max", calibration_.eps_ratio_max},
          {"centers", centers}};
}

HardClass hard_class(const KernelSpec& kernel, std::size_t d, double norm_budget, double eps,
                     const Calibration& calibration) {
  return HardClass(kernel, d, norm_budget, eps, calibration);
}

double rkhs_norm_lb(std::span<const std::pair<Point, double>> values, const KernelSpec& kernel) {
  if (values.empty()) return 0.0;
  std::vector<Point> points;
  Eigen::VectorXd y(static_cast<Eigen::Index>(values.size()));
  points.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    points.push_back(values[i].first);
    y[static_cast<Eigen::Index>(i)] = values[i].second;
  }
  return InterpolantNorm(kernel, std::move(points))(y);
}

InterpolantNorm::InterpolantNorm(const KernelSpec& kernel, std::vector<Point> probe)
    : probe_(std::move(probe)), factor_(factorize_gram(kernel, probe_)) {}

double InterpolantNorm::operator()(const Eigen::VectorXd& values) const {
  if (values.size() != static_cast<Eigen::Index>(probe_.size())) {
    throw ValidationError("certificate: value count does not match probe");
  }
  const Eigen::VectorXd z = factor_.lower.triangularView<Eigen::Lower>().solve(values);
  return z.norm();
}

double InterpolantNorm::of(const std::function<double(const Point&)>& f) const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(probe_.size()));
  for (std::size_t i = 0; i < probe_.size(); ++i) y[static_cast<Eigen::Index>(i)] = f(probe_[i]);
  return (*this)(y);
}

double sup_norm_on_grid(const ScalarField& f, std::span<const Point> probe) {
  if (probe.empty()) throw ValidationError("sup_norm_on_grid: empty probe");
  double best = 0.0;
  for (const auto& p : probe) best = std::max(best, std::abs(f(p)));
  return best;
}

double linf_distance(const ScalarField& f, const ScalarField& g, std::span<const Point> probe) {
  if (probe.empty()) throw ValidationError("linf_distance: empty probe");
  double best = 0.0;
  for (const auto& p : probe) best = std::max(best, std::abs(f(p) - g(p)));
  return best;
}

std::vector<Point> audit_probe(const HardClass& cls, std::size_t per_axis) {
  std::vector<Point> probe = uniform_grid(cls.dim(), per_axis);
  probe.insert(probe.end(), cls.centers().begin(), cls.centers().end());
  return probe;
}

std::vector<Point> support_stencil(const HardClass& cls) {
  constexpr int kHalf = 2;
  const double step = cls.width() / 5.0;
  const std::size_t d = cls.dim();
  std::size_t per_member = 1;
  for (std::size_t k = 0; k < d; ++k) per_member *= 2 * kHalf + 1;

  std::vector<Point> out;
  out.reserve(per_member * cls.size());
  for (const auto& c : cls.centers()) {
    std::vector<int> off(d, -kHalf);
    for (std::size_t n = 0; n < per_member; ++n) {
      Point p = c;
      for (std::size_t k = 0; k < d; ++k) p[static_cast<Eigen::Index>(k)] += off[k] * step;
      out.push_back(std::move(p));
      for (std::size_t k = d; k-- > 0;) {
        if (++off[k] <= kHalf) break;
        off[k] = -kHalf;
      }
    }
  }
  return out;
}

MemberCertificate certify_members(const HardClass& cls, const InterpolantNorm& certifier) {
  MemberCertificate out;
  out.norms.reserve(cls.size());
  for (std::size_t i = 0; i < cls.size(); ++i) {
    const double n = certifier.of([&](const Point& x) { return cls.eval(i, x); });
    out.norms.push_back(n);
    out.max_norm = std::max(out.max_norm, n);
    if (n > cls.norm_budget()) out.over_budget.push_back(i);
  }
  return out;
}

}  // namespace tvkb
