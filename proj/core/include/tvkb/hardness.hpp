#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tvkb/kernel.hpp"

namespace tvkb {

/// Smooth compactly supported bump: height * h(2 ||x - center|| / width)
/// with h(r) = exp(1 - 1/(1 - r^2)) for r < 1 and 0 otherwise.
/// The support is the open ball of radius width/2, so bumps centered on a
/// width-w grid never overlap.
struct BumpSpec {
  Point center;
  double width = 1.0;
  double height = 1.0;  // peak value, 2 eps for hard-class members
};

double bump_eval(const BumpSpec& bump, const Point& x);

/// Implied constants for every Theta(.) relation used while building hard
/// instances. All default to 1 except the eps/B guard.
struct Calibration {
  double c0_width = 1.0;    // w = c0_width * (eps/B)^(1/nu)
  double c0_eps = 1.0;      // eps = c0_eps * B^(d/(2nu+d)) tau^(-nu/(2nu+d))
  double c0_horizon = 1.0;  // tau = floor(c0_horizon * M / eps^2)
  double c0_blocks = 1.0;   // block-count constant of the time-varying schedules
  double eps_ratio_max = 0.1;

  friend bool operator==(const Calibration&, const Calibration&) = default;
};

/// Bump width that keeps a height-2eps member within the norm scaling law.
/// Matern: c0 (eps/B)^(1/nu). SE: c0 log(B/eps)^(-1/2), clamped to 1.
/// Throws ValidationError if eps > B, or eps == B for SE.
double width_for_height(double eps, double norm_budget, const KernelSpec& kernel, double c0);

/// Bump half-height for a stationary horizon tau:
/// c0 B^(d/(2nu+d)) tau^(-nu/(2nu+d)), optionally capped at ratio_cap * B.
/// nu = +inf gives c0 tau^(-1/2).
double epsilon_for_horizon(double tau, double norm_budget, double nu, std::size_t d, double c0,
                           std::optional<double> ratio_cap = std::nullopt);

/// Longest horizon the M-member class keeps hard: floor(c0 M / eps^2).
std::size_t budget_horizon(std::size_t members, double eps, double c0);

/// Largest class the library will materialize.
inline constexpr std::size_t kMaxMembers = std::size_t{1} << 20;

/// The size-M "needle in a haystack" family: one bump of height 2 eps at
/// every center of the width-w grid. Immutable once built.
class HardClass {
 public:
  HardClass(KernelSpec kernel, std::size_t d, double norm_budget, double eps,
            Calibration calibration);

  const KernelSpec& kernel() const noexcept { return kernel_; }
  std::size_t dim() const noexcept { return d_; }
  double norm_budget() const noexcept { return norm_budget_; }
  double eps() const noexcept { return eps_; }
  double peak() const noexcept { return 2.0 * eps_; }
  double width() const noexcept { return width_; }
  std::size_t size() const noexcept { return centers_.size(); }
  const std::vector<Point>& centers() const noexcept { return centers_; }
  const Calibration& calibration() const noexcept { return calibration_; }

  BumpSpec member(std::size_t i) const;
  double eval(std::size_t i, const Point& x) const;

  /// Copy with every member's height multiplied by `factor` in (0, 1].
  /// Width and centers are unchanged.
  HardClass scaled(double factor) const;

  nlohmann::json to_json() const;

 private:
  KernelSpec kernel_;
  std::size_t d_ = 1;
  double norm_budget_ = 1.0;
  double eps_ = 0.0;
  double width_ = 1.0;
  Calibration calibration_;
  std::vector<Point> centers_;
};

/// Named constructor matching the library's free-function style.
HardClass hard_class(const KernelSpec& kernel, std::size_t d, double norm_budget, double eps,
                     const Calibration& calibration = {});

/// sqrt(y^T K^-1 y) over the sampled points: the norm of the minimal-norm
/// interpolant, hence a lower bound on the RKHS norm of any function that
/// takes these values. Throws NumericError if the Gram matrix cannot be
/// factorized within the jitter schedule.
double rkhs_norm_lb(std::span<const std::pair<Point, double>> values, const KernelSpec& kernel);

/// Reusable form for many value vectors on one probe set.
class InterpolantNorm {
 public:
  InterpolantNorm(const KernelSpec& kernel, std::vector<Point> probe);

  const std::vector<Point>& probe() const noexcept { return probe_; }
  double jitter() const noexcept { return factor_.jitter; }

  /// Certificate for values sampled at probe().
  double operator()(const Eigen::VectorXd& values) const;

  /// Certificate for `f` sampled at probe().
  double of(const std::function<double(const Point&)>& f) const;

 private:
  std::vector<Point> probe_;
  GramFactor factor_;
};

using ScalarField = std::function<double(const Point&)>;

double sup_norm_on_grid(const ScalarField& f, std::span<const Point> probe);
double linf_distance(const ScalarField& f, const ScalarField& g, std::span<const Point> probe);

/// Probe points for exact sup-norm audits: a uniform grid plus every center.
std::vector<Point> audit_probe(const HardClass& cls, std::size_t per_axis);

/// Per-member stencil inside each support (offsets {-2,-1,0,1,2} w/5 per
/// axis). Used as the common probe set of RKHS certificates.
std::vector<Point> support_stencil(const HardClass& cls);

struct MemberCertificate {
  std::vector<double> norms;          // certificate per member
  std::vector<std::size_t> over_budget;  // members whose certificate exceeds B
  double max_norm = 0.0;
};

/// Certificates of every member on a common probe set.
MemberCertificate certify_members(const HardClass& cls, const InterpolantNorm& certifier);

}  // namespace tvkb
