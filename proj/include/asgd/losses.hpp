#pragma once

#include <functional>

#include "asgd/error.hpp"
#include "asgd/types.hpp"

namespace asgd {

enum class LossFamily { Logistic, SqrtBinary, LogCosh, Multinomial };

const char* loss_family_name(LossFamily family);
LossFamily loss_family_from_name(const std::string& name);

// A loss family over linear predictions, with per-observation value,
// gradient and Hessian-vector products.
//
// radius() is the single constant R that serves both as the almost-sure
// per-sample gradient bound and as the self-concordance constant of the
// objective. For the logistic loss R equals the certified feature-norm
// bound; the other families need a factor of 2 on top of it (their link
// derivative or third-derivative ratio exceeds the logistic one).
class LossModel {
 public:
  LossModel(LossFamily family, double feature_bound, int dimension,
            int num_classes = 0);

  LossFamily family() const { return family_; }
  double feature_bound() const { return feature_bound_; }
  double radius() const { return radius_; }
  int dimension() const { return dimension_; }
  int num_classes() const { return num_classes_; }

  // Dimension of the parameter vector: d, or K*d for multinomial (the
  // feature map embeds x into the block of its class).
  int param_dim() const;

  // Full invariant check for one record (label domain and norm bound).
  void validate_observation(const Observation& obs) const;

  double value(const Observation& obs, const VectorXd& theta) const;
  VectorXd gradient(const Observation& obs, const VectorXd& theta) const;
  VectorXd hessian_vp(const Observation& obs, const VectorXd& theta,
                      const VectorXd& v) const;

  // Scalar link phi_y(u) with u = <x, theta>, defined for all families
  // except multinomial (which depends on one margin per class).
  bool has_scalar_link() const { return family_ != LossFamily::Multinomial; }
  double link_value(double label, double u) const;
  double link_derivative(double label, double u) const;
  double link_second_derivative(double label, double u) const;
  double link_third_derivative(double label, double u) const;

 private:
  LossFamily family_;
  double feature_bound_;
  double radius_;
  int dimension_;
  int num_classes_;

  void check_theta(const VectorXd& theta) const;
  void check_obs(const Observation& obs) const;
};

struct SegmentCheckResult {
  double max_ratio = 0.0;
  int num_probes = 0;
  int used_probes = 0;
  double guard_floor = 0.0;
};

// Finite-difference check of |phi'''(t)| <= R ||theta1-theta2|| phi''(t)
// along the segment, where phi(t) is the empirical risk of `model` on
// `data` at theta1 + t (theta2 - theta1). Probes where phi'' falls below
// the curvature guard are skipped (the ratio degenerates to 0/0 there).
// guard_floor < 0 selects an automatic floor that also accounts for the
// finite-difference noise floor of phi'''.
SegmentCheckResult check_self_concordance(const LossModel& model,
                                          const Dataset& data,
                                          const VectorXd& theta1,
                                          const VectorXd& theta2, int probes,
                                          double guard_floor = -1.0);

// Same check for an arbitrary one-dimensional section t -> phi(t); used by
// check_self_concordance and directly by negative-control tests.
SegmentCheckResult segment_ratio_check(
    const std::function<long double(long double)>& phi, double radius,
    double segment_norm, int probes, double guard_floor);

namespace detail {

// log(1 + e^t), evaluated as max(t,0) + log1p(e^{-|t|}) so that it never
// overflows for |t| up to ~700.
double softplus(double t);
double sigmoid(double t);
double log_cosh(double t);

}  // namespace detail

}  // namespace asgd
