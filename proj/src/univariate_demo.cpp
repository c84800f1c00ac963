#include "gmix/univariate_demo.hpp"

#include <cmath>

#include "gmix/error.hpp"

namespace gmix {

void TwoMeanModel::validate() const {
  if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("eta must lie in (0, 1]");
  if (!(sigma2 > 0.0)) throw DomainError("sigma2 must be positive");
  if (!(prior_var > 0.0)) throw DomainError("prior variance must be positive");
}

std::vector<TwoMeanDraw> run_univariate_demo(RngStream& rng, std::span<const double> y,
                                             const TwoMeanModel& model, int sweeps, double init_mu1,
                                             double init_mu2, bool permute) {
  model.validate();
  if (sweeps <= 0) throw DomainError("sweeps must be positive");
  if (permute && model.eta != 0.5) {
    throw DomainError("label permutation leaves the posterior invariant only for eta = 1/2");
  }
  const double kappa = model.sigma2 / model.prior_var;
  const double log_eta = std::log(model.eta);
  const double log_rest = model.eta < 1.0 ? std::log1p(-model.eta) : -INFINITY;
  const double half_inv_var = 0.5 / model.sigma2;

  double mu1 = init_mu1;
  double mu2 = init_mu2;
  std::vector<TwoMeanDraw> out;
  out.reserve(static_cast<std::size_t>(sweeps));
  for (int t = 0; t < sweeps; ++t) {
    double s1 = 0.0, s2 = 0.0;
    int n1 = 0, n2 = 0;
    for (double yi : y) {
      const double a = log_eta - (yi - mu1) * (yi - mu1) * half_inv_var;
      const double b = log_rest - (yi - mu2) * (yi - mu2) * half_inv_var;
      // P(z_i = 1) = 1 / (1 + exp(b - a))
      const double p1 = 1.0 / (1.0 + std::exp(b - a));
      if (rng.uniform() < p1) {
        s1 += yi;
        ++n1;
      } else {
        s2 += yi;
        ++n2;
      }
    }
    const double prec1 = kappa + n1;
    const double prec2 = kappa + n2;
    mu1 = s1 / prec1 + std::sqrt(model.sigma2 / prec1) * rng.normal();
    mu2 = s2 / prec2 + std::sqrt(model.sigma2 / prec2) * rng.normal();
    if (permute && rng.uniform() < 0.5) {
      std::swap(mu1, mu2);
      n1 = n2;
    }
    out.push_back({mu1, mu2, n1});
  }
  return out;
}

}  // namespace gmix
