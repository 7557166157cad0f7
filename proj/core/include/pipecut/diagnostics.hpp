#ifndef PIPECUT_DIAGNOSTICS_HPP
#define PIPECUT_DIAGNOSTICS_HPP

#include <string>
#include <vector>

#include "pipecut/common.hpp"
#include "pipecut/engine.hpp"

namespace pipecut {

// Classical Gelman-Rubin potential scale reduction factor
// sqrt((n-1)/n + B / (n W)) over >= 2 chains of equal length >= 4.
// Identical constant chains give 1; zero within-variance with unequal means
// gives +infinity.
double rhat(const std::vector<Vector>& chains);

// Posterior inclusion probabilities: column means of the stacked xi draws.
Vector pip(const std::vector<IntMatrix>& xi_chains);
Vector pip(const PosteriorSamples& samples);

// Median model: include covariate k iff pip_k >= 0.5 (inclusive).
IntVector median_model(const Vector& pips);

// Bridging frequency (1/N) sum_i zeta_i per draw, with posterior mean and
// equal-tailed 95% interval.
struct BridgingFrequencySummary {
  std::vector<Vector> per_chain;  // BF trace per chain
  double mean = 0.0;
  double lo95 = 0.0;
  double hi95 = 0.0;
};

BridgingFrequencySummary bridging_frequency(const std::vector<IntMatrix>& zeta_chains);
BridgingFrequencySummary bridging_frequency(const PosteriorSamples& samples);

// Cumulative empirical probability of the top most frequent xi
// configurations; ties break on the bit pattern for determinism.  The curve
// has exactly `top` entries and is held constant once models are exhausted.
Vector cumulative_model_prob(const std::vector<IntMatrix>& xi_chains, int top);
Vector cumulative_model_prob(const PosteriorSamples& samples, int top);

// Conditional-on-inclusion odds ratio summary per covariate: mean and
// equal-tailed 95% interval of exp(scale_k * eta_k) over draws with
// xi_k = 1, with the PIP reported alongside.  Covariates never included are
// flagged and carry no summary.
struct OddsRatioSummary {
  std::string name;
  double pip = 0.0;
  bool ever_included = false;
  double mean = 1.0;
  double lo95 = 1.0;
  double hi95 = 1.0;
};

std::vector<OddsRatioSummary> odds_ratio_summary(
    const std::vector<Matrix>& eta_chains,
    const std::vector<IntMatrix>& xi_chains,
    const std::vector<std::string>& names, const Vector& scale);
std::vector<OddsRatioSummary> odds_ratio_summary(const PosteriorSamples& samples,
                                                 const Vector& scale);

// Equal-tailed empirical quantile with linear interpolation.
double empirical_quantile(std::vector<double> values, double q);

struct DiagnosticsReport {
  std::vector<std::string> rhat_names;
  Vector rhat_values;
  Vector pips;                 // K
  IntVector median;            // K
  BridgingFrequencySummary bf;
  Vector cumulative_prob;      // top-R curve
  std::vector<OddsRatioSummary> odds_ratios;
  bool has_kl_bound = false;
  KlBoundEstimate kl_bound;
};

// Full report over a stored run; the KL bound is attached for full-posterior
// samples only.  R-hat covers eta0, each eta_k, the bridging frequency, and
// the model size when the corresponding traces exist.
DiagnosticsReport diagnose(const PosteriorSamples& samples, int top_models = 100);

}  // namespace pipecut

#endif  // PIPECUT_DIAGNOSTICS_HPP
