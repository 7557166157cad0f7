#include "pipecut/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace pipecut {

double rhat(const std::vector<Vector>& chains) {
  const std::size_t m = chains.size();
  if (m < 2) throw InvalidInput("rhat needs at least 2 chains");
  const Eigen::Index n = chains.front().size();
  if (n < 4) throw InvalidInput("rhat needs chains of length >= 4");
  for (const auto& c : chains) {
    if (c.size() != n) throw InvalidInput("rhat chains must have equal length");
  }

  Vector means(m);
  Vector vars(m);
  for (std::size_t c = 0; c < m; ++c) {
    means[c] = chains[c].mean();
    vars[c] = (chains[c].array() - means[c]).square().sum() / (n - 1);
  }
  const double grand = means.mean();
  const double b_over_n =
      (means.array() - grand).square().sum() / (m - 1);  // B / n
  const double w = vars.mean();
  if (w == 0.0) {
    return b_over_n == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  }
  const double nn = static_cast<double>(n);
  return std::sqrt((nn - 1.0) / nn + b_over_n / w);
}

Vector pip(const std::vector<IntMatrix>& xi_chains) {
  if (xi_chains.empty()) throw InvalidInput("pip: no chains");
  const Eigen::Index k = xi_chains.front().cols();
  Vector sum = Vector::Zero(k);
  double total = 0.0;
  for (const auto& c : xi_chains) {
    if (c.cols() != k) throw InvalidInput("pip: inconsistent trace widths");
    if (c.rows() == 0) continue;
    sum += c.cast<double>().colwise().sum().transpose();
    total += static_cast<double>(c.rows());
  }
  if (total == 0.0) throw InvalidInput("pip: empty traces");
  return sum / total;
}

Vector pip(const PosteriorSamples& samples) {
  std::vector<IntMatrix> xi;
  for (const auto& c : samples.chains) xi.push_back(c.xi);
  return pip(xi);
}

IntVector median_model(const Vector& pips) {
  IntVector bits(pips.size());
  for (Eigen::Index k = 0; k < pips.size(); ++k) {
    bits[k] = pips[k] >= 0.5 ? 1 : 0;  // inclusive boundary
  }
  return bits;
}

double empirical_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidInput("quantile of empty sample");
  if (q < 0.0 || q > 1.0) throw InvalidInput("quantile level out of range");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return (1.0 - frac) * values[lo] + frac * values[hi];
}

BridgingFrequencySummary bridging_frequency(
    const std::vector<IntMatrix>& zeta_chains) {
  if (zeta_chains.empty()) throw InvalidInput("bridging_frequency: no chains");
  BridgingFrequencySummary out;
  std::vector<double> all;
  for (const auto& c : zeta_chains) {
    const double n = static_cast<double>(c.cols());
    Vector bf(c.rows());
    for (Eigen::Index b = 0; b < c.rows(); ++b) {
      bf[b] = c.row(b).cast<double>().sum() / n;
    }
    for (Eigen::Index b = 0; b < bf.size(); ++b) all.push_back(bf[b]);
    out.per_chain.push_back(std::move(bf));
  }
  if (all.empty()) throw InvalidInput("bridging_frequency: empty traces");
  out.mean = 0.0;
  for (const double v : all) out.mean += v;
  out.mean /= static_cast<double>(all.size());
  out.lo95 = empirical_quantile(all, 0.025);
  out.hi95 = empirical_quantile(all, 0.975);
  return out;
}

BridgingFrequencySummary bridging_frequency(const PosteriorSamples& samples) {
  std::vector<IntMatrix> zeta;
  for (const auto& c : samples.chains) zeta.push_back(c.zeta);
  return bridging_frequency(zeta);
}

Vector cumulative_model_prob(const std::vector<IntMatrix>& xi_chains, int top) {
  if (top < 1) throw InvalidInput("cumulative_model_prob: top must be >= 1");
  // Count distinct configurations; the map key is the bit pattern, which
  // also provides the deterministic tie-break.
  std::map<std::vector<int>, long> counts;
  long total = 0;
  for (const auto& c : xi_chains) {
    for (Eigen::Index b = 0; b < c.rows(); ++b) {
      std::vector<int> key(c.cols());
      for (Eigen::Index k = 0; k < c.cols(); ++k) key[k] = c(b, k);
      ++counts[key];
      ++total;
    }
  }
  if (total == 0) throw InvalidInput("cumulative_model_prob: empty traces");
  std::vector<std::pair<long, std::vector<int>>> ranked;
  ranked.reserve(counts.size());
  for (const auto& [key, cnt] : counts) ranked.emplace_back(cnt, key);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  Vector curve(top);
  double cum = 0.0;
  for (int r = 0; r < top; ++r) {
    if (r < static_cast<int>(ranked.size())) {
      cum += static_cast<double>(ranked[r].first) / static_cast<double>(total);
    }
    curve[r] = cum;
  }
  return curve;
}

Vector cumulative_model_prob(const PosteriorSamples& samples, int top) {
  std::vector<IntMatrix> xi;
  for (const auto& c : samples.chains) xi.push_back(c.xi);
  return cumulative_model_prob(xi, top);
}

std::vector<OddsRatioSummary> odds_ratio_summary(
    const std::vector<Matrix>& eta_chains,
    const std::vector<IntMatrix>& xi_chains,
    const std::vector<std::string>& names, const Vector& scale) {
  if (eta_chains.size() != xi_chains.size()) {
    throw InvalidInput("odds_ratio_summary: trace lists differ in length");
  }
  if (eta_chains.empty()) throw InvalidInput("odds_ratio_summary: no chains");
  const Eigen::Index k = eta_chains.front().cols();
  if (static_cast<Eigen::Index>(names.size()) != k || scale.size() != k) {
    throw InvalidInput("odds_ratio_summary: names/scale do not match K");
  }
  const Vector pips = pip(xi_chains);

  std::vector<OddsRatioSummary> out(k);
  for (Eigen::Index kk = 0; kk < k; ++kk) {
    OddsRatioSummary& s = out[kk];
    s.name = names[kk];
    s.pip = pips[kk];
    std::vector<double> ratios;
    for (std::size_t c = 0; c < eta_chains.size(); ++c) {
      if (eta_chains[c].rows() != xi_chains[c].rows()) {
        throw InvalidInput("odds_ratio_summary: traces not aligned");
      }
      for (Eigen::Index b = 0; b < eta_chains[c].rows(); ++b) {
        if (xi_chains[c](b, kk) == 1) {
          ratios.push_back(std::exp(scale[kk] * eta_chains[c](b, kk)));
        }
      }
    }
    s.ever_included = !ratios.empty();
    if (s.ever_included) {
      double m = 0.0;
      for (const double v : ratios) m += v;
      s.mean = m / static_cast<double>(ratios.size());
      s.lo95 = empirical_quantile(ratios, 0.025);
      s.hi95 = empirical_quantile(ratios, 0.975);
    }
  }
  return out;
}

std::vector<OddsRatioSummary> odds_ratio_summary(const PosteriorSamples& samples,
                                                 const Vector& scale) {
  std::vector<Matrix> eta;
  std::vector<IntMatrix> xi;
  for (const auto& c : samples.chains) {
    eta.push_back(c.eta);
    xi.push_back(c.xi);
  }
  return odds_ratio_summary(eta, xi, samples.covariate_names, scale);
}

DiagnosticsReport diagnose(const PosteriorSamples& samples, int top_models) {
  DiagnosticsReport rep;
  const bool has_second =
      !samples.chains.empty() && samples.chains.front().eta0.size() > 0;
  const bool multi_chain = samples.chains.size() >= 2;
  const Eigen::Index b = samples.stored_per_chain();

  rep.bf = bridging_frequency(samples);

  if (multi_chain && b >= 4) {
    std::vector<double> values;
    auto add = [&](const std::string& name, const std::vector<Vector>& chains) {
      rep.rhat_names.push_back(name);
      values.push_back(rhat(chains));
    };
    add("bridging_frequency", rep.bf.per_chain);
    if (has_second) {
      std::vector<Vector> eta0_chains;
      for (const auto& c : samples.chains) eta0_chains.push_back(c.eta0);
      add("eta0", eta0_chains);
      std::vector<Vector> size_chains;
      for (const auto& c : samples.chains) {
        Vector s(c.xi.rows());
        for (Eigen::Index i = 0; i < c.xi.rows(); ++i) {
          s[i] = c.xi.row(i).cast<double>().sum();
        }
        size_chains.push_back(std::move(s));
      }
      add("model_size", size_chains);
      for (Eigen::Index kk = 0; kk < samples.n_covariates; ++kk) {
        std::vector<Vector> eta_chains;
        for (const auto& c : samples.chains) eta_chains.push_back(c.eta.col(kk));
        add("eta_" + samples.covariate_names[kk], eta_chains);
      }
    }
    rep.rhat_values = Eigen::Map<const Vector>(values.data(), values.size());
  }

  if (has_second) {
    rep.pips = pip(samples);
    rep.median = median_model(rep.pips);
    rep.cumulative_prob = cumulative_model_prob(samples, top_models);
    rep.odds_ratios =
        odds_ratio_summary(samples, Vector::Ones(samples.n_covariates));
    if (samples.regime == Regime::Full) {
      rep.has_kl_bound = true;
      rep.kl_bound = kl_bound_estimate(samples);
    }
  }
  return rep;
}

}  // namespace pipecut
