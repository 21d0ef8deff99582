#include "transition_lens/classify.hpp"

#include <cmath>
#include <cstdio>

#include "transition_lens/csv.hpp"
#include "transition_lens/parallel.hpp"
#include "transition_lens/stats.hpp"

namespace tlens {

std::array<double, 5> FirmFeatures::log_predictors() const {
  return {std::log(fc), std::log(ec), std::log(revenue), std::log(employees), std::log(total_kwh)};
}

std::vector<FirmFeatures> prepare_features(const std::vector<FitResult>& fits,
                                           const EnergyLedger& ledger,
                                           const FirmRegistry& registry, const YearWindow& window,
                                           Diagnostics& diag) {
  std::vector<FirmFeatures> out;
  for (const auto& fit : fits) {
    const auto status = transition_status(fit);
    if (!status) {
      diag.count("features-dropped:undefined-status");
      continue;
    }
    const auto* meta = registry.find(fit.id);
    const auto* years = ledger.find(fit.id);
    if (!meta || !years || !meta->nace) {
      diag.warn("features-dropped:unknown-firm", fit.id);
      continue;
    }

    double fc = 0, ec = 0, rev = 0, emp = 0, total = 0;
    int n_rev = 0, n_emp = 0, n_total = 0;
    bool bad_revenue = false;
    for (int y : window.years()) {
      const auto fy = years->find(y);
      if (fy != years->end()) {
        total += fy->second.total_kwh();
        ++n_total;
      }
      const auto r = meta->revenue.find(y);
      if (r != meta->revenue.end()) {
        if (!(r->second > 0.0)) {
          bad_revenue = true;
          break;
        }
        rev += r->second;
        ++n_rev;
        if (fy != years->end()) {
          fc += fy->second.fossil_huf() / r->second;
          ec += fy->second.huf[index(Carrier::Electricity)] / r->second;
        }
      }
      const auto e = meta->employees.find(y);
      if (e != meta->employees.end()) {
        emp += e->second;
        ++n_emp;
      }
    }
    if (bad_revenue || n_rev == 0) {
      diag.count("features-dropped:nonpositive-revenue");
      continue;
    }
    FirmFeatures f;
    f.id = fit.id;
    f.section = meta->nace->section();
    f.fc = fc / n_rev;
    f.ec = ec / n_rev;
    f.revenue = rev / n_rev;
    f.employees = n_emp > 0 ? emp / n_emp : 0.0;
    f.total_kwh = n_total > 0 ? total / n_total : 0.0;
    f.transitioning = *status == TransitionStatus::Transitioning;
    if (!(f.employees > 0.0)) {
      diag.count("features-dropped:zero-employees");
      continue;
    }
    if (!(f.fc > 0.0) || !(f.ec > 0.0) || !(f.total_kwh > 0.0)) {
      diag.count("features-dropped:zero-average");
      continue;
    }
    out.push_back(f);
  }
  return out;
}

double odds_ratio(double beta, double step) { return std::exp(step * beta); }

std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  if (p < 0.1) return ".";
  return "";
}

std::string format_aor(const LogitCoefficient& c) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.3f%s [%.3f, %.3f]", c.aor, c.stars.c_str(), c.ci_low,
                c.ci_high);
  return buf;
}

std::optional<SectorLogit> fit_sector(const std::string& sector,
                                      std::span<const FirmFeatures> firms,
                                      const LogitSettings& settings, std::string* skip_reason) {
  std::size_t positives = 0;
  for (const auto& f : firms) positives += f.transitioning ? 1 : 0;
  auto skip = [&](std::string why) -> std::optional<SectorLogit> {
    if (skip_reason) *skip_reason = std::move(why);
    return std::nullopt;
  };
  if (firms.size() < settings.min_observations)
    return skip("too few observations (" + std::to_string(firms.size()) + ")");
  if (positives == 0 || positives == firms.size()) return skip("single outcome class");

  const auto n = static_cast<Eigen::Index>(firms.size());
  const Eigen::Index k = 1 + static_cast<Eigen::Index>(kPredictorNames.size());
  Eigen::MatrixXd x(n, k);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& f = firms[static_cast<std::size_t>(i)];
    x(i, 0) = 1.0;
    const auto logs = f.log_predictors();
    for (std::size_t j = 0; j < logs.size(); ++j) x(i, static_cast<Eigen::Index>(j) + 1) = logs[j];
    y[i] = f.transitioning ? 1.0 : 0.0;
  }
  std::vector<std::string> names{"intercept"};
  names.insert(names.end(), kPredictorNames.begin(), kPredictorNames.end());

  auto solver = settings.solver;
  solver.leading_intercept = true;
  LogitFit fit;
  try {
    fit = fit_logit(x, y, names, solver);
  } catch (const NumericalError& e) {
    throw NumericalError("classify", "sector " + sector + ": " + e.context(), e.what());
  }

  SectorLogit out;
  out.sector = sector;
  out.n = firms.size();
  out.converged = fit.converged;
  out.intercept = fit.beta[0];
  if (fit.separation) out.warning = "separation suspected (|beta| > threshold)";
  else if (!fit.converged) out.warning = "Newton iteration did not converge";
  for (Eigen::Index j = 1; j < k; ++j) {
    LogitCoefficient c;
    c.predictor = names[static_cast<std::size_t>(j)];
    c.beta = fit.beta[j];
    c.se = std::sqrt(std::max(0.0, fit.cov_robust(j, j)));
    c.aor = odds_ratio(c.beta, settings.step);
    c.ci_low = odds_ratio(c.beta - settings.z * c.se, settings.step);
    c.ci_high = odds_ratio(c.beta + settings.z * c.se, settings.step);
    c.p_value = c.se > 0.0 ? stats::two_sided_p(c.beta / c.se) : 1.0;
    c.stars = significance_stars(c.p_value);
    out.coefficients.push_back(std::move(c));
  }
  return out;
}

ClassificationResult classify_sectors(const std::vector<FirmFeatures>& firms,
                                      const LogitSettings& settings, unsigned threads,
                                      Diagnostics& diag) {
  std::map<std::string, std::vector<FirmFeatures>> by_sector;
  for (const auto& f : firms) by_sector[std::string(1, f.section)].push_back(f);

  std::vector<std::string> sectors;
  for (const auto& [s, _] : by_sector) sectors.push_back(s);
  std::vector<std::optional<SectorLogit>> fitted(sectors.size());
  std::vector<std::string> reasons(sectors.size());
  parallel_for(sectors.size(), threads, [&](std::size_t i) {
    fitted[i] = fit_sector(sectors[i], by_sector.at(sectors[i]), settings, &reasons[i]);
  });

  ClassificationResult result;
  for (std::size_t i = 0; i < sectors.size(); ++i) {
    if (fitted[i]) {
      if (!fitted[i]->warning.empty())
        diag.warn("logit-not-converged", "sector " + sectors[i] + ": " + fitted[i]->warning);
      result.sectors.push_back(std::move(*fitted[i]));
    } else {
      diag.count("sector-skipped");
      result.skipped.emplace(sectors[i], reasons[i]);
    }
  }
  return result;
}

void write_logit_results(const std::filesystem::path& path, const ClassificationResult& result) {
  csv::Writer w(path, {"sector", "predictor", "beta", "robust_se", "aor", "ci_low", "ci_high",
                       "p_value", "stars", "formatted", "n", "converged", "note"});
  for (const auto& s : result.sectors)
    for (const auto& c : s.coefficients) {
      w << std::string_view(s.sector) << std::string_view(c.predictor) << c.beta << c.se << c.aor
        << c.ci_low << c.ci_high << c.p_value << std::string_view(c.stars)
        << std::string_view(format_aor(c)) << s.n << s.converged << std::string_view(s.warning);
      w.end_row();
    }
  for (const auto& [sector, why] : result.skipped) {
    w << std::string_view(sector) << std::string_view("") << std::string_view("")
      << std::string_view("") << std::string_view("") << std::string_view("")
      << std::string_view("") << std::string_view("") << std::string_view("")
      << std::string_view("") << std::size_t{0} << false
      << std::string_view("skipped: " + why);
    w.end_row();
  }
}

void write_features(const std::filesystem::path& path, const std::vector<FirmFeatures>& firms) {
  csv::Writer w(path, {"id", "section", "fc", "ec", "revenue", "employees", "total_kwh",
                       "transitioning"});
  for (const auto& f : firms) {
    w << std::string_view(f.id) << std::string_view(&f.section, 1) << f.fc << f.ec << f.revenue
      << f.employees << f.total_kwh << f.transitioning;
    w.end_row();
  }
}

}  // namespace tlens
