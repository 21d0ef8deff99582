#include "transition_lens/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "transition_lens/csv.hpp"
#include "transition_lens/parallel.hpp"

namespace tlens {

// ---------------------------------------------------------------- grid mix

GridMixSeries forecast_grid_mix(const GridMixSeries& observed, const YearWindow& fit_years,
                                int horizon) {
  YearSeries measured;
  for (const auto& [y, u] : observed.measured())
    if (fit_years.contains(y)) measured.emplace(y, u);
  if (measured.size() < 2)
    throw InputError("grid mix forecast needs at least 2 measured years inside the fit window");

  const auto line = ols_fit(measured);
  GridMixSeries out;
  int last_measured = std::numeric_limits<int>::min();
  for (const auto& [y, p] : observed.points()) {
    if (p.provenance != MixProvenance::Measured) continue;
    out.set(y, p.u, MixProvenance::Measured);
    last_measured = std::max(last_measured, y);
  }
  bool saturated = false;
  for (int y = last_measured + 1; y <= horizon; ++y) {
    double u = saturated ? 1.0 : std::clamp(line.at(y), 0.0, 1.0);
    if (u >= 1.0) saturated = true;
    out.set(y, u, MixProvenance::Forecast);
  }
  return out;
}

// ---------------------------------------------------------------- kinds

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::BauLinear:
      return "bau_linear";
    case ScenarioKind::BauExponential:
      return "bau_exponential";
    case ScenarioKind::TransitionLinear:
      return "transition_linear";
    case ScenarioKind::TransitionExponential:
      return "transition_exponential";
  }
  return "?";
}

ScenarioKind parse_scenario_kind(std::string_view text) {
  for (auto k : kScenarioKinds)
    if (to_string(k) == text) return k;
  throw InputError("unknown scenario kind '" + std::string(text) + "'");
}

TrendMode mode_of(ScenarioKind kind) {
  return (kind == ScenarioKind::BauLinear || kind == ScenarioKind::TransitionLinear)
             ? TrendMode::Linear
             : TrendMode::Exponential;
}

bool is_transition(ScenarioKind kind) {
  return kind == ScenarioKind::TransitionLinear || kind == ScenarioKind::TransitionExponential;
}

// ---------------------------------------------------------------- firm paths

double ElectrificationPath::raw(int year) const {
  const double v = intercept + slope * static_cast<double>(year - base_year);
  return mode == TrendMode::Linear ? v : std::exp(v);
}

ElectrificationPath ElectrificationPath::reanchored(int year, double new_slope) const {
  // The anchor is taken in the fitted (linear or log) space.
  const double anchor = intercept + slope * static_cast<double>(year - base_year);
  return {mode, anchor - new_slope * static_cast<double>(year - base_year), new_slope, base_year};
}

std::optional<ElectrificationPath> path_from_fit(const std::optional<LineFit>& fit, TrendMode mode) {
  if (!fit) return std::nullopt;
  return ElectrificationPath{mode, fit->intercept, fit->slope, fit->base_year};
}

std::map<int, FirmPoint> forecast_firm(const ElectrificationPath& path, const GridMixSeries& mix,
                                       int first_year, int last_year) {
  std::map<int, FirmPoint> out;
  for (int y = first_year; y <= last_year; ++y) {
    const double u = mix.u(y);
    const double e = std::clamp(path.raw(y), 0.0, 1.0);
    out.emplace(y, FirmPoint{e, e * u, e * (1.0 - u), 1.0 - e});
  }
  return out;
}

std::vector<AggregatePoint> aggregate(std::span<const WeightedForecast> firms) {
  if (firms.empty()) throw InputError("cannot aggregate an empty firm set");
  struct Sums {
    double w = 0, l = 0, ef = 0, ff = 0;
  };
  std::map<int, Sums> by_year;
  for (const auto& f : firms) {
    if (!(f.weight > 0.0)) throw InputError("aggregation weight must be positive");
    for (const auto& [y, p] : *f.path) {
      auto& s = by_year[y];
      s.w += f.weight;
      s.l += f.weight * p.l;
      s.ef += f.weight * p.ef;
      s.ff += f.weight * p.ff;
    }
  }
  std::vector<AggregatePoint> out;
  for (const auto& [y, s] : by_year) {
    AggregatePoint p;
    p.year = y;
    p.l = s.l / s.w;
    p.ef = s.ef / s.w;
    p.ff = s.ff / s.w;
    p.f = 1.0 - p.l;
    out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------- inputs

std::vector<ScenarioFirm> build_scenario_firms(const std::vector<FitResult>& fits,
                                               const EnergyLedger& ledger,
                                               const FirmRegistry& registry,
                                               const YearWindow& window,
                                               const MatchSettings& match, Diagnostics& diag) {
  auto log_mean = [](const std::map<int, double>& values, const YearWindow& years) {
    double sum = 0.0;
    int n = 0;
    for (const auto& [y, v] : values)
      if (years.contains(y)) {
        sum += v;
        ++n;
      }
    // Non-positive or missing averages sit at ln 1 = 0 so distances stay finite.
    const double avg = n > 0 ? sum / n : 0.0;
    return std::log(std::max(avg, 1.0));
  };

  std::vector<ScenarioFirm> out;
  out.reserve(fits.size());
  for (const auto& fit : fits) {
    const auto* meta = registry.find(fit.id);
    const auto* years = ledger.find(fit.id);
    if (!meta || !meta->nace || !years) {
      diag.warn("scenario-unknown-firm", fit.id);
      continue;
    }
    ScenarioFirm f{fit.id, *meta->nace, 0.0, 0.0, 0.0, {}, fit.elec_linear, fit.elec_exponential};
    double total = 0.0;
    int n = 0;
    for (const auto& [y, fy] : *years) {
      if (!window.contains(y)) continue;
      f.observed.emplace(y, std::make_pair(fy.electricity_kwh(), fy.total_kwh()));
      total += fy.total_kwh();
      ++n;
    }
    f.mean_total_kwh = n > 0 ? total / n : 0.0;
    if (!(f.mean_total_kwh > 0.0)) {
      diag.warn("scenario-zero-energy", fit.id);
      continue;
    }
    f.log_revenue = log_mean(meta->revenue, match.revenue_years);
    f.log_employees = log_mean(meta->employees, match.employee_years);
    out.push_back(std::move(f));
  }
  return out;
}

// ---------------------------------------------------------------- matching

std::string_view to_string(MatchLevel level) {
  switch (level) {
    case MatchLevel::Nace4:
      return "nace4";
    case MatchLevel::Nace2:
      return "nace2";
    case MatchLevel::None:
      return "none";
  }
  return "?";
}

MatchAssignment match_donors(std::span<const ScenarioFirm> recipients,
                             std::span<const ScenarioFirm> pool, TrendMode mode) {
  std::map<std::string, std::vector<const ScenarioFirm*>> by_nace4, by_nace2;
  for (const auto& d : pool) {
    const auto& fit = d.fit(mode);
    if (!fit || !(fit->slope > 0.0)) continue;
    by_nace4[d.nace.dotted()].push_back(&d);
    by_nace2[d.nace.division()].push_back(&d);
  }

  auto nearest = [](const ScenarioFirm& r, const std::vector<const ScenarioFirm*>& cands)
      -> std::optional<Match> {
    std::optional<Match> best;
    for (const auto* d : cands) {
      if (d->id == r.id) continue;
      const double dx = d->log_revenue - r.log_revenue;
      const double dy = d->log_employees - r.log_employees;
      const double dist = std::sqrt(dx * dx + dy * dy);
      if (!best || dist < best->distance || (dist == best->distance && d->id < best->donor))
        best = Match{d->id, MatchLevel::None, dist};
    }
    return best;
  };

  MatchAssignment out;
  for (const auto& r : recipients) {
    std::optional<Match> m;
    if (const auto it = by_nace4.find(r.nace.dotted()); it != by_nace4.end()) {
      m = nearest(r, it->second);
      if (m) m->level = MatchLevel::Nace4;
    }
    if (!m)
      if (const auto it = by_nace2.find(r.nace.division()); it != by_nace2.end()) {
        m = nearest(r, it->second);
        if (m) m->level = MatchLevel::Nace2;
      }
    out.emplace(r.id, m.value_or(Match{}));
  }
  return out;
}

// ---------------------------------------------------------------- scenarios

const AggregatePoint& AggregateScenario::at(int year) const {
  for (const auto& p : points)
    if (p.year == year) return p;
  throw InputError("scenario has no year " + std::to_string(year));
}

AggregateScenario run_scenario(ScenarioKind kind, const ScenarioInputs& inputs) {
  const auto mode = mode_of(kind);
  AggregateScenario result;
  result.kind = kind;

  std::vector<const ScenarioFirm*> active;
  for (const auto& f : inputs.firms) {
    if (f.fit(mode)) active.push_back(&f);
    else ++result.dropped;
  }
  if (active.empty()) throw InputError(std::string(to_string(kind)) + ": no firm has a usable fit");

  std::map<FirmId, ElectrificationPath> paths;
  for (const auto* f : active) paths.emplace(f->id, *path_from_fit(f->fit(mode), mode));

  if (is_transition(kind)) {
    std::vector<ScenarioFirm> recipients, pool;
    for (const auto* f : active) {
      if (f->fit(mode)->slope > 0.0) pool.push_back(*f);
      else recipients.push_back(*f);
    }
    result.matches = match_donors(recipients, pool, mode);
    for (const auto& [rid, match] : result.matches) {
      if (match.level == MatchLevel::None) continue;
      const double donor_slope = paths.at(match.donor).slope;
      auto& p = paths.at(rid);
      p = inputs.reanchor ? p.reanchored(inputs.window.last, donor_slope)
                          : ElectrificationPath{p.mode, p.intercept, donor_slope, p.base_year};
    }
  }

  // Measured years come from observed kWh; forecast years from the paths.
  const int first_forecast = inputs.window.last + 1;
  std::vector<WeightedForecast> weighted;
  weighted.reserve(active.size());
  for (const auto* f : active) {
    auto path = forecast_firm(paths.at(f->id), inputs.mix, first_forecast, inputs.horizon);
    auto& stored = result.firm_paths[f->id] = std::move(path);
    weighted.push_back({f->mean_total_kwh, &stored});
  }

  for (int y = inputs.window.first; y <= inputs.window.last; ++y) {
    const double u = inputs.mix.u(y);
    double sum_t = 0, sum_e = 0;
    for (const auto* f : active) {
      const auto it = f->observed.find(y);
      if (it == f->observed.end()) continue;
      sum_e += it->second.first;
      sum_t += it->second.second;
    }
    if (!(sum_t > 0.0)) continue;
    AggregatePoint p;
    p.year = y;
    p.measured = true;
    p.l = sum_e * u / sum_t;
    p.ef = sum_e * (1.0 - u) / sum_t;
    p.ff = (sum_t - sum_e) / sum_t;
    p.f = 1.0 - p.l;
    result.points.push_back(p);
  }
  if (first_forecast <= inputs.horizon) {
    auto forecast = aggregate(weighted);
    result.points.insert(result.points.end(), forecast.begin(), forecast.end());
  }
  return result;
}

// ---------------------------------------------------------------- uncertainty

std::vector<RunSpec> parse_run_set(std::string_view spec, const YearWindow& window) {
  std::vector<RunSpec> runs{RunSpec{}};
  if (spec.empty() || spec == "all") {
    for (int y : window.years()) runs.push_back({y});
    return runs;
  }
  if (spec == "main") return runs;
  if (spec.find_first_not_of("0123456789") == std::string_view::npos) {
    const int n = csv::parse_int(spec);
    if (n > window.size())
      throw InputError("run count " + std::string(spec) + " exceeds the " +
                       std::to_string(window.size()) + " window years");
    for (int i = 0; i < n; ++i) runs.push_back({window.first + i});
    return runs;
  }
  // Comma list; the main run is always included.
  std::size_t start = 0;
  while (true) {
    const auto comma = spec.find(',', start);
    const auto item = spec.substr(start, comma == std::string_view::npos ? spec.npos : comma - start);
    if (item != "main") {
      const int y = csv::parse_int(item);
      if (!window.contains(y))
        throw InputError("excluded year " + std::to_string(y) + " outside the window");
      runs.push_back({y});
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return runs;
}

UncertaintyEnvelope uncertainty_envelope(ScenarioKind kind, const ScenarioInputs& inputs,
                                         std::span<const RunSpec> runs,
                                         const HuberOptions& huber, unsigned threads,
                                         Diagnostics& diag) {
  const auto mode = mode_of(kind);
  const auto main = run_scenario(kind, inputs);

  UncertaintyEnvelope env;
  env.kind = kind;
  env.runs.push_back({});
  for (const auto& p : main.points) env.points.push_back({p.year, p.l, p.l, p.l});

  std::vector<std::optional<AggregateScenario>> reduced(runs.size());
  std::vector<std::string> reasons(runs.size());
  parallel_for(runs.size(), threads, [&](std::size_t r) {
    if (!runs[r].excluded_year) return;
    const int drop = *runs[r].excluded_year;
    if (inputs.window.size() - 1 < 3) {
      reasons[r] = "excluding " + std::to_string(drop) + " leaves fewer than 3 years";
      return;
    }
    ScenarioInputs copy = inputs;
    for (auto& f : copy.firms) {
      YearSeries e;
      for (const auto& [y, et] : f.observed)
        if (y != drop && et.second > 0.0) e.emplace(y, et.first / et.second);
      auto& slot = mode == TrendMode::Linear ? f.elec_linear : f.elec_exponential;
      try {
        slot = mode == TrendMode::Linear ? huber_fit_linear(e, huber)
                                         : huber_fit_exponential(e, huber);
      } catch (const FitError&) {
        slot.reset();
      }
    }
    try {
      reduced[r] = run_scenario(kind, copy);
    } catch (const InputError& e) {
      reasons[r] = e.what();
    }
  });

  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (!runs[r].excluded_year) continue;
    if (!reduced[r]) {
      env.skipped.push_back(reasons[r]);
      diag.warn("uncertainty-run-skipped", reasons[r]);
      continue;
    }
    env.runs.push_back(runs[r]);
    for (auto& pt : env.points) {
      const double l = reduced[r]->at(pt.year).l;
      pt.min = std::min(pt.min, l);
      pt.max = std::max(pt.max, l);
    }
  }
  return env;
}

void write_scenario(const std::filesystem::path& path, const AggregateScenario& scenario,
                    const UncertaintyEnvelope* envelope, const GridMixSeries& mix) {
  csv::Writer w(path, {"year", "l", "e_f", "ff", "f", "l_min", "l_max", "u", "type"});
  for (const auto& p : scenario.points) {
    double lo = p.l, hi = p.l;
    if (envelope)
      for (const auto& e : envelope->points)
        if (e.year == p.year) {
          lo = e.min;
          hi = e.max;
        }
    w << p.year << p.l << p.ef << p.ff << p.f << lo << hi << mix.u(p.year)
      << std::string_view(p.measured ? "measured" : "forecast");
    w.end_row();
  }
}

void write_matches(const std::filesystem::path& path, const MatchAssignment& matches) {
  csv::Writer w(path, {"recipient", "donor", "level", "distance"});
  for (const auto& [rid, m] : matches) {
    w << std::string_view(rid) << std::string_view(m.donor) << to_string(m.level);
    if (m.level == MatchLevel::None) w << std::string_view("");
    else w << m.distance;
    w.end_row();
  }
}

}  // namespace tlens
