#include "transition_lens/metrics.hpp"

#include <cmath>

#include "transition_lens/csv.hpp"
#include "transition_lens/parallel.hpp"

namespace tlens {

// ---------------------------------------------------------------- grid mix

void GridMixSeries::set(int year, double u, MixProvenance provenance) {
  if (!(u >= 0.0 && u <= 1.0))
    throw InputError("grid mix u(" + std::to_string(year) + ") = " + csv::format_double(u) +
                     " outside [0,1]");
  points_[year] = {u, provenance};
}

double GridMixSeries::u(int year) const {
  const auto it = points_.find(year);
  if (it == points_.end()) throw InputError("no grid mix value for " + std::to_string(year));
  return it->second.u;
}

std::map<int, double> GridMixSeries::measured() const {
  std::map<int, double> out;
  for (const auto& [y, p] : points_)
    if (p.provenance == MixProvenance::Measured) out.emplace(y, p.u);
  return out;
}

GridMixSeries GridMixSeries::read(const std::filesystem::path& path) {
  const auto t = csv::Table::read(path);
  const auto c_year = t.column("year");
  const auto c_u = t.column("u");
  const auto c_prov = t.find_column("provenance");
  GridMixSeries mix;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    auto prov = MixProvenance::Measured;
    if (c_prov) {
      const auto p = t.cell(r, *c_prov);
      if (p == "forecast") prov = MixProvenance::Forecast;
      else if (p != "measured" && !p.empty())
        throw SchemaError(t.source(), "provenance",
                          t.source() + ": unknown provenance '" + std::string(p) + "'");
    }
    try {
      mix.set(t.integer(r, c_year), t.number(r, c_u), prov);
    } catch (const InputError& e) {
      throw SchemaError(t.source(), "u", t.source() + ": " + e.what());
    }
  }
  return mix;
}

void GridMixSeries::write(const std::filesystem::path& path) const {
  csv::Writer w(path, {"year", "u", "provenance"});
  for (const auto& [y, p] : points_) {
    w << y << p.u
      << std::string_view(p.provenance == MixProvenance::Measured ? "measured" : "forecast");
    w.end_row();
  }
}

// ---------------------------------------------------------------- shares

YearSeries ShareSeries::electrification() const {
  YearSeries s;
  for (const auto& [y, p] : values) s.emplace(y, p.e);
  return s;
}

YearSeries ShareSeries::low_carbon() const {
  YearSeries s;
  for (const auto& [y, p] : values) s.emplace(y, p.l);
  return s;
}

std::vector<ShareSeries> low_carbon_shares(const EnergyLedger& ledger, const GridMixSeries& mix,
                                           Diagnostics& diag) {
  std::vector<ShareSeries> out;
  out.reserve(ledger.size());
  for (const auto& [id, years] : ledger.firms()) {
    ShareSeries s{id, {}};
    for (const auto& [year, fy] : years) {
      const double total = fy.total_kwh();
      if (!(total > 0.0)) {
        diag.warn("zero-total-energy", id + " in " + std::to_string(year));
        continue;
      }
      const double e = fy.electricity_kwh() / total;
      s.values.emplace(year, SharePoint{e, e * mix.u(year)});
    }
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------- fits

std::optional<double> FitResult::delta() const {
  return linear ? std::optional(linear->slope) : std::nullopt;
}
std::optional<double> FitResult::lambda() const {
  return exponential ? std::optional(exponential->slope) : std::nullopt;
}
std::optional<double> FitResult::epsilon() const {
  return elec_linear ? std::optional(elec_linear->slope) : std::nullopt;
}
std::optional<double> FitResult::mu() const {
  return elec_exponential ? std::optional(elec_exponential->slope) : std::nullopt;
}
std::optional<double> FitResult::beta() const {
  return exponential ? std::optional(std::exp(exponential->intercept)) : std::nullopt;
}

namespace {

template <class F>
std::optional<LineFit> attempt(F&& f, std::string& note) {
  try {
    return f();
  } catch (const FitError& e) {
    if (note.empty()) note = e.what();
    return std::nullopt;
  }
}

}  // namespace

ElectrificationFits electrification_fits(const ShareSeries& share, const HuberOptions& opts) {
  const auto e = share.electrification();
  return {huber_fit_linear(e, opts), huber_fit_exponential(e, opts)};
}

FitResult fit_firm(const ShareSeries& share, const HuberOptions& opts) {
  FitResult r;
  r.id = share.id;
  const auto l = share.low_carbon();
  const auto e = share.electrification();
  r.linear = attempt([&] { return huber_fit_linear(l, opts); }, r.note);
  r.exponential = attempt([&] { return huber_fit_exponential(l, opts); }, r.note);
  r.elec_linear = attempt([&] { return huber_fit_linear(e, opts); }, r.note);
  r.elec_exponential = attempt([&] { return huber_fit_exponential(e, opts); }, r.note);
  if (l.size() >= 2) {
    r.delta_ols = ols_fit(l).slope;
    bool positive = true;
    YearSeries logs;
    for (const auto& [y, v] : l) {
      positive = positive && v > 0.0;
      if (positive) logs.emplace(y, std::log(v));
    }
    if (positive) r.lambda_ols = ols_fit(logs).slope;
  }
  return r;
}

std::vector<FitResult> fit_all(const std::vector<ShareSeries>& shares, const HuberOptions& opts,
                               unsigned threads, Diagnostics& diag) {
  std::vector<FitResult> out(shares.size());
  parallel_for(shares.size(), threads, [&](std::size_t i) { out[i] = fit_firm(shares[i], opts); });
  for (const auto& f : out) {
    if (!f.note.empty()) diag.warn("fit-failed", f.id + ": " + f.note);
    for (const auto* fit : {&f.linear, &f.exponential, &f.elec_linear, &f.elec_exponential})
      if (*fit && !(*fit)->converged) diag.warn("fit-not-converged", f.id);
  }
  return out;
}

std::string_view to_string(TransitionStatus s) {
  return s == TransitionStatus::Transitioning ? "transitioning" : "non-transitioning";
}

std::optional<TransitionStatus> transition_status(const FitResult& fit) {
  const auto d = fit.delta();
  const auto l = fit.lambda();
  if (!d || !l) return std::nullopt;
  return (*d > 0.0 && *l > 0.0) ? TransitionStatus::Transitioning
                                 : TransitionStatus::NonTransitioning;
}

// ---------------------------------------------------------------- fits.csv

namespace {

const std::vector<std::string> kFitColumns{
    "id",
    "base_year",
    "alpha",
    "delta",
    "gamma",
    "lambda",
    "beta",
    "e_intercept",
    "epsilon",
    "e_log_intercept",
    "mu",
    "delta_ols",
    "lambda_ols",
    "linear_converged",
    "exponential_converged",
    "elec_linear_converged",
    "elec_exponential_converged",
    "linear_iterations",
    "exponential_iterations",
    "elec_linear_iterations",
    "elec_exponential_iterations",
    "linear_max_std_resid",
    "exponential_max_std_resid",
    "elec_linear_max_std_resid",
    "elec_exponential_max_std_resid",
    "status",
};

void put(csv::Writer& w, const std::optional<double>& v) {
  if (v) w << *v;
  else w << std::string_view("");
}

}  // namespace

void write_fits(const std::filesystem::path& path, const std::vector<FitResult>& fits) {
  csv::Writer w(path, kFitColumns);
  for (const auto& f : fits) {
    int base = 0;
    for (const auto* fit : {&f.linear, &f.exponential, &f.elec_linear, &f.elec_exponential})
      if (*fit) base = (*fit)->base_year;
    w << std::string_view(f.id) << base;
    const std::array<const std::optional<LineFit>*, 4> all{&f.linear, &f.exponential,
                                                          &f.elec_linear, &f.elec_exponential};
    put(w, f.linear ? std::optional(f.linear->intercept) : std::nullopt);
    put(w, f.delta());
    put(w, f.exponential ? std::optional(f.exponential->intercept) : std::nullopt);
    put(w, f.lambda());
    put(w, f.beta());
    put(w, f.elec_linear ? std::optional(f.elec_linear->intercept) : std::nullopt);
    put(w, f.epsilon());
    put(w, f.elec_exponential ? std::optional(f.elec_exponential->intercept) : std::nullopt);
    put(w, f.mu());
    put(w, f.delta_ols);
    put(w, f.lambda_ols);
    for (const auto* fit : all) w << (*fit && (*fit)->converged);
    for (const auto* fit : all) w << (*fit ? (*fit)->iterations : 0);
    for (const auto* fit : all)
      put(w, *fit ? std::optional((*fit)->max_std_residual) : std::nullopt);
    const auto status = transition_status(f);
    w << (status ? to_string(*status) : std::string_view("undefined"));
    w.end_row();
  }
}

std::vector<FitResult> read_fits(const std::filesystem::path& path) {
  const auto t = csv::Table::read(path);
  std::map<std::string, std::size_t> col;
  for (const auto& name : kFitColumns) col[name] = t.column(name);

  auto load = [&](std::size_t r, const char* intercept, const char* slope, const char* conv,
                  const char* iters, const char* resid) -> std::optional<LineFit> {
    const auto s = t.optional_number(r, col[slope]);
    if (!s) return std::nullopt;
    LineFit fit;
    fit.slope = *s;
    fit.intercept = t.number(r, col[intercept]);
    fit.base_year = t.integer(r, col["base_year"]);
    fit.converged = t.cell(r, col[conv]) == "1";
    fit.iterations = t.integer(r, col[iters]);
    fit.max_std_residual = t.optional_number(r, col[resid]).value_or(0.0);
    return fit;
  };

  std::vector<FitResult> out;
  out.reserve(t.rows());
  for (std::size_t r = 0; r < t.rows(); ++r) {
    FitResult f;
    f.id = std::string(t.cell(r, col["id"]));
    f.linear = load(r, "alpha", "delta", "linear_converged", "linear_iterations",
                    "linear_max_std_resid");
    f.exponential = load(r, "gamma", "lambda", "exponential_converged", "exponential_iterations",
                         "exponential_max_std_resid");
    f.elec_linear = load(r, "e_intercept", "epsilon", "elec_linear_converged",
                         "elec_linear_iterations", "elec_linear_max_std_resid");
    f.elec_exponential = load(r, "e_log_intercept", "mu", "elec_exponential_converged",
                              "elec_exponential_iterations", "elec_exponential_max_std_resid");
    f.delta_ols = t.optional_number(r, col["delta_ols"]);
    f.lambda_ols = t.optional_number(r, col["lambda_ols"]);
    out.push_back(std::move(f));
  }
  return out;
}

void write_shares(const std::filesystem::path& path, const std::vector<ShareSeries>& shares) {
  csv::Writer w(path, {"id", "year", "e", "l"});
  for (const auto& s : shares)
    for (const auto& [y, p] : s.values) {
      w << std::string_view(s.id) << y << p.e << p.l;
      w.end_row();
    }
}

}  // namespace tlens
