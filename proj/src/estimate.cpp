#include "areaest/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "areaest/rng.hpp"

namespace areaest {

std::int64_t ConfusionMatrix::row_total(std::size_t i) const {
  return std::accumulate(counts[i].begin(), counts[i].end(), std::int64_t{0});
}

std::int64_t ConfusionMatrix::sample_total() const {
  std::int64_t n = 0;
  for (std::size_t i = 0; i < rows(); ++i) n += row_total(i);
  return n;
}

std::optional<std::size_t> ConfusionMatrix::stratum_index(std::int32_t stratum) const {
  auto it = std::find(strata.begin(), strata.end(), stratum);
  if (it == strata.end()) return std::nullopt;
  return static_cast<std::size_t>(it - strata.begin());
}

std::optional<std::size_t> ConfusionMatrix::class_index(std::int32_t ref_class) const {
  auto it = std::find(ref_classes.begin(), ref_classes.end(), ref_class);
  if (it == ref_classes.end()) return std::nullopt;
  return static_cast<std::size_t>(it - ref_classes.begin());
}

ConfusionMatrix ConfusionMatrix::from_counts(std::vector<std::int32_t> strata, std::vector<std::int32_t> ref_classes,
                                             std::vector<std::vector<std::int64_t>> counts,
                                             std::vector<double> stratum_area_ha) {
  if (counts.size() != strata.size() || stratum_area_ha.size() != strata.size())
    throw std::invalid_argument("confusion matrix: strata, counts and areas differ in length");
  ConfusionMatrix cm;
  cm.ref_classes = std::move(ref_classes);
  for (std::size_t i = 0; i < strata.size(); ++i) {
    if (counts[i].size() != cm.ref_classes.size())
      throw std::invalid_argument("confusion matrix: row " + std::to_string(i) + " has the wrong width");
    if (!std::isfinite(stratum_area_ha[i]) || stratum_area_ha[i] < 0.0)
      throw std::invalid_argument("confusion matrix: invalid stratum area");
    for (auto n : counts[i])
      if (n < 0) throw std::invalid_argument("confusion matrix: negative count");
    if (stratum_area_ha[i] == 0.0) continue;
    cm.strata.push_back(strata[i]);
    cm.counts.push_back(std::move(counts[i]));
    cm.stratum_area_ha.push_back(stratum_area_ha[i]);
    cm.total_area_ha += stratum_area_ha[i];
  }
  if (!(cm.total_area_ha > 0.0)) throw std::invalid_argument("confusion matrix: total mapped area is zero");
  return cm;
}

void ConfusionMatrix::require_estimable() const {
  for (std::size_t i = 0; i < rows(); ++i) {
    const auto n = row_total(i);
    if (n < 2) {
      throw EstimationInfeasibleError(strata[i], "stratum " + std::to_string(strata[i]) + " has positive mapped area but " +
                                                     std::to_string(n) + " usable sample(s); at least 2 are required");
    }
  }
}

std::optional<std::int32_t> reference_class(const SampleRecord& s, Reference ref) {
  switch (ref) {
    case Reference::change:
      if (!s.ref_2020 || !s.ref_2021) return std::nullopt;
      return code(change_class(*s.ref_2020, *s.ref_2021));
    case Reference::crop_2020:
      if (!s.ref_2020) return std::nullopt;
      return *s.ref_2020 ? 1 : 0;
    case Reference::crop_2021:
      if (!s.ref_2021) return std::nullopt;
      return *s.ref_2021 ? 1 : 0;
  }
  return std::nullopt;
}

std::vector<std::int32_t> reference_classes(Reference ref) {
  if (ref == Reference::change) return {0, 1, 2, 3};
  return {0, 1};
}

ConfusionMatrix build_confusion(const std::vector<SampleRecord>& samples, Reference ref,
                                const std::map<std::int32_t, double>& stratum_areas, const SamplePredicate& restrict) {
  std::vector<std::int32_t> strata;
  std::vector<double> areas;
  for (const auto& [s, a] : stratum_areas) {
    strata.push_back(s);
    areas.push_back(a);
  }
  const auto classes = reference_classes(ref);
  std::vector<std::vector<std::int64_t>> counts(strata.size(), std::vector<std::int64_t>(classes.size(), 0));
  ConfusionMatrix cm = ConfusionMatrix::from_counts(strata, classes, std::move(counts), areas);
  for (const auto& s : samples) {
    if (restrict && !restrict(s)) continue;
    const auto rc = reference_class(s, ref);
    if (!rc) continue;
    const auto i = cm.stratum_index(s.stratum);
    if (!i) continue;
    ++cm.counts[*i][*cm.class_index(*rc)];
  }
  cm.require_estimable();
  return cm;
}

std::vector<std::vector<double>> proportion_matrix(const ConfusionMatrix& cm) {
  std::vector<std::vector<double>> p(cm.rows(), std::vector<double>(cm.cols(), 0.0));
  for (std::size_t i = 0; i < cm.rows(); ++i) {
    const auto n = static_cast<double>(cm.row_total(i));
    if (n == 0.0) continue;
    const double w = cm.weight(i);
    for (std::size_t j = 0; j < cm.cols(); ++j) p[i][j] = w * static_cast<double>(cm.counts[i][j]) / n;
  }
  return p;
}

const ClassArea& AreaEstimate::at(std::int32_t ref_class) const {
  for (const auto& c : classes)
    if (c.ref_class == ref_class) return c;
  throw std::out_of_range("no estimate for class " + std::to_string(ref_class));
}

AreaEstimate estimate_area(const ConfusionMatrix& cm) {
  cm.require_estimable();
  AreaEstimate est;
  est.total_area_ha = cm.total_area_ha;
  est.n_samples = cm.sample_total();
  for (std::size_t j = 0; j < cm.cols(); ++j) {
    double p = 0.0;
    double var = 0.0;
    for (std::size_t i = 0; i < cm.rows(); ++i) {
      const auto n = static_cast<double>(cm.row_total(i));
      const double w = cm.weight(i);
      const double pij = static_cast<double>(cm.counts[i][j]) / n;
      p += w * pij;
      var += w * w * pij * (1.0 - pij) / (n - 1.0);
    }
    ClassArea c;
    c.ref_class = cm.ref_classes[j];
    c.proportion = p;
    c.area_ha = cm.total_area_ha * p;
    c.se_proportion = std::sqrt(var);
    c.ci95_ha = kZ95 * cm.total_area_ha * c.se_proportion;
    est.classes.push_back(c);
  }
  return est;
}

AreaEstimate estimate_annual(const std::vector<SampleRecord>& samples, int year,
                             const std::map<std::int32_t, double>& stratum_areas, const SamplePredicate& restrict) {
  Reference ref;
  if (year == 2020) ref = Reference::crop_2020;
  else if (year == 2021) ref = Reference::crop_2021;
  else throw std::invalid_argument("annual estimates are available for 2020 and 2021, not " + std::to_string(year));
  return estimate_area(build_confusion(samples, ref, stratum_areas, restrict));
}

const ClassAccuracy& AccuracyReport::at(std::int32_t ref_class) const {
  for (const auto& c : classes)
    if (c.ref_class == ref_class) return c;
  throw std::out_of_range("no accuracy entry for class " + std::to_string(ref_class));
}

namespace {

double ratio(double num, double den) {
  return den == 0.0 ? std::numeric_limits<double>::quiet_NaN() : num / den;
}

std::optional<Metric> f1_of(const std::optional<Metric>& u, const std::optional<Metric>& p) {
  if (!u || !p) return std::nullopt;
  const double s = u->value + p->value;
  if (s == 0.0) return Metric{0.0, 0.0};
  const double f = 2.0 * u->value * p->value / s;
  // Delta method, treating UA and PA as independent.
  const double du = 2.0 * p->value * p->value / (s * s);
  const double dp = 2.0 * u->value * u->value / (s * s);
  return Metric{f, std::sqrt(du * du * u->se * u->se + dp * dp * p->se * p->se)};
}

}  // namespace

AccuracyReport accuracy_report(const ConfusionMatrix& cm) {
  cm.require_estimable();
  std::vector<std::size_t> diag(cm.rows());
  for (std::size_t i = 0; i < cm.rows(); ++i) {
    const auto j = cm.class_index(cm.strata[i]);
    if (!j) {
      throw std::invalid_argument("accuracy_report: stratum " + std::to_string(cm.strata[i]) +
                                  " is not a reference class (matrix is not square)");
    }
    diag[i] = *j;
  }

  const auto p = proportion_matrix(cm);
  std::vector<double> user(cm.rows());
  std::vector<double> n(cm.rows());
  AccuracyReport rep;
  double oa_var = 0.0;
  for (std::size_t i = 0; i < cm.rows(); ++i) {
    n[i] = static_cast<double>(cm.row_total(i));
    user[i] = static_cast<double>(cm.counts[i][diag[i]]) / n[i];
    rep.overall.value += p[i][diag[i]];
    const double w = cm.weight(i);
    oa_var += w * w * user[i] * (1.0 - user[i]) / (n[i] - 1.0);
  }
  rep.overall.se = std::sqrt(oa_var);

  const double total_n = static_cast<double>(cm.sample_total());
  for (std::size_t j = 0; j < cm.cols(); ++j) {
    ClassAccuracy acc;
    acc.ref_class = cm.ref_classes[j];
    const auto si = cm.stratum_index(acc.ref_class);

    double col_p = 0.0;
    double col_n = 0.0;
    for (std::size_t i = 0; i < cm.rows(); ++i) {
      col_p += p[i][j];
      col_n += static_cast<double>(cm.counts[i][j]);
    }

    if (si) {
      const double u = user[*si];
      acc.users = Metric{u, std::sqrt(u * (1.0 - u) / (n[*si] - 1.0))};
    }
    if (col_p > 0.0) {
      const double pa = si ? p[*si][j] / col_p : 0.0;
      // Mapped areas stand in for pixel counts; the ratio is scale-free.
      const double n_hat = cm.total_area_ha * col_p;
      double term = 0.0;
      if (si) {
        const double a = cm.stratum_area_ha[*si];
        const double u = user[*si];
        term += a * a * (1.0 - pa) * (1.0 - pa) * u * (1.0 - u) / (n[*si] - 1.0);
      }
      double others = 0.0;
      for (std::size_t i = 0; i < cm.rows(); ++i) {
        if (si && i == *si) continue;
        const double a = cm.stratum_area_ha[i];
        const double q = static_cast<double>(cm.counts[i][j]) / n[i];
        others += a * a * q * (1.0 - q) / (n[i] - 1.0);
      }
      term += pa * pa * others;
      acc.producers = Metric{pa, std::sqrt(term) / n_hat};
    }
    acc.f1 = f1_of(acc.users, acc.producers);

    const double tp = si ? static_cast<double>(cm.counts[*si][j]) : 0.0;
    const double fn = col_n - tp;
    const double fp = si ? n[*si] - tp : 0.0;
    const double tn = total_n - tp - fn - fp;
    acc.tpr = ratio(tp, tp + fn);
    acc.fpr = ratio(fp, fp + tn);
    rep.classes.push_back(acc);
  }
  return rep;
}

namespace {

struct BinaryRates {
  double precision, recall, f1, overall;
};

BinaryRates rates_of(double tp, double fp, double fn, double tn) {
  BinaryRates r;
  r.precision = ratio(tp, tp + fp);
  r.recall = ratio(tp, tp + fn);
  r.f1 = ratio(2.0 * tp, 2.0 * tp + fp + fn);
  r.overall = ratio(tp + tn, tp + fp + fn + tn);
  return r;
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double half_width(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return (percentile(v, 0.975) - percentile(v, 0.025)) / 2.0;
}

}  // namespace

BinaryAccuracy binary_accuracy(const BinaryCounts& counts, const BootstrapConfig& cfg) {
  if (counts.tp < 0 || counts.fp < 0 || counts.fn < 0 || counts.tn < 0)
    throw std::invalid_argument("binary counts must be non-negative");
  if (counts.total() == 0) throw std::invalid_argument("binary accuracy needs at least one test point");

  const auto tp = static_cast<double>(counts.tp);
  const auto fp = static_cast<double>(counts.fp);
  const auto fn = static_cast<double>(counts.fn);
  const auto tn = static_cast<double>(counts.tn);
  const BinaryRates point = rates_of(tp, fp, fn, tn);

  std::vector<double> precision, recall, f1, overall;
  const auto n = static_cast<std::uint64_t>(counts.total());
  const std::uint64_t c1 = static_cast<std::uint64_t>(counts.tp);
  const std::uint64_t c2 = c1 + static_cast<std::uint64_t>(counts.fp);
  const std::uint64_t c3 = c2 + static_cast<std::uint64_t>(counts.fn);
  for (int r = 0; r < cfg.resamples; ++r) {
    Rng rng = substream(cfg.seed, "bootstrap", static_cast<std::uint64_t>(r));
    double b[4] = {0, 0, 0, 0};
    for (std::uint64_t k = 0; k < n; ++k) {
      const std::uint64_t u = rng.below(n);
      b[u < c1 ? 0 : u < c2 ? 1 : u < c3 ? 2 : 3] += 1.0;
    }
    const BinaryRates br = rates_of(b[0], b[1], b[2], b[3]);
    if (!std::isnan(br.precision)) precision.push_back(br.precision);
    if (!std::isnan(br.recall)) recall.push_back(br.recall);
    if (!std::isnan(br.f1)) f1.push_back(br.f1);
    overall.push_back(br.overall);
  }

  BinaryAccuracy acc;
  acc.counts = counts;
  acc.precision = {point.precision, half_width(precision)};
  acc.recall = {point.recall, half_width(recall)};
  acc.f1 = {point.f1, half_width(f1)};
  acc.overall = {point.overall, half_width(overall)};
  acc.tpr = point.recall;
  acc.fpr = ratio(fp, fp + tn);
  return acc;
}

double round_half_up(double x, int digits) {
  const double scale = std::pow(10.0, digits);
  const double v = std::abs(x) * scale;
  const double r = std::floor(v + 0.5 + 1e-9 * std::max(1.0, v));
  return std::copysign(r / scale, x);
}

}  // namespace areaest
