#pragma once

// Independent reference implementations used only by tests. They share no
// code with the library and follow the textbook formulas directly.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace oracle {

inline constexpr double kRadius = 6371008.8;

inline double rad(double deg) { return deg * std::numbers::pi / 180.0; }

// Great-circle distance via the Vincenty special case for a sphere, which
// stays accurate for both tiny and antipodal separations.
inline double great_circle_m(double lon1, double lat1, double lon2, double lat2) {
  const double p1 = rad(lat1), p2 = rad(lat2), dl = rad(lon2 - lon1);
  const double a = std::cos(p2) * std::sin(dl);
  const double b = std::cos(p1) * std::sin(p2) - std::sin(p1) * std::cos(p2) * std::cos(dl);
  const double c = std::sin(p1) * std::sin(p2) + std::cos(p1) * std::cos(p2) * std::cos(dl);
  return kRadius * std::atan2(std::hypot(a, b), c);
}

// Winding number of a closed ring around (x, y); nonzero means inside for
// simple polygons.
inline int winding_number(double x, double y, const std::vector<std::pair<double, double>>& ring) {
  int wn = 0;
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    auto [x0, y0] = ring[i];
    auto [x1, y1] = ring[(i + 1) % n];
    const double cross = (x1 - x0) * (y - y0) - (x - x0) * (y1 - y0);
    if (y0 <= y) {
      if (y1 > y && cross > 0) ++wn;
    } else if (y1 <= y && cross < 0) {
      --wn;
    }
  }
  return wn;
}

struct Stratified {
  std::vector<double> p;   // estimated class proportions
  std::vector<double> se;  // standard errors of p
};

// Stratified estimator of class proportions from counts n[i][j] and
// stratum weights w[i].
inline Stratified stratified(const std::vector<double>& w, const std::vector<std::vector<double>>& n) {
  const std::size_t q = n.front().size();
  Stratified out{std::vector<double>(q, 0.0), std::vector<double>(q, 0.0)};
  for (std::size_t j = 0; j < q; ++j) {
    double var = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      double row = 0.0;
      for (double v : n[i]) row += v;
      const double pij = n[i][j] / row;
      out.p[j] += w[i] * pij;
      var += w[i] * w[i] * pij * (1.0 - pij) / (row - 1.0);
    }
    out.se[j] = std::sqrt(var);
  }
  return out;
}

struct Accuracy {
  double oa, v_oa;
  std::vector<double> ua, v_ua, pa, v_pa;
};

// Area-weighted accuracy for a square matrix (strata == classes), with the
// variance expressions for OA, UA and PA written out term by term.
inline Accuracy accuracy(const std::vector<double>& w, const std::vector<std::vector<double>>& n,
                         const std::vector<double>& mapped_area) {
  const std::size_t q = w.size();
  std::vector<double> ni(q, 0.0);
  for (std::size_t i = 0; i < q; ++i)
    for (double v : n[i]) ni[i] += v;
  std::vector<std::vector<double>> p(q, std::vector<double>(q));
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t j = 0; j < q; ++j) p[i][j] = w[i] * n[i][j] / ni[i];

  Accuracy a{0.0, 0.0, std::vector<double>(q), std::vector<double>(q), std::vector<double>(q),
             std::vector<double>(q)};
  for (std::size_t i = 0; i < q; ++i) {
    a.ua[i] = n[i][i] / ni[i];
    a.v_ua[i] = a.ua[i] * (1 - a.ua[i]) / (ni[i] - 1);
    a.oa += p[i][i];
    a.v_oa += w[i] * w[i] * a.ua[i] * (1 - a.ua[i]) / (ni[i] - 1);
  }
  for (std::size_t j = 0; j < q; ++j) {
    // Estimated total of reference class j in area units.
    double nj_hat = 0.0;
    for (std::size_t i = 0; i < q; ++i) nj_hat += mapped_area[i] / ni[i] * n[i][j];
    const double pj = [&] {
      double s = 0.0;
      for (std::size_t i = 0; i < q; ++i) s += p[i][j];
      return s;
    }();
    a.pa[j] = p[j][j] / pj;
    const double P = a.pa[j], U = a.ua[j];
    const double Nj = mapped_area[j];
    double off = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
      if (i == j) continue;
      const double r = n[i][j] / ni[i];
      off += mapped_area[i] * mapped_area[i] * r * (1 - r) / (ni[i] - 1);
    }
    a.v_pa[j] = (Nj * Nj * (1 - P) * (1 - P) * U * (1 - U) / (ni[j] - 1) + P * P * off) / (nj_hat * nj_hat);
  }
  return a;
}

struct Binary {
  double precision, recall, f1, overall, tpr, fpr;
};

inline Binary binary(double tn, double fp, double fn, double tp) {
  Binary b{};
  b.precision = tp / (tp + fp);
  b.recall = tp / (tp + fn);
  b.f1 = 2 * tp / (2 * tp + fp + fn);
  b.overall = (tp + tn) / (tp + tn + fp + fn);
  b.tpr = b.recall;
  b.fpr = fp / (fp + tn);
  return b;
}

// Half-up rounding to 2 places in integer micro-units, for non-negative x.
inline double round2(double x) {
  const long long micro = std::llround(x * 1e6);
  return static_cast<double>((micro + 5000) / 10000) / 100.0;
}

}  // namespace oracle
