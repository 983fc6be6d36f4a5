#include "areaest/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "areaest/csv.hpp"

namespace areaest::report {

std::string full(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, round_half_up(v, digits));
  return buf;
}

std::string kha(double hectares) { return fixed(hectares / 1000.0, 0); }

std::string class_label(Reference ref, std::int32_t cls) {
  if (ref == Reference::change) {
    if (is_change_code(cls)) return std::string(change_class_name(static_cast<ChangeClass>(cls)));
    return std::to_string(cls);
  }
  return cls == 1 ? "crop" : "noncrop";
}

std::string area_csv(const AreaEstimate& est, Reference ref) {
  std::ostringstream out;
  out << "class,area_ha,ci95_ha,proportion,se_proportion\n";
  for (const auto& c : est.classes) {
    out << csv::escape(class_label(ref, c.ref_class)) << ',' << full(c.area_ha) << ',' << full(c.ci95_ha) << ','
        << full(c.proportion) << ',' << full(c.se_proportion) << '\n';
  }
  return out.str();
}

std::string confusion_csv(const ConfusionMatrix& cm, Reference ref) {
  const auto p = proportion_matrix(cm);
  std::ostringstream out;
  out << "stratum,reference,count,area_proportion\n";
  for (std::size_t i = 0; i < cm.rows(); ++i)
    for (std::size_t j = 0; j < cm.cols(); ++j)
      out << cm.strata[i] << ',' << csv::escape(class_label(ref, cm.ref_classes[j])) << ',' << cm.counts[i][j] << ','
          << full(p[i][j]) << '\n';
  return out.str();
}

std::string accuracy_csv(const AccuracyReport& acc, Reference ref) {
  std::ostringstream out;
  auto m = [](const std::optional<Metric>& x) {
    return x ? full(x->value) + "," + full(x->se) : std::string("nan,nan");
  };
  out << "class,users_accuracy,users_se,producers_accuracy,producers_se,f1,f1_se,tpr,fpr\n";
  out << "overall," << full(acc.overall.value) << ',' << full(acc.overall.se) << ",,,,,,\n";
  for (const auto& c : acc.classes) {
    out << csv::escape(class_label(ref, c.ref_class)) << ',' << m(c.users) << ',' << m(c.producers) << ',' << m(c.f1)
        << ',' << full(c.tpr) << ',' << full(c.fpr) << '\n';
  }
  return out.str();
}

std::string area_markdown(const std::string& title, const AreaEstimate& est, Reference ref) {
  std::ostringstream out;
  out << "### " << title << "\n\n| Class | Area (kha) |\n|---|---|\n";
  for (const auto& c : est.classes)
    out << "| " << class_label(ref, c.ref_class) << " | " << kha(c.area_ha) << " ± " << kha(c.ci95_ha) << " |\n";
  out << "\nTotal mapped area " << kha(est.total_area_ha) << " kha, n = " << est.n_samples << ".\n\n";
  return out.str();
}

std::string accuracy_markdown(const std::string& title, const AccuracyReport& acc, Reference ref) {
  std::ostringstream out;
  auto pm = [](const std::optional<Metric>& x) {
    return x ? fixed(x->value, 2) + " ± " + fixed(x->half_width(), 2) : std::string("n/a");
  };
  out << "### " << title << "\n\nOverall accuracy " << fixed(acc.overall.value, 2) << " ± "
      << fixed(acc.overall.half_width(), 2) << "\n\n";
  out << "| Class | Precision (UA) | Recall (PA) | F1 | TPR | FPR |\n|---|---|---|---|---|---|\n";
  for (const auto& c : acc.classes) {
    out << "| " << class_label(ref, c.ref_class) << " | " << pm(c.users) << " | " << pm(c.producers) << " | "
        << pm(c.f1) << " | " << fixed(c.tpr, 2) << " | " << fixed(c.fpr, 2) << " |\n";
  }
  out << '\n';
  return out.str();
}

std::string binary_markdown_header() {
  return "| Map | F1 | OA | Recall (PA) | Precision (UA) | TN | FP | FN | TP |\n"
         "|---|---|---|---|---|---|---|---|---|\n";
}

std::string binary_markdown_row(const std::string& name, const BinaryAccuracy& a) {
  auto pm = [](const BootstrapMetric& m) { return fixed(m.value, 2) + " ± " + fixed(m.half_width, 2); };
  std::ostringstream out;
  out << "| " << name << " | " << pm(a.f1) << " | " << pm(a.overall) << " | " << pm(a.recall) << " | "
      << pm(a.precision) << " | " << a.counts.tn << " | " << a.counts.fp << " | " << a.counts.fn << " | "
      << a.counts.tp << " |\n";
  return out.str();
}

}  // namespace areaest::report
