#pragma once

#include <string>
#include <vector>

#include "areaest/estimate.hpp"

namespace areaest::report {

/// Shortest round-trip representation; "nan" for NaN. Used in CSVs.
std::string full(double v);
/// Fixed-point with decimal round-half-up. Used in Markdown tables.
std::string fixed(double v, int digits);
/// Hectares as whole kha.
std::string kha(double hectares);

std::string class_label(Reference ref, std::int32_t cls);

// CSV bodies, header line included.
std::string area_csv(const AreaEstimate& est, Reference ref);
std::string confusion_csv(const ConfusionMatrix& cm, Reference ref);
std::string accuracy_csv(const AccuracyReport& acc, Reference ref);

// Markdown tables, rounded for presentation.
std::string area_markdown(const std::string& title, const AreaEstimate& est, Reference ref);
std::string accuracy_markdown(const std::string& title, const AccuracyReport& acc, Reference ref);
std::string binary_markdown_row(const std::string& name, const BinaryAccuracy& acc);
std::string binary_markdown_header();

}  // namespace areaest::report
