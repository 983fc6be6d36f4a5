#include "areaest/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "areaest/rng.hpp"

namespace areaest {

AllocationPlan allocate(std::int64_t total_n, std::int64_t prealloc_per_change,
                        const std::map<std::int32_t, double>& stratum_areas,
                        const std::set<std::int32_t>& change_strata) {
  if (total_n <= 0) throw std::invalid_argument("total sample size must be positive");
  if (prealloc_per_change < 0) throw std::invalid_argument("pre-allocation must be non-negative");

  double area_sum = 0.0;
  std::int64_t sampled_strata = 0;
  for (const auto& [s, a] : stratum_areas) {
    if (!std::isfinite(a) || a < 0.0)
      throw std::invalid_argument("stratum " + std::to_string(s) + " has an invalid area");
    area_sum += a;
    if (a > 0.0) ++sampled_strata;
  }
  if (!(area_sum > 0.0)) throw std::invalid_argument("all stratum areas are zero");

  AllocationPlan plan;
  plan.total_n = total_n;
  std::int64_t prealloc_sum = 0;
  for (const auto& [s, a] : stratum_areas) {
    const std::int64_t p = (a > 0.0 && change_strata.count(s)) ? prealloc_per_change : 0;
    plan.prealloc[s] = p;
    prealloc_sum += p;
  }
  if (total_n < prealloc_sum + 2 * sampled_strata) {
    throw std::invalid_argument("total sample size " + std::to_string(total_n) +
                                " is too small: need at least " +
                                std::to_string(prealloc_sum + 2 * sampled_strata));
  }

  // Largest-remainder split of what is left after pre-allocation.
  const std::int64_t remainder = total_n - prealloc_sum;
  struct Quota {
    std::int32_t stratum;
    std::int64_t whole;
    std::int64_t frac_key;  // fractional part on a 1e-9 grid, so near-ties are exact ties
  };
  std::vector<Quota> quotas;
  std::int64_t assigned = 0;
  for (const auto& [s, a] : stratum_areas) {
    const double q = static_cast<double>(remainder) * (a / area_sum);
    double whole = std::floor(q);
    std::int64_t key = std::llround((q - whole) * 1e9);
    if (key >= 1'000'000'000) {  // q sat a hair below an integer
      whole += 1.0;
      key = 0;
    }
    quotas.push_back({s, static_cast<std::int64_t>(whole), key});
    assigned += static_cast<std::int64_t>(whole);
  }
  std::vector<std::size_t> order(quotas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (quotas[a].frac_key != quotas[b].frac_key) return quotas[a].frac_key > quotas[b].frac_key;
    return quotas[a].stratum < quotas[b].stratum;
  });
  for (std::int64_t k = 0; k < remainder - assigned; ++k) ++quotas[order[static_cast<std::size_t>(k)]].whole;

  for (const auto& q : quotas) plan.per_stratum_n[q.stratum] = plan.prealloc[q.stratum] + q.whole;

  // Each stratum with area needs two samples for a variance estimate. Take
  // them from the stratum with the largest surplus over its own minimum.
  auto minimum = [&](std::int32_t s) {
    return stratum_areas.at(s) > 0.0 ? std::max<std::int64_t>(plan.prealloc.at(s), 2) : 0;
  };
  for (auto& [s, n] : plan.per_stratum_n) {
    while (stratum_areas.at(s) > 0.0 && n < 2) {
      std::int32_t donor = s;
      std::int64_t best = 0;
      for (const auto& [d, dn] : plan.per_stratum_n) {
        const std::int64_t surplus = dn - minimum(d);
        if (surplus > best) {
          best = surplus;
          donor = d;
        }
      }
      if (donor == s) throw std::logic_error("allocation fix-up found no donor stratum");
      --plan.per_stratum_n[donor];
      ++n;
    }
  }
  return plan;
}

std::string_view consensus_name(Consensus c) {
  switch (c) {
    case Consensus::unanimous: return "unanimous";
    case Consensus::majority: return "majority";
    case Consensus::adjudicated: return "adjudicated";
    case Consensus::unresolved: return "unresolved";
  }
  return "unresolved";
}

Consensus parse_consensus(std::string_view s) {
  if (s == "unanimous" || s.empty()) return Consensus::unanimous;
  if (s == "majority") return Consensus::majority;
  if (s == "adjudicated") return Consensus::adjudicated;
  if (s == "unresolved") return Consensus::unresolved;
  throw std::invalid_argument("unknown consensus status '" + std::string(s) + "'");
}

std::vector<SampleRecord> draw_sample(const ClassGrid& strata_map, const AllocationPlan& plan,
                                      std::uint64_t seed) {
  std::map<std::int32_t, std::vector<std::size_t>> pixels;
  for (const auto& [s, n] : plan.per_stratum_n)
    if (n > 0) pixels[s];
  for (std::size_t i = 0; i < strata_map.size(); ++i) {
    if (strata_map.is_nodata(i)) continue;
    auto it = pixels.find(strata_map.cells()[i]);
    if (it != pixels.end()) it->second.push_back(i);
  }

  std::vector<SampleRecord> out;
  std::int64_t next_id = 1;
  for (auto& [s, candidates] : pixels) {
    const auto want = static_cast<std::size_t>(plan.per_stratum_n.at(s));
    if (candidates.size() < want) {
      throw StratumDeficitError("stratum " + std::to_string(s) + " has " + std::to_string(candidates.size()) +
                                " pixels but the plan asks for " + std::to_string(want));
    }
    // Partial Fisher-Yates on this stratum's own substream.
    Rng rng = substream(seed, "draw_sample", static_cast<std::uint64_t>(s));
    for (std::size_t k = 0; k < want; ++k) {
      const std::size_t j = k + static_cast<std::size_t>(rng.below(candidates.size() - k));
      std::swap(candidates[k], candidates[j]);
    }
    std::sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(want));
    for (std::size_t k = 0; k < want; ++k) {
      SampleRecord rec;
      rec.id = next_id++;
      rec.location = strata_map.header().cell_center(candidates[k]);
      rec.stratum = s;
      out.push_back(std::move(rec));
    }
  }
  return out;
}

namespace {

struct YearVotes {
  int crop = 0;
  int noncrop = 0;
  std::optional<bool> adjudicated;
};

// Returns the label (if any) and the status for one (sample, year).
std::pair<std::optional<bool>, Consensus> resolve(const YearVotes& v) {
  if (v.crop == 0 || v.noncrop == 0) return {v.crop > 0, Consensus::unanimous};
  if (v.adjudicated) return {*v.adjudicated, Consensus::adjudicated};
  if (v.crop != v.noncrop) return {v.crop > v.noncrop, Consensus::majority};
  return {std::nullopt, Consensus::unresolved};
}

}  // namespace

std::vector<SampleRecord> merge_labels(std::vector<SampleRecord> samples,
                                       const std::vector<AnnotationRow>& annotations,
                                       const std::vector<AdjudicationRow>& adjudications) {
  std::map<std::int64_t, std::size_t> by_id;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!by_id.emplace(samples[i].id, i).second)
      throw std::invalid_argument("duplicate sample id " + std::to_string(samples[i].id));
  }
  auto year_slot = [](int year) {
    if (year == 2020) return 0;
    if (year == 2021) return 1;
    throw std::invalid_argument("label year must be 2020 or 2021, got " + std::to_string(year));
  };

  std::vector<std::array<YearVotes, 2>> votes(samples.size());
  for (auto& s : samples) s.annotator_labels.clear();
  for (const auto& a : annotations) {
    auto it = by_id.find(a.sample_id);
    if (it == by_id.end()) throw UnknownSampleError("label file references unknown sample id " + std::to_string(a.sample_id));
    auto& v = votes[it->second][static_cast<std::size_t>(year_slot(a.year))];
    (a.crop ? v.crop : v.noncrop) += 1;
    samples[it->second].annotator_labels.push_back({a.annotator, a.year, a.crop});
  }
  for (const auto& adj : adjudications) {
    auto it = by_id.find(adj.sample_id);
    if (it == by_id.end())
      throw UnknownSampleError("adjudication file references unknown sample id " + std::to_string(adj.sample_id));
    auto& slot = votes[it->second][static_cast<std::size_t>(year_slot(adj.year))].adjudicated;
    if (slot && *slot != adj.crop) {
      throw std::invalid_argument("conflicting adjudication entries for sample " + std::to_string(adj.sample_id) +
                                  " year " + std::to_string(adj.year));
    }
    slot = adj.crop;
  }

  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto& rec = samples[i];
    std::sort(rec.annotator_labels.begin(), rec.annotator_labels.end());
    Consensus status = Consensus::unanimous;
    for (int y = 0; y < 2; ++y) {
      const auto& v = votes[i][static_cast<std::size_t>(y)];
      if (v.crop + v.noncrop == 0) {
        throw std::invalid_argument("sample " + std::to_string(rec.id) + " has no annotation for " +
                                    std::to_string(2020 + y));
      }
      auto [label, st] = resolve(v);
      (y == 0 ? rec.ref_2020 : rec.ref_2021) = label;
      status = std::max(status, st);
    }
    rec.consensus = status;
  }
  return samples;
}

}  // namespace areaest
