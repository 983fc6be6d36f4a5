#pragma once

#include "areaest/crops.hpp"
#include "areaest/sampling.hpp"
#include "support.hpp"

namespace testing {

// A 100x100 change map over lon 39..40, lat 13..14 with mostly stable
// classes, plus a labeled stratified sample whose references agree with the
// map 90% of the time.
struct Landscape {
  areaest::ClassGrid map;
  std::vector<areaest::SampleRecord> samples;
};

inline Landscape landscape(std::uint64_t seed, std::int64_t per_stratum = 60) {
  Gen gen(seed);
  areaest::GridHeader h{100, 100, 39.0, 13.0, 0.01, -9999};
  std::vector<std::int32_t> cells(h.size());
  for (auto& c : cells) {
    const double u = uniform_real(gen, 0, 1);
    c = u < 0.55 ? 0 : u < 0.85 ? 1 : u < 0.93 ? 2 : 3;
  }
  areaest::ClassGrid map(h, cells);
  areaest::AllocationPlan plan{4 * per_stratum, {}, {{0, per_stratum}, {1, per_stratum}, {2, per_stratum}, {3, per_stratum}}};
  auto samples = areaest::draw_sample(map, plan, seed);
  for (auto& s : samples) {
    auto truth = uniform_real(gen, 0, 1) < 0.9 ? s.stratum : uniform_int(gen, 0, 3);
    auto c = static_cast<areaest::ChangeClass>(truth);
    s.ref_2020 = areaest::crop_in_first_year(c);
    s.ref_2021 = areaest::crop_in_second_year(c);
  }
  return {map, samples};
}

}  // namespace testing
