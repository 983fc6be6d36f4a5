#include "areaest/synth.hpp"

#include <cmath>
#include <stdexcept>

#include "areaest/estimate.hpp"
#include "areaest/rng.hpp"
#include "areaest/sampling.hpp"

namespace areaest {

namespace {

int draw_class(Rng& rng, const ClassVector& probs) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (int k = 0; k < 3; ++k) {
    acc += probs[static_cast<std::size_t>(k)];
    if (u < acc) return k;
  }
  return 3;
}

void check_distribution(const ClassVector& v, const char* what) {
  double sum = 0.0;
  for (double x : v) {
    if (!std::isfinite(x) || x < 0.0) throw std::invalid_argument(std::string(what) + " has a negative entry");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument(std::string(what) + " must sum to 1");
}

ChangeMap with_counts(ClassGrid grid) {
  ChangeMap m{std::move(grid), {}};
  for (auto v : m.grid.cells()) ++m.counts[static_cast<std::size_t>(v)];
  return m;
}

}  // namespace

ErrorMatrix SynthSpec::symmetric_confusion(double rate) {
  ErrorMatrix e{};
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t m = 0; m < 4; ++m) e[t][m] = t == m ? 1.0 - rate : rate / 3.0;
  return e;
}

void SynthSpec::validate() const {
  if (rows < 1 || cols < 1) throw std::invalid_argument("synthetic grid dimensions must be positive");
  if (patch_size < 1) throw std::invalid_argument("patch size must be at least 1");
  if (!(pixel_area_ha > 0.0)) throw std::invalid_argument("pixel area must be positive");
  check_distribution(proportions, "class proportions");
  for (const auto& row : error_matrix) check_distribution(row, "error matrix row");
}

GridHeader SynthSpec::header() const {
  const double side_m = std::sqrt(pixel_area_ha * 10'000.0);
  return GridHeader{cols, rows, 39.0, 13.0, side_m / kMetersPerDegree, -9999.0};
}

SynthLandscape generate(const SynthSpec& spec) {
  spec.validate();
  const GridHeader h = spec.header();
  ClassGrid truth(h, 0);
  ClassGrid mapped(h, 0);

  Rng patch_rng = substream(spec.seed, "synth/truth");
  for (int pr = 0; pr < spec.rows; pr += spec.patch_size) {
    for (int pc = 0; pc < spec.cols; pc += spec.patch_size) {
      const int cls = draw_class(patch_rng, spec.proportions);
      for (int r = pr; r < std::min(pr + spec.patch_size, spec.rows); ++r)
        for (int c = pc; c < std::min(pc + spec.patch_size, spec.cols); ++c) truth.at(r, c) = cls;
    }
  }
  Rng map_rng = substream(spec.seed, "synth/mapped");
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto t = static_cast<std::size_t>(truth.cells()[i]);
    mapped.mutable_cells()[i] = draw_class(map_rng, spec.error_matrix[t]);
  }
  return {with_counts(std::move(truth)), with_counts(std::move(mapped))};
}

CoverageResult coverage_trial(const SynthSpec& spec, const CoverageConfig& cfg) {
  if (cfg.reps < 1) throw std::invalid_argument("coverage trial needs at least one repetition");
  const SynthLandscape land = generate(spec);
  const PixelArea pixel = PixelArea::constant(spec.pixel_area_ha);
  const auto mapped_areas = stratum_areas(land.mapped.grid, pixel);
  const AllocationPlan plan = allocate(cfg.total_n, cfg.prealloc, mapped_areas);

  CoverageResult res;
  for (std::size_t k = 0; k < 4; ++k)
    res.true_area_ha[k] = static_cast<double>(land.truth.counts[k]) * spec.pixel_area_ha;

  // Coverage uses a containment slack of a few ulps of the total area so
  // that exact estimates with zero SE count as covering.
  const double total = static_cast<double>(land.truth.grid.size()) * spec.pixel_area_ha;
  const double slack = 1e-9 * total;

  ClassVector sum{}, sum_sq{}, covered{};
  for (int rep = 0; rep < cfg.reps; ++rep) {
    RepEstimate r;
    r.rep = rep;
    const auto seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(rep));
    auto samples = draw_sample(land.mapped, plan, seed);
    for (auto& s : samples) {
      const auto cell = land.truth.grid.header().locate(s.location);
      const auto truth = static_cast<ChangeClass>(land.truth.grid.at(cell->row, cell->col));
      s.ref_2020 = crop_in_first_year(truth);
      s.ref_2021 = crop_in_second_year(truth);
    }
    try {
      const auto est = estimate_area(build_confusion(samples, Reference::change, mapped_areas));
      r.feasible = true;
      for (std::size_t k = 0; k < 4; ++k) {
        const auto& c = est.at(static_cast<std::int32_t>(k));
        r.area_ha[k] = c.area_ha;
        r.ci95_ha[k] = c.ci95_ha;
        sum[k] += c.area_ha;
        sum_sq[k] += c.area_ha * c.area_ha;
        if (std::abs(c.area_ha - res.true_area_ha[k]) <= c.ci95_ha + slack) covered[k] += 1.0;
      }
      ++res.feasible_reps;
    } catch (const EstimationInfeasibleError&) {
      ++res.infeasible_reps;
    }
    res.reps.push_back(r);
  }

  const double n = res.feasible_reps;
  for (std::size_t k = 0; k < 4; ++k) {
    if (n == 0) break;
    res.mean_area_ha[k] = sum[k] / n;
    res.bias_ha[k] = res.mean_area_ha[k] - res.true_area_ha[k];
    res.relative_bias[k] = res.true_area_ha[k] > 0.0 ? res.bias_ha[k] / res.true_area_ha[k] : 0.0;
    res.coverage[k] = covered[k] / n;
    const double var = n > 1 ? std::max(0.0, (sum_sq[k] - n * res.mean_area_ha[k] * res.mean_area_ha[k]) / (n - 1)) : 0.0;
    res.mc_se_ha[k] = std::sqrt(var / n);
  }
  return res;
}

}  // namespace areaest
