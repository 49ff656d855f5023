#include "breather/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "breather/eigensolve.hpp"
#include "breather/error.hpp"
#include "breather/field.hpp"
#include "breather/grid.hpp"
#include "breather/rng.hpp"
#include "breather/ssf.hpp"
#include "breather/ucp.hpp"
#include "breather/wegner.hpp"
#include "detail/parallel.hpp"

#ifndef BREATHER_LAB_VERSION
#define BREATHER_LAB_VERSION "0.0.0"
#endif

namespace breather {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kManifestName[] = "manifest.json";
constexpr char kPartialName[] = "PARTIAL";
/// F_t parameter of the spectral-shift integrability bound.
constexpr double kFtParameter = 1.0 / 32.0;
/// Invariance checks per operator pair, spread over the spectral gaps.
constexpr std::size_t kInvarianceProbes = 64;

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string short_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

class Csv {
 public:
  explicit Csv(std::initializer_list<std::string_view> header) { row_of(header); }

  template <class... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((text_ += (first ? "" : ","), text_ += cell(cells), first = false), ...);
    text_ += '\n';
  }

  const std::string& str() const { return text_; }

 private:
  static std::string cell(double x) { return num(x); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  template <class Int>
    requires std::is_integral_v<Int>
  static std::string cell(Int v) {
    return std::to_string(v);
  }

  void row_of(std::initializer_list<std::string_view> cells) {
    bool first = true;
    for (auto c : cells) {
      if (!first) text_ += ',';
      text_ += c;
      first = false;
    }
    text_ += '\n';
  }

  std::string text_;
};

/// Single writer for one run: writes files, remembers their digests.
class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
    fs::remove(dir_ / kPartialName);
  }

  void write(const std::string& name, const std::string& contents) {
    std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    entries_.push_back({{"path", name}, {"sha256", sha256_hex(contents)}, {"bytes", contents.size()}});
    names_.push_back(name);
  }

  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  const fs::path& dir() const { return dir_; }
  const json& entries() const { return entries_; }
  const std::vector<std::string>& names() const { return names_; }

 private:
  fs::path dir_;
  json entries_ = json::array();
  std::vector<std::string> names_;
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json manifest(const ExperimentConfig& c, const Artifacts& artifacts, bool partial) {
  return {{"software", "breather-lab"},
          {"version", software_version()},
          {"experiment", to_string(c.kind())},
          {"config_sha256", sha256_hex(canonical_result_config(c))},
          {"master_seed", c.run.master_seed},
          {"timestamp", utc_timestamp()},
          {"partial", partial},
          {"files", artifacts.entries()}};
}

// --- shared helpers ---------------------------------------------------------

struct SampleRef {
  int box_side = 0;
  std::size_t sample = 0;  // 1-based; 0 for the deterministic free operator
  std::uint64_t seed = 0;
};

std::vector<SampleRef> population(const ExperimentConfig& c, bool random) {
  std::vector<SampleRef> out;
  for (int side : c.grid.box_sides) {
    if (!random) {
      out.push_back({side, 0, 0});
      continue;
    }
    for (std::size_t s = 1; s <= c.experiment.n_samples; ++s)
      out.push_back({side, s, derive_seed(c.run.master_seed, s)});
  }
  return out;
}

GridSpec grid_for(const ExperimentConfig& c, int side) { return build_grid(c.model.dim, side, c.grid.mesh_per_unit); }

OmegaSample omega_for(const ExperimentConfig& c, const SampleRef& ref) {
  return sample_omega(c.model.measure, c.model.dim, ref.box_side, ref.seed);
}

HamiltonianMatrix hamiltonian_for(const ExperimentConfig& c, const GridSpec& grid, const OmegaSample* omega) {
  if (!omega || !c.model.shape) return assemble_hamiltonian(grid, std::vector<double>(grid.dof(), 0.0), c.magnetic);
  return assemble_hamiltonian(grid, potential_on_grid(*omega, *c.model.shape, grid), c.magnetic);
}

json ref_json(const SampleRef& r) { return {{"L", r.box_side}, {"sample", r.sample}, {"seed", r.seed}}; }

/// Eigenvalues of the free Dirichlet finite-difference Laplacian, the lowest
/// `count` of them, from the one-dimensional sine table.
std::vector<double> free_discrete_eigenvalues(const GridSpec& grid, std::size_t count) {
  const int m = grid.points_per_axis();
  const double h = grid.spacing();
  std::vector<double> axis(static_cast<std::size_t>(m));
  for (int k = 1; k <= m; ++k) {
    const double s = std::sin(k * M_PI * h / (2.0 * grid.box_side));
    axis[static_cast<std::size_t>(k - 1)] = 4.0 / (h * h) * s * s;
  }
  std::vector<double> all = axis;
  for (int d = 1; d < grid.dim; ++d) {
    std::vector<double> next;
    next.reserve(all.size() * axis.size());
    for (double a : all)
      for (double b : axis) next.push_back(a + b);
    std::sort(next.begin(), next.end());
    if (next.size() > std::max<std::size_t>(count, 1) * 4) next.resize(std::max<std::size_t>(count, 1) * 4);
    all = std::move(next);
  }
  std::sort(all.begin(), all.end());
  all.resize(std::min(all.size(), count));
  return all;
}

UcpConstants fitted_or_given(const ExperimentConfig& c, const std::vector<UcpSample>& samples) {
  if (auto k = c.experiment.constants()) return *k;
  return fit_ucp_exponents(samples, *c.experiment.b);
}

// --- spectrum ---------------------------------------------------------------

void run_spectrum(const ExperimentConfig& c, Artifacts& out) {
  const bool random = c.model.shape.has_value();
  const auto refs = population(c, random);
  struct Job {
    Spectrum spectrum;
    double cutoff = 0.0;
    double resolved_below = 0.0;
  };
  std::vector<Job> jobs(refs.size());
  detail::parallel_for(refs.size(), c.run.worker_count(), [&](std::size_t i) {
    const GridSpec grid = grid_for(c, refs[i].box_side);
    std::optional<OmegaSample> omega;
    if (random) omega = omega_for(c, refs[i]);
    const auto h = hamiltonian_for(c, grid, omega ? &*omega : nullptr);
    jobs[i].cutoff = c.experiment.b.value_or(fidelity_cutoff(grid));
    jobs[i].resolved_below = fidelity_cutoff(grid);
    jobs[i].spectrum = eigen_lowest(h, jobs[i].cutoff, false);
  });

  // The constant 1-d vector potential is a gauge, so the free table applies.
  const bool free_reference = !random && (c.magnetic.kind == MagneticKind::none || c.model.dim == 1);
  Csv csv{"L", "sample", "seed", "index", "eigenvalue", "resolved", "weyl_bound", "free_reference"};
  json report = json::array();
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto& r = refs[i];
    const GridSpec grid = grid_for(c, r.box_side);
    const auto& values = jobs[i].spectrum.eigenvalues;
    std::vector<double> reference;
    if (free_reference) reference = free_discrete_eigenvalues(grid, values.size());
    std::size_t weyl_violations = 0;
    double max_reference_error = 0.0;
    for (std::size_t n = 0; n < values.size(); ++n) {
      const double weyl = weyl_lower_bound(n + 1, grid.box_volume(), c.model.dim);
      if (values[n] < weyl) ++weyl_violations;
      const double ref = n < reference.size() ? reference[n] : std::nan("");
      if (!std::isnan(ref)) max_reference_error = std::max(max_reference_error, std::abs(values[n] - ref));
      csv.row(r.box_side, r.sample, r.seed, n + 1, values[n], values[n] <= jobs[i].resolved_below ? 1 : 0, weyl, ref);
    }
    json entry = ref_json(r);
    entry["cutoff"] = jobs[i].cutoff;
    entry["fidelity_cutoff"] = jobs[i].resolved_below;
    entry["eigenvalue_count"] = values.size();
    entry["weyl_violations"] = weyl_violations;
    if (free_reference) entry["max_abs_error_vs_free_table"] = max_reference_error;
    report.push_back(entry);
  }
  out.write("spectrum.csv", csv.str());
  out.write_json("spectrum.json", report);
}

// --- ucp / lifting ----------------------------------------------------------

struct UcpJob {
  SampleRef ref;
  double delta = 0.0;
};

std::vector<UcpJob> ucp_jobs(const ExperimentConfig& c) {
  std::vector<UcpJob> jobs;
  for (const auto& r : population(c, true))
    for (double d : c.experiment.deltas) jobs.push_back({r, d});
  return jobs;
}

std::vector<UcpSample> collect_ucp(const ExperimentConfig& c, const std::vector<UcpJob>& jobs, Csv& csv) {
  std::vector<std::optional<UcpSample>> found(jobs.size());
  detail::parallel_for(jobs.size(), c.run.worker_count(), [&](std::size_t i) {
    const GridSpec grid = grid_for(c, jobs[i].ref.box_side);
    found[i] = lifting_ucp_sample(omega_for(c, jobs[i].ref), jobs[i].delta, *c.experiment.b, grid, *c.model.shape,
                                  c.magnetic);
  });
  std::vector<UcpSample> samples;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& r = jobs[i].ref;
    if (!found[i]) {
      csv.row(r.box_side, r.sample, r.seed, jobs[i].delta, jobs[i].delta / 2.0, std::nan(""));
      continue;
    }
    csv.row(r.box_side, r.sample, r.seed, jobs[i].delta, found[i]->radius, found[i]->constant);
    // A ball that misses every grid point gives 0: unresolved by the mesh.
    if (found[i]->constant > 0.0) samples.push_back(*found[i]);
  }
  return samples;
}

json constants_json(const ExperimentConfig& c, const UcpConstants& k) {
  json j = to_json(k);
  j["epsilon_max"] = epsilon_max(k, c.model.measure.omega_plus);
  j["source"] = c.experiment.constants() ? "config" : "fit";
  return j;
}

void run_ucp(const ExperimentConfig& c, Artifacts& out) {
  const auto jobs = ucp_jobs(c);
  Csv csv{"L", "sample", "seed", "delta", "radius", "constant"};
  const auto samples = collect_ucp(c, jobs, csv);
  out.write("ucp_samples.csv", csv.str());
  const UcpConstants fit = fit_ucp_exponents(samples, *c.experiment.b);
  json report = constants_json(c, fit);
  report["source"] = "fit";
  report["samples_used"] = samples.size();
  report["samples_excluded"] = jobs.size() - samples.size();
  out.write_json("ucp_fit.json", report);
}

void run_lifting(const ExperimentConfig& c, Artifacts& out) {
  const auto jobs = ucp_jobs(c);
  std::vector<UcpSample> samples;
  if (!c.experiment.constants()) {
    Csv csv{"L", "sample", "seed", "delta", "radius", "constant"};
    samples = collect_ucp(c, jobs, csv);
    out.write("ucp_samples.csv", csv.str());
  }
  const UcpConstants k = fitted_or_given(c, samples);

  std::vector<LiftingReport> reports(jobs.size());
  detail::parallel_for(jobs.size(), c.run.worker_count(), [&](std::size_t i) {
    const GridSpec grid = grid_for(c, jobs[i].ref.box_side);
    reports[i] = lifting_check(omega_for(c, jobs[i].ref), jobs[i].delta, k, *c.experiment.b, grid, *c.model.shape,
                               c.magnetic);
  });

  Csv csv{"L", "sample", "seed", "delta", "index", "lambda_before", "lambda_after", "monotonicity_margin",
          "lifting_margin"};
  std::size_t total = 0, lifted = 0, monotonicity_violations = 0;
  double min_monotonicity = std::numeric_limits<double>::infinity();
  double min_lifting = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& r = jobs[i].ref;
    for (const auto& e : reports[i].entries) {
      csv.row(r.box_side, r.sample, r.seed, jobs[i].delta, e.index, e.lambda_before, e.lambda_after,
              e.monotonicity_margin, e.lifting_margin);
      ++total;
      if (e.lifting_margin >= 0.0) ++lifted;
      if (e.monotonicity_margin < -kInequalitySlack) ++monotonicity_violations;
      min_monotonicity = std::min(min_monotonicity, e.monotonicity_margin);
      min_lifting = std::min(min_lifting, e.lifting_margin);
    }
  }
  out.write("lifting.csv", csv.str());
  out.write_json("lifting.json",
                 {{"constants", constants_json(c, k)},
                  {"entries", total},
                  {"nonnegative_lifting", lifted},
                  {"nonnegative_fraction", total ? static_cast<double>(lifted) / static_cast<double>(total) : 1.0},
                  {"monotonicity_violations", monotonicity_violations},
                  {"min_monotonicity_margin", total ? min_monotonicity : 0.0},
                  {"min_lifting_margin", total ? min_lifting : 0.0}});
}

// --- ssf --------------------------------------------------------------------

struct SsfJob {
  StepFunction xi;
  KreinResult krein;
  double ft_integral = 0.0;
  std::size_t invariance_checked = 0;
  std::size_t invariance_failed = 0;
  std::optional<SingularValueList> singular;
  std::optional<MajorizationResult> majorization;
};

/// Probe points strictly inside the gaps of the merged spectrum.
std::vector<double> invariance_probes(const Spectrum& a, const Spectrum& b) {
  std::vector<double> all = a.eigenvalues;
  all.insert(all.end(), b.eigenvalues.begin(), b.eigenvalues.end());
  std::sort(all.begin(), all.end());
  const double top = std::min({a.cutoff, b.cutoff, 700.0});
  std::vector<double> gaps;
  if (!all.empty()) gaps.push_back(all.front() - 1.0);
  for (std::size_t i = 0; i + 1 < all.size(); ++i)
    if (all[i + 1] - all[i] > 1e-9 * (1.0 + std::abs(all[i]))) gaps.push_back(0.5 * (all[i] + all[i + 1]));
  std::erase_if(gaps, [&](double x) { return x > top; });
  if (gaps.size() <= kInvarianceProbes) return gaps;
  std::vector<double> picked;
  for (std::size_t k = 0; k < kInvarianceProbes; ++k) picked.push_back(gaps[k * gaps.size() / kInvarianceProbes]);
  return picked;
}

void run_ssf(const ExperimentConfig& c, Artifacts& out) {
  const auto jobs = ucp_jobs(c);
  const double b = *c.experiment.b;
  const double energy = c.experiment.energies.front();
  const double eps = c.experiment.epsilons.front();
  const int dim = c.model.dim;
  std::vector<SsfJob> results(jobs.size());
  detail::parallel_for(jobs.size(), c.run.worker_count(), [&](std::size_t i) {
    const GridSpec grid = grid_for(c, jobs[i].ref.box_side);
    const OmegaSample omega = omega_for(c, jobs[i].ref);
    const OmegaSample lifted = shift_all(omega, jobs[i].delta);
    const auto h0 = hamiltonian_for(c, grid, &omega);
    const auto h1 = hamiltonian_for(c, grid, &lifted);
    const Spectrum s0 = eigen_lowest(h0, b, false);
    const Spectrum s1 = eigen_lowest(h1, b, false);
    auto& r = results[i];
    r.xi = spectral_shift(s0, s1);
    r.krein = krein_check(s0, s1, smooth_switch_test_function(eps, energy));
    r.ft_integral = ssf_ft_integral(r.xi, b, kFtParameter, dim);
    for (double lambda : invariance_probes(s0, s1)) {
      if (auto inv = invariance_check(s0, s1, lambda)) {
        ++r.invariance_checked;
        if (inv->lhs != inv->rhs) ++r.invariance_failed;
      }
    }
    if (h0.size() <= kDenseThreshold) {
      r.singular = veff_singular_values(h0, h1);
      r.majorization = hs_majorization(h0, h1, kFtParameter, dim);
    }
  });

  Csv ssf_csv{"L", "sample", "seed", "delta", "breakpoint", "xi"};
  Csv sv_csv{"L", "sample", "seed", "delta", "n", "singular_value", "decay_bound"};
  json report = json::array();
  const double krein_bound = trace_diff_bound(b, SmoothSwitch{eps}.max_derivative(), 1.0, dim);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& ref = jobs[i].ref;
    const auto& r = results[i];
    for (std::size_t k = 0; k < r.xi.breakpoints.size(); ++k)
      ssf_csv.row(ref.box_side, ref.sample, ref.seed, jobs[i].delta, r.xi.breakpoints[k], r.xi.values[k]);
    if (r.singular) {
      const double threshold = std::pow(4.0, dim);
      for (std::size_t n = 1; n <= r.singular->values.size(); ++n)
        sv_csv.row(ref.box_side, ref.sample, ref.seed, jobs[i].delta, n, r.singular->values[n - 1],
                   static_cast<double>(n) > threshold ? singular_bound(n, dim) : std::nan(""));
    }
    json entry = ref_json(ref);
    entry["delta"] = jobs[i].delta;
    entry["krein"] = {{"lhs", r.krein.lhs}, {"rhs", r.krein.rhs}, {"gap", r.krein.gap}, {"bound", krein_bound}};
    entry["xi_max_abs"] = r.xi.max_abs();
    entry["ft_integral"] = {{"t", kFtParameter}, {"upper", b}, {"value", r.ft_integral},
                            {"bound", k1_constant(dim) * std::exp(b)}};
    entry["invariance"] = {{"checked", r.invariance_checked}, {"failed", r.invariance_failed}};
    if (r.majorization)
      entry["majorization"] = {{"t", kFtParameter}, {"lhs", r.majorization->lhs}, {"rhs", r.majorization->rhs}};
    report.push_back(entry);
  }
  out.write("ssf.csv", ssf_csv.str());
  out.write("singular_values.csv", sv_csv.str());
  out.write_json("ssf.json", report);
}

// --- wegner -----------------------------------------------------------------

std::string wegner_cell_name(int side, double energy, double eps) {
  return "wegner_L" + std::to_string(side) + "_E" + short_num(energy) + "_eps" + short_num(eps) + ".csv";
}

void run_wegner(const ExperimentConfig& c, Artifacts& out) {
  if (!c.model.shape) throw ConfigError("model.shape: the wegner experiment needs a potential shape");
  const std::optional<UcpConstants> constants = c.experiment.constants();
  json cells = json::array();
  Csv scaling{"L", "E", "eps", "mean", "stderr", "mean_per_volume", "stderr_per_volume", "rhs_bound", "excluded"};
  for (int side : c.grid.box_sides)
    for (double energy : c.experiment.energies)
      for (double eps : c.experiment.epsilons) {
        WegnerParams p;
        p.b = *c.experiment.b;
        p.energy = energy;
        p.epsilon = eps;
        p.constants = constants;
        p.measure = c.model.measure;
        p.shape = c.model.shape.value_or(SingleSiteShape::ball);
        p.grid = grid_for(c, side);
        p.magnetic = c.magnetic;
        p.n_samples = c.experiment.n_samples;
        p.master_seed = c.run.master_seed;
        const WegnerReport rep = wegner_expectation(p, c.run.worker_count());

        Csv per_sample{"sample_index", "seed_derived", "trace_count"};
        for (std::size_t s = 0; s < rep.counts.size(); ++s)
          per_sample.row(rep.sample_index[s], rep.sample_seed[s], rep.counts[s]);
        const std::string name = wegner_cell_name(side, energy, eps);
        out.write(name, per_sample.str());

        const double volume = p.grid.box_volume();
        const double rhs = rep.rhs_bound.value_or(std::nan(""));
        scaling.row(side, energy, eps, rep.mean, rep.stderr_mean, rep.mean / volume, rep.stderr_mean / volume, rhs,
                    rep.excluded);
        json cell = {{"L", side},
                     {"dim", c.model.dim},
                     {"mesh_per_unit", c.grid.mesh_per_unit},
                     {"E", energy},
                     {"eps", eps},
                     {"b", p.b},
                     {"n_samples", p.n_samples},
                     {"master_seed", p.master_seed},
                     {"mean", rep.mean},
                     {"stderr", rep.stderr_mean},
                     {"rhs_bound", rep.rhs_bound ? json(*rep.rhs_bound) : json(nullptr)},
                     {"bound_holds", rep.rhs_bound ? json(rep.mean <= *rep.rhs_bound) : json(nullptr)},
                     {"excluded", rep.excluded},
                     {"per_sample_csv_path", name}};
        if (constants) cell["constants"] = constants_json(c, *constants);
        cells.push_back(cell);
      }
  out.write("wegner_scaling.csv", scaling.str());
  out.write_json("wegner.json", cells);
}

// --- ids --------------------------------------------------------------------

void run_ids(const ExperimentConfig& c, Artifacts& out) {
  if (!c.model.shape) throw ConfigError("model.shape: the ids experiment needs a potential shape");
  const auto& e = c.experiment;
  // Hoelder fits need N(E0 +- eps) for every requested E0.
  std::set<double> energy_set(e.energies.begin(), e.energies.end());
  if (e.epsilons.size() >= 2)
    for (double e0 : e.energies)
      for (double eps : e.epsilons) energy_set.insert({e0 - eps, e0 + eps});

  IdsRequest req;
  req.box_sides = c.grid.box_sides;
  req.energies.assign(energy_set.begin(), energy_set.end());
  req.measure = c.model.measure;
  req.shape = *c.model.shape;
  req.dim = c.model.dim;
  req.mesh_per_unit = c.grid.mesh_per_unit;
  req.magnetic = c.magnetic;
  req.n_samples = e.n_samples;
  req.master_seed = c.run.master_seed;
  const auto rows = ids_estimate(req, c.run.worker_count());

  Csv all{"L", "E", "ids", "stderr"};
  std::map<int, std::vector<IdsRow>> by_side;
  for (const auto& r : rows) {
    all.row(r.box_side, r.energy, r.ids, r.stderr_ids);
    by_side[r.box_side].push_back(r);
  }
  for (auto& [side, curve] : by_side)
    std::sort(curve.begin(), curve.end(), [](const IdsRow& a, const IdsRow& b) { return a.energy < b.energy; });
  out.write("ids.csv", all.str());
  for (const auto& [side, curve] : by_side) {
    Csv per{"E", "ids", "stderr"};
    for (const auto& r : curve) per.row(r.energy, r.ids, r.stderr_ids);
    out.write("ids_L" + std::to_string(side) + ".csv", per.str());
  }

  // Wide table, one column pair per box side, plus the largest pairwise
  // discrepancy in units of the combined standard error.
  Csv scaling = [&] {
    std::string header = "E";
    for (const auto& [side, curve] : by_side)
      header += ",ids_L" + std::to_string(side) + ",stderr_L" + std::to_string(side);
    header += ",max_pairwise_z";
    return Csv{header};
  }();
  json scaling_report = json::array();
  for (std::size_t k = 0; k < req.energies.size(); ++k) {
    std::string line = num(req.energies[k]);
    double max_z = 0.0;
    for (const auto& [side, curve] : by_side) {
      line += "," + num(curve[k].ids) + "," + num(curve[k].stderr_ids);
      for (const auto& [other, other_curve] : by_side) {
        if (other <= side) continue;
        const double se = std::hypot(curve[k].stderr_ids, other_curve[k].stderr_ids);
        const double diff = std::abs(curve[k].ids - other_curve[k].ids);
        max_z = std::max(max_z, se > 0.0 ? diff / se : (diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0));
      }
    }
    scaling.row(line + "," + num(max_z));
    scaling_report.push_back({{"E", req.energies[k]}, {"max_pairwise_z", max_z}});
  }
  out.write("ids_scaling.csv", scaling.str());

  json hoelder = json::array();
  if (e.epsilons.size() >= 2) {
    for (const auto& [side, curve] : by_side)
      for (double e0 : e.energies) {
        const HoelderFit fit = hoelder_fit(curve, e0, e.epsilons);
        hoelder.push_back({{"L", side},
                           {"E0", e0},
                           {"epsilons", fit.epsilons},
                           {"increments", fit.increments},
                           {"below_resolution", fit.below_resolution},
                           {"slope", fit.below_resolution ? json(nullptr) : json(fit.slope)}});
      }
  }
  out.write_json("hoelder.json", hoelder);
}

}  // namespace

std::string_view software_version() { return BREATHER_LAB_VERSION; }

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xF];
  }
  return hex;
}

RunSummary run_experiment(const ExperimentConfig& config) {
  config.validate();
  Artifacts out(config.run.out_dir);
  try {
    out.write("config.toml", canonical_result_config(config));
    switch (config.kind()) {
      case ExperimentKind::spectrum: run_spectrum(config, out); break;
      case ExperimentKind::ucp: run_ucp(config, out); break;
      case ExperimentKind::lifting: run_lifting(config, out); break;
      case ExperimentKind::ssf: run_ssf(config, out); break;
      case ExperimentKind::wegner: run_wegner(config, out); break;
      case ExperimentKind::ids: run_ids(config, out); break;
    }
  } catch (const std::exception& err) {
    std::ofstream marker(out.dir() / kPartialName, std::ios::trunc);
    marker << "experiment " << to_string(config.kind()) << " aborted: " << err.what() << "\n";
    for (const auto& name : out.names()) marker << "written: " << name << "\n";
    throw;
  }
  std::ofstream(out.dir() / kManifestName, std::ios::binary | std::ios::trunc)
      << manifest(config, out, false).dump(2) << "\n";
  RunSummary summary{out.dir(), out.names()};
  summary.files.push_back(kManifestName);
  return summary;
}

int run_experiment_status(const ExperimentConfig& config, std::ostream& log) {
  try {
    const RunSummary s = run_experiment(config);
    log << "wrote " << s.files.size() << " files to " << s.out_dir.string() << "\n";
    return kExitSuccess;
  } catch (const ConfigError& err) {
    log << "configuration error: " << err.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& err) {
    log << "numerical failure: " << err.what() << "\n";
    return kExitNumericalFailure;
  }
}

}  // namespace breather
