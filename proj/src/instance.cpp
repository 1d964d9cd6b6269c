// SPDX-License-Identifier: Apache-2.0

#include "dlp/instance.hpp"

#include <algorithm>
#include <cmath>

#include "dlp/errors.hpp"
#include "dlp/fused_dantzig.hpp"
#include "dlp/kernels.hpp"
#include "dlp/rng.hpp"

namespace dlp {

namespace {

// Stream layout per instance seed. Design column j uses stream kColumnBase+j
// for its Gaussian entries and kMaskBase+j for the zeroing mask; re-draws of
// a fully-zeroed column fold the attempt counter into the stream id.
constexpr std::uint64_t kColumnBase = 0;
constexpr std::uint64_t kMaskBase = 1ull << 32;
constexpr std::uint64_t kRedrawBase = 2ull << 32;
constexpr std::uint64_t kSharedRowStream = 3ull << 32;
constexpr std::uint64_t kSupportStream = (3ull << 32) + 1;
constexpr std::uint64_t kSignalStream = (3ull << 32) + 2;
constexpr std::uint64_t kNoiseStream = (3ull << 32) + 3;
constexpr std::uint64_t kKnotStream = (3ull << 32) + 4;
constexpr int kRedrawBudget = 100;

double population_variance(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double mean = kernels::sum(v.data(), v.size()) / static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(v.size());
}

// Equicorrelated rows via a shared factor: sqrt(rho)*z0_i +
// sqrt(1-rho)*z_ij has unit variance and pairwise correlation rho.
SparseMatrix sample_design(const InstanceSpec& spec,
                           const std::vector<double>& shared_row,
                           bool normalize, bool sparsify) {
  const int n = spec.n, p = spec.p;
  const double shared_w = std::sqrt(spec.rho);
  const double own_w = std::sqrt(1.0 - spec.rho);

  std::vector<std::vector<std::pair<int, double>>> cols(p);
  std::vector<double> dense(n);
  for (int j = 0; j < p; ++j) {
    bool ok = false;
    for (int attempt = 0; attempt < kRedrawBudget && !ok; ++attempt) {
      const std::uint64_t shift =
          attempt == 0
              ? 0
              : kRedrawBase + (static_cast<std::uint64_t>(attempt) << 40);
      CounterRng entry_rng(spec.seed, kColumnBase + shift + j);
      CounterRng mask_rng(spec.seed, kMaskBase + shift + j);
      double norm_sq = 0.0;
      for (int i = 0; i < n; ++i) {
        double v = shared_w * shared_row[i] + own_w * entry_rng.next_gaussian();
        if (sparsify && spec.pi > 0.0 && mask_rng.next_uniform() < spec.pi) {
          v = 0.0;
        }
        dense[i] = v;
        norm_sq += v * v;
      }
      if (norm_sq == 0.0) continue;
      ok = true;
      const double scale = normalize ? 1.0 / std::sqrt(norm_sq) : 1.0;
      cols[j].clear();
      for (int i = 0; i < n; ++i) {
        if (dense[i] != 0.0) cols[j].emplace_back(i, dense[i] * scale);
      }
    }
    if (!ok) {
      throw DegenerateColumn("column " + std::to_string(j) +
                             " zeroed out after redraw budget");
    }
  }
  return SparseMatrix::from_columns(n, cols);
}

std::vector<int> sample_support(CounterRng& rng, int p, int size) {
  std::vector<std::uint8_t> used(p, 0);
  std::vector<int> support;
  support.reserve(size);
  while (static_cast<int>(support.size()) < size) {
    const int j = static_cast<int>(rng.next_below(p));
    if (!used[j]) {
      used[j] = 1;
      support.push_back(j);
    }
  }
  std::sort(support.begin(), support.end());
  return support;
}

std::vector<double> piecewise_beta(const InstanceSpec& spec, int length) {
  if (spec.knot_count >= length) {
    throw InvalidBound("knot count must be below the signal length");
  }
  CounterRng knot_rng(spec.seed, kKnotStream);
  CounterRng jump_rng(spec.seed, kSignalStream);
  std::vector<double> beta(length, jump_rng.next_gaussian());
  std::vector<std::uint8_t> used(length, 0);
  int placed = 0;
  while (placed < spec.knot_count) {
    const int k = 1 + static_cast<int>(knot_rng.next_below(length - 1));
    if (used[k]) continue;
    used[k] = 1;
    ++placed;
    const double jump = jump_rng.next_gaussian();
    for (int i = k; i < length; ++i) beta[i] += jump;
  }
  return beta;
}

std::vector<double> add_noise(const InstanceSpec& spec,
                              std::vector<double> clean,
                              std::vector<double>* noise_out) {
  const double sigma =
      spec.snr > 0.0 ? std::sqrt(population_variance(clean) / spec.snr) : 0.0;
  CounterRng noise_rng(spec.seed, kNoiseStream);
  std::vector<double> noise(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    noise[i] = sigma * noise_rng.next_gaussian();
    clean[i] += noise[i];
  }
  if (noise_out != nullptr) *noise_out = std::move(noise);
  return clean;
}

}  // namespace

const char* to_string(InstanceKind k) {
  switch (k) {
    case InstanceKind::ds: return "ds";
    case InstanceKind::bp: return "bp";
    case InstanceKind::fused_signal: return "fused_signal";
    case InstanceKind::fused_regression: return "fused_regression";
  }
  return "unknown";
}

int InstanceSpec::support_size() const {
  if (support_override) return *support_override;
  switch (kind) {
    case InstanceKind::ds: return n / 5;
    case InstanceKind::bp: return static_cast<int>(0.2 * n);
    default: return 0;
  }
}

Instance generate_instance(const InstanceSpec& spec) {
  if (spec.n <= 0) throw InvalidBound("n must be positive");
  if (spec.rho < 0.0 || spec.rho >= 1.0) throw InvalidBound("rho in [0, 1)");
  if (spec.pi < 0.0 || spec.pi >= 1.0) throw InvalidBound("pi in [0, 1)");

  Instance inst;
  inst.spec = spec;

  switch (spec.kind) {
    case InstanceKind::ds:
    case InstanceKind::bp: {
      if (spec.p <= 0) throw InvalidBound("p must be positive");
      if (spec.support_size() > spec.p) {
        throw InvalidBound("planted support exceeds p");
      }
      CounterRng shared_rng(spec.seed, kSharedRowStream);
      std::vector<double> shared(spec.n);
      for (auto& v : shared) v = shared_rng.next_gaussian();
      inst.x = sample_design(spec, shared, /*normalize=*/true, /*sparsify=*/true);

      CounterRng support_rng(spec.seed, kSupportStream);
      CounterRng coef_rng(spec.seed, kSignalStream);
      inst.beta0.assign(spec.p, 0.0);
      for (int j : sample_support(support_rng, spec.p, spec.support_size())) {
        inst.beta0[j] = coef_rng.next_gaussian();
      }
      std::vector<double> clean(spec.n, 0.0);
      inst.x.mul(inst.beta0, clean);
      if (spec.kind == InstanceKind::ds) {
        inst.y = add_noise(spec, std::move(clean), &inst.noise);
      } else {
        inst.y = std::move(clean);  // exact measurements
      }
      break;
    }
    case InstanceKind::fused_signal: {
      inst.beta0 = piecewise_beta(spec, spec.n);
      inst.y = add_noise(spec, inst.beta0, &inst.noise);
      break;
    }
    case InstanceKind::fused_regression: {
      if (spec.p <= 0) throw InvalidBound("p must be positive");
      CounterRng shared_rng(spec.seed, kSharedRowStream);
      std::vector<double> shared(spec.n, 0.0);
      InstanceSpec raw = spec;
      raw.rho = 0.0;
      raw.pi = 0.0;
      inst.x = sample_design(raw, shared, /*normalize=*/false, /*sparsify=*/false);
      inst.beta0 = piecewise_beta(spec, spec.p);
      std::vector<double> clean(spec.n, 0.0);
      inst.x.mul(inst.beta0, clean);
      inst.y = add_noise(spec, std::move(clean), &inst.noise);
      break;
    }
  }
  return inst;
}

std::vector<double> lambda_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > 0.0) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw InvalidAnchor("grid anchors must be positive and finite");
  }
  if (count < 1) throw InvalidAnchor("grid needs at least one point");
  if (count == 1) return {hi};
  if (!(lo < hi)) throw InvalidAnchor("lower anchor must be below the upper");
  std::vector<double> grid(count);
  const double log_hi = std::log(hi), log_lo = std::log(lo);
  for (int k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) / (count - 1);
    grid[k] = std::exp(log_hi + t * (log_lo - log_hi));
  }
  grid.front() = hi;
  grid.back() = lo;
  return grid;
}

LambdaAnchors instance_anchors(const Instance& inst) {
  LambdaAnchors anchors;
  auto scan = [](const SparseMatrix& m, std::span<const double> v) {
    std::vector<double> corr(m.n_cols(), 0.0);
    m.tmul(v, corr);
    return kernels::max_abs(corr.data(), corr.size());
  };
  switch (inst.spec.kind) {
    case InstanceKind::ds:
    case InstanceKind::bp: {
      anchors.lambda_max = scan(inst.x, inst.y);
      if (!inst.noise.empty()) anchors.noise_level = scan(inst.x, inst.noise);
      break;
    }
    case InstanceKind::fused_signal: {
      // Suffix sums play the role of the correlation scan. The lambda_max
      // anchor evaluates them at the forced mean fit, so y is centered;
      // the noise anchor is taken at the true signal, so e0 enters raw.
      auto suffix_max = [](std::span<const double> v, double shift) {
        double run = 0.0, best = 0.0;
        for (std::size_t i = v.size(); i-- > 1;) {
          run += v[i] - shift;
          best = std::max(best, std::fabs(run));
        }
        return best;
      };
      const double mean =
          kernels::sum(inst.y.data(), inst.y.size()) / inst.y.size();
      anchors.lambda_max = suffix_max(inst.y, mean);
      anchors.noise_level = suffix_max(inst.noise, 0.0);
      break;
    }
    case InstanceKind::fused_regression: {
      ProjectedData pd = project_fused_regression(inst.x, inst.y);
      anchors.lambda_max = scan(pd.x_tilde, pd.y_tilde);
      if (!inst.noise.empty()) {
        std::vector<double> noise_proj = inst.noise;
        if (!pd.proj_dir.empty()) {
          const double usq = kernels::dot(pd.proj_dir.data(), pd.proj_dir.data(),
                                          pd.proj_dir.size());
          const double coef =
              kernels::dot(pd.proj_dir.data(), noise_proj.data(),
                           noise_proj.size()) /
              usq;
          kernels::axpy(-coef, pd.proj_dir.data(), noise_proj.data(),
                        noise_proj.size());
        }
        anchors.noise_level = scan(pd.x_tilde, noise_proj);
      }
      break;
    }
  }
  return anchors;
}

}  // namespace dlp
