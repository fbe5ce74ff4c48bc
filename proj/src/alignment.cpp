#include "docalign/alignment.hpp"

#include <algorithm>
#include <limits>

#include "docalign/vecmath.hpp"

namespace docalign {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum Choice : std::uint8_t { C_NONE = 0, C_MATCH, C_DEL, C_INS };

std::vector<double> row_norms(const EmbeddingMatrix& m) {
  std::vector<double> norms(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    norms[i] = l2_norm(std::span<const float>(m.row(i), m.dim));
  return norms;
}

// Band over DP nodes: for row i, admissible columns are [lo[i], hi[i]].
struct Band {
  std::vector<std::size_t> lo;
  std::vector<std::size_t> hi;
};

Band full_band(std::size_t n, std::size_t m) {
  Band band;
  band.lo.assign(n + 1, 0);
  band.hi.assign(n + 1, m);
  return band;
}

// Minimum-cost DP restricted to the band. Costs and backtrace choices are
// stored per banded row, so memory is proportional to the band area.
Alignment banded_align(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt,
                       const AlignConfig& cfg, const Band& band) {
  const std::size_t n = src.rows();
  const std::size_t m = tgt.rows();
  const double skip = cfg.skip_cost;

  const std::vector<double> ns = row_norms(src);
  const std::vector<double> nt = row_norms(tgt);
  auto sim = [&](std::size_t i, std::size_t j) {
    if (ns[i] <= 1e-12 || nt[j] <= 1e-12) return 0.0;
    double dp = dot(std::span<const float>(src.row(i), src.dim),
                    std::span<const float>(tgt.row(j), tgt.dim));
    return dp / (ns[i] * nt[j]);
  };

  std::vector<std::vector<double>> cost(n + 1);
  std::vector<std::vector<std::uint8_t>> choice(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    std::size_t width = band.hi[i] - band.lo[i] + 1;
    cost[i].assign(width, kInf);
    choice[i].assign(width, C_NONE);
  }
  auto at = [&](std::size_t i, std::size_t j) -> double& {
    return cost[i][j - band.lo[i]];
  };
  auto in_band = [&](std::size_t i, std::size_t j) {
    return j >= band.lo[i] && j <= band.hi[i];
  };

  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = band.lo[i]; j <= band.hi[i]; ++j) {
      if (i == 0 && j == 0) {
        at(i, j) = 0.0;
        continue;
      }
      double best = kInf;
      std::uint8_t best_choice = C_NONE;
      if (i > 0 && j > 0 && in_band(i - 1, j - 1)) {
        double c = at(i - 1, j - 1) + (1.0 - sim(i - 1, j - 1));
        if (c < best) {
          best = c;
          best_choice = C_MATCH;
        }
      }
      if (i > 0 && in_band(i - 1, j)) {
        double c = at(i - 1, j) + skip;
        if (c < best) {
          best = c;
          best_choice = C_DEL;
        }
      }
      if (j > band.lo[i]) {
        double c = at(i, j - 1) + skip;
        if (c < best) {
          best = c;
          best_choice = C_INS;
        }
      }
      at(i, j) = best;
      choice[i][j - band.lo[i]] = best_choice;
    }
  }

  Alignment result;
  result.cost = at(n, m);
  std::size_t i = n;
  std::size_t j = m;
  while (i != 0 || j != 0) {
    switch (choice[i][j - band.lo[i]]) {
      case C_MATCH:
        --i;
        --j;
        result.links.push_back({LinkKind::MATCH, std::uint32_t(i), std::uint32_t(j)});
        break;
      case C_DEL:
        --i;
        result.links.push_back({LinkKind::DEL, std::uint32_t(i), kNoIndex});
        break;
      case C_INS:
        --j;
        result.links.push_back({LinkKind::INS, kNoIndex, std::uint32_t(j)});
        break;
      default:
        throw std::runtime_error("banded_align: disconnected band");
    }
  }
  std::reverse(result.links.begin(), result.links.end());
  return result;
}

}  // namespace

Alignment align_exact(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt,
                      const AlignConfig& cfg) {
  if (!(cfg.skip_cost > 0.0)) throw InputError("skip_cost must be > 0");
  return banded_align(src, tgt, cfg, full_band(src.rows(), tgt.rows()));
}

EmbeddingMatrix downsample(const EmbeddingMatrix& emb) {
  const std::size_t n = emb.rows();
  EmbeddingMatrix out;
  out.dim = emb.dim;
  out.data.resize(((n + 1) / 2) * std::size_t(emb.dim));
  for (std::size_t i = 0; 2 * i < n; ++i) {
    float* orow = out.row(i);
    const float* a = emb.row(2 * i);
    if (2 * i + 1 < n) {
      const float* b = emb.row(2 * i + 1);
      for (std::uint32_t d = 0; d < emb.dim; ++d) orow[d] = a[d] + b[d];
    } else {
      std::copy(a, a + emb.dim, orow);
    }
    unit_normalize_inplace(std::span<float>(orow, emb.dim));
  }
  return out;
}

namespace {

// Node path through the DP grid implied by an alignment.
std::vector<std::pair<std::size_t, std::size_t>> node_path(
    const Alignment& alignment) {
  std::vector<std::pair<std::size_t, std::size_t>> nodes;
  nodes.emplace_back(0, 0);
  for (const AlignmentLink& link : alignment.links) {
    auto [i, j] = nodes.back();
    switch (link.kind) {
      case LinkKind::MATCH: nodes.emplace_back(i + 1, j + 1); break;
      case LinkKind::DEL: nodes.emplace_back(i + 1, j); break;
      case LinkKind::INS: nodes.emplace_back(i, j + 1); break;
    }
  }
  return nodes;
}

// Projects a coarse node path to fine resolution (indices doubled, gaps
// interpolated, ends clamped) and widens it by the search radius.
Band project_band(const Alignment& coarse, std::size_t n, std::size_t m,
                  std::uint32_t radius) {
  std::vector<std::pair<std::size_t, std::size_t>> fine;
  std::pair<std::size_t, std::size_t> prev{0, 0};
  fine.emplace_back(0, 0);
  for (const auto& [ci, cj] : node_path(coarse)) {
    std::pair<std::size_t, std::size_t> cur{std::min(2 * ci, n),
                                            std::min(2 * cj, m)};
    while (prev != cur) {
      if (prev.first < cur.first) ++prev.first;
      if (prev.second < cur.second) ++prev.second;
      fine.push_back(prev);
    }
  }
  if (fine.back() != std::pair<std::size_t, std::size_t>{n, m}) {
    // odd-length tails: walk the remaining steps diagonally
    auto cur = std::pair<std::size_t, std::size_t>{n, m};
    while (fine.back() != cur) {
      auto next = fine.back();
      if (next.first < n) ++next.first;
      if (next.second < m) ++next.second;
      fine.push_back(next);
    }
  }

  std::vector<std::size_t> rawlo(n + 1, std::size_t(-1));
  std::vector<std::size_t> rawhi(n + 1, 0);
  for (const auto& [i, j] : fine) {
    rawlo[i] = std::min(rawlo[i], j);
    rawhi[i] = std::max(rawhi[i], j);
  }

  // rawlo/rawhi are nondecreasing, so the window min/max sit at the edges
  Band band;
  band.lo.resize(n + 1);
  band.hi.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    std::size_t ilo = i > radius ? i - radius : 0;
    std::size_t ihi = std::min(n, i + radius);
    std::size_t lo = rawlo[ilo];
    std::size_t hi = rawhi[ihi];
    band.lo[i] = lo > radius ? lo - radius : 0;
    band.hi[i] = std::min(m, hi + radius);
  }
  return band;
}

}  // namespace

Alignment align_coarse_to_fine(const EmbeddingMatrix& src,
                               const EmbeddingMatrix& tgt,
                               const AlignConfig& cfg) {
  if (!(cfg.skip_cost > 0.0)) throw InputError("skip_cost must be > 0");
  if (cfg.radius < 1) throw InputError("radius must be >= 1");
  if (cfg.min_size < 2) throw InputError("min_size must be >= 2");

  const std::size_t n = src.rows();
  const std::size_t m = tgt.rows();
  if (n == 0 || m == 0 || std::max(n, m) <= cfg.min_size)
    return align_exact(src, tgt, cfg);

  Alignment coarse =
      align_coarse_to_fine(downsample(src), downsample(tgt), cfg);
  return banded_align(src, tgt, cfg, project_band(coarse, n, m, cfg.radius));
}

}  // namespace docalign
