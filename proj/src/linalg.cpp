#include "cfkit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>

namespace cfkit {

namespace {

constexpr double kRotationTol = 1.0e-14;
constexpr int kMaxSweeps = 64;

// Rows of `work` are the columns being orthogonalized (the input transposed),
// so every rotation touches two contiguous runs of memory.
struct OneSided {
  DenseMatrix work;  // n x m
  DenseMatrix vt;    // n x n, row j accumulates the j-th right singular vector
};

int rotate_pair(OneSided& s, std::size_t p, std::size_t q) {
  auto wp = s.work.row(p);
  auto wq = s.work.row(q);
  double app = 0.0, aqq = 0.0, apq = 0.0;
  for (std::size_t i = 0; i < wp.size(); ++i) {
    app += wp[i] * wp[i];
    aqq += wq[i] * wq[i];
    apq += wp[i] * wq[i];
  }
  if (std::abs(apq) <= kRotationTol * std::sqrt(app * aqq) || apq == 0.0) return 0;
  double zeta = (aqq - app) / (2.0 * apq);
  double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
  double cs = 1.0 / std::sqrt(1.0 + t * t);
  double sn = cs * t;
  for (std::size_t i = 0; i < wp.size(); ++i) {
    double a = wp[i], b = wq[i];
    wp[i] = cs * a - sn * b;
    wq[i] = sn * a + cs * b;
  }
  auto vp = s.vt.row(p);
  auto vq = s.vt.row(q);
  for (std::size_t i = 0; i < vp.size(); ++i) {
    double a = vp[i], b = vq[i];
    vp[i] = cs * a - sn * b;
    vq[i] = sn * a + cs * b;
  }
  return 1;
}

SvdResult decompose_tall(const DenseMatrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();

  OneSided s;
  s.work = DenseMatrix(n, m);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c) s.work(c, r) = a(r, c);
  s.vt = DenseMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) s.vt(j, j) = 1.0;

  // Round-robin schedule: each round pairs all columns disjointly, so the
  // rotations of one round commute and may run in parallel.
  const std::size_t players = n + (n % 2);
  std::vector<std::size_t> ring(players);
  std::iota(ring.begin(), ring.end(), 0);

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    long rotations = 0;
    for (std::size_t round = 0; round + 1 < players; ++round) {
      const std::size_t half = players / 2;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(+ : rotations) if (n >= 128)
#endif
      for (std::size_t g = 0; g < half; ++g) {  // NOLINT: OpenMP index
        std::size_t p = ring[g];
        std::size_t q = ring[players - 1 - g];
        if (p >= n || q >= n) continue;  // bye slot when n is odd
        rotations += rotate_pair(s, std::min(p, q), std::max(p, q));
      }
      // rotate all but the first player one step
      std::size_t last = ring[players - 1];
      for (std::size_t g = players - 1; g > 1; --g) ring[g] = ring[g - 1];
      ring[1] = last;
    }
    if (rotations == 0) break;
  }

  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) {
    double sq = 0.0;
    for (double x : s.work.row(j)) sq += x * x;
    norms[j] = std::sqrt(sq);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

  SvdResult out;
  out.sigma.resize(n);
  out.u = DenseMatrix(m, n);
  out.v = DenseMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t src = order[j];
    double sigma = norms[src];
    out.sigma[j] = sigma;
    if (sigma > 0.0) {
      auto col = s.work.row(src);
      for (std::size_t i = 0; i < m; ++i) out.u(i, j) = col[i] / sigma;
    }
    auto vrow = s.vt.row(src);
    for (std::size_t i = 0; i < n; ++i) out.v(i, j) = vrow[i];
  }

  // Fix signs: largest-magnitude entry of each left vector positive.
  for (std::size_t j = 0; j < n; ++j) {
    double best = 0.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (std::abs(out.u(i, j)) > best) {
        best = std::abs(out.u(i, j));
        arg = i;
      }
    }
    if (best > 0.0 && out.u(arg, j) < 0.0) {
      for (std::size_t i = 0; i < m; ++i) out.u(i, j) = -out.u(i, j);
      for (std::size_t i = 0; i < n; ++i) out.v(i, j) = -out.v(i, j);
    }
  }
  return out;
}

}  // namespace

SvdResult jacobi_svd(DenseMatrix a) {
  if (a.rows() >= a.cols()) return decompose_tall(a);
  DenseMatrix t(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) t(c, r) = a(r, c);
  SvdResult flipped = decompose_tall(t);
  SvdResult out;
  out.sigma = std::move(flipped.sigma);
  out.u = std::move(flipped.v);
  out.v = std::move(flipped.u);

  // The sign convention follows the left vectors, which swapped sides.
  const std::size_t m = out.u.rows(), n = out.v.rows(), r = out.sigma.size();
  for (std::size_t j = 0; j < r; ++j) {
    double best = 0.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (std::abs(out.u(i, j)) > best) {
        best = std::abs(out.u(i, j));
        arg = i;
      }
    }
    if (best > 0.0 && out.u(arg, j) < 0.0) {
      for (std::size_t i = 0; i < m; ++i) out.u(i, j) = -out.u(i, j);
      for (std::size_t i = 0; i < n; ++i) out.v(i, j) = -out.v(i, j);
    }
  }
  return out;
}

}  // namespace cfkit
