#ifndef CFKIT_TESTS_SYNTH_HPP_
#define CFKIT_TESTS_SYNTH_HPP_

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cfkit/random.hpp"
#include "cfkit/ratings.hpp"

namespace cfkit::testsupport {

/// Seeded sparse ratings fixture: m users, n items, roughly `density` of the
/// cells observed, integer ratings 1..5 drawn from a user-biased law so user
/// means differ.
inline std::vector<Interaction> synth_interactions(std::size_t m, std::size_t n,
                                                   double density, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Interaction> out;
  for (std::size_t u = 0; u < m; ++u) {
    double bias = unit_real(rng) * 2.0;  // per-user shift in [0,2)
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (unit_real(rng) >= density) continue;
      double base = 1.0 + unit_real(rng) * 2.5 + bias;
      double r = std::min(5.0, std::max(1.0, std::floor(base + 0.5)));
      out.push_back({static_cast<std::int64_t>(u + 1), static_cast<std::int64_t>(i + 1),
                     r, static_cast<std::int64_t>(800000000 + i)});
      any = true;
    }
    if (!any)
      out.push_back({static_cast<std::int64_t>(u + 1),
                     static_cast<std::int64_t>(1 + bounded(rng, n)), 3.0, 800000000});
  }
  return out;
}

inline std::string to_ml100k(const std::vector<Interaction>& interactions) {
  std::string text;
  for (const Interaction& it : interactions) {
    text += std::to_string(it.user);
    text += '\t';
    text += std::to_string(it.item);
    text += '\t';
    text += std::to_string(static_cast<int>(it.rating));
    text += '\t';
    text += std::to_string(it.timestamp);
    text += '\n';
  }
  return text;
}

}  // namespace cfkit::testsupport

#endif  // CFKIT_TESTS_SYNTH_HPP_
