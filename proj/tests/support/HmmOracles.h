#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "sparqlog/intent/Intent.h"

namespace sparqlog::testing {

inline std::vector<double> randomDistribution(std::mt19937_64& rng, size_t n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> out(n);
  double total = 0.0;
  for (auto& x : out) total += (x = u(rng));
  for (auto& x : out) x /= total;
  return out;
}

inline intent::HmmModel randomHmm(std::mt19937_64& rng, size_t states,
                                  size_t symbols) {
  intent::HmmModel m;
  m.pi = randomDistribution(rng, states);
  for (size_t i = 0; i < states; ++i) {
    m.a.push_back(randomDistribution(rng, states));
    m.b.push_back(randomDistribution(rng, symbols));
  }
  return m;
}

// Calls fn(path) for every hidden path of length n over `states` states.
template <typename Fn>
void forEachPath(size_t states, size_t n, Fn&& fn) {
  std::vector<size_t> path(n, 0);
  while (true) {
    fn(path);
    size_t t = n;
    while (t > 0 && ++path[t - 1] == states) path[--t] = 0;
    if (t == 0) return;
  }
}

// Plain-product joint probability p(path, os).
inline double jointProbability(const intent::HmmModel& m,
                               const std::vector<size_t>& path,
                               const std::vector<size_t>& os) {
  double p = m.pi[path[0]] * m.b[path[0]][os[0]];
  for (size_t t = 1; t < os.size(); ++t) {
    p *= m.a[path[t - 1]][path[t]] * m.b[path[t]][os[t]];
  }
  return p;
}

inline double enumeratedForward(const intent::HmmModel& m,
                                const std::vector<size_t>& os) {
  double total = 0.0;
  forEachPath(m.numStates(), os.size(), [&](const std::vector<size_t>& path) {
    total += jointProbability(m, path, os);
  });
  return total;
}

inline double enumeratedViterbi(const intent::HmmModel& m,
                                const std::vector<size_t>& os) {
  double best = 0.0;
  forEachPath(m.numStates(), os.size(), [&](const std::vector<size_t>& path) {
    best = std::max(best, jointProbability(m, path, os));
  });
  return best;
}

// p(next = u | os) by enumerating both sequences; os may be empty.
inline std::vector<double> enumeratedPredictive(const intent::HmmModel& m,
                                                const std::vector<size_t>& os) {
  std::vector<double> out;
  const double base = os.empty() ? 1.0 : enumeratedForward(m, os);
  for (size_t u = 0; u < m.numSymbols(); ++u) {
    auto ext = os;
    ext.push_back(u);
    out.push_back(enumeratedForward(m, ext) / base);
  }
  return out;
}

}  // namespace sparqlog::testing
