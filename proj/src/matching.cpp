#include "vims/matching.hpp"

namespace vims {

std::vector<Match> match_2nn(const std::vector<BinaryDescriptor>& query,
                             const std::vector<BinaryDescriptor>& target, double ratio,
                             int absolute_threshold) {
  std::vector<Match> out;
  if (query.empty() || target.empty()) return out;

  const auto q_n = query.size();
  const auto t_n = target.size();
  std::vector<int> best_t(q_n, -1), best_d(q_n, 257), second_d(q_n, 257);
  std::vector<int> t_best_q(t_n, -1), t_best_d(t_n, 257);

  for (std::size_t qi = 0; qi < q_n; ++qi) {
    for (std::size_t ti = 0; ti < t_n; ++ti) {
      const int d = hamming(query[qi].bits, target[ti].bits);
      if (d < best_d[qi]) {
        second_d[qi] = best_d[qi];
        best_d[qi] = d;
        best_t[qi] = static_cast<int>(ti);
      } else if (d < second_d[qi]) {
        second_d[qi] = d;
      }
      if (d < t_best_d[ti]) {
        t_best_d[ti] = d;
        t_best_q[ti] = static_cast<int>(qi);
      }
    }
  }

  for (std::size_t qi = 0; qi < q_n; ++qi) {
    if (best_t[qi] < 0) continue;
    bool accept;
    if (t_n >= 2) {
      accept = static_cast<double>(best_d[qi]) < ratio * static_cast<double>(second_d[qi]);
    } else {
      accept = best_d[qi] <= absolute_threshold;
    }
    if (!accept) continue;
    const auto ti = static_cast<std::size_t>(best_t[qi]);
    if (t_best_q[ti] != static_cast<int>(qi)) continue;  // mutual best only
    out.push_back(Match{static_cast<std::uint32_t>(qi), static_cast<std::uint32_t>(ti),
                        best_d[qi]});
  }
  return out;
}

}  // namespace vims
