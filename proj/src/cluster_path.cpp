#include "kcm/cluster_path.hpp"

#include "kcm/constraint.hpp"
#include "kcm/errors.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <stdexcept>

namespace kcm {

namespace {

// Local coordinate i sits at ring site origin + dir * i.
struct Frame {
  long origin;
  int dir;
  long size;

  long site(long i) const {
    const long r = (origin + dir * i) % size;
    return r < 0 ? r + size : r;
  }
  // Ring bond index of the exchange between local sites i and i + 1.
  long bond(long i) const { return dir > 0 ? site(i) : site(i + 1); }
};

bool move_is_legal(const Configuration& cfg, long bond, int m) {
  return cfg(bond) != cfg(bond + 1) && constraint(cfg, bond, m) > 0;
}

class Builder {
 public:
  Builder(const Configuration& cfg, Frame frame, int m) : work_(cfg), frame_(frame), m_(m) {}

  int occ(long i) const { return work_(frame_.site(i)); }

  // Exchange of local sites i and i + 1; a no-op on equal occupations.
  void exchange_local(long i) {
    const long bond = frame_.bond(i);
    if (work_(bond) == work_(bond + 1)) return;
    if (!move_is_legal(work_, bond, m_)) throw std::logic_error("path builder produced an illegal move");
    work_.swap_sites(bond, bond + 1);
    moves_.push_back(bond);
  }

  // Cyclic shift of the pattern on local sites [p, p + k] (left: the value at p
  // ends at p + k), by a shortest sequence of legal exchanges inside the segment.
  void rotate(long p, int k, bool left) {
    const int width = k + 1;
    unsigned start = 0;
    for (int j = 0; j < width; ++j) start |= static_cast<unsigned>(occ(p + j)) << j;
    const unsigned mask = (1U << width) - 1U;
    const unsigned target = left ? ((start >> 1) | ((start & 1U) << k)) & mask
                                 : ((start << 1) | (start >> k)) & mask;
    if (start == target) return;

    Configuration scratch = work_;
    const auto load = [&](unsigned bits) {
      for (int j = 0; j < width; ++j) scratch.set(frame_.site(p + j), static_cast<int>((bits >> j) & 1U));
    };
    std::vector<int> parent_move(std::size_t{1} << width, -1);
    std::vector<unsigned> parent(std::size_t{1} << width, 0);
    std::vector<bool> seen(std::size_t{1} << width, false);
    std::deque<unsigned> queue{start};
    seen[start] = true;
    while (!queue.empty() && !seen[target]) {
      const unsigned state = queue.front();
      queue.pop_front();
      load(state);
      for (int j = 0; j < k; ++j) {
        if (((state >> j) & 1U) == ((state >> (j + 1)) & 1U)) continue;
        if (constraint(scratch, frame_.bond(p + j), m_) == 0) continue;
        const unsigned next = state ^ (3U << j);
        if (seen[next]) continue;
        seen[next] = true;
        parent[next] = state;
        parent_move[next] = j;
        queue.push_back(next);
      }
    }
    if (!seen[target]) throw std::logic_error("path builder could not rotate a cluster segment");
    std::vector<int> steps;
    for (unsigned s = target; s != start; s = parent[s]) steps.push_back(parent_move[s]);
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) exchange_local(p + *it);
  }

  std::vector<long>& moves() { return moves_; }

 private:
  Configuration work_;
  Frame frame_;
  int m_;
  std::vector<long> moves_;
};

long distance_mod(long from, long to, long size) {
  const long r = (to - from) % size;
  return r < 0 ? r + size : r;
}

}  // namespace

std::optional<long> find_first_mobile_cluster(const Configuration& cfg, const BoxSpec& box, int m) {
  for (long s = 0; s < box.length; ++s) {
    const long x = box.first() + s;
    if (cfg(x) == 0) continue;
    if (s + m <= box.length) {
      int run = 0;
      while (run < m && cfg(x + run) == 1) ++run;
      if (run == m) return cfg.wrap(x);
    }
    if (s + m + 1 <= box.length) {
      int particles = 0;
      for (int j = 0; j <= m; ++j) particles += cfg(x + j);
      if (particles >= m) return cfg.wrap(x);
    }
  }
  return std::nullopt;
}

ExchangePath build_exchange_path(const Configuration& cfg, long y, long z, const BoxSpec& cluster_box, int m) {
  const long size = cfg.size();
  const long ell = cluster_box.length;
  if (ell < m || ell >= size) throw InvalidInput("cluster box length must lie in [m, L - 1]");
  if (cfg.wrap(y) == cfg.wrap(z)) throw InvalidInput("exchange sites must differ");
  const auto in_box = [&](long u) { return distance_mod(cluster_box.first(), u, size) < ell; };
  if (in_box(y) || in_box(z)) throw InvalidInput("exchange sites must lie outside the cluster box");

  // Distances from the box to y and z on either side; pick the shorter window.
  const long left_y = distance_mod(y, cluster_box.first(), size);
  const long left_z = distance_mod(z, cluster_box.first(), size);
  const long right_y = distance_mod(cluster_box.last(), y, size);
  const long right_z = distance_mod(cluster_box.last(), z, size);
  const bool use_left = std::max(left_y, left_z) <= std::max(right_y, right_z);
  const long dist_y = use_left ? left_y : right_y;
  const long dist_z = use_left ? left_z : right_z;
  const long far = dist_y >= dist_z ? y : z;
  const long far_dist = std::max(dist_y, dist_z);
  const long near_dist = std::min(dist_y, dist_z);

  // Local frame: the far site at 0, the near site at b, the box at [box_lo, box_hi].
  const Frame frame{cfg.wrap(far), use_left ? 1 : -1, size};
  const long b = far_dist - near_dist;
  const long box_lo = far_dist;
  const long box_hi = far_dist + ell - 1;

  ExchangePath path;
  path.source = cfg.wrap(y);
  path.target = cfg.wrap(z);
  path.window_length = box_hi + 1;
  path.window_first = use_left ? frame.site(0) : frame.site(box_hi);
  path.length_bound = path_length_constant(m) * path.window_length;

  Builder builder(cfg, frame, m);
  // Locate the cluster in local order (the first one for the unreflected frame).
  long cluster = -1;
  long hole = -1;
  for (long s = box_lo; s <= box_hi && cluster < 0; ++s) {
    if (builder.occ(s) == 0) continue;
    if (s + m - 1 <= box_hi) {
      int run = 0;
      while (run < m && builder.occ(s + run) == 1) ++run;
      if (run == m) {
        cluster = s;
        break;
      }
    }
    if (s + m <= box_hi) {
      int particles = 0;
      long gap = -1;
      for (int j = 0; j <= m; ++j) {
        particles += builder.occ(s + j);
        if (builder.occ(s + j) == 0) gap = s + j;
      }
      if (particles >= m) {
        cluster = s;
        hole = gap;
      }
    }
  }
  if (cluster < 0) throw NoCluster("the box holds no mobile cluster");
  if (builder.occ(0) == builder.occ(b)) return path;

  // Close the hole inside the cluster: particles right of it step left.
  std::vector<long> normalization;
  for (long j = hole; j >= 0 && j < cluster + m; ++j) {
    builder.exchange_local(j);
    normalization.push_back(j);
  }

  // Cluster leftwards to b + 1, then the group {value at b, cluster} to 1.
  for (long c = cluster; c > b + 1; --c) builder.rotate(c - 1, m, true);
  for (long g = b; g > 1; --g) builder.rotate(g - 1, m + 1, true);
  builder.exchange_local(0);
  for (long g = 1; g < b; ++g) builder.rotate(g, m + 1, false);
  for (long c = b + 1; c < cluster; ++c) builder.rotate(c, m, false);
  for (auto it = normalization.rbegin(); it != normalization.rend(); ++it) builder.exchange_local(*it);

  path.moves = std::move(builder.moves());
  return path;
}

PathReport validate_exchange_path(const Configuration& cfg, const ExchangePath& path, int m) {
  PathReport report;
  report.length = static_cast<long>(path.moves.size());
  Configuration work = cfg;
  std::map<long, int> usage;
  for (std::size_t i = 0; i < path.moves.size(); ++i) {
    const long bond = work.wrap(path.moves[i]);
    if (report.legal && !move_is_legal(work, bond, m)) {
      report.legal = false;
      report.first_illegal = static_cast<long>(i);
    }
    work.swap_sites(bond, bond + 1);
    report.max_bond_usage = std::max(report.max_bond_usage, ++usage[bond]);
  }
  report.exact = work == exchange(cfg, path.source, path.target);
  report.restored = true;
  for (long x = 0; x < cfg.size(); ++x) {
    if (x == cfg.wrap(path.source) || x == cfg.wrap(path.target)) continue;
    if (work(x) != cfg(x)) report.restored = false;
  }
  return report;
}

ReachabilityResult bfs_reachability_oracle(const Configuration& cfg, long y, long z, long window_first,
                                           long window_length, int m) {
  if (window_length > kMaxOracleWindow) throw SizeLimit("BFS window exceeds 20 sites");
  if (window_length < 2 || window_length > cfg.size()) throw InvalidInput("BFS window must hold 2..L sites");
  const long size = cfg.size();
  const long y_off = distance_mod(window_first, y, size);
  const long z_off = distance_mod(window_first, z, size);
  if (y_off >= window_length || z_off >= window_length) throw InvalidInput("exchange sites must lie in the window");

  const auto width = static_cast<int>(window_length);
  std::uint32_t start = 0;
  for (int j = 0; j < width; ++j) start |= static_cast<std::uint32_t>(cfg(window_first + j)) << j;
  std::uint32_t target = start;
  if (((start >> y_off) & 1U) != ((start >> z_off) & 1U)) target ^= (1U << y_off) | (1U << z_off);

  ReachabilityResult result;
  std::vector<std::int32_t> dist(std::size_t{1} << width, -1);
  std::deque<std::uint32_t> queue{start};
  dist[start] = 0;
  Configuration scratch = cfg;
  while (!queue.empty()) {
    const std::uint32_t state = queue.front();
    queue.pop_front();
    ++result.states_visited;
    if (state == target) break;
    for (int j = 0; j < width; ++j) scratch.set(window_first + j, static_cast<int>((state >> j) & 1U));
    for (int j = 0; j + 1 < width; ++j) {
      if (((state >> j) & 1U) == ((state >> (j + 1)) & 1U)) continue;
      if (constraint(scratch, window_first + j, m) == 0) continue;
      const std::uint32_t next = state ^ (3U << j);
      if (dist[next] >= 0) continue;
      dist[next] = dist[state] + 1;
      queue.push_back(next);
    }
  }
  if (dist[target] >= 0) {
    result.reachable = true;
    result.shortest = dist[target];
  }
  return result;
}

}  // namespace kcm
