#pragma once

#include "kcm/configuration.hpp"
#include "kcm/model.hpp"

#include <optional>
#include <vector>

namespace kcm {

/// A sequence of nearest-neighbour exchanges. Move i exchanges ring sites
/// moves[i] and moves[i] + 1.
struct ExchangePath {
  std::vector<long> moves;
  long source = 0;
  long target = 0;
  /// Sites window_first .. window_first + window_length - 1 (mod L) contain
  /// every exchanged site.
  long window_first = 0;
  long window_length = 0;
  /// The builder guarantees moves.size() <= length_bound = C * window_length.
  long length_bound = 0;
};

/// Constant C of the length guarantee |path| <= C * (window length).
inline constexpr long path_length_constant(int m) { return 3L * (m + 1); }

/// First site of the box (scanning from box.first()) that starts a mobile
/// cluster: an occupied site followed by m-1 occupied sites, or an occupied
/// site whose (m+1)-window holds m particles, with the cluster inside the box.
/// For m = 2 this is min{x' : eta(x')eta(x'+1) + eta(x')eta(x'+2) >= 1}.
std::optional<long> find_first_mobile_cluster(const Configuration& cfg, const BoxSpec& box, int m);

/// Legal path turning cfg into eta^{y,z}: carry the mobile cluster of the box
/// next to the farther of y, z, ferry that site's value next to the nearer
/// one, swap, and retrace. When the box lies to the left of y and z the same
/// construction runs in the reflected frame.
///
/// Throws NoCluster if the box holds no mobile cluster and InvalidInput if y or
/// z lies in the box or y == z. Equal occupations give an empty path.
ExchangePath build_exchange_path(const Configuration& cfg, long y, long z, const BoxSpec& cluster_box, int m);

struct PathReport {
  bool legal = true;
  /// Index of the first move with zero constraint or equal occupations.
  long first_illegal = -1;
  /// Final configuration equals eta^{source,target}.
  bool exact = false;
  /// All sites other than source and target end with their initial value.
  bool restored = false;
  int max_bond_usage = 0;
  long length = 0;
};

/// Replays the path move by move and checks every ExchangePath invariant.
PathReport validate_exchange_path(const Configuration& cfg, const ExchangePath& path, int m);

struct ReachabilityResult {
  bool reachable = false;
  /// Minimal number of legal exchanges; -1 when unreachable.
  long shortest = -1;
  long states_visited = 0;
};

inline constexpr long kMaxOracleWindow = 20;

/// Breadth-first search over the configurations that differ from cfg only in
/// sites window_first .. window_first + window_length - 1, with edges the legal
/// exchanges of bonds inside the window (sites outside stay fixed and still
/// enter the constraints). Reports whether eta^{y,z} is reachable.
/// Throws SizeLimit for windows above kMaxOracleWindow sites and InvalidInput
/// when y or z lies outside the window.
ReachabilityResult bfs_reachability_oracle(const Configuration& cfg, long y, long z, long window_first,
                                           long window_length, int m);

}  // namespace kcm
