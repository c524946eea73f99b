#pragma once

#include "kcm/configuration.hpp"
#include "kcm/estimator.hpp"
#include "kcm/model.hpp"
#include "kcm/random.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace kcm {

/// One exchange across bond {bond, bond+1}. direction +1: the particle moved
/// from `bond` to `bond+1`; -1: from `bond+1` to `bond`.
struct Event {
  double time = 0.0;
  std::uint32_t bond = 0;
  std::int8_t direction = 0;

  bool operator==(const Event&) const = default;
};

enum class StepStatus { event, reached_limit, blocked };

/// A possible jump out of a configuration with its rate (without the n^2 factor).
struct Transition {
  long bond;
  int direction;
  double rate;
};

/// All jumps with positive rate out of `cfg` under the generator of `params`.
std::vector<Transition> outgoing_transitions(const Configuration& cfg, const ModelParams& params);

/// Event-driven simulation of the accelerated process (generator n^2 L) on
/// the ring. Active bonds are kept in buckets indexed by jump direction and
/// constraint value, so total rates are integer weights times p(+-1) n^2 and
/// selection and updates are O(1).
class KmcEngine {
 public:
  KmcEngine(const ModelParams& params, Configuration initial, RandomStream rng);

  /// Advances to the next event if it happens at or before t_limit. Otherwise
  /// sets the clock to t_limit (the exponential clock is memoryless) and
  /// reports reached_limit. A configuration with zero total rate reports
  /// blocked and leaves the clock unchanged.
  StepStatus step(double t_limit, Event* out = nullptr);

  const Configuration& configuration() const { return cfg_; }
  const ModelParams& params() const { return params_; }
  double clock() const { return clock_; }
  std::uint64_t event_count() const { return events_; }

  /// Integer weights: sum of constraint values over bonds where a right
  /// (resp. left) jump is possible.
  std::int64_t right_weight() const { return weight_[0]; }
  std::int64_t left_weight() const { return weight_[1]; }
  double total_rate() const;

  /// Whether the bond currently has positive rate.
  bool is_active(long bond) const { return state_[static_cast<std::size_t>(bond)].constraint > 0; }

  /// Rebuilds every bucket from scratch and compares with the maintained
  /// state. Returns true when they agree exactly.
  bool check_consistency() const;

  /// Direct access used by tests: the constraint value the engine stores for a bond.
  int stored_constraint(long bond) const { return state_[static_cast<std::size_t>(bond)].constraint; }

 private:
  static constexpr int kLookupMaxOrder = 6;

  struct BondState {
    std::int8_t cls = -1;  // 0: right jump possible, 1: left jump possible, -1: none
    std::int8_t constraint = 0;
    std::uint32_t slot = 0;
  };

  int occ(long site) const { return pad_[static_cast<std::size_t>(site + pad_offset_)]; }
  void write_site(long site, std::uint8_t value);
  int compute_constraint(long bond) const;
  BondState classify(long bond) const;
  void insert(long bond, const BondState& state);
  void remove(long bond);
  void refresh(long bond);
  void refresh(long bond, const BondState& next);
  std::vector<std::uint32_t>& bucket(int cls, int c) {
    return buckets_[static_cast<std::size_t>(cls * (m_ + 1) + c)];
  }

  ModelParams params_;
  int m_;
  long size_;
  Configuration cfg_;
  RandomStream rng_;
  double clock_ = 0.0;
  std::uint64_t events_ = 0;
  double rate_scale_[2];
  long pad_offset_;
  // Occupations of sites [-pad_offset_, size_ + pad_offset_), ghost cells mirroring the ring.
  std::vector<std::uint8_t> pad_;
  // Bond state indexed by the 2m occupations around the bond (empty for large m).
  std::vector<std::uint8_t> lookup_;
  std::vector<BondState> state_;
  std::vector<std::vector<std::uint32_t>> buckets_;
  std::array<std::int64_t, 2> weight_{0, 0};
};

/// Receives the event stream of a run.
class TrajectoryObserver {
 public:
  virtual ~TrajectoryObserver() = default;
  virtual void on_start(const Configuration& /*cfg*/) {}
  virtual void on_event(const Event& /*event*/, const Configuration& /*after*/) {}
  /// Called when the clock reaches checkpoint `index` (in increasing order).
  virtual void on_checkpoint(std::size_t /*index*/, double /*t*/, const Configuration& /*cfg*/) {}
};

struct RunOutcome {
  bool truncated = false;
  /// Time at which the ring became blocked (only meaningful when truncated).
  double blocking_time = 0.0;
  std::uint64_t events = 0;
};

/// Runs the engine through increasing checkpoint times, streaming every event
/// to the observer. A blocked configuration stays frozen, so checkpoints after
/// the blocking time are still delivered (with the frozen configuration) and
/// the outcome is marked truncated.
RunOutcome drive(KmcEngine& engine, std::span<const double> checkpoints, TrajectoryObserver& observer);

/// Initial configuration, event list and observation grid of one run.
struct Trajectory {
  Configuration initial;
  std::vector<Event> events;
  std::vector<double> sampling_times;
  double t_max = 0.0;
  bool truncated = false;
  double blocking_time = 0.0;

  /// Configuration after replaying every event with time <= t.
  Configuration configuration_at(double t) const;
  Configuration final_configuration() const;
  /// Configurations at every sampling time, by one replay pass.
  std::vector<Configuration> snapshots() const;
};

/// Equilibrium start from stream (seed, stream_id), simulated to t_max with
/// an observation grid of spacing sampling_dt (0 means only t_max). Dynamics
/// use stream (seed, stream_id) after the initial draw, so the whole run is a
/// function of (params, t_max, seed, stream_id).
Trajectory run(const ModelParams& params, double t_max, double sampling_dt, std::uint64_t seed,
               std::uint64_t stream_id = 0);
/// Same from a given initial configuration.
Trajectory run_from(const ModelParams& params, const Configuration& initial, double t_max, double sampling_dt,
                    RandomStream rng);

/// Replays events onto a configuration, checking that every move is legal
/// (positive constraint and a particle moving into a hole). Throws
/// InvalidInput on an illegal move.
void replay(Configuration& cfg, std::span<const Event> events, int m);

/// Binary event log: per event a 64-bit little-endian IEEE double time, a
/// 32-bit little-endian bond index and an 8-bit signed direction (13 bytes).
void write_event_log(std::ostream& out, std::span<const Event> events);
std::vector<Event> read_event_log(std::istream& in);

/// CSV with header "time,configuration": one row per sampling time.
void write_snapshot_csv(std::ostream& out, const Trajectory& trajectory);

struct SmokeObservable {
  std::string name;
  double exact_mean = 0.0;
  EstimatorReport report;
  double z_score = 0.0;
};

/// Starts n_traj runs from nu_rho, and compares the ring-averaged values of
/// eta(0), eta(0)eta(1), c_{0,1} and h at time t_max with their exact means.
std::vector<SmokeObservable> stationarity_smoke_test(const ModelParams& params, double t_max, int n_traj,
                                                     std::uint64_t seed);

}  // namespace kcm
