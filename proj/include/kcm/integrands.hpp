#pragma once

#include "kcm/configuration.hpp"
#include "kcm/kmc.hpp"
#include "kcm/local_function.hpp"
#include "kcm/model.hpp"
#include "kcm/observables.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace kcm {

/// sum_x V(x) psi_x(eta) maintained along a trajectory. Updates after one
/// exchange touch only the sites whose psi_x can change.
class Integrand {
 public:
  virtual ~Integrand() = default;
  /// Rebuilds every cached quantity from the configuration.
  virtual void reset(const Configuration& cfg) = 0;
  /// The configuration after exchanging bond {bond, bond+1}.
  virtual void update(const Configuration& after, long bond) = 0;
  /// Value computed from scratch without touching the cache.
  virtual double recompute(const Configuration& cfg) const = 0;
  double value() const { return value_; }

 protected:
  double value_ = 0.0;
};

/// psi_x = f(tau_x eta) for a local function f given as a double table.
class LocalIntegrand final : public Integrand {
 public:
  LocalIntegrand(const LocalFunction& f, std::vector<double> weights);

  void reset(const Configuration& cfg) override;
  void update(const Configuration& after, long bond) override;
  double recompute(const Configuration& cfg) const override;

 private:
  double psi(const Configuration& cfg, long x) const;

  int first_;
  int width_;
  std::vector<double> table_;
  std::vector<double> weights_;
  std::vector<double> cache_;
};

/// psi_x = a eta-bar(x) eta-bar(x+1) + c (right block average of length ell at x)^2 + d.
/// Block sums are kept as integer counts, so an exchange changes two of them.
class BlockIntegrand final : public Integrand {
 public:
  BlockIntegrand(long ell, double rho, double pair_coeff, double square_coeff, double constant,
                 std::vector<double> weights);

  void reset(const Configuration& cfg) override;
  void update(const Configuration& after, long bond) override;
  double recompute(const Configuration& cfg) const override;

 private:
  double psi(const Configuration& cfg, long x, long count) const;

  long ell_;
  double rho_;
  double pair_;
  double square_;
  double constant_;
  std::vector<double> weights_;
  std::vector<long> counts_;
  std::vector<double> cache_;
};

enum class TermKind { h_term, deg1, deg2, deg3, bgp2_inner, pair, triple, energy_b, rest, current, constant };

/// A time-integral functional int_0^t sum_x V(x) psi_x(eta_{s n^2}) ds.
///   h_term      psi = tau_x h^m                       V = Delta_n H / (2 sqrt n)
///   deg1        psi = tau_x P_1 (degree-one part)     V = n^{1-gamma}/sqrt(n) grad_n H
///   deg2(y,z)   psi = eta-bar(x+y) eta-bar(x+z)       V = n^{1-gamma}/sqrt(n) grad_n H
///   deg3(y,z)   psi = eta-bar(x) eta-bar(x+y) eta-bar(x+z), same V
///   bgp2_inner  psi = eta-bar(x)eta-bar(x+1) - (block_l(x))^2 + chi/l   V = grad_n H
///   pair(y)  psi = eta-bar(x) eta-bar(x+y)         V = grad_n H / sqrt(n)
///   triple(y,z) psi = eta-bar(x) eta-bar(x+y) eta-bar(x+z)  V = grad_n H
///   energy_b    psi = (block_l(x))^2                  V = grad_n H
///   rest        psi = (block_l(x))^2 - chi/l          V = b n^{1-gamma}/sqrt(n) grad_n H
///   current     psi = j_{x,x+1}                       V = sqrt(n) grad_n H
///   constant    psi = 1                               V = 1/L
/// Block terms use l = ell when ell > 0 and l = floor(eps n) otherwise.
struct TermSpec {
  TermKind kind = TermKind::bgp2_inner;
  int y = 1;
  int z = 2;
  double eps = 0.0;
  long ell = 0;

  long block_length(int n) const;
  std::string label() const;
};

std::string to_string(TermKind kind);
/// Parses the names used by to_string. Throws InvalidInput otherwise.
TermKind parse_term_kind(const std::string& name);

/// The prefactor-weighted V of the table above.
std::vector<double> default_term_weights(const TermSpec& term, const ModelParams& params, const TestFunction& h);

/// Integrand for a term with explicit weights.
std::unique_ptr<Integrand> make_integrand(const TermSpec& term, const ModelParams& params,
                                          std::vector<double> weights);

/// Integrates several integrands exactly along the event stream (value times
/// holding time between events) and records the integral at each checkpoint.
class IntegralRecorder final : public TrajectoryObserver {
 public:
  explicit IntegralRecorder(std::vector<std::unique_ptr<Integrand>> integrands, std::size_t checkpoints,
                            std::uint64_t resync_interval = 1U << 20);

  void on_start(const Configuration& cfg) override;
  void on_event(const Event& event, const Configuration& after) override;
  void on_checkpoint(std::size_t index, double t, const Configuration& cfg) override;

  /// integral(term, checkpoint).
  double integral(std::size_t term, std::size_t checkpoint) const { return integrals_[term][checkpoint]; }
  std::size_t term_count() const { return integrands_.size(); }

 private:
  void advance(double t);

  std::vector<std::unique_ptr<Integrand>> integrands_;
  std::vector<std::vector<double>> integrals_;
  std::vector<double> running_;
  double last_time_ = 0.0;
  std::uint64_t events_ = 0;
  std::uint64_t resync_interval_;
};

/// Records Y_t^n(H) (moving frame) for each test function at each checkpoint.
class FieldRecorder final : public TrajectoryObserver {
 public:
  FieldRecorder(const ModelParams& params, std::vector<TestFunction> functions, std::size_t checkpoints);
  void on_checkpoint(std::size_t index, double t, const Configuration& cfg) override;
  double field(std::size_t function, std::size_t checkpoint) const { return values_[function][checkpoint]; }

 private:
  ModelParams params_;
  std::vector<TestFunction> functions_;
  std::vector<std::vector<double>> values_;
};

/// M_t = Y_t(H) - Y_0(H) - int_0^t sqrt(n) sum_x grad_n H(x/n) j_{x,x+1} ds,
/// in the lab frame (H is not transported), at each checkpoint.
class MartingaleRecorder final : public TrajectoryObserver {
 public:
  MartingaleRecorder(const ModelParams& params, const TestFunction& h, std::size_t checkpoints);
  void on_start(const Configuration& cfg) override;
  void on_event(const Event& event, const Configuration& after) override;
  void on_checkpoint(std::size_t index, double t, const Configuration& cfg) override;
  double martingale(std::size_t checkpoint) const { return values_[checkpoint]; }
  double field(std::size_t checkpoint) const { return fields_[checkpoint]; }

 private:
  ModelParams params_;
  std::vector<double> weights_;
  IntegralRecorder integral_;
  double initial_field_ = 0.0;
  std::vector<double> values_;
  std::vector<double> fields_;
};

/// Forwards every callback to several observers in order.
class ObserverList final : public TrajectoryObserver {
 public:
  explicit ObserverList(std::vector<TrajectoryObserver*> observers) : observers_(std::move(observers)) {}
  void on_start(const Configuration& cfg) override {
    for (auto* o : observers_) o->on_start(cfg);
  }
  void on_event(const Event& event, const Configuration& after) override {
    for (auto* o : observers_) o->on_event(event, after);
  }
  void on_checkpoint(std::size_t index, double t, const Configuration& cfg) override {
    for (auto* o : observers_) o->on_checkpoint(index, t, cfg);
  }

 private:
  std::vector<TrajectoryObserver*> observers_;
};

/// Replays a stored trajectory through an observer, with the trajectory's
/// sampling times as checkpoints.
void replay_trajectory(const Trajectory& trajectory, TrajectoryObserver& observer);

/// int_0^t sum_x V(x) psi_x ds for a stored trajectory, at time t.
double time_integral_term(const Trajectory& trajectory, const TermSpec& term, const ModelParams& params,
                          std::vector<double> weights, double t);

/// M_t at every sampling time of a stored trajectory.
std::vector<double> dynkin_martingale(const Trajectory& trajectory, const TestFunction& h, const ModelParams& params);

}  // namespace kcm
