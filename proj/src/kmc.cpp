#include "kcm/kmc.hpp"

#include "kcm/constraint.hpp"
#include "kcm/errors.hpp"
#include "kcm/local_calculus.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

namespace kcm {

std::vector<Transition> outgoing_transitions(const Configuration& cfg, const ModelParams& params) {
  std::vector<Transition> out;
  for (long x = 0; x < cfg.size(); ++x) {
    const int a = cfg(x);
    if (a == cfg(x + 1)) continue;
    const int c = constraint(cfg, x, params.m());
    if (c == 0) continue;
    const double rate = c * (a == 1 ? params.p_plus() : params.p_minus());
    if (rate > 0.0) out.push_back(Transition{x, a == 1 ? 1 : -1, rate});
  }
  return out;
}

KmcEngine::KmcEngine(const ModelParams& params, Configuration initial, RandomStream rng)
    : params_(params),
      m_(params.m()),
      size_(initial.size()),
      cfg_(std::move(initial)),
      rng_(rng),
      rate_scale_{params.time_scale() * params.p_plus(), params.time_scale() * params.p_minus()} {
  if (size_ != params.ring_size()) throw InvalidInput("initial configuration does not match the ring size");
  pad_offset_ = 2 * m_;
  pad_.assign(static_cast<std::size_t>(size_ + 2 * pad_offset_), 0);
  for (long s = -pad_offset_; s < size_ + pad_offset_; ++s) pad_[static_cast<std::size_t>(s + pad_offset_)] = static_cast<std::uint8_t>(cfg_(s));
  if (m_ <= kLookupMaxOrder) {
    // Bit i of the index is the occupation of site bond - m + 1 + i.
    lookup_.assign(std::size_t{1} << (2 * m_), 0);
    for (std::uint32_t bits = 0; bits < lookup_.size(); ++bits) {
      const auto eta = [bits, this](long site) { return static_cast<int>((bits >> (site + m_ - 1)) & 1U); };
      const int a = eta(0);
      if (a == eta(1)) continue;
      const int c = constraint(eta, 0, m_);
      if (c == 0) continue;
      lookup_[bits] = static_cast<std::uint8_t>(((a == 1 ? 1 : 2) << 4) | c);
    }
  }
  state_.assign(static_cast<std::size_t>(size_), BondState{});
  buckets_.assign(static_cast<std::size_t>(2 * (m_ + 1)), {});
  for (long x = 0; x < size_; ++x) {
    const BondState s = classify(x);
    if (s.cls >= 0) insert(x, s);
  }
}

void KmcEngine::write_site(long site, std::uint8_t value) {
  pad_[static_cast<std::size_t>(site + pad_offset_)] = value;
  if (site < pad_offset_) pad_[static_cast<std::size_t>(site + size_ + pad_offset_)] = value;
  if (site >= size_ - pad_offset_) pad_[static_cast<std::size_t>(site - size_ + pad_offset_)] = value;
}

int KmcEngine::compute_constraint(long bond) const {
  return constraint([this](long s) { return occ(s); }, bond, m_);
}

KmcEngine::BondState KmcEngine::classify(long bond) const {
  BondState s;
  if (!lookup_.empty()) {
    const std::uint8_t* base = pad_.data() + (bond - m_ + 1 + pad_offset_);
    std::uint32_t bits = 0;
    for (int i = 0; i < 2 * m_; ++i) bits |= static_cast<std::uint32_t>(base[i]) << i;
    const std::uint8_t packed = lookup_[bits];
    if (packed == 0) return s;
    s.cls = static_cast<std::int8_t>((packed >> 4) - 1);
    s.constraint = static_cast<std::int8_t>(packed & 0x0F);
    return s;
  }
  const int a = occ(bond);
  if (a == occ(bond + 1)) return s;
  const int c = compute_constraint(bond);
  if (c == 0) return s;
  s.cls = static_cast<std::int8_t>(a == 1 ? 0 : 1);
  s.constraint = static_cast<std::int8_t>(c);
  return s;
}

void KmcEngine::insert(long bond, const BondState& state) {
  auto& vec = bucket(state.cls, state.constraint);
  vec.push_back(static_cast<std::uint32_t>(bond));
  BondState& slot = state_[static_cast<std::size_t>(bond)];
  slot = state;
  slot.slot = static_cast<std::uint32_t>(vec.size() - 1);
  weight_[static_cast<std::size_t>(state.cls)] += state.constraint;
}

void KmcEngine::remove(long bond) {
  BondState& s = state_[static_cast<std::size_t>(bond)];
  auto& vec = bucket(s.cls, s.constraint);
  const std::uint32_t moved = vec.back();
  vec[s.slot] = moved;
  state_[moved].slot = s.slot;
  vec.pop_back();
  weight_[static_cast<std::size_t>(s.cls)] -= s.constraint;
  s = BondState{};
}

void KmcEngine::refresh(long bond) {
  if (bond < 0) bond += size_;
  else if (bond >= size_) bond -= size_;
  refresh(bond, classify(bond));
}

void KmcEngine::refresh(long bond, const BondState& next) {
  const BondState& current = state_[static_cast<std::size_t>(bond)];
  if (current.cls == next.cls && current.constraint == next.constraint) return;
  if (current.cls >= 0) remove(bond);
  if (next.cls >= 0) insert(bond, next);
}

double KmcEngine::total_rate() const {
  return rate_scale_[0] * static_cast<double>(weight_[0]) + rate_scale_[1] * static_cast<double>(weight_[1]);
}

StepStatus KmcEngine::step(double t_limit, Event* out) {
  const double right = rate_scale_[0] * static_cast<double>(weight_[0]);
  const double total = right + rate_scale_[1] * static_cast<double>(weight_[1]);
  if (!(total > 0.0)) return StepStatus::blocked;
  const double dt = rng_.exponential() / total;
  if (clock_ + dt > t_limit) {
    clock_ = t_limit;
    return StepStatus::reached_limit;
  }
  clock_ += dt;

  int cls = rng_.uniform() * total < right ? 0 : 1;
  if (weight_[static_cast<std::size_t>(cls)] == 0 || rate_scale_[cls] == 0.0) cls = 1 - cls;
  auto r = static_cast<std::int64_t>(rng_.below(static_cast<std::uint64_t>(weight_[static_cast<std::size_t>(cls)])));
  std::uint32_t bond = 0;
  for (int c = 1; c <= m_; ++c) {
    const auto& vec = bucket(cls, c);
    const auto span = static_cast<std::int64_t>(vec.size()) * c;
    if (r < span) {
      bond = vec[static_cast<std::size_t>(r / c)];
      break;
    }
    r -= span;
  }

  const long x = bond;
  const long y = (x + 1 == size_) ? 0 : x + 1;
  const std::uint8_t moved = static_cast<std::uint8_t>(occ(x));
  cfg_.set_wrapped(x, occ(y));
  cfg_.set_wrapped(y, moved);
  write_site(x, static_cast<std::uint8_t>(occ(y)));
  write_site(y, moved);
  // Only bonds whose constraint window contains x or x+1 can change.
  if (!lookup_.empty()) {
    // One read of sites [x - 2m + 1, x + 2m] serves all 2m + 1 bond windows.
    std::uint32_t word = 0;
    for (int i = 0; i < 4 * m_; ++i) word |= static_cast<std::uint32_t>(occ(x - 2 * m_ + 1 + i)) << i;
    const std::uint32_t mask = (1U << (2 * m_)) - 1U;
    for (int k = 0; k <= 2 * m_; ++k) {
      long z = x - m_ + k;
      if (z < 0) z += size_;
      else if (z >= size_) z -= size_;
      const std::uint8_t packed = lookup_[(word >> k) & mask];
      BondState next;
      if (packed != 0) {
        next.cls = static_cast<std::int8_t>((packed >> 4) - 1);
        next.constraint = static_cast<std::int8_t>(packed & 0x0F);
      }
      refresh(z, next);
    }
  } else {
    for (long z = x - m_; z <= x + m_; ++z) refresh(z);
  }
  ++events_;
  if (out != nullptr) *out = Event{clock_, bond, static_cast<std::int8_t>(cls == 0 ? 1 : -1)};
  return StepStatus::event;
}

bool KmcEngine::check_consistency() const {
  std::array<std::int64_t, 2> weights{0, 0};
  for (long x = 0; x < size_; ++x) {
    const BondState expected = classify(x);
    const BondState& stored = state_[static_cast<std::size_t>(x)];
    if (expected.cls != stored.cls || expected.constraint != stored.constraint) return false;
    if (expected.cls >= 0) weights[static_cast<std::size_t>(expected.cls)] += expected.constraint;
  }
  if (weights != weight_) return false;
  std::size_t listed = 0;
  for (int cls = 0; cls < 2; ++cls) {
    for (int c = 0; c <= m_; ++c) {
      const auto& vec = buckets_[static_cast<std::size_t>(cls * (m_ + 1) + c)];
      for (std::size_t i = 0; i < vec.size(); ++i) {
        const BondState& s = state_[vec[i]];
        if (s.cls != cls || s.constraint != c || s.slot != i) return false;
      }
      listed += vec.size();
    }
  }
  std::size_t active = 0;
  for (const auto& s : state_) active += s.cls >= 0 ? 1 : 0;
  return listed == active;
}

RunOutcome drive(KmcEngine& engine, std::span<const double> checkpoints, TrajectoryObserver& observer) {
  RunOutcome outcome;
  observer.on_start(engine.configuration());
  Event event;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    const double t = checkpoints[i];
    if (i > 0 && t < checkpoints[i - 1]) throw InvalidInput("checkpoints must be nondecreasing");
    while (!outcome.truncated) {
      const StepStatus status = engine.step(t, &event);
      if (status == StepStatus::event) {
        observer.on_event(event, engine.configuration());
        continue;
      }
      if (status == StepStatus::blocked) {
        outcome.truncated = true;
        outcome.blocking_time = engine.clock();
      }
      break;
    }
    observer.on_checkpoint(i, t, engine.configuration());
  }
  outcome.events = engine.event_count();
  return outcome;
}

namespace {

std::vector<double> sampling_grid(double t_max, double sampling_dt) {
  if (!(t_max >= 0.0)) throw InvalidInput("t_max must be nonnegative");
  if (sampling_dt < 0.0) throw InvalidInput("sampling_dt must be nonnegative");
  std::vector<double> grid{0.0};
  if (t_max == 0.0) return grid;
  if (sampling_dt > 0.0) {
    for (long k = 1;; ++k) {
      const double t = static_cast<double>(k) * sampling_dt;
      if (t >= t_max * (1.0 - 1e-12)) break;
      grid.push_back(t);
    }
  }
  grid.push_back(t_max);
  return grid;
}

class RecordingObserver final : public TrajectoryObserver {
 public:
  explicit RecordingObserver(std::vector<Event>& events) : events_(events) {}
  void on_event(const Event& event, const Configuration&) override { events_.push_back(event); }

 private:
  std::vector<Event>& events_;
};

}  // namespace

Trajectory run_from(const ModelParams& params, const Configuration& initial, double t_max, double sampling_dt,
                    RandomStream rng) {
  Trajectory traj;
  traj.initial = initial;
  traj.t_max = t_max;
  traj.sampling_times = sampling_grid(t_max, sampling_dt);
  KmcEngine engine(params, initial, rng);
  RecordingObserver recorder(traj.events);
  const RunOutcome outcome = drive(engine, traj.sampling_times, recorder);
  traj.truncated = outcome.truncated;
  traj.blocking_time = outcome.blocking_time;
  return traj;
}

Trajectory run(const ModelParams& params, double t_max, double sampling_dt, std::uint64_t seed,
               std::uint64_t stream_id) {
  RandomStream rng(seed, stream_id);
  const Configuration initial = sample_bernoulli(params.ring_size(), params.rho_value(), rng);
  return run_from(params, initial, t_max, sampling_dt, rng);
}

Configuration Trajectory::configuration_at(double t) const {
  Configuration cfg = initial;
  for (const Event& e : events) {
    if (e.time > t) break;
    cfg.swap_sites(e.bond, static_cast<long>(e.bond) + 1);
  }
  return cfg;
}

Configuration Trajectory::final_configuration() const { return configuration_at(t_max); }

std::vector<Configuration> Trajectory::snapshots() const {
  std::vector<Configuration> out;
  out.reserve(sampling_times.size());
  Configuration cfg = initial;
  std::size_t next = 0;
  for (double t : sampling_times) {
    while (next < events.size() && events[next].time <= t) {
      cfg.swap_sites(events[next].bond, static_cast<long>(events[next].bond) + 1);
      ++next;
    }
    out.push_back(cfg);
  }
  return out;
}

void replay(Configuration& cfg, std::span<const Event> events, int m) {
  for (const Event& e : events) {
    const long x = e.bond;
    const int a = cfg(x);
    const int b = cfg(x + 1);
    if (a == b) throw InvalidInput("replayed event exchanges equal occupations");
    if ((e.direction == 1) != (a == 1)) throw InvalidInput("replayed event direction does not match the occupations");
    if (constraint(cfg, x, m) == 0) throw InvalidInput("replayed event has zero constraint");
    cfg.swap_sites(x, x + 1);
  }
}

void write_event_log(std::ostream& out, std::span<const Event> events) {
  for (const Event& e : events) {
    unsigned char record[13];
    std::uint64_t time_bits = 0;
    std::memcpy(&time_bits, &e.time, sizeof(time_bits));
    for (int i = 0; i < 8; ++i) record[i] = static_cast<unsigned char>(time_bits >> (8 * i));
    for (int i = 0; i < 4; ++i) record[8 + i] = static_cast<unsigned char>(e.bond >> (8 * i));
    record[12] = static_cast<unsigned char>(e.direction);
    out.write(reinterpret_cast<const char*>(record), sizeof(record));
  }
}

std::vector<Event> read_event_log(std::istream& in) {
  std::vector<Event> events;
  unsigned char record[13];
  while (true) {
    in.read(reinterpret_cast<char*>(record), sizeof(record));
    const auto got = in.gcount();
    if (got == 0) break;
    if (got != static_cast<std::streamsize>(sizeof(record))) throw InvalidInput("truncated event log record");
    std::uint64_t time_bits = 0;
    for (int i = 0; i < 8; ++i) time_bits |= static_cast<std::uint64_t>(record[i]) << (8 * i);
    Event e;
    std::memcpy(&e.time, &time_bits, sizeof(time_bits));
    for (int i = 0; i < 4; ++i) e.bond |= static_cast<std::uint32_t>(record[8 + i]) << (8 * i);
    e.direction = static_cast<std::int8_t>(record[12]);
    events.push_back(e);
  }
  return events;
}

void write_snapshot_csv(std::ostream& out, const Trajectory& trajectory) {
  out << "time,configuration\n";
  const auto snaps = trajectory.snapshots();
  char buffer[32];
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    std::snprintf(buffer, sizeof(buffer), "%.17g", trajectory.sampling_times[i]);
    out << buffer << ',' << snaps[i].to_string() << '\n';
  }
}

std::vector<SmokeObservable> stationarity_smoke_test(const ModelParams& params, double t_max, int n_traj,
                                                     std::uint64_t seed) {
  if (n_traj < 2) throw InvalidInput("the smoke test needs at least two trajectories");
  const int m = params.m();
  const long size = params.ring_size();
  const LocalFunction h = h_function(m);
  std::vector<std::vector<double>> samples(4, std::vector<double>(static_cast<std::size_t>(n_traj)));
  for (int i = 0; i < n_traj; ++i) {
    RandomStream rng(seed, static_cast<std::uint64_t>(i));
    const Configuration initial = sample_bernoulli(size, params.rho_value(), rng);
    KmcEngine engine(params, initial, rng);
    while (engine.step(t_max) == StepStatus::event) {
    }
    const Configuration& cfg = engine.configuration();
    double occupied = 0.0;
    double pairs = 0.0;
    double constraints = 0.0;
    double h_total = 0.0;
    for (long x = 0; x < size; ++x) {
      occupied += cfg(x);
      pairs += cfg(x) * cfg(x + 1);
      constraints += constraint(cfg, x, m);
      std::uint32_t bits = 0;
      for (int j = 0; j < h.width(); ++j) bits |= static_cast<std::uint32_t>(cfg(x + h.first() + j)) << j;
      h_total += to_double(h[bits]);
    }
    const auto idx = static_cast<std::size_t>(i);
    samples[0][idx] = occupied / static_cast<double>(size);
    samples[1][idx] = pairs / static_cast<double>(size);
    samples[2][idx] = constraints / static_cast<double>(size);
    samples[3][idx] = h_total / static_cast<double>(size);
  }
  const Rational& rho = params.rho();
  const double exact[4] = {to_double(rho), to_double(rho * rho), to_double(expectation(constraint_function(m), rho)),
                           to_double(expectation(h, rho))};
  const char* names[4] = {"eta(0)", "eta(0)eta(1)", "c_{0,1}", "h"};
  std::vector<SmokeObservable> out;
  for (int k = 0; k < 4; ++k) {
    SmokeObservable obs;
    obs.name = names[k];
    obs.exact_mean = exact[k];
    obs.report = summarize(samples[static_cast<std::size_t>(k)]);
    obs.report.parameters = {{"n", params.n()}, {"m", m}, {"rho", params.rho_value()}, {"t", t_max}};
    obs.z_score = obs.report.z_score(exact[k]);
    out.push_back(std::move(obs));
  }
  return out;
}

}  // namespace kcm
