#include "kcm/integrands.hpp"

#include "kcm/errors.hpp"
#include "kcm/local_calculus.hpp"
#include "kcm/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace kcm {

LocalIntegrand::LocalIntegrand(const LocalFunction& f, std::vector<double> weights)
    : first_(f.first()), width_(f.width()), weights_(std::move(weights)) {
  table_.resize(f.size());
  for (std::uint32_t p = 0; p < f.size(); ++p) table_[p] = to_double(f[p]);
  cache_.assign(weights_.size(), 0.0);
}

double LocalIntegrand::psi(const Configuration& cfg, long x) const {
  std::uint32_t bits = 0;
  for (int i = 0; i < width_; ++i) bits |= static_cast<std::uint32_t>(cfg(x + first_ + i)) << i;
  return table_[bits];
}

void LocalIntegrand::reset(const Configuration& cfg) {
  if (static_cast<long>(weights_.size()) != cfg.size()) throw InvalidInput("weights do not match the ring size");
  value_ = 0.0;
  for (long x = 0; x < cfg.size(); ++x) {
    const auto i = static_cast<std::size_t>(x);
    cache_[i] = psi(cfg, x);
    value_ += weights_[i] * cache_[i];
  }
}

void LocalIntegrand::update(const Configuration& after, long bond) {
  // Windows [x + first, x + first + width - 1] that meet {bond, bond + 1}.
  const long lo = bond - (first_ + width_ - 1);
  const long hi = bond + 1 - first_;
  for (long x = lo; x <= hi; ++x) {
    const auto i = static_cast<std::size_t>(after.wrap(x));
    if (weights_[i] == 0.0) continue;
    const double next = psi(after, x);
    value_ += weights_[i] * (next - cache_[i]);
    cache_[i] = next;
  }
}

double LocalIntegrand::recompute(const Configuration& cfg) const {
  double total = 0.0;
  for (long x = 0; x < cfg.size(); ++x) total += weights_[static_cast<std::size_t>(x)] * psi(cfg, x);
  return total;
}

BlockIntegrand::BlockIntegrand(long ell, double rho, double pair_coeff, double square_coeff, double constant,
                               std::vector<double> weights)
    : ell_(ell),
      rho_(rho),
      pair_(pair_coeff),
      square_(square_coeff),
      constant_(constant),
      weights_(std::move(weights)) {
  if (ell < 1 || ell >= static_cast<long>(weights_.size())) throw InvalidInput("block length must lie in [1, L - 1]");
  counts_.assign(weights_.size(), 0);
  cache_.assign(weights_.size(), 0.0);
}

double BlockIntegrand::psi(const Configuration& cfg, long x, long count) const {
  const double avg = (static_cast<double>(count) - static_cast<double>(ell_) * rho_) / static_cast<double>(ell_);
  double out = square_ * avg * avg + constant_;
  if (pair_ != 0.0) out += pair_ * (cfg(x) - rho_) * (cfg(x + 1) - rho_);
  return out;
}

void BlockIntegrand::reset(const Configuration& cfg) {
  const long size = cfg.size();
  if (static_cast<long>(weights_.size()) != size) throw InvalidInput("weights do not match the ring size");
  long count = 0;
  for (long y = 1; y <= ell_; ++y) count += cfg(y);
  value_ = 0.0;
  for (long x = 0; x < size; ++x) {
    const auto i = static_cast<std::size_t>(x);
    counts_[i] = count;
    cache_[i] = psi(cfg, x, count);
    value_ += weights_[i] * cache_[i];
    count += cfg(x + ell_ + 1) - cfg(x + 1);
  }
}

void BlockIntegrand::update(const Configuration& after, long bond) {
  const long b = after.wrap(bond);
  const long x_right = b;              // box {b+1, ..., b+ell} gained/lost site b+1
  const long x_left = after.wrap(b - ell_);  // box {b-ell+1, ..., b} gained/lost site b
  const int delta = after(b + 1) - after(b);
  counts_[static_cast<std::size_t>(x_right)] += delta;
  counts_[static_cast<std::size_t>(x_left)] -= delta;

  long touched[5];
  int count = 0;
  const auto touch = [&](long x) {
    x = after.wrap(x);
    for (int k = 0; k < count; ++k) {
      if (touched[k] == x) return;
    }
    touched[count++] = x;
  };
  touch(x_right);
  touch(x_left);
  if (pair_ != 0.0) {
    touch(b - 1);
    touch(b);
    touch(b + 1);
  }
  for (int k = 0; k < count; ++k) {
    const auto i = static_cast<std::size_t>(touched[k]);
    if (weights_[i] == 0.0) continue;
    const double next = psi(after, touched[k], counts_[i]);
    value_ += weights_[i] * (next - cache_[i]);
    cache_[i] = next;
  }
}

double BlockIntegrand::recompute(const Configuration& cfg) const {
  double total = 0.0;
  for (long x = 0; x < cfg.size(); ++x) {
    long count = 0;
    for (long y = x + 1; y <= x + ell_; ++y) count += cfg(y);
    total += weights_[static_cast<std::size_t>(x)] * psi(cfg, x, count);
  }
  return total;
}

long TermSpec::block_length(int n) const {
  const long l = ell > 0 ? ell : static_cast<long>(std::floor(eps * n));
  if (l < 1) throw InvalidInput("block length floor(eps n) must be at least 1");
  return l;
}

std::string to_string(TermKind kind) {
  switch (kind) {
    case TermKind::h_term: return "h-term";
    case TermKind::deg1: return "deg1";
    case TermKind::deg2: return "deg2";
    case TermKind::deg3: return "deg3";
    case TermKind::bgp2_inner: return "bgp2-inner";
    case TermKind::pair: return "pair";
    case TermKind::triple: return "triple";
    case TermKind::energy_b: return "energy-B";
    case TermKind::rest: return "rest";
    case TermKind::current: return "current";
    case TermKind::constant: return "constant";
  }
  return "unknown";
}

TermKind parse_term_kind(const std::string& name) {
  for (TermKind k : {TermKind::h_term, TermKind::deg1, TermKind::deg2, TermKind::deg3, TermKind::bgp2_inner,
                     TermKind::pair, TermKind::triple, TermKind::energy_b, TermKind::rest, TermKind::current,
                     TermKind::constant}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidInput("unknown term id: " + name);
}

std::string TermSpec::label() const {
  std::string out = to_string(kind);
  switch (kind) {
    case TermKind::deg2:
    case TermKind::deg3:
    case TermKind::triple:
      out += "(" + std::to_string(y) + "," + std::to_string(z) + ")";
      break;
    case TermKind::pair:
      out += "(" + std::to_string(y) + ")";
      break;
    case TermKind::bgp2_inner:
    case TermKind::energy_b:
    case TermKind::rest:
      if (ell > 0) {
        out += "(ell=" + std::to_string(ell) + ")";
      } else {
        char buffer[48];
        std::snprintf(buffer, sizeof(buffer), "(eps=%g)", eps);
        out += buffer;
      }
      break;
    default:
      break;
  }
  return out;
}

std::vector<double> default_term_weights(const TermSpec& term, const ModelParams& params, const TestFunction& h) {
  const int n = params.n();
  const long size = params.ring_size();
  const double root_n = std::sqrt(static_cast<double>(n));
  const double asym = std::pow(static_cast<double>(n), 0.5 - params.gamma());
  std::vector<double> w;
  double factor = 1.0;
  switch (term.kind) {
    case TermKind::h_term:
      w = laplacian_weights(h, n, size);
      factor = 0.5 / root_n;
      break;
    case TermKind::constant:
      return std::vector<double>(static_cast<std::size_t>(size), 1.0 / static_cast<double>(size));
    default:
      w = gradient_weights(h, n, size);
      break;
  }
  switch (term.kind) {
    case TermKind::deg1:
    case TermKind::deg2:
    case TermKind::deg3:
      factor = asym;
      break;
    case TermKind::pair:
      factor = 1.0 / root_n;
      break;
    case TermKind::rest:
      factor = params.b() * asym;
      break;
    case TermKind::current:
      factor = root_n;
      break;
    default:
      break;
  }
  for (double& v : w) v *= factor;
  return w;
}

namespace {

LocalFunction centered_product(std::vector<int> sites, const Rational& rho) {
  std::sort(sites.begin(), sites.end());
  if (std::adjacent_find(sites.begin(), sites.end()) != sites.end()) throw InvalidInput("product sites must differ");
  MultilinearPolynomial p;
  p.add_term(sites, Rational(1));
  return p.to_local_function_centered(rho);
}

}  // namespace

std::unique_ptr<Integrand> make_integrand(const TermSpec& term, const ModelParams& params,
                                          std::vector<double> weights) {
  const Rational& rho = params.rho();
  const double rho_d = params.rho_value();
  const double chi = rho_d * (1.0 - rho_d);
  switch (term.kind) {
    case TermKind::h_term:
      return std::make_unique<LocalIntegrand>(h_function(params.m()), std::move(weights));
    case TermKind::deg1: {
      const auto parts = asym_polynomials(params.m(), rho, rational_from_double(params.b()));
      return std::make_unique<LocalIntegrand>(parts.degree(1).to_local_function_centered(rho), std::move(weights));
    }
    case TermKind::deg2:
      return std::make_unique<LocalIntegrand>(centered_product({term.y, term.z}, rho), std::move(weights));
    case TermKind::deg3:
    case TermKind::triple:
      return std::make_unique<LocalIntegrand>(centered_product({0, term.y, term.z}, rho), std::move(weights));
    case TermKind::pair:
      return std::make_unique<LocalIntegrand>(centered_product({0, term.y}, rho), std::move(weights));
    case TermKind::bgp2_inner: {
      const long l = term.block_length(params.n());
      return std::make_unique<BlockIntegrand>(l, rho_d, 1.0, -1.0, chi / static_cast<double>(l), std::move(weights));
    }
    case TermKind::energy_b:
      return std::make_unique<BlockIntegrand>(term.block_length(params.n()), rho_d, 0.0, 1.0, 0.0, std::move(weights));
    case TermKind::rest: {
      const long l = term.block_length(params.n());
      return std::make_unique<BlockIntegrand>(l, rho_d, 0.0, 1.0, -chi / static_cast<double>(l), std::move(weights));
    }
    case TermKind::current:
      return std::make_unique<LocalIntegrand>(current_function(RateSpec::from(params), GeneratorPart::full),
                                              std::move(weights));
    case TermKind::constant:
      return std::make_unique<LocalIntegrand>(LocalFunction::constant(Rational(1)), std::move(weights));
  }
  throw InvalidInput("unknown term id");
}

IntegralRecorder::IntegralRecorder(std::vector<std::unique_ptr<Integrand>> integrands, std::size_t checkpoints,
                                   std::uint64_t resync_interval)
    : integrands_(std::move(integrands)),
      integrals_(integrands_.size(), std::vector<double>(checkpoints, 0.0)),
      running_(integrands_.size(), 0.0),
      resync_interval_(resync_interval) {}

void IntegralRecorder::on_start(const Configuration& cfg) {
  for (auto& f : integrands_) f->reset(cfg);
  std::fill(running_.begin(), running_.end(), 0.0);
  last_time_ = 0.0;
  events_ = 0;
}

void IntegralRecorder::advance(double t) {
  const double dt = t - last_time_;
  for (std::size_t i = 0; i < integrands_.size(); ++i) running_[i] += integrands_[i]->value() * dt;
  last_time_ = t;
}

void IntegralRecorder::on_event(const Event& event, const Configuration& after) {
  advance(event.time);
  ++events_;
  if (resync_interval_ > 0 && events_ % resync_interval_ == 0) {
    for (auto& f : integrands_) f->reset(after);
    return;
  }
  for (auto& f : integrands_) f->update(after, event.bond);
}

void IntegralRecorder::on_checkpoint(std::size_t index, double t, const Configuration&) {
  advance(t);
  for (std::size_t i = 0; i < integrands_.size(); ++i) integrals_[i][index] = running_[i];
}

FieldRecorder::FieldRecorder(const ModelParams& params, std::vector<TestFunction> functions, std::size_t checkpoints)
    : params_(params),
      functions_(std::move(functions)),
      values_(functions_.size(), std::vector<double>(checkpoints, 0.0)) {}

void FieldRecorder::on_checkpoint(std::size_t index, double t, const Configuration& cfg) {
  for (std::size_t i = 0; i < functions_.size(); ++i) values_[i][index] = fluctuation_field(cfg, functions_[i], params_, t);
}

namespace {

std::vector<std::unique_ptr<Integrand>> current_integrand(const ModelParams& params, const TestFunction& h) {
  std::vector<std::unique_ptr<Integrand>> out;
  const TermSpec term{TermKind::current};
  out.push_back(make_integrand(term, params, default_term_weights(term, params, h)));
  return out;
}

}  // namespace

MartingaleRecorder::MartingaleRecorder(const ModelParams& params, const TestFunction& h, std::size_t checkpoints)
    : params_(params),
      weights_(test_weights(h, params.n(), params.ring_size())),
      integral_(current_integrand(params, h), checkpoints),
      values_(checkpoints, 0.0),
      fields_(checkpoints, 0.0) {}

void MartingaleRecorder::on_start(const Configuration& cfg) {
  integral_.on_start(cfg);
  initial_field_ = field_from_weights(cfg, weights_, params_.rho_value(), params_.n());
}

void MartingaleRecorder::on_event(const Event& event, const Configuration& after) { integral_.on_event(event, after); }

void MartingaleRecorder::on_checkpoint(std::size_t index, double t, const Configuration& cfg) {
  integral_.on_checkpoint(index, t, cfg);
  fields_[index] = field_from_weights(cfg, weights_, params_.rho_value(), params_.n());
  values_[index] = fields_[index] - initial_field_ - integral_.integral(0, index);
}

namespace {

void replay_with_checkpoints(const Trajectory& trajectory, std::span<const double> checkpoints,
                             TrajectoryObserver& observer) {
  Configuration cfg = trajectory.initial;
  observer.on_start(cfg);
  std::size_t next = 0;
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    while (next < trajectory.events.size() && trajectory.events[next].time <= checkpoints[k]) {
      const Event& e = trajectory.events[next++];
      cfg.swap_sites(e.bond, static_cast<long>(e.bond) + 1);
      observer.on_event(e, cfg);
    }
    observer.on_checkpoint(k, checkpoints[k], cfg);
  }
}

}  // namespace

void replay_trajectory(const Trajectory& trajectory, TrajectoryObserver& observer) {
  replay_with_checkpoints(trajectory, trajectory.sampling_times, observer);
}

double time_integral_term(const Trajectory& trajectory, const TermSpec& term, const ModelParams& params,
                          std::vector<double> weights, double t) {
  if (t > trajectory.t_max) throw InvalidInput("trajectory does not cover [0, t]");
  std::vector<std::unique_ptr<Integrand>> list;
  list.push_back(make_integrand(term, params, std::move(weights)));
  IntegralRecorder recorder(std::move(list), 1);
  const double checkpoint[1] = {t};
  replay_with_checkpoints(trajectory, checkpoint, recorder);
  return recorder.integral(0, 0);
}

std::vector<double> dynkin_martingale(const Trajectory& trajectory, const TestFunction& h, const ModelParams& params) {
  MartingaleRecorder recorder(params, h, trajectory.sampling_times.size());
  replay_trajectory(trajectory, recorder);
  std::vector<double> out(trajectory.sampling_times.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = recorder.martingale(k);
  return out;
}

}  // namespace kcm
