#include "containment/comm.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>

namespace containment {
namespace {

constexpr double kTimeEps = 1e-9;
constexpr double kMaxDropProbability = 1.0 - 1e-9;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t edge_stream_seed(std::uint64_t seed, Edge edge) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(edge.from));
  h = splitmix64(h ^ (static_cast<std::uint64_t>(edge.to) << 32));
  return h;
}

// Uniform in [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementations.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double quantize_down(double value, double quantum) {
  if (quantum <= 0.0) return value;
  return std::floor(value / quantum + kTimeEps) * quantum;
}

// Index of the earliest event that extends a chain whose last send time is
// `chain_send`, or -1.
std::ptrdiff_t next_link(const std::vector<Transmission>& events, std::size_t from,
                         double chain_send, double bound) {
  const double limit = chain_send + bound + kTimeEps;
  for (std::size_t k = from; k < events.size(); ++k) {
    if (events[k].send_time > limit) break;
    if (events[k].delivered() && events[k].arrival_time() <= limit) {
      return static_cast<std::ptrdiff_t>(k);
    }
  }
  return -1;
}

std::string format_time(double value) {
  if (std::isinf(value)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

}  // namespace

void CommConfig::validate() const {
  if (!(sampling_period > 0.0)) throw ConfigError("comm: sampling period must be > 0");
  if (!(blackout_bound > 0.0)) throw ConfigError("comm: blackout bound must be > 0");
  if (blackout_bound < sampling_period) {
    throw ConfigError("comm: blackout bound T* must be >= sampling period T");
  }
  if (!(drop_probability >= 0.0 && drop_probability <= 1.0)) {
    throw ConfigError("comm: drop probability must lie in [0, 1]");
  }
  if (!(max_delay >= 0.0)) throw ConfigError("comm: max delay must be >= 0");
  if (!(max_delay < blackout_bound)) throw ConfigError("comm: max delay must be < T*");
  if (!(delay_quantum >= 0.0)) throw ConfigError("comm: delay quantum must be >= 0");
}

LinkSchedule generate_schedule(Edge edge, const CommConfig& cfg, double t_end) {
  cfg.validate();
  if (!(t_end >= 0.0)) throw ConfigError("comm: horizon must be >= 0");

  LinkSchedule schedule;
  schedule.edge = edge;
  schedule.horizon = t_end;

  std::mt19937_64 rng(edge_stream_seed(cfg.seed, edge));
  const double drop = std::min(cfg.drop_probability, kMaxDropProbability);
  const double max_delay = quantize_down(cfg.max_delay, cfg.delay_quantum);
  const auto last = static_cast<std::int64_t>(std::floor(t_end / cfg.sampling_period + kTimeEps));
  schedule.events.reserve(static_cast<std::size_t>(last + 1));
  for (std::int64_t k = 0; k <= last; ++k) {
    Transmission tx;
    tx.seq = k;
    tx.send_time = static_cast<double>(k) * cfg.sampling_period;
    const double drop_draw = unit_uniform(rng);
    const double delay_draw = unit_uniform(rng);
    if (drop_draw < drop) {
      tx.delay = kLost;
    } else if (cfg.delay_quantum > 0.0) {
      const auto levels = static_cast<std::int64_t>(std::floor(max_delay / cfg.delay_quantum + kTimeEps));
      const auto pick = std::min<std::int64_t>(
          levels, static_cast<std::int64_t>(delay_draw * static_cast<double>(levels + 1)));
      tx.delay = static_cast<double>(pick) * cfg.delay_quantum;
    } else {
      tx.delay = delay_draw * max_delay;
    }
    schedule.events.push_back(tx);
  }

  // Repair: walk the chain from t = 0 and force the earliest pending event
  // through whenever no natural delivery keeps the blackout within T*.
  double chain_send = 0.0;
  std::size_t next = 0;
  while (chain_send + cfg.blackout_bound < t_end - kTimeEps && next < schedule.events.size()) {
    const auto k = next_link(schedule.events, next, chain_send, cfg.blackout_bound);
    if (k >= 0) {
      chain_send = schedule.events[static_cast<std::size_t>(k)].send_time;
      next = static_cast<std::size_t>(k) + 1;
      continue;
    }
    Transmission& forced = schedule.events[next];
    const double feasible = chain_send + cfg.blackout_bound - forced.send_time;
    forced.delay = quantize_down(std::min(max_delay, feasible), cfg.delay_quantum);
    chain_send = forced.send_time;
    ++next;
  }
  return schedule;
}

bool verify_blackout_bound(const LinkSchedule& schedule, double blackout_bound) {
  double chain_send = 0.0;
  std::size_t next = 0;
  while (chain_send + blackout_bound < schedule.horizon - kTimeEps) {
    const auto k = next_link(schedule.events, next, chain_send, blackout_bound);
    if (k < 0) return false;
    chain_send = schedule.events[static_cast<std::size_t>(k)].send_time;
    next = static_cast<std::size_t>(k) + 1;
  }
  return true;
}

Mailboxes::Mailboxes(std::vector<Edge> edges) : edges_(std::move(edges)), slots_(edges_.size()) {}

int Mailboxes::edge_index(Edge e) const {
  const auto it = std::find(edges_.begin(), edges_.end(), e);
  if (it == edges_.end()) {
    throw std::out_of_range("mailboxes: no edge " + std::to_string(e.from + 1) + "->" +
                            std::to_string(e.to + 1));
  }
  return static_cast<int>(it - edges_.begin());
}

bool Mailboxes::deliver(int edge_index, Message message) {
  auto& slot = slots_[static_cast<std::size_t>(edge_index)];
  if (slot && slot->seq >= message.seq) return false;
  slot = std::move(message);
  return true;
}

std::optional<Message> latest_message(const Mailboxes& mailboxes, Edge edge, double t) {
  if (std::abs(mailboxes.time() - t) > kTimeEps * (1.0 + std::abs(t))) {
    throw SchedulerError("latest_message: mailboxes were not advanced to the query time");
  }
  return mailboxes.slot(mailboxes.edge_index(edge));
}

void advance_mailboxes(Mailboxes& mailboxes, std::span<const LinkSchedule> schedules,
                       double from_t, double to_t, const PayloadSource& payloads,
                       std::vector<Delivery>* audit) {
  if (from_t > to_t) throw std::invalid_argument("advance_mailboxes: from_t > to_t");
  struct Arrival {
    double time;
    std::int64_t seq;
    int edge_index;
    const Transmission* tx;
  };
  std::vector<Arrival> arrivals;
  for (const auto& schedule : schedules) {
    const int idx = mailboxes.edge_index(schedule.edge);
    for (const auto& tx : schedule.events) {
      if (!tx.delivered()) continue;
      const double at = tx.arrival_time();
      if (at > from_t + kTimeEps && at <= to_t + kTimeEps) {
        arrivals.push_back({at, tx.seq, idx, &tx});
      }
    }
  }
  std::sort(arrivals.begin(), arrivals.end(), [](const Arrival& a, const Arrival& b) {
    if (a.time != b.time) return a.time < b.time;
    if (a.edge_index != b.edge_index) return a.edge_index < b.edge_index;
    return a.seq < b.seq;
  });
  for (const auto& arrival : arrivals) {
    const Edge edge = mailboxes.edges()[static_cast<std::size_t>(arrival.edge_index)];
    Message msg{arrival.seq, arrival.tx->send_time, payloads(edge.from, arrival.seq)};
    const bool accepted = mailboxes.deliver(arrival.edge_index, std::move(msg));
    if (audit) {
      audit->push_back(
          {edge, arrival.seq, arrival.tx->send_time, arrival.time, to_t, accepted});
    }
  }
  mailboxes.set_time(to_t);
}

void PayloadHistory::record(int agent, std::int64_t seq, const Vec& payload) {
  auto& series = samples_.at(static_cast<std::size_t>(agent));
  if (seq != static_cast<std::int64_t>(series.size())) {
    throw SchedulerError("payload history: samples must be recorded in order");
  }
  series.push_back(payload);
}

Vec PayloadHistory::at(int agent, std::int64_t seq) const {
  const auto& series = samples_.at(static_cast<std::size_t>(agent));
  if (seq < 0 || seq >= static_cast<std::int64_t>(series.size())) {
    throw SchedulerError("payload requested for sample " + std::to_string(seq) + " of agent " +
                         std::to_string(agent + 1) + " before it was taken");
  }
  return series[static_cast<std::size_t>(seq)];
}

PayloadSource PayloadHistory::source() const {
  return [this](int agent, std::int64_t seq) { return at(agent, seq); };
}

namespace {

std::vector<Edge> edges_of(const std::vector<LinkSchedule>& schedules) {
  std::vector<Edge> edges;
  edges.reserve(schedules.size());
  for (const auto& s : schedules) edges.push_back(s.edge);
  return edges;
}

}  // namespace

Network::Network(std::vector<LinkSchedule> schedules, double dt)
    : schedules_(std::move(schedules)), mailboxes_(edges_of(schedules_)), dt_(dt) {
  if (!(dt_ > 0.0)) throw std::invalid_argument("network: dt must be > 0");
  for (std::size_t e = 0; e < schedules_.size(); ++e) {
    const auto& events = schedules_[e].events;
    for (std::size_t k = 0; k < events.size(); ++k) {
      if (!events[k].delivered()) continue;
      const auto step =
          static_cast<std::int64_t>(std::ceil(events[k].arrival_time() / dt_ - 1e-6));
      queue_.push_back({step, static_cast<int>(e), k});
    }
  }
  std::sort(queue_.begin(), queue_.end(), [](const Pending& a, const Pending& b) {
    if (a.step != b.step) return a.step < b.step;
    if (a.edge_index != b.edge_index) return a.edge_index < b.edge_index;
    return a.event_index < b.event_index;
  });
}

void Network::advance_to_step(std::int64_t step, const PayloadSource& payloads,
                              std::vector<Delivery>* audit) {
  const double now = static_cast<double>(step) * dt_;
  while (cursor_ < queue_.size() && queue_[cursor_].step <= step) {
    const Pending& p = queue_[cursor_++];
    const auto& schedule = schedules_[static_cast<std::size_t>(p.edge_index)];
    const Transmission& tx = schedule.events[p.event_index];
    Message msg{tx.seq, tx.send_time, payloads(schedule.edge.from, tx.seq)};
    const bool accepted = mailboxes_.deliver(p.edge_index, std::move(msg));
    if (audit) {
      audit->push_back({schedule.edge, tx.seq, tx.send_time, tx.arrival_time(), now, accepted});
    }
  }
  mailboxes_.set_time(now);
}

void write_schedule_csv(std::ostream& out, std::span<const LinkSchedule> schedules) {
  out << "edge,seq,send_time,delay,arrival_time\n";
  for (const auto& schedule : schedules) {
    for (const auto& tx : schedule.events) {
      out << schedule.edge.from + 1 << "->" << schedule.edge.to + 1 << ',' << tx.seq << ','
          << format_time(tx.send_time) << ',' << format_time(tx.delay) << ','
          << format_time(tx.arrival_time()) << '\n';
    }
  }
}

}  // namespace containment
