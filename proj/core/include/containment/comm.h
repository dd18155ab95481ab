#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "containment/types.h"

namespace containment {

inline constexpr double kLost = std::numeric_limits<double>::infinity();

/// Parameters of the sampled, lossy, delayed link model shared by all edges.
struct CommConfig {
  double sampling_period = 0.1;  // T, seconds
  double blackout_bound = 1.5;   // T*, seconds
  double drop_probability = 0.0;
  double max_delay = 0.0;        // seconds
  /// Delays are drawn on multiples of this quantum. Zero keeps them continuous.
  double delay_quantum = 0.0;
  std::uint64_t seed = 0;

  /// Throws ConfigError unless T > 0, T* >= T, 0 <= drop <= 1,
  /// 0 <= max_delay < T*, and the quantum is nonnegative.
  void validate() const;
};

struct Transmission {
  std::int64_t seq = 0;
  double send_time = 0.0;
  double delay = 0.0;  // kLost when the packet never arrives

  bool delivered() const { return delay != kLost; }
  double arrival_time() const { return send_time + delay; }
};

struct LinkSchedule {
  Edge edge;
  double horizon = 0.0;
  std::vector<Transmission> events;  // strictly increasing seq
};

/// Events on the grid k*T, k = 0..floor(t_end / T). Each is lost with the
/// configured probability or delayed uniformly in [0, max_delay]; a repair
/// pass then forces deliveries so that no blackout exceeds T*.
/// Deterministic in (seed, edge, cfg, t_end).
LinkSchedule generate_schedule(Edge edge, const CommConfig& cfg, double t_end);

/// True iff a chain of delivered events exists, starting from time 0 and
/// reaching the schedule horizon, whose arrival-to-previous-send gaps are all
/// at most `blackout_bound`.
bool verify_blackout_bound(const LinkSchedule& schedule, double blackout_bound);

struct Message {
  std::int64_t seq = 0;
  double send_time = 0.0;
  Vec payload;
};

/// One attempted delivery; rejected deliveries carried a stale sequence number.
struct Delivery {
  Edge edge;
  std::int64_t seq = 0;
  double send_time = 0.0;
  double arrival_time = 0.0;
  double applied_time = 0.0;
  bool accepted = false;
};

/// Latest delivered message per in-edge, resolved by sequence number.
class Mailboxes {
 public:
  explicit Mailboxes(std::vector<Edge> edges);

  const std::vector<Edge>& edges() const { return edges_; }
  int edge_index(Edge e) const;  // throws std::out_of_range
  const std::optional<Message>& slot(int edge_index) const { return slots_[edge_index]; }

  /// Stores the message unless a newer sequence number is already held.
  bool deliver(int edge_index, Message message);

  double time() const { return time_; }
  void set_time(double t) { time_ = t; }

 private:
  std::vector<Edge> edges_;
  std::vector<std::optional<Message>> slots_;
  double time_ = -std::numeric_limits<double>::infinity();
};

/// chi_j(kT) for agent j and sample k. Implementations throw SchedulerError
/// for samples that have not been taken yet.
using PayloadSource = std::function<Vec(int agent, std::int64_t seq)>;

/// Most recent message on `edge` already delivered at time t. The mailboxes
/// must have been advanced exactly to t.
std::optional<Message> latest_message(const Mailboxes& mailboxes, Edge edge, double t);

/// Applies every event with arrival time in (from_t, to_t].
void advance_mailboxes(Mailboxes& mailboxes, std::span<const LinkSchedule> schedules,
                       double from_t, double to_t, const PayloadSource& payloads,
                       std::vector<Delivery>* audit = nullptr);

/// Payload snapshots captured at sampling instants.
class PayloadHistory {
 public:
  explicit PayloadHistory(int agents) : samples_(agents) {}

  /// Samples must be recorded in order 0, 1, 2, ... per agent.
  void record(int agent, std::int64_t seq, const Vec& payload);
  Vec at(int agent, std::int64_t seq) const;
  PayloadSource source() const;

 private:
  std::vector<std::vector<Vec>> samples_;
};

/// Schedules plus an arrival-ordered delivery queue, advanced on the
/// integration grid k*dt. Arrivals are rounded up to the grid.
class Network {
 public:
  Network(std::vector<LinkSchedule> schedules, double dt);

  const std::vector<LinkSchedule>& schedules() const { return schedules_; }
  Mailboxes& mailboxes() { return mailboxes_; }
  const Mailboxes& mailboxes() const { return mailboxes_; }

  /// Applies all arrivals at grid steps <= step.
  void advance_to_step(std::int64_t step, const PayloadSource& payloads,
                       std::vector<Delivery>* audit);

 private:
  struct Pending {
    std::int64_t step;
    int edge_index;
    std::size_t event_index;
  };

  std::vector<LinkSchedule> schedules_;
  Mailboxes mailboxes_;
  double dt_;
  std::vector<Pending> queue_;
  std::size_t cursor_ = 0;
};

/// CSV with header `edge,seq,send_time,delay,arrival_time`; edges are written
/// as one-based `j->i`, lost packets as `inf`.
void write_schedule_csv(std::ostream& out, std::span<const LinkSchedule> schedules);

}  // namespace containment
